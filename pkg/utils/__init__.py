"""
Utilities package for simplex helpers and counting
"""

from .helpers import (binomial, format_partition, parse_partition, project_columns_to_simplex,
                      project_to_simplex, sample_simplex, simplex_grid)

__all__ = ['sample_simplex', 'project_to_simplex', 'project_columns_to_simplex', 'simplex_grid',
           'binomial', 'parse_partition', 'format_partition']
