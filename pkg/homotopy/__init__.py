"""
Homotopy continuation package
"""

from .tracker import (PathStatus, TotalDegreeStart, TrackedSolution, TrackerOptions, dedupe,
                      newton_refine, solutions_to_dict, solve_system, track_path)
from .certify import Certificate, alpha_certify, classify

__all__ = ['PathStatus', 'TotalDegreeStart', 'TrackedSolution', 'TrackerOptions', 'dedupe',
           'newton_refine', 'solutions_to_dict', 'solve_system', 'track_path',
           'Certificate', 'alpha_certify', 'classify']
