"""
Polynomial algebra package
"""

from .polynomial import Polynomial, PolySystem, VariableRegistry, system_from_dict, system_to_dict
from .systems import build_kkt_system, build_lagrange_system, kappa_indices

__all__ = [
    'Polynomial', 'PolySystem', 'VariableRegistry', 'system_from_dict', 'system_to_dict',
    'build_kkt_system', 'build_lagrange_system', 'kappa_indices',
]
