"""
Core package: POMDP model, frequencies, constraints and boundary geometry
"""

from .errors import (BudgetExceededError, ConditioningError, InstanceFormatError, InvalidInputError,
                     PositivityError, RecoveryError, SolverError, UnsupportedSystemError)
from .pomdp import (Policy, Pomdp, StateActionFrequency, StatePolicy, example_pomdp, load_pomdp,
                    pomdp_from_dict, pomdp_to_dict, random_pomdp, save_pomdp, validate)
from .frequencies import (check_positivity, condition, monomial_frequency, phi, phi_batch,
                          recover_policy, reward_gradient, reward_value, state_action_kernel,
                          state_frequency, state_policy)
from .constraints import (FeasibilityResidual, LinearConstraint, MinorConstraint, ReducedQuadratic,
                          component_anchors, constraints_to_dict, default_anchors,
                          feasibility_residual, is_feasible, linear_constraints,
                          minor_constraints, reduced_quadratics)
from .geometry import (BoundaryComponent, BoundSummary, bound_summary, degree_bound,
                       enumerate_components, enumerate_relevant, table_rows, zero_mask)

__all__ = [
    'SolverError', 'InvalidInputError', 'ConditioningError', 'RecoveryError', 'PositivityError',
    'BudgetExceededError', 'UnsupportedSystemError', 'InstanceFormatError',
    'Pomdp', 'Policy', 'StatePolicy', 'StateActionFrequency', 'validate', 'random_pomdp',
    'example_pomdp', 'pomdp_to_dict', 'pomdp_from_dict', 'load_pomdp', 'save_pomdp',
    'state_policy', 'state_action_kernel', 'phi', 'phi_batch', 'reward_value', 'reward_gradient',
    'condition', 'recover_policy', 'check_positivity', 'state_frequency', 'monomial_frequency',
    'LinearConstraint', 'MinorConstraint', 'ReducedQuadratic', 'FeasibilityResidual',
    'linear_constraints', 'minor_constraints', 'reduced_quadratics', 'default_anchors',
    'component_anchors', 'feasibility_residual', 'is_feasible', 'constraints_to_dict',
    'BoundaryComponent', 'BoundSummary', 'enumerate_components', 'enumerate_relevant',
    'degree_bound', 'bound_summary', 'table_rows', 'zero_mask',
]
