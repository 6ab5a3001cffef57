"""
Exception types shared by all solver packages
"""

from typing import Sequence


class SolverError(Exception):
    """Base class for every error raised by this project"""


class InvalidInputError(SolverError, ValueError):
    """Rejected input: dimension mismatch, bad anchors, non-square systems"""


class ConditioningError(SolverError, ValueError):
    """Conditioning eta on states whose frequency is below tolerance"""

    def __init__(self, states: Sequence[int], tol: float):
        self.states = list(states)
        self.tol = tol
        super().__init__(f"state frequency <= {tol:g} for states {self.states}")


class RecoveryError(SolverError, ValueError):
    """A whole observation fiber carries no frequency mass"""

    def __init__(self, observations: Sequence[int], tol: float):
        self.observations = list(observations)
        self.tol = tol
        super().__init__(
            f"cannot recover policy: fibers of observations {self.observations} "
            f"have total frequency <= {tol:g}")


class PositivityError(SolverError, ValueError):
    """Instance violates the positivity assumption on state frequencies"""


class BudgetExceededError(SolverError):
    """Total-degree homotopy would need more start paths than allowed"""

    def __init__(self, count: int, budget: int):
        self.count = count
        self.budget = budget
        super().__init__(f"Bezout number {count} exceeds path budget {budget}")


class UnsupportedSystemError(SolverError):
    """System uses features a routine cannot handle (e.g. degree > 2)"""


class InstanceFormatError(SolverError, ValueError):
    """Malformed POMDP instance document"""
