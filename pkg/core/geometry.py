"""
Boundary components of the feasible set and their algebraic-degree bounds

A boundary component is a tuple (A_o) of proper action subsets, one per
observation; on it eta_sa = 0 for every a in A_{g_beta(s)}.
"""

import itertools
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Sequence, Tuple

import numpy as np

import config
from core.errors import InvalidInputError
from utils.helpers import binomial, format_partition


@dataclass(frozen=True)
class BoundaryComponent:
    """Zero sets A_o over a fixed fiber partition and action count"""

    zero_sets: Tuple[FrozenSet[int], ...]
    fiber_sizes: Tuple[int, ...]
    n_actions: int

    def __post_init__(self):
        object.__setattr__(self, "zero_sets", tuple(frozenset(z) for z in self.zero_sets))
        object.__setattr__(self, "fiber_sizes", tuple(int(d) for d in self.fiber_sizes))
        if len(self.zero_sets) != len(self.fiber_sizes):
            raise InvalidInputError(
                f"{len(self.zero_sets)} zero sets for {len(self.fiber_sizes)} observations")
        for o, zero_set in enumerate(self.zero_sets):
            if len(zero_set) >= self.n_actions or not zero_set <= set(range(self.n_actions)):
                raise InvalidInputError(
                    f"zero set {sorted(zero_set)} of observation {o} is not a proper action subset")

    @property
    def n_states(self) -> int:
        return sum(self.fiber_sizes)

    @property
    def n(self) -> int:
        """Dimension of the ambient affine space of the component"""
        return (self.n_states * self.n_actions - self.n_states
                - sum(d * len(z) for d, z in zip(self.fiber_sizes, self.zero_sets)))

    @property
    def m(self) -> int:
        """Number of non-redundant quadratic equations"""
        return sum((d - 1) * (self.n_actions - len(z) - 1)
                   for d, z in zip(self.fiber_sizes, self.zero_sets))

    @property
    def relevant(self) -> bool:
        return all(self.n_actions - len(z) <= d for d, z in zip(self.fiber_sizes, self.zero_sets))

    @property
    def bound(self) -> int:
        return degree_bound(self)

    def free_actions(self, o: int) -> List[int]:
        """A_o^c in increasing order"""
        return [a for a in range(self.n_actions) if a not in self.zero_sets[o]]

    def label(self) -> str:
        return "|".join("{" + ",".join(str(a) for a in sorted(z)) + "}" for z in self.zero_sets)

    def __repr__(self):
        return f"BoundaryComponent({self.label()}, n={self.n}, m={self.m})"


def _check_size(n_actions: int, fiber_sizes: Sequence[int]):
    if n_actions < 1:
        raise InvalidInputError(f"n_actions must be positive, got {n_actions}")
    if not fiber_sizes or any(d < 1 for d in fiber_sizes):
        raise InvalidInputError(f"fiber sizes must be positive, got {list(fiber_sizes)}")
    if sum(fiber_sizes) * n_actions > config.MAX_STATE_ACTIONS:
        raise InvalidInputError(
            f"n_S * n_A = {sum(fiber_sizes) * n_actions} exceeds {config.MAX_STATE_ACTIONS}")


def _proper_subsets(n_actions: int) -> List[FrozenSet[int]]:
    """Proper subsets ordered by size descending, then by bitmask"""
    masks = sorted(range((1 << n_actions) - 1), key=lambda mask: (-bin(mask).count("1"), mask))
    return [frozenset(a for a in range(n_actions) if mask >> a & 1) for mask in masks]


def enumerate_components(n_actions: int, fiber_sizes: Sequence[int]) -> List[BoundaryComponent]:
    """
    Every boundary component in a deterministic order

    Args:
        n_actions: Number of actions
        fiber_sizes: Fiber sizes d_o

    Returns:
        (2^n_A - 1)^n_O components
    """
    fiber_sizes = tuple(int(d) for d in fiber_sizes)
    _check_size(n_actions, fiber_sizes)
    subsets = _proper_subsets(n_actions)
    return [BoundaryComponent(zero_sets, fiber_sizes, n_actions)
            for zero_sets in itertools.product(subsets, repeat=len(fiber_sizes))]


def enumerate_relevant(n_actions: int, fiber_sizes: Sequence[int]) -> List[BoundaryComponent]:
    """Components with |A_o| >= max(n_A - d_o, 0) for every o"""
    return [c for c in enumerate_components(n_actions, fiber_sizes) if c.relevant]


def relevant_count(n_actions: int, fiber_sizes: Sequence[int]) -> int:
    """Closed-form number of relevant components"""
    count = 1
    for d in fiber_sizes:
        count *= sum(binomial(n_actions, size)
                     for size in range(max(n_actions - d, 0), n_actions))
    return count


def degree_bound(component: BoundaryComponent) -> int:
    """
    Upper bound on the number of critical points of a linear objective

    1 if the component is a point, 0 for a positive-dimensional component
    without quadratic equations, 2^m * C(n-1, m-1) otherwise.
    """
    n, m = component.n, component.m
    if n == 0:
        return 1
    if m == 0:
        return 0
    return 2 ** m * binomial(n - 1, m - 1)


@dataclass(frozen=True)
class BoundSummary:
    fiber_sizes: Tuple[int, ...]
    n_actions: int
    total_components: int
    relevant_components: int
    total_bound: int
    relevant_bound: int

    def as_row(self) -> Dict[str, object]:
        return {
            "partition": format_partition(self.fiber_sizes),
            "total_components": self.total_components,
            "relevant_components": self.relevant_components,
            "total_bound": self.total_bound,
            "relevant_bound": self.relevant_bound,
        }


def bound_summary(n_states: int, n_actions: int, fiber_sizes: Sequence[int]) -> BoundSummary:
    """
    Component counts and summed degree bounds for one partition

    Args:
        n_states: Number of states, must equal sum of fiber_sizes
        n_actions: Number of actions
        fiber_sizes: Fiber sizes d_o

    Returns:
        BoundSummary with exact integer fields
    """
    fiber_sizes = tuple(int(d) for d in fiber_sizes)
    if sum(fiber_sizes) != n_states:
        raise InvalidInputError(
            f"partition {format_partition(fiber_sizes)} does not sum to n_S = {n_states}")
    total_components = relevant_components = total_bound = relevant_bound = 0
    for component in enumerate_components(n_actions, fiber_sizes):
        bound = degree_bound(component)
        total_components += 1
        total_bound += bound
        if component.relevant:
            relevant_components += 1
            relevant_bound += bound
    return BoundSummary(fiber_sizes, n_actions, total_components, relevant_components,
                        total_bound, relevant_bound)


def table_rows(partitions: Iterable[Sequence[int]], n_actions: int) -> List[Dict[str, object]]:
    """Rows of the bounds table, one per partition"""
    return [bound_summary(sum(p), n_actions, p).as_row() for p in partitions]


def zero_mask(component: BoundaryComponent, g_beta: Sequence[int]) -> np.ndarray:
    """
    Boolean (n_S, n_A) mask of the entries forced to zero on a component

    Args:
        component: The boundary component
        g_beta: Observation index per state

    Returns:
        mask[s, a] is True iff a is in A_{g_beta(s)}
    """
    mask = np.zeros((len(g_beta), component.n_actions), dtype=bool)
    for s, o in enumerate(g_beta):
        for a in component.zero_sets[o]:
            mask[s, a] = True
    return mask
