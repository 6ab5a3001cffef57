"""
Defining equalities of the feasible set of state-action frequencies

Linear constraints l_s describe the state-action polytope. On top of them the
rank-one conditions of each fiber are expressed either by the full set of
2x2 minors or by the reduced quadratics p^o_sa built around an anchor state
s_o and an anchor action a_o.

Every constraint can be evaluated numerically on an eta array of shape
(n_S, n_A) and turned into a polynomial from a table of eta variables; the
table may hold any ring elements (zeros substituted on boundary components).
"""

import itertools
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

import config
from core.errors import InvalidInputError
from core.pomdp import Pomdp

Anchors = Dict[int, Tuple[int, int]]


@dataclass(frozen=True)
class LinearConstraint:
    """l_s(eta) = <coeffs, eta> + constant"""

    label: int
    coeffs: np.ndarray
    constant: float

    def evaluate(self, eta: np.ndarray) -> complex:
        return np.sum(self.coeffs * eta) + self.constant

    def as_polynomial(self, eta_vars: Mapping[Tuple[int, int], Any]):
        total = self.constant
        for (s, a), coeff in np.ndenumerate(self.coeffs):
            if coeff != 0:
                total = float(coeff) * eta_vars[(s, a)] + total
        return total

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "linear", "state": self.label}


@dataclass(frozen=True)
class MinorConstraint:
    """eta_sa * eta_s'a' - eta_sa' * eta_s'a for s, s' in one fiber"""

    s: int
    s_other: int
    a: int
    a_other: int

    def evaluate(self, eta: np.ndarray) -> complex:
        return (eta[self.s, self.a] * eta[self.s_other, self.a_other]
                - eta[self.s, self.a_other] * eta[self.s_other, self.a])

    def as_polynomial(self, eta_vars: Mapping[Tuple[int, int], Any]):
        return (eta_vars[(self.s, self.a)] * eta_vars[(self.s_other, self.a_other)]
                - eta_vars[(self.s, self.a_other)] * eta_vars[(self.s_other, self.a)])

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "minor", "states": [self.s, self.s_other],
                "actions": [self.a, self.a_other]}


@dataclass(frozen=True)
class ReducedQuadratic:
    """
    p^o_sa(eta) = eta_sa * rho_{s_o} - eta_{s_o a} * rho_s

    Equals the signed sum over a' != a of the minors on rows (s, s_o) and
    columns (a, a').
    """

    observation: int
    anchor_action: int
    anchor_state: int
    s: int
    a: int

    def evaluate(self, eta: np.ndarray) -> complex:
        return (eta[self.s, self.a] * np.sum(eta[self.anchor_state])
                - eta[self.anchor_state, self.a] * np.sum(eta[self.s]))

    def as_polynomial(self, eta_vars: Mapping[Tuple[int, int], Any]):
        n_actions = 1 + max(a for _, a in eta_vars)
        rho_anchor = sum(eta_vars[(self.anchor_state, b)] for b in range(n_actions))
        rho_s = sum(eta_vars[(self.s, b)] for b in range(n_actions))
        return eta_vars[(self.s, self.a)] * rho_anchor - eta_vars[(self.anchor_state, self.a)] * rho_s

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": "reduced_quadratic", "observation": self.observation,
                "anchor_action": self.anchor_action, "anchor_state": self.anchor_state,
                "state": self.s, "action": self.a}


def linear_constraints(pomdp: Pomdp) -> List[LinearConstraint]:
    """
    Stationarity constraints of the state-action polytope

    l_s(eta) = sum_a eta_sa - gamma sum_{s', a'} alpha(s|s', a') eta_s'a' - (1 - gamma) mu_s

    Args:
        pomdp: The instance

    Returns:
        One constraint per state
    """
    constraints = []
    for s in range(pomdp.n_states):
        coeffs = -pomdp.gamma * pomdp.alpha[s]
        coeffs[s, :] += 1.0
        coeffs.setflags(write=False)
        constraints.append(LinearConstraint(
            label=s, coeffs=coeffs, constant=-(1.0 - pomdp.gamma) * float(pomdp.mu[s])))
    return constraints


def minor_constraints(pomdp: Pomdp) -> List[MinorConstraint]:
    """All 2x2 minors on pairs of states of a common fiber"""
    minors = []
    for fiber in pomdp.fibers:
        for s, s_other in itertools.combinations(fiber, 2):
            for a, a_other in itertools.combinations(range(pomdp.n_actions), 2):
                minors.append(MinorConstraint(s, s_other, a, a_other))
    return minors


def default_anchors(pomdp: Pomdp) -> Anchors:
    """a_o = action 0 and s_o = smallest state of the fiber, for every o"""
    return {o: (0, fiber[0]) for o, fiber in enumerate(pomdp.fibers)}


def component_anchors(pomdp: Pomdp, zero_sets: Sequence[Sequence[int]]) -> Anchors:
    """
    Anchors compatible with a boundary component

    Args:
        pomdp: The instance
        zero_sets: Action sets A_o forced to zero, one per observation

    Returns:
        a_o = smallest action outside A_o, s_o = smallest state of S_o
    """
    anchors = {}
    for o, fiber in enumerate(pomdp.fibers):
        free = [a for a in range(pomdp.n_actions) if a not in set(zero_sets[o])]
        if not free:
            raise InvalidInputError(f"zero set of observation {o} contains every action")
        anchors[o] = (free[0], fiber[0])
    return anchors


def _check_anchors(pomdp: Pomdp, anchors: Anchors):
    fibers = pomdp.fibers
    if set(anchors) != set(range(pomdp.n_observations)):
        raise InvalidInputError(
            f"anchors must cover observations 0..{pomdp.n_observations - 1}, got {sorted(anchors)}")
    for o, (a_o, s_o) in anchors.items():
        if not 0 <= a_o < pomdp.n_actions:
            raise InvalidInputError(f"anchor action {a_o} of observation {o} is not an action")
        if s_o not in fibers[o]:
            raise InvalidInputError(
                f"anchor state {s_o} of observation {o} is outside its fiber {fibers[o]}")


def reduced_quadratics(pomdp: Pomdp, anchors: Optional[Anchors] = None,
                       actions: Optional[Mapping[int, Sequence[int]]] = None) -> List[ReducedQuadratic]:
    """
    Reduced quadratic equations of the rank-one conditions

    Args:
        pomdp: The instance
        anchors: Map o -> (a_o, s_o); defaults to default_anchors
        actions: Optional map o -> actions to use per observation (the free
            actions of a boundary component); all actions by default

    Returns:
        p^o_sa for every o, s in S_o other than s_o, and a != a_o
    """
    anchors = default_anchors(pomdp) if anchors is None else anchors
    _check_anchors(pomdp, anchors)
    quadratics = []
    for o, fiber in enumerate(pomdp.fibers):
        a_o, s_o = anchors[o]
        allowed = range(pomdp.n_actions) if actions is None else sorted(actions[o])
        for s in fiber:
            if s == s_o:
                continue
            for a in allowed:
                if a != a_o:
                    quadratics.append(ReducedQuadratic(o, a_o, s_o, s, a))
    return quadratics


@dataclass(frozen=True)
class FeasibilityResidual:
    max_linear: float
    max_quadratic: float
    min_entry: float
    sum_gap: float

    def within(self, tol: float) -> bool:
        return (self.max_linear <= tol and self.max_quadratic <= tol
                and self.sum_gap <= tol and self.min_entry >= -tol)


def feasibility_residual(pomdp: Pomdp, eta: Any, anchors: Optional[Anchors] = None) -> FeasibilityResidual:
    """
    Residuals of eta against every defining equality and the sign constraints

    Args:
        pomdp: The instance
        eta: Array of shape (n_S, n_A) or StateActionFrequency
        anchors: Anchors of the reduced quadratics (default anchors if omitted)

    Returns:
        FeasibilityResidual record
    """
    eta = np.asarray(getattr(eta, "eta", eta), dtype=float)
    linear = [abs(c.evaluate(eta)) for c in linear_constraints(pomdp)]
    quadratic = [abs(q.evaluate(eta)) for q in reduced_quadratics(pomdp, anchors)]
    return FeasibilityResidual(
        max_linear=float(max(linear, default=0.0)),
        max_quadratic=float(max(quadratic, default=0.0)),
        min_entry=float(eta.min()),
        sum_gap=float(abs(eta.sum() - 1.0)),
    )


def is_feasible(pomdp: Pomdp, eta: Any, anchors: Optional[Anchors] = None,
                tol: float = config.FEASIBILITY_TOL) -> bool:
    """True iff every residual is at most tol and no entry is below -tol"""
    return feasibility_residual(pomdp, eta, anchors).within(tol)


def _terms_of(coefficients: Dict[Tuple[Tuple[int, int], ...], float]) -> List[Any]:
    terms = []
    for monomial, coeff in sorted(coefficients.items()):
        if coeff == 0:
            continue
        powers: Dict[str, int] = {}
        for s, a in monomial:
            name = f"eta_{s}_{a}"
            powers[name] = powers.get(name, 0) + 1
        terms.append([powers, float(coeff)])
    return terms


def constraints_to_dict(pomdp: Pomdp, anchors: Optional[Anchors] = None) -> Dict[str, Any]:
    """
    Dump the defining equalities as JSON-ready data

    Each constraint carries its metadata and a list of
    [exponent map, coefficient] pairs over the variables eta_<s>_<a>.
    """
    anchors = default_anchors(pomdp) if anchors is None else anchors
    n_a = pomdp.n_actions
    entries = []
    for constraint in linear_constraints(pomdp):
        coefficients = {((s, a),): c for (s, a), c in np.ndenumerate(constraint.coeffs)}
        coefficients[()] = constraint.constant
        entries.append(dict(constraint.to_dict(), terms=_terms_of(coefficients)))
    for minor in minor_constraints(pomdp):
        coefficients = {
            tuple(sorted([(minor.s, minor.a), (minor.s_other, minor.a_other)])): 1.0,
            tuple(sorted([(minor.s, minor.a_other), (minor.s_other, minor.a)])): -1.0,
        }
        entries.append(dict(minor.to_dict(), terms=_terms_of(coefficients)))
    for quadratic in reduced_quadratics(pomdp, anchors):
        coefficients: Dict[Tuple[Tuple[int, int], ...], float] = {}
        for b in range(n_a):
            plus = tuple(sorted([(quadratic.s, quadratic.a), (quadratic.anchor_state, b)]))
            minus = tuple(sorted([(quadratic.anchor_state, quadratic.a), (quadratic.s, b)]))
            coefficients[plus] = coefficients.get(plus, 0.0) + 1.0
            coefficients[minus] = coefficients.get(minus, 0.0) - 1.0
        entries.append(dict(quadratic.to_dict(), terms=_terms_of(coefficients)))
    return {
        "anchors": {str(o): {"action": a_o, "state": s_o} for o, (a_o, s_o) in sorted(anchors.items())},
        "constraints": entries,
    }
