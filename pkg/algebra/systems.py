"""
Critical-point systems of the frequency program

The Lagrange system of a boundary component and the global KKT system are
assembled from the constraint objects of core.constraints as PolySystems.
Variables are ordered eta block first, then lambda, nu and (KKT only) kappa.
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np

from algebra.polynomial import Polynomial, PolySystem, VariableRegistry
from core.constraints import (Anchors, component_anchors, default_anchors, linear_constraints,
                              reduced_quadratics)
from core.errors import InvalidInputError
from core.geometry import BoundaryComponent, zero_mask
from core.pomdp import Pomdp

logger = logging.getLogger(__name__)


def eta_name(s: int, a: int) -> str:
    return f"eta_{s}_{a}"


def _stationarity(registry: VariableRegistry, reward: float, index: int,
                  linear: List[Polynomial], lambdas: List[Polynomial],
                  quadratics: List[Polynomial], nus: List[Polynomial]) -> Polynomial:
    """r_sa + sum lambda * dl/deta_sa + sum nu * dp/deta_sa"""
    equation = Polynomial.constant(reward, len(registry))
    for poly, multiplier in zip(linear, lambdas):
        partial = poly.diff(index)
        if not partial.is_zero():
            equation = equation + multiplier * partial
    for poly, multiplier in zip(quadratics, nus):
        partial = poly.diff(index)
        if not partial.is_zero():
            equation = equation + multiplier * partial
    return equation


def build_lagrange_system(pomdp: Pomdp, component: BoundaryComponent,
                          anchors: Optional[Anchors] = None) -> PolySystem:
    """
    Square Lagrange system of a boundary component

    The coordinates eta_sa with a in A_{g_beta(s)} are substituted by zero.
    Equations are the restricted linear constraints, the restricted reduced
    quadratics and one stationarity equation per free eta coordinate.

    Args:
        pomdp: The instance
        component: Boundary component (A_o)
        anchors: Map o -> (a_o, s_o) with a_o outside A_o; default picks the
            smallest free action and the smallest state of each fiber

    Returns:
        PolySystem of dimension 2 n_S n_A - (n_A - 1) n_O - sum_o (2 d_o - 1)|A_o|
    """
    if component.fiber_sizes != pomdp.fiber_sizes or component.n_actions != pomdp.n_actions:
        raise InvalidInputError(f"{component!r} does not match {pomdp!r}")
    anchors = component_anchors(pomdp, component.zero_sets) if anchors is None else anchors
    for o, (a_o, _) in anchors.items():
        if a_o in component.zero_sets[o]:
            raise InvalidInputError(
                f"anchor action {a_o} of observation {o} lies in the zero set "
                f"{sorted(component.zero_sets[o])}")

    free = [(int(s), int(a)) for s, a in np.argwhere(~zero_mask(component, pomdp.g_beta))]
    quadratic_constraints = reduced_quadratics(
        pomdp, anchors, actions={o: component.free_actions(o) for o in range(pomdp.n_observations)})

    registry = VariableRegistry(eta_name(s, a) for s, a in free)
    for s in range(pomdp.n_states):
        registry.add(f"lam_{s}")
    for q in quadratic_constraints:
        registry.add(f"nu_{q.observation}_{q.s}_{q.a}")
    n_vars = len(registry)

    eta_vars: Dict[Tuple[int, int], Polynomial] = {
        (s, a): Polynomial.zero(n_vars)
        for s in range(pomdp.n_states) for a in range(pomdp.n_actions)}
    for index, pair in enumerate(free):
        eta_vars[pair] = Polynomial.variable(index, n_vars)

    linear = [c.as_polynomial(eta_vars) for c in linear_constraints(pomdp)]
    quadratics = [q.as_polynomial(eta_vars) for q in quadratic_constraints]
    lambdas = [registry.variable(f"lam_{s}") for s in range(pomdp.n_states)]
    nus = [registry.variable(f"nu_{q.observation}_{q.s}_{q.a}") for q in quadratic_constraints]

    stationarity = [
        _stationarity(registry, float(pomdp.reward[s, a]), index, linear, lambdas, quadratics, nus)
        for index, (s, a) in enumerate(free)]
    system = PolySystem(registry, linear + quadratics + stationarity, eta_index=free,
                        name=f"lagrange[{component.label()}]")
    logger.debug("built %r", system)
    return system


def build_kkt_system(pomdp: Pomdp, anchors: Optional[Anchors] = None) -> PolySystem:
    """
    Square KKT system of the frequency program without sign constraints

    Sign multipliers kappa_{s_o a} are attached to the anchor state of each
    fiber; their stationarity contribution is repeated on every state of the
    fiber, and complementary slackness reads kappa_{s_o a} * eta_{s_o a} = 0.

    Args:
        pomdp: The instance
        anchors: Map o -> (a_o, s_o); default_anchors if omitted

    Returns:
        PolySystem of dimension 2 n_S n_A + n_O
    """
    anchors = default_anchors(pomdp) if anchors is None else anchors
    quadratic_constraints = reduced_quadratics(pomdp, anchors)
    pairs = [(s, a) for s in range(pomdp.n_states) for a in range(pomdp.n_actions)]

    registry = VariableRegistry(eta_name(s, a) for s, a in pairs)
    for s in range(pomdp.n_states):
        registry.add(f"lam_{s}")
    for q in quadratic_constraints:
        registry.add(f"nu_{q.observation}_{q.s}_{q.a}")
    for o in range(pomdp.n_observations):
        _, s_o = anchors[o]
        for a in range(pomdp.n_actions):
            registry.add(f"kappa_{s_o}_{a}")
    n_vars = len(registry)

    eta_vars = {pair: Polynomial.variable(index, n_vars) for index, pair in enumerate(pairs)}
    linear = [c.as_polynomial(eta_vars) for c in linear_constraints(pomdp)]
    quadratics = [q.as_polynomial(eta_vars) for q in quadratic_constraints]
    lambdas = [registry.variable(f"lam_{s}") for s in range(pomdp.n_states)]
    nus = [registry.variable(f"nu_{q.observation}_{q.s}_{q.a}") for q in quadratic_constraints]

    def kappa(o: int, a: int) -> Polynomial:
        return registry.variable(f"kappa_{anchors[o][1]}_{a}")

    slackness = [kappa(o, a) * eta_vars[(anchors[o][1], a)]
                 for o in range(pomdp.n_observations) for a in range(pomdp.n_actions)]
    stationarity = [
        _stationarity(registry, float(pomdp.reward[s, a]), index, linear, lambdas, quadratics, nus)
        + kappa(pomdp.g_beta[s], a)
        for index, (s, a) in enumerate(pairs)]
    system = PolySystem(registry, linear + quadratics + slackness + stationarity,
                        eta_index=pairs, name="kkt")
    logger.debug("built %r", system)
    return system


def kappa_indices(system: PolySystem) -> List[int]:
    """Registry positions of the sign multipliers of a KKT system"""
    return [i for i, name in enumerate(system.registry.names) if name.startswith("kappa_")]
