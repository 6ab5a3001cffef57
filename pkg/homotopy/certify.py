"""
Classification and certification of homotopy endpoints
"""

import logging
from dataclasses import replace
from typing import NamedTuple

import numpy as np

import config
from algebra.polynomial import PolySystem
from core.constraints import is_feasible
from core.errors import UnsupportedSystemError
from core.pomdp import Pomdp
from homotopy.tracker import TrackedSolution

logger = logging.getLogger(__name__)


def embed_eta(pomdp: Pomdp, system: PolySystem, point: np.ndarray) -> np.ndarray:
    """Real part of the eta block scattered into a full (n_S, n_A) array"""
    eta = np.zeros((pomdp.n_states, pomdp.n_actions))
    for k, (s, a) in enumerate(system.eta_index):
        eta[s, a] = point[k].real
    return eta


def classify(solution: TrackedSolution, pomdp: Pomdp, system: PolySystem,
             tol_real: float = config.REAL_TOL,
             tol_pos: float = config.POSITIVE_TOL) -> TrackedSolution:
    """
    Set the real / positive-feasible flags and the objective of an endpoint

    Coordinates of eta that the system does not carry (zeros of a boundary
    component) are embedded as zeros before the feasibility check.

    Args:
        solution: Tracked endpoint
        pomdp: The instance the system was built from
        system: The solved system (its eta_index locates the eta block)
        tol_real: Largest imaginary part of a real solution
        tol_pos: Most negative eta entry of a positive solution

    Returns:
        A copy of the solution with flags, objective and embedded eta set
    """
    if not solution.converged:
        return replace(solution, is_real=False, is_positive_feasible=False, objective=None, eta=None)
    point = solution.point
    is_real = bool(np.abs(point.imag).max(initial=0.0) < tol_real)
    if not is_real:
        return replace(solution, is_real=False, is_positive_feasible=False, objective=None, eta=None)
    eta = embed_eta(pomdp, system, point)
    positive = bool(eta.min() >= -tol_pos
                    and is_feasible(pomdp, eta, tol=config.CLASSIFY_FEASIBILITY_TOL))
    return replace(solution, is_real=True, is_positive_feasible=positive,
                   objective=float(np.sum(pomdp.reward * eta)), eta=eta)


class Certificate(NamedTuple):
    certified: bool
    radius: float
    alpha: float
    beta: float
    gamma: float


def alpha_certify(system: PolySystem, point) -> Certificate:
    """
    Smale alpha test for systems of degree at most two

    For such systems every derivative beyond the second vanishes, so
        gamma = 1/2 * ||J^-1|| * ||D^2 F||
    with ||D^2 F|| bounded by the root sum of squares of the spectral norms of
    the equation Hessians. The point is certified when alpha = beta * gamma
    falls below config.ALPHA_THRESHOLD; the true root then lies within
    radius 2 * beta.

    Args:
        system: Square system of degree at most two
        point: Approximate root

    Returns:
        Certificate(certified, radius, alpha, beta, gamma)
    """
    if system.max_degree > 2:
        raise UnsupportedSystemError(
            f"alpha certification needs degree <= 2, system has degree {system.max_degree}")
    point = np.asarray(point, dtype=complex)
    values = system.evaluate(point)
    jac = system.jacobian(point)
    sigma = np.linalg.svd(jac, compute_uv=False)
    if sigma.size == 0 or sigma[-1] <= np.finfo(float).eps * max(1.0, sigma[0]):
        return Certificate(False, np.inf, np.inf, np.inf, np.inf)
    inverse = np.linalg.inv(jac)
    beta = float(np.linalg.norm(inverse @ values))
    hessians = system.hessian_tensor()
    second = float(np.sqrt(np.sum(np.linalg.norm(hessians, ord=2, axis=(1, 2)) ** 2)))
    gamma = 0.5 * float(np.linalg.norm(inverse, 2)) * second
    alpha = beta * gamma
    certified = alpha < config.ALPHA_THRESHOLD
    return Certificate(certified, 2.0 * beta if certified else np.inf, alpha, beta, gamma)
