"""
Invariant suites behind the check command
"""

import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

import config
from core.constraints import feasibility_residual
from core.errors import SolverError
from core.frequencies import phi, reward_gradient, reward_value
from core.pomdp import Policy, Pomdp, random_pomdp, validate
from homotopy.tracker import TrackerOptions
from optimize.solvers import solve_boundary_sweep, solve_kkt

logger = logging.getLogger(__name__)

# Shapes of the generated instances: (n_states, n_actions, fiber sizes)
CHECK_SHAPES = [(3, 2, (3,)), (3, 2, (2, 1)), (3, 2, (1, 1, 1)), (4, 3, (2, 2)), (2, 3, (1, 1))]
AGREEMENT_SHAPE = (3, 2, (2, 1))


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def __repr__(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.detail}"


def _instances(pomdp: Optional[Pomdp], seed: int) -> List[Pomdp]:
    if pomdp is not None:
        return [pomdp]
    instances = []
    for i in range(config.CHECK_INSTANCES):
        n_s, n_a, sizes = CHECK_SHAPES[i % len(CHECK_SHAPES)]
        instances.append(random_pomdp(n_s, n_a, sizes, seed + i))
    return instances


def check_validation(instances: List[Pomdp]) -> CheckResult:
    """Every instance satisfies its invariants"""
    violations = []
    for k, instance in enumerate(instances):
        violations += [f"instance {k}: {v}" for v in validate(instance)]
    if violations:
        return CheckResult("validate", False, "; ".join(violations))
    return CheckResult("validate", True, f"{len(instances)} instances valid")


def check_feasibility(instances: List[Pomdp], seed: int, tol: float) -> CheckResult:
    """Phi of random policies satisfies every defining equality"""
    rng = np.random.default_rng(seed)
    worst = 0.0
    pairs = 0
    for instance in instances:
        for _ in range(config.CHECK_POLICIES):
            policy = Policy.random(instance.n_actions, instance.n_observations, rng)
            residual = feasibility_residual(instance, phi(instance, policy))
            worst = max(worst, residual.max_linear, residual.max_quadratic, residual.sum_gap,
                        -residual.min_entry)
            pairs += 1
    return CheckResult("phi feasibility", worst <= tol,
                       f"max residual {worst:.3g} over {pairs} pairs (tol {tol:g})")


def finite_difference_gradient(pomdp: Pomdp, policy: Policy,
                               step: float = config.FINITE_DIFFERENCE_STEP) -> np.ndarray:
    """Central differences of the reward in every entry pi(a|o)"""
    grad = np.zeros_like(policy.pi)
    for a, o in np.ndindex(*policy.pi.shape):
        shift = np.zeros_like(policy.pi)
        shift[a, o] = step
        grad[a, o] = (reward_value(pomdp, Policy(policy.pi + shift))
                      - reward_value(pomdp, Policy(policy.pi - shift))) / (2.0 * step)
    return grad


def check_gradient(instances: List[Pomdp], seed: int, tol: float) -> CheckResult:
    """Adjoint gradient against central differences"""
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    tested = 0
    for instance in instances:
        if instance.n_actions == 1:
            continue
        policy = Policy.random(instance.n_actions, instance.n_observations, rng)
        exact = reward_gradient(instance, policy)
        approx = finite_difference_gradient(instance, policy)
        # relative to the gradient norm, absolute for near-zero gradients
        error = np.linalg.norm(exact - approx) / max(np.linalg.norm(exact), 1.0)
        worst = max(worst, float(error))
        tested += 1
    if tested == 0:
        return CheckResult("gradient", True, "no instance with free policy coordinates")
    return CheckResult("gradient", worst <= tol,
                       f"max relative error {worst:.3g} on {tested} instances (tol {tol:g})")


def check_agreement(instances: List[Pomdp], tol: float,
                    options: Optional[TrackerOptions] = None) -> CheckResult:
    """Best values of the KKT solve and the full boundary sweep coincide"""
    worst = 0.0
    for k, instance in enumerate(instances):
        try:
            kkt = solve_kkt(instance, options, confirm=False)
            sweep = solve_boundary_sweep(instance, relevant_only=False, options=options, confirm=False)
        except SolverError as exc:
            return CheckResult("kkt vs lagrange", False, f"instance {k}: {exc}")
        if kkt.best_value is None or sweep.best_value is None:
            return CheckResult("kkt vs lagrange", False,
                               f"instance {k}: {kkt.failure or sweep.failure}")
        worst = max(worst, abs(kkt.best_value - sweep.best_value))
    return CheckResult("kkt vs lagrange", worst <= tol,
                       f"max gap {worst:.3g} on {len(instances)} instances (tol {tol:g})")


def run_checks(seed: int = 0, tol: Optional[float] = None, pomdp: Optional[Pomdp] = None,
               options: Optional[TrackerOptions] = None) -> List[CheckResult]:
    """
    Run every invariant suite

    Without an instance the suites use generated instances derived from the
    seed; with one, every suite runs on that instance alone. An invalid
    instance stops after the validation suite.

    Args:
        seed: Base seed of generated instances and policies
        tol: Tolerance overriding the default of every suite
        pomdp: Instance to check instead of generated ones
        options: Tracker options of the agreement suite

    Returns:
        One CheckResult per suite
    """
    instances = _instances(pomdp, seed)
    results = [check_validation(instances)]
    if not results[0].passed:
        return results

    def pick(default: float) -> float:
        return default if tol is None else tol

    if pomdp is None:
        n_s, n_a, sizes = AGREEMENT_SHAPE
        agreement = [random_pomdp(n_s, n_a, sizes, seed + i)
                     for i in range(config.CHECK_AGREEMENT_INSTANCES)]
    else:
        agreement = instances
    suites: List[Callable[[], CheckResult]] = [
        lambda: check_feasibility(instances, seed, pick(config.CHECK_FEASIBILITY_TOL)),
        lambda: check_gradient(instances, seed, pick(config.CHECK_GRADIENT_TOL)),
        lambda: check_agreement(agreement, pick(config.CHECK_AGREEMENT_TOL), options),
    ]
    for suite in suites:
        result = suite()
        logger.info("%r", result)
        results.append(result)
    return results
