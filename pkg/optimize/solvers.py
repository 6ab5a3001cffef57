"""
End-to-end solvers: boundary-component sweep, global KKT solve and dispatch
"""

import logging
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

import config
from algebra.polynomial import PolySystem
from algebra.systems import build_kkt_system, build_lagrange_system, kappa_indices
from core.errors import PositivityError, RecoveryError
from core.frequencies import check_positivity, phi, recover_policy
from core.geometry import enumerate_components, enumerate_relevant
from core.pomdp import Policy, Pomdp, StateActionFrequency
from homotopy.certify import alpha_certify, classify
from homotopy.tracker import TrackedSolution, TrackerOptions, solve_system
from optimize.baselines import brute_force, projected_gradient

logger = logging.getLogger(__name__)


class Method(str, Enum):
    KKT = "kkt"
    LAGRANGE_ALL = "lagrange-all"
    LAGRANGE_RELEVANT = "lagrange-relevant"
    PGD = "pgd"
    BRUTE = "brute"

    @property
    def polynomial(self) -> bool:
        return self in (Method.KKT, Method.LAGRANGE_ALL, Method.LAGRANGE_RELEVANT)


@dataclass
class ComponentResult:
    """Solution counts of one solved system"""

    component: str
    n_complex: int
    n_real: int
    n_positive: int
    best_local_objective: Optional[float]
    n_paths: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "component": self.component,
            "n_complex": self.n_complex,
            "n_real": self.n_real,
            "n_positive": self.n_positive,
            "best_local_objective": self.best_local_objective,
            "n_paths": self.n_paths,
        }


@dataclass
class SolveReport:
    """Aggregated result of one solver run on one instance"""

    method: Method
    per_component: List[ComponentResult] = field(default_factory=list)
    best_eta: Optional[StateActionFrequency] = None
    best_policy: Optional[Policy] = None
    best_value: Optional[float] = None
    wall_time: float = 0.0
    confirmed: bool = False
    failure: Optional[str] = None
    n_kappa_feasible: Optional[int] = None
    n_certified: int = 0
    solutions: List[TrackedSolution] = field(default_factory=list)

    @property
    def n_complex(self) -> int:
        return sum(c.n_complex for c in self.per_component)

    @property
    def n_real(self) -> int:
        return sum(c.n_real for c in self.per_component)

    @property
    def n_positive(self) -> int:
        return sum(c.n_positive for c in self.per_component)

    @property
    def succeeded(self) -> bool:
        return self.failure is None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "method": self.method.value,
            "best_value": self.best_value,
            "best_eta": self.best_eta.eta.tolist() if self.best_eta is not None else None,
            "best_policy": self.best_policy.pi.tolist() if self.best_policy is not None else None,
            "confirmed": self.confirmed,
            "failure": self.failure,
            "totals": {"n_complex": self.n_complex, "n_real": self.n_real,
                       "n_positive": self.n_positive, "n_certified": self.n_certified,
                       "n_kappa_feasible": self.n_kappa_feasible},
            "per_component": [c.to_dict() for c in self.per_component],
            "solutions": [s.to_dict() for s in self.solutions if s.converged],
            "wall_time": self.wall_time,
        }

    def __repr__(self):
        value = f"{self.best_value:.10g}" if self.best_value is not None else "None"
        return (f"SolveReport({self.method.value}, best_value={value}, complex={self.n_complex}, "
                f"real={self.n_real}, positive={self.n_positive})")


def _require_positivity(pomdp: Pomdp):
    if not check_positivity(pomdp):
        raise PositivityError(f"{pomdp!r} violates the positivity assumption on state frequencies")


def _policy_of(pomdp: Pomdp, eta: np.ndarray) -> Optional[Policy]:
    try:
        return recover_policy(StateActionFrequency(eta), pomdp.g_beta, pomdp.n_observations)
    except RecoveryError as exc:
        logger.warning("best solution has no recoverable policy: %s", exc)
        return None


class CriticalPointSolver(ABC):
    """Solves a family of critical-point systems and keeps the best positive solution"""

    method: Method

    def __init__(self, pomdp: Pomdp, options: Optional[TrackerOptions] = None, confirm: bool = True):
        """
        Initialize the solver

        Args:
            pomdp: The instance
            options: Tracker options
            confirm: Re-run the winning system with a fresh gamma seed
        """
        self.pomdp = pomdp
        self.options = options or TrackerOptions()
        self.confirm = confirm

    @abstractmethod
    def build_systems(self) -> List[Tuple[str, PolySystem]]:
        """Labelled systems whose positive solutions compete for the optimum"""
        pass

    def solve_one(self, system: PolySystem, options: TrackerOptions) -> List[TrackedSolution]:
        """Solve, classify and certify one system"""
        classified = [classify(s, self.pomdp, system) for s in solve_system(system, options)]
        if system.max_degree > 2:
            return classified
        return [replace(s, certified=alpha_certify(system, s.point).certified) if s.converged else s
                for s in classified]

    @staticmethod
    def best_positive(solutions: List[TrackedSolution]) -> Optional[TrackedSolution]:
        positive = [s for s in solutions if s.is_positive_feasible]
        return max(positive, key=lambda s: s.objective) if positive else None

    def annotate(self, report: SolveReport, system: PolySystem, solutions: List[TrackedSolution]):
        """Hook for method specific counts"""

    def solve(self) -> SolveReport:
        started = time.perf_counter()
        _require_positivity(self.pomdp)
        report = SolveReport(self.method)
        winner: Optional[Tuple[TrackedSolution, PolySystem, List[TrackedSolution]]] = None

        for label, system in self.build_systems():
            solutions = self.solve_one(system, self.options)
            converged = [s for s in solutions if s.converged]
            best = self.best_positive(solutions)
            report.per_component.append(ComponentResult(
                component=label,
                n_complex=len(converged),
                n_real=sum(s.is_real for s in converged),
                n_positive=sum(s.is_positive_feasible for s in converged),
                best_local_objective=best.objective if best is not None else None,
                n_paths=system.bezout_number(),
            ))
            report.n_certified += sum(s.certified for s in converged)
            self.annotate(report, system, solutions)
            logger.debug("%s: %d complex, %d real, %d positive", label,
                         report.per_component[-1].n_complex, report.per_component[-1].n_real,
                         report.per_component[-1].n_positive)
            if best is not None and (winner is None or best.objective > winner[0].objective):
                winner = (best, system, solutions)

        if winner is None:
            report.failure = "no positive feasible critical point found (tracking loss)"
            logger.warning("%s: %s", self.method.value, report.failure)
        else:
            best, system, solutions = winner
            report.best_eta = StateActionFrequency(best.eta)
            report.best_value = float(np.sum(self.pomdp.reward * best.eta))
            report.best_policy = _policy_of(self.pomdp, best.eta)
            report.solutions = solutions
            report.confirmed = self._confirm(system, best.objective) if self.confirm else False
            if self.confirm and not report.confirmed:
                report.failure = "best value not reproduced by a fresh gamma seed"

        report.wall_time = time.perf_counter() - started
        logger.info("%s: %d systems, %d complex, %d real, %d positive, best %s in %.2fs",
                    self.method.value, len(report.per_component), report.n_complex,
                    report.n_real, report.n_positive, report.best_value, report.wall_time)
        return report

    def _confirm(self, system: PolySystem, objective: float) -> bool:
        """Re-solve the winning system with a fresh gamma and compare optima"""
        fresh = self.options.with_gamma_seed(self.options.gamma_seed + config.CONFIRM_GAMMA_OFFSET)
        again = self.best_positive(self.solve_one(system, fresh))
        confirmed = again is not None and abs(again.objective - objective) <= config.CONFIRM_TOL
        if not confirmed:
            logger.warning("%s: best value %.12g not reproduced by a fresh gamma (%s)",
                           system.name, objective, None if again is None else f"{again.objective:.12g}")
        return confirmed


class BoundarySweepSolver(CriticalPointSolver):
    """Lagrange systems over all (or only the relevant) boundary components"""

    def __init__(self, pomdp: Pomdp, relevant_only: bool = False,
                 options: Optional[TrackerOptions] = None, confirm: bool = True):
        super().__init__(pomdp, options, confirm)
        self.relevant_only = relevant_only
        self.method = Method.LAGRANGE_RELEVANT if relevant_only else Method.LAGRANGE_ALL

    def build_systems(self) -> List[Tuple[str, PolySystem]]:
        enumerate_fn = enumerate_relevant if self.relevant_only else enumerate_components
        components = enumerate_fn(self.pomdp.n_actions, self.pomdp.fiber_sizes)
        logger.debug("sweeping %d boundary components", len(components))
        return [(c.label(), build_lagrange_system(self.pomdp, c)) for c in components]


class KktSolver(CriticalPointSolver):
    """The single KKT system; sign constraints are applied afterwards"""

    method = Method.KKT

    def build_systems(self) -> List[Tuple[str, PolySystem]]:
        return [("kkt", build_kkt_system(self.pomdp))]

    def annotate(self, report: SolveReport, system: PolySystem, solutions: List[TrackedSolution]):
        kappa = kappa_indices(system)
        report.n_kappa_feasible = sum(
            1 for s in solutions
            if s.is_positive_feasible and np.all(s.point[kappa].real >= -config.KAPPA_TOL))


def solve_boundary_sweep(pomdp: Pomdp, relevant_only: bool = False,
                         options: Optional[TrackerOptions] = None, confirm: bool = True) -> SolveReport:
    """
    Solve the Lagrange system of every (relevant) boundary component

    Args:
        pomdp: The instance; must satisfy the positivity assumption
        relevant_only: Restrict the sweep to relevant components
        options: Tracker options
        confirm: Re-run the winning component with a fresh gamma seed

    Returns:
        SolveReport; failure is set when no positive feasible point was found,
        or when confirm is on and the fresh gamma seed finds a different optimum
    """
    return BoundarySweepSolver(pomdp, relevant_only, options, confirm).solve()


def solve_kkt(pomdp: Pomdp, options: Optional[TrackerOptions] = None,
              confirm: bool = True) -> SolveReport:
    """Solve the global KKT system and keep the solutions with eta >= 0"""
    return KktSolver(pomdp, options, confirm).solve()


def _baseline_report(pomdp: Pomdp, method: Method, policy: Policy, value: float,
                     started: float) -> SolveReport:
    return SolveReport(method, best_eta=phi(pomdp, policy), best_policy=policy,
                       best_value=float(value), wall_time=time.perf_counter() - started,
                       confirmed=True)


def solve(pomdp: Pomdp, method: Method, options: Optional[TrackerOptions] = None,
          confirm: bool = True, grid_step: float = 0.01, pgd_steps: int = config.PGD_STEPS,
          learning_rate: float = config.PGD_LEARNING_RATE, restarts: int = 0,
          seed: int = 0) -> SolveReport:
    """
    Run one method on one instance

    Args:
        pomdp: The instance
        method: Solver to use
        options: Tracker options of the polynomial methods
        confirm: Confirmation re-run of the polynomial methods
        grid_step: Grid step of the brute-force oracle
        pgd_steps: Iterations of projected gradient ascent
        learning_rate: Base learning rate of projected gradient ascent
        restarts: Additional random starts of projected gradient ascent
        seed: Seed of the random restarts

    Returns:
        SolveReport
    """
    method = Method(method)
    if method is Method.KKT:
        return solve_kkt(pomdp, options, confirm)
    if method in (Method.LAGRANGE_ALL, Method.LAGRANGE_RELEVANT):
        return solve_boundary_sweep(pomdp, method is Method.LAGRANGE_RELEVANT, options, confirm)
    started = time.perf_counter()
    if method is Method.PGD:
        policy, value = projected_gradient(pomdp, steps=pgd_steps, learning_rate=learning_rate,
                                           restarts=restarts, seed=seed)
    else:
        policy, value = brute_force(pomdp, grid_step)
    return _baseline_report(pomdp, method, policy, value, started)
