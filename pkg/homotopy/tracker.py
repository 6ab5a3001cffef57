"""
Total-degree homotopy continuation for square polynomial systems

The target F is deformed from the start system G_i(x) = x_i^{d_i} - 1 along
    H(x, t) = (1 - t) * gamma * G(x) + t * F(x),   t from 0 to 1,
with a random unit complex gamma. Paths are tracked together as a lockstep
batch: every path keeps its own t, step size and status, and each loop
iteration performs one Euler prediction and a Newton correction for all
active paths with batched linear algebra.
"""

import itertools
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from algebra.polynomial import PolySystem
from core.errors import BudgetExceededError, InvalidInputError

logger = logging.getLogger(__name__)

# Internal path states of the lockstep tracker
_ACTIVE, _REACHED, _DIVERGED, _TRUNCATED = 0, 1, 2, 3
_MIN_DAMPING = 2.0 ** -10


class PathStatus(str, Enum):
    CONVERGED = "converged"
    DIVERGED = "diverged"
    TRUNCATED = "truncated"
    SINGULAR_ENDPOINT = "singular_endpoint"


@dataclass(frozen=True)
class TrackerOptions:
    """Step control and tolerances of the path tracker"""

    initial_step: float = config.INITIAL_STEP
    min_step: float = config.MIN_STEP
    max_step: float = config.MAX_STEP
    corrector_tol: float = config.CORRECTOR_TOL
    max_corrector_iters: int = config.MAX_CORRECTOR_ITERS
    endpoint_tol: float = config.ENDPOINT_TOL
    max_path_steps: int = config.MAX_PATH_STEPS
    gamma_seed: int = config.DEFAULT_GAMMA_SEED
    divergence_threshold: float = config.DIVERGENCE_THRESHOLD
    singular_tol: float = config.SINGULAR_TOL
    threads: int = 1
    budget: Optional[int] = None
    retrack: bool = True

    def __post_init__(self):
        if not 0 < self.min_step < self.initial_step < 1:
            raise InvalidInputError(
                f"need 0 < min_step < initial_step < 1, got {self.min_step:g}, {self.initial_step:g}")
        if self.max_step < self.initial_step:
            raise InvalidInputError(
                f"max_step {self.max_step:g} is below initial_step {self.initial_step:g}")
        for name in ("corrector_tol", "endpoint_tol", "divergence_threshold", "singular_tol"):
            if getattr(self, name) <= 0:
                raise InvalidInputError(f"{name} must be positive, got {getattr(self, name)!r}")
        if self.max_corrector_iters < 1 or self.max_path_steps < 1 or self.threads < 1:
            raise InvalidInputError("iteration limits and thread count must be positive")
        if self.budget is not None and self.budget < 1:
            raise InvalidInputError(f"budget must be positive, got {self.budget}")

    def path_budget(self) -> int:
        return self.budget if self.budget is not None else config.bezout_budget()

    def with_gamma_seed(self, gamma_seed: int) -> "TrackerOptions":
        return replace(self, gamma_seed=gamma_seed)


@dataclass(frozen=True)
class TrackedSolution:
    """Endpoint of one homotopy path with its classification flags"""

    point: np.ndarray
    residual: float
    path_status: PathStatus
    is_real: bool = False
    is_positive_feasible: bool = False
    certified: bool = False
    objective: Optional[float] = None
    eta: Optional[np.ndarray] = None
    steps: int = 0
    conditioning: Optional[float] = None

    @property
    def converged(self) -> bool:
        return self.path_status is PathStatus.CONVERGED

    def to_dict(self, names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
        coordinates = [[float(z.real), float(z.imag)] for z in self.point]
        data: Dict[str, Any] = {
            "point": coordinates,
            "residual": float(self.residual),
            "path_status": self.path_status.value,
            "is_real": self.is_real,
            "is_positive_feasible": self.is_positive_feasible,
            "certified": self.certified,
            "objective": self.objective,
        }
        if names is not None:
            data["variables"] = list(names)
        return data

    def __repr__(self):
        return (f"TrackedSolution({self.path_status.value}, residual={self.residual:.2e}, "
                f"real={self.is_real}, positive={self.is_positive_feasible})")


def random_gamma(rng: np.random.Generator) -> complex:
    """Unit complex number with uniformly distributed argument"""
    return complex(np.exp(2j * np.pi * rng.uniform()))


def _int_power(points: np.ndarray, exponents: np.ndarray) -> np.ndarray:
    """points ** exponents elementwise for small non-negative integer exponents"""
    result = np.ones_like(points)
    for k in range(1, int(exponents.max(initial=0)) + 1):
        result = np.where(exponents >= k, result * points, result)
    return result


@dataclass(frozen=True)
class TotalDegreeStart:
    """Start system x_i^{d_i} - 1 = 0 with its gamma constant"""

    degrees: Tuple[int, ...]
    gamma: complex

    @property
    def count(self) -> int:
        count = 1
        for d in self.degrees:
            count *= d
        return count

    def roots(self) -> np.ndarray:
        """All start solutions (products of roots of unity), shape (count, n)"""
        unity = [np.exp(2j * np.pi * np.arange(d) / d) for d in self.degrees]
        if not unity:
            return np.zeros((1, 0), dtype=complex)
        return np.array(list(itertools.product(*unity)), dtype=complex).reshape(-1, len(self.degrees))

    def evaluate(self, points: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """G(x) and the diagonal of its Jacobian at a stack of points"""
        degrees = np.asarray(self.degrees)
        lower = _int_power(points, np.maximum(degrees - 1, 0))
        return lower * points - 1.0, degrees * lower


def _homotopy(system: PolySystem, start: TotalDegreeStart, points: np.ndarray,
              t: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """H, dH/dx and dH/dt at a stack of points with per-point t"""
    values, jac = system.evaluate_with_jacobian_batch(points)
    g, dg = start.evaluate(points)
    weight = ((1.0 - t) * start.gamma)[:, None]
    h = weight * g + t[:, None] * values
    hx = t[:, None, None] * jac
    diag = np.arange(points.shape[1])
    hx[:, diag, diag] += weight * dg
    return h, hx, values - start.gamma * g


def _batched_solve(matrices: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve a stack of systems; singular members come back as nan"""
    try:
        return np.linalg.solve(matrices, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(rhs.shape, np.nan, dtype=complex)
        for k in range(matrices.shape[0]):
            try:
                out[k] = np.linalg.solve(matrices[k], rhs[k])
            except np.linalg.LinAlgError:
                pass
        return out


def _correct(system: PolySystem, start: TotalDegreeStart, points: np.ndarray, t: np.ndarray,
             options: TrackerOptions) -> Tuple[np.ndarray, np.ndarray]:
    """
    Newton correction at fixed t

    Returns:
        (success mask, corrected points); a path fails when an update is not
        finite or stops contracting before reaching the tolerance
    """
    x = points.copy()
    done = np.zeros(len(x), dtype=bool)
    alive = np.ones(len(x), dtype=bool)
    previous = np.full(len(x), np.inf)
    for _ in range(options.max_corrector_iters):
        idx = np.nonzero(alive & ~done)[0]
        if idx.size == 0:
            break
        h, hx, _ = _homotopy(system, start, x[idx], t[idx])
        delta = _batched_solve(hx, h)
        size = np.linalg.norm(delta, axis=1)
        finite = np.isfinite(size)
        x[idx[finite]] -= delta[finite]
        scale = 1.0 + np.linalg.norm(x[idx], axis=1)
        converged = finite & (size <= options.corrector_tol * scale)
        contracting = finite & (size <= 0.5 * previous[idx])
        done[idx[converged]] = True
        alive[idx[~converged & ~contracting]] = False
        previous[idx] = size
    return done, x


def _track_chunk(system: PolySystem, start: TotalDegreeStart, starts: np.ndarray,
                 options: TrackerOptions) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Track a batch of paths from t = 0 to t = 1

    Returns:
        (points, internal states, step counts)
    """
    n_paths = len(starts)
    x = np.array(starts, dtype=complex)
    t = np.zeros(n_paths)
    step = np.full(n_paths, options.initial_step)
    streak = np.zeros(n_paths, dtype=int)
    steps = np.zeros(n_paths, dtype=int)
    state = np.full(n_paths, _ACTIVE)

    while True:
        active = np.nonzero(state == _ACTIVE)[0]
        if active.size == 0:
            break
        ta = t[active]
        remaining = 1.0 - ta
        h = np.minimum(step[active], remaining)
        h = np.where(ta >= config.ENDGAME_START, np.minimum(h, config.ENDGAME_STEP), h)
        final = h >= remaining
        t_next = np.where(final, 1.0, ta + h)

        _, hx, ht = _homotopy(system, start, x[active], ta)
        velocity = -_batched_solve(hx, ht)
        predicted = x[active] + h[:, None] * velocity
        ok, corrected = _correct(system, start, predicted, t_next, options)
        steps[active] += 1

        good, bad = active[ok], active[~ok]
        x[good] = corrected[ok]
        t[good] = t_next[ok]
        streak[good] += 1
        grow = good[streak[good] >= 3]
        step[grow] = np.minimum(2.0 * step[grow], options.max_step)
        streak[grow] = 0

        streak[bad] = 0
        step[bad] = h[~ok] / 2.0
        state[bad[step[bad] < options.min_step]] = _TRUNCATED

        diverged = good[np.linalg.norm(x[good], axis=1) > options.divergence_threshold]
        state[diverged] = _DIVERGED
        state[good[(t[good] >= 1.0) & (state[good] == _ACTIVE)]] = _REACHED
        state[active[(steps[active] >= options.max_path_steps) & (state[active] == _ACTIVE)]] = _TRUNCATED
    return x, state, steps


def _polish(system: PolySystem, points: np.ndarray, iters: int, tol: float,
            rcond: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched damped Gauss-Newton on F keeping only residual-decreasing updates

    Steps use the pseudo-inverse of the Jacobian cut at rcond, so endpoints
    on a positive-dimensional solution set are pulled onto it instead of
    stalling in its near-null directions. A rejected step is halved on the
    next iteration.
    """
    x = points.copy()
    values = system.evaluate_batch(x)
    residual = np.abs(values).max(axis=1, initial=0.0)
    damping = np.ones(len(x))
    for _ in range(iters):
        idx = np.nonzero((residual > tol) & (damping >= _MIN_DAMPING))[0]
        if idx.size == 0:
            break
        pinv = np.linalg.pinv(system.jacobian_batch(x[idx]), rcond=rcond)
        step = np.einsum("kij,kj->ki", pinv, values[idx])
        candidate = x[idx] - damping[idx, None] * step
        cand_values = system.evaluate_batch(np.nan_to_num(candidate))
        cand_residual = np.abs(cand_values).max(axis=1, initial=0.0)
        better = np.isfinite(candidate).all(axis=1) & (cand_residual < residual[idx])
        x[idx[better]] = candidate[better]
        values[idx[better]] = cand_values[better]
        residual[idx[better]] = cand_residual[better]
        damping[idx[better]] = 1.0
        damping[idx[~better]] /= 2.0
    return x, residual


def _relative_sigma(jac: np.ndarray) -> np.ndarray:
    sigma = np.linalg.svd(jac, compute_uv=False)
    return sigma[:, -1] / np.maximum(1.0, sigma[:, 0])


def _conditioning(system: PolySystem, points: np.ndarray) -> np.ndarray:
    """
    Relative smallest singular value of the Jacobian at each point

    The larger of the raw value and the value with every column scaled by
    max(1, |x_j|).
    """
    if points.shape[1] == 0:
        return np.ones(len(points))
    jac = system.jacobian_batch(points)
    scale = np.maximum(1.0, np.abs(points))
    return np.maximum(_relative_sigma(jac), _relative_sigma(jac * scale[:, None, :]))


def _singular_mask(system: PolySystem, points: np.ndarray, singular_tol: float) -> np.ndarray:
    return _conditioning(system, points) < singular_tol


def _finish(system: PolySystem, x: np.ndarray, state: np.ndarray, steps: np.ndarray,
            options: TrackerOptions) -> List[TrackedSolution]:
    """Polish and classify the endpoints of a tracked batch"""
    results: List[Optional[TrackedSolution]] = [None] * len(x)
    reached = np.nonzero(state == _REACHED)[0]
    if reached.size:
        polished, residual = _polish(system, x[reached], config.POLISH_ITERS, options.endpoint_tol,
                                     options.singular_tol)
        conditioning = _conditioning(system, polished)
        for k, i in enumerate(reached):
            if conditioning[k] < options.singular_tol:
                status = PathStatus.SINGULAR_ENDPOINT
            elif residual[k] < config.CONVERGED_RESIDUAL:
                status = PathStatus.CONVERGED
            else:
                status = PathStatus.TRUNCATED
            results[i] = TrackedSolution(polished[k], float(residual[k]), status, steps=int(steps[i]),
                                         conditioning=float(conditioning[k]))
    for i in np.nonzero(state != _REACHED)[0]:
        status = PathStatus.DIVERGED if state[i] == _DIVERGED else PathStatus.TRUNCATED
        residual = float(np.abs(system.evaluate(np.nan_to_num(x[i]))).max(initial=0.0))
        results[i] = TrackedSolution(x[i].copy(), residual, status, steps=int(steps[i]))
    return results


def _flag_multiple(solutions: List[TrackedSolution],
                   radius: float = config.MULTIPLE_ROOT_RADIUS,
                   tol: float = config.MULTIPLE_ROOT_TOL) -> List[TrackedSolution]:
    """
    Mark ill-conditioned endpoints reached by several paths of one homotopy

    Distinct paths of a single gamma only meet at a root of multiplicity
    above one, so such clusters are singular even when polishing left their
    Jacobian just above singular_tol.
    """
    candidates = [i for i, s in enumerate(solutions)
                  if s.converged and s.conditioning is not None and s.conditioning < tol]
    if len(candidates) < 2:
        return solutions
    points = np.array([solutions[i].point for i in candidates])
    close = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2) < radius
    np.fill_diagonal(close, False)
    shared = np.nonzero(close.any(axis=1))[0]
    for k in shared:
        i = candidates[k]
        solutions[i] = replace(solutions[i], path_status=PathStatus.SINGULAR_ENDPOINT)
    if shared.size:
        logger.debug("%d endpoints lie on roots reached by several paths", len(shared))
    return solutions


def _track_all(system: PolySystem, start: TotalDegreeStart, starts: np.ndarray,
               options: TrackerOptions) -> List[TrackedSolution]:
    chunks = [starts[i:i + config.PATH_CHUNK] for i in range(0, len(starts), config.PATH_CHUNK)]

    def run(chunk):
        return _finish(system, *_track_chunk(system, start, chunk, options), options)

    if options.threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=options.threads) as pool:
            parts = list(pool.map(run, chunks))
    else:
        parts = [run(chunk) for chunk in chunks]
    return [solution for part in parts for solution in part]


def track_path(system: PolySystem, start: TotalDegreeStart, start_point: Sequence[complex],
               options: Optional[TrackerOptions] = None) -> TrackedSolution:
    """
    Track a single path of the homotopy from a start root

    Args:
        system: Square target system
        start: Start system (degrees must match the target)
        start_point: A root of the start system
        options: Tracker options

    Returns:
        The polished endpoint with its path status
    """
    options = options or TrackerOptions()
    point = np.asarray(start_point, dtype=complex).reshape(1, -1)
    if point.shape[1] != system.n_variables or len(start.degrees) != system.n_variables:
        raise InvalidInputError("start point and start system must match the target dimension")
    g, _ = start.evaluate(point)
    if np.abs(g).max(initial=0.0) > 1e-10:
        raise InvalidInputError("start point does not solve the start system")
    return _track_all(system, start, point, options)[0]


def newton_refine(system: PolySystem, point: Sequence[complex], iters: int = config.POLISH_ITERS,
                  tol: float = config.ENDPOINT_TOL,
                  singular_tol: float = config.SINGULAR_TOL) -> Tuple[np.ndarray, float, bool]:
    """
    Damped Newton refinement of an approximate root

    Each update is halved up to ten times until the residual decreases; the
    iteration stops when no damped update improves the residual.

    Args:
        system: Square system
        point: Starting point
        iters: Maximum number of Newton updates
        tol: Residual at which refinement stops
        singular_tol: Relative smallest singular value treated as singular

    Returns:
        (point, max-norm residual, singular flag); the input point is
        returned unchanged when the Jacobian is singular there
    """
    x = np.asarray(point, dtype=complex).copy()
    values = system.evaluate(x)
    residual = float(np.abs(values).max(initial=0.0))
    if _singular_mask(system, x[None, :], singular_tol)[0]:
        return x, residual, True
    for _ in range(iters):
        if residual <= tol:
            break
        try:
            delta = np.linalg.solve(system.jacobian(x), values)
        except np.linalg.LinAlgError:
            return x, residual, True
        damping = 1.0
        for _ in range(11):
            candidate = x - damping * delta
            cand_values = system.evaluate(candidate)
            cand_residual = float(np.abs(cand_values).max(initial=0.0))
            if cand_residual < residual:
                break
            damping /= 2.0
        else:
            break
        x, values, residual = candidate, cand_values, cand_residual
    return x, residual, bool(_singular_mask(system, x[None, :], singular_tol)[0])


def _canonical_key(point: np.ndarray) -> Tuple[float, ...]:
    decimals = config.SORT_DECIMALS
    return tuple(np.round(point.real, decimals) + 0.0) + tuple(np.round(point.imag, decimals) + 0.0)


def dedupe(solutions: Sequence[TrackedSolution],
           radius: float = config.DEDUPE_RADIUS) -> List[TrackedSolution]:
    """
    Merge converged endpoints closer than radius

    The lowest-residual member of each cluster survives; survivors are sorted
    by their rounded real parts, then imaginary parts. Non-converged
    endpoints follow unchanged in their input order.

    Args:
        solutions: Tracked endpoints
        radius: Euclidean merge radius

    Returns:
        Deduplicated solutions in canonical order
    """
    converged = [s for s in solutions if s.converged]
    others = [s for s in solutions if not s.converged]
    kept: List[TrackedSolution] = []
    for solution in sorted(converged, key=lambda s: (s.residual, _canonical_key(s.point))):
        if all(np.linalg.norm(solution.point - other.point) >= radius for other in kept):
            kept.append(solution)
    kept.sort(key=lambda s: _canonical_key(s.point))
    return kept + others


def _solve_linear(system: PolySystem) -> List[TrackedSolution]:
    matrix, constant = system.linear_part()
    if np.linalg.matrix_rank(matrix) < system.n_variables:
        logger.debug("%s: linear system is rank deficient, no isolated solution", system.name)
        return []
    point = np.linalg.solve(matrix, -constant)
    residual = float(np.abs(system.evaluate(point)).max(initial=0.0))
    return [TrackedSolution(point, residual, PathStatus.CONVERGED, steps=1)]


def solve_system(system: PolySystem, options: Optional[TrackerOptions] = None) -> List[TrackedSolution]:
    """
    Solve a square system by total-degree homotopy continuation

    Systems of degree one are solved directly. Truncated paths are tracked
    once more with a fresh gamma when options.retrack is set. Endpoints with
    a singular Jacobian, and ill-conditioned ones shared by several paths of
    the same gamma, are reported as singular.

    Args:
        system: Square polynomial system
        options: Tracker options (gamma_seed fixes the homotopy)

    Returns:
        Deduplicated converged solutions in canonical order, followed by
        the endpoints of the paths that did not converge
    """
    options = options or TrackerOptions()
    if not system.square:
        raise InvalidInputError(
            f"system is not square: {system.n_equations} equations, {system.n_variables} variables")
    count = system.bezout_number()
    budget = options.path_budget()
    if count > budget:
        logger.warning("%s: Bezout number %d exceeds budget %d", system.name, count, budget)
        raise BudgetExceededError(count, budget)
    if system.max_degree <= 1:
        return _solve_linear(system)

    started = time.perf_counter()
    rng = np.random.default_rng(options.gamma_seed)
    start = TotalDegreeStart(tuple(system.degrees()), random_gamma(rng))
    roots = start.roots()
    results = _flag_multiple(_track_all(system, start, roots, options))

    truncated = [i for i, s in enumerate(results) if s.path_status is PathStatus.TRUNCATED]
    if truncated and options.retrack:
        logger.debug("%s: re-tracking %d truncated paths", system.name, len(truncated))
        fresh = TotalDegreeStart(start.degrees, random_gamma(rng))
        retracked = _flag_multiple(_track_all(system, fresh, roots[truncated], options))
        for i, solution in zip(truncated, retracked):
            results[i] = solution

    statuses = {status: 0 for status in PathStatus}
    for solution in results:
        statuses[solution.path_status] += 1
    logger.debug("%s: %d paths in %.2fs, %s", system.name, count, time.perf_counter() - started,
                 ", ".join(f"{k.value}={v}" for k, v in statuses.items()))
    if statuses[PathStatus.TRUNCATED]:
        logger.info("%s: %d paths truncated", system.name, statuses[PathStatus.TRUNCATED])
    return dedupe(results)


def solutions_to_dict(solutions: Sequence[TrackedSolution],
                      names: Optional[Sequence[str]] = None) -> Dict[str, Any]:
    """Solution-set export: variable names and one record per solution"""
    return {
        "variables": list(names) if names is not None else None,
        "solutions": [solution.to_dict() for solution in solutions],
    }
