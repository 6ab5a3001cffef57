"""
Reference optimizers: exhaustive policy grid and projected gradient ascent
"""

import logging
from typing import Optional, Tuple

import numpy as np

import config
from core.errors import InvalidInputError
from core.frequencies import phi_batch, reward_gradient, reward_value
from core.pomdp import Policy, Pomdp
from utils.helpers import project_columns_to_simplex, simplex_grid

logger = logging.getLogger(__name__)


def grid_divisions(grid_step: float) -> int:
    """Number of grid steps per unit; the step must divide one"""
    if grid_step <= 0 or grid_step > 1:
        raise InvalidInputError(f"grid step must lie in (0, 1], got {grid_step:g}")
    divisions = int(round(1.0 / grid_step))
    if abs(divisions * grid_step - 1.0) > 1e-9:
        raise InvalidInputError(f"grid step {grid_step:g} does not divide 1")
    return divisions


def brute_force(pomdp: Pomdp, grid_step: float = 0.01) -> Tuple[Policy, float]:
    """
    Exhaustive search over a regular grid on the product of policy simplices

    Args:
        pomdp: The instance
        grid_step: Grid resolution, faces included

    Returns:
        (best grid policy, its reward)
    """
    dimension = (pomdp.n_actions - 1) * pomdp.n_observations
    if dimension > config.BRUTE_FORCE_MAX_DIM:
        raise InvalidInputError(
            f"policy dimension {dimension} exceeds the brute-force limit {config.BRUTE_FORCE_MAX_DIM}")
    grid = simplex_grid(pomdp.n_actions, grid_divisions(grid_step))
    shape = (len(grid),) * pomdp.n_observations
    total = int(np.prod(shape))
    reward = pomdp.reward.ravel()
    logger.debug("brute force over %d policies", total)

    best_value, best_pi = -np.inf, None
    for begin in range(0, total, config.BRUTE_FORCE_CHUNK):
        digits = np.unravel_index(np.arange(begin, min(total, begin + config.BRUTE_FORCE_CHUNK)), shape)
        policies = np.stack([grid[d] for d in digits], axis=2)
        values = phi_batch(pomdp, policies).reshape(len(policies), -1) @ reward
        k = int(np.argmax(values))
        if values[k] > best_value:
            best_value, best_pi = float(values[k]), policies[k]
    return Policy(best_pi), best_value


def _ascend(pomdp: Pomdp, start: Policy, steps: int, learning_rate: float) -> Tuple[Policy, float]:
    pi = np.array(start.pi, dtype=float)
    value = reward_value(pomdp, Policy(pi))
    for _ in range(steps):
        gradient = reward_gradient(pomdp, Policy(pi))
        rate = learning_rate
        for _ in range(config.PGD_MAX_HALVINGS + 1):
            candidate = project_columns_to_simplex(pi + rate * gradient)
            candidate_value = reward_value(pomdp, Policy(candidate))
            if candidate_value >= value:
                break
            rate /= 2.0
        else:
            break
        displacement = np.abs(candidate - pi).max()
        pi, value = candidate, candidate_value
        if displacement < 1e-12:
            break
    return Policy(pi), value


def projected_gradient(pomdp: Pomdp, init: Optional[Policy] = None, steps: int = config.PGD_STEPS,
                       learning_rate: float = config.PGD_LEARNING_RATE, restarts: int = 0,
                       seed: int = 0) -> Tuple[Policy, float]:
    """
    Projected gradient ascent on the reward over the policy polytope

    Every step moves along the exact gradient, projects each column back onto
    the simplex and backtracks from the base learning rate until the reward
    does not decrease.

    Args:
        pomdp: The instance
        init: Starting policy (uniform if omitted)
        steps: Maximum number of ascent steps
        learning_rate: Base learning rate
        restarts: Additional runs from random policies
        seed: Seed of the random starting policies

    Returns:
        (final policy, reward) of the best run
    """
    rng = np.random.default_rng(seed)
    starts = [init or Policy.uniform(pomdp.n_actions, pomdp.n_observations)]
    starts += [Policy.random(pomdp.n_actions, pomdp.n_observations, rng) for _ in range(restarts)]
    runs = [_ascend(pomdp, start, steps, learning_rate) for start in starts]
    best_policy, best_value = max(runs, key=lambda run: run[1])
    logger.debug("projected gradient: %d runs, best value %.10g", len(runs), best_value)
    return best_policy, best_value
