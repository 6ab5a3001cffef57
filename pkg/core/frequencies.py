"""
State-action frequencies: the map Phi, rewards, gradients and conditioning
"""

import logging
from typing import Optional, Tuple

import numpy as np
from scipy.linalg import LinAlgError, lu_factor, lu_solve

import config
from core.errors import ConditioningError, RecoveryError, SolverError
from core.pomdp import Policy, Pomdp, StateActionFrequency, StatePolicy

logger = logging.getLogger(__name__)


def state_policy(pomdp: Pomdp, policy: Policy) -> StatePolicy:
    """
    Compose an observation policy with the observation map

    Args:
        pomdp: The instance
        policy: Observation policy pi[a, o]

    Returns:
        tau with tau(a|s) = pi(a|g_beta(s))
    """
    return StatePolicy(policy.pi[:, list(pomdp.g_beta)])


def state_action_kernel(pomdp: Pomdp, tau: StatePolicy) -> np.ndarray:
    """
    Transition kernel of the state-action chain

    Args:
        pomdp: The instance
        tau: State policy

    Returns:
        Matrix P[(s', a'), (s, a)] = alpha(s'|s, a) * tau(a'|s')
    """
    return _kernel(pomdp.alpha, tau.tau)


def _kernel(alpha: np.ndarray, tau: np.ndarray) -> np.ndarray:
    n_s, _, n_a = alpha.shape
    n = n_s * n_a
    flat_alpha = alpha.reshape(n_s, n)
    # tau may carry leading batch axes: (..., n_A, n_S)
    tau_t = np.swapaxes(tau, -1, -2)
    return (tau_t[..., :, :, None] * flat_alpha[:, None, :]).reshape(tau.shape[:-2] + (n, n))


def _initial_state_action(pomdp: Pomdp, tau: np.ndarray) -> np.ndarray:
    return (pomdp.mu[:, None] * np.swapaxes(tau, -1, -2)).reshape(tau.shape[:-2] + (-1,))


def _factor(pomdp: Pomdp, tau: np.ndarray):
    system = np.eye(pomdp.n_state_actions) - pomdp.gamma * _kernel(pomdp.alpha, tau)
    try:
        return lu_factor(system, check_finite=True)
    except (LinAlgError, ValueError) as exc:
        raise SolverError(f"singular stationarity system (internal error): {exc}") from exc


def phi(pomdp: Pomdp, policy: Policy) -> StateActionFrequency:
    """
    Discounted state-action frequency of a policy

    Solves (I - gamma P) x = mu * tau by a dense LU factorisation and scales
    the result by (1 - gamma).

    Args:
        pomdp: The instance
        policy: Observation policy

    Returns:
        eta = (1 - gamma)(I - gamma P)^{-1}(mu * tau)
    """
    tau = state_policy(pomdp, policy).tau
    factor = _factor(pomdp, tau)
    x = lu_solve(factor, _initial_state_action(pomdp, tau))
    return StateActionFrequency(((1.0 - pomdp.gamma) * x).reshape(pomdp.n_states, pomdp.n_actions))


def phi_batch(pomdp: Pomdp, policies: np.ndarray) -> np.ndarray:
    """
    Phi for a stack of observation policies

    Args:
        pomdp: The instance
        policies: Array of shape (B, n_A, n_O)

    Returns:
        Array of shape (B, n_S, n_A) of state-action frequencies
    """
    tau = policies[:, :, list(pomdp.g_beta)]
    system = np.eye(pomdp.n_state_actions) - pomdp.gamma * _kernel(pomdp.alpha, tau)
    rhs = _initial_state_action(pomdp, tau)
    x = np.linalg.solve(system, rhs[..., None])[..., 0]
    return ((1.0 - pomdp.gamma) * x).reshape(-1, pomdp.n_states, pomdp.n_actions)


def reward_value(pomdp: Pomdp, policy: Policy) -> float:
    """Expected discounted reward R(pi) = <r, Phi(pi)>"""
    return float(np.sum(pomdp.reward * phi(pomdp, policy).eta))


def reward_gradient(pomdp: Pomdp, policy: Policy) -> np.ndarray:
    """
    Exact partial derivatives of R with respect to the entries pi(a|o)

    Differentiates eta = (1 - gamma)(I - gamma P)^{-1}(mu * tau) and contracts
    with r through one adjoint solve w = (I - gamma P)^{-T} r, reusing the LU
    factors of the forward solve:
        dR/dpi(a|o) = sum_{s in S_o} w(s, a) (gamma (alpha eta)_s + (1 - gamma) mu_s)

    Args:
        pomdp: The instance
        policy: Observation policy

    Returns:
        Array grad[a, o]; all zeros when n_A = 1 (no free coordinates)
    """
    if pomdp.n_actions == 1:
        return np.zeros((1, pomdp.n_observations))
    tau = state_policy(pomdp, policy).tau
    factor = _factor(pomdp, tau)
    gamma = pomdp.gamma
    eta = (1.0 - gamma) * lu_solve(factor, _initial_state_action(pomdp, tau))
    w = lu_solve(factor, pomdp.reward.ravel(), trans=1).reshape(pomdp.n_states, pomdp.n_actions)
    inflow = gamma * pomdp.alpha.reshape(pomdp.n_states, -1) @ eta + (1.0 - gamma) * pomdp.mu

    grad = np.zeros((pomdp.n_actions, pomdp.n_observations))
    for o, fiber in enumerate(pomdp.fibers):
        grad[:, o] = w[fiber, :].T @ inflow[fiber]
    return grad


def condition(eta: StateActionFrequency, tol: float = config.POSITIVITY_TOL) -> StatePolicy:
    """
    Recover the state policy by conditioning on states

    Args:
        eta: State-action frequency
        tol: Minimum admissible state frequency

    Returns:
        tau(a|s) = eta(s, a) / rho_s
    """
    rho = eta.rho
    small = np.nonzero(rho <= tol)[0]
    if small.size:
        raise ConditioningError(small.tolist(), tol)
    return StatePolicy((eta.eta / rho[:, None]).T)


def recover_policy(eta: StateActionFrequency, g_beta, n_observations: Optional[int] = None,
                   tol: float = config.POSITIVITY_TOL) -> Policy:
    """
    Invert the composition with the observation map on its image

    Averages the conditionals of the states in each fiber weighted by their
    frequency; states with rho below tol contribute nothing.

    Args:
        eta: State-action frequency (exactly or approximately feasible)
        g_beta: Observation index per state
        n_observations: Number of observations (defaults to max(g_beta) + 1)
        tol: Minimum state frequency taken into account

    Returns:
        Column-stochastic observation policy
    """
    g_beta = np.asarray(g_beta, dtype=int)
    if n_observations is None:
        n_observations = int(g_beta.max()) + 1
    values = np.clip(np.asarray(eta.eta, dtype=float), 0.0, None)
    rho = values.sum(axis=1)
    weights = np.where(rho > tol, 1.0, 0.0)

    pi = np.zeros((values.shape[1], n_observations))
    empty = []
    for o in range(n_observations):
        members = np.nonzero((g_beta == o) & (weights > 0))[0]
        mass = rho[members].sum()
        if members.size == 0 or mass <= tol:
            empty.append(o)
            continue
        pi[:, o] = values[members].sum(axis=0) / mass
    if empty:
        raise RecoveryError(empty, tol)
    pi /= pi.sum(axis=0, keepdims=True)
    return Policy(pi)


def state_frequency(eta: StateActionFrequency) -> np.ndarray:
    """State marginal rho_s = sum_a eta(s, a)"""
    return eta.rho.copy()


def monomial_frequency(pomdp: Pomdp, policy: Policy, rho: np.ndarray) -> StateActionFrequency:
    """
    Point of the rank-one variety given by eta(s, a) = pi(a|g_beta(s)) rho(s)

    Args:
        pomdp: The instance (only g_beta is used)
        policy: Observation policy, may have zero entries (boundary points)
        rho: State weights

    Returns:
        The parametrised frequency (not necessarily on the linear constraints)
    """
    tau = state_policy(pomdp, policy).tau
    return StateActionFrequency(tau.T * np.asarray(rho, dtype=float)[:, None])


def check_positivity(pomdp: Pomdp, n_probe: int = config.POSITIVITY_PROBES,
                     seed: int = 0) -> bool:
    """
    Check the positivity assumption on state frequencies

    Full support of mu is sufficient; otherwise random policies are probed.

    Args:
        pomdp: The instance
        n_probe: Number of random policies to probe
        seed: Seed of the probing generator

    Returns:
        False if some probed policy leaves a state with rho_s < POSITIVITY_TOL
    """
    if pomdp.mu.min() > 0:
        return True
    rng = np.random.default_rng(seed)
    for _ in range(n_probe):
        policy = Policy.random(pomdp.n_actions, pomdp.n_observations, rng)
        rho = phi(pomdp, policy).rho
        if rho.min() < config.POSITIVITY_TOL:
            logger.info("positivity fails: state %d has frequency %.3g",
                        int(np.argmin(rho)), float(rho.min()))
            return False
    return True


def neumann_frequency(pomdp: Pomdp, policy: Policy, horizon: int = 200) -> Tuple[np.ndarray, float]:
    """
    Truncated Neumann series (1 - gamma) sum_{t <= horizon} gamma^t P^t (mu * tau)

    Args:
        pomdp: The instance
        policy: Observation policy
        horizon: Last power included

    Returns:
        (eta as (n_S, n_A) array, remainder bound gamma^(horizon+1))
    """
    tau = state_policy(pomdp, policy).tau
    kernel = _kernel(pomdp.alpha, tau)
    term = _initial_state_action(pomdp, tau)
    total = term.copy()
    for _ in range(horizon):
        term = pomdp.gamma * kernel @ term
        total += term
    eta = (1.0 - pomdp.gamma) * total
    return eta.reshape(pomdp.n_states, pomdp.n_actions), pomdp.gamma ** (horizon + 1)
