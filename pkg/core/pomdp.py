"""
POMDP data model with deterministic observations (state aggregation)

Arrays follow one layout throughout the project:
    alpha[s', s, a]  probability of next state s' given (s, a)
    pi[a, o]         observation policy, columns are probability vectors
    tau[a, s]        state policy
    eta[s, a]        state-action frequency, flattened row-major by (s, a)
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Sequence, Tuple, Union

import numpy as np

import config
from core.errors import InstanceFormatError, InvalidInputError
from utils.helpers import sample_simplex


def _frozen(array: Any) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Pomdp:
    """A POMDP whose observation kernel is a map g_beta: states -> observations"""

    alpha: np.ndarray
    g_beta: Tuple[int, ...]
    reward: np.ndarray
    gamma: float
    mu: np.ndarray
    n_observations: int

    def __post_init__(self):
        object.__setattr__(self, "alpha", _frozen(self.alpha))
        object.__setattr__(self, "reward", _frozen(self.reward))
        object.__setattr__(self, "mu", _frozen(self.mu))
        object.__setattr__(self, "g_beta", tuple(int(o) for o in self.g_beta))
        object.__setattr__(self, "gamma", float(self.gamma))
        n_s = self.alpha.shape[0] if self.alpha.ndim == 3 else -1
        if self.alpha.ndim != 3 or self.alpha.shape[1] != n_s:
            raise InvalidInputError(f"alpha must have shape (n_S, n_S, n_A), got {self.alpha.shape}")
        if self.reward.shape != (n_s, self.alpha.shape[2]):
            raise InvalidInputError(
                f"reward must have shape {(n_s, self.alpha.shape[2])}, got {self.reward.shape}")
        if self.mu.shape != (n_s,):
            raise InvalidInputError(f"mu must have length {n_s}, got {self.mu.shape}")
        if len(self.g_beta) != n_s:
            raise InvalidInputError(f"g_beta must have length {n_s}, got {len(self.g_beta)}")

    @property
    def n_states(self) -> int:
        return self.alpha.shape[0]

    @property
    def n_actions(self) -> int:
        return self.alpha.shape[2]

    @property
    def n_state_actions(self) -> int:
        return self.n_states * self.n_actions

    @property
    def fibers(self) -> List[List[int]]:
        """States grouped by observation: fibers[o] = sorted S_o"""
        groups: List[List[int]] = [[] for _ in range(self.n_observations)]
        for s, o in enumerate(self.g_beta):
            if 0 <= o < self.n_observations:
                groups[o].append(s)
        return groups

    @property
    def fiber_sizes(self) -> Tuple[int, ...]:
        return tuple(len(fiber) for fiber in self.fibers)

    def __repr__(self):
        return (f"Pomdp(n_S={self.n_states}, n_A={self.n_actions}, n_O={self.n_observations}, "
                f"gamma={self.gamma:g}, fibers={self.fiber_sizes})")


@dataclass(frozen=True)
class Policy:
    """Memoryless observation policy pi[a, o]"""

    pi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "pi", _frozen(self.pi))

    @classmethod
    def uniform(cls, n_actions: int, n_observations: int) -> "Policy":
        return cls(np.full((n_actions, n_observations), 1.0 / n_actions))

    @classmethod
    def deterministic(cls, actions: Sequence[int], n_actions: int) -> "Policy":
        """Policy choosing actions[o] with probability one at observation o"""
        pi = np.zeros((n_actions, len(actions)))
        pi[list(actions), np.arange(len(actions))] = 1.0
        return cls(pi)

    @classmethod
    def random(cls, n_actions: int, n_observations: int, rng: np.random.Generator) -> "Policy":
        return cls(sample_simplex(rng, n_actions, n_observations).T)


@dataclass(frozen=True)
class StatePolicy:
    """State policy tau[a, s]"""

    tau: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "tau", _frozen(self.tau))


@dataclass(frozen=True)
class StateActionFrequency:
    """Discounted state-action frequency eta[s, a]"""

    eta: np.ndarray
    rho: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "eta", _frozen(self.eta))
        object.__setattr__(self, "rho", _frozen(self.eta.sum(axis=1)))

    @property
    def flat(self) -> np.ndarray:
        return self.eta.ravel()


def validate(pomdp: Pomdp) -> List[str]:
    """
    Check every invariant of a POMDP instance

    Args:
        pomdp: Instance to check

    Returns:
        One description per violation (index and magnitude); empty if valid
    """
    violations = []
    tol = config.STOCHASTIC_TOL
    col_sums = pomdp.alpha.sum(axis=0)
    for s in range(pomdp.n_states):
        for a in range(pomdp.n_actions):
            gap = col_sums[s, a] - 1.0
            if abs(gap) > tol:
                violations.append(
                    f"alpha(.|s={s},a={a}) sums to {col_sums[s, a]:.12g} (off by {gap:+.3g})")
    negative = np.argwhere(pomdp.alpha < -tol)
    for s_next, s, a in negative:
        violations.append(
            f"alpha({s_next}|s={s},a={a}) = {pomdp.alpha[s_next, s, a]:.3g} is negative")

    for s in np.nonzero(pomdp.mu < -tol)[0]:
        violations.append(f"mu[{s}] = {pomdp.mu[s]:.3g} is negative")
    if abs(pomdp.mu.sum() - 1.0) > tol:
        violations.append(f"mu sums to {pomdp.mu.sum():.12g} (off by {pomdp.mu.sum() - 1.0:+.3g})")

    if pomdp.n_observations < 1:
        violations.append(f"n_observations = {pomdp.n_observations} must be positive")
    for s, o in enumerate(pomdp.g_beta):
        if not 0 <= o < pomdp.n_observations:
            violations.append(f"g_beta[{s}] = {o} outside 0..{pomdp.n_observations - 1}")
    for o, fiber in enumerate(pomdp.fibers):
        if not fiber:
            violations.append(f"g_beta is not surjective: observation {o} has an empty fiber")

    if not 0.0 < pomdp.gamma < 1.0:
        violations.append(f"gamma = {pomdp.gamma:g} outside (0, 1)")
    if not np.all(np.isfinite(pomdp.reward)):
        violations.append("reward has non-finite entries")
    return violations


def random_pomdp(n_states: int, n_actions: int, fiber_sizes: Sequence[int], seed: int,
                 gamma: float = 0.5) -> Pomdp:
    """
    Generate a random instance the way the benchmark experiments do

    Transition columns and the initial distribution are uniform on the simplex,
    rewards are independent standard normal, and the first d_0 states map to
    observation 0, the next d_1 to observation 1, and so on.

    Args:
        n_states: Number of states
        n_actions: Number of actions
        fiber_sizes: Fiber sizes d_o, must sum to n_states
        seed: Seed of the generator owned by this call
        gamma: Discount factor

    Returns:
        A valid Pomdp, bit-identical for identical arguments
    """
    fiber_sizes = [int(d) for d in fiber_sizes]
    if n_states < 1 or n_actions < 1:
        raise InvalidInputError("n_states and n_actions must be positive")
    if any(d < 1 for d in fiber_sizes):
        raise InvalidInputError(f"fiber sizes must be positive, got {fiber_sizes}")
    if sum(fiber_sizes) != n_states:
        raise InvalidInputError(
            f"fiber sizes {fiber_sizes} sum to {sum(fiber_sizes)}, expected {n_states}")

    rng = np.random.default_rng(seed)
    columns = sample_simplex(rng, n_states, n_states * n_actions)
    alpha = columns.reshape(n_states, n_actions, n_states).transpose(2, 0, 1)
    mu = sample_simplex(rng, n_states)[0]
    reward = rng.standard_normal((n_states, n_actions))
    g_beta = np.repeat(np.arange(len(fiber_sizes)), fiber_sizes)
    return Pomdp(alpha=alpha, g_beta=tuple(g_beta), reward=reward, gamma=gamma,
                 mu=mu, n_observations=len(fiber_sizes))


def example_pomdp() -> Pomdp:
    """
    The 3-state worked example with a deterministic transition graph

    States s1, s2 share observation o1 and s3 has o2; gamma = 1/2, uniform mu,
    and reward +1 in state s1.
    """
    successor = {(0, 0): 0, (0, 1): 2, (1, 0): 2, (1, 1): 0, (2, 0): 2, (2, 1): 1}
    alpha = np.zeros((3, 3, 2))
    for (s, a), s_next in successor.items():
        alpha[s_next, s, a] = 1.0
    reward = np.array([[1.0, 1.0], [0.0, 0.0], [0.0, 0.0]])
    return Pomdp(alpha=alpha, g_beta=(0, 0, 1), reward=reward, gamma=0.5,
                 mu=np.full(3, 1.0 / 3.0), n_observations=2)


def pomdp_to_dict(pomdp: Pomdp) -> Dict[str, Any]:
    """Serialize an instance to the JSON document layout"""
    return {
        "n_states": pomdp.n_states,
        "n_actions": pomdp.n_actions,
        "n_observations": pomdp.n_observations,
        "gamma": pomdp.gamma,
        "mu": pomdp.mu.tolist(),
        "g_beta": list(pomdp.g_beta),
        "alpha": [pomdp.alpha[:, s, a].tolist()
                  for s in range(pomdp.n_states) for a in range(pomdp.n_actions)],
        "reward": pomdp.reward.tolist(),
    }


def pomdp_from_dict(data: Dict[str, Any]) -> Pomdp:
    """
    Build an instance from a JSON document

    alpha may be flat over (s, a) row-major, or nested s -> a -> s'.

    Args:
        data: Parsed JSON document

    Returns:
        The instance (not validated; call validate for invariant checks)
    """
    required = ["n_states", "n_actions", "n_observations", "gamma", "mu", "g_beta",
                "alpha", "reward"]
    missing = [key for key in required if key not in data]
    if missing:
        raise InstanceFormatError(f"instance is missing fields {missing}")
    n_s, n_a = int(data["n_states"]), int(data["n_actions"])
    try:
        alpha_raw = np.asarray(data["alpha"], dtype=float)
        if alpha_raw.shape == (n_s * n_a, n_s):
            alpha = alpha_raw.reshape(n_s, n_a, n_s).transpose(2, 0, 1)
        elif alpha_raw.shape == (n_s, n_a, n_s):
            alpha = alpha_raw.transpose(2, 0, 1)
        else:
            raise InstanceFormatError(
                f"alpha has shape {alpha_raw.shape}, expected {(n_s * n_a, n_s)} "
                f"or {(n_s, n_a, n_s)}")
        return Pomdp(alpha=alpha, g_beta=tuple(int(o) for o in data["g_beta"]),
                     reward=np.asarray(data["reward"], dtype=float),
                     gamma=float(data["gamma"]), mu=np.asarray(data["mu"], dtype=float),
                     n_observations=int(data["n_observations"]))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InstanceFormatError):
            raise
        raise InstanceFormatError(f"malformed instance: {exc}") from exc


def load_pomdp(path: Union[str, Path]) -> Pomdp:
    """
    Load an instance file

    Args:
        path: JSON file path

    Returns:
        The instance
    """
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path}: top-level JSON value must be an object")
    return pomdp_from_dict(data)


def save_pomdp(pomdp: Pomdp, path: Union[str, Path]):
    """Write an instance file"""
    Path(path).write_text(json.dumps(pomdp_to_dict(pomdp), indent=2) + "\n")
