import numpy as np
import pytest

from core.constraints import feasibility_residual
from core.errors import ConditioningError, RecoveryError
from core.frequencies import (check_positivity, condition, monomial_frequency, neumann_frequency, phi,
                              phi_batch, recover_policy, reward_gradient, reward_value,
                              state_action_kernel, state_frequency, state_policy)
from core.pomdp import Policy, Pomdp, StateActionFrequency, random_pomdp
from optimize.checks import finite_difference_gradient


def single_state(reward):
    return Pomdp(alpha=np.ones((1, 1, len(reward))), g_beta=(0,), reward=np.array([reward]),
                 gamma=0.9, mu=np.ones(1), n_observations=1)


def test_phi_matches_neumann_series(example):
    policy = Policy.uniform(2, 2)
    eta = phi(example, policy).eta
    oracle, remainder = neumann_frequency(example, policy)
    assert remainder < 1e-50
    np.testing.assert_allclose(eta, oracle, atol=1e-10)
    assert eta.sum() == pytest.approx(1.0, abs=1e-12)


def test_single_state_frequency_is_the_policy():
    pomdp = single_state([1.0, 3.0, -2.0])
    policy = Policy(np.array([[0.2], [0.5], [0.3]]))
    np.testing.assert_allclose(phi(pomdp, policy).eta, [[0.2, 0.5, 0.3]], atol=1e-14)
    assert reward_value(pomdp, policy) == pytest.approx(0.2 + 1.5 - 0.6)


def test_kernel_columns_are_stochastic(split):
    tau = state_policy(split, Policy.random(2, 2, np.random.default_rng(3)))
    kernel = state_action_kernel(split, tau)
    np.testing.assert_allclose(kernel.sum(axis=0), np.ones(6), atol=1e-12)


def test_state_policy_composes_with_observation_map(example):
    pi = np.array([[0.3, 0.9], [0.7, 0.1]])
    np.testing.assert_allclose(state_policy(example, Policy(pi)).tau,
                               [[0.3, 0.3, 0.9], [0.7, 0.7, 0.1]])


def test_phi_is_feasible_for_random_policies():
    rng = np.random.default_rng(0)
    for seed, sizes in enumerate([(3,), (2, 1), (1, 1, 1), (2, 2)]):
        pomdp = random_pomdp(sum(sizes), 3, sizes, seed)
        for _ in range(25):
            policy = Policy.random(3, len(sizes), rng)
            residual = feasibility_residual(pomdp, phi(pomdp, policy))
            assert residual.within(1e-10)


def test_phi_batch_agrees_with_phi(split):
    rng = np.random.default_rng(4)
    policies = [Policy.random(2, 2, rng) for _ in range(5)]
    batch = phi_batch(split, np.stack([p.pi for p in policies]))
    for k, policy in enumerate(policies):
        np.testing.assert_allclose(batch[k], phi(split, policy).eta, atol=1e-12)


def test_monomial_parametrisation(split):
    policy = Policy.random(2, 2, np.random.default_rng(5))
    eta = phi(split, policy)
    np.testing.assert_allclose(monomial_frequency(split, policy, state_frequency(eta)).eta,
                               eta.eta, atol=1e-14)


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_central_differences(seed):
    pomdp = random_pomdp(4, 3, (2, 2), seed)
    policy = Policy.random(3, 2, np.random.default_rng(seed))
    exact = reward_gradient(pomdp, policy)
    approx = finite_difference_gradient(pomdp, policy)
    assert np.linalg.norm(exact - approx) <= 1e-5 * max(np.linalg.norm(exact), 1.0)


def test_gradient_without_free_coordinates():
    pomdp = single_state([2.0])
    np.testing.assert_array_equal(reward_gradient(pomdp, Policy(np.ones((1, 1)))), np.zeros((1, 1)))


def test_condition_inverts_phi(split):
    policy = Policy.random(2, 2, np.random.default_rng(6))
    tau = condition(phi(split, policy))
    np.testing.assert_allclose(tau.tau, state_policy(split, policy).tau, atol=1e-12)


def test_recover_policy_inverts_phi(split):
    policy = Policy.random(2, 2, np.random.default_rng(7))
    recovered = recover_policy(phi(split, policy), split.g_beta, split.n_observations)
    np.testing.assert_allclose(recovered.pi, policy.pi, atol=1e-12)


def test_condition_rejects_empty_state():
    eta = StateActionFrequency(np.array([[0.5, 0.5], [0.0, 0.0]]))
    with pytest.raises(ConditioningError) as info:
        condition(eta)
    assert info.value.states == [1]


def test_recover_policy_rejects_empty_fiber():
    eta = StateActionFrequency(np.array([[0.5, 0.5], [0.0, 0.0]]))
    with pytest.raises(RecoveryError) as info:
        recover_policy(eta, (0, 1), 2)
    assert info.value.observations == [1]


def test_recover_policy_skips_empty_states_in_fiber():
    eta = StateActionFrequency(np.array([[0.2, 0.6], [0.0, 0.0], [0.1, 0.1]]))
    pi = recover_policy(eta, (0, 0, 1), 2).pi
    np.testing.assert_allclose(pi[:, 0], [0.25, 0.75])
    np.testing.assert_allclose(pi[:, 1], [0.5, 0.5])


def test_positivity(example):
    assert check_positivity(example)
    alpha = np.zeros((2, 2, 1))
    alpha[0, :, 0] = 1.0
    trapped = Pomdp(alpha=alpha, g_beta=(0, 1), reward=np.zeros((2, 1)), gamma=0.5,
                    mu=np.array([1.0, 0.0]), n_observations=2)
    assert not check_positivity(trapped)
