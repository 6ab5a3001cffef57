import itertools
import json
from dataclasses import replace

import numpy as np
import pytest

import config
from core.constraints import is_feasible
from core.errors import BudgetExceededError, PositivityError
from core.frequencies import reward_value
from core.geometry import enumerate_relevant
from core.pomdp import Policy, Pomdp, random_pomdp
from homotopy.tracker import TrackerOptions
from optimize.baselines import brute_force, projected_gradient
from optimize.solvers import CriticalPointSolver, Method, solve, solve_boundary_sweep, solve_kkt


def vertex_values(pomdp):
    return {actions: reward_value(pomdp, Policy.deterministic(actions, pomdp.n_actions))
            for actions in itertools.product(range(pomdp.n_actions), repeat=pomdp.n_observations)}


def test_fully_observable_sweep_finds_every_vertex(observable):
    report = solve_boundary_sweep(observable, relevant_only=True)
    assert report.succeeded
    assert (report.n_complex, report.n_real, report.n_positive) == (8, 8, 8)
    values = vertex_values(observable)
    components = enumerate_relevant(2, (1, 1, 1))
    for component, result in zip(components, report.per_component):
        assert result.component == component.label()
        actions = tuple(component.free_actions(o)[0] for o in range(3))
        assert result.n_positive == 1
        assert result.best_local_objective == pytest.approx(values[actions], abs=1e-9)
    assert report.best_value == pytest.approx(max(values.values()), abs=1e-9)
    assert report.confirmed


def test_fully_observable_kkt_counts(observable):
    report = solve_kkt(observable, confirm=False)
    assert report.n_complex == 20
    assert report.n_real == 20
    assert report.n_positive == 8
    assert report.n_kappa_feasible == 1
    assert report.best_value == pytest.approx(max(vertex_values(observable).values()), abs=1e-7)


def test_report_invariants(split):
    report = solve_boundary_sweep(split, relevant_only=True)
    assert report.succeeded
    assert report.best_value == pytest.approx(float(np.sum(split.reward * report.best_eta.eta)),
                                              abs=1e-9)
    assert is_feasible(split, report.best_eta, tol=1e-6)
    assert report.best_value == pytest.approx(reward_value(split, report.best_policy), abs=1e-6)
    document = json.loads(json.dumps(report.to_dict()))
    assert document["method"] == "lagrange-relevant"
    assert document["totals"]["n_positive"] == report.n_positive
    assert len(document["per_component"]) == 6


@pytest.mark.slow
def test_methods_agree_on_split_instance(split):
    kkt = solve_kkt(split, confirm=False)
    everything = solve_boundary_sweep(split, relevant_only=False, confirm=False)
    relevant = solve_boundary_sweep(split, relevant_only=True, confirm=False)
    assert kkt.best_value == pytest.approx(everything.best_value, abs=1e-7)
    assert relevant.best_value == pytest.approx(everything.best_value, abs=1e-7)
    _, grid_value = brute_force(split, 0.01)
    assert relevant.best_value >= grid_value - 1e-3
    _, local_value = projected_gradient(split, restarts=3, seed=1)
    assert relevant.best_value >= local_value - 1e-6


def test_worked_example_matches_grid_search(example):
    report = solve_boundary_sweep(example, relevant_only=True)
    _, grid_value = brute_force(example, 0.01)
    assert grid_value == pytest.approx(1.0 / 3.0, abs=1e-12)
    assert report.best_value == pytest.approx(grid_value, abs=1e-6)


def test_dispatch_to_baselines(split):
    for method in (Method.PGD, Method.BRUTE):
        report = solve(split, method, grid_step=0.05)
        assert report.method is method
        assert report.confirmed
        assert is_feasible(split, report.best_eta)
        assert report.best_value == pytest.approx(reward_value(split, report.best_policy))


def test_positivity_is_required():
    alpha = np.zeros((2, 2, 2))
    alpha[0] = 1.0
    trapped = Pomdp(alpha=alpha, g_beta=(0, 1), reward=np.ones((2, 2)), gamma=0.5,
                    mu=np.array([1.0, 0.0]), n_observations=2)
    with pytest.raises(PositivityError):
        solve_kkt(trapped)


def test_budget_is_enforced(split):
    with pytest.raises(BudgetExceededError):
        solve_kkt(split, TrackerOptions(budget=10))


def test_larger_fully_observable_sweep():
    pomdp = random_pomdp(4, 3, (1, 1, 1, 1), seed=2)
    report = solve_boundary_sweep(pomdp, relevant_only=True, confirm=False)
    assert (report.n_complex, report.n_real, report.n_positive) == (81, 81, 81)
    assert report.best_value == pytest.approx(max(vertex_values(pomdp).values()), abs=1e-9)


@pytest.mark.slow
def test_blind_controller_endpoints_are_certified(blind):
    report = solve_boundary_sweep(blind, relevant_only=False, confirm=False)
    assert report.n_complex == 6
    assert report.n_certified == report.n_complex
    assert report.n_positive >= 1


@pytest.mark.slow
def test_ill_conditioned_simple_root_is_counted():
    pomdp = random_pomdp(3, 2, (3,), seed=19)
    kkt = solve_kkt(pomdp, confirm=False)
    everything = solve_boundary_sweep(pomdp, relevant_only=False, confirm=False)
    assert kkt.n_complex == 6
    assert everything.n_complex == 6
    assert kkt.best_value == pytest.approx(everything.best_value, abs=1e-7)


def test_confirmation_uses_the_offset_gamma_seed(monkeypatch, observable):
    seeds = []
    original = CriticalPointSolver.solve_one

    def recording(self, system, options):
        seeds.append(options.gamma_seed)
        return original(self, system, options)

    monkeypatch.setattr(CriticalPointSolver, "solve_one", recording)
    monkeypatch.setattr(config, "CONFIRM_GAMMA_OFFSET", 7)
    report = solve_boundary_sweep(observable, relevant_only=True,
                                  options=TrackerOptions(gamma_seed=3))
    assert report.confirmed
    assert seeds == [3] * 8 + [10]


def test_disagreeing_confirmation_is_a_failure(monkeypatch, observable):
    original = CriticalPointSolver.solve_one

    def drifting(self, system, options):
        solutions = original(self, system, options)
        if options.gamma_seed == self.options.gamma_seed:
            return solutions
        return [replace(s, objective=s.objective + 1e-3) if s.objective is not None else s
                for s in solutions]

    monkeypatch.setattr(CriticalPointSolver, "solve_one", drifting)
    report = solve_boundary_sweep(observable, relevant_only=True)
    assert not report.confirmed
    assert not report.succeeded
    assert report.best_value is not None
    assert solve_boundary_sweep(observable, relevant_only=True, confirm=False).succeeded
