import numpy as np
import pytest

import config
from algebra.polynomial import PolySystem, VariableRegistry
from core.errors import BudgetExceededError, InvalidInputError
from homotopy.tracker import (PathStatus, TotalDegreeStart, TrackedSolution, TrackerOptions, dedupe,
                              newton_refine, solutions_to_dict, solve_system, track_path)


def make_system(build, names=("x", "y")):
    registry = VariableRegistry(names)
    variables = [registry.variable(name) for name in names]
    return PolySystem(registry, build(*variables))


def points_of(solutions):
    return np.array([s.point for s in solutions if s.converged])


def test_start_system_roots():
    start = TotalDegreeStart((2, 3), 1.0)
    roots = start.roots()
    assert start.count == 6
    assert roots.shape == (6, 2)
    g, dg = start.evaluate(roots)
    np.testing.assert_allclose(g, 0.0, atol=1e-12)
    np.testing.assert_allclose(dg, roots ** np.array([1, 2]) * np.array([2, 3]))


def test_decoupled_quadratics():
    system = make_system(lambda x, y: [x ** 2 - 1, y ** 2 - 4])
    solutions = solve_system(system)
    assert all(s.converged for s in solutions)
    np.testing.assert_allclose(points_of(solutions).real, [[-1, -2], [-1, 2], [1, -2], [1, 2]],
                               atol=1e-10)
    assert max(s.residual for s in solutions) < config.CONVERGED_RESIDUAL


def test_circle_and_hyperbola():
    system = make_system(lambda x, y: [x ** 2 + y ** 2 - 5, x * y - 2])
    found = points_of(solve_system(system))
    assert len(found) == 4
    expected = {(-2, -1), (-1, -2), (1, 2), (2, 1)}
    assert {tuple(np.round(p.real).astype(int)) for p in found} == expected
    np.testing.assert_allclose(found.imag, 0.0, atol=1e-10)


def test_solutions_at_infinity_are_not_reported():
    system = make_system(lambda x, y: [x ** 2 - 1, x * y - 1])
    solutions = solve_system(system)
    found = points_of(solutions)
    assert len(found) == 2
    np.testing.assert_allclose(found, [[-1, -1], [1, 1]], atol=1e-10)
    assert all(s.path_status is not PathStatus.CONVERGED for s in solutions[2:])


def test_double_root_is_not_converged():
    system = make_system(lambda x, y: [x ** 2, y - 1])
    assert not any(s.converged for s in solve_system(system))


def test_positive_dimensional_endpoints_are_singular():
    system = make_system(lambda x, y: [x * y, x * (y - 1)])
    solutions = solve_system(system)
    assert not any(s.converged for s in solutions)
    on_line = [s for s in solutions if s.path_status is PathStatus.SINGULAR_ENDPOINT]
    assert all(abs(s.point[0]) < 1e-6 for s in on_line)


def test_nonreal_solutions_come_in_conjugate_pairs():
    system = make_system(lambda x, y: [x ** 2 + 1, y ** 2 - 2 * x * y - 3])
    found = points_of(solve_system(system))
    assert len(found) == 4
    for point in found:
        assert np.min(np.linalg.norm(found - point.conj(), axis=1)) < 1e-8


def test_linear_systems_are_solved_directly():
    solutions = solve_system(make_system(lambda x, y: [2 * x + y - 3, x - y]))
    assert len(solutions) == 1
    assert solutions[0].steps == 1
    np.testing.assert_allclose(solutions[0].point, [1.0, 1.0])
    assert solve_system(make_system(lambda x, y: [x + y - 1, 2 * x + 2 * y - 2])) == []


def test_budget(monkeypatch):
    system = make_system(lambda x, y: [x ** 2 - 1, y ** 2 - 4])
    with pytest.raises(BudgetExceededError) as info:
        solve_system(system, TrackerOptions(budget=3))
    assert info.value.count == 4
    monkeypatch.setenv(config.BUDGET_ENV_VAR, "2")
    with pytest.raises(BudgetExceededError):
        solve_system(system)
    monkeypatch.setenv(config.BUDGET_ENV_VAR, "many")
    with pytest.raises(ValueError):
        config.bezout_budget()


def test_non_square_system_is_rejected():
    registry = VariableRegistry(["x", "y"])
    system = PolySystem(registry, [registry.variable("x") ** 2 - 1])
    with pytest.raises(InvalidInputError):
        solve_system(system)


def test_same_gamma_seed_reproduces_output():
    system = make_system(lambda x, y: [x ** 2 + y ** 2 - 5, x * y - 2])
    a = solve_system(system, TrackerOptions(gamma_seed=3))
    b = solve_system(system, TrackerOptions(gamma_seed=3))
    np.testing.assert_array_equal(points_of(a), points_of(b))


def test_threads_do_not_change_results(monkeypatch):
    monkeypatch.setattr(config, "PATH_CHUNK", 3)
    system = make_system(lambda x, y, z: [x ** 2 - y, y ** 2 - z - 1, z ** 2 + x - 2],
                         names=("x", "y", "z"))
    serial = solve_system(system, TrackerOptions(threads=1))
    parallel = solve_system(system, TrackerOptions(threads=4))
    assert len(serial) == len(parallel)
    for s, p in zip(serial, parallel):
        np.testing.assert_array_equal(s.point, p.point)
        assert s.path_status is p.path_status


def test_track_single_path():
    system = make_system(lambda x, y: [x ** 2 - 1, y ** 2 - 4])
    start = TotalDegreeStart((2, 2), complex(np.exp(0.7j)))
    solution = track_path(system, start, [1.0, 1.0])
    assert solution.converged
    assert np.abs(solution.point ** 2 - [1, 4]).max() < 1e-10
    with pytest.raises(InvalidInputError):
        track_path(system, start, [2.0, 1.0])


def test_newton_refine():
    system = make_system(lambda x, y: [x ** 2 + y ** 2 - 5, x * y - 2])
    point, residual, singular = newton_refine(system, [1.1, 1.9])
    assert not singular
    assert residual < 1e-12
    np.testing.assert_allclose(point, [1.0, 2.0], atol=1e-12)
    double = make_system(lambda x, y: [x ** 2, y - 1])
    _, _, singular = newton_refine(double, [0.0, 1.0])
    assert singular


def test_badly_scaled_simple_root_is_not_singular():
    system = make_system(lambda x, y: [x ** 2 - 1e14, y ** 2 - 1e-4])
    point, residual, singular = newton_refine(system, [1e7, 1e-2])
    assert not singular
    np.testing.assert_allclose(point.real, [1e7, 1e-2])
    assert residual < config.CONVERGED_RESIDUAL


def _solution(point, residual=1e-12, status=PathStatus.CONVERGED):
    return TrackedSolution(np.asarray(point, dtype=complex), residual, status)


def test_dedupe_merges_and_orders():
    near = _solution([1.0 + 1e-8, 0.0], residual=1e-10)
    exact = _solution([1.0, 0.0], residual=1e-14)
    lost = _solution([5.0, 5.0], residual=1.0, status=PathStatus.DIVERGED)
    other = _solution([-1.0, 2.0])
    result = dedupe([near, lost, exact, other])
    assert [s.path_status for s in result] == [PathStatus.CONVERGED, PathStatus.CONVERGED,
                                               PathStatus.DIVERGED]
    assert result[0] is other
    assert result[1] is exact
    assert result[2] is lost


def test_dedupe_is_permutation_invariant():
    solutions = [_solution([k % 3, 1j * k]) for k in range(6)]
    forward = dedupe(solutions)
    backward = dedupe(solutions[::-1])
    assert [s.point.tolist() for s in forward] == [s.point.tolist() for s in backward]


def test_options_validation():
    with pytest.raises(InvalidInputError):
        TrackerOptions(initial_step=1e-8)
    with pytest.raises(InvalidInputError):
        TrackerOptions(threads=0)
    with pytest.raises(InvalidInputError):
        TrackerOptions(budget=0)
    assert TrackerOptions().with_gamma_seed(5).gamma_seed == 5


def test_solutions_to_dict():
    document = solutions_to_dict([_solution([1.0 + 2.0j, 0.5])], names=["x", "y"])
    assert document["variables"] == ["x", "y"]
    assert document["solutions"][0]["point"] == [[1.0, 2.0], [0.5, 0.0]]
    assert document["solutions"][0]["path_status"] == "converged"
