import numpy as np
import pytest

from algebra.polynomial import Polynomial
from algebra.systems import build_lagrange_system
from core.constraints import (component_anchors, constraints_to_dict, default_anchors,
                              feasibility_residual, is_feasible, linear_constraints,
                              minor_constraints, reduced_quadratics)
from core.errors import InvalidInputError
from core.frequencies import monomial_frequency, phi
from core.geometry import BoundaryComponent
from core.pomdp import Policy, random_pomdp
from homotopy.tracker import solve_system


def proportional(a, b):
    """True when a = c * b for some positive c, up to 1e-12 in the ratio"""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    support = b != 0
    if not np.array_equal(a != 0, support):
        return False
    ratios = a[support] / b[support]
    return ratios.min() > 0 and np.ptp(ratios) <= 1e-12 * abs(ratios.mean())


def test_linear_constraints_of_worked_example(example):
    ell = linear_constraints(example)
    # 6 * l_s as integer coefficients [eta_00, eta_01, eta_10, eta_11, eta_20, eta_21, 1]
    expected = [
        [3, 6, 0, -3, 0, 0, -1],
        [0, 0, 6, 6, 0, -3, -1],
        [0, -3, -3, 0, 3, 6, -1],
    ]
    for constraint, row in zip(ell, expected):
        flat = list(constraint.coeffs.ravel()) + [constraint.constant]
        assert proportional(flat, row)


def test_minor_of_worked_example(example):
    minors = minor_constraints(example)
    assert len(minors) == 1
    eta = np.arange(1.0, 7.0).reshape(3, 2)
    # eta_00 * eta_11 - eta_01 * eta_10
    assert minors[0].evaluate(eta) == pytest.approx(1 * 4 - 2 * 3)


def test_phi_satisfies_all_constraints(split):
    eta = phi(split, Policy.random(2, 2, np.random.default_rng(1))).eta
    for constraint in linear_constraints(split):
        assert abs(constraint.evaluate(eta)) < 1e-12
    for minor in minor_constraints(split):
        assert abs(minor.evaluate(eta)) < 1e-12
    for quadratic in reduced_quadratics(split):
        assert abs(quadratic.evaluate(eta)) < 1e-12
    assert is_feasible(split, eta)


def test_rank_one_points_satisfy_quadratics():
    pomdp = random_pomdp(4, 3, (3, 1), seed=2)
    policy = Policy(np.array([[0.0, 0.5], [0.3, 0.5], [0.7, 0.0]]))
    eta = monomial_frequency(pomdp, policy, np.array([0.1, 0.4, 0.2, 0.3])).eta
    for minor in minor_constraints(pomdp):
        assert abs(minor.evaluate(eta)) < 1e-15
    for quadratic in reduced_quadratics(pomdp):
        assert abs(quadratic.evaluate(eta)) < 1e-15


def test_reduced_quadratic_is_a_sum_of_minors():
    pomdp = random_pomdp(3, 3, (2, 1), seed=3)
    eta = np.random.default_rng(0).random((3, 3))
    for q in reduced_quadratics(pomdp):
        minors = 0.0
        for b in range(3):
            if b != q.a:
                minors += (eta[q.s, q.a] * eta[q.anchor_state, b]
                           - eta[q.s, b] * eta[q.anchor_state, q.a])
        assert q.evaluate(eta) == pytest.approx(minors)


def test_quadratic_count():
    pomdp = random_pomdp(4, 3, (2, 2), seed=0)
    # (d_o - 1)(n_A - 1) per observation
    assert len(reduced_quadratics(pomdp)) == 4
    assert len(minor_constraints(pomdp)) == 6


def test_polynomial_forms_match_evaluation(split):
    n_vars = 6
    eta_vars = {(s, a): Polynomial.variable(2 * s + a, n_vars) for s in range(3) for a in range(2)}
    eta = np.random.default_rng(9).random((3, 2))
    constraints = linear_constraints(split) + minor_constraints(split) + reduced_quadratics(split)
    for constraint in constraints:
        poly = constraint.as_polynomial(eta_vars)
        assert abs(poly.evaluate(eta.ravel()) - constraint.evaluate(eta)) < 1e-12


def test_anchors(example):
    assert default_anchors(example) == {0: (0, 0), 1: (0, 2)}
    assert component_anchors(example, [{0}, set()]) == {0: (1, 0), 1: (0, 2)}
    with pytest.raises(InvalidInputError):
        component_anchors(example, [{0, 1}, set()])
    with pytest.raises(InvalidInputError):
        reduced_quadratics(example, {0: (0, 2), 1: (0, 2)})
    with pytest.raises(InvalidInputError):
        reduced_quadratics(example, {0: (0, 0)})


def test_feasibility_residual_detects_violations(split):
    eta = phi(split, Policy.uniform(2, 2)).eta.copy()
    eta[0, 0] += 1e-3
    residual = feasibility_residual(split, eta)
    assert residual.max_linear > 1e-4
    assert residual.sum_gap == pytest.approx(1e-3)
    assert not is_feasible(split, eta)


def test_constraints_to_dict(example):
    document = constraints_to_dict(example)
    kinds = [entry["kind"] for entry in document["constraints"]]
    assert kinds.count("linear") == 3
    assert kinds.count("minor") == 1
    assert kinds.count("reduced_quadratic") == 1
    minor = next(e for e in document["constraints"] if e["kind"] == "minor")
    assert sorted(coeff for _, coeff in minor["terms"]) == [-1.0, 1.0]
    assert document["anchors"]["1"] == {"action": 0, "state": 2}


def test_feasibility_does_not_depend_on_anchors(split):
    alternative = {o: (1, fiber[-1]) for o, fiber in enumerate(split.fibers)}
    assert alternative != default_anchors(split)
    feasible = phi(split, Policy.random(2, 2, np.random.default_rng(4))).eta
    mixture = 0.5 * (phi(split, Policy.deterministic([0, 0], 2)).eta
                     + phi(split, Policy.deterministic([1, 0], 2)).eta)
    for anchors in (None, alternative, component_anchors(split, [{0}, set()])):
        assert is_feasible(split, feasible, anchors)
        residual = feasibility_residual(split, mixture, anchors)
        assert residual.max_linear < 1e-12
        assert residual.max_quadratic > 1e-6
        assert not is_feasible(split, mixture, anchors)


def test_negative_frequencies_are_infeasible(split):
    signed = Policy(np.array([[1.2, 0.5], [-0.2, 0.5]]))
    eta = phi(split, signed).eta
    residual = feasibility_residual(split, eta)
    assert residual.max_linear < 1e-12
    assert residual.max_quadratic < 1e-12
    assert residual.sum_gap < 1e-12
    assert residual.min_entry < -1e-3
    assert not is_feasible(split, eta)


def test_reduced_quadratics_imply_every_minor(blind):
    component = BoundaryComponent((frozenset(),), (3,), 2)
    system = build_lagrange_system(blind, component)
    minors = minor_constraints(blind)
    assert len(minors) > len(reduced_quadratics(blind))
    checked = 0
    for solution in solve_system(system):
        if not solution.converged:
            continue
        eta = solution.point[:6].reshape(3, 2)
        if abs(eta[0].sum()) < 1e-6:
            continue
        scale = max(1.0, float(np.abs(eta).max())) ** 2
        for minor in minors:
            assert abs(minor.evaluate(eta)) < 1e-8 * scale
        checked += 1
    assert checked >= 1
