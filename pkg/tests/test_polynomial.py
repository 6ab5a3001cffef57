import numpy as np
import pytest

from algebra.polynomial import Polynomial, PolySystem, VariableRegistry, system_from_dict, system_to_dict
from core.errors import InvalidInputError, UnsupportedSystemError


@pytest.fixture
def xy():
    registry = VariableRegistry(["x", "y"])
    return registry, registry.variable("x"), registry.variable("y")


def test_arithmetic(xy):
    _, x, y = xy
    p = (x + 2 * y) * (x - y)
    assert p == x ** 2 + x * y - 2 * y ** 2
    assert p.degree == 2
    assert (p - p).is_zero()
    assert (p - p).degree == -1
    assert 3 - x == -(x - 3)
    assert Polynomial.zero(2) == 0
    assert (x * 0).is_zero()


def test_terms_and_variables():
    p = Polynomial({(2, 0, 1): 3.0, (0, 0, 0): -1.0, (1, 0, 0): 0.0}, 3)
    assert p.terms == {(2, 0, 1): 3.0, (0, 0, 0): -1.0}
    assert p.variables() == [0, 2]
    with pytest.raises(InvalidInputError):
        Polynomial({(1, 0): 1.0}, 3)


def test_evaluate_and_diff(xy):
    _, x, y = xy
    p = x ** 3 * y - 4 * x * y + 7
    assert p.evaluate([2.0, 1.5]) == pytest.approx(8 * 1.5 - 12 + 7)
    assert p.diff(0) == 3 * x ** 2 * y - 4 * y
    assert p.diff(1) == x ** 3 - 4 * x
    assert p.evaluate([1j, 1.0]) == pytest.approx(-1j - 4j + 7)


def test_bad_powers(xy):
    _, x, _ = xy
    with pytest.raises(InvalidInputError):
        x ** -1
    with pytest.raises(InvalidInputError):
        x + Polynomial.variable(0, 3)


def test_registry_rejects_duplicates():
    registry = VariableRegistry(["a"])
    with pytest.raises(InvalidInputError):
        registry.add("a")
    assert registry.add("b") == 1
    assert "b" in registry
    assert list(registry) == ["a", "b"]


def test_bezout_number(xy):
    registry, x, y = xy
    system = PolySystem(registry, [x ** 2 - 1, x * y - 2])
    assert system.square
    assert system.degrees() == [2, 2]
    assert system.bezout_number() == 4
    with pytest.raises(InvalidInputError):
        PolySystem(registry, [x - 1]).bezout_number()
    with pytest.raises(InvalidInputError):
        PolySystem(registry, [x - 1, Polynomial.zero(2)]).bezout_number()


def test_dense_evaluation_and_jacobian(xy):
    registry, x, y = xy
    system = PolySystem(registry, [x ** 2 + 3 * x * y - y + 2, 2 * y ** 2 - x])
    point = np.array([0.5 + 1j, -2.0])
    a, b = point
    np.testing.assert_allclose(system.evaluate(point),
                               [a ** 2 + 3 * a * b - b + 2, 2 * b ** 2 - a])
    np.testing.assert_allclose(system.jacobian(point),
                               [[2 * a + 3 * b, 3 * a - 1], [-1, 4 * b]])
    hessians = system.hessian_tensor()
    np.testing.assert_allclose(hessians[0], [[2, 3], [3, 0]])
    np.testing.assert_allclose(hessians[1], [[0, 0], [0, 4]])


def test_sparse_evaluation_matches_single_point(xy):
    registry, x, y = xy
    equations = [x ** 3 - y + 1, x * y ** 2 - 2]
    system = PolySystem(registry, equations)
    assert system.max_degree == 3
    points = np.random.default_rng(0).standard_normal((4, 2)) + 0.5j
    values, jac = system.evaluate_with_jacobian_batch(points)
    for k, point in enumerate(points):
        for i, equation in enumerate(equations):
            assert values[k, i] == pytest.approx(equation.evaluate(point))
            for j in range(2):
                assert jac[k, i, j] == pytest.approx(equation.diff(j).evaluate(point))
    with pytest.raises(UnsupportedSystemError):
        system.hessian_tensor()


def test_linear_part(xy):
    registry, x, y = xy
    b, c = PolySystem(registry, [2 * x - y + 1, x + 4]).linear_part()
    np.testing.assert_allclose(b, [[2, -1], [1, 0]])
    np.testing.assert_allclose(c, [1, 4])
    with pytest.raises(UnsupportedSystemError):
        PolySystem(registry, [x * y, x]).linear_part()


def test_point_shape_is_checked(xy):
    registry, x, y = xy
    system = PolySystem(registry, [x, y])
    with pytest.raises(InvalidInputError):
        system.evaluate([1.0, 2.0, 3.0])
    with pytest.raises(InvalidInputError):
        system.evaluate_batch(np.zeros((3, 3)))


def test_system_dict_restores_equations(xy):
    registry, x, y = xy
    system = PolySystem(registry, [x ** 2 - (1 + 2j) * y, y ** 3], eta_index=[(0, 1)], name="demo")
    restored = system_from_dict(system_to_dict(system))
    assert restored.name == "demo"
    assert restored.registry.names == ["x", "y"]
    assert restored.eta_index == [(0, 1)]
    assert restored.equations == system.equations
    with pytest.raises(InvalidInputError):
        system_from_dict({"variables": ["x"], "equations": [[[{"z": 1}, [1.0, 0.0]]]]})
