import numpy as np
import pytest

from core.errors import InvalidInputError
from core.geometry import (BoundaryComponent, bound_summary, degree_bound, enumerate_components,
                           enumerate_relevant, relevant_count, table_rows, zero_mask)

BOUNDS_TABLE = [
    # n_S, n_A, partition, total components, relevant components, total bound, relevant bound
    (3, 2, (3,), 3, 3, 10, 10),
    (3, 2, (2, 1), 9, 6, 10, 8),
    (3, 2, (1, 1, 1), 27, 8, 8, 8),
    (4, 3, (4,), 7, 7, 1419, 1419),
    (4, 3, (3, 1), 49, 21, 2237, 561),
    (4, 3, (2, 2), 49, 36, 1265, 153),
    (4, 3, (2, 1, 1), 343, 54, 1189, 81),
    (4, 3, (1, 1, 1, 1), 2401, 81, 81, 81),
    (5, 3, (5,), 7, 7, 9411, 9411),
    (5, 3, (4, 1), 49, 21, 23745, 4257),
    (5, 3, (3, 2), 49, 42, 13431, 4371),
    (5, 3, (3, 1, 1), 343, 63, 24363, 1683),
    (5, 3, (2, 2, 1), 343, 108, 12159, 459),
    (5, 3, (2, 1, 1, 1), 2401, 162, 9195, 243),
    (5, 3, (1, 1, 1, 1, 1), 16807, 243, 243, 243),
]


@pytest.mark.parametrize("n_states,n_actions,sizes,total,relevant,total_bound,relevant_bound",
                         BOUNDS_TABLE)
def test_bounds_table(n_states, n_actions, sizes, total, relevant, total_bound, relevant_bound):
    summary = bound_summary(n_states, n_actions, sizes)
    assert summary.total_components == total
    assert summary.relevant_components == relevant
    assert summary.total_bound == total_bound
    assert summary.relevant_bound == relevant_bound


@pytest.mark.parametrize("n_actions,sizes", [(2, (2, 1)), (3, (2, 2)), (3, (3, 1, 1)), (4, (1, 2))])
def test_relevant_count_closed_form(n_actions, sizes):
    assert relevant_count(n_actions, sizes) == len(enumerate_relevant(n_actions, sizes))


def test_component_ordering():
    components = enumerate_components(2, (1,))
    assert [c.label() for c in components] == ["{0}", "{1}", "{}"]
    components = enumerate_components(3, (2,))
    sizes = [len(c.zero_sets[0]) for c in components]
    assert sizes == sorted(sizes, reverse=True)


def test_dimensions_of_interior_component():
    component = BoundaryComponent((frozenset(), frozenset()), (2, 1), 2)
    assert component.n == 3
    assert component.m == 1
    assert component.bound == 2
    assert not component.relevant
    assert component.free_actions(0) == [0, 1]


def test_vertex_component_has_bound_one():
    component = BoundaryComponent((frozenset({1}), frozenset({0})), (2, 1), 2)
    assert component.n == 0
    assert degree_bound(component) == 1
    assert component.relevant


def test_flat_component_without_quadratics_has_bound_zero():
    component = BoundaryComponent((frozenset({0}), frozenset()), (2, 1), 2)
    assert component.n == 1
    assert component.m == 0
    assert degree_bound(component) == 0


def test_single_action():
    components = enumerate_components(1, (2,))
    assert len(components) == 1
    assert components[0].bound == 1
    assert table_rows([(2,)], 1) == [{"partition": "(2)", "total_components": 1,
                                      "relevant_components": 1, "total_bound": 1,
                                      "relevant_bound": 1}]


def test_invalid_components():
    with pytest.raises(InvalidInputError):
        BoundaryComponent((frozenset({0, 1}),), (3,), 2)
    with pytest.raises(InvalidInputError):
        BoundaryComponent((frozenset(),), (2, 1), 2)
    with pytest.raises(InvalidInputError):
        enumerate_components(0, (2,))
    with pytest.raises(InvalidInputError):
        enumerate_components(5, (13,))
    with pytest.raises(InvalidInputError):
        bound_summary(4, 2, (2, 1))


def test_zero_mask():
    component = BoundaryComponent((frozenset({1}), frozenset()), (2, 1), 2)
    np.testing.assert_array_equal(zero_mask(component, (0, 0, 1)),
                                  [[False, True], [False, True], [False, False]])
