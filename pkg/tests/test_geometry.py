import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
import hypothesis.strategies as st

from svistab.errors import DimensionError, InputError
from svistab.geometry import (
    Box,
    ConeSpec,
    Enlargement,
    Interval,
    Polytope,
    body_from_record,
    excess,
    excess_identities_check,
    hausdorff,
    includes,
    minkowski_sum,
    product_grid,
    sphere_directions,
    support_distance_bound,
    unit_grid,
)

coords = st.floats(min_value=-5.0, max_value=5.0, allow_nan=False, allow_infinity=False)


def polytopes(dim: int):
    return st.lists(st.lists(coords, min_size=dim, max_size=dim), min_size=1, max_size=6).map(
        lambda pts: Polytope(pts, dim=dim)
    )


@settings(max_examples=500, deadline=None)
@given(st.integers(min_value=1, max_value=3).flatmap(lambda m: st.tuples(polytopes(m), polytopes(m), polytopes(m))))
def test_excess_triangle_inequality(bodies):
    A, B, C = bodies
    assert excess(A, C) <= excess(A, B) + excess(B, C) + 1e-9


@settings(max_examples=100, deadline=None)
@given(polytopes(2), polytopes(2), st.integers(min_value=0, max_value=2**31 - 1))
def test_vertex_excess_matches_dense_sampling(A, B, seed):
    rng = np.random.default_rng(seed)
    weights = rng.dirichlet(np.ones(len(A.points)), size=400)
    samples = np.vstack([weights @ A.points, A.points])
    dense = max(B.distance(y) for y in samples)
    assert excess(A, B) == pytest.approx(dense, abs=1e-6)


@settings(max_examples=100, deadline=None)
@given(polytopes(2), st.floats(min_value=0.05, max_value=3.0))
def test_excess_identities_on_orthant(S, r):
    C = ConeSpec.orthant(2)
    assume(excess(S, C.cone) > 1e-3)
    checks = {c.name: c for c in excess_identities_check(S, C, r)}
    assert checks["sum"].holds
    assert checks["enlargement"].holds


def test_identities_skip_when_inside_cone():
    checks = {c.name: c for c in excess_identities_check(Polytope([[1.0, 2.0]]), ConeSpec.orthant(2), 0.5)}
    assert checks["sum"].holds
    assert checks["enlargement"].holds is None
    assert checks["enlargement"].skipped


def test_interval_excess_and_hausdorff():
    assert excess(Interval(0.0, 2.0), Interval(0.0, 1.0)) == pytest.approx(1.0)
    assert excess(Interval(0.0, 1.0), Interval(0.0, 2.0)) == 0.0
    assert hausdorff(Interval(0.0, 2.0), Interval(0.5, 1.0)) == pytest.approx(1.0)


def test_unbounded_excess_is_infinite():
    assert math.isinf(excess(Interval(None, 0.0), Interval(-1.0, 1.0)))
    assert excess(Interval(1.0, None), Interval(0.0, None)) == 0.0


def test_enlargement_shrinks_excess():
    A = Polytope([[3.0, 0.0]])
    B = Polytope([[0.0, 0.0]])
    assert excess(A, Enlargement(B, 1.0)) == pytest.approx(2.0)
    assert includes(Enlargement(B, 3.0), A)


def test_minkowski_sum_with_orthant():
    C = ConeSpec.orthant(2)
    S = minkowski_sum(Polytope([[-1.0, 0.0], [0.0, -2.0]]), C.cone)
    assert S.contains(np.array([5.0, 5.0]))
    assert excess(S, C.cone) == pytest.approx(2.0)


def test_cone_flags():
    orth = ConeSpec.orthant(2)
    assert orth.pointed and orth.has_interior
    assert not orth.is_trivial and not orth.is_whole_space
    line = ConeSpec.from_generators([[1.0], [-1.0]])
    assert line.is_whole_space
    assert not line.pointed


def test_cone_representations_agree():
    by_gens = ConeSpec.from_generators([[1.0, 0.0], [1.0, 1.0]])
    by_normals = ConeSpec.from_halfspaces([[0.0, 1.0], [1.0, -1.0]], dim=2)
    for y in ([2.0, 1.0], [1.0, 2.0], [-1.0, 0.0], [3.0, 0.0]):
        assert by_gens.contains(np.array(y)) == by_normals.contains(np.array(y))


def test_box_grid_and_contains():
    box = Box([-1.0, 0.0], [1.0, 2.0])
    grid = box.grid(3)
    assert grid.shape == (9, 2)
    assert all(box.contains(x) for x in grid)
    assert box.half_width == pytest.approx(1.0)
    with pytest.raises(InputError):
        Box([1.0], [0.0])


def test_unit_grid_contains_origin_and_stays_in_ball():
    grid = unit_grid(2, 4)
    assert any(np.allclose(g, 0.0) for g in grid)
    assert np.all(np.linalg.norm(grid, axis=1) <= 1.0 + 1e-12)


def test_product_grid_covers_both_balls():
    grid = product_grid(1, 1, 5)
    assert grid.shape == (25, 2)
    assert any(np.allclose(g, [1.0, 1.0]) for g in grid)
    assert any(np.allclose(g, [-1.0, 0.5]) for g in grid)
    mixed = product_grid(1, 2, 41, budget=625)
    assert mixed.shape[1] == 3
    assert np.all(np.abs(mixed[:, 0]) <= 1.0)
    assert np.all(np.linalg.norm(mixed[:, 1:], axis=1) <= 1.0 + 1e-12)


def test_sphere_directions_are_deterministic():
    assert np.array_equal(sphere_directions(1, 10), np.array([[-1.0], [1.0]]))
    d3 = sphere_directions(3, 20, seed=7)
    assert np.allclose(np.linalg.norm(d3, axis=1), 1.0)
    assert np.array_equal(d3, sphere_directions(3, 20, seed=7))


def test_body_records():
    body = body_from_record({"kind": "interval", "lo": -1, "hi": None})
    assert body.contains(np.array([100.0]))
    with pytest.raises(InputError):
        body_from_record({"kind": "ellipsoid"})
    with pytest.raises(InputError):
        body_from_record({"kind": "polytope"})


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        excess(Polytope([[0.0, 0.0]]), Interval(0.0, 1.0))


def test_support_bound_is_exact_on_an_interval():
    sb = support_distance_bound(Interval(1.0, 3.0))
    assert sb.estimate == pytest.approx(1.0)
    assert sb.distance == pytest.approx(1.0)
    assert sb.holds


def test_support_bound_of_a_square_off_the_origin():
    sb = support_distance_bound(Polytope([[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0]]))
    assert sb.distance == pytest.approx(math.sqrt(2.0))
    assert sb.estimate == pytest.approx(math.sqrt(2.0), rel=1e-6)
    assert sb.holds


def test_support_bound_vanishes_when_origin_is_inside():
    sb = support_distance_bound(Enlargement(Polytope([[0.5, 0.0]]), 1.0))
    assert sb.estimate == 0.0
    assert sb.distance == 0.0


@settings(max_examples=200, deadline=None)
@given(st.integers(min_value=1, max_value=3).flatmap(polytopes), st.integers(min_value=0, max_value=5))
def test_support_bound_never_exceeds_distance(S, seed):
    sb = support_distance_bound(S, seed=seed)
    assert sb.holds
