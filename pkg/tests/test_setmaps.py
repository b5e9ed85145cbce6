import math

import numpy as np
import pytest
from hypothesis import given, settings
import hypothesis.strategies as st
from scipy.optimize import brentq

from svistab.config import Tolerances
from svistab.errors import DimensionError, InputError, InstanceError
from svistab.geometry import Box, ConeSpec, Interval
from svistab.setmaps import (
    ConstantMap,
    EpigraphMap,
    FanMap,
    HalflineSignMap,
    InclusionInstance,
    SqrtIntervalMap,
    in_solution,
    map_from_record,
    phi,
    solve_slice_1d,
)

from .conftest import epigraph_instance

entries = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False, allow_infinity=False)
vectors = st.lists(st.floats(min_value=-4.0, max_value=4.0, allow_nan=False), min_size=2, max_size=2)


def fans():
    matrix = st.lists(st.lists(entries, min_size=2, max_size=2), min_size=2, max_size=2)
    return st.lists(matrix, min_size=1, max_size=3).map(FanMap)


ORTHANT = ConeSpec.orthant(2)


@settings(max_examples=50, deadline=None)
@given(fans(), vectors, st.sampled_from([0.5, 2.0, 7.0]))
def test_fan_excess_is_positively_homogeneous(F, x, t):
    x = np.asarray(x)
    assert phi(F, ORTHANT, [0.0], t * x) == pytest.approx(t * phi(F, ORTHANT, [0.0], x), abs=1e-9, rel=1e-9)


@settings(max_examples=200, deadline=None)
@given(fans(), vectors, vectors, st.floats(min_value=0.0, max_value=1.0))
def test_fan_excess_is_convex(F, x1, x2, t):
    x1, x2 = np.asarray(x1), np.asarray(x2)
    mid = phi(F, ORTHANT, [0.0], t * x1 + (1 - t) * x2)
    assert mid <= t * phi(F, ORTHANT, [0.0], x1) + (1 - t) * phi(F, ORTHANT, [0.0], x2) + 1e-9


def test_cubic_excess_values():
    F = EpigraphMap.from_expression("p^3 + x^3")
    C = ConeSpec.halfline()
    assert phi(F, C, [0.0], [-1.0]) == pytest.approx(1.0, abs=1e-9)
    assert phi(F, C, [0.0], [0.5]) == 0.0
    assert in_solution(F, C, [-1.0], [1.0])
    assert not in_solution(F, C, [0.0], [-0.1])


def test_solve_slice_cubic():
    F = EpigraphMap.from_expression("p^3 + x^3")
    sl = solve_slice_1d(F, ConeSpec.halfline(), [-0.5], Box([-2.0], [2.0]))
    assert len(sl.intervals) == 1
    lo, hi = sl.intervals[0]
    assert lo == pytest.approx(0.5, abs=1e-7)
    assert hi == pytest.approx(2.0)
    assert sl.truncated == (False, True)
    assert sl.distance(0.0) == pytest.approx(0.5, abs=1e-7)


@pytest.mark.parametrize("p", [-0.9, -0.3, 0.4])
def test_solve_slice_matches_brentq(p):
    F = EpigraphMap.from_expression("p^3 + x^3")
    sl = solve_slice_1d(F, ConeSpec.halfline(), [p], Box([-2.0], [2.0]))
    root = brentq(lambda x: p**3 + x**3, -2.0, 2.0, xtol=1e-12)
    assert sl.intervals[0][0] == pytest.approx(root, abs=1e-7)


def test_solve_slice_two_pieces():
    F = EpigraphMap.from_expression("1 - x^2")
    sl = solve_slice_1d(F, ConeSpec.halfline(), [0.0], Box([-2.0], [2.0]))
    assert [tuple(round(v, 6) for v in iv) for iv in sl.intervals] == [(-1.0, 1.0)]
    F2 = EpigraphMap.from_expression("x^2 - 1")
    sl2 = solve_slice_1d(F2, ConeSpec.halfline(), [0.0], Box([-2.0], [2.0]))
    assert len(sl2.intervals) == 2
    assert sl2.intervals[0][1] == pytest.approx(-1.0, abs=1e-7)
    assert sl2.intervals[1][0] == pytest.approx(1.0, abs=1e-7)


def test_solve_slice_agrees_with_point_membership():
    tol = Tolerances(membership=1e-3)
    F = EpigraphMap.from_expression("x - p - 5e-4")
    C = ConeSpec.halfline()
    assert phi(F, C, [0.0], [0.0], tol) == pytest.approx(5e-4)
    assert in_solution(F, C, [0.0], [0.0], tol)
    sl = solve_slice_1d(F, C, [0.0], Box([-1.0], [1.0]), tol=tol)
    assert sl.intervals[0][0] == pytest.approx(-5e-4, abs=1e-7)
    assert sl.contains(0.0)


def test_solve_slice_empty():
    F = EpigraphMap.from_expression("1 - p")
    sl = solve_slice_1d(F, ConeSpec.from_generators([[-1.0]]), [0.0], Box([-1.0], [1.0]))
    assert sl.is_empty


def test_solve_slice_needs_scalar_decision():
    F = FanMap([[[1.0, 0.0], [0.0, 1.0]]])
    with pytest.raises(DimensionError):
        solve_slice_1d(F, ORTHANT, [0.0], Box([-1.0], [1.0]))


def test_switch_maps():
    sq = SqrtIntervalMap("p")
    value = sq.evaluate([4.0], [0.0])
    assert value.interval_bounds() == (-2.0, 2.0)
    sign = HalflineSignMap("p")
    assert sign.evaluate([-1.0], [0.0]).interval_bounds() == (-math.inf, 0.0)
    assert sign.evaluate([0.0], [0.0]).interval_bounds() == (-math.inf, math.inf)
    assert sign.evaluate([2.0], [0.0]).interval_bounds() == (0.0, math.inf)
    assert sign.depends_on_p and not SqrtIntervalMap("x").depends_on_p


def test_constant_map_ignores_arguments():
    F = ConstantMap(Interval(1.0, 2.0))
    assert not F.depends_on_p
    assert phi(F, ConeSpec.halfline(), [5.0], [-3.0]) == 0.0


def test_fan_sensitivities():
    F = FanMap([[[1.0]]], p_dim=1, sensitivities=[[[[2.0]]]])
    assert F.depends_on_p
    assert F.matrices_at([0.5])[0, 0, 0] == pytest.approx(2.0)
    with pytest.raises(DimensionError):
        FanMap([[[1.0]]], p_dim=1, sensitivities=[[[1.0]]])


def test_map_records():
    F = map_from_record({"kind": "epigraph", "f": "x - p", "concave_in_x": True})
    assert F.concave_in_x
    assert F.evaluate([1.0], [3.0]).interval_bounds()[0] == pytest.approx(2.0)
    with pytest.raises(InputError):
        map_from_record({"kind": "spiral"})
    with pytest.raises(InputError):
        map_from_record({"kind": "epigraph"})


def test_instance_requires_reference_solution():
    with pytest.raises(InstanceError):
        epigraph_instance("x - p", xbar=-1.0)


def test_instance_window_must_contain_reference():
    with pytest.raises(InstanceError):
        epigraph_instance("x - p", xbar=1.5, x_window=(-1.0, 1.0))


def test_concavity_flag_is_spot_checked():
    # [f, +inf) is concave in x exactly when f is
    ok = epigraph_instance("-x^2", concave=True)
    assert ok.concavity_checked
    with pytest.raises(InstanceError):
        epigraph_instance("x^2", concave=True)


def test_instance_cone_dimension_mismatch():
    with pytest.raises(DimensionError):
        InclusionInstance(
            id="bad", F=EpigraphMap.from_expression("x"), C=ORTHANT, pbar=[0.0], xbar=[0.0],
            x_window=Box([-1.0], [1.0]), p_window=Box([-1.0], [1.0]),
        )
