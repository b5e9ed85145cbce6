import math

import numpy as np
import pytest

from svistab.errors import InputError
from svistab.estimates import CONVERGED, EMPTY_BAND, LOCAL_MINIMIZER, REGION_RESTRICTED
from svistab.geometry import Box, ConeSpec, Interval
from svistab.setmaps import ConstantMap, EpigraphMap
from svistab.slopes import (
    ScalarFn,
    error_bound_check,
    exact_slope_convex,
    excess_function,
    partial_strict_outer_slope,
    strict_outer_slope,
    strong_slope,
    tau,
)

HALFLINE = ConeSpec.halfline()


def test_cubic_strong_slope_at_minus_one(cubic):
    psi = excess_function(cubic.F, cubic.C, [0.0])
    est = strong_slope(psi, [-1.0])
    assert est.value == pytest.approx(3.0, rel=0.01)
    assert est.verdict == CONVERGED


def test_strong_slope_scales_linearly(cubic):
    psi = excess_function(cubic.F, cubic.C, [0.0])
    base = strong_slope(psi, [-1.0]).value
    assert strong_slope(psi.scaled(2.0), [-1.0]).value == pytest.approx(2.0 * base)


def test_strong_slope_at_a_minimizer_is_zero(shift):
    psi = excess_function(shift.F, shift.C, [0.0])
    est = strong_slope(psi, [1.0])
    assert est.value == 0.0
    assert LOCAL_MINIMIZER in est.flags


def test_strong_slope_of_a_norm_in_two_dimensions():
    psi = ScalarFn(lambda x: float(np.linalg.norm(x)), dim=2, name="norm")
    assert strong_slope(psi, [1.0, 1.0]).value == pytest.approx(1.0, rel=0.01)


def test_strong_slope_rejects_tiny_radii(cubic):
    psi = excess_function(cubic.F, cubic.C, [0.0])
    with pytest.raises(InputError):
        strong_slope(psi, [-1.0], r_schedule=[1e-9])


def test_exact_slope_needs_an_oracle():
    psi = ScalarFn(lambda x: abs(float(x[0])))
    with pytest.raises(InputError):
        exact_slope_convex(psi, [1.0])
    psi = ScalarFn(lambda x: abs(float(x[0])), subdiff_dist=lambda x: 1.0 if x[0] != 0 else 0.0)
    assert exact_slope_convex(psi, [2.0]) == 1.0


def test_cubic_partial_strict_outer_slope_vanishes(cubic):
    est = partial_strict_outer_slope(cubic.F, cubic.C, [0.0], [0.0])
    assert est.value <= 0.05


def test_shift_partial_strict_outer_slope(shift):
    est = partial_strict_outer_slope(shift.F, shift.C, [0.0], [0.0])
    assert est.value == pytest.approx(1.0, rel=0.05)


def test_shift_strict_outer_slope(shift):
    psi = excess_function(shift.F, shift.C, [0.0])
    assert strict_outer_slope(psi, [0.0]).value == pytest.approx(1.0, rel=0.05)


def test_partial_slope_needs_a_solution(shift):
    with pytest.raises(InputError):
        partial_strict_outer_slope(shift.F, shift.C, [0.0], [-1.0])


def test_empty_band_is_flagged():
    F = ConstantMap(Interval(1.0, 2.0))
    psi = excess_function(F, HALFLINE, [0.0])
    est = strict_outer_slope(psi, [0.0])
    assert math.isinf(est.value)
    assert EMPTY_BAND in est.flags


def test_shift_tau_is_region_restricted(shift):
    est = tau(shift.F, shift.C, [0.0], Box([-1.0], [1.0]))
    assert est.value == pytest.approx(1.0, rel=0.05)
    assert REGION_RESTRICTED in est.flags


def test_tau_rejects_mismatched_region(shift):
    with pytest.raises(InputError):
        tau(shift.F, shift.C, [0.0], Box([-1.0, -1.0], [1.0, 1.0]))


def test_slope_of_quadratic_excess():
    F = EpigraphMap.from_expression("x^2 - 1")
    psi = excess_function(F, HALFLINE, [0.0])
    # psi(x) = 1 - x^2 on [-1, 1]
    assert strong_slope(psi, [0.5]).value == pytest.approx(1.0, rel=0.01)


def test_tau_with_an_int_grid_halves_the_spacing(shift):
    est = tau(shift.F, shift.C, [0.0], Box([-1.0], [1.0]), grid_n=11)
    scales = [s for s, _ in est.levels]
    assert scales == pytest.approx([0.2, 0.1, 0.05])
    assert est.value == pytest.approx(1.0, rel=0.05)


def test_tau_with_explicit_grids(shift):
    est = tau(shift.F, shift.C, [0.0], Box([-1.0], [1.0]), grid_n=[5, 9])
    assert [s for s, _ in est.levels] == pytest.approx([0.5, 0.25])


def test_tau_rejects_degenerate_grids(shift):
    with pytest.raises(InputError):
        tau(shift.F, shift.C, [0.0], Box([-1.0], [1.0]), grid_n=1)


def test_error_bound_on_shift(shift):
    check = error_bound_check(shift.F, shift.C, [0.0], Box([-1.0], [1.0]), grid_n=21)
    assert check.gamma == pytest.approx(1.0, rel=1e-6)
    assert check.bound == pytest.approx(1.0, rel=0.05)
    assert check.holds is True
    assert check.points == 40


def test_error_bound_scales_with_the_slope():
    F = EpigraphMap.from_expression("2*x - p", concave_in_x=True)
    check = error_bound_check(F, HALFLINE, [0.0], Box([-1.0], [1.0]), grid_n=21)
    assert check.gamma == pytest.approx(0.5, rel=1e-6)
    assert check.bound == pytest.approx(0.5, rel=0.05)
    assert check.holds is True


def test_error_bound_needs_a_converged_tau(cubic):
    check = error_bound_check(cubic.F, cubic.C, [0.0], Box([-1.0], [1.0]), grid_n=11)
    assert check.bound is None
    assert check.holds is None
    assert check.gamma > 10.0
