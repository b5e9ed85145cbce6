import math

import numpy as np
import pytest

from svistab.errors import InputError
from svistab.estimates import CONVERGED, DIVERGING, REGION_RESTRICTED
from svistab.geometry import Box, ConeSpec
from svistab.moduli import (
    SliceParamMap,
    SolutionParamMap,
    bundle_liplsc_bound,
    calm_modulus,
    lip_joint_modulus,
    lip_p_modulus,
    liploc_modulus,
    liplsc_modulus,
    lipusc_modulus,
    scalar_calm_moduli,
)
from svistab.setmaps import FanMap, HalflineSignMap, SqrtIntervalMap

from .conftest import epigraph_instance


def test_cubic_liplsc_of_solutions(cubic):
    est = liplsc_modulus(SolutionParamMap(cubic), [0.0], [0.0])
    assert est.value == pytest.approx(1.0, abs=0.02)


def test_shift_liplsc_and_calm_of_solutions(shift):
    solv = SolutionParamMap(shift)
    assert liplsc_modulus(solv, [0.0], [0.0]).value == pytest.approx(1.0, abs=0.02)
    assert calm_modulus(solv, [0.0], [0.0]).value == pytest.approx(1.0, abs=0.02)


def test_shift_lipusc_of_F(shift):
    Phi = SliceParamMap(shift.F, "p", [0.0])
    est = lipusc_modulus(Phi, [0.0])
    assert est.value == pytest.approx(1.0, rel=0.05)
    assert est.verdict == CONVERGED


def test_sqrt_interval_lipusc_diverges():
    F = SqrtIntervalMap("p")
    deltas = (1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4)
    est = lipusc_modulus(SliceParamMap(F, "p", [0.0]), [0.0], deltas)
    assert est.verdict == DIVERGING
    assert math.isinf(est.value)
    values = [v for _, v in est.levels]
    for (d0, v0), (d1, v1) in zip(zip(deltas, values), zip(deltas[1:], values[1:])):
        assert v1 / v0 == pytest.approx(math.sqrt(d0 / d1), rel=0.10)


def test_halfline_sign_is_usc_but_not_locally_lipschitz():
    Phi = SliceParamMap(HalflineSignMap("p"), "p", [0.0])
    usc = lipusc_modulus(Phi, [0.0])
    assert usc.value == 0.0
    loc = liploc_modulus(Phi, [0.0])
    assert loc.verdict == DIVERGING
    assert math.isinf(loc.value)


def test_liplsc_needs_reference_in_value(shift):
    with pytest.raises(InputError):
        liplsc_modulus(SolutionParamMap(shift), [0.0], [-1.0])


def test_lip_p_is_region_restricted(shift):
    est = lip_p_modulus(shift.F, [0.0], shift.x_window)
    assert est.value == pytest.approx(1.0, rel=0.05)
    assert REGION_RESTRICTED in est.flags


def test_lip_p_of_p_independent_map():
    F = SqrtIntervalMap("x")
    est = lip_p_modulus(F, [0.0], Box([-1.0], [1.0]))
    assert est.value == 0.0


def test_shift_joint_lip_uses_max_distance(shift):
    est = lip_joint_modulus(shift.F, [0.0], [0.0])
    assert est.value == pytest.approx(2.0, rel=0.05)


def test_scalar_calmness_moduli():
    up, down, both = scalar_calm_moduli(lambda p: abs(float(p[0])), [0.0], dim=1)
    assert up.value == pytest.approx(1.0)
    assert down.value == 0.0
    assert both.value == pytest.approx(1.0)
    up, down, _ = scalar_calm_moduli(lambda p: -2.0 * float(p[0]), [0.0], dim=1)
    assert up.value == pytest.approx(2.0)
    assert down.value == pytest.approx(2.0)


def test_solution_map_caches_slices(shift):
    solv = SolutionParamMap(shift)
    assert solv.at([0.25]) is solv.at(np.array([0.25]))


def test_slice_map_rejects_unknown_variable(shift):
    with pytest.raises(InputError):
        SliceParamMap(shift.F, "y", [0.0])


def test_lipusc_of_truncated_solutions_is_region_restricted(shift):
    est = lipusc_modulus(SolutionParamMap(shift), [0.0])
    assert REGION_RESTRICTED in est.flags
    assert est.meta["window_edge"] is True


def test_lipusc_of_interior_solutions_is_not_flagged():
    inst = epigraph_instance("1 - x^2 + p", concave=True)
    est = lipusc_modulus(SolutionParamMap(inst), [0.0])
    assert REGION_RESTRICTED not in est.flags
    assert est.value == pytest.approx(0.5, rel=0.10)


def test_bundle_bound_dominates_liplsc_of_the_fan():
    F = FanMap([np.eye(2), 2.0 * np.eye(2)])
    bb = bundle_liplsc_bound(F, [0.0])
    assert bb.value == pytest.approx(1.0, abs=1e-6)
    est = liplsc_modulus(SliceParamMap(F, "x", [0.0]), [0.0, 0.0], [0.0, 0.0])
    assert est.value == pytest.approx(1.0, abs=0.02)
    assert est.value <= bb.value * 1.1


def test_bundle_bound_searches_the_hull():
    F = FanMap([np.diag([2.0, 3.0]), np.diag([3.0, 2.0])])
    bb = bundle_liplsc_bound(F, [0.0])
    assert bb.vertex_min == pytest.approx(3.0)
    assert bb.value == pytest.approx(2.5, abs=1e-2)
    assert sum(bb.weights) == pytest.approx(1.0)


def test_bundle_bound_needs_a_fan(shift):
    with pytest.raises(InputError):
        bundle_liplsc_bound(shift.F, [0.0])
