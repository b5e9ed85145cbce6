import numpy as np
import pytest

from svistab.errors import InputError, NotApplicableError
from svistab.geometry import Box, ConeSpec, Interval
from svistab.increase import (
    GLOBAL,
    LOCAL,
    UNIFORM,
    certified_alpha,
    check_c_increase,
    check_c_increase_uniform,
    cov_matrix,
    fan_increase_bound,
    inclusion_gap,
    interiority_check,
)
from svistab.setmaps import ConstantMap, EpigraphMap, FanMap

HALFLINE = ConeSpec.halfline()
ORTHANT = ConeSpec.orthant(2)
WINDOW_1D = Box([-2.0], [2.0])
RADII = (1e-1, 1e-2)


@pytest.mark.parametrize(
    "L,expected",
    [
        ([[2.0, 0.0], [0.0, 3.0]], 2.0),
        ([[1.0, 0.0], [0.0, 1.0]], 1.0),
        ([[0.5]], 0.5),
        ([[-4.0, 0.0], [0.0, 7.0]], 4.0),
        ([[1.0, 0.0, 0.0], [0.0, 2.0, 0.0]], 1.0),
        ([[1.0], [2.0]], 0.0),
    ],
)
def test_cov_matrix(L, expected):
    assert cov_matrix(L) == pytest.approx(expected, abs=1e-12)


def test_cov_matrix_rejects_non_finite():
    with pytest.raises(InputError):
        cov_matrix([[np.nan]])


def test_epigraph_increase_at_two_but_not_beyond():
    Phi = EpigraphMap.from_expression("x").slice_x([0.0])
    assert check_c_increase(Phi, HALFLINE, 2.0, WINDOW_1D, RADII).valid
    failed = check_c_increase(Phi, HALFLINE, 2.5, WINDOW_1D, RADII)
    assert not failed.valid
    # the best u = x + r misses the target by (alpha - 2) r
    assert all(f.best_gap == pytest.approx(0.5 * f.r, rel=1e-6) for f in failed.failures)


def test_witnesses_stay_in_the_ball():
    Phi = EpigraphMap.from_expression("x").slice_x([0.0])
    cert = check_c_increase(Phi, HALFLINE, 1.5, WINDOW_1D, RADII)
    assert cert.valid
    assert cert.checked_n == len(cert.witnesses)
    for w in cert.witnesses:
        assert abs(w.u[0] - w.x[0]) <= w.r + 1e-12


def test_constant_map_is_not_increasing():
    Phi = ConstantMap(Interval(1.0, 2.0)).slice_x([0.0])
    assert not check_c_increase(Phi, HALFLINE, 1.1, WINDOW_1D, RADII).valid


def test_alpha_must_exceed_one():
    Phi = EpigraphMap.from_expression("x").slice_x([0.0])
    with pytest.raises(InputError):
        check_c_increase(Phi, HALFLINE, 1.0, WINDOW_1D, RADII)


def test_local_variant_uses_radii_below_delta():
    Phi = EpigraphMap.from_expression("x").slice_x([0.0])
    cert = check_c_increase(Phi, HALFLINE, 2.0, WINDOW_1D, (1.0, 1e-1, 1e-2), variant=LOCAL, xbar=[0.0], delta=0.5)
    assert cert.valid
    assert all(w.r < 0.5 for w in cert.witnesses)
    with pytest.raises(InputError):
        check_c_increase(Phi, HALFLINE, 2.0, WINDOW_1D, RADII, variant=LOCAL)
    with pytest.raises(InputError):
        check_c_increase(Phi, HALFLINE, 2.0, WINDOW_1D, RADII, variant=UNIFORM)


def test_uniform_variant_over_parameters():
    F = EpigraphMap.from_expression("x - p")
    cert = check_c_increase_uniform(F, HALFLINE, 2.0, [0.0], [0.0], 0.5, RADII)
    assert cert.valid
    assert cert.variant == UNIFORM
    assert {w.p for w in cert.witnesses} == {(v,) for v in (-0.5, -0.25, 0.0, 0.25, 0.5)}


def test_certified_alpha_finds_two():
    Phi = EpigraphMap.from_expression("x").slice_x([0.0])
    alpha, cert = certified_alpha(lambda a: check_c_increase(Phi, HALFLINE, a, WINDOW_1D, RADII), 4.0)
    assert alpha == pytest.approx(2.0, abs=1e-3)
    assert cert is not None and cert.valid


def test_certified_alpha_is_monotone_in_the_cone():
    # a smaller cone makes the target smaller, so the certified alpha cannot grow
    F = FanMap([[[1.0, 0.0], [0.0, 1.0]]])
    Phi = F.slice_x([0.0])
    window = Box([-1.0, -1.0], [1.0, 1.0])
    narrow = ConeSpec.from_generators([[1.0, 0.0], [1.0, 1.0]])

    def best(C):
        return certified_alpha(
            lambda a: check_c_increase(Phi, C, a, window, (1e-1,), search_budget=32, grid_n=3), 3.0, 10
        )[0]

    assert best(narrow) <= best(ORTHANT) + 1e-9


def test_uncertified_alpha():
    Phi = ConstantMap(Interval(1.0, 2.0)).slice_x([0.0])
    alpha, cert = certified_alpha(lambda a: check_c_increase(Phi, HALFLINE, a, WINDOW_1D, RADII), 2.0, 8)
    assert alpha == 1.0
    assert cert is None


def test_inclusion_gap_of_nested_sets():
    assert inclusion_gap(Interval(0.0, None), Interval(0.0, None), 1.5, 0.1) == pytest.approx(0.05)
    assert inclusion_gap(Interval(1.0, None), Interval(0.0, None), 2.0, 0.1) == 0.0


def test_interiority_of_identity_fan():
    res = interiority_check([[[1.0, 0.0], [0.0, 1.0]]], ORTHANT)
    assert res.ok
    assert res.margin == pytest.approx(np.sqrt(0.5), rel=1e-4)
    assert np.linalg.norm(res.witness) == pytest.approx(1.0)


def test_interiority_fails_for_opposed_matrices():
    G = [[[1.0, 0.0], [0.0, 1.0]], [[1.0, 0.0], [0.0, -1.0]]]
    assert not interiority_check(G, ORTHANT).ok
    with pytest.raises(NotApplicableError):
        fan_increase_bound(G, ORTHANT)


@pytest.mark.parametrize("L,nominal", [([[1.0, 0.0], [0.0, 1.0]], 2.0), ([[2.0, 0.0], [0.0, 3.0]], 3.0)])
def test_fan_bound_nominal(L, nominal):
    fb = fan_increase_bound([L], ORTHANT)
    assert fb.nominal == pytest.approx(nominal)
    assert 1.0 < fb.value <= fb.nominal


def test_fan_bound_value_is_certified():
    G = [[[1.0, 0.0], [0.0, 1.0]]]
    fb = fan_increase_bound(G, ORTHANT)
    Phi = FanMap(G).slice_x([0.0])
    cert = check_c_increase(Phi, ORTHANT, fb.value - 0.05, Box([-1.0, -1.0], [1.0, 1.0]), (1e-1, 1e-2),
                            grid_n=3, witness_dir=fb.interiority.witness)
    assert cert.valid


def test_fan_bound_in_one_dimension_matches_nominal():
    fb = fan_increase_bound([[[2.0]]], HALFLINE)
    assert fb.value == pytest.approx(fb.nominal)
    assert fb.nominal == pytest.approx(3.0)


def test_fan_bound_samples_the_hull():
    G = [[[2.0, 0.0], [0.0, 3.0]], [[3.0, 0.0], [0.0, 2.0]]]
    fb = fan_increase_bound(G, ORTHANT, sample_n=64)
    assert fb.vertex_eta == pytest.approx(2.0)
    assert fb.eta <= fb.vertex_eta
    assert fb.eta == pytest.approx(2.0, abs=1e-9)


def test_fan_bound_needs_a_proper_cone():
    with pytest.raises(NotApplicableError):
        fan_increase_bound([[[1.0]]], ConeSpec.from_generators([[1.0], [-1.0]]))
