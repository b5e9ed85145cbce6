import math

import pytest

from svistab.certify import (
    CONSISTENT,
    FAILED,
    LOWER,
    NOT_EVALUABLE,
    UPPER,
    VACUOUS,
    VERIFIED,
    VIOLATED,
    HypothesisCheck,
    certify_calm,
    certify_increase_slope,
    certify_liplsc,
    certify_lipusc,
    certify_val,
    verdict_for,
)
from svistab.config import DEFAULT_TOLERANCES
from svistab.estimates import CONVERGED, DIVERGING, INCONCLUSIVE, ModulusEstimate
from svistab.slopes import excess_function, strong_slope

from .conftest import epigraph_instance, min_of_affine

OK = HypothesisCheck("h", "holds", VERIFIED)
BROKEN = HypothesisCheck("h", "fails", FAILED)


def est(value: float, verdict: str = CONVERGED) -> ModulusEstimate:
    return ModulusEstimate("test", value, ((0.1, value),), verdict)


@pytest.mark.parametrize(
    "hyps, bound, empirical, direction, expected",
    [
        ([OK], 1.0, est(1.05), UPPER, CONSISTENT),
        ([OK], 1.0, est(1.2), UPPER, VIOLATED),
        ([BROKEN], 1.0, est(5.0), UPPER, VACUOUS),
        ([OK], None, est(1.0), UPPER, NOT_EVALUABLE),
        ([OK], 1.0, None, UPPER, NOT_EVALUABLE),
        ([OK], 1.0, est(math.nan), UPPER, NOT_EVALUABLE),
        ([OK], 1.0, est(math.inf, INCONCLUSIVE), UPPER, NOT_EVALUABLE),
        ([OK], 1.0, est(math.inf, DIVERGING), UPPER, VIOLATED),
        ([OK], 1.0, est(0.95), LOWER, CONSISTENT),
        ([OK], 1.0, est(0.5), LOWER, VIOLATED),
        ([OK], 0.0, est(0.0), UPPER, CONSISTENT),
    ],
)
def test_verdict_for(hyps, bound, empirical, direction, expected):
    assert verdict_for(hyps, bound, empirical, direction, DEFAULT_TOLERANCES) == expected


def test_shift_liplsc_is_consistent(shift):
    rep = certify_liplsc(shift)
    assert rep.theorem == "3.1"
    assert rep.all_hypotheses_checked
    assert rep.bound == pytest.approx(1.0, rel=0.05)
    assert rep.empirical.value == pytest.approx(1.0, rel=0.05)
    assert rep.verdict == CONSISTENT


def test_shift_calm_bound_uses_joint_lipschitz_constant(shift):
    # lip F under the max distance is 2 here, so the bound is loose by a factor 2
    rep = certify_calm(shift)
    assert rep.bound == pytest.approx(2.0, rel=0.05)
    assert rep.empirical.value == pytest.approx(1.0, rel=0.05)
    assert rep.verdict == CONSISTENT
    assert rep.margin == pytest.approx(1.0, rel=0.10)


def test_shift_lipusc_is_consistent(shift):
    rep = certify_lipusc(shift)
    assert rep.theorem == "3.3"
    assert rep.verdict == CONSISTENT
    assert rep.note


def test_shift_val_reports(shift):
    reports = certify_val(shift)
    assert [r.theorem for r in reports] == ["4.1", "4.2", "4.3"]
    for rep in reports:
        assert rep.verdict == CONSISTENT
        assert rep.bound == pytest.approx(1.0, rel=0.10)


def test_cubic_liplsc_is_vacuous(cubic):
    rep = certify_liplsc(cubic)
    assert rep.verdict == VACUOUS
    assert rep.bound is None
    slope = next(h for h in rep.hypotheses if h.id == "3.1-iv")
    assert slope.failed
    # Solv still moves with modulus 1
    assert rep.empirical.value == pytest.approx(1.0, abs=0.02)


def test_bound_override_is_recorded(shift):
    rep = certify_liplsc(shift, bound_override=0.5)
    assert rep.bound == 0.5
    assert rep.bound_source == "override"
    assert rep.verdict == VIOLATED
    assert rep.to_record()["bound_source"] == "override"


def test_increase_slope_reports(shift):
    reports = certify_increase_slope(shift, alpha=2.0)
    assert [r.theorem for r in reports] == ["5.1", "5.2-i", "5.2-ii", "5.2-iii"]
    for rep in reports:
        assert rep.direction == LOWER
        assert rep.bound == pytest.approx(1.0)
        assert rep.verdict == CONSISTENT
        assert rep.components["alpha_source"] == "supplied"


def test_increase_slope_without_concavity_is_vacuous(cubic):
    reports = certify_increase_slope(cubic, alpha=2.0)
    assert all(r.verdict == VACUOUS for r in reports)


def test_report_record_is_json_safe(cubic):
    rec = certify_liplsc(cubic).to_record()
    assert rec["bound"] == NOT_EVALUABLE
    assert rec["margin"] is None
    assert [h["id"] for h in rec["hypotheses"]] == ["3.1-i", "3.1-ii", "3.1-iii", "3.1-iv"]


@pytest.mark.parametrize("seed", range(20))
def test_increase_slope_bounds_hold_pointwise(seed):
    inst = epigraph_instance(min_of_affine(seed), id=f"affine-{seed}", concave=True, seed=seed)
    reports = {r.theorem: r for r in certify_increase_slope(inst)}
    for rep in reports.values():
        if rep.bound is not None:
            assert rep.verdict != VIOLATED, rep.to_record()
    tol = inst.tolerances
    psi = excess_function(inst.F, inst.C, inst.pbar, tol)
    delta = 0.25 * inst.x_half_width
    infeasible = [x for x in inst.x_window.grid(41) if psi(x) > tol.membership]
    for tid, near_xbar in (("5.2-iii", False), ("5.1", True)):
        bound = reports[tid].bound
        if bound is None:
            continue
        for x in infeasible:
            if near_xbar and abs(x[0] - inst.xbar[0]) > delta:
                continue
            slope = strong_slope(psi, x, tol=tol).value
            assert slope >= bound * (1.0 - tol.slack) - tol.level_abs, (tid, x.tolist(), slope, bound)
