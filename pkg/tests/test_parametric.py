import math

import pytest

from svistab.errors import InputError, InstanceError
from svistab.geometry import Box
from svistab.parametric import (
    ATTAINED,
    INFEASIBLE,
    UNBOUNDED_BELOW,
    Objective,
    lipschitz_theta,
    val_calmness_report,
    val_sweep,
    value_at,
)

from .conftest import epigraph_instance


def test_shift_value_is_attained_at_the_left_end(shift):
    pt = value_at(shift, None, [0.5])
    assert pt.status == ATTAINED
    assert pt.value == pytest.approx(0.5, abs=1e-6)
    assert len(pt.argmin) == 1
    assert pt.argmin[0] == pytest.approx(0.5, abs=1e-6)


def test_decreasing_objective_is_unbounded_below(shift):
    theta = Objective.from_expression("-x")
    pt = value_at(shift, theta, [0.0])
    assert pt.status == UNBOUNDED_BELOW
    assert pt.value == -math.inf


def test_empty_solution_set_is_infeasible():
    inst = epigraph_instance("-p", objective="x", pbar=-0.5)
    pt = value_at(inst, None, [0.5])
    assert pt.status == INFEASIBLE
    assert pt.value == math.inf
    assert pt.argmin == ()


def test_missing_objective():
    inst = epigraph_instance("x - p", concave=True)
    with pytest.raises(InputError):
        value_at(inst, None, [0.0])


def test_val_sweep_of_shift_is_identity(shift):
    profile = val_sweep(shift, n=5)
    rows = profile.rows()
    assert [p for p, _ in rows] == pytest.approx([-1.0, -0.5, 0.0, 0.5, 1.0])
    for p, v in rows:
        assert v == pytest.approx(p, abs=1e-6)


def test_val_sweep_explicit_parameters(shift):
    profile = val_sweep(shift, p_values=[[0.25], [-0.25]])
    assert [pt.p for pt in profile.points] == [(0.25,), (-0.25,)]


def test_val_calmness_report_on_shift(shift):
    rep = val_calmness_report(shift)
    assert rep.value == pytest.approx(0.0, abs=1e-6)
    for kind in ("ucalm", "lcalm", "calm"):
        assert rep.empirical[kind].value == pytest.approx(1.0, rel=0.05)
        assert rep.bounds[kind].value == pytest.approx(1.0, rel=0.10)
    assert rep.components["lip_theta"].meta["source"] == "hint"


def test_val_calmness_needs_minimizer_at_xbar():
    inst = epigraph_instance("x - p", concave=True, objective="x", xbar=1.0)
    with pytest.raises(InstanceError):
        val_calmness_report(inst)


def test_lipschitz_theta_from_hint():
    theta = Objective.from_expression("x", lip_const_hint=1.0)
    est = lipschitz_theta(theta, Box([-1.0], [1.0]), Box([-2.0], [2.0]))
    assert est.value == 1.0
    assert est.meta["source"] == "hint"


def test_lipschitz_theta_under_max_distance():
    # |dx + 2 dp| <= 3 max(|dp|, |dx|) with equality along dp = dx
    theta = Objective.from_expression("x + 2*p")
    est = lipschitz_theta(theta, Box([-1.0], [1.0]), Box([-2.0], [2.0]))
    assert est.value == pytest.approx(3.0, rel=1e-9)
    assert est.meta["source"] == "window"
