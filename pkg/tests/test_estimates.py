import math

from svistab.estimates import CONVERGED, DIVERGING, INCONCLUSIVE, ModulusEstimate, classify


def test_growing_sequence_estimates_infinity():
    levels = [(1e-1, 1.0), (1e-2, 3.2), (1e-3, 10.0), (1e-4, 31.6)]
    est = ModulusEstimate.from_levels("lipusc", levels, stable_levels=3)
    assert est.verdict == DIVERGING
    assert math.isinf(est.value)
    assert [v for _, v in est.levels] == [1.0, 3.2, 10.0, 31.6]
    assert not est.usable


def test_growth_that_settles_is_converged():
    values = [0.1, 0.5, 2.0, 2.0, 2.0]
    assert classify(values, stable_levels=3) == CONVERGED
    est = ModulusEstimate.from_levels("lipusc", list(enumerate(values)), stable_levels=3)
    assert est.value == 2.0


def test_infinite_last_level_is_diverging():
    assert classify([1.0, math.inf]) == DIVERGING


def test_oscillating_sequence_is_inconclusive():
    assert classify([1.0, 2.0, 1.0, 2.0]) == INCONCLUSIVE
    assert classify([]) == INCONCLUSIVE
