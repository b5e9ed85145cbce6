"""Shared instances and helpers for the svistab tests."""

from pathlib import Path

import numpy as np
import pytest

from svistab.geometry import Box, ConeSpec
from svistab.parametric import Objective
from svistab.setmaps import EpigraphMap, InclusionInstance

FIXTURES = Path(__file__).resolve().parent.parent / "svistab" / "fixtures"

# Affine pieces in the seeded concave instances
PIECES = 3


def epigraph_instance(
    f: str,
    id: str = "inst",
    concave: bool = False,
    x_window: tuple[float, float] = (-2.0, 2.0),
    p_window: tuple[float, float] = (-1.0, 1.0),
    objective: str | None = None,
    lip_hint: float | None = None,
    pbar: float = 0.0,
    xbar: float = 0.0,
    seed: int = 0,
) -> InclusionInstance:
    """1-D instance F(p, x) = [f(p, x), +inf) in [0, +inf)."""
    F = EpigraphMap.from_expression(f, concave_in_x=concave)
    theta = Objective.from_expression(objective, 1, 1, lip_hint) if objective else None
    return InclusionInstance(
        id=id,
        F=F,
        C=ConeSpec.halfline(),
        pbar=[pbar],
        xbar=[xbar],
        x_window=Box([x_window[0]], [x_window[1]]),
        p_window=Box([p_window[0]], [p_window[1]]),
        objective=theta,
        seed=seed,
    )


def min_of_affine(seed: int) -> str:
    """min_i (a_i x + b_i p + c_i) with c_0 = 0, so (0, 0) sits on the boundary of Solv."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(0.5, 2.0, PIECES) * rng.choice([-1.0, 1.0], PIECES)
    b = rng.uniform(-1.0, 1.0, PIECES)
    c = np.concatenate([[0.0], rng.uniform(0.2, 1.0, PIECES - 1)])
    terms = [f"({ai:.4f}*x + {bi:.4f}*p + {ci:.4f})" for ai, bi, ci in zip(a, b, c)]
    expr = terms[0]
    for t in terms[1:]:
        expr = f"min({expr}, {t})"
    return expr


@pytest.fixture
def cubic():
    return epigraph_instance("p^3 + x^3", id="cubic", objective="x")


@pytest.fixture
def shift():
    return epigraph_instance("x - p", id="shift", concave=True, objective="x", lip_hint=1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
