"""Metric C-increase checks, fan covariance bounds and the interiority condition."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np
from scipy.optimize import linprog, minimize

from .config import DEFAULT_R_SCHEDULE, DEFAULT_SEED, DEFAULT_TOLERANCES, Tolerances
from .errors import InputError, NotApplicableError
from .estimates import SAMPLED, fmt_value
from .geometry import Box, ConeSpec, ConvexBody, Enlargement, excess, minkowski_sum, sphere_directions, unit_grid
from .geometry.base import as_vector
from .setmaps import SetMap

GLOBAL = "global"
LOCAL = "local"
UNIFORM = "uniform"
VARIANTS = (GLOBAL, LOCAL, UNIFORM)

# u-search radii, as fractions of r
SEARCH_FRACTIONS = (1.0, 0.75, 0.5)
DEFAULT_SEARCH_BUDGET = 64

# Per-axis counts of the x (and p) lattices checked; ball lattices are capped at LATTICE_BUDGET points
CHECK_GRID_N = 9
CHECK_GRID_N_ND = 5
UNIFORM_P_GRID_N = 5
LATTICE_BUDGET = 25

DEFAULT_HULL_SAMPLES = 512
ALPHA_BISECTIONS = 24

Slice = Callable[[np.ndarray], ConvexBody]


def cov_matrix(L: Any) -> float:
    """inf over unit y of |L^T y|: the smallest singular value, or 0 when L^T has a kernel."""
    L = np.atleast_2d(np.asarray(L, dtype=float))
    if not np.all(np.isfinite(L)):
        raise InputError("matrix must have finite entries")
    m, n = L.shape
    if m > n:
        return 0.0
    return float(np.linalg.svd(L, compute_uv=False).min())


@dataclass(frozen=True)
class Witness:
    p: tuple[float, ...] | None
    x: tuple[float, ...]
    r: float
    u: tuple[float, ...]


@dataclass(frozen=True)
class SearchFailure:
    """No u found for (p, x, r); best_gap is the smallest inclusion excess seen."""
    p: tuple[float, ...] | None
    x: tuple[float, ...]
    r: float
    best_gap: float


@dataclass(frozen=True)
class IncreaseCertificate:
    """Outcome of checking metric C-increase on a sampled lattice of (p, x, r)."""
    variant: str
    alpha: float
    delta: float | None
    witnesses: tuple[Witness, ...]
    checked_n: int
    failures: tuple[SearchFailure, ...]
    meta: dict[str, Any] = field(default_factory=dict, compare=False)

    @property
    def valid(self) -> bool:
        return self.checked_n > 0 and not self.failures

    def to_record(self) -> dict[str, Any]:
        return {
            "variant": self.variant,
            "alpha": self.alpha,
            "delta": self.delta,
            "valid": self.valid,
            "checked_n": self.checked_n,
            "scope": "certified on the sampled lattice",
            "witnesses": [
                {"p": list(w.p) if w.p is not None else None, "x": list(w.x), "r": w.r, "u": list(w.u)}
                for w in self.witnesses
            ],
            "failures": [
                {"p": list(f.p) if f.p is not None else None, "x": list(f.x), "r": f.r,
                 "best_gap": fmt_value(f.best_gap)}
                for f in self.failures
            ],
            **({"meta": self.meta} if self.meta else {}),
        }


def inclusion_gap(value_u: ConvexBody, target: ConvexBody, alpha: float, r: float, tol: float = 1e-9) -> float:
    """e(B(Phi(u), alpha r), B(Phi(x) + C, r)), with target = Phi(x) + C; 0 iff the inclusion holds."""
    return excess(Enlargement(value_u, alpha * r), Enlargement(target, r), tol)


def _candidates(x: np.ndarray, r: float, dirs: np.ndarray, witness_dir: np.ndarray | None):
    if witness_dir is not None:
        for s in SEARCH_FRACTIONS:
            yield x + s * r * witness_dir
    yield x
    for s in SEARCH_FRACTIONS:
        for d in dirs:
            yield x + s * r * d


def _search_point(
    Phi: Slice,
    C: ConeSpec,
    alpha: float,
    x: np.ndarray,
    radii: Sequence[float],
    dirs: np.ndarray,
    witness_dir: np.ndarray | None,
    tol: float,
    p: tuple[float, ...] | None = None,
) -> tuple[list[Witness], list[SearchFailure]]:
    target = minkowski_sum(Phi(x), C.cone)
    witnesses, failures = [], []
    for r in radii:
        best = math.inf
        for u in _candidates(x, r, dirs, witness_dir):
            gap = inclusion_gap(Phi(u), target, alpha, r, tol)
            if gap <= tol * max(1.0, r):
                witnesses.append(Witness(p, tuple(x.tolist()), float(r), tuple(u.tolist())))
                break
            best = min(best, gap)
        else:
            failures.append(SearchFailure(p, tuple(x.tolist()), float(r), best))
    return witnesses, failures


def check_c_increase(
    Phi: Slice,
    C: ConeSpec,
    alpha: float,
    window: Box,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    variant: str = GLOBAL,
    xbar: Any = None,
    delta: float | None = None,
    grid_n: int = CHECK_GRID_N,
    witness_dir: Any = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> IncreaseCertificate:
    """Look for u in B(x, r) with B(Phi(u), alpha r) inside B(Phi(x) + C, r).

    global: x on a grid of the window, every r of the schedule.
    local: x on a grid of B(xbar, delta), only r < delta.
    A failed search is inconclusive; it never disproves the property.
    """
    if alpha <= 1:
        raise InputError(f"alpha must exceed 1, got {alpha}")
    if variant not in (GLOBAL, LOCAL):
        raise InputError(f"variant must be {GLOBAL!r} or {LOCAL!r}; use check_c_increase_uniform")
    dim = window.dim
    if variant == LOCAL:
        if xbar is None or delta is None or delta <= 0:
            raise InputError("the local variant needs xbar and a positive delta")
        xbar = as_vector(xbar, dim, name="xbar")
        xs = xbar + delta * unit_grid(dim, grid_n, budget=LATTICE_BUDGET)
        radii = [r for r in r_schedule if r < delta]
    else:
        xs = window.grid(grid_n if dim == 1 else min(grid_n, CHECK_GRID_N_ND))
        radii = list(r_schedule)
    dirs = sphere_directions(dim, search_budget, seed)
    wdir = None
    if witness_dir is not None:
        wdir = as_vector(witness_dir, dim, name="witness_dir")
        wdir = wdir / np.linalg.norm(wdir)
    witnesses, failures = [], []
    for x in xs:
        w, f = _search_point(Phi, C, alpha, x, radii, dirs, wdir, tol.membership)
        witnesses.extend(w)
        failures.extend(f)
    return IncreaseCertificate(
        variant, float(alpha), delta, tuple(witnesses), len(xs) * len(radii), tuple(failures),
        {"grid_n": grid_n, "search_budget": search_budget},
    )


def check_c_increase_uniform(
    F: SetMap,
    C: ConeSpec,
    alpha: float,
    pbar: Any,
    xbar: Any,
    delta: float,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    grid_n: int = CHECK_GRID_N,
    p_grid_n: int = UNIFORM_P_GRID_N,
    witness_dir: Any = None,
    tol: Tolerances = DEFAULT_TOLERANCES,
    seed: int = DEFAULT_SEED,
) -> IncreaseCertificate:
    """The local check for every p on a grid of B(pbar, delta), with the same alpha and delta."""
    if alpha <= 1:
        raise InputError(f"alpha must exceed 1, got {alpha}")
    if delta <= 0:
        raise InputError("delta must be positive")
    pbar = as_vector(pbar, F.p_dim, name="pbar")
    xbar = as_vector(xbar, F.x_dim, name="xbar")
    ps = pbar + delta * unit_grid(F.p_dim, p_grid_n, budget=LATTICE_BUDGET)
    xs = xbar + delta * unit_grid(F.x_dim, grid_n, budget=LATTICE_BUDGET)
    radii = [r for r in r_schedule if r < delta]
    dirs = sphere_directions(F.x_dim, search_budget, seed)
    wdir = None
    if witness_dir is not None:
        wdir = as_vector(witness_dir, F.x_dim, name="witness_dir")
        wdir = wdir / np.linalg.norm(wdir)
    witnesses, failures = [], []
    for p in ps:
        Phi = F.slice_x(p)
        for x in xs:
            w, f = _search_point(Phi, C, alpha, x, radii, dirs, wdir, tol.membership, tuple(p.tolist()))
            witnesses.extend(w)
            failures.extend(f)
    return IncreaseCertificate(
        UNIFORM, float(alpha), delta, tuple(witnesses), len(ps) * len(xs) * len(radii), tuple(failures),
        {"grid_n": grid_n, "p_grid_n": p_grid_n, "search_budget": search_budget},
    )


def certified_alpha(
    check: Callable[[float], IncreaseCertificate],
    alpha_max: float,
    iterations: int = ALPHA_BISECTIONS,
) -> tuple[float, IncreaseCertificate | None]:
    """Largest alpha in (1, alpha_max] whose check passes, by bisection.

    The check passing at alpha implies it passes below, since enlargements
    are nested. Returns (1.0, None) when nothing above 1 is certified.
    """
    cert = check(alpha_max)
    if cert.valid:
        return alpha_max, cert
    lo, hi, best = 1.0, alpha_max, None
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if mid <= 1.0:
            break
        cert = check(mid)
        if cert.valid:
            lo, best = mid, cert
        else:
            hi = mid
    return lo, best


@dataclass(frozen=True)
class InteriorityResult:
    """Witness u (unit or zero) and margin eps with L(u + eps B) inside C for every vertex L."""
    ok: bool
    witness: tuple[float, ...]
    margin: float

    def to_record(self) -> dict[str, Any]:
        return {"ok": self.ok, "witness": list(self.witness), "margin": fmt_value(self.margin)}


def _margin(u: np.ndarray, rows: np.ndarray, scales: np.ndarray) -> float:
    """Largest eps with rows . (u + eps b) >= 0 for every |b| <= 1."""
    vals = rows @ u
    if np.any(vals[scales <= 1e-14] < -1e-12):
        return -math.inf
    active = scales > 1e-14
    if not np.any(active):
        return math.inf
    return float(np.min(vals[active] / scales[active]))


def interiority_check(
    G: Any,
    C: ConeSpec,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
    tol: float = 1e-9,
) -> InteriorityResult:
    """Search u in the unit ball maximizing eps with L(u + eps B) inside C for all vertex matrices.

    With inward normals a of C the condition reads a . L u >= eps |L^T a|, which
    is linear in L, so checking the vertices covers the whole hull. A linear
    program on the box gives a start, SLSQP polishes it on the ball, and the
    margin of the final u is computed exactly.
    """
    mats = np.asarray(G, dtype=float)
    if mats.ndim == 2:
        mats = mats[None]
    if C.is_whole_space:
        return InteriorityResult(True, tuple(np.zeros(mats.shape[2]).tolist()), math.inf)
    n = mats.shape[2]
    normals = C.normals / np.linalg.norm(C.normals, axis=1, keepdims=True)
    rows = np.vstack([normals @ L for L in mats])
    scales = np.linalg.norm(rows, axis=1)

    # maximize eps subject to rows u >= eps * scales, u in [-1, 1]^n
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-rows, scales[:, None]])
    lp = linprog(c, A_ub=A_ub, b_ub=np.zeros(len(rows)),
                 bounds=[(-1.0, 1.0)] * n + [(0.0, 1e6)], method="highs")
    starts = [lp.x[:n]] if lp.status == 0 else []
    starts.extend(sphere_directions(n, search_budget, 0))

    best_u, best_eps = np.zeros(n), -math.inf
    for u0 in starts:
        if np.linalg.norm(u0) <= tol:
            continue
        u0 = u0 / np.linalg.norm(u0)
        eps0 = _margin(u0, rows, scales)
        if eps0 > best_eps:
            best_u, best_eps = u0, eps0
    if best_eps > -math.inf and math.isfinite(best_eps):
        z0 = np.concatenate([best_u, [max(best_eps, 0.0)]])
        res = minimize(
            lambda z: -z[-1],
            z0,
            method="SLSQP",
            constraints=[
                {"type": "ineq", "fun": lambda z: rows @ z[:n] - z[-1] * scales},
                {"type": "ineq", "fun": lambda z: 1.0 - z[:n] @ z[:n]},
            ],
        )
        u = res.x[:n]
        if np.linalg.norm(u) > tol:
            u = u / np.linalg.norm(u)
            eps = _margin(u, rows, scales)
            if eps > best_eps:
                best_u, best_eps = u, eps
    ok = best_eps > tol
    return InteriorityResult(bool(ok), tuple(best_u.tolist()), float(best_eps if ok else max(best_eps, 0.0)))


@dataclass(frozen=True)
class FanBound:
    """Increase bound for a fan over a matrix polytope.

    ``nominal`` is inf cov + 1. ``value`` is 1 + eta * margin, the bound
    delivered by the step z = x + r u with the unit interiority witness u;
    only ``value`` is used for certification.
    """
    value: float
    nominal: float
    eta: float
    vertex_eta: float
    samples: int
    interiority: InteriorityResult
    flags: tuple[str, ...] = (SAMPLED,)

    def to_record(self) -> dict[str, Any]:
        return {
            "value": fmt_value(self.value),
            "nominal": fmt_value(self.nominal),
            "eta": fmt_value(self.eta),
            "vertex_eta": fmt_value(self.vertex_eta),
            "samples": self.samples,
            "interiority": self.interiority.to_record(),
            "flags": list(self.flags),
            "note": "eta is a sampled upper bound on the inf of cov over the hull",
        }


def fan_increase_bound(
    G: Any,
    C: ConeSpec,
    sample_n: int = DEFAULT_HULL_SAMPLES,
    seed: int = DEFAULT_SEED,
    search_budget: int = DEFAULT_SEARCH_BUDGET,
) -> FanBound:
    """Increase bound of x -> {L x : L in conv G} from the covariance of the hull."""
    mats = np.asarray(G, dtype=float)
    if mats.ndim == 2:
        mats = mats[None]
    if not C.pointed or not C.has_interior or C.is_trivial or C.is_whole_space:
        raise NotApplicableError("the fan bound needs a pointed cone with interior, {0} != C != R^m")
    inter = interiority_check(mats, C, search_budget)
    if not inter.ok:
        raise NotApplicableError("interiority condition fails: no u with L(u + eps B) inside C for all L")
    vertex_eta = min(cov_matrix(L) for L in mats)
    eta = vertex_eta
    if len(mats) > 1 and sample_n > 0:
        # sigma_min is not linear over the hull, so vertices alone are not enough
        weights = np.random.default_rng(seed).dirichlet(np.ones(len(mats)), size=sample_n)
        eta = min(eta, min(cov_matrix(np.tensordot(w, mats, axes=1)) for w in weights))
    return FanBound(
        value=1.0 + eta * min(inter.margin, 1.0),
        nominal=1.0 + eta,
        eta=eta,
        vertex_eta=vertex_eta,
        samples=sample_n if len(mats) > 1 else 0,
        interiority=inter,
    )
