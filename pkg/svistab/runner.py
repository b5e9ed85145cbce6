"""Run the analyses of a spec file and assemble the report."""

from __future__ import annotations

import asyncio
import hashlib
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Callable

from rich.console import Console
from rich.progress import BarColumn, Progress, SpinnerColumn, TaskProgressColumn, TextColumn

from . import __version__
from .certify import (
    VIOLATED,
    CertificationReport,
    certify_calm,
    certify_increase_slope,
    certify_liplsc,
    certify_lipusc,
    certify_val,
)
from .config import DEFAULT_DELTA_SCHEDULE, DEFAULT_EPS_SCHEDULE, DEFAULT_R_SCHEDULE, Tolerances
from .errors import InputError, NotApplicableError, SviError
from .estimates import fmt_value
from .geometry import excess_identities_check, support_distance_bound
from .increase import (
    GLOBAL,
    LOCAL,
    UNIFORM,
    check_c_increase,
    check_c_increase_uniform,
    certified_alpha,
    fan_increase_bound,
    interiority_check,
)
from .moduli import (
    SliceParamMap,
    SolutionParamMap,
    bundle_liplsc_bound,
    calm_modulus,
    lip_joint_modulus,
    lip_p_modulus,
    liploc_modulus,
    liplsc_modulus,
    lipusc_modulus,
)
from .parametric import val_calmness_report, val_sweep, value_at
from .setmaps import FanMap, InclusionInstance, in_solution, phi, solve_slice_1d
from .slopes import (
    error_bound_check,
    excess_function,
    partial_strict_outer_slope,
    strict_outer_slope,
    strong_slope,
    tau,
)
from .spec import AnalysisSpec, SpecFile, build_body

console = Console(stderr=True)

# Concurrency settings
DEFAULT_JOBS = 1
MAX_JOBS = 32

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_VIOLATED = 2

# (record, named series, certification reports)
OpResult = tuple[dict[str, Any], dict[str, dict[str, Any]], list[CertificationReport]]


def _series(columns: list[str], rows: list[list[Any]]) -> dict[str, Any]:
    return {"columns": columns, "rows": rows}


def _levels_series(est) -> dict[str, Any]:
    # calm levels are keyed by (delta, zeta); zeta is fixed per run
    return _series(["scale", "value"], [[s[0] if isinstance(s, tuple) else s, v] for s, v in est.levels])


def _p(instance: InclusionInstance, p):
    return instance.pbar if p is None else p


def _x(instance: InclusionInstance, x):
    return instance.xbar if x is None else x


# Single-instance operations

def _op_phi(instance: InclusionInstance, params) -> OpResult:
    p, x = _p(instance, params.p), _x(instance, params.x)
    value = phi(instance.F, instance.C, p, x, instance.tolerances)
    rec = {
        "p": [float(v) for v in p],
        "x": [float(v) for v in x],
        "phi": fmt_value(value),
        "in_solution": in_solution(instance.F, instance.C, p, x, instance.tolerances),
    }
    return rec, {}, []


def _op_solve_slice(instance: InclusionInstance, params) -> OpResult:
    sl = solve_slice_1d(instance.F, instance.C, _p(instance, params.p), instance.x_window, params.grid_n,
                        instance.tolerances)
    return sl.to_record(), {"": _series(["lo", "hi"], [list(iv) for iv in sl.intervals])}, []


def _op_strong_slope(instance: InclusionInstance, params) -> OpResult:
    psi = excess_function(instance.F, instance.C, _p(instance, params.p), instance.tolerances)
    est = strong_slope(psi, params.x, params.r_schedule or DEFAULT_R_SCHEDULE, params.dirs_n,
                       instance.tolerances, instance.seed)
    return est.to_record(), {"": _levels_series(est)}, []


def _op_strict_outer_slope(instance: InclusionInstance, params) -> OpResult:
    psi = excess_function(instance.F, instance.C, instance.pbar, instance.tolerances)
    est = strict_outer_slope(psi, instance.xbar, params.eps_schedule or DEFAULT_EPS_SCHEDULE, params.grid_n,
                             instance.tolerances, instance.seed)
    return est.to_record(), {"": _levels_series(est)}, []


def _op_partial_strict_outer_slope(instance: InclusionInstance, params) -> OpResult:
    est = partial_strict_outer_slope(
        instance.F, instance.C, instance.pbar, instance.xbar, params.eps_schedule or DEFAULT_EPS_SCHEDULE,
        params.grid_n, instance.tolerances, instance.seed,
    )
    return est.to_record(), {"": _levels_series(est)}, []


def _op_tau(instance: InclusionInstance, params) -> OpResult:
    region = params.region.build() if params.region is not None else instance.x_window
    est = tau(instance.F, instance.C, instance.pbar, region, params.grid_n, instance.tolerances, instance.seed)
    return est.to_record(), {"": _levels_series(est)}, []


def _op_error_bound(instance: InclusionInstance, params) -> OpResult:
    region = params.region.build() if params.region is not None else instance.x_window
    check = error_bound_check(instance.F, instance.C, instance.pbar, region, params.grid_n, instance.tolerances,
                              instance.seed)
    return check.to_record(), {"tau": _levels_series(check.tau)}, []


def _param_map(instance: InclusionInstance, params):
    """(map, center, reference point) for a modulus request."""
    tol = instance.tolerances
    if params.map == "solv":
        return SolutionParamMap(instance), instance.pbar, instance.xbar
    if params.map == "F_p":
        return SliceParamMap(instance.F, "p", instance.xbar, tol.membership), instance.pbar, params.y
    return SliceParamMap(instance.F, "x", instance.pbar, tol.membership), instance.xbar, params.y


def _needs_y(params, y):
    if y is None:
        raise InputError(f"map {params.map!r} needs params.y, a point of the value at the center")
    return y


def _modulus_op(kind: str) -> Callable[[InclusionInstance, Any], OpResult]:
    def run(instance: InclusionInstance, params) -> OpResult:
        tol = instance.tolerances
        deltas = params.delta_schedule or DEFAULT_DELTA_SCHEDULE
        grid = {"grid_n": params.grid_n} if params.grid_n is not None else {}
        Phi, center, y = _param_map(instance, params)
        if kind == "liplsc":
            est = liplsc_modulus(Phi, center, _needs_y(params, y), deltas, tol=tol, **grid)
        elif kind == "calm":
            zeta = params.zeta if params.zeta is not None else Phi.default_zeta or 0.5 * instance.x_half_width
            est = calm_modulus(Phi, center, _needs_y(params, y), deltas, zeta, tol=tol, **grid)
        elif kind == "lipusc":
            est = lipusc_modulus(Phi, center, deltas, tol=tol, **grid)
        else:
            est = liploc_modulus(Phi, center, deltas, tol=tol, **grid)
        return est.to_record(), {"": _levels_series(est)}, []

    return run


def _op_lip_p(instance: InclusionInstance, params) -> OpResult:
    grid = {"grid_n": params.grid_n} if params.grid_n is not None else {}
    est = lip_p_modulus(instance.F, instance.pbar, instance.x_window,
                        params.delta_schedule or DEFAULT_DELTA_SCHEDULE, tol=instance.tolerances, **grid)
    return est.to_record(), {"": _levels_series(est)}, []


def _op_lip_joint(instance: InclusionInstance, params) -> OpResult:
    grid = {"grid_n": params.grid_n} if params.grid_n is not None else {}
    est = lip_joint_modulus(instance.F, instance.pbar, instance.xbar,
                            params.delta_schedule or DEFAULT_DELTA_SCHEDULE, tol=instance.tolerances, **grid)
    return est.to_record(), {"": _levels_series(est)}, []


def _op_value_at(instance: InclusionInstance, params) -> OpResult:
    return value_at(instance, None, _p(instance, params.p)).to_record(), {}, []


def _op_val_sweep(instance: InclusionInstance, params) -> OpResult:
    profile = val_sweep(instance, None, params.p_values, params.n)
    rows = [[list(pt.p) if len(pt.p) > 1 else pt.p[0], pt.value] for pt in profile.points]
    return profile.to_record(), {"": _series(["p", "val"], rows)}, []


def _op_val_calmness(instance: InclusionInstance, params) -> OpResult:
    region = params.tau_region.build() if params.tau_region is not None else None
    rep = val_calmness_report(instance, None, None, params.delta_schedule or DEFAULT_DELTA_SCHEDULE, region)
    return rep.to_record(), {}, []


def _increase_check(instance: InclusionInstance, params) -> Callable[[float], Any]:
    tol, r_schedule = instance.tolerances, params.r_schedule or DEFAULT_R_SCHEDULE
    delta = params.delta if params.delta is not None else 0.25 * instance.x_half_width
    if params.variant == UNIFORM:
        return lambda a: check_c_increase_uniform(
            instance.F, instance.C, a, instance.pbar, instance.xbar, delta, r_schedule,
            params.search_budget, tol=tol, seed=instance.seed,
        )
    Phi = instance.F.slice_x(instance.pbar)
    if params.variant == LOCAL:
        return lambda a: check_c_increase(
            Phi, instance.C, a, instance.x_window, r_schedule, params.search_budget, LOCAL,
            instance.xbar, delta, tol=tol, seed=instance.seed,
        )
    return lambda a: check_c_increase(
        Phi, instance.C, a, instance.x_window, r_schedule, params.search_budget, GLOBAL, tol=tol, seed=instance.seed,
    )


def _op_check_c_increase(instance: InclusionInstance, params) -> OpResult:
    if params.alpha is None:
        raise InputError("check_c_increase needs params.alpha; use certified_alpha to search for one")
    return _increase_check(instance, params)(params.alpha).to_record(), {}, []


def _op_certified_alpha(instance: InclusionInstance, params) -> OpResult:
    alpha, cert = certified_alpha(_increase_check(instance, params), params.alpha_max)
    rec = {
        "alpha": fmt_value(alpha),
        "variant": params.variant,
        "certificate": cert.to_record() if cert is not None else None,
    }
    return rec, {}, []


def _fan_matrices(instance: InclusionInstance):
    if not isinstance(instance.F, FanMap):
        raise NotApplicableError(f"instance {instance.id} is not a fan map")
    return instance.F.matrices_at(instance.pbar)


def _op_fan_bound(instance: InclusionInstance, params) -> OpResult:
    fb = fan_increase_bound(_fan_matrices(instance), instance.C, params.sample_n, instance.seed,
                            params.search_budget)
    return fb.to_record(), {}, []


def _op_interiority(instance: InclusionInstance, params) -> OpResult:
    res = interiority_check(_fan_matrices(instance), instance.C, params.search_budget,
                            instance.tolerances.membership)
    return res.to_record(), {}, []


def _op_bundle_bound(instance: InclusionInstance, params) -> OpResult:
    if not isinstance(instance.F, FanMap):
        raise NotApplicableError(f"instance {instance.id} is not a fan map")
    return bundle_liplsc_bound(instance.F, _p(instance, params.p)).to_record(), {}, []


def _op_excess_identities(instance: InclusionInstance, params) -> OpResult:
    S = build_body(params.set, "params.set")
    checks = excess_identities_check(S, instance.C, params.r, instance.tolerances.membership, instance.seed)
    rec = {
        "r": params.r,
        "identities": [
            {
                "name": c.name,
                "lhs": fmt_value(c.lhs) if c.lhs is not None else None,
                "rhs": fmt_value(c.rhs) if c.rhs is not None else None,
                "holds": c.holds,
                **({"skipped": c.skipped} if c.skipped else {}),
            }
            for c in checks
        ],
    }
    return rec, {}, []


def _op_support_distance(instance: InclusionInstance, params) -> OpResult:
    S = build_body(params.set, "params.set")
    sb = support_distance_bound(S, params.dirs_n, instance.seed)
    rec = {"estimate": fmt_value(sb.estimate), "distance": fmt_value(sb.distance), "directions": sb.directions,
           "holds": sb.holds}
    return rec, {}, []


# Certification operations

def _certified(reports: list[CertificationReport]) -> OpResult:
    series = {}
    for rep in reports:
        if rep.empirical is not None:
            series[rep.theorem] = _levels_series(rep.empirical)
    return {"reports": [r.to_record() for r in reports]}, series, reports


def _op_certify_liplsc(instance: InclusionInstance, params) -> OpResult:
    return _certified([certify_liplsc(instance, params.delta_schedule or DEFAULT_DELTA_SCHEDULE,
                                      params.bound_override)])


def _op_certify_calm(instance: InclusionInstance, params) -> OpResult:
    return _certified([certify_calm(instance, params.delta_schedule or DEFAULT_DELTA_SCHEDULE, params.zeta,
                                    params.bound_override)])


def _op_certify_lipusc(instance: InclusionInstance, params) -> OpResult:
    region = params.x_region.build() if params.x_region is not None else None
    return _certified([certify_lipusc(instance, region, params.delta_schedule or DEFAULT_DELTA_SCHEDULE,
                                      params.bound_override)])


def _op_certify_val(instance: InclusionInstance, params) -> OpResult:
    region = params.x_region.build() if params.x_region is not None else None
    return _certified(certify_val(instance, None, params.delta_schedule or DEFAULT_DELTA_SCHEDULE, region,
                                  params.bound_override))


def _op_certify_increase_slope(instance: InclusionInstance, params) -> OpResult:
    return _certified(certify_increase_slope(instance, params.alpha, params.delta,
                                             bound_override=params.bound_override))


OPS: dict[str, Callable[[InclusionInstance, Any], OpResult]] = {
    "phi": _op_phi,
    "solve_slice": _op_solve_slice,
    "strong_slope": _op_strong_slope,
    "strict_outer_slope": _op_strict_outer_slope,
    "partial_strict_outer_slope": _op_partial_strict_outer_slope,
    "tau": _op_tau,
    "error_bound": _op_error_bound,
    "liplsc": _modulus_op("liplsc"),
    "calm": _modulus_op("calm"),
    "lipusc": _modulus_op("lipusc"),
    "liploc": _modulus_op("liploc"),
    "lip_p": _op_lip_p,
    "lip_joint": _op_lip_joint,
    "value_at": _op_value_at,
    "val_sweep": _op_val_sweep,
    "val_calmness": _op_val_calmness,
    "check_c_increase": _op_check_c_increase,
    "certified_alpha": _op_certified_alpha,
    "fan_bound": _op_fan_bound,
    "interiority": _op_interiority,
    "bundle_bound": _op_bundle_bound,
    "excess_identities": _op_excess_identities,
    "support_distance": _op_support_distance,
    "certify_liplsc": _op_certify_liplsc,
    "certify_calm": _op_certify_calm,
    "certify_lipusc": _op_certify_lipusc,
    "certify_val": _op_certify_val,
    "certify_increase_slope": _op_certify_increase_slope,
}


@dataclass
class AnalysisResult:
    """Outcome of one analysis: a record, or the error that stopped it."""
    analysis: AnalysisSpec
    record: dict[str, Any] | None = None
    series: dict[str, dict[str, Any]] = field(default_factory=dict)
    reports: list[CertificationReport] = field(default_factory=list)
    error: str | None = None
    error_type: str | None = None
    seconds: float = 0.0

    def to_record(self, timings: bool = False) -> dict[str, Any]:
        rec: dict[str, Any] = {"id": self.analysis.id, "op": self.analysis.op, "instance": self.analysis.instance}
        if self.error is not None:
            rec["error"] = {"type": self.error_type, "message": self.error}
        else:
            rec["result"] = self.record
        if timings:
            rec["seconds"] = round(self.seconds, 6)
        return rec

    def named_series(self) -> dict[str, dict[str, Any]]:
        """Series keyed by analysis id, or id/theorem for certification runs."""
        return {f"{self.analysis.id}/{k}" if k else self.analysis.id: v for k, v in self.series.items()}


def run_analysis(analysis: AnalysisSpec, instance: InclusionInstance) -> AnalysisResult:
    """Run one analysis synchronously; svistab errors end up in the result, not raised."""
    start = time.perf_counter()
    result = AnalysisResult(analysis)
    try:
        result.record, result.series, result.reports = OPS[analysis.op](instance, analysis.parsed_params())
    except SviError as e:
        result.error, result.error_type = str(e), type(e).__name__
    result.seconds = time.perf_counter() - start
    return result


def select_analyses(
    spec: SpecFile,
    only: list[str] | None = None,
    ops: frozenset[str] | set[str] | None = None,
) -> list[AnalysisSpec]:
    """Analyses to run, in file order, restricted to the given ops and ids."""
    chosen = list(spec.analyses)
    if ops is not None:
        chosen = [a for a in chosen if a.op in ops]
    if only:
        known = {a.id for a in spec.analyses}
        unknown = sorted(set(only) - known)
        if unknown:
            raise InputError(f"--only names unknown analyses: {unknown}")
        chosen = [a for a in chosen if a.id in only]
    return chosen


async def run_analyses(
    analyses: list[AnalysisSpec],
    instances: dict[str, InclusionInstance],
    jobs: int = DEFAULT_JOBS,
    quiet: bool = False,
) -> list[AnalysisResult]:
    """Run analyses concurrently in worker threads; results come back in input order."""
    if not 1 <= jobs <= MAX_JOBS:
        raise InputError(f"jobs must be between 1 and {MAX_JOBS}, got {jobs}")
    semaphore = asyncio.Semaphore(jobs)

    with Progress(
        SpinnerColumn(),
        TextColumn("[progress.description]{task.description}"),
        BarColumn(),
        TaskProgressColumn(),
        console=console,
        disable=quiet,
    ) as progress:
        task = progress.add_task("[cyan]Running analyses...", total=len(analyses))

        async def run_one(analysis: AnalysisSpec) -> AnalysisResult:
            async with semaphore:
                result = await asyncio.to_thread(run_analysis, analysis, instances[analysis.instance])
                if result.error is not None and not quiet:
                    console.print(f"[yellow]Warning: {analysis.id} failed: {result.error}[/yellow]")
                progress.advance(task)
                return result

        return list(await asyncio.gather(*[run_one(a) for a in analyses]))


def sha256_hex(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def build_report(
    results: list[AnalysisResult],
    raw_spec: bytes,
    seed: int,
    tolerances: Tolerances,
    timings: bool = False,
) -> dict[str, Any]:
    """The top-level report document; identical inputs give identical output unless timings are on."""
    verdicts = Counter(rep.verdict for res in results for rep in res.reports)
    series: dict[str, dict[str, Any]] = {}
    for res in results:
        series.update(res.named_series())
    return {
        "tool": "svistab",
        "version": __version__,
        "input_sha256": sha256_hex(raw_spec),
        "seed": seed,
        "tolerances": tolerances.to_dict(),
        "results": [res.to_record(timings) for res in results],
        "series": series,
        "summary": {
            "analyses": len(results),
            "errors": sum(1 for res in results if res.error is not None),
            "verdicts": dict(sorted(verdicts.items())),
        },
    }


def exit_code(results: list[AnalysisResult]) -> int:
    """2 if any certification was violated, else 1 if any analysis failed, else 0."""
    if any(rep.verdict == VIOLATED for res in results for rep in res.reports):
        return EXIT_VIOLATED
    if any(res.error is not None for res in results):
        return EXIT_ERROR
    return EXIT_OK
