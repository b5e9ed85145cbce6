"""Certification reports: hypotheses, bounds and empirical moduli for each stability result."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from .config import DEFAULT_DELTA_SCHEDULE, DEFAULT_R_SCHEDULE, Tolerances
from .errors import InputError, NotApplicableError
from .estimates import (
    CONVERGED,
    DIVERGING,
    EMPTY_BAND,
    Estimate,
    SlopeEstimate,
    bound_ratio,
    fmt_value,
)
from .geometry import Box, unit_grid
from .increase import (
    GLOBAL,
    LOCAL,
    IncreaseCertificate,
    certified_alpha,
    check_c_increase,
    check_c_increase_uniform,
    fan_increase_bound,
)
from .moduli import (
    SliceParamMap,
    SolutionParamMap,
    calm_modulus,
    lip_joint_modulus,
    lip_p_modulus,
    liplsc_modulus,
    lipusc_modulus,
)
from .parametric import Objective, ValBound, ValCalmnessReport, val_calmness_report
from .setmaps import FanMap, InclusionInstance
from .slopes import excess_function, partial_strict_outer_slope, strict_outer_slope, strong_slope, tau

# Hypothesis statuses
VERIFIED = "verified"
WINDOW_VERIFIED = "window-verified"
ASSUMED = "assumed"
FAILED = "failed"
NOT_CHECKABLE = "not-checkable"

# Report verdicts
CONSISTENT = "consistent"
VACUOUS = "vacuous"
VIOLATED = "violated"
NOT_EVALUABLE = "not-evaluable"

# The bound caps the empirical value from above (moduli) or from below (slopes)
UPPER = "upper"
LOWER = "lower"

# Largest alpha tried when no alpha is supplied and F is not a fan
ALPHA_SEARCH_MAX = 4.0

# Samples of infeasible points near xbar for the pointwise slope check
SLOPE_GRID_N = 21
SLOPE_GRID_BUDGET = 121


@dataclass(frozen=True)
class HypothesisCheck:
    id: str
    description: str
    status: str
    evidence: str = ""

    @property
    def failed(self) -> bool:
        return self.status == FAILED

    def to_record(self) -> dict[str, Any]:
        rec = {"id": self.id, "description": self.description, "status": self.status}
        if self.evidence:
            rec["evidence"] = self.evidence
        return rec


@dataclass(frozen=True)
class CertificationReport:
    """One stability result checked on one instance."""
    instance_id: str
    theorem: str
    title: str
    hypotheses: tuple[HypothesisCheck, ...]
    bound: float | None
    empirical: Estimate | None
    direction: str
    verdict: str
    seed: int
    bound_source: str = "computed"
    components: dict[str, Any] = field(default_factory=dict)
    note: str = ""

    @property
    def margin(self) -> float | None:
        if self.bound is None or self.empirical is None:
            return None
        if self.direction == UPPER:
            return self.bound - self.empirical.value
        return self.empirical.value - self.bound

    @property
    def all_hypotheses_checked(self) -> bool:
        return all(h.status in (VERIFIED, WINDOW_VERIFIED) for h in self.hypotheses)

    def to_record(self) -> dict[str, Any]:
        rec = {
            "instance_id": self.instance_id,
            "theorem": self.theorem,
            "title": self.title,
            "direction": self.direction,
            "hypotheses": [h.to_record() for h in self.hypotheses],
            "bound": fmt_value(self.bound) if self.bound is not None else NOT_EVALUABLE,
            "bound_source": self.bound_source,
            "empirical": self.empirical.to_record() if self.empirical is not None else None,
            "margin": fmt_value(self.margin),
            "verdict": self.verdict,
            "seed": self.seed,
        }
        if self.components:
            rec["components"] = {
                k: v.to_record() if hasattr(v, "to_record") else v for k, v in sorted(self.components.items())
            }
        if self.note:
            rec["note"] = self.note
        return rec


def verdict_for(
    hypotheses: Sequence[HypothesisCheck],
    bound: float | None,
    empirical: Estimate | None,
    direction: str,
    tol: Tolerances,
) -> str:
    """vacuous if a hypothesis failed; not-evaluable without a bound or a usable empirical value;
    violated when the empirical value is beyond the bound by more than the relative slack."""
    if any(h.failed for h in hypotheses):
        return VACUOUS
    if bound is None or empirical is None or math.isnan(empirical.value):
        return NOT_EVALUABLE
    value = empirical.value
    if math.isinf(value) and empirical.verdict != DIVERGING:
        return NOT_EVALUABLE
    if direction == UPPER:
        beyond = value > bound * (1.0 + tol.slack) + tol.level_abs
    else:
        beyond = value < bound * (1.0 - tol.slack) - tol.level_abs
    return VIOLATED if beyond else CONSISTENT


def _report(
    instance: InclusionInstance,
    theorem: str,
    title: str,
    hypotheses: list[HypothesisCheck],
    bound: float | None,
    empirical: Estimate | None,
    direction: str = UPPER,
    bound_override: float | None = None,
    components: dict[str, Any] | None = None,
    note: str = "",
) -> CertificationReport:
    source = "computed"
    if bound_override is not None:
        bound, source = float(bound_override), "override"
    verdict = verdict_for(hypotheses, bound, empirical, direction, instance.tolerances)
    return CertificationReport(
        instance.id, theorem, title, tuple(hypotheses), bound, empirical, direction, verdict,
        instance.seed, source, components or {}, note,
    )


def _complete(tid: str) -> HypothesisCheck:
    return HypothesisCheck(f"{tid}-i", "X is metrically complete", VERIFIED, "X = R^n")


def _lsc(hid: str, description: str, instance: InclusionInstance) -> HypothesisCheck:
    F = instance.F
    if not F.lsc_in_x:
        return HypothesisCheck(hid, description, NOT_CHECKABLE, "map is not flagged l.s.c. in x")
    if F.kind == "custom":
        return HypothesisCheck(hid, description, ASSUMED, "caller-asserted for custom maps")
    return HypothesisCheck(hid, description, VERIFIED, f"{F.kind} maps are l.s.c. in x")


def _finite_modulus(hid: str, description: str, est: Estimate, structural: bool = False) -> HypothesisCheck:
    if structural:
        return HypothesisCheck(hid, description, VERIFIED, f"{est.kind}: F does not depend on p")
    if est.verdict == DIVERGING or not est.is_finite:
        return HypothesisCheck(hid, description, FAILED, f"{est.kind} = {fmt_value(est.value)} ({est.verdict})")
    return HypothesisCheck(hid, description, WINDOW_VERIFIED, f"{est.kind} = {est.value:.6g} ({est.verdict})")


def _positive_slope(hid: str, description: str, est: Estimate, tol: Tolerances) -> HypothesisCheck:
    if est.is_finite and est.value <= tol.positivity:
        return HypothesisCheck(hid, description, FAILED, f"{est.kind} = {est.value:.3g}")
    if est.has_flag(EMPTY_BAND):
        return HypothesisCheck(hid, description, WINDOW_VERIFIED, f"{est.kind}: no sampled point in the band")
    return HypothesisCheck(hid, description, WINDOW_VERIFIED, f"{est.kind} = {est.value:.6g} ({est.verdict})")


def _ratio_bound(num: Estimate, den: Estimate, hypotheses: list[HypothesisCheck]) -> float | None:
    if any(h.failed for h in hypotheses) or not num.usable:
        return None
    if den.is_finite and not den.usable:
        return None
    return bound_ratio(num.value, den.value)


def certify_liplsc(
    instance: InclusionInstance,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    bound_override: float | None = None,
    solv: SolutionParamMap | None = None,
) -> CertificationReport:
    """Liplsc Solv(pbar|xbar) <= Lipusc F(., xbar)(pbar) / sostslx."""
    tol, F = instance.tolerances, instance.F
    pbar, xbar = instance.pbar, instance.xbar
    lipusc_F = lipusc_modulus(SliceParamMap(F, "p", xbar, tol.membership), pbar, delta_schedule, tol=tol)
    slope = partial_strict_outer_slope(F, instance.C, pbar, xbar, tol=tol, seed=instance.seed)
    hyps = [
        _complete("3.1"),
        _finite_modulus("3.1-ii", "F(., xbar) is Lipschitz u.s.c. at pbar", lipusc_F, not F.depends_on_p),
        _lsc("3.1-iii", "F(p, .) is l.s.c. for p near pbar", instance),
        _positive_slope("3.1-iv", "partial strict outer slope at (pbar, xbar) is positive", slope, tol),
    ]
    solv = solv or SolutionParamMap(instance)
    empirical = liplsc_modulus(solv, pbar, xbar, delta_schedule, tol=tol)
    return _report(
        instance, "3.1", "Lipschitz l.s.c. of Solv", hyps, _ratio_bound(lipusc_F, slope, hyps), empirical,
        bound_override=bound_override, components={"lipusc_F": lipusc_F, "sostslx": slope},
    )


def certify_calm(
    instance: InclusionInstance,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    zeta: float | None = None,
    bound_override: float | None = None,
    solv: SolutionParamMap | None = None,
) -> CertificationReport:
    """calm Solv(pbar|xbar) <= lip F(pbar, xbar) / sostsl phi_F(pbar, .)(xbar)."""
    tol, F = instance.tolerances, instance.F
    pbar, xbar = instance.pbar, instance.xbar
    lip_F = lip_joint_modulus(F, pbar, xbar, delta_schedule, tol=tol)
    slope = strict_outer_slope(excess_function(F, instance.C, pbar, tol), xbar, tol=tol, seed=instance.seed)
    hyps = [
        _complete("3.2"),
        _lsc("3.2-ii", "F(pbar, .) is l.s.c.", instance),
        _finite_modulus("3.2-iii", "F is locally Lipschitz near (pbar, xbar)", lip_F),
        _positive_slope("3.2-iv", "strict outer slope of phi_F(pbar, .) at xbar is positive", slope, tol),
    ]
    solv = solv or SolutionParamMap(instance)
    empirical = calm_modulus(solv, pbar, xbar, delta_schedule, zeta, tol=tol)
    return _report(
        instance, "3.2", "calmness of Solv", hyps, _ratio_bound(lip_F, slope, hyps), empirical,
        bound_override=bound_override, components={"lip_F": lip_F, "sostsl": slope},
    )


def certify_lipusc(
    instance: InclusionInstance,
    x_region: Box | None = None,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    bound_override: float | None = None,
    solv: SolutionParamMap | None = None,
) -> CertificationReport:
    """Lipusc Solv(pbar) <= lip_p F(pbar) / tau, with tau taken over x_region."""
    tol, F = instance.tolerances, instance.F
    pbar = instance.pbar
    region = x_region or instance.x_window
    lip_p = lip_p_modulus(F, pbar, instance.x_window, delta_schedule, tol=tol)
    tau_est = tau(F, instance.C, pbar, region, tol=tol, seed=instance.seed)
    hyps = [
        _complete("3.3"),
        _lsc("3.3-ii", "F(pbar, .) is l.s.c.", instance),
        _finite_modulus("3.3-iii", "F is locally Lipschitz in p uniformly in x", lip_p, not F.depends_on_p),
        _positive_slope("3.3-iv", "tau at pbar is positive", tau_est, tol),
    ]
    solv = solv or SolutionParamMap(instance)
    if solv.at(pbar).is_empty:
        raise InputError(f"instance {instance.id}: Solv(pbar) is empty")
    empirical = lipusc_modulus(solv, pbar, delta_schedule, tol=tol)
    return _report(
        instance, "3.3", "Lipschitz u.s.c. of Solv", hyps, _ratio_bound(lip_p, tau_est, hyps), empirical,
        bound_override=bound_override, components={"lip_p_F": lip_p, "tau": tau_est},
        note="tau is restricted to the recorded region",
    )


def _val_hypotheses(kind: str, rep: ValCalmnessReport, instance: InclusionInstance, theta: Objective):
    tol, F = instance.tolerances, instance.F
    comps = rep.components
    structural = not F.depends_on_p
    if theta.lip_const_hint is not None:
        lip_theta = HypothesisCheck("v", "theta is Lipschitz on P x X", ASSUMED, "lip_const_hint supplied")
    else:
        lip_theta = _finite_modulus("v", "theta is Lipschitz on P x X", comps["lip_theta"])
        if lip_theta.status == WINDOW_VERIFIED:
            lip_theta = HypothesisCheck(lip_theta.id, lip_theta.description, WINDOW_VERIFIED,
                                        lip_theta.evidence + " on the windows")
    if kind == "ucalm":
        tid = "4.1"
        hyps = [
            _complete(tid),
            _finite_modulus(f"{tid}-ii", "F(., xbar) is Lipschitz u.s.c. at pbar", comps["lipusc_F"], structural),
            _lsc(f"{tid}-iii", "F(p, .) is l.s.c. for p near pbar", instance),
            _positive_slope(f"{tid}-iv", "partial strict outer slope at (pbar, xbar) is positive",
                            comps["sostslx"], tol),
            _finite_modulus(f"{tid}-v", "theta is calm from above at (pbar, xbar)", comps["ucalm_theta"]),
        ]
    elif kind == "lcalm":
        tid = "4.2"
        hyps = [
            _complete(tid),
            _lsc(f"{tid}-ii", "F(pbar, .) is l.s.c.", instance),
            _finite_modulus(f"{tid}-iii", "F is locally Lipschitz in p uniformly in x", comps["lip_p_F"], structural),
            _positive_slope(f"{tid}-iv", "tau at pbar is positive", comps["tau"], tol),
            HypothesisCheck(f"{tid}-v", lip_theta.description, lip_theta.status, lip_theta.evidence),
        ]
    else:
        tid = "4.3"
        sost, tau_est = comps["sostslx"], comps["tau"]
        pos = [_positive_slope("", "", sost, tol), _positive_slope("", "", tau_est, tol)]
        failed = [h for h in pos if h.failed]
        positivity = HypothesisCheck(
            f"{tid}-iv", "min{sostslx, tau} is positive",
            FAILED if failed else WINDOW_VERIFIED,
            "; ".join(h.evidence for h in (failed or pos)),
        )
        hyps = [
            _complete(tid),
            _finite_modulus(f"{tid}-ii", "F is locally Lipschitz in p uniformly in x", comps["lip_p_F"], structural),
            _lsc(f"{tid}-iii", "F(p, .) is l.s.c. for p near pbar", instance),
            positivity,
            HypothesisCheck(f"{tid}-v", lip_theta.description, lip_theta.status, lip_theta.evidence),
        ]
    return tid, hyps


VAL_TITLES = {"ucalm": "calmness from above of val", "lcalm": "calmness from below of val", "calm": "calmness of val"}


def certify_val(
    instance: InclusionInstance,
    theta: Objective | None = None,
    delta_schedule: Sequence[float] = DEFAULT_DELTA_SCHEDULE,
    tau_region: Box | None = None,
    bound_override: float | None = None,
) -> list[CertificationReport]:
    """Three reports on val at pbar: from above, from below and two-sided."""
    theta = theta if theta is not None else instance.objective
    rep = val_calmness_report(instance, theta, None, delta_schedule, tau_region)
    reports = []
    for kind in ("ucalm", "lcalm", "calm"):
        tid, hyps = _val_hypotheses(kind, rep, instance, theta)
        vb: ValBound = rep.bounds[kind]
        bound = None if any(h.failed for h in hyps) else vb.value
        reports.append(_report(
            instance, tid, VAL_TITLES[kind], hyps, bound, rep.empirical[kind],
            bound_override=bound_override,
            components={"bound": vb, "val_pbar": fmt_value(rep.value), **rep.components},
        ))
    return reports


def _increase_hypotheses(tid: str, instance: InclusionInstance) -> list[HypothesisCheck]:
    F = instance.F
    if not F.concave_in_x:
        concave = HypothesisCheck(f"{tid}-concave", "F(p, .) is concave", FAILED, "map is not flagged concave in x")
    else:
        concave = HypothesisCheck(f"{tid}-concave", "F(p, .) is concave", WINDOW_VERIFIED,
                                  "random segment inclusions on the windows")
    grid = instance.x_window.grid(SLOPE_GRID_N if F.x_dim == 1 else 5)
    finite = all(math.isfinite(instance.phi(instance.pbar, x)) for x in grid)
    bounded = HypothesisCheck(
        f"{tid}-bounded", "F(p, .) is bounded-valued away from C",
        WINDOW_VERIFIED if finite else FAILED, "phi_F finite on the x-window grid" if finite else "phi_F = +inf",
    )
    cone = HypothesisCheck(f"{tid}-cone", "C is a closed convex cone", VERIFIED, "polyhedral cone")
    return [_lsc(f"{tid}-lsc", "F(p, .) is l.s.c.", instance), concave, bounded, cone]


def _increase_hypothesis(hid: str, cert: IncreaseCertificate | None, alpha: float) -> HypothesisCheck:
    desc = f"metric C-increase ({cert.variant if cert else 'none'}) with alpha = {alpha:.6g}"
    if cert is None or not cert.valid:
        n = len(cert.failures) if cert else 0
        return HypothesisCheck(hid, desc, NOT_CHECKABLE, f"no witness at {n} lattice points; inconclusive")
    return HypothesisCheck(hid, desc, WINDOW_VERIFIED, f"certified on the sampled lattice ({cert.checked_n} points)")


def _slopes_near(instance: InclusionInstance, delta: float) -> SlopeEstimate | None:
    """Smallest strong slope of phi_F(pbar, .) over infeasible grid points of B(xbar, delta)."""
    tol = instance.tolerances
    psi = excess_function(instance.F, instance.C, instance.pbar, tol)
    best, count = math.inf, 0
    step = delta / SLOPE_GRID_N
    for x in instance.xbar + delta * unit_grid(instance.F.x_dim, SLOPE_GRID_N, SLOPE_GRID_BUDGET):
        if psi(x) <= tol.membership:
            continue
        count += 1
        sched = tuple(step * f for f in (0.5, 0.15, 0.05))
        best = min(best, strong_slope(psi, x, sched, tol=tol, seed=instance.seed).value)
    if count == 0:
        return None
    return SlopeEstimate("min_strong_slope", best, ((delta, best),), CONVERGED, (), {"points": count})


def certify_increase_slope(
    instance: InclusionInstance,
    alpha: float | None = None,
    delta: float | None = None,
    r_schedule: Sequence[float] = DEFAULT_R_SCHEDULE,
    bound_override: float | None = None,
) -> list[CertificationReport]:
    """Slope lower bounds alpha - 1 from metric C-increase of a concave F.

    One report per claim: slopes near xbar (pointwise), the uniform, local
    and global variants.
    """
    F, tol = instance.F, instance.tolerances
    delta = delta if delta is not None else 0.25 * instance.x_half_width
    Phi = F.slice_x(instance.pbar)
    note, witness_dir, alpha_source = "", None, "supplied"
    if alpha is None and isinstance(F, FanMap):
        try:
            fb = fan_increase_bound(F.matrices_at(instance.pbar), instance.C, seed=instance.seed)
            alpha, witness_dir, alpha_source = fb.value, fb.interiority.witness, "fan bound"
        except NotApplicableError as e:
            note = f"fan bound not applicable: {e}"

    def local(a: float) -> IncreaseCertificate:
        return check_c_increase(Phi, instance.C, a, instance.x_window, r_schedule, variant=LOCAL,
                                xbar=instance.xbar, delta=delta, witness_dir=witness_dir, tol=tol,
                                seed=instance.seed)

    def glob(a: float) -> IncreaseCertificate:
        return check_c_increase(Phi, instance.C, a, instance.x_window, r_schedule, variant=GLOBAL,
                                witness_dir=witness_dir, tol=tol, seed=instance.seed)

    def uniform(a: float) -> IncreaseCertificate:
        return check_c_increase_uniform(F, instance.C, a, instance.pbar, instance.xbar, delta, r_schedule,
                                        witness_dir=witness_dir, tol=tol, seed=instance.seed)

    certs: dict[str, tuple[float, IncreaseCertificate | None]] = {}
    if alpha is None:
        alpha_source = "bisection"
    for name, check in (("local", local), ("global", glob), ("uniform", uniform)):
        certs[name] = (alpha, check(alpha)) if alpha is not None else certified_alpha(check, ALPHA_SEARCH_MAX)

    psi = excess_function(F, instance.C, instance.pbar, tol)
    claims = [
        ("5.1", "slopes near xbar from local increase", "local", lambda: _slopes_near(instance, delta)),
        ("5.2-i", "partial strict outer slope from uniform increase", "uniform",
         lambda: partial_strict_outer_slope(F, instance.C, instance.pbar, instance.xbar, tol=tol,
                                            seed=instance.seed)),
        ("5.2-ii", "strict outer slope from local increase", "local",
         lambda: strict_outer_slope(psi, instance.xbar, tol=tol, seed=instance.seed)),
        ("5.2-iii", "tau from global increase", "global",
         lambda: tau(F, instance.C, instance.pbar, instance.x_window, tol=tol, seed=instance.seed)),
    ]
    base_hyps = _increase_hypotheses("5", instance)
    reports = []
    for tid, title, variant, measure in claims:
        a, cert = certs[variant]
        inc = _increase_hypothesis(f"{tid}-incr", cert, a)
        hyps = [HypothesisCheck(f"{tid}-{h.id.split('-', 1)[1]}", h.description, h.status, h.evidence)
                for h in base_hyps] + [inc]
        bound = a - 1.0 if inc.status == WINDOW_VERIFIED else None
        empirical = measure()
        if empirical is not None and empirical.has_flag(EMPTY_BAND):
            empirical = None
        reports.append(_report(
            instance, tid, title, hyps, bound, empirical, LOWER, bound_override,
            components={"alpha": fmt_value(a), "alpha_source": alpha_source,
                        **({"certificate": cert} if cert is not None else {})},
            note=note or ("" if empirical is not None else "no infeasible points near xbar"),
        ))
    return reports
