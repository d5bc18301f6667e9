"""Conformal-type criteria for ends of revolution and the per-end report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .catalog import INCONCLUSIVE, NON_PARABOLIC, PARABOLIC
from .divergence import ClassifierConfig, DivergenceVerdict, Kind, classify_integral
from .errors import RevendError
from .geometry import ArcCurve, EndSpec, Kappa
from .warp import EXTENDED, WarpFn, extend_warp, warp_from_curve

PASS, FAIL, SKIP, UNDECIDED = "pass", "fail", "skip", "undecided"


@dataclass
class ConformalReport:
    end_name: str
    kappa: int
    verdict: str
    fired: List[Tuple[str, Dict]] = field(default_factory=list)
    consistency: List[Tuple[str, str, Dict]] = field(default_factory=list)
    integrals: Dict[str, DivergenceVerdict] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    params: Dict[str, object] = field(default_factory=dict)


def _horizons(s_max: float, cfg: ClassifierConfig, s_lo: float = 0.0) -> List[float]:
    out = []
    for k in range(cfg.max_doublings + 1):
        T = s_lo + cfg.t0 * 2.0**k
        if T > s_max:
            break
        out.append(T)
    return out


def parabolicity_test(w: WarpFn, cfg: Optional[ClassifierConfig] = None) -> DivergenceVerdict:
    """int^inf ds / w: Divergent means parabolic, Convergent non-parabolic."""
    return classify_integral(lambda s: 1.0 / w(s), w.s_lo, cfg, w.s_max)


def sufficient_parabolic_test(w: WarpFn, cfg: Optional[ClassifierConfig] = None) -> DivergenceVerdict:
    """int^inf s ds / Omega(s); only a Divergent outcome carries information."""
    return classify_integral(lambda s: s / w.cumulative(s), w.s_lo, cfg, w.s_max)


def stochastic_test(w: WarpFn, rho: float = 1.0, cfg: Optional[ClassifierConfig] = None) -> DivergenceVerdict:
    """int^inf (C0 + Omega(s)) / w(s) ds with C0 the area term of the cap of radius rho.

    A warp that is already extended is integrated directly from its cap radius.
    """
    if w.source == EXTENDED:
        return classify_integral(lambda s: w.cumulative(s) / w(s), w.s_lo, cfg, w.s_max)
    W = extend_warp(w, rho)
    c0 = float(W.cumulative(np.array([rho]))[0])
    return classify_integral(lambda s: (c0 + w.cumulative(s)) / w(s), w.s_lo, cfg, w.s_max)


def _running(curve: ArcCurve, values_fn, cfg: ClassifierConfig, mode: str):
    """Running inf/sup of ``values_fn(s)`` at each horizon."""
    horizons = _horizons(curve.s_max, cfg)
    if not horizons:
        return [], []
    s = curve.sample_s(horizons[-1], n=4000)
    vals = values_fn(s)
    acc = np.minimum.accumulate(vals) if mode == "inf" else np.maximum.accumulate(vals)
    idx = np.searchsorted(s, horizons, side="right") - 1
    return horizons, [float(acc[i]) for i in idx]


def _stabilized(seq, rel) -> bool:
    return len(seq) >= 2 and abs(seq[-1] - seq[-2]) <= rel * max(abs(seq[-1]), abs(seq[-2]))


def _require_h3(curve: ArcCurve):
    if curve.kappa != Kappa.HYPERBOLIC:
        raise RevendError("this test applies to ends in hyperbolic space only")


def cone_test(curve: ArcCurve, cfg: Optional[ClassifierConfig] = None) -> Optional[float]:
    """Largest c such that the end lies above the c-cone x3 = c x1, if it stabilizes."""
    cfg = cfg or ClassifierConfig()
    _require_h3(curve)

    def ratio(s):
        x1, x3 = curve.point(s)
        return x3 / x1

    _, infs = _running(curve, ratio, cfg, "inf")
    if _stabilized(infs, cfg.stabilize_rel) and infs[-1] > cfg.c_floor:
        return infs[-1]
    return None


def horosphere_test(curve: ArcCurve, cfg: Optional[ClassifierConfig] = None) -> Optional[float]:
    """Height z with x3 >= z along the whole end, if the running infimum stabilizes."""
    cfg = cfg or ClassifierConfig()
    _require_h3(curve)
    _, infs = _running(curve, lambda s: curve.point(s)[1], cfg, "inf")
    if _stabilized(infs, cfg.stabilize_rel) and infs[-1] > cfg.z_floor:
        return infs[-1]
    return None


def iplus_test(curve: ArcCurve, c: float, cfg: Optional[ClassifierConfig] = None) -> DivergenceVerdict:
    """Length of the part of the profile on or above the line x3 = c x1."""
    _require_h3(curve)
    if not c > 0:
        raise ValueError("c must be positive")
    threshold = c * (1 - 1e-12)

    def gap(s):
        x1, x3 = curve.point(s)
        return x3 - threshold * x1

    def indicator(s):
        return (gap(s) >= 0).astype(float)

    cfg = cfg or ClassifierConfig()
    reach = min(curve.s_max, cfg.t0 * 2.0**cfg.max_doublings)
    return classify_integral(indicator, 0.0, cfg, curve.s_max, breakpoints=_crossings(gap, reach))


def _crossings(g, s_max: float, step: float = 1e-3, max_grid: int = 2**20, iters: int = 60) -> np.ndarray:
    """Sign changes of ``g`` on [0, s_max], bracketed on a grid and bisected.

    The grid spacing is ``step`` unless that needs more than ``max_grid``
    points; excursions narrower than the spacing can be missed.
    """
    grid = np.linspace(0.0, s_max, min(int(math.ceil(s_max / step)), max_grid) + 1)
    neg = np.concatenate([g(chunk) < 0 for chunk in np.array_split(grid, max(1, grid.size // 65536))])
    idx = np.flatnonzero(neg[1:] != neg[:-1])
    lo, hi = grid[idx], grid[idx + 1]
    lo_neg = neg[idx]
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        same = (g(mid) < 0) == lo_neg
        lo = np.where(same, mid, lo)
        hi = np.where(same, hi, mid)
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CentroidEvidence:
    branch: Optional[str]
    horizons: Tuple[float, ...]
    centroids: Tuple[float, ...]
    bound: Optional[float] = None

    @property
    def fired(self) -> bool:
        return self.branch is not None


def centroid_test(w: WarpFn, cfg: Optional[ClassifierConfig] = None) -> CentroidEvidence:
    """Confined centroid, or centroid growing at most linearly, implies parabolic."""
    cfg = cfg or ClassifierConfig()
    hs = [T for T in _horizons(w.s_max, cfg) if T > 0]
    if len(hs) < 3:
        return CentroidEvidence(None, tuple(hs), ())
    xg = w.cumulative(np.array(hs)) / np.array(hs)
    hs_t, xg_t = tuple(hs), tuple(float(v) for v in xg)
    tail = xg[-3:]
    if np.all(np.abs(np.diff(tail)) <= cfg.stabilize_rel * np.maximum(1.0, np.abs(tail[1:]))):
        return CentroidEvidence("confined", hs_t, xg_t, float(tail[-1]))
    r = xg / np.array(hs)
    rt = r[-3:]
    if np.all(np.diff(rt) <= 1e-9 * rt[:-1]):
        return CentroidEvidence("linear", hs_t, xg_t, float(rt[0]))
    return CentroidEvidence(None, hs_t, xg_t)


def nonparabolic_necessaries(curve: ArcCurve, cfg: Optional[ClassifierConfig] = None) -> List[Tuple[str, str, Dict]]:
    """Consistency checks every non-parabolic end in H^3 must pass.

    ``sup_x1_bounded``: the profile stays at bounded distance from the axis.
    ``inf_x3_to_zero``: the end approaches the ideal boundary x3 = 0.
    """
    cfg = cfg or ClassifierConfig()
    _require_h3(curve)
    hs, sups = _running(curve, lambda s: curve.point(s)[0], cfg, "sup")
    _, infs = _running(curve, lambda s: curve.point(s)[1], cfg, "inf")
    out = []
    if len(sups) < 3:
        out.append(("sup_x1_bounded", UNDECIDED, {"horizons": hs, "sup": sups}))
        out.append(("inf_x3_to_zero", UNDECIDED, {"horizons": hs, "inf": infs}))
        return out
    if _stabilized(sups, cfg.stabilize_rel):
        status = PASS
    elif sups[-1] >= 2 * sups[-2] >= 4 * sups[-3]:
        status = FAIL
    else:
        status = UNDECIDED
    out.append(("sup_x1_bounded", status, {"horizons": hs, "sup": sups}))
    if infs[-1] <= 1e-6 * infs[0] or (infs[-1] <= 0.5 * infs[-2] and infs[-2] <= 0.5 * infs[-3]):
        status = PASS
    elif _stabilized(infs, cfg.stabilize_rel) and infs[-1] > cfg.z_floor:
        status = FAIL
    else:
        status = UNDECIDED
    out.append(("inf_x3_to_zero", status, {"horizons": hs, "inf": infs}))
    return out


def _iplus_grid(c_star: Optional[float]):
    return [c_star / 2] if c_star else [1e-3, 1e-2, 1e-1]


def classify_end(end: EndSpec, cfg: Optional[ClassifierConfig] = None, rho: float = 1.0) -> ConformalReport:
    """Run every applicable criterion on ``end`` and combine them by fixed precedence."""
    cfg = cfg or ClassifierConfig()
    report = ConformalReport(end.name, int(end.kappa), INCONCLUSIVE, params=dict(end.params))
    try:
        w = warp_from_curve(end.curve)
        par = parabolicity_test(w, cfg)
        suf = sufficient_parabolic_test(w, cfg)
        sto = stochastic_test(w, rho, cfg)
    except (RevendError, ArithmeticError) as exc:
        report.flags.append(f"numeric_failure: {exc}")
        return report
    report.integrals = {"parabolicity": par, "sufficient": suf, "stochastic": sto}

    if end.kappa != Kappa.HYPERBOLIC:
        report.verdict = PARABOLIC
        report.fired.append(("nonhyperbolic_ambient", {"kappa": int(end.kappa)}))
        if par.kind == Kind.DIVERGENT:
            report.consistency.append(("ambient_crosscheck", PASS, {"integral": par.kind.value}))
        else:
            report.consistency.append(("ambient_crosscheck", FAIL, {"integral": par.kind.value}))
            report.flags.append("numerical_inconsistency")
        if suf.kind == Kind.DIVERGENT:
            report.fired.append(("sufficient_integral", {"horizon": suf.horizon}))
        return report

    curve = end.curve
    c_star = cone_test(curve, cfg)
    if c_star is not None:
        report.fired.append(("cone", {"c": c_star}))
    z_star = horosphere_test(curve, cfg)
    if z_star is not None:
        report.fired.append(("horosphere", {"z": z_star}))
    cent = centroid_test(w, cfg)
    if cent.fired:
        report.fired.append((f"centroid_{cent.branch}", {"bound": cent.bound}))
    if suf.kind == Kind.DIVERGENT:
        report.fired.append(("sufficient_integral", {"horizon": suf.horizon}))
    for c in _iplus_grid(c_star):
        ip = iplus_test(curve, c, cfg)
        if ip.kind == Kind.DIVERGENT:
            report.fired.append(("iplus", {"c": c}))
            break
    geometric = bool(report.fired)

    if par.kind == Kind.DIVERGENT:
        report.fired.append(("parabolicity_integral", {"verdict": PARABOLIC}))
        report.verdict = PARABOLIC
    elif par.kind == Kind.CONVERGENT:
        report.fired.append(("parabolicity_integral", {"verdict": NON_PARABOLIC, "value": par.value}))
        if geometric:
            report.flags.append("contradiction")
            report.verdict = INCONCLUSIVE
        else:
            checks = nonparabolic_necessaries(curve, cfg)
            report.consistency.extend(checks)
            if any(status == FAIL for _, status, _ in checks):
                report.flags.append("contradiction")
                report.verdict = INCONCLUSIVE
            else:
                report.verdict = NON_PARABOLIC
    else:
        report.verdict = PARABOLIC if geometric else INCONCLUSIVE
    if report.verdict != NON_PARABOLIC and not any(c[0] == "sup_x1_bounded" for c in report.consistency):
        report.consistency.append(("sup_x1_bounded", SKIP, {}))
        report.consistency.append(("inf_x3_to_zero", SKIP, {}))
    return report


def parabolic_kind(report: ConformalReport) -> str:
    return report.verdict


def _finite(x):
    return x if x is None or math.isfinite(x) else None
