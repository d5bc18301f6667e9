"""Numerical trichotomy for improper integrals int_{s_lo}^infinity f(s) ds, f >= 0.

The integral is accumulated over doubling horizons T_k = s_lo + T0 * 2^k.
After each horizon the tail window [T_k/100, T_k] (the last two decades) is
fitted by a power law (log f against log s) and an exponential (log f
against s).  A verdict is only issued once the winning fit has been stable
over three consecutive horizons; otherwise the result is ``Inconclusive``
and carries all the evidence gathered.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Tuple

import numpy as np

from .quadrature import gk15


class Kind(str, enum.Enum):
    DIVERGENT = "Divergent"
    CONVERGENT = "Convergent"
    INCONCLUSIVE = "Inconclusive"


class Family(str, enum.Enum):
    POWER_LAW = "PowerLaw"
    EXPONENTIAL = "Exponential"
    BOUNDED_BELOW = "BoundedBelow"
    VANISHING = "Vanishing"
    UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class ClassifierConfig:
    """Tuning knobs of :func:`classify_integral` and the geometric tests.

    ``delta`` is the half-width of the refusal band around p = 1 (and
    lambda = 0); ``fit_margin`` absorbs the finite-window bias of the fitted
    exponent, so the effective band is delta - fit_margin.  ``log_tol``
    accepts p within that distance of 1 as logarithmic divergence.
    """

    t0: float = 8.0
    max_doublings: int = 20
    delta: float = 0.05
    fit_margin: float = 0.005
    log_tol: float = 0.002
    tol: float = 1e-8
    fit_quality: float = 0.98
    stab_tol: float = 0.005
    n_fit: int = 64
    stabilize_rel: float = 1e-6
    c_floor: float = 1e-9
    z_floor: float = 1e-12
    quad_abs: float = 1e-10
    quad_rel: float = 1e-8

    def with_(self, **kw) -> "ClassifierConfig":
        return replace(self, **kw)


@dataclass(frozen=True)
class TailModel:
    family: Family = Family.UNRESOLVED
    fit_window: Tuple[float, float] = (0.0, 0.0)
    fit_quality: float = 0.0
    estimate: Optional[float] = None
    stderr: Optional[float] = None


@dataclass(frozen=True)
class DivergenceVerdict:
    kind: Kind
    tail: TailModel
    horizon: float
    partials: List[Tuple[float, float]] = field(default_factory=list)
    value: Optional[float] = None
    error: Optional[float] = None
    note: str = ""

    @property
    def divergent(self) -> bool:
        return self.kind == Kind.DIVERGENT

    @property
    def convergent(self) -> bool:
        return self.kind == Kind.CONVERGENT


@dataclass
class _Fit:
    slope: float
    r2: float
    stderr: float


def _linfit(x, y) -> _Fit:
    n = x.size
    xm, ym = x.mean(), y.mean()
    sxx = float(((x - xm) ** 2).sum())
    syy = float(((y - ym) ** 2).sum())
    slope = float(((x - xm) * (y - ym)).sum() / sxx)
    resid = y - (ym + slope * (x - xm))
    ssr = float((resid**2).sum())
    if syy <= 1e-24 * n * max(1.0, ym * ym):
        return _Fit(0.0, 1.0, 0.0)
    r2 = max(0.0, 1.0 - ssr / syy)
    se = math.sqrt(ssr / max(n - 2, 1) / sxx)
    return _Fit(slope, r2, se)


@dataclass
class _Step:
    T: float
    window: Tuple[float, float]
    power: Optional[_Fit]
    expo: Optional[_Fit]
    f_end: float
    wmin: float
    increment: float
    zero: bool


def _eval(f, s):
    out = np.asarray(f(s), dtype=float)
    if out.shape != s.shape:
        out = np.broadcast_to(out, s.shape).astype(float)
    if np.any(out < 0) or not np.all(np.isfinite(out)):
        raise ArithmeticError("integrand must be finite and non-negative")
    return out


def _observe(f, s_lo, T_prev, T, increment, cfg) -> _Step:
    lo = s_lo + (T - s_lo) / 100.0
    if s_lo <= 0:
        lo = T / 100.0
    s_log = np.geomspace(lo, T, cfg.n_fit)
    s_lin = np.linspace(lo, T, cfg.n_fit)
    s_last = np.linspace(T_prev, T, cfg.n_fit + 1)[1:]
    f_log = _eval(f, s_log)
    f_lin = _eval(f, s_lin)
    f_last = _eval(f, s_last)
    zero = not np.any(f_log) and not np.any(f_lin) and not np.any(f_last)
    power = expo = None
    if np.all(f_log > 0):
        power = _linfit(np.log(s_log), np.log(f_log))
        power.slope = -power.slope
    if np.all(f_lin > 0):
        expo = _linfit(s_lin, np.log(f_lin))
    return _Step(T, (lo, T), power, expo, float(f_last[-1]), float(f_last.min()),
                 increment, zero)


def _stable(values, tol) -> bool:
    return len(values) >= 3 and all(
        v is not None for v in values[-3:]) and abs(values[-1] - values[-2]) <= tol and abs(
        values[-2] - values[-3]) <= tol


def classify_integral(f: Callable, s_lo: float = 0.0, cfg: Optional[ClassifierConfig] = None,
                      s_hi: float = math.inf, breakpoints=None) -> DivergenceVerdict:
    """Decide whether int_{s_lo}^inf f diverges, converges (with value) or is undecidable.

    ``f`` must accept a numpy array.  ``s_hi`` caps the horizons where ``f``
    can be evaluated; running out of horizons without a decision gives
    ``Inconclusive``.  ``breakpoints`` lists known jumps of ``f``; they become
    quadrature panel edges.
    """
    cfg = cfg or ClassifierConfig()
    band = cfg.delta - cfg.fit_margin
    steps: List[_Step] = []
    partials: List[Tuple[float, float]] = []
    total = 0.0
    qerr = 0.0
    prev = s_lo
    pending: Optional[DivergenceVerdict] = None
    T = s_lo
    for k in range(cfg.max_doublings + 1):
        T = s_lo + cfg.t0 * 2.0**k
        if T > s_hi:
            break
        r = gk15(f, prev, T, abs_tol=cfg.quad_abs, rel_tol=cfg.quad_rel, initial_panels=4,
                 points=breakpoints)
        total += r.value
        qerr += r.error
        partials.append((T, total))
        steps.append(_observe(f, s_lo, prev, T, r.value, cfg))
        prev = T
        if len(steps) < 3:
            continue
        last = steps[-1]
        window = last.window

        # identically zero tail
        if all(st.zero for st in steps[-2:]) and all(st.increment <= cfg.quad_abs for st in steps[-2:]):
            return DivergenceVerdict(Kind.CONVERGENT, TailModel(Family.VANISHING, window, 1.0, 0.0, 0.0),
                                     T, partials, total, qerr, "integrand vanishes on the tail")

        p_hist = [st.power.slope if st.power else None for st in steps]
        l_hist = [st.expo.slope if st.expo else None for st in steps]
        candidates = []
        if last.power and last.power.r2 >= cfg.fit_quality and _stable(p_hist, cfg.stab_tol):
            candidates.append((last.power.r2, Family.POWER_LAW, last.power))
        lam_tol = cfg.stab_tol * max(1.0, abs(l_hist[-1] or 0.0))
        if last.expo and last.expo.r2 >= cfg.fit_quality and _stable(l_hist, lam_tol):
            candidates.append((last.expo.r2, Family.EXPONENTIAL, last.expo))
        candidates.sort(key=lambda c: -c[0])
        best = candidates[0] if candidates else None

        if best is not None:
            r2, fam, fit = best
            tail = TailModel(fam, window, r2, fit.slope, fit.stderr)
            remainder = None
            if fam == Family.POWER_LAW and fit.slope > 1 + band:
                remainder = last.f_end * T / (fit.slope - 1)
                drift = abs(p_hist[-1] - p_hist[-2]) + fit.stderr
                rel_unc = drift / (fit.slope - 1)
            elif fam == Family.EXPONENTIAL and fit.slope < -band:
                remainder = last.f_end / -fit.slope
                drift = abs(l_hist[-1] - l_hist[-2]) + fit.stderr
                rel_unc = drift / -fit.slope
            if remainder is not None:
                err = qerr + remainder * min(1.0, rel_unc + 1e-3)
                verdict = DivergenceVerdict(Kind.CONVERGENT, tail, T, list(partials), total + remainder,
                                            err, "tail extrapolated from fitted decay")
                if remainder <= cfg.tol:
                    return verdict
                pending = replace(verdict, note="horizons exhausted; value carries the extrapolated tail")
                continue
        pending = None

        # exhausted tail: a decaying fit (stable or not) bounds a negligible remainder
        settled = all(st.increment <= cfg.tol * max(1.0, total) for st in steps[-2:])
        if best is None and settled:
            for fam, fit in ((Family.POWER_LAW, last.power), (Family.EXPONENTIAL, last.expo)):
                if fit is None or fit.r2 < cfg.fit_quality:
                    continue
                if fam == Family.POWER_LAW and fit.slope > 1 + band:
                    remainder = last.f_end * T / (fit.slope - 1)
                elif fam == Family.EXPONENTIAL and fit.slope < -band:
                    remainder = last.f_end / -fit.slope
                else:
                    continue
                if remainder <= cfg.tol:
                    tail = TailModel(fam, window, fit.r2, fit.slope, fit.stderr)
                    return DivergenceVerdict(Kind.CONVERGENT, tail, T, partials, total + remainder,
                                             qerr + remainder, "partial integrals settled; decaying tail below tol")

        # bounded below: minima over the last windows do not decay
        mins = [st.wmin for st in steps[-4:]]
        if len(mins) == 4 and mins[-1] > 0 and min(mins) > 0:
            ratios = [mins[i + 1] / mins[i] for i in range(3)]
            if all(q >= 1 - cfg.stab_tol for q in ratios):
                tail = TailModel(Family.BOUNDED_BELOW, window, 1.0, mins[-1], None)
                return DivergenceVerdict(Kind.DIVERGENT, tail, T, partials, note="integrand bounded below")

        if best is not None:
            r2, fam, fit = best
            tail = TailModel(fam, window, r2, fit.slope, fit.stderr)
            if fam == Family.POWER_LAW:
                if fit.slope < 1 - band:
                    return DivergenceVerdict(Kind.DIVERGENT, tail, T, partials, note="power-law tail with p < 1")
                if abs(fit.slope - 1) <= cfg.log_tol:
                    return DivergenceVerdict(Kind.DIVERGENT, tail, T, partials,
                                             note="logarithmic growth of partial integrals (p = 1)")
            elif fit.slope > band:
                return DivergenceVerdict(Kind.DIVERGENT, tail, T, partials, note="exponentially growing integrand")

    if pending is not None:
        return pending
    last = steps[-1] if steps else None
    if last is None:
        return DivergenceVerdict(Kind.INCONCLUSIVE, TailModel(), T, partials, note="no horizon fits the domain")
    fits = [(st.r2, fam, st) for fam, st in ((Family.POWER_LAW, last.power), (Family.EXPONENTIAL, last.expo))
            if st is not None]
    if fits:
        r2, fam, st = max(fits, key=lambda x: x[0])
        tail = TailModel(Family.UNRESOLVED, last.window, r2, st.slope, st.stderr)
    else:
        tail = TailModel(Family.UNRESOLVED, last.window)
    return DivergenceVerdict(Kind.INCONCLUSIVE, tail, last.T, partials,
                             note="no stable decisive tail model within the horizon budget")
