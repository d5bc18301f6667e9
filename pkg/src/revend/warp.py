"""Warping functions of the intrinsic metric ds^2 + w(s)^2 dtheta^2."""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .geometry import ArcCurve, Kappa
from .quadrature import gauss_legendre, gk15

CURVE_DERIVED = "curve-derived"
EXTENDED = "extended"
SYNTHETIC = "synthetic"


class _Cumulative:
    """Append-only table of Omega at knots 0, 0.25, ..., 64 then ratio 1.03.

    Extension happens under a lock and only ever appends converged panel
    integrals, so concurrent readers see the same values in any order.
    """

    def __init__(self, fn: Callable, s_max: float):
        self.fn = fn
        self.s_max = s_max
        self.knots = [0.0]
        self.values = [0.0]
        self.error = 0.0
        self._lock = threading.Lock()

    def _next_knot(self, x: float) -> float:
        nxt = x + 0.25 if x < 64 else x * 1.03
        return min(nxt, self.s_max)

    def _extend(self, t: float) -> None:
        with self._lock:
            while self.knots[-1] < t:
                lo = self.knots[-1]
                hi = self._next_knot(lo)
                if hi <= lo:
                    raise DomainError(f"cumulative integral requested beyond s_max={self.s_max}")
                r = gk15(self.fn, lo, hi, abs_tol=1e-13, rel_tol=1e-11)
                self.values.append(self.values[-1] + r.value)
                self.error += r.error
                self.knots.append(hi)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise DomainError("cumulative integral needs t >= 0")
        if t.size:
            top = float(t.max())
            if top > self.s_max:
                raise DomainError(f"cumulative integral requested beyond s_max={self.s_max}")
            if top > self.knots[-1]:
                self._extend(top)
        knots = np.array(self.knots)
        vals = np.array(self.values)
        i = np.clip(np.searchsorted(knots, t, side="right") - 1, 0, knots.size - 1)
        base = knots[i]
        return vals[i] + gauss_legendre(self.fn, base, t)


@dataclass
class WarpFn:
    """Warping function on [0, s_max] with derivative and cached Omega = int_0^t w.

    ``s_lo`` is where tail integrals start: 0 for curve-derived warps, the
    cap radius for extended ones.
    """

    w: Callable
    dw: Callable
    source: str = SYNTHETIC
    s_lo: float = 0.0
    s_max: float = math.inf
    label: str = ""
    _cum: Optional[_Cumulative] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self._cum is None:
            self._cum = _Cumulative(self.w, self.s_max)

    def __call__(self, s):
        return self.w(s)

    def cumulative(self, t):
        return self._cum(t)

    @property
    def cumulative_error(self) -> float:
        return self._cum.error

    def scaled(self, k: float) -> "WarpFn":
        w, dw = self.w, self.dw
        return WarpFn(lambda s: k * w(s), lambda s: k * dw(s), self.source, self.s_lo,
                      self.s_max, f"{k:g}*{self.label}")


def synthetic(w: Callable, dw: Optional[Callable] = None, label: str = "",
              s_max: float = math.inf) -> WarpFn:
    """Wrap an arbitrary positive function as a warp.

    Without ``dw`` the derivative is a Richardson-extrapolated central
    difference.
    """
    if dw is None:
        def dw(s):
            s = np.asarray(s, dtype=float)
            h = 1e-4 * np.maximum(1.0, np.abs(s))
            lo = np.maximum(s - h, 0.0)
            d1 = (w(s + h) - w(lo)) / (s + h - lo)
            lo2 = np.maximum(s - h / 2, 0.0)
            d2 = (w(s + h / 2) - w(lo2)) / (s + h / 2 - lo2)
            central = s >= h
            return np.where(central, (4 * d2 - d1) / 3, d2)
    return WarpFn(w, dw, SYNTHETIC, 0.0, s_max, label)


def warp_from_curve(curve: ArcCurve) -> WarpFn:
    """Warp of the end generated by ``curve`` (unit speed in g_kappa)."""
    kappa = curve.kappa

    def parts(s):
        x1, x3 = curve.point(s)
        if np.any(x1 <= 0):
            raise DomainError("profile meets the rotation axis")
        if kappa == Kappa.HYPERBOLIC and np.any(x3 <= 0):
            raise DomainError("profile reaches x3 = 0")
        return x1, x3

    if kappa == Kappa.HYPERBOLIC:
        def w(s):
            x1, x3 = parts(s)
            return x1 / x3

        def dw(s):
            x1, x3 = parts(s)
            v1, v3 = curve.velocity(s)
            return (v1 * x3 - x1 * v3) / x3**2
    elif kappa == Kappa.EUCLIDEAN:
        def w(s):
            return parts(s)[0]

        def dw(s):
            return curve.velocity(s)[0]
    else:
        def w(s):
            x1, x3 = parts(s)
            return 2 * x1 / (1 + x1**2 + x3**2)

        def dw(s):
            x1, x3 = parts(s)
            v1, v3 = curve.velocity(s)
            d = 1 + x1**2 + x3**2
            return 2 * v1 / d - 4 * x1 * (x1 * v1 + x3 * v3) / d**2

    return WarpFn(w, dw, CURVE_DERIVED, 0.0, curve.s_max, curve.base.label)


def extend_warp(w: WarpFn, rho: float) -> WarpFn:
    """Cap a warp with a disc: W(x) = x near 0 and W(x) = w(x - rho) for x >= rho.

    The bridge on (rho/4, rho) is the cubic Hermite join of the two pieces,
    clipped below at half the smaller endpoint value.
    """
    if not rho > 0:
        raise ValueError("rho must be positive")
    a, b = rho / 4, rho
    ya, da = a, 1.0
    yb = float(np.asarray(w.w(np.array([0.0])))[0])
    db = float(np.asarray(w.dw(np.array([0.0])))[0])
    floor = 0.5 * min(ya, yb)
    span = b - a

    def bridge(x):
        u = (x - a) / span
        h00 = (1 + 2 * u) * (1 - u) ** 2
        h10 = u * (1 - u) ** 2
        h01 = u * u * (3 - 2 * u)
        h11 = u * u * (u - 1)
        val = h00 * ya + h10 * span * da + h01 * yb + h11 * span * db
        d00 = 6 * u * u - 6 * u
        d10 = 3 * u * u - 4 * u + 1
        d01 = -d00
        d11 = 3 * u * u - 2 * u
        der = (d00 * ya + d01 * yb) / span + d10 * da + d11 * db
        clipped = val < floor
        return np.where(clipped, floor, val), np.where(clipped, 0.0, der)

    def _split(x, inner, mid, outer):
        x = np.asarray(x, dtype=float)
        out = np.empty_like(x)
        m0 = x <= a
        m2 = x >= b
        m1 = ~(m0 | m2)
        out[m0] = inner(x[m0])
        if m1.any():
            out[m1] = mid(x[m1])
        if m2.any():
            out[m2] = outer(x[m2] - b)
        return out

    def W(x):
        return _split(x, lambda v: v, lambda v: bridge(v)[0], w.w)

    def dW(x):
        return _split(x, np.ones_like, lambda v: bridge(v)[1], w.dw)

    return WarpFn(W, dW, EXTENDED, rho, w.s_max + rho, f"extended({w.label}, rho={rho:g})")


def cumulative(w: WarpFn, t):
    """Omega(t) = int_0^t w(s) ds."""
    out = w.cumulative(np.atleast_1d(np.asarray(t, dtype=float)))
    return float(out[0]) if np.ndim(t) == 0 else out


@dataclass(frozen=True)
class CentroidFn:
    warp: WarpFn

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s <= 0):
            raise DomainError("centroid is defined for s > 0 only")
        out = self.warp.cumulative(np.atleast_1d(s)) / np.atleast_1d(s)
        return float(out[0]) if s.ndim == 0 else out


def centroid(w: WarpFn) -> CentroidFn:
    """Running average x_g(s) = Omega(s)/s."""
    return CentroidFn(w)


def gauss_curvature(w: WarpFn, s):
    """Gaussian curvature -w''/w of ds^2 + w^2 dtheta^2.

    w'' is a Richardson-extrapolated central difference of ``dw`` with step
    max(1e-4, 1e-4 s); near s = 0 the stencil is shifted right.
    """
    s = np.asarray(s, dtype=float)
    h = np.maximum(1e-4, 1e-4 * s)
    c = np.maximum(s, h)
    if np.any(c + h > w.s_max):
        raise DomainError("gauss_curvature stencil leaves the warp domain")

    def D(step):
        return (w.dw(c + step) - w.dw(c - step)) / (2 * step)

    wpp = (4 * D(h / 2) - D(h)) / 3
    val = np.asarray(w.w(s), dtype=float)
    if np.any(np.abs(val) < np.finfo(float).tiny):
        raise ArithmeticError("warp value below machine floor")
    out = -wpp / val
    return float(out) if out.ndim == 0 else out
