"""Built-in profile curves: the worked examples of ends of revolution.

Each entry returns an :class:`~revend.geometry.EndSpec` whose ``expected``
field records the declared conformal type.  Entries whose coordinates grow or
decay exponentially in arc length get a modest default ``s_max`` so that the
model coordinates stay finite.
"""

from __future__ import annotations

import math
import threading
from typing import Mapping, Optional

import numpy as np
from scipy.special import fresnel

from .errors import DomainError
from .geometry import EndSpec, Kappa, ParamCurve, arc_reparam
from .quadrature import gauss_legendre, gk15

PARABOLIC = "Parabolic"
NON_PARABOLIC = "NonParabolic"
INCONCLUSIVE = "Inconclusive"

# Past this arc length the catenoid integrands equal their limits to far
# below double precision (corrections are O(e^{-4s}) and O(e^{-3s})).
CATENOID_SWITCH = 30.0


class CatenoidQuadrature:
    """Cached evaluation of y_a(s) and Lambda_a(s) for the spherical catenoid.

    Cumulative values are stored at knots that are geometric near 0 (where
    the integrands vary on the scale ``a``) and uniform up to
    :data:`CATENOID_SWITCH`; a query adds a 15-point Gauss-Legendre residual
    from the nearest knot below.
    """

    def __init__(self, a: float, abs_tol: float = 1e-13, rel_tol: float = 1e-12):
        if not a > 0:
            raise DomainError("spherical catenoid needs a > 0")
        self.a = float(a)
        self._c = math.cosh(2 * a)
        self._sh = math.sinh(2 * a)
        self._lock = threading.Lock()
        lo = min(self.a, 1e-3) * 1e-2
        near = np.geomspace(lo, 0.125, 40)
        far = np.arange(0.25, CATENOID_SWITCH + 1e-12, 0.125)
        self.knots = np.concatenate([[0.0], near, far])
        self._y = None
        self._lam = None
        self.abs_tol = abs_tol
        self.rel_tol = rel_tol
        self.error = 0.0

    def dy(self, t):
        """Integrand of y_a: cosh(2a) sinh(2t) / sqrt(cosh(2a)^2 cosh(2t)^2 - 1)."""
        t = np.asarray(t, dtype=float)
        a = self.a
        # C cosh(2t) - 1 = sinh^2(a+t) + sinh^2(a-t) keeps precision when a, t are small
        minus = np.sinh(a + t) ** 2 + np.sinh(a - t) ** 2
        with np.errstate(over="ignore", invalid="ignore"):
            plus = self._c * np.cosh(2 * t) + 1
            out = self._c * np.sinh(2 * t) / np.sqrt(minus * plus)
        return np.where(t > 300, 1.0, out)

    def dlam(self, t):
        """Integrand of Lambda_a, rewritten as sqrt(2) sinh(2a) / (sqrt(C cosh 2t - 1) (C cosh 2t + 1))."""
        t = np.asarray(t, dtype=float)
        a = self.a
        minus = np.sinh(a + t) ** 2 + np.sinh(a - t) ** 2
        with np.errstate(over="ignore"):
            plus = self._c * np.cosh(2 * t) + 1
        return math.sqrt(2) * self._sh / (np.sqrt(minus) * plus)

    def _fill(self):
        with self._lock:
            if self._y is not None:
                return
            y = np.zeros(self.knots.size)
            lam = np.zeros(self.knots.size)
            err = 0.0
            for i in range(1, self.knots.size):
                lo, hi = self.knots[i - 1], self.knots[i]
                ry = gk15(self.dy, lo, hi, self.abs_tol, self.rel_tol)
                rl = gk15(self.dlam, lo, hi, self.abs_tol, self.rel_tol)
                y[i] = y[i - 1] + ry.value
                lam[i] = lam[i - 1] + rl.value
                err += ry.error + rl.error
            self.error = err
            self._lam = lam
            self._y = y

    def values(self, s):
        """Return (y_a(s), Lambda_a(s)) for an array of s >= 0."""
        if self._y is None:
            self._fill()
        s = np.asarray(s, dtype=float)
        if np.any(s < 0):
            raise DomainError("catenoid arc length must be >= 0")
        sc = np.minimum(s, CATENOID_SWITCH)
        i = np.clip(np.searchsorted(self.knots, sc, side="right") - 1, 0, self.knots.size - 1)
        base = self.knots[i]
        y = self._y[i] + gauss_legendre(self.dy, base, sc)
        lam = self._lam[i] + gauss_legendre(self.dlam, base, sc)
        y = self.a + y + (s - sc)
        return y, lam


_CATENOID_CACHE: dict = {}
_CATENOID_LOCK = threading.Lock()


def _catenoid_quad(a: float) -> CatenoidQuadrature:
    with _CATENOID_LOCK:
        q = _CATENOID_CACHE.get(a)
        if q is None:
            q = _CATENOID_CACHE[a] = CatenoidQuadrature(a)
    return q


def catenoid_profile(a: float, s):
    """Profile point of the spherical catenoid with parameter ``a`` at arc length ``s``.

    Works on scalars or arrays and returns (x1, x3).
    """
    if not a > 0:
        raise DomainError("spherical catenoid needs a > 0")
    y, lam = _catenoid_quad(float(a)).values(s)
    e = np.exp(lam)
    x1, x3 = e * np.tanh(y), e / np.cosh(y)
    if np.ndim(s) == 0:
        return float(x1), float(x3)
    return x1, x3


def _catenoid_curve(a: float) -> ParamCurve:
    q = _catenoid_quad(float(a))

    def ev(t):
        y, lam = q.values(t)
        e = np.exp(lam)
        return e * np.tanh(y), e / np.cosh(y)

    def dv(t):
        y, lam = q.values(t)
        e = np.exp(lam)
        yp = q.dy(t)
        lp = q.dlam(t)
        sech = 1 / np.cosh(y)
        d1 = e * (lp * np.tanh(y) + yp * sech**2)
        d3 = e * sech * (lp - yp * np.tanh(y))
        return d1, d3

    return ParamCurve(ev, dv, 0.0, math.inf, f"spherical_catenoid(a={a:g})")


class ClothoidIntegrals:
    """F(X) = int_0^X (sin, cos)(u^m / m) du with m = n + 1.

    n = 1 uses the Fresnel integrals.  Higher orders use a cumulative table
    of 15-point Gauss-Legendre panels whose width keeps the phase change
    u^(m-1) du per panel below 1/4 (a query adds one residual panel from the
    nearest knot) up to phase :attr:`ASYMPTOTIC_PHASE`, and beyond it the
    limit minus the integration-by-parts expansion of the tail.
    """

    _PHASE_STEP = 0.25
    ASYMPTOTIC_PHASE = 500.0

    def __init__(self, n: int):
        if int(n) != n or n < 1:
            raise DomainError("clothoid order n must be a positive integer")
        self.n = int(n)
        self.m = self.n + 1
        self._lock = threading.Lock()
        self._u = np.zeros(1)
        self._S = np.zeros(1)
        self._C = np.zeros(1)

    def _sin(self, u):
        return np.sin(u**self.m / self.m)

    def _cos(self, u):
        return np.cos(u**self.m / self.m)

    def _grow(self, X: float) -> None:
        with self._lock:
            while self._u[-1] < X:
                u0 = self._u[-1]
                u1 = max(2 * u0, u0 + 1.0)
                h = min(0.125, self._PHASE_STEP / u1 ** (self.m - 1))
                knots = u0 + h * np.arange(1, int(math.ceil((u1 - u0) / h)) + 1)
                lo = np.concatenate([[u0], knots[:-1]])
                S = self._S[-1] + np.cumsum(gauss_legendre(self._sin, lo, knots))
                C = self._C[-1] + np.cumsum(gauss_legendre(self._cos, lo, knots))
                self._u = np.concatenate([self._u, knots])
                self._S = np.concatenate([self._S, S])
                self._C = np.concatenate([self._C, C])

    def __call__(self, X):
        X = np.asarray(X, dtype=float)
        if self.n == 1:
            k = math.sqrt(math.pi)
            S, C = fresnel(X / k)
            return k * S, k * C
        if np.any(X < 0):
            raise DomainError("clothoid integrals need X >= 0")
        x_asym = (self.m * self.ASYMPTOTIC_PHASE) ** (1.0 / self.m)
        near = np.minimum(X, x_asym)
        if near.size and near.max() > self._u[-1]:
            self._grow(float(near.max()))
        u, S_tab, C_tab = self._u, self._S, self._C
        i = np.clip(np.searchsorted(u, near, side="right") - 1, 0, u.size - 1)
        S = S_tab[i] + gauss_legendre(self._sin, u[i], near)
        C = C_tab[i] + gauss_legendre(self._cos, u[i], near)
        far = X > x_asym
        if np.any(far):
            S_far, C_far = self._tail_form(X[far])
            S = np.where(far, 0.0, S)
            C = np.where(far, 0.0, C)
            S[far], C[far] = S_far, C_far
        return S, C

    def _tail_form(self, X):
        # int_X^inf e^{i phi} du = e^{i phi(X)} sum_k i c_k X^(p_k + 1 - m),
        # with c_0 = 1, p_0 = 0 and c <- i c (p + 1 - m), p <- p - m
        m = self.m
        tail = np.zeros(X.shape, dtype=complex)
        c, p = 1.0 + 0j, 0.0
        for _ in range(16):
            term = 1j * c * X ** (p + 1 - m)
            tail += term
            if np.max(np.abs(term)) < 1e-18:
                break
            c, p = 1j * c * (p + 1 - m), p - m
        tail *= np.exp(1j * (X**m / m))
        S_inf, C_inf = self.limit()
        return S_inf - tail.imag, C_inf - tail.real

    def limit(self) -> tuple:
        """F(infinity) = m^(1/m - 1) Gamma(1/m) (sin, cos)(pi / 2m)."""
        m = self.m
        r = m ** (1.0 / m - 1) * math.gamma(1.0 / m)
        return r * math.sin(math.pi / (2 * m)), r * math.cos(math.pi / (2 * m))


def clothoid_s_max(n: int, phase_budget: float = 2e4) -> float:
    """Default horizon of the outer clothoid end of order ``n``.

    The profile turns through u^m/m radians by Euclidean parameter u, and
    the hyperbolic arc length is roughly u / F_cos(infinity).  Order 1 keeps
    the common catalog cap; higher orders stop once the phase budget is spent.
    """
    m = n + 1
    u = (m * phase_budget) ** (1.0 / m)
    return min(130.0, u / ClothoidIntegrals(n).limit()[1])


def _clothoid_curve(a: float, n: int, end: str) -> ParamCurve:
    F = ClothoidIntegrals(n)
    m = n + 1
    sign = 1.0 if end == "outer" else -1.0

    def ev(t):
        u = np.exp(sign * np.asarray(t, dtype=float))
        S, C = F(u)
        return a * S, a * C

    def dv(t):
        u = np.exp(sign * np.asarray(t, dtype=float))
        phi = u**m / m
        return sign * a * u * np.sin(phi), sign * a * u * np.cos(phi)

    def d2(t):
        u = np.exp(sign * np.asarray(t, dtype=float))
        phi = u**m / m
        # d/dt [u sin phi] = sign * (u sin phi + u^{m+1} cos phi)
        return (a * (u * np.sin(phi) + u ** (m + 1) * np.cos(phi)),
                a * (u * np.cos(phi) - u ** (m + 1) * np.sin(phi)))

    return ParamCurve(ev, dv, 0.0, math.inf, f"clothoid(a={a:g}, n={n}, {end})", d2)


def _const(x, t):
    return np.full(np.shape(t), float(x))


def _oscillator_curve(R: float, a: float, label: str) -> ParamCurve:
    k = R - a

    def ev(t):
        t = np.asarray(t, dtype=float)
        q = t * t + 1
        return k * t * t / q + a, np.sin(k * t**3 / q + a * t)

    def dv(t):
        t = np.asarray(t, dtype=float)
        q = t * t + 1
        phi = k * t**3 / q + a * t
        dphi = k * (t**4 + 3 * t * t) / q**2 + a
        return 2 * k * t / q**2, np.cos(phi) * dphi

    def d2(t):
        t = np.asarray(t, dtype=float)
        q = t * t + 1
        phi = k * t**3 / q + a * t
        dphi = k * (t**4 + 3 * t * t) / q**2 + a
        # d/dt (t^4 + 3t^2)/(t^2+1)^2 = (4t^3 + 6t)/q^2 - 4t(t^4 + 3t^2)/q^3
        ddphi = k * ((4 * t**3 + 6 * t) / q**2 - 4 * t * (t**4 + 3 * t * t) / q**3)
        d2x1 = 2 * k * (1 - 3 * t * t) / q**3
        d2x3 = -np.sin(phi) * dphi**2 + np.cos(phi) * ddphi
        return d2x1, d2x3

    return ParamCurve(ev, dv, 0.0, math.inf, label, d2)


# name -> (defaults, default s_max)
ENTRIES: Mapping[str, tuple] = {
    "plane_end": ({"rho": 1.0}, 2.2e6),
    "bounded_oscillator": ({"R": 1.0, "a": 0.1}, 130.0),
    "sphere_end": ({"R": 1.0, "a": 0.1}, 130.0),
    "c_cone": ({"c": 1.0}, 130.0),
    "horosphere": ({"z": 1.0}, 2.2e6),
    "cylinder_upper": ({"b": 2.0, "c": 1.0}, 130.0),
    "cylinder_lower": ({"b": 2.0, "c": 1.0}, 130.0),
    "spherical_catenoid": ({"a": 0.5}, 130.0),
    "clothoid": ({"a": 1.0, "n": 1, "end": "outer"}, 130.0),
}

CATALOG_NAMES = tuple(ENTRIES)


def _positive(params, *names):
    for k in names:
        if not float(params[k]) > 0:
            raise DomainError(f"parameter {k} must be > 0 (got {params[k]!r})")


def catalog(name: str, params: Optional[Mapping[str, object]] = None,
            s_max: Optional[float] = None, tol: float = 1e-10) -> EndSpec:
    """Build the catalog end ``name`` with ``params`` overriding the defaults."""
    if name not in ENTRIES:
        raise DomainError(f"unknown catalog entry {name!r}; known: {', '.join(CATALOG_NAMES)}")
    defaults, default_smax = ENTRIES[name]
    unknown = set(params or {}) - set(defaults)
    if unknown:
        raise DomainError(f"unknown parameter(s) for {name}: {', '.join(sorted(unknown))}")
    p = dict(defaults)
    p.update(params or {})
    s_max_arg = s_max
    s_max = default_smax if s_max is None else float(s_max)
    one = np.ones_like
    zero = np.zeros_like

    if name == "plane_end":
        _positive(p, "rho")
        rho = float(p["rho"])
        curve = ParamCurve(lambda t: (rho + t, zero(t)), lambda t: (one(t), zero(t)),
                           label=f"plane_end(rho={rho:g})", deriv2=lambda t: (zero(t), zero(t)))
        kappa, expected = Kappa.EUCLIDEAN, {"parabolic": [PARABOLIC]}
    elif name in ("bounded_oscillator", "sphere_end"):
        _positive(p, "R", "a")
        R, a = float(p["R"]), float(p["a"])
        if not R > a:
            raise DomainError("bounded oscillator needs R > a")
        curve = _oscillator_curve(R, a, f"{name}(R={R:g}, a={a:g})")
        kappa = Kappa.EUCLIDEAN if name == "bounded_oscillator" else Kappa.SPHERICAL
        expected = {"parabolic": [PARABOLIC]}
    elif name == "c_cone":
        _positive(p, "c")
        c = float(p["c"])
        curve = ParamCurve(lambda t: (t, c * t), lambda t: (one(t), _const(c, t)), 1.0,
                           label=f"c_cone(c={c:g})", deriv2=lambda t: (zero(t), zero(t)))
        kappa, expected = Kappa.HYPERBOLIC, {"parabolic": [PARABOLIC]}
    elif name == "horosphere":
        _positive(p, "z")
        z = float(p["z"])
        curve = ParamCurve(lambda t: (z * t + 1, _const(z, t)), lambda t: (_const(z, t), zero(t)),
                           label=f"horosphere(z={z:g})", deriv2=lambda t: (zero(t), zero(t)))
        kappa, expected = Kappa.HYPERBOLIC, {"parabolic": [PARABOLIC]}
    elif name in ("cylinder_upper", "cylinder_lower"):
        _positive(p, "b", "c")
        b, c = float(p["b"]), float(p["c"])
        sg = 1.0 if name == "cylinder_upper" else -1.0
        curve = ParamCurve(lambda t: (_const(b, t), c * np.exp(sg * t)),
                           lambda t: (zero(t), sg * c * np.exp(sg * t)),
                           label=f"{name}(b={b:g}, c={c:g})",
                           deriv2=lambda t: (zero(t), c * np.exp(sg * t)))
        kappa = Kappa.HYPERBOLIC
        expected = {"parabolic": [PARABOLIC if sg > 0 else NON_PARABOLIC]}
    elif name == "spherical_catenoid":
        _positive(p, "a")
        curve = _catenoid_curve(float(p["a"]))
        kappa, expected = Kappa.HYPERBOLIC, {"parabolic": [NON_PARABOLIC]}
    else:
        _positive(p, "a", "n")
        end = str(p["end"])
        if end not in ("outer", "inner"):
            raise DomainError("clothoid end must be 'outer' or 'inner'")
        n = float(p["n"])
        if n != int(n):
            raise DomainError("clothoid order n must be an integer")
        p["n"] = int(n)
        curve = _clothoid_curve(float(p["a"]), int(n), end)
        if s_max_arg is None and end == "outer":
            s_max = clothoid_s_max(int(n))
        kappa = Kappa.HYPERBOLIC
        # numerical evidence only; Inconclusive is acceptable
        expected = {"parabolic": [PARABOLIC, INCONCLUSIVE], "soft": True}
    arc = arc_reparam(curve, kappa, s_max, tol)
    return EndSpec(arc, kappa, name, expected, p)
