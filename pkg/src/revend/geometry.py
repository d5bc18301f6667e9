"""Conformal models of the 3-dimensional space forms and profile curves.

A profile curve lives in the (x1, x3) half-plane of one of three conformal
models of R^3, S^3 or H^3.  Rotating it about the x3-axis produces an end of
revolution; everything downstream works with its arc-length
reparametrization, :class:`ArcCurve`.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from .errors import DomainError, ReparamError

_GL_X, _GL_W = np.polynomial.legendre.leggauss(15)


class Kappa(enum.IntEnum):
    HYPERBOLIC = -1
    EUCLIDEAN = 0
    SPHERICAL = 1

    @classmethod
    def parse(cls, value) -> "Kappa":
        if isinstance(value, Kappa):
            return value
        try:
            return cls(int(value))
        except (TypeError, ValueError):
            raise DomainError(f"kappa must be one of -1, 0, 1 (got {value!r})") from None


def _eta(kappa: Kappa, x1, x3):
    x1 = np.asarray(x1, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    if kappa == Kappa.HYPERBOLIC:
        if np.any(x3 <= 0):
            raise DomainError("hyperbolic model requires x3 > 0")
        return 1.0 / x3**2
    if kappa == Kappa.EUCLIDEAN:
        return np.ones(np.broadcast(x1, x3).shape)
    return 4.0 / (1.0 + x1**2 + x3**2) ** 2


def metric_factor(kappa, p) -> float:
    """Conformal factor eta_kappa at the profile point ``p = (x1, x3)``."""
    kappa = Kappa.parse(kappa)
    return float(_eta(kappa, p[0], p[1]))


def _sqrt_eta(kappa: Kappa, x1, x3):
    # sqrt(eta) computed directly to avoid squaring tiny or huge x3.
    x1 = np.asarray(x1, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    if kappa == Kappa.HYPERBOLIC:
        if np.any(x3 <= 0):
            raise DomainError("hyperbolic model requires x3 > 0")
        return 1.0 / x3
    if kappa == Kappa.EUCLIDEAN:
        return np.ones(np.broadcast(x1, x3).shape)
    return 2.0 / (1.0 + x1**2 + x3**2)


def tangent_norm(kappa, p, v) -> float:
    """Length of the model-coordinate vector ``v`` at ``p`` in the metric g_kappa."""
    kappa = Kappa.parse(kappa)
    return float(_sqrt_eta(kappa, p[0], p[1]) * math.hypot(v[0], v[1]))


@dataclass(frozen=True)
class ParamCurve:
    """A regular profile curve t -> (x1(t), x3(t)) on [t0, t_end).

    ``eval``, ``deriv`` and the optional ``deriv2`` take a float array and
    return a pair of arrays.
    """

    eval: Callable
    deriv: Callable
    t0: float = 0.0
    t_end: float = math.inf
    label: str = ""
    deriv2: Optional[Callable] = None

    def second_derivative(self, t):
        if self.deriv2 is not None:
            return self.deriv2(t)
        t = np.asarray(t, dtype=float)
        h = 1e-5 * np.maximum(1.0, np.abs(t))
        p1, q1 = self.deriv(t + h)
        p0, q0 = self.deriv(t - h)
        ph1, qh1 = self.deriv(t + h / 2)
        ph0, qh0 = self.deriv(t - h / 2)
        d1 = ((p1 - p0) / (2 * h), (q1 - q0) / (2 * h))
        d2 = ((ph1 - ph0) / h, (qh1 - qh0) / h)
        return ((4 * d2[0] - d1[0]) / 3, (4 * d2[1] - d1[1]) / 3)


def _hermite(xk, yk, dk, x):
    x = np.asarray(x, dtype=float)
    i = np.clip(np.searchsorted(xk, x, side="right") - 1, 0, len(xk) - 2)
    x0, x1 = xk[i], xk[i + 1]
    h = x1 - x0
    u = (x - x0) / h
    h00 = (1 + 2 * u) * (1 - u) ** 2
    h10 = u * (1 - u) ** 2
    h01 = u * u * (3 - 2 * u)
    h11 = u * u * (u - 1)
    return h00 * yk[i] + h10 * h * dk[i] + h01 * yk[i + 1] + h11 * h * dk[i + 1]


def _curve_speed(curve: ParamCurve, kappa: Kappa, t):
    x1, x3 = curve.eval(t)
    x1 = np.asarray(x1, dtype=float)
    x3 = np.asarray(x3, dtype=float)
    if not (np.all(np.isfinite(x1)) and np.all(np.isfinite(x3))):
        raise DomainError(f"curve {curve.label!r} is not finite on the requested range")
    if np.any(x1 <= 0):
        raise DomainError(f"curve {curve.label!r} meets the rotation axis (x1 <= 0)")
    if kappa == Kappa.HYPERBOLIC and np.any(x3 <= 0):
        raise DomainError(f"curve {curve.label!r} leaves the half-space (x3 <= 0)")
    d1, d3 = curve.deriv(t)
    v = _sqrt_eta(kappa, x1, x3) * np.hypot(d1, d3)
    if not np.all(np.isfinite(v)):
        raise DomainError(f"curve {curve.label!r} has a non-finite derivative")
    return v


@dataclass(frozen=True)
class ArcCurve:
    """Arc-length reparametrization of a :class:`ParamCurve` in the g_kappa metric.

    ``t_knots``, ``s_knots`` and ``v_knots`` (speed dt -> ds) are the cached
    samples; between knots both directions use cubic Hermite interpolation
    with the exact derivatives, which is monotone on every accepted panel.
    """

    base: ParamCurve
    kappa: Kappa
    s_max: float
    tol: float
    t_knots: np.ndarray = field(repr=False)
    s_knots: np.ndarray = field(repr=False)
    v_knots: np.ndarray = field(repr=False)

    def _check_s(self, s):
        s = np.asarray(s, dtype=float)
        if np.any(s < -1e-12) or np.any(s > self.s_knots[-1]):
            raise DomainError(f"arc length outside [0, {self.s_knots[-1]:.6g}] for {self.base.label!r}")
        return np.clip(s, 0.0, None)

    def t_of_s(self, s):
        s = self._check_s(s)
        return _hermite(self.s_knots, self.t_knots, 1.0 / self.v_knots, s)

    def s_of_t(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.t_knots[0]) or np.any(t > self.t_knots[-1]):
            raise DomainError("parameter outside the reparametrized range")
        return _hermite(self.t_knots, self.s_knots, self.v_knots, t)

    def point(self, s):
        """Profile point (x1, x3) at arc length ``s``."""
        x1, x3 = self.base.eval(self.t_of_s(s))
        return np.asarray(x1, dtype=float), np.asarray(x3, dtype=float)

    def velocity(self, s):
        """Model-coordinate derivative (dx1/ds, dx3/ds)."""
        t = self.t_of_s(s)
        d1, d3 = self.base.deriv(t)
        v = _curve_speed(self.base, self.kappa, t)
        return np.asarray(d1) / v, np.asarray(d3) / v

    def speed(self, s):
        """g_kappa length of :meth:`velocity`; 1 up to interpolation error."""
        x1, x3 = self.point(s)
        d1, d3 = self.velocity(s)
        return _sqrt_eta(self.kappa, x1, x3) * np.hypot(d1, d3)

    def sample_s(self, s_hi: float, n: int = 2000) -> np.ndarray:
        """Knot arc lengths up to ``s_hi`` merged with an even grid."""
        s_hi = min(s_hi, self.s_max)
        knots = self.s_knots[self.s_knots <= s_hi]
        return np.unique(np.concatenate([knots, np.linspace(0.0, s_hi, n)]))


def _speed_masked(curve: ParamCurve, kappa: Kappa, t):
    """Speed at ``t`` plus a mask of the points that are inside the model."""
    with np.errstate(all="ignore"):
        x1, x3 = curve.eval(t)
        x1 = np.asarray(x1, dtype=float) * np.ones_like(t)
        x3 = np.asarray(x3, dtype=float) * np.ones_like(t)
        d1, d3 = curve.deriv(t)
        ok = np.isfinite(x1) & np.isfinite(x3) & (x1 > 0)
        if kappa == Kappa.HYPERBOLIC:
            ok &= x3 > 0
            scale = 1.0 / np.where(ok, x3, 1.0)
        elif kappa == Kappa.EUCLIDEAN:
            scale = 1.0
        else:
            scale = 2.0 / (1.0 + x1**2 + x3**2)
        v = scale * np.hypot(d1, d3)
    ok &= np.isfinite(v)
    return np.where(ok, v, np.nan), ok


def _hermite_unit(y1, d0, d1, u):
    # Hermite interpolant on [0, 1] with y(0) = 0, y(1) = y1, slopes d0, d1.
    return (u * (1 - u) ** 2) * d0 + (u * u * (3 - 2 * u)) * y1 + (u * u * (u - 1)) * d1


_BATCH = 32


def arc_reparam(curve: ParamCurve, kappa, s_max: float, tol: float = 1e-10) -> ArcCurve:
    """Reparametrize ``curve`` by g_kappa arc length on [0, s_max].

    Marches in t with batches of equal panels.  A panel is accepted when its
    Gauss-Legendre length agrees with the sum over its halves and the cubic
    Hermite interpolants in both directions (s of t, t of s) reproduce the
    true arc length at interior check points to within ``tol``.
    """
    kappa = Kappa.parse(kappa)
    if not s_max > 0 or not tol > 0:
        raise ValueError("s_max and tol must be positive")
    t = float(curve.t0)
    t_end = float(curve.t_end)
    v0, ok0 = _speed_masked(curve, kappa, np.array([t]))
    if not ok0[0]:
        raise DomainError(f"curve {curve.label!r} starts outside the model (or on the axis)")
    v = float(v0[0])
    if not v > 1e-300:
        raise ReparamError("speed underflows at the start of the curve")
    ts, ss, vs = [t], [0.0], [v]
    s = 0.0
    h = 1e-3 * max(1.0, abs(t))
    floor = 4 * np.finfo(float).eps
    k = np.arange(_BATCH)
    left_model = False
    while s < s_max:
        room = t_end - t
        if room <= 8 * floor * max(1.0, abs(t)):
            raise ReparamError(f"curve {curve.label!r} has length {s:.6g} < {s_max} on its domain")
        if h <= floor * max(1.0, abs(t)):
            if left_model:
                raise ReparamError(f"curve {curve.label!r} leaves the model (axis or boundary) near t={t:.6g}")
            raise ReparamError(f"step underflow at t={t:.6g}; speed varies too fast")
        n = _BATCH
        if _BATCH * h >= room:
            h = min(h, 0.5 * room)
            n = max(1, min(_BATCH, int(0.5 * room / h)))
        a = t + h * k[:n]
        b = a + h
        # nodes: left half, right half, whole, first quarter; then q, m, b points
        left = (a + 0.25 * h)[:, None] + 0.25 * h * _GL_X
        right = (a + 0.75 * h)[:, None] + 0.25 * h * _GL_X
        whole = (a + 0.5 * h)[:, None] + 0.5 * h * _GL_X
        firstq = (a + 0.125 * h)[:, None] + 0.125 * h * _GL_X
        extra = np.stack([a + 0.25 * h, a + 0.5 * h, b], axis=1)
        pts = np.concatenate([left, right, whole, firstq, extra], axis=1)
        vals, ok = _speed_masked(curve, kappa, pts.ravel())
        vals = vals.reshape(pts.shape)
        ok = ok.reshape(pts.shape).all(axis=1)
        with np.errstate(all="ignore"):
            s_left = 0.25 * h * (vals[:, :15] @ _GL_W)
            ds = s_left + 0.25 * h * (vals[:, 15:30] @ _GL_W)
            ds_whole = 0.5 * h * (vals[:, 30:45] @ _GL_W)
            s_q = 0.125 * h * (vals[:, 45:60] @ _GL_W)
            v_m = vals[:, 61]
            v_b = vals[:, 62]
            v_a = np.concatenate([[v], v_b[:-1]])
            err_len = np.abs(ds - ds_whole)
            # s(t) Hermite on unit interval, slopes scaled by h
            err_fwd = np.maximum(np.abs(_hermite_unit(ds, v_a * h, v_b * h, 0.5) - s_left),
                                 np.abs(_hermite_unit(ds, v_a * h, v_b * h, 0.25) - s_q))
            # t(s) Hermite; error converted back to arc length
            u = s_left / ds
            t_pred = _hermite_unit(h, ds / v_a, ds / v_b, u)
            err_inv = np.abs(t_pred - 0.5 * h) * v_m
            alpha = v_a * h / ds
            beta = v_b * h / ds
            mono = (alpha**2 + beta**2 <= 9.0) & (alpha**-2 + beta**-2 <= 9.0)
            err = np.maximum(err_fwd, err_inv)
            good = ok & mono & (err <= tol) & (err_len <= np.maximum(1e-2 * tol, 1e-14 * ds))
            good &= v_b > 1e-300
        bad = np.flatnonzero(~good)
        m = n if bad.size == 0 else int(bad[0])
        left_model = bad.size > 0 and not ok[bad[0]]
        if m:
            cum = s + np.cumsum(ds[:m])
            reach = np.flatnonzero(cum >= s_max)
            if reach.size:
                m = int(reach[0]) + 1
            ts.extend(b[:m].tolist())
            ss.extend(cum[:m].tolist())
            vs.extend(v_b[:m].tolist())
            t, s, v = float(b[m - 1]), float(cum[m - 1]), float(v_b[m - 1])
        if bad.size == 0:
            if err.max() < tol / 32 and err_len.max() < 1e-3 * tol:
                h *= 4.0
            elif err.max() < tol / 4:
                h *= 1.5
        elif m == 0:
            h *= 0.5
        else:
            h *= 0.7
    return ArcCurve(curve, kappa, float(s_max), float(tol),
                    np.array(ts), np.array(ss), np.array(vs))


@dataclass(frozen=True)
class EndSpec:
    curve: ArcCurve
    kappa: Kappa
    name: str
    expected: Optional[Mapping[str, object]] = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.curve.kappa != self.kappa:
            raise DomainError("EndSpec kappa does not match its curve")


def euclid_mean_curvature(curve: ArcCurve) -> Callable:
    """Mean curvature s -> H(s) of a Euclidean surface of revolution.

    H = (k + x3'/x1) / 2 where k is the signed curvature of the unit-speed
    profile and x3' its vertical velocity.
    """
    if curve.kappa != Kappa.EUCLIDEAN:
        raise DomainError("euclid_mean_curvature needs a Euclidean (kappa = 0) curve")
    base = curve.base

    def H(s):
        t = curve.t_of_s(s)
        x1, _ = base.eval(t)
        d1, d3 = base.deriv(t)
        e1, e3 = base.second_derivative(t)
        speed = np.hypot(d1, d3)
        k = (d1 * e3 - d3 * e1) / speed**3
        return 0.5 * (k + d3 / (speed * x1))

    return H


@dataclass(frozen=True)
class Mesh:
    vertices: np.ndarray
    faces: np.ndarray
    attributes: Mapping[str, np.ndarray] = field(default_factory=dict)


def mesh(end: EndSpec, s_max: float, n_s: int, n_theta: int,
         attributes: Optional[Mapping[str, Callable]] = None) -> Mesh:
    """Triangulate f(s, theta) = (x1 cos theta, x1 sin theta, x3) on [0, s_max] x S^1.

    Vertex (i, j) has index ``i * n_theta + j``; each quad is split along its
    (i, j)-(i+1, j+1) diagonal.  ``attributes`` maps names to functions of s
    evaluated once per ring.
    """
    if n_s < 2 or n_theta < 3:
        raise ValueError("mesh needs n_s >= 2 and n_theta >= 3")
    if not 0 < s_max <= end.curve.s_max:
        raise ValueError(f"s_max must lie in (0, {end.curve.s_max}]")
    s = np.linspace(0.0, s_max, n_s)
    x1, x3 = end.curve.point(s)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    verts = np.empty((n_s, n_theta, 3))
    verts[..., 0] = x1[:, None] * np.cos(theta)[None, :]
    verts[..., 1] = x1[:, None] * np.sin(theta)[None, :]
    verts[..., 2] = x3[:, None]
    i, j = np.meshgrid(np.arange(n_s - 1), np.arange(n_theta), indexing="ij")
    a = i * n_theta + j
    b = i * n_theta + (j + 1) % n_theta
    c = (i + 1) * n_theta + (j + 1) % n_theta
    d = (i + 1) * n_theta + j
    faces = np.concatenate([np.stack([a, b, c], -1).reshape(-1, 3),
                            np.stack([a, c, d], -1).reshape(-1, 3)])
    attrs = {}
    for name, fn in (attributes or {}).items():
        ring = np.asarray(fn(s), dtype=float) * np.ones(n_s)
        attrs[name] = np.repeat(ring, n_theta)
    return Mesh(verts.reshape(-1, 3), faces, attrs)


def write_obj(m: Mesh, path) -> None:
    """Write ``m`` as a Wavefront OBJ; attributes go in ``#@`` comment records."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"# revend mesh: {len(m.vertices)} vertices, {len(m.faces)} triangles\n")
        for x, y, z in m.vertices.tolist():
            fh.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b, c in (m.faces + 1).tolist():
            fh.write(f"f {a} {b} {c}\n")
        for name, values in m.attributes.items():
            fh.write(f"#@ attribute {name}\n")
            for val in values:
                fh.write(f"#@ {float(val)!r}\n")


def read_obj(path) -> Mesh:
    verts, faces, attrs = [], [], {}
    current = None
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            parts = line.split()
            if not parts:
                continue
            if parts[0] == "v":
                verts.append([float(p) for p in parts[1:4]])
            elif parts[0] == "f":
                faces.append([int(p.split("/")[0]) - 1 for p in parts[1:4]])
            elif parts[0] == "#@" and len(parts) == 3 and parts[1] == "attribute":
                current = parts[2]
                attrs[current] = []
            elif parts[0] == "#@" and current is not None:
                attrs[current].append(float(parts[1]))
    return Mesh(np.array(verts, dtype=float), np.array(faces, dtype=int),
                {k: np.array(v) for k, v in attrs.items()})
