"""Radial diffusion on ds^2 + w(s)^2 dtheta^2 and its hitting probabilities.

The radial part of Brownian motion with generator Delta = d^2/dr^2 + (w'/w) d/dr
solves dX = b(X) dt + sqrt(2) dB with b = w'/w.  Hitting probabilities of
[rho, R] from x0 are given exactly by the scale function S(x) = int dt / w;
:func:`simulate_hitting` estimates the same numbers by Euler-Maruyama.

Random numbers come from a stateless hash of (seed, path, step, slot), so a
path's trajectory does not depend on how paths are split among workers.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .divergence import DivergenceVerdict, Kind
from .errors import DomainError
from .quadrature import gk15
from .warp import WarpFn

CHUNK = 65536
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_STEP_MUL = np.uint64(0xD1B54A32D192ED03)
_S30, _S27, _S31, _S11, _S32 = (np.uint64(k) for k in (30, 27, 31, 11, 32))
_LOW32 = np.uint64(0xFFFFFFFF)
_TO_UNIT32 = 1.0 / 4294967296.0
_TO_UNIT = 1.0 / 9007199254740992.0  # 2**-53


def _mix64(z: np.ndarray) -> np.ndarray:
    """splitmix64 finalizer (wrapping uint64 arithmetic)."""
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def path_keys(seed: int, paths: np.ndarray) -> np.ndarray:
    base = _mix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))
    return _mix64(base ^ (paths.astype(np.uint64) * _GOLDEN))


def uniforms(keys: np.ndarray, counter: int) -> np.ndarray:
    """Uniform variates in (0, 1) for each key at a given counter value."""
    with np.errstate(over="ignore"):
        h = _mix64(keys ^ (np.uint64(counter) * _STEP_MUL))
    return ((h >> _S11).astype(np.float64) + 0.5) * _TO_UNIT


@dataclass(frozen=True)
class DiffusionCfg:
    step: float = 1e-4
    n_paths: int = 10_000
    seed: int = 0
    t_max: float = 100.0
    r_explode: float = math.inf
    workers: int = 1

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be positive")
        if self.n_paths < 1:
            raise ValueError("n_paths must be at least 1")
        if not self.t_max > 0 or not self.r_explode > 0:
            raise ValueError("t_max and r_explode must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class HitStats:
    """Outcome of a hitting simulation.

    ``mean_exit_time`` is measured in the time of the generator Delta (not
    Delta/2); hitting probabilities do not depend on that convention.
    """

    p_hit_inner: float
    se_inner: float
    p_hit_outer: float
    se_outer: float
    n_undecided: int
    n_paths: int
    mean_exit_time: float
    se_exit_time: float

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def radial_drift(w: WarpFn):
    """b(r) = w'(r)/w(r)."""
    def b(r):
        r = np.asarray(r, dtype=float)
        return np.asarray(w.dw(r), dtype=float) / np.asarray(w.w(r), dtype=float)
    return b


def _scale(w: WarpFn, a: float, b: float) -> float:
    if b <= a:
        return 0.0

    def inv(t):
        wt = np.asarray(w.w(t), dtype=float)
        if np.any(wt <= 0):
            bad = t[np.flatnonzero(wt <= 0)[0]]
            raise DomainError(f"warp is not positive at r={bad:.6g}")
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            return 1.0 / wt

    return gk15(inv, a, b, abs_tol=1e-13, rel_tol=1e-11, initial_panels=4).value


def _check_interval(rho, R, x0):
    if not (0 <= rho <= x0 <= R) or not rho < R:
        raise DomainError(f"need 0 <= rho <= x0 <= R and rho < R, got rho={rho}, x0={x0}, R={R}")


def exact_hitting(w: WarpFn, rho: float, R: float, x0: float) -> Tuple[float, float]:
    """(p_hit_inner, p_hit_outer) from the scale function."""
    _check_interval(rho, R, x0)
    if R > w.s_max:
        raise DomainError(f"R={R} beyond the warp domain (s_max={w.s_max})")
    inner_to_x0 = _scale(w, rho, x0)
    x0_to_outer = _scale(w, x0, R)
    total = inner_to_x0 + x0_to_outer
    p_in = x0_to_outer / total
    return p_in, 1.0 - p_in


def _normals(keys: np.ndarray, pair: int) -> Tuple[np.ndarray, np.ndarray]:
    """Two standard normals per key (Box-Muller on one 64-bit hash)."""
    with np.errstate(over="ignore"):
        h = _mix64(keys ^ (np.uint64(2 * pair) * _STEP_MUL))
    u1 = ((h >> _S32).view(np.int64).astype(np.float64) + 0.5) * _TO_UNIT32
    u2 = (h & _LOW32).view(np.int64).astype(np.float64) * _TO_UNIT32
    r = np.sqrt(-2.0 * np.log(u1))
    # cos and sin of the angle 2*pi*u2 via the tangent of its half,
    # which is much cheaper than a full-range cos/sin pair
    t = np.tan(np.pi * (u2 - 0.5))
    d = r / (1.0 + t * t)
    return (1.0 - t * t) * d, 2.0 * t * d


def _bridge_uniform(keys: np.ndarray, step: int) -> np.ndarray:
    return uniforms(keys, 2 * (step // 2) + 1 + (step % 2) * (1 << 62))


# crossing probabilities below e^-40 are ignored
_BRIDGE_CUT = 40.0


def _run_chunk(args):
    w, b, rho, R, x0, cfg, start, stop = args
    n = stop - start
    outcome = np.zeros(n, dtype=np.int8)  # 0 undecided, 1 inner, 2 outer
    exit_t = np.full(n, np.nan)
    if x0 <= rho or x0 >= R:
        outcome[:] = 1 if x0 <= rho else 2
        exit_t[:] = 0.0
        return start, outcome, exit_t
    dt = cfg.step
    sig = math.sqrt(2.0 * dt)
    cut = _BRIDGE_CUT * dt
    n_steps = int(math.ceil(cfg.t_max / dt))
    lane = np.arange(n)
    keys = path_keys(cfg.seed, lane + start)
    x = np.full(n, float(x0))
    alive = np.ones(n, dtype=bool)
    n_dead = 0
    z_next = None
    finite_r = math.isfinite(R)
    for k in range(n_steps):
        if k % 2 == 0:
            z, z_next = _normals(keys, k // 2)
        else:
            z = z_next
        xn = b(x) * dt
        xn += x
        xn += sig * z
        # (x - a)(xn - a) is negative after a crossing and small when the
        # Brownian bridge between x and xn may have touched the barrier a
        prod = (x - rho) * (xn - rho)
        if finite_r:
            np.minimum(prod, (R - x) * (R - xn), out=prod)
        flag = prod < cut
        if flag.any():
            j = np.flatnonzero(flag)
            # absorbed lanes awaiting compaction are parked back at x0
            xn[j[~alive[j]]] = x0
            j = j[alive[j]]
            xj, xnj = x[j], xn[j]
            u = _bridge_uniform(keys[j], k)
            a_in = (xj - rho) * (xnj - rho)
            p_in = np.where(a_in <= 0, 1.0, np.exp(-np.maximum(a_in, 0) / dt))
            hit_in = u < p_in
            if finite_r:
                a_out = (R - xj) * (R - xnj)
                p_out = np.where(a_out <= 0, 1.0, np.exp(-np.maximum(a_out, 0) / dt))
                crossed_in = a_in <= 0
                crossed_out = a_out <= 0
                hit_in = np.where(crossed_in, True, np.where(crossed_out, False, hit_in))
                hit_out = ~hit_in & (crossed_out | (u < p_in + p_out))
            else:
                hit_out = np.zeros_like(hit_in)
            done = hit_in | hit_out
            if done.any():
                jd = j[done]
                outcome[lane[jd]] = np.where(hit_in[done], 1, 2)
                exit_t[lane[jd]] = (k + 1) * dt
                alive[jd] = False
                n_dead += jd.size
                if n_dead == alive.size:
                    break
                if 8 * n_dead >= alive.size:
                    keep = alive
                    lane, keys, xn = lane[keep], keys[keep], xn[keep]
                    if k % 2 == 0:
                        z_next = z_next[keep]
                    alive = np.ones(lane.size, dtype=bool)
                    n_dead = 0
                else:
                    xn[jd] = x0
        x = xn
    return start, outcome, exit_t


def _threads(requested: int) -> int:
    env = os.environ.get("REVEND_THREADS")
    if env:
        try:
            return max(1, min(requested, int(env)))
        except ValueError:
            pass
    return requested


def simulate_hitting(w: WarpFn, rho: float, R: float, x0: float, cfg: DiffusionCfg) -> HitStats:
    """Euler-Maruyama estimate of the hitting probabilities of rho and R."""
    _check_interval(rho, R, x0)
    outer = min(R, cfg.r_explode)
    if outer > w.s_max:
        raise DomainError(f"R={outer} beyond the warp domain (s_max={w.s_max})")
    b = radial_drift(w)
    jobs = [(w, b, rho, outer, x0, cfg, s, min(s + CHUNK, cfg.n_paths))
            for s in range(0, cfg.n_paths, CHUNK)]
    outcome = np.zeros(cfg.n_paths, dtype=np.int8)
    exit_t = np.full(cfg.n_paths, np.nan)
    workers = _threads(cfg.workers)
    if workers == 1 or len(jobs) == 1:
        results = map(_run_chunk, jobs)
    else:
        pool = ThreadPoolExecutor(max_workers=workers)
        results = pool.map(_run_chunk, jobs)
    for start, oc, et in results:
        outcome[start:start + oc.size] = oc
        exit_t[start:start + et.size] = et
    if workers != 1 and len(jobs) != 1:
        pool.shutdown()
    n = cfg.n_paths
    n_in = int(np.count_nonzero(outcome == 1))
    n_out = int(np.count_nonzero(outcome == 2))
    p_in, p_out = n_in / n, n_out / n
    decided = exit_t[outcome != 0]
    if decided.size:
        mean_t = float(np.sum(decided) / decided.size)
        se_t = float(np.std(decided, ddof=1) / math.sqrt(decided.size)) if decided.size > 1 else 0.0
    else:
        mean_t, se_t = math.nan, math.nan
    return HitStats(p_in, math.sqrt(p_in * (1 - p_in) / n), p_out, math.sqrt(p_out * (1 - p_out) / n),
                    n - n_in - n_out, n, mean_t, se_t)


@dataclass
class EscapeTrend:
    radii: List[float]
    p_outer: List[float]
    trend: str  # "to_zero", "positive" or "undecided"
    limit: Optional[float]
    parabolicity: Optional[str] = None
    consistent: Optional[bool] = None
    notes: List[str] = field(default_factory=list)


def escape_probe(w: WarpFn, rho: float, x0: float, parabolicity: Optional[DivergenceVerdict] = None,
                 max_levels: int = 30) -> EscapeTrend:
    """Exact escape probabilities to R = x0 * 2^k and their limit as R grows.

    The limit is read off the scale increments d_k = S(R_k) - S(R_{k-1}):
    non-shrinking increments mean S(R) is unbounded and the escape
    probability tends to 0; geometrically shrinking ones give a finite S and
    a positive limit.
    """
    _check_interval(rho, x0 * 2, x0)
    if not x0 > rho:
        raise DomainError("x0 must exceed rho")
    radii = []
    R = x0
    while len(radii) < max_levels and R * 2 <= w.s_max:
        R *= 2
        radii.append(R)
    if len(radii) < 3:
        raise DomainError("warp domain too short for an escape probe")
    s_x0 = _scale(w, rho, x0)
    S = [s_x0]
    for R in radii:
        S.append(S[-1] + _scale(w, R / 2, R))
    S = np.array(S)
    p_out = list(s_x0 / S[1:])
    d = np.diff(S)
    limit: Optional[float]
    if d[-1] <= 1e-12 * S[-1]:
        trend, limit = "positive", s_x0 / S[-1]
    else:
        q = d[-3:][1:] / d[-3:][:-1]
        if np.all(q >= 0.9):
            trend, limit = "to_zero", 0.0
        elif np.all(q < 0.9) and abs(q[1] - q[0]) <= 0.1 * q[0]:
            tail = d[-1] * q[1] / (1 - q[1])
            trend, limit = "positive", s_x0 / (S[-1] + tail)
        else:
            trend, limit = "undecided", None
    out = EscapeTrend([float(r) for r in radii], [float(p) for p in p_out], trend, limit)
    if parabolicity is not None:
        out.parabolicity = parabolicity.kind.value
        if parabolicity.kind == Kind.DIVERGENT:
            out.consistent = trend == "to_zero"
        elif parabolicity.kind == Kind.CONVERGENT:
            out.consistent = trend == "positive"
        if out.consistent is False:
            out.notes.append("escape trend disagrees with the parabolicity integral")
    return out
