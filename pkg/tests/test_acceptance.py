"""Acceptance criteria.  Each test records one PASS/FAIL line; the lines are
printed at the end of the pytest run (see ``conftest.pytest_terminal_summary``)
and also immediately when pytest runs with ``-s``."""

import math

import numpy as np
import pytest

from revend.catalog import CATALOG_NAMES
from revend.criteria import (PASS, centroid_test, classify_end, nonparabolic_necessaries, parabolicity_test,
                             stochastic_test, sufficient_parabolic_test)
from revend.divergence import Kind, classify_integral
from revend.stochastic import DiffusionCfg, exact_hitting, simulate_hitting
from revend.warp import centroid, gauss_curvature, synthetic

from conftest import cached_end, cached_warp

RESULTS = {}


def record(number, title, ok, detail=""):
    line = f"criterion {number:>2} {'PASS' if ok else 'FAIL'}  {title}" + (f"  ({detail})" if detail else "")
    RESULTS[number] = line
    print(line)
    assert ok, line


def test_c01_catalog_table():
    bad = []
    for name in CATALOG_NAMES:
        end = cached_end(name)
        r = classify_end(end)
        if r.verdict not in end.expected["parabolic"]:
            bad.append(f"{name}={r.verdict}")
    record(1, "catalog verdict table", not bad, f"{len(CATALOG_NAMES)} ends, mismatches: {bad or 0}")


def test_c02_cylinder_closed_form():
    v = parabolicity_test(cached_warp("cylinder_lower", (("b", 2.0), ("c", 1.0))))
    err = abs(v.value - 0.5) if v.kind == Kind.CONVERGENT else math.inf
    record(2, "cylinder_lower integral = c/b = 0.5", err <= 1e-6, f"{v.kind.value}, |value - 0.5| = {err:.2e}")


def test_c03_horosphere_centroid():
    worst = 0.0
    for z in (0.5, 1.0, 2.0):
        xg = centroid(cached_warp("horosphere", (("z", z),)))
        for s in (1.0, 10.0, 100.0):
            worst = max(worst, abs(float(xg(s)) - (s / 2 + 1 / z)))
    record(3, "horosphere centroid s/2 + 1/z", worst <= 1e-8, f"max error {worst:.2e}")


def test_c04_flatness():
    s = np.linspace(1.0, 50.0, 491)
    worst = max(float(np.max(np.abs(gauss_curvature(cached_warp(name), s))))
                for name in ("horosphere", "c_cone"))
    record(4, "horosphere and c-cone are flat", worst <= 1e-6, f"max |K| {worst:.2e}")


def test_c05_stochastic_completeness():
    kinds = {name: stochastic_test(cached_warp(name)).kind for name in CATALOG_NAMES}
    bad = [n for n, k in kinds.items() if k != Kind.DIVERGENT]
    record(5, "stochastic integral diverges on every catalog end", not bad, f"not divergent: {bad or 'none'}")


def test_c06_nonparabolic_necessaries():
    statuses = {}
    for name in ("cylinder_lower", "spherical_catenoid"):
        for cid, st, _ in nonparabolic_necessaries(cached_end(name).curve):
            statuses[f"{name}.{cid}"] = st
    ok = len(statuses) == 4 and all(st == PASS for st in statuses.values())
    record(6, "non-parabolic necessaries", ok, ", ".join(f"{k}={v}" for k, v in statuses.items()))


def test_c07_divergence_benchmark():
    wrong, undecided = [], []
    for p in (0.5, 0.8, 0.95, 1.05, 1.2, 2.0, 3.0):
        truth = Kind.DIVERGENT if p <= 1 else Kind.CONVERGENT
        k = classify_integral(lambda s, p=p: (1 + s) ** -p).kind
        if k == Kind.INCONCLUSIVE:
            undecided.append(p)
        elif k != truth:
            wrong.append(p)
    for lam in (0.1, -0.1):
        truth = Kind.DIVERGENT if lam > 0 else Kind.CONVERGENT
        k = classify_integral(lambda s, lam=lam: np.exp(lam * s)).kind
        if k != truth:
            (undecided if k == Kind.INCONCLUSIVE else wrong).append(f"exp({lam}s)")
    record(7, "divergence classifier benchmark", not wrong and not undecided,
           f"wrong: {wrong or 'none'}, undecided: {undecided or 'none'}")


def test_c08_monte_carlo_oracle():
    w = synthetic(np.exp, np.exp, label="exp")
    exact = exact_hitting(w, 0.0, 2.0, 1.0)[0]
    one = simulate_hitting(w, 0.0, 2.0, 1.0, DiffusionCfg(step=1e-4, n_paths=100_000, seed=2024, workers=1))
    eight = simulate_hitting(w, 0.0, 2.0, 1.0, DiffusionCfg(step=1e-4, n_paths=100_000, seed=2024, workers=8))
    z = (one.p_hit_inner - 0.268941) / one.se_inner
    ok = abs(exact - 0.268941) < 1e-6 and abs(z) <= 3 and one == eight
    record(8, "Monte Carlo hitting probability for w = e^s", ok,
           f"p = {one.p_hit_inner:.5f} +/- {one.se_inner:.5f}, z = {z:+.2f}, workers 1 vs 8 identical: {one == eight}")


def test_c09_arc_length_fidelity():
    worst = 0.0
    t = np.linspace(1.0, math.e**3, 2001)
    for c in (0.5, 1.0, 2.0):
        arc = cached_end("c_cone", (("c", c),)).curve
        worst = max(worst, float(np.max(np.abs(arc.s_of_t(t) - math.sqrt(1 + c * c) / c * np.log(t)))))
    record(9, "c-cone arc length sqrt(1+c^2)/c ln t", worst <= 1e-7, f"max error {worst:.2e}")


def test_c10_scale_invariance():
    changed = []
    for name in CATALOG_NAMES:
        w = cached_warp(name)
        base = [test(w).kind for test in (parabolicity_test, sufficient_parabolic_test, stochastic_test)]
        base.append(centroid_test(w).branch)
        for k in (0.1, 10.0):
            ws = w.scaled(k)
            got = [test(ws).kind for test in (parabolicity_test, sufficient_parabolic_test, stochastic_test)]
            got.append(centroid_test(ws).branch)
            if got != base:
                changed.append(f"{name}*{k}")
    record(10, "verdicts invariant under w -> k w, k in {0.1, 10}", not changed, f"changed: {changed or 'none'}")
