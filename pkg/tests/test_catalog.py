import math

import numpy as np
import pytest
from scipy import integrate

from revend.catalog import (CATALOG_NAMES, INCONCLUSIVE, NON_PARABOLIC, PARABOLIC, ClothoidIntegrals,
                            catalog, catenoid_profile, clothoid_s_max)
from revend.errors import DomainError
from revend.geometry import Kappa


def _catenoid_oracle(a, s):
    """y_a(s) and Lambda_a(s) straight from their defining integrals (scipy quad)."""
    C = math.cosh(2 * a)
    dy = lambda t: C * math.sinh(2 * t) / math.sqrt(C * C * math.cosh(2 * t) ** 2 - 1)
    dl = lambda t: math.sqrt(C * math.cosh(2 * t) - 1) / (C * C * math.cosh(2 * t) ** 2 - 1)
    y = a + integrate.quad(dy, 0, s, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    lam = math.sqrt(2) * math.sinh(2 * a) * integrate.quad(dl, 0, s, epsabs=1e-13, epsrel=1e-13, limit=400)[0]
    return y, lam


def test_names():
    assert len(CATALOG_NAMES) == 9


@pytest.mark.parametrize("name, kappa", [
    ("plane_end", Kappa.EUCLIDEAN), ("bounded_oscillator", Kappa.EUCLIDEAN), ("sphere_end", Kappa.SPHERICAL),
    ("c_cone", Kappa.HYPERBOLIC), ("horosphere", Kappa.HYPERBOLIC), ("cylinder_upper", Kappa.HYPERBOLIC),
    ("cylinder_lower", Kappa.HYPERBOLIC), ("spherical_catenoid", Kappa.HYPERBOLIC), ("clothoid", Kappa.HYPERBOLIC),
])
def test_models(end_of, name, kappa):
    end = end_of(name)
    assert end.kappa == kappa and end.curve.kappa == kappa and end.name == name


def test_expected_verdicts(end_of):
    exp = {n: end_of(n).expected["parabolic"] for n in CATALOG_NAMES}
    assert exp["cylinder_lower"] == [NON_PARABOLIC]
    assert exp["spherical_catenoid"] == [NON_PARABOLIC]
    assert set(exp["clothoid"]) == {PARABOLIC, INCONCLUSIVE}
    assert end_of("clothoid").expected.get("soft")
    for n in ("plane_end", "bounded_oscillator", "sphere_end", "c_cone", "horosphere", "cylinder_upper"):
        assert exp[n] == [PARABOLIC]


def test_horosphere_profile():
    end = catalog("horosphere", {"z": 1})
    s = np.linspace(0, 100, 11)
    x1, x3 = end.curve.point(s)
    np.testing.assert_allclose(x1, s + 1, rtol=1e-12)
    np.testing.assert_array_equal(x3, 1.0)


def test_cylinder_lower_profile():
    end = catalog("cylinder_lower", {"b": 2, "c": 1})
    s = np.linspace(0, 20, 21)
    x1, x3 = end.curve.point(s)
    np.testing.assert_array_equal(x1, 2.0)
    np.testing.assert_allclose(x3, np.exp(-s), rtol=1e-10)


@pytest.mark.parametrize("name", ["horosphere", "cylinder_upper", "cylinder_lower"])
def test_already_unit_speed(end_of, name):
    arc = end_of(name).curve
    s = np.linspace(0, min(arc.s_max, 100.0), 50)
    np.testing.assert_allclose(arc.t_of_s(s), s, atol=1e-9)


@pytest.mark.parametrize("name, params", [
    ("c_cone", {"c": 0}), ("c_cone", {"c": -1}), ("horosphere", {"z": 0}), ("spherical_catenoid", {"a": 0}),
    ("bounded_oscillator", {"R": 1, "a": 1}), ("bounded_oscillator", {"R": 0.5, "a": 1}),
    ("cylinder_lower", {"b": -2}), ("nonsense", {}), ("horosphere", {"q": 1}),
])
def test_invalid(name, params):
    with pytest.raises(DomainError):
        catalog(name, params)


class TestCatenoid:
    @pytest.mark.parametrize("a", [0.1, 0.5, 2.0])
    def test_start_point(self, a):
        x1, x3 = catenoid_profile(a, 0.0)
        assert x1 == pytest.approx(math.tanh(a), abs=1e-15)
        assert x3 == pytest.approx(1 / math.cosh(a), abs=1e-15)

    @pytest.mark.parametrize("a, s", [(0.5, 0.3), (0.5, 5.0), (1.3, 2.0), (0.05, 7.5)])
    def test_against_direct_quadrature(self, a, s):
        y, lam = _catenoid_oracle(a, s)
        x1, x3 = catenoid_profile(a, s)
        assert x1 == pytest.approx(math.exp(lam) * math.tanh(y), rel=1e-11)
        assert x3 == pytest.approx(math.exp(lam) / math.cosh(y), rel=1e-10)

    def test_small_parameter_limit(self):
        s = np.linspace(0, 6, 13)
        x1, x3 = catenoid_profile(1e-6, s)
        np.testing.assert_allclose(x1, np.tanh(s), atol=1e-4)
        np.testing.assert_allclose(x3, 1 / np.cosh(s), atol=1e-4)

    def test_affine_growth_constant(self):
        # y_a(s) - s approaches a constant; reference from scipy quad at s = 40
        a = 0.5
        y40, _ = _catenoid_oracle(a, 40.0)
        ref = y40 - 40.0
        from revend.catalog import _catenoid_quad
        q = _catenoid_quad(a)
        y5, _ = q.values(np.array([5.0]))
        y60, _ = q.values(np.array([60.0]))
        assert y5[0] - 5.0 == pytest.approx(ref, abs=1e-8)
        assert y60[0] - 60.0 == pytest.approx(ref, abs=1e-10)

    def test_lambda_limit(self):
        from revend.catalog import _catenoid_quad
        _, lam_inf = _catenoid_oracle(0.5, 40.0)
        _, lam = _catenoid_quad(0.5).values(np.array([130.0]))
        assert lam[0] == pytest.approx(lam_inf, abs=1e-11)

    def test_unit_speed(self, end_of):
        arc = end_of("spherical_catenoid").curve
        s = np.linspace(0, 40, 300)
        _, x3 = arc.point(s)
        v1, v3 = arc.velocity(s)
        np.testing.assert_allclose(np.hypot(v1, v3) / x3, 1.0, atol=1e-9)


class TestClothoid:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("X", [0.5, 2.0, 4.5])
    def test_integrals(self, n, X):
        m = n + 1
        S_ref = integrate.quad(lambda u: math.sin(u**m / m), 0, X, limit=400, epsabs=1e-13)[0]
        C_ref = integrate.quad(lambda u: math.cos(u**m / m), 0, X, limit=400, epsabs=1e-13)[0]
        S, C = ClothoidIntegrals(n)(np.array([X]))
        assert S[0] == pytest.approx(S_ref, abs=1e-10)
        assert C[0] == pytest.approx(C_ref, abs=1e-10)

    # quad reports roundoff on these oscillatory integrands; its result is still good to ~1e-14
    @pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
    @pytest.mark.parametrize("n", [2, 3])
    @pytest.mark.parametrize("factor", [0.99, 1.01, 1.7])
    def test_integrals_across_asymptotic_switch(self, n, factor):
        m = n + 1
        X = factor * (m * ClothoidIntegrals.ASYMPTOTIC_PHASE) ** (1 / m)
        kw = dict(limit=20000, epsabs=1e-14, epsrel=1e-14)
        S_ref = integrate.quad(lambda u: math.sin(u**m / m), 0, X, **kw)[0]
        C_ref = integrate.quad(lambda u: math.cos(u**m / m), 0, X, **kw)[0]
        S, C = ClothoidIntegrals(n)(np.array([X]))
        assert S[0] == pytest.approx(S_ref, abs=1e-12)
        assert C[0] == pytest.approx(C_ref, abs=1e-12)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_limit(self, n):
        m = n + 1
        S_inf, C_inf = ClothoidIntegrals(n).limit()
        S, C = ClothoidIntegrals(n)(np.array([1e5]))
        assert S[0] == pytest.approx(S_inf, abs=1e-4)
        assert C[0] == pytest.approx(C_inf, abs=1e-4)
        if n == 1:
            assert S_inf == pytest.approx(math.sqrt(math.pi) / 2, rel=1e-15)

    def test_higher_order_default_horizon(self):
        assert clothoid_s_max(1) == 130.0
        assert 30 < clothoid_s_max(2) < 40
        end = catalog("clothoid", {"n": 2})
        assert end.curve.s_max == clothoid_s_max(2)

    def test_outer_end_spirals_to_limit_point(self):
        end = catalog("clothoid", {"a": 1, "n": 1, "end": "outer"})
        lim = math.sqrt(math.pi) / 2
        x1, x3 = end.curve.point(np.array([end.curve.s_max]))
        # the Euclidean distance to the limit point shrinks like 1/u
        assert abs(x1[0] - lim) < 0.05 and abs(x3[0] - lim) < 0.05

    def test_inner_end_heads_to_origin(self):
        end = catalog("clothoid", {"a": 1, "n": 1, "end": "inner"})
        x1, x3 = end.curve.point(np.array([0.0, 20.0]))
        assert x1[1] < 1e-6 * x1[0] and x3[1] < 1e-6 * x3[0]

    def test_invalid_order(self):
        with pytest.raises(DomainError):
            ClothoidIntegrals(0)
        with pytest.raises(DomainError):
            catalog("clothoid", {"end": "middle"})
