import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from revend.errors import DomainError, ReparamError
from revend.geometry import (
    EndSpec,
    Kappa,
    ParamCurve,
    arc_reparam,
    euclid_mean_curvature,
    mesh,
    metric_factor,
    read_obj,
    tangent_norm,
    write_obj,
)


def line(p0, v, t0=0.0, t_end=math.inf, label="line"):
    return ParamCurve(lambda t: (p0[0] + v[0] * t, p0[1] + v[1] * t),
                      lambda t: (np.full(np.shape(t), v[0]), np.full(np.shape(t), v[1])),
                      t0, t_end, label)


def cone(c, warp=None):
    """The ray (t, ct) for t >= 1, optionally through t = warp(u)."""
    if warp is None:
        return ParamCurve(lambda t: (t, c * t), lambda t: (np.ones_like(t), np.full(np.shape(t), c)),
                          1.0, math.inf, f"cone{c}")
    g, dg, u0 = warp
    return ParamCurve(lambda u: (g(u), c * g(u)), lambda u: (dg(u), c * dg(u)), u0, math.inf, "cone-rep")


class TestMetric:
    @pytest.mark.parametrize("p", [(1.0, 2.0), (0.3, -4.0), (7.0, 0.1)])
    def test_euclidean_factor_is_one(self, p):
        assert metric_factor(0, p) == 1.0

    def test_hyperbolic_factor(self):
        assert metric_factor(-1, (1.0, 2.0)) == 0.25

    def test_spherical_factor_at_origin(self):
        assert metric_factor(1, (0.0, 0.0)) == 4.0

    @pytest.mark.parametrize("x3", [0.0, -1.0])
    def test_hyperbolic_factor_rejects_boundary(self, x3):
        with pytest.raises(DomainError):
            metric_factor(Kappa.HYPERBOLIC, (1.0, x3))

    def test_kappa_parse_rejects_other_values(self):
        with pytest.raises(DomainError):
            Kappa.parse(2)
        assert Kappa.parse("-1") is Kappa.HYPERBOLIC

    def test_euclidean_norm(self):
        assert tangent_norm(0, (5.0, 5.0), (3.0, 4.0)) == 5.0

    @pytest.mark.parametrize("b, c, t", [(2.0, 1.0, 0.0), (1.0, 3.0, 2.5), (0.5, 0.2, -1.0)])
    def test_vertical_line_is_unit_speed(self, b, c, t):
        assert tangent_norm(-1, (b, c * math.exp(t)), (0.0, c * math.exp(t))) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("c, t", [(1.0, 1.0), (0.5, 3.0), (2.0, 0.7)])
    def test_cone_speed(self, c, t):
        expect = math.sqrt(1 + c * c) / (c * t)
        assert tangent_norm(-1, (t, c * t), (1.0, c)) == pytest.approx(expect, rel=1e-14)


class TestArcReparam:
    @pytest.mark.parametrize("c", [0.5, 1.0, 2.0])
    def test_cone_closed_form(self, c):
        arc = arc_reparam(cone(c), -1, 20.0)
        t = np.linspace(1.0, math.e**3, 400)
        np.testing.assert_allclose(arc.s_of_t(t), math.sqrt(1 + c * c) / c * np.log(t), atol=1e-8)
        assert float(arc.s_of_t(math.e)) == pytest.approx(math.sqrt(1 + c * c) / c, abs=1e-9)

    def test_euclidean_ray_is_identity(self):
        arc = arc_reparam(line((1.0, 0.0), (1.0, 0.0)), 0, 50.0)
        s = np.linspace(0, 50, 101)
        np.testing.assert_allclose(arc.t_of_s(s), s, atol=1e-12)

    @pytest.mark.parametrize("b, c", [(2.0, 1.0), (1.0, 0.3)])
    def test_vertical_line_needs_no_reparametrization(self, b, c):
        curve = ParamCurve(lambda t: (np.full(np.shape(t), b), c * np.exp(t)),
                           lambda t: (np.zeros_like(t), c * np.exp(t)))
        arc = arc_reparam(curve, -1, 30.0)
        s = np.linspace(0, 30, 61)
        np.testing.assert_allclose(arc.t_of_s(s), s, atol=1e-9)

    def test_unit_speed_at_random_samples(self, rng):
        tol = 1e-10
        arc = arc_reparam(cone(0.7), -1, 40.0, tol)
        s = rng.uniform(0, 40, 200)
        x1, x3 = arc.point(s)
        v1, v3 = arc.velocity(s)
        speed = np.hypot(v1, v3) / x3
        assert np.max(np.abs(speed - 1)) < 10 * tol

    def test_parametrization_invariance(self):
        tol = 1e-10
        direct = arc_reparam(cone(1.5), -1, 10.0, tol)
        # u -> t = u^3 + u + 1 maps [0, inf) onto [1, inf)
        other = arc_reparam(cone(1.5, (lambda u: u**3 + u + 1, lambda u: 3 * u * u + 1, 0.0)), -1, 10.0, tol)
        s = np.linspace(0, 10, 57)
        for a, b in zip(direct.point(s), other.point(s)):
            np.testing.assert_allclose(a, b, rtol=10 * tol, atol=0)

    def test_inverse_maps_agree(self):
        arc = arc_reparam(cone(1.0), -1, 15.0)
        s = np.linspace(0, 15, 40)
        np.testing.assert_allclose(arc.s_of_t(arc.t_of_s(s)), s, atol=1e-10)

    def test_s_outside_range_rejected(self):
        arc = arc_reparam(cone(1.0), -1, 5.0)
        with pytest.raises(DomainError):
            arc.point(np.array([arc.s_max * 1.5]))

    def test_curve_leaving_half_space(self):
        # descends to x3 = 0 at t = 1, hyperbolic length ~ log, so s_max = 200 is unreachable
        curve = line((1.0, 1.0), (0.0, -1.0), 0.0, 1.0)
        with pytest.raises((ReparamError, DomainError)):
            arc_reparam(curve, -1, 200.0)

    def test_start_on_axis_rejected(self):
        with pytest.raises(DomainError):
            arc_reparam(line((0.0, 1.0), (1.0, 0.0)), 0, 5.0)

    def test_stalled_curve(self):
        curve = ParamCurve(lambda t: (1 + 0 * t, 1 + 0 * t), lambda t: (0 * t, 0 * t))
        with pytest.raises(ReparamError):
            arc_reparam(curve, 0, 1.0)

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.2, 1.5), st.floats(0.1, 2.0))
    def test_euclidean_unit_speed_bound(self, amp, freq):
        curve = ParamCurve(lambda t: (2 + amp * np.sin(freq * t) + 0 * t, t),
                           lambda t: (amp * freq * np.cos(freq * t), np.ones_like(t)))
        arc = arc_reparam(curve, 0, 20.0)
        v1, _ = arc.velocity(np.linspace(0, arc.s_max, 300))
        assert np.all(np.abs(v1) <= 1 + 1e-9)


class TestHyperbolicBounds:
    @pytest.mark.parametrize("name", ["c_cone", "horosphere", "cylinder_upper", "cylinder_lower",
                                      "spherical_catenoid", "clothoid"])
    def test_velocity_bounded_by_height(self, end_of, name):
        arc = end_of(name).curve
        s = np.linspace(0, min(arc.s_max, 60.0), 500)
        _, x3 = arc.point(s)
        v1, v3 = arc.velocity(s)
        assert np.all(np.abs(v1) <= x3 * (1 + 1e-8))
        assert np.all(np.abs(v3) <= x3 * (1 + 1e-8))


class TestMeanCurvature:
    def test_cylinder(self):
        r = 1.7
        arc = arc_reparam(line((r, 0.0), (0.0, 1.0)), 0, 10.0)
        H = euclid_mean_curvature(arc)
        np.testing.assert_allclose(H(np.linspace(0, 10, 11)), 1 / (2 * r), rtol=1e-10)

    def test_sphere(self):
        R = 2.0
        curve = ParamCurve(lambda t: (R * np.sin(t / R), R - R * np.cos(t / R)),
                           lambda t: (np.cos(t / R), np.sin(t / R)),
                           0.3, math.pi * R - 0.3,
                           deriv2=lambda t: (-np.sin(t / R) / R, np.cos(t / R) / R))
        arc = arc_reparam(curve, 0, 4.0)
        H = euclid_mean_curvature(arc)
        np.testing.assert_allclose(np.abs(H(np.linspace(0, 4, 17))), 1 / R, rtol=1e-7)

    def test_rejects_non_euclidean(self, end_of):
        with pytest.raises(DomainError):
            euclid_mean_curvature(end_of("c_cone").curve)

    def test_oscillator_mean_curvature_grows(self, end_of):
        H = euclid_mean_curvature(end_of("bounded_oscillator").curve)
        sups = []
        for hi in (10.0, 20.0, 30.0, 50.0):
            s = np.linspace(0, hi, int(hi * 400))
            sups.append(np.max(np.abs(H(s))))
        assert all(b > a for a, b in zip(sups, sups[1:]))


class TestMesh:
    def test_counts(self, end_of):
        m = mesh(end_of("c_cone"), 1.0, 2, 3)
        assert m.vertices.shape == (6, 3)
        assert m.faces.shape == (6, 3)

    def test_faces_index_valid_vertices(self, end_of):
        m = mesh(end_of("horosphere"), 5.0, 7, 9)
        assert m.faces.min() == 0 and m.faces.max() == 7 * 9 - 1

    def test_horosphere_is_flat_plane(self, end_of):
        m = mesh(end_of("horosphere"), 20.0, 15, 12)
        np.testing.assert_array_equal(m.vertices[:, 2], 1.0)

    def test_cone_equation(self, end_of):
        m = mesh(end_of("c_cone"), 5.0, 20, 16)
        x, y, z = m.vertices.T
        np.testing.assert_allclose(z, np.hypot(x, y), atol=1e-9)

    @pytest.mark.parametrize("n_s, n_theta", [(1, 5), (5, 2)])
    def test_bad_grid(self, end_of, n_s, n_theta):
        with pytest.raises(ValueError):
            mesh(end_of("c_cone"), 1.0, n_s, n_theta)

    def test_obj_round_trip(self, end_of, tmp_path):
        m = mesh(end_of("cylinder_upper"), 3.0, 6, 5, attributes={"s2": lambda s: s * s})
        path = tmp_path / "m.obj"
        write_obj(m, path)
        back = read_obj(path)
        np.testing.assert_array_equal(back.vertices, m.vertices)
        np.testing.assert_array_equal(back.faces, m.faces)
        np.testing.assert_array_equal(back.attributes["s2"], m.attributes["s2"])


def test_endspec_kappa_must_match(end_of):
    with pytest.raises(DomainError):
        EndSpec(end_of("c_cone").curve, Kappa.EUCLIDEAN, "x")


def test_curve_crossing_axis_is_reported():
    curve = ParamCurve(lambda t: (2 + 3 * np.sin(t), t), lambda t: (3 * np.cos(t), np.ones_like(t)))
    with pytest.raises(ReparamError, match="leaves the model"):
        arc_reparam(curve, 0, 20.0)
