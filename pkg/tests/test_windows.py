"""Window functions: closed forms against quadrature oracles."""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from torusprony import (
    WindowFunction,
    autocorr,
    autocorr_at_zero,
    deriv_autocorr,
    deriv_autocorr_at_zero,
    eval_phi,
    phi_hat,
    sigma_root,
)
from torusprony.ingham import phi_first_deriv, phi_rth_deriv

ALL_WINDOWS = [
    ("poly_r1", lambda q: WindowFunction.poly(q, 1)),
    ("poly_r2", lambda q: WindowFunction.poly(q, 2)),
    ("poly_r3", lambda q: WindowFunction.poly(q, 3)),
    ("cos", WindowFunction.cosine),
    ("raised_cos", WindowFunction.raised_cosine),
    ("biharmonic", WindowFunction.biharmonic),
]


def quad_autocorr_zero(window):
    val, _ = quad(lambda x: eval_phi(window, x) ** 2, -window.q / 2, window.q / 2,
                  epsabs=1e-13, limit=200)
    return val


def quad_deriv_autocorr_zero(window):
    val, _ = quad(lambda x: phi_rth_deriv(window, x) ** 2, -window.q / 2, window.q / 2,
                  epsabs=1e-13, limit=200)
    return (-1.0) ** window.r * val


def quad_phi_hat(window, v):
    """Oscillation-aware quadrature oracle for the transform."""
    if abs(v) < 1e-12:
        return quad(lambda x: eval_phi(window, x), -window.q / 2, window.q / 2,
                    epsabs=1e-13)[0]
    val, _ = quad(lambda x: eval_phi(window, x), -window.q / 2, window.q / 2,
                  weight="cos", wvar=2 * np.pi * v, epsabs=1e-13, limit=400)
    return val


class TestEvalPhi:
    def test_poly_center(self):
        assert eval_phi(WindowFunction.poly(0.2, 1), 0.0) == 1.0

    def test_cos_boundary_zero(self):
        w = WindowFunction.cosine(0.34)
        assert eval_phi(w, w.q / 2) == 0.0
        assert eval_phi(w, -w.q / 2) == 0.0
        assert abs(eval_phi(w, w.q / 2 - 1e-9)) < 1e-7

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_support_and_symmetry(self, name, make):
        w = make(0.3)
        xs = np.linspace(-0.5, 0.5, 101)
        vals = eval_phi(w, xs)
        assert np.all(vals[np.abs(xs) >= w.q / 2] == 0.0)
        np.testing.assert_allclose(vals, vals[::-1], atol=1e-12)
        assert eval_phi(w, 0.0) > 0

    def test_biharmonic_boundary_value_and_slope(self):
        w = WindowFunction.biharmonic(0.2)
        edge = w.q / 2 * (1 - 1e-13)
        assert abs(eval_phi(w, edge)) < 1e-10
        assert abs(phi_first_deriv(w, edge)) < 1e-8

    def test_biharmonic_nonnegative_inside(self):
        w = WindowFunction.biharmonic(0.4)
        xs = np.linspace(-w.q / 2, w.q / 2, 2001)
        assert np.all(eval_phi(w, xs) >= -1e-14)

    def test_poly_rth_derivative_matches_finite_difference(self):
        w = WindowFunction.poly(0.5, 2)
        h = 1e-5
        for x in (0.0, 0.07, -0.11):
            fd = (
                eval_phi(w, x + 2 * h)
                - 4 * eval_phi(w, x + h)
                + 6 * eval_phi(w, x)
                - 4 * eval_phi(w, x - h)
                + eval_phi(w, x - 2 * h)
            ) / h**2  # second difference squared spacing
            fd2 = (eval_phi(w, x + h) - 2 * eval_phi(w, x) + eval_phi(w, x - h)) / h**2
            assert phi_rth_deriv(w, x) == pytest.approx(fd2, rel=1e-4, abs=1e-3)
            del fd


class TestAutocorrAtZero:
    def test_known_values_q_unit(self):
        assert autocorr_at_zero(WindowFunction.poly(1.0, 1)) == pytest.approx(8 / 15)
        assert autocorr_at_zero(WindowFunction.poly(1.0, 2)) == pytest.approx(128 / 315)
        assert autocorr_at_zero(WindowFunction.raised_cosine(1.0)) == pytest.approx(1.5)
        assert autocorr_at_zero(WindowFunction.cosine(1.0)) == pytest.approx(0.5)

    def test_scales_linearly_in_q(self):
        for name, make in ALL_WINDOWS:
            assert autocorr_at_zero(make(0.4)) == pytest.approx(
                0.4 * autocorr_at_zero(make(1.0)), rel=1e-12
            )

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    @pytest.mark.parametrize("q", [0.05, 0.1, 0.3])
    def test_against_quadrature(self, name, make, q):
        w = make(q)
        assert autocorr_at_zero(w) == pytest.approx(quad_autocorr_zero(w), rel=1e-10)


class TestDerivAutocorrAtZero:
    def test_known_values_q_unit(self):
        assert deriv_autocorr_at_zero(WindowFunction.poly(1.0, 1)) == pytest.approx(-16 / 3)
        assert deriv_autocorr_at_zero(WindowFunction.poly(1.0, 2)) == pytest.approx(1024 / 5)
        assert deriv_autocorr_at_zero(WindowFunction.cosine(1.0)) == pytest.approx(
            -np.pi**2 * 0.5
        )

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    @pytest.mark.parametrize("q", [0.05, 0.1, 0.3])
    def test_against_quadrature(self, name, make, q):
        w = make(q)
        assert deriv_autocorr_at_zero(w) == pytest.approx(
            quad_deriv_autocorr_zero(w), rel=1e-8
        )

    def test_biharmonic_eigenvalue_identity(self):
        # integral |phi''|^2 = (16 sigma^4 / q^4) integral |phi|^2
        for q in (0.1, 0.25):
            w = WindowFunction.biharmonic(q)
            sigma = sigma_root()
            lhs = quad(lambda x: phi_rth_deriv(w, x) ** 2, -q / 2, q / 2,
                       epsabs=1e-13, limit=200)[0]
            rhs = 16 * sigma**4 / q**4 * quad_autocorr_zero(w)
            assert lhs == pytest.approx(rhs, rel=1e-8)


class TestPointwiseAutocorr:
    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_matches_direct_quadrature(self, name, make):
        w = make(0.3)
        for x in (0.0, 0.05, 0.13, -0.21, 0.29):
            direct, _ = quad(
                lambda u: eval_phi(w, u) * eval_phi(w, u - x),
                *(max(-w.q / 2, x - w.q / 2), min(w.q / 2, x + w.q / 2)),
                epsabs=1e-13,
                limit=200,
            )
            assert autocorr(w, x) == pytest.approx(direct, abs=1e-12)

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_zero_outside_support(self, name, make):
        w = make(0.2)
        assert autocorr(w, 0.2) == 0.0
        assert autocorr(w, -0.5) == 0.0
        assert deriv_autocorr(w, 0.2) == 0.0

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_deriv_autocorr_matches_quadrature(self, name, make):
        w = make(0.3)
        sign = (-1.0) ** w.r
        for x in (0.0, 0.08, -0.17):
            direct, _ = quad(
                lambda u: phi_rth_deriv(w, u) * phi_rth_deriv(w, u - x),
                *(max(-w.q / 2, x - w.q / 2), min(w.q / 2, x + w.q / 2)),
                epsabs=1e-12,
                limit=300,
            )
            assert deriv_autocorr(w, x) == pytest.approx(sign * direct, abs=1e-9)

    def test_deriv_autocorr_at_zero_consistency(self):
        for name, make in ALL_WINDOWS:
            w = make(0.17)
            assert deriv_autocorr(w, 0.0) == pytest.approx(
                deriv_autocorr_at_zero(w), rel=1e-9
            )


class TestPhiHat:
    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_against_oscillatory_quadrature(self, name, make):
        w = make(0.2)
        vs = [0.0, 0.3, 1.7, 2.5, 1 / (2 * w.q), 1 / w.q, 7.7, 19.3, -4.1]
        for v in vs:
            assert phi_hat(w, v) == pytest.approx(quad_phi_hat(w, v), abs=1e-9)

    @pytest.mark.parametrize("name,make", ALL_WINDOWS)
    def test_even_and_peaks_at_zero(self, name, make):
        w = make(0.31)
        vs = np.linspace(-40, 40, 401)
        vals = phi_hat(w, vs)
        np.testing.assert_allclose(vals, vals[::-1], atol=1e-12)
        assert np.all(np.abs(vals) <= phi_hat(w, 0.0) + 1e-12)

    def test_value_at_zero_is_mass(self):
        for name, make in ALL_WINDOWS:
            w = make(0.2)
            mass = quad(lambda x: eval_phi(w, x), -w.q / 2, w.q / 2, epsabs=1e-13)[0]
            assert phi_hat(w, 0.0) == pytest.approx(mass, rel=1e-10)

    def test_poly_decay_bound(self):
        # |phi_hat(v)| should decay at least like (1+|v|)^(-r-1)
        for r in (1, 2, 3):
            w = WindowFunction.poly(0.2, r)
            vs = np.linspace(30, 300, 50)
            vals = np.abs(phi_hat(w, vs))
            bound = vals[0] * ((1 + vs[0]) / (1 + vs)) ** (r + 1)
            assert np.all(vals <= 50 * bound)


class TestSigmaRoot:
    def test_value(self):
        assert sigma_root() == pytest.approx(2.365, abs=1e-3)

    def test_residual(self):
        s = sigma_root()
        assert abs(math.cos(s) * math.sinh(s) + math.cosh(s) * math.sin(s)) <= 1e-9
