import numpy as np
import pytest

from grtlab.geometry import (
    CLASSICAL,
    GrtModel,
    b0_symbol,
    chord_distance,
    delta_phi,
    dual_points,
    grad_x_phi,
    phi,
    phi_alpha_prime,
    q0,
)

CIRC = GrtModel()
RADON = GrtModel(kind=CLASSICAL)


def point_line_distance(p, a, b):
    # distance from p to the line through a and b (the chord oracle)
    d = b - a
    d = d / np.linalg.norm(d)
    w = p - a
    return abs(w[0] * d[1] - w[1] * d[0])


class TestPhi:
    def test_center(self):
        assert phi(CIRC, (0.0, 0.0), 0.0) == pytest.approx(10.0, abs=1e-15)

    def test_direct_arithmetic(self):
        # oracle: |x - 10(cos a, sin a)|; the grid node (100, 229) of the
        # 300 x 451 lattice is the one nearest this radius (see sampling tests)
        x = np.array([1.2, 0.7])
        a = 2.0944
        expected = np.linalg.norm(x - 10 * np.array([np.cos(a), np.sin(a)]))
        assert expected == pytest.approx(10.089885055, abs=1e-8)
        assert phi(CIRC, x, a) == pytest.approx(expected, rel=1e-14)

    def test_classical_dot(self):
        assert phi(RADON, (3.0, 4.0), 0.0) == pytest.approx(3.0, abs=1e-15)

    def test_outside_domain_raises(self):
        with pytest.raises(ValueError):
            phi(CIRC, (11.0, 0.0), 0.3)


class TestGradPhi:
    def test_center(self):
        np.testing.assert_allclose(grad_x_phi(CIRC, (0.0, 0.0), 0.0), [-1.0, 0.0], atol=1e-15)

    def test_classical(self):
        np.testing.assert_allclose(grad_x_phi(RADON, (5.0, -2.0), np.pi / 2), [0.0, 1.0], atol=1e-15)

    def test_unit_norm_random(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            x = rng.uniform(-9 / np.sqrt(2), 9 / np.sqrt(2), 2)
            a = rng.uniform(0, 2 * np.pi)
            assert abs(np.linalg.norm(grad_x_phi(CIRC, x, a)) - 1.0) < 1e-14


class TestPhiAlphaPrime:
    def test_center_zero(self):
        for a in (0.0, 1.0, 4.0):
            assert phi_alpha_prime(CIRC, (0.0, 0.0), a) == pytest.approx(0.0, abs=1e-12)

    def test_classical(self):
        assert phi_alpha_prime(RADON, (3.0, 4.0), 0.0) == pytest.approx(4.0, abs=1e-15)

    def test_equals_chord_distance(self):
        x = np.array([1.2, 0.7])
        a = 2.0944
        assert abs(phi_alpha_prime(CIRC, x, a)) == pytest.approx(chord_distance(CIRC, x, a), abs=1e-12)

    def test_finite_difference_order(self):
        # central differences converge at order >= 1.9
        rng = np.random.default_rng(2)
        for _ in range(20):
            x = rng.uniform(-5, 5, 2)
            a = rng.uniform(0, 2 * np.pi)
            exact = phi_alpha_prime(CIRC, x, a)
            errs = []
            for h in (1e-4, 1e-5):
                fd = (phi(CIRC, x, a + h) - phi(CIRC, x, a - h)) / (2 * h)
                errs.append(abs(fd - exact))
            if errs[1] > 1e-13:  # below that, round-off dominates
                order = np.log10(errs[0] / errs[1])
                assert order > 1.9


class TestChordDistance:
    def test_through_center(self):
        for a in (0.0, 2.0):
            assert chord_distance(CIRC, (0.0, 0.0), a) == pytest.approx(0.0, abs=1e-14)

    def test_radial_point(self):
        # x on the segment from the origin to R*alpha_vec: chord is radial
        a = 0.8
        x = 3.0 * np.array([np.cos(a), np.sin(a)])
        assert chord_distance(CIRC, x, a) == pytest.approx(0.0, abs=1e-12)

    def test_point_line_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            x = rng.uniform(-4, 4, 2)
            a = rng.uniform(0, 2 * np.pi)
            center = 10 * np.array([np.cos(a), np.sin(a)])
            oracle = point_line_distance(np.zeros(2), x, center)
            assert chord_distance(CIRC, x, a) == pytest.approx(oracle, abs=1e-12)


class TestDeltaPhi:
    def test_classical_is_one(self):
        rng = np.random.default_rng(4)
        for _ in range(50):
            x = rng.uniform(-5, 5, 2)
            a = rng.uniform(0, 2 * np.pi)
            assert delta_phi(RADON, x, a) == pytest.approx(1.0, abs=1e-14)

    def test_center_magnitude_one(self):
        assert abs(delta_phi(CIRC, (0.0, 0.0), 0.0)) == pytest.approx(1.0, abs=1e-14)

    def test_nonvanishing(self):
        rng = np.random.default_rng(5)
        for _ in range(200):
            x = rng.uniform(-9 / np.sqrt(2), 9 / np.sqrt(2), 2)
            a = rng.uniform(0, 2 * np.pi)
            assert abs(delta_phi(CIRC, x, a)) > 0

    def test_closed_form(self):
        # R * (Theta . alpha_vec) / rho, the simplified expression
        rng = np.random.default_rng(6)
        for _ in range(100):
            x = rng.uniform(-5, 5, 2)
            a = rng.uniform(0, 2 * np.pi)
            av = np.array([np.cos(a), np.sin(a)])
            theta = grad_x_phi(CIRC, x, a)
            rho = phi(CIRC, x, a)
            oracle = 10 * (theta @ av) / rho
            assert abs(delta_phi(CIRC, x, a)) == pytest.approx(abs(oracle), rel=1e-12)


class TestDualPoints:
    def test_center_symmetry(self):
        sol = dual_points(CIRC, (0.0, 0.0), (1.0, 0.0))
        assert sol.first.alpha == pytest.approx(0.0, abs=1e-15)
        assert sol.second.alpha == pytest.approx(np.pi, abs=1e-14)
        assert sol.first.rho == pytest.approx(10.0)
        assert sol.second.rho == pytest.approx(10.0)

    def test_center_any_direction(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            xi = rng.standard_normal(2)
            sol = dual_points(CIRC, (0.0, 0.0), xi)
            assert sol.first.rho == pytest.approx(10.0, abs=1e-12)
            assert sol.second.rho == pytest.approx(10.0, abs=1e-12)

    def test_residuals(self):
        rng = np.random.default_rng(8)
        for _ in range(200):
            x = rng.uniform(-6, 6, 2)
            xi = rng.standard_normal(2)
            if np.linalg.norm(xi) < 1e-3:
                continue
            sol = dual_points(CIRC, x, xi)
            for entry in (sol.first, sol.second):
                assert abs(phi(CIRC, x, entry.alpha) - entry.rho) < 1e-10
                grad = grad_x_phi(CIRC, x, entry.alpha)
                xin = xi / np.linalg.norm(xi)
                sin_angle = abs(grad[0] * xin[1] - grad[1] * xin[0])
                assert sin_angle < 1e-10

    def test_zero_covector_raises(self):
        with pytest.raises(ValueError):
            dual_points(CIRC, (1.0, 1.0), (0.0, 0.0))


class TestQ0:
    def test_paper_point(self):
        assert q0(CIRC, (1.2, 0.7), (0.3, -0.8)) == pytest.approx(4 * np.pi, abs=1e-10)

    def test_classical(self):
        assert q0(RADON, (3.0, 1.0), (0.2, 0.9)) == pytest.approx(4 * np.pi, abs=1e-12)

    def test_center(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            xi = rng.standard_normal(2)
            assert q0(CIRC, (0.0, 0.0), xi) == pytest.approx(4 * np.pi, abs=1e-10)

    def test_random_both_models(self):
        rng = np.random.default_rng(10)
        for _ in range(1000):
            x = rng.uniform(-9 / np.sqrt(2), 9 / np.sqrt(2), 2)
            xi = rng.standard_normal(2)
            if np.linalg.norm(xi) < 1e-6:
                continue
            assert abs(q0(CIRC, x, xi) - 4 * np.pi) < 1e-10
            assert abs(q0(RADON, x, xi) - 4 * np.pi) < 1e-10


class TestB0Symbol:
    def test_unit_frequency(self):
        v = b0_symbol(CIRC, (1.2, 0.7), (1.0, 0.0), kappa=0.5)
        assert v == pytest.approx(1.0 / (4 * np.pi + 0.5), rel=1e-12)

    def test_small_frequency_vanishes(self):
        v = b0_symbol(CIRC, (1.2, 0.7), (1e-8, 0.0), kappa=0.5)
        assert v < 1e-8

    def test_large_frequency(self):
        v = b0_symbol(CIRC, (1.2, 0.7), (10.0, 0.0), kappa=0.5)
        assert v == pytest.approx(10.0 / (4 * np.pi + 0.5 * 1000.0), rel=1e-12)

    def test_zero_raises(self):
        with pytest.raises(ValueError):
            b0_symbol(CIRC, (1.2, 0.7), (0.0, 0.0), kappa=0.5)
