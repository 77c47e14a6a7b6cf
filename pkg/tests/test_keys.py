import numpy as np
import pytest

from grtlab.keys import (
    bspline2,
    bspline3,
    interp_matrix_open,
    interp_matrix_periodic,
    keys_kernel,
    keys_kernel_ft,
)


def bspline_recursive(n, t):
    """Cox-de Boor oracle for the centered cardinal B-spline of degree n."""
    if n == 0:
        return 1.0 if -0.5 <= t < 0.5 else 0.0
    # B_n = int_{t-1/2}^{t+1/2} B_{n-1}; do it by the two-term recursion on
    # the shifted (knots 0..n+1) spline N_n(u) with u = t + (n+1)/2
    def N(k, u):
        if k == 0:
            return 1.0 if 0 <= u < 1 else 0.0
        return (u / k) * N(k - 1, u) + ((k + 1 - u) / k) * N(k - 1, u - 1)

    return N(n, t + (n + 1) / 2)


class TestBSplines:
    def test_values_against_recursion(self):
        for t in np.linspace(-2.2, 2.2, 89):
            assert bspline2(t) == pytest.approx(bspline_recursive(2, t), abs=1e-12)
            assert bspline3(t) == pytest.approx(bspline_recursive(3, t), abs=1e-12)

    def test_known_nodes(self):
        assert bspline3(0.0) == pytest.approx(2 / 3)
        assert bspline3(0.5) == pytest.approx(23 / 48)
        assert bspline2(0.0) == pytest.approx(3 / 4)
        assert bspline2(0.5) == pytest.approx(1 / 2)
        assert bspline2(1.0) == pytest.approx(1 / 8)


class TestKeysKernel:
    def test_interpolation_nodes(self):
        # oracle: 3*B3(0) - 2*B2(1/2) = 2 - 1 = 1, and zeros at nonzero integers
        assert keys_kernel(0.0) == pytest.approx(1.0, abs=1e-14)
        for k in (-2.0, -1.0, 1.0, 2.0):
            assert keys_kernel(k) == pytest.approx(0.0, abs=1e-14)

    def test_half_value(self):
        # 3*B3(1/2) - (B2(0) + B2(1)) = 69/48 - 42/48
        assert keys_kernel(0.5) == pytest.approx(0.5625, abs=1e-14)

    def test_even_and_supported(self):
        ts = np.linspace(-3, 3, 301)
        np.testing.assert_allclose(keys_kernel(ts), keys_kernel(-ts), atol=1e-15)
        assert np.all(keys_kernel(ts[np.abs(ts) >= 2]) == 0)

    def test_partition_of_unity(self):
        rng = np.random.default_rng(0)
        for t in rng.uniform(-10, 10, 50):
            total = sum(keys_kernel(t - k) for k in range(-13, 14))
            assert total == pytest.approx(1.0, abs=1e-12)


class TestKeysKernelFT:
    def test_at_zero(self):
        assert keys_kernel_ft(0.0) == pytest.approx(1.0, abs=1e-14)

    def test_at_two_pi(self):
        assert keys_kernel_ft(2 * np.pi) == pytest.approx(0.0, abs=1e-14)

    def test_even(self):
        lam = np.linspace(-20, 20, 101)
        np.testing.assert_allclose(keys_kernel_ft(lam), keys_kernel_ft(-lam), atol=1e-15)

    def test_quadrature_oracle(self):
        # independent oracle: int i(t) exp(i lam t) dt by dense Simpson
        t = np.linspace(-2, 2, 16001)
        vals = keys_kernel(t)
        from scipy.integrate import simpson

        for lam in (0.5, 1.0, 3.0):
            numeric = simpson(vals * np.cos(lam * t), x=t)
            assert keys_kernel_ft(lam) == pytest.approx(numeric, abs=1e-8)


class TestInterpMatrices:
    def test_node_reproduction_open(self):
        # fine grid an 8x refinement: coarse nodes are fine nodes
        w = interp_matrix_open(11, 81)
        rng = np.random.default_rng(1)
        c = rng.standard_normal(11)
        f = w @ c
        np.testing.assert_allclose(f[::8], c, atol=1e-12)

    def test_node_reproduction_periodic(self):
        w = interp_matrix_periodic(10, 40)
        rng = np.random.default_rng(2)
        c = rng.standard_normal(10)
        f = w @ c
        np.testing.assert_allclose(f[::4], c, atol=1e-12)

    def test_constant_reproduction_interior(self):
        w = interp_matrix_open(11, 81)
        f = w @ np.ones(11)
        # partition of unity holds where the stencil does not hit the edge
        interior = slice(2 * 8, -2 * 8)
        np.testing.assert_allclose(f[interior], 1.0, atol=1e-12)

    def test_constant_reproduction_periodic_everywhere(self):
        w = interp_matrix_periodic(12, 60)
        np.testing.assert_allclose(w @ np.ones(12), 1.0, atol=1e-12)
