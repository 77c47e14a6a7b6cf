import numpy as np
import pytest

from grtlab.sampling import (
    DataGrid,
    DiskPhantom,
    NoiseSpec,
    Sinogram,
    build_grid,
    disk_support,
    forward_disk,
    hard_threshold,
    interpolate_fine,
    sample_noise,
    sigma_grid,
    sigma_value,
)


@pytest.fixture(scope="module")
def paper_grid():
    return build_grid(300, 451, 10.0, 3.7)


class TestBuildGrid:
    def test_paper_constants(self, paper_grid):
        g = paper_grid
        assert g.delta_alpha == pytest.approx(0.0209440, abs=5e-7)
        assert g.delta_rho == pytest.approx(0.0232560, abs=5e-7)
        assert g.mu == pytest.approx(0.90057, abs=1e-5)
        assert g.rho_min == pytest.approx(4.76741, abs=1e-5)
        assert g.rho_max == pytest.approx(15.23259, abs=1e-5)
        assert g.eps == g.delta_rho

    def test_paper_impulse_node(self, paper_grid):
        g = paper_grid
        # the node the impulse experiment uses: alpha ~ 2.1, rho ~ 10.1
        assert g.alphas[100] == pytest.approx(2.0944, abs=1e-4)
        assert g.rhos[229] == pytest.approx(10.0930, abs=1e-4)
        # (100, 229) is the lattice node nearest the curve through x0
        rho_star = np.linalg.norm(np.array([1.2, 0.7]) - 10 * np.array([np.cos(g.alphas[100]), np.sin(g.alphas[100])]))
        assert abs(rho_star - g.rhos[229]) < g.delta_rho / 2

    def test_invalid_geometry(self):
        with pytest.raises(ValueError):
            build_grid(300, 451, 10.0, 8.0)
        with pytest.raises(ValueError):
            build_grid(2, 451, 10.0, 3.7)


class TestForwardDisk:
    PH = DiskPhantom((1.0, 1.0), 2.0)

    def test_tangency_zero(self):
        # construct alpha so that d = rho + r exactly: center on the x axis
        ph = DiskPhantom((0.0, 0.0), 2.0)
        d = 10.0
        rho = d - 2.0
        assert forward_disk(10.0, ph, 0.0, rho + 2.0) == 0.0  # d = rho... separate
        assert forward_disk(10.0, ph, 0.0, d - 2.0) == pytest.approx(0.0, abs=1e-12)

    def test_small_disk_limit(self):
        # circle through the disk center, r << rho: arc ~ 2r
        ph = DiskPhantom((0.0, 0.0), 0.01)
        val = forward_disk(10.0, ph, 0.0, 10.0)
        assert val == pytest.approx(0.02, abs=1e-6)

    def test_geometric_bound(self):
        # circle through the phantom center: arc inside <= 2 rho asin(r/rho)
        d = np.linalg.norm(10 * np.array([np.cos(0.3), np.sin(0.3)]) - np.array([1.0, 1.0]))
        rho = d
        val = forward_disk(10.0, self.PH, 0.3, rho)
        assert 0 < val <= 2 * rho * np.arcsin(2.0 / rho) * (1 + 1e-9)

    def test_continuity_at_tangency(self):
        ph = self.PH
        d = np.linalg.norm(10 * np.array([np.cos(1.0), np.sin(1.0)]) - np.array([1.0, 1.0]))
        rho_t = d + 2.0  # internal tangency from the rho side
        lo = forward_disk(10.0, ph, 1.0, rho_t - 1e-9)
        hi = forward_disk(10.0, ph, 1.0, rho_t + 1e-9)
        assert abs(lo - hi) < 1e-3

    def test_nonnegative_grid(self, paper_grid):
        g = paper_grid
        vals = forward_disk(10.0, self.PH, g.alphas[:, None], g.rhos[None, :])
        assert np.all(vals >= 0)
        assert vals.max() > 0


class TestSigma:
    def test_outside_support(self):
        assert sigma_value(0.3, 9.0, False) == 0.0

    def test_alpha_zero_rho_pi(self):
        assert sigma_value(0.0, np.pi, True) == pytest.approx(1.4, abs=1e-14)

    def test_quarter_turn(self):
        assert sigma_value(np.pi / 4, 0.0, True) == pytest.approx(0.9, abs=1e-14)

    def test_support_rule_is_intersection(self, paper_grid):
        g = paper_grid
        ph = DiskPhantom((1.0, 1.0), 2.0)
        supp = disk_support(10.0, ph, g.alphas[:, None], g.rhos[None, :])
        vals = forward_disk(10.0, ph, g.alphas[:, None], g.rhos[None, :])
        np.testing.assert_array_equal(supp, vals > 0)


class TestSampleNoise:
    PH = DiskPhantom((1.0, 1.0), 2.0)

    def test_zero_outside_support(self):
        g = build_grid(40, 41, 10.0, 3.7)
        noise = sample_noise(g, NoiseSpec(seed=1), 10.0, self.PH)
        supp = disk_support(10.0, self.PH, g.alphas[:, None], g.rhos[None, :])
        assert np.all(noise.values[~supp] == 0)
        assert np.any(noise.values[supp] != 0)

    def test_variance_scaling(self):
        # 1e5 draws at a fixed node: Var = sigma^2 * delta_alpha within 3%
        g = build_grid(40, 41, 10.0, 3.7)
        node = (5, 20)
        sig = sigma_grid(g, 10.0, self.PH, NoiseSpec(seed=2))[node]
        assert sig > 0
        rng = NoiseSpec(seed=2, trial=0).generator()
        draws = rng.uniform(-1.0, 1.0, 100000) * np.sqrt(3 * g.delta_alpha) * sig
        assert np.var(draws) == pytest.approx(sig**2 * g.delta_alpha, rel=0.03)

    def test_determinism(self):
        g = build_grid(40, 41, 10.0, 3.7)
        a = sample_noise(g, NoiseSpec(seed=3, trial=7), 10.0, self.PH)
        b = sample_noise(g, NoiseSpec(seed=3, trial=7), 10.0, self.PH)
        np.testing.assert_array_equal(a.values, b.values)
        c = sample_noise(g, NoiseSpec(seed=3, trial=8), 10.0, self.PH)
        assert not np.array_equal(a.values, c.values)


class TestHardThreshold:
    def make(self, vals):
        g = build_grid(4, 3, 10.0, 3.7)
        return Sinogram(g, np.asarray(vals, dtype=float).reshape(4, 3))

    def test_clean_data_kept(self):
        f_hat = self.make(np.linspace(-1, 1, 12))
        out = hard_threshold(f_hat, f_hat, c_bound=1.0)
        np.testing.assert_array_equal(out.values, f_hat.values)

    def test_boundary_kept_and_above_zeroed(self):
        f_hat = self.make(np.zeros(12))
        g = self.make([2.0, 2.0 + 1e-9] + [0.0] * 10)
        out = hard_threshold(g, f_hat, c_bound=1.0)
        assert out.values.flat[0] == 2.0
        assert out.values.flat[1] == 0.0

    def test_idempotent(self):
        rng = np.random.default_rng(0)
        f_hat = self.make(rng.uniform(-1, 1, 12))
        g = self.make(rng.uniform(-4, 4, 12))
        once = hard_threshold(g, f_hat, c_bound=1.0)
        twice = hard_threshold(once, f_hat, c_bound=1.0)
        np.testing.assert_array_equal(once.values, twice.values)

    def test_bound_validation(self):
        f_hat = self.make(np.full(12, 3.0))
        with pytest.raises(ValueError):
            hard_threshold(f_hat, f_hat, c_bound=1.0)
        with pytest.raises(ValueError):
            hard_threshold(f_hat, f_hat, c_bound=-1.0)


class TestInterpolateFine:
    def test_node_reproduction(self):
        g = build_grid(30, 31, 10.0, 3.7)
        rng = np.random.default_rng(1)
        s = Sinogram(g, rng.standard_normal((30, 31)))
        fine = interpolate_fine(s, 120, 121)
        np.testing.assert_allclose(fine.values[::4, ::4], s.values, atol=1e-12)

    def test_constant_reproduction_interior(self):
        g = build_grid(30, 31, 10.0, 3.7)
        s = Sinogram(g, np.full((30, 31), 2.5))
        fine = interpolate_fine(s, 120, 121)
        # periodic alpha: exact everywhere; rho: away from the zero-padded edge
        np.testing.assert_allclose(fine.values[:, 8:-8], 2.5, atol=1e-12)

    def test_linearity(self):
        g = build_grid(30, 31, 10.0, 3.7)
        rng = np.random.default_rng(2)
        s1 = Sinogram(g, rng.standard_normal((30, 31)))
        s2 = Sinogram(g, rng.standard_normal((30, 31)))
        lhs = interpolate_fine(Sinogram(g, 2.0 * s1.values + s2.values), 90, 91)
        rhs = 2.0 * interpolate_fine(s1, 90, 91).values + interpolate_fine(s2, 90, 91).values
        np.testing.assert_allclose(lhs.values, rhs, atol=1e-12)

    def test_separable_impulse_footprint(self):
        g = build_grid(30, 31, 10.0, 3.7)
        s = Sinogram.zeros(g)
        s.values[10, 15] = 1.0
        fine = interpolate_fine(s, 120, 121)
        from grtlab.keys import keys_kernel

        # fine node (41, 62): offsets (41/4 - 10, 62/4 - 15) coarse units
        expected = keys_kernel(41 / 4 - 10) * keys_kernel(62 / 4 - 15)
        assert fine.values[41, 62] == pytest.approx(expected, abs=1e-14)

    def test_wraparound_alpha(self):
        g = build_grid(30, 31, 10.0, 3.7)
        s = Sinogram.zeros(g)
        s.values[0, 15] = 1.0
        fine = interpolate_fine(s, 120, 121)
        # fine alpha node 119 is 1/4 coarse step before alpha = 0 (wraps)
        from grtlab.keys import keys_kernel

        expected = keys_kernel(119 / 4 - 30) * keys_kernel(0.0)
        assert fine.values[119, 60] == pytest.approx(expected, abs=1e-14)

    def test_grid_mismatch(self):
        g = build_grid(30, 31, 10.0, 3.7)
        s = Sinogram.zeros(g)
        with pytest.raises(ValueError):
            interpolate_fine(s, 20, 121)
