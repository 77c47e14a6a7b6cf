"""Data lattice, disk phantom, scaled noise, thresholding, and refinement.

The measurement lattice covers alpha in [0, 2*pi) periodically and rho in
[rho_min, rho_max] with rho_min = R - R_rec*sqrt(2), rho_max = R + R_rec*sqrt(2),
so every circle meeting the square reconstruction region is sampled.  The
native scale is eps = delta_rho.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .keys import interp_matrix_open, interp_matrix_periodic


@dataclass(frozen=True)
class DataGrid:
    """The (alpha, rho) measurement lattice."""

    n_alpha: int
    n_rho: int
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if self.n_alpha < 4 or self.n_rho < 2:
            raise ValueError("grid too small")
        if not self.rho_max > self.rho_min > 0:
            raise ValueError("need 0 < rho_min < rho_max")

    @property
    def delta_alpha(self) -> float:
        return 2 * np.pi / self.n_alpha

    @property
    def delta_rho(self) -> float:
        return (self.rho_max - self.rho_min) / (self.n_rho - 1)

    @property
    def eps(self) -> float:
        return self.delta_rho

    @property
    def mu(self) -> float:
        return self.delta_alpha / self.delta_rho

    @property
    def alphas(self) -> np.ndarray:
        return np.arange(self.n_alpha) * self.delta_alpha

    @property
    def rhos(self) -> np.ndarray:
        return self.rho_min + np.arange(self.n_rho) * self.delta_rho


def build_grid(n_alpha: int, n_rho: int, R: float, R_rec: float) -> DataGrid:
    """Lattice sized so that rho spans R -/+ R_rec*sqrt(2)."""
    if not 0 < R_rec * np.sqrt(2) < R:
        raise ValueError("need 0 < R_rec*sqrt(2) < R")
    return DataGrid(
        n_alpha=n_alpha,
        n_rho=n_rho,
        rho_min=R - R_rec * np.sqrt(2),
        rho_max=R + R_rec * np.sqrt(2),
    )


@dataclass
class Sinogram:
    grid: DataGrid
    values: np.ndarray  # shape (n_alpha, n_rho)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_alpha, self.grid.n_rho):
            raise ValueError("values shape does not match grid")

    @classmethod
    def zeros(cls, grid: DataGrid) -> "Sinogram":
        return cls(grid, np.zeros((grid.n_alpha, grid.n_rho)))


@dataclass(frozen=True)
class DiskPhantom:
    """Indicator of a disk; the test object of the noise experiments."""

    center: tuple = (1.0, 1.0)
    radius: float = 2.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")


def forward_disk(R: float, phantom: DiskPhantom, alpha, rho):
    """Arc length of the circle (alpha, rho) inside the phantom disk.

    With d the distance from the circle center R*alpha_vec to the disk
    center: 0 when the circle misses the disk, 2*pi*rho when it lies inside,
    else 2*rho*arccos((d^2 + rho^2 - r^2) / (2*d*rho)).
    """
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    cx = R * np.cos(alpha) - phantom.center[0]
    cy = R * np.sin(alpha) - phantom.center[1]
    d = np.hypot(cx, cy)
    r = phantom.radius
    out = np.zeros(np.broadcast(d, rho).shape)
    d, rho = np.broadcast_arrays(d, rho)
    inside = d + rho <= r
    out[inside] = 2 * np.pi * rho[inside]
    crossing = (~inside) & (d < rho + r) & (rho < d + r)
    arg = (d[crossing] ** 2 + rho[crossing] ** 2 - r**2) / (2 * d[crossing] * rho[crossing])
    out[crossing] = 2 * rho[crossing] * np.arccos(np.clip(arg, -1.0, 1.0))
    if out.ndim == 0:
        return float(out)
    return out


def disk_support(R: float, phantom: DiskPhantom, alpha, rho):
    """True where the circle (alpha, rho) meets the phantom disk."""
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    cx = R * np.cos(alpha) - phantom.center[0]
    cy = R * np.sin(alpha) - phantom.center[1]
    d = np.hypot(cx, cy)
    return np.abs(d - rho) < phantom.radius


def sigma_value(alpha, rho, support, a: float = 0.5, b: float = 0.4):
    """Noise level (1 + a*sin(2*alpha)) * (1 - b*cos(rho)) on the data support."""
    alpha = np.asarray(alpha, dtype=float)
    rho = np.asarray(rho, dtype=float)
    return (1 + a * np.sin(2 * alpha)) * (1 - b * np.cos(rho)) * np.asarray(support)


@dataclass(frozen=True)
class NoiseSpec:
    """Seeded, per-trial noise stream drawn uniform on [-1, 1].

    Streams are counter-based (Philox keyed by (seed, trial)), so distinct
    trials are independent and order-free.
    """

    seed: int = 0
    trial: int = 0
    sigma_a: float = 0.5
    sigma_b: float = 0.4

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(key=[self.seed, self.trial]))


def sigma_grid(grid: DataGrid, R: float, phantom: DiskPhantom, spec: NoiseSpec) -> np.ndarray:
    """sigma evaluated on every lattice node, zero off the data support."""
    al = grid.alphas[:, None]
    rho = grid.rhos[None, :]
    supp = disk_support(R, phantom, al, rho)
    return sigma_value(al, rho, supp, spec.sigma_a, spec.sigma_b)


def sample_noise(grid: DataGrid, spec: NoiseSpec, R: float, phantom: DiskPhantom) -> Sinogram:
    """Draw one noise realization: u * sqrt(3*delta_alpha) * sigma(y).

    With u uniform on [-1, 1] (variance 1/3) the entries have variance
    sigma(y)^2 * delta_alpha.
    """
    rng = spec.generator()
    u = rng.uniform(-1.0, 1.0, size=(grid.n_alpha, grid.n_rho))
    scale = np.sqrt(3 * grid.delta_alpha) * sigma_grid(grid, R, phantom, spec)
    return Sinogram(grid, u * scale)


def hard_threshold(g: Sinogram, f_hat: Sinogram, c_bound: float) -> Sinogram:
    """Keep g where |g| <= 2*c_bound, zero elsewhere.

    c_bound must dominate the noise-free data so clean samples are never
    zeroed.
    """
    if not c_bound > 0:
        raise ValueError("c_bound must be positive")
    if np.max(np.abs(f_hat.values)) > c_bound:
        raise ValueError("c_bound smaller than the noise-free data bound")
    kept = np.where(np.abs(g.values) <= 2 * c_bound, g.values, 0.0)
    return Sinogram(g.grid, kept)


_interp_cache: dict = {}


def interpolate_fine(coarse: Sinogram, n_alpha_fine: int, n_rho_fine: int) -> Sinogram:
    """Keys interpolation onto a denser lattice with the same rho span.

    The alpha axis wraps periodically; the rho axis reads zero beyond the
    grid.  Fine nodes that coincide with coarse nodes reproduce the coarse
    values exactly.
    """
    g = coarse.grid
    if n_alpha_fine < g.n_alpha or n_rho_fine < g.n_rho:
        raise ValueError("fine grid must be at least as dense as the coarse grid")
    key = (g.n_alpha, g.n_rho, n_alpha_fine, n_rho_fine)
    if key not in _interp_cache:
        _interp_cache[key] = (
            interp_matrix_periodic(g.n_alpha, n_alpha_fine),
            interp_matrix_open(g.n_rho, n_rho_fine),
        )
    wa, wr = _interp_cache[key]
    fine_vals = wa @ coarse.values
    fine_vals = (wr @ fine_vals.T).T
    fine_grid = DataGrid(n_alpha_fine, n_rho_fine, g.rho_min, g.rho_max)
    return Sinogram(fine_grid, np.ascontiguousarray(fine_vals))
