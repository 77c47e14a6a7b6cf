"""Discrete forward projector, its exact transpose, and Dirichlet operators.

The forward map samples each data circle at a fixed arc step inside the
image rectangle and reads the image bilinearly; the backprojection scatters
the identical samples, so the pair passes a round-off-level adjoint test.
Inner products carry the grid quadrature weights: delta_alpha' * delta_rho'
on the data side, pixel^2 on the image side.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .geometry import CIRCULAR, GrtModel
from .sampling import DataGrid, Sinogram


@dataclass(frozen=True)
class ImageGrid:
    """Square-pixel raster over a rectangle, nodes at the cell corners."""

    x_lo: float
    x_hi: float
    y_lo: float
    y_hi: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise ValueError("need n >= 3")
        if not (self.x_hi > self.x_lo and self.y_hi > self.y_lo):
            raise ValueError("empty domain")
        if abs((self.x_hi - self.x_lo) - (self.y_hi - self.y_lo)) > 1e-12 * (self.x_hi - self.x_lo):
            raise ValueError("pixels must be square (equal side lengths)")

    @property
    def pixel(self) -> float:
        return (self.x_hi - self.x_lo) / (self.n - 1)

    @property
    def xs(self) -> np.ndarray:
        return self.x_lo + np.arange(self.n) * self.pixel

    @property
    def ys(self) -> np.ndarray:
        return self.y_lo + np.arange(self.n) * self.pixel

    @property
    def center(self) -> tuple:
        return (0.5 * (self.x_lo + self.x_hi), 0.5 * (self.y_lo + self.y_hi))

    @property
    def circumradius(self) -> float:
        return 0.5 * np.hypot(self.x_hi - self.x_lo, self.y_hi - self.y_lo)


@dataclass
class Image:
    grid: ImageGrid
    values: np.ndarray  # shape (n, n), values[i, j] = f(x_i, y_j)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n, self.grid.n):
            raise ValueError("values shape does not match grid")

    @classmethod
    def zeros(cls, grid: ImageGrid) -> "Image":
        return cls(grid, np.zeros((grid.n, grid.n)))

    def bilinear_at(self, point) -> float:
        """Bilinear read at a physical point inside the raster."""
        g = self.grid
        u = (point[0] - g.x_lo) / g.pixel
        v = (point[1] - g.y_lo) / g.pixel
        if not (0.0 <= u <= g.n - 1 and 0.0 <= v <= g.n - 1):
            raise ValueError("point outside the image raster")
        iu = min(int(u), g.n - 2)
        iv = min(int(v), g.n - 2)
        fu, fv = u - iu, v - iv
        f = self.values
        return float(
            (f[iu, iv] * (1 - fu) + f[iu + 1, iv] * fu) * (1 - fv)
            + (f[iu, iv + 1] * (1 - fu) + f[iu + 1, iv + 1] * fu) * fv
        )


@dataclass(frozen=True)
class ProjectorSpec:
    """Discretization of the circular transform over a data grid.

    Arc samples are spaced at most arc_step_factor * pixel apart along each
    circle.  adjoint_perturbation deliberately mis-scales the transpose and
    exists only so self-tests can prove the adjoint check has teeth.
    """

    model: GrtModel
    fine_grid: DataGrid
    arc_step_factor: float = 0.5
    adjoint_perturbation: float = 1.0

    def __post_init__(self):
        if not 0 < self.arc_step_factor <= 1:
            raise ValueError("arc_step_factor must be in (0, 1]")
        if self.model.kind != CIRCULAR:
            raise ValueError("the discrete projector implements the circular model")


def _check_domain(grid: ImageGrid, spec: ProjectorSpec):
    corners = np.array(
        [[grid.x_lo, grid.y_lo], [grid.x_lo, grid.y_hi], [grid.x_hi, grid.y_lo], [grid.x_hi, grid.y_hi]]
    )
    if np.max(np.linalg.norm(corners, axis=1)) >= spec.model.radius:
        raise ValueError("image domain must lie inside |x| < R")


def _geom_args(grid: ImageGrid, spec: ProjectorSpec):
    fg = spec.fine_grid
    cx, cy = grid.center
    return dict(
        n=grid.n,
        x_lo=grid.x_lo,
        y_lo=grid.y_lo,
        inv_px=1.0 / grid.pixel,
        R=spec.model.radius,
        n_af=fg.n_alpha,
        n_rf=fg.n_rho,
        d_al=fg.delta_alpha,
        rho_min=fg.rho_min,
        d_rho=fg.delta_rho,
        h=spec.arc_step_factor * grid.pixel,
        cx=cx,
        cy=cy,
        rc=grid.circumradius,
    )


N_CHUNKS = 16  # per-chunk buffers merged in order: scheduling-independent sums


def data_weight(spec: ProjectorSpec) -> float:
    fg = spec.fine_grid
    return fg.delta_alpha * fg.delta_rho


def forward_project(img: Image, spec: ProjectorSpec) -> Sinogram:
    """Circle integrals of the image over every fine-grid node."""
    _check_domain(img.grid, spec)
    a = _geom_args(img.grid, spec)
    out = np.zeros((spec.fine_grid.n_alpha, spec.fine_grid.n_rho))
    _kernels.forward_kernel(
        img.values, a["n"], a["x_lo"], a["y_lo"], a["inv_px"], a["R"],
        a["n_af"], a["n_rf"], a["d_al"], a["rho_min"], a["d_rho"], a["h"],
        a["cx"], a["cy"], a["rc"], out,
    )
    return Sinogram(spec.fine_grid, out)


def back_project(sino: Sinogram, grid: ImageGrid, spec: ProjectorSpec) -> Image:
    """Exact transpose of forward_project with quadrature weights folded in,
    so <forward(f), g>_data = <f, back(g)>_image to round-off."""
    if sino.grid != spec.fine_grid:
        raise ValueError("sinogram grid does not match the projector spec")
    _check_domain(grid, spec)
    a = _geom_args(grid, spec)
    w_scale = data_weight(spec) / grid.pixel**2 * spec.adjoint_perturbation
    vals = _kernels.back_kernel(
        sino.values, a["n"], a["x_lo"], a["y_lo"], a["inv_px"], a["R"],
        a["n_af"], a["n_rf"], a["d_al"], a["rho_min"], a["d_rho"], a["h"],
        a["cx"], a["cy"], a["rc"], w_scale, N_CHUNKS,
    )
    return Image(grid, vals)


def normal_residual(img: Image, g_values: np.ndarray, spec: ProjectorSpec):
    """Fused R^T(Rf - g) plus the data-term pieces of the objective.

    Returns (backprojected residual Image, sum (Rf-g)^2 over visited nodes,
    sum g^2 over visited nodes).  Bitwise-identical to composing
    forward_project and back_project on the residual.
    """
    _check_domain(img.grid, spec)
    a = _geom_args(img.grid, spec)
    w_scale = data_weight(spec) / img.grid.pixel**2 * spec.adjoint_perturbation
    vals, data_sq, g_sq = _kernels.fused_normal_kernel(
        img.values, g_values, a["n"], a["x_lo"], a["y_lo"], a["inv_px"], a["R"],
        a["n_af"], a["n_rf"], a["d_al"], a["rho_min"], a["d_rho"], a["h"],
        a["cx"], a["cy"], a["rc"], w_scale, N_CHUNKS,
    )
    return Image(img.grid, vals), float(data_sq), float(g_sq)


def neg_laplacian(img: Image) -> Image:
    """Five-point -Laplacian with Dirichlet zero outside the raster."""
    f = img.values
    p = np.pad(f, 1)
    lap = 4.0 * f - p[:-2, 1:-1] - p[2:, 1:-1] - p[1:-1, :-2] - p[1:-1, 2:]
    return Image(img.grid, lap / img.grid.pixel**2)


def grad_norm_sq(img: Image) -> float:
    """Discrete squared H1 seminorm: all forward differences against zero
    padding, which equals <f, -lap f> * pixel^2 by summation by parts."""
    f = img.values
    dx = np.diff(f, axis=0, prepend=0.0, append=0.0)
    dy = np.diff(f, axis=1, prepend=0.0, append=0.0)
    return float(np.sum(dx * dx) + np.sum(dy * dy))


def image_inner(a: Image, b: Image) -> float:
    return float(np.sum(a.values * b.values)) * a.grid.pixel**2


def data_inner(a: Sinogram, b: Sinogram) -> float:
    w = a.grid.delta_alpha * a.grid.delta_rho
    return float(np.sum(a.values * b.values)) * w


def zero_boundary(values: np.ndarray) -> np.ndarray:
    """Zero the outermost ring in place (H^1_0 constraint) and return it."""
    values[0, :] = 0.0
    values[-1, :] = 0.0
    values[:, 0] = 0.0
    values[:, -1] = 0.0
    return values
