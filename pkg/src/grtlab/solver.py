"""Tikhonov objective, exact discrete gradient, and fixed-step descent.

The objective is ||Rf - g||^2 on the fine data grid plus kappa * eps^3 times
the discrete squared gradient seminorm, minimized over images whose boundary
ring is pinned to zero.  The step is step_safety / L with L the largest
Hessian eigenvalue from power iteration, which makes the descent provably
monotone; iteration stops when either the sup-norm change drops below
tol_sup or the objective falls below tol_obj_rel times its initial value,
each counted separately until one criterion has fired stop_count times.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .operators import (
    Image,
    ImageGrid,
    ProjectorSpec,
    data_weight,
    grad_norm_sq,
    neg_laplacian,
    normal_residual,
    zero_boundary,
)
from .sampling import Sinogram


@dataclass
class SolverConfig:
    eps: float  # native data step (coarse delta_rho)
    kappa: float = 0.5
    tol_sup: float = 1e-4
    tol_obj_rel: float = 1e-6
    stop_count: int = 3
    max_iters: int = 5000
    step_safety: float = 0.9

    def __post_init__(self):
        if not (self.eps > 0 and self.kappa > 0):
            raise ValueError("eps and kappa must be positive")
        if not (self.tol_sup > 0 and self.tol_obj_rel > 0):
            raise ValueError("tolerances must be positive")
        if self.stop_count < 1:
            raise ValueError("stop_count must be at least 1")
        if not 0 < self.step_safety <= 1:
            raise ValueError("step_safety must be in (0, 1]")

    @property
    def reg_weight(self) -> float:
        return self.kappa * self.eps**3


@dataclass
class SolveReport:
    iterations: int = 0
    psi_history: list = field(default_factory=list)
    stop_reason: str = ""
    step_size: float = 0.0
    spectral_estimate: float = 0.0
    sup_changes: list = field(default_factory=list)

    def to_dict(self, history_cap: int = 200) -> dict:
        hist = self.psi_history
        if len(hist) > history_cap:
            stride = int(np.ceil(len(hist) / history_cap))
            hist = hist[::stride] + [self.psi_history[-1]]
        return {
            "iterations": self.iterations,
            "stop_reason": self.stop_reason,
            "step_size": self.step_size,
            "spectral_estimate": self.spectral_estimate,
            "final_psi": self.psi_history[-1] if self.psi_history else None,
            "psi_history": hist,
        }


class TomoOperators:
    """Projector pair bound to an image grid, with a cached step size."""

    def __init__(self, grid: ImageGrid, spec: ProjectorSpec):
        self.grid = grid
        self.spec = spec
        self._zeros_data = np.zeros((spec.fine_grid.n_alpha, spec.fine_grid.n_rho))
        self._step_cache: dict = {}

    def objective(self, f: Image, g_eps: Sinogram, cfg: SolverConfig) -> float:
        _, data_sq, g_sq = normal_residual(f, g_eps.values, self.spec)
        unvisited = float(np.sum(g_eps.values**2)) - g_sq
        return data_weight(self.spec) * (data_sq + unvisited) + cfg.reg_weight * grad_norm_sq(f)

    def gradient(self, f: Image, g_eps: Sinogram, cfg: SolverConfig) -> Image:
        bp, _, _ = normal_residual(f, g_eps.values, self.spec)
        g = 2.0 * (bp.values + cfg.reg_weight * neg_laplacian(f).values)
        return Image(f.grid, zero_boundary(g))

    def hessian_apply(self, v: Image, cfg: SolverConfig) -> Image:
        bp, _, _ = normal_residual(v, self._zeros_data, self.spec)
        h = 2.0 * (bp.values + cfg.reg_weight * neg_laplacian(v).values)
        return Image(v.grid, zero_boundary(h))


def estimate_step(cfg: SolverConfig, ops: TomoOperators, max_iters: int = 50, tol: float = 1e-3):
    """Power iteration for L = lambda_max(Hessian); returns (tau, L).

    tau = step_safety / L.  The estimate is cached on the operator bundle
    since it does not depend on the data.
    """
    key = (cfg.kappa, cfg.eps, cfg.step_safety)
    if key in ops._step_cache:
        return ops._step_cache[key]
    rng = np.random.Generator(np.random.Philox(key=[20240801, 0]))
    v = rng.standard_normal((ops.grid.n, ops.grid.n))
    zero_boundary(v)
    v /= np.linalg.norm(v)
    lam_prev = 0.0
    lam = 0.0
    for _ in range(max_iters):
        hv = ops.hessian_apply(Image(ops.grid, v), cfg).values
        norm = np.linalg.norm(hv)
        if norm == 0.0:
            raise RuntimeError("power iteration collapsed: zero operator")
        lam = float(np.sum(v * hv))
        v = hv / norm
        if lam_prev > 0 and abs(lam - lam_prev) <= tol * lam:
            break
        lam_prev = lam
    tau = cfg.step_safety / lam
    ops._step_cache[key] = (tau, lam)
    return tau, lam


def solve(ops: TomoOperators, g_eps: Sinogram, cfg: SolverConfig, tau: float | None = None):
    """Fixed-step gradient descent from f = 0 with the two-part stop rule."""
    if g_eps.grid != ops.spec.fine_grid:
        raise ValueError("data grid does not match the operator bundle")
    if tau is None:
        tau, lam = estimate_step(cfg, ops)
    else:
        lam = cfg.step_safety / tau
    report = SolveReport(step_size=tau, spectral_estimate=lam)

    f = Image.zeros(ops.grid)
    total_g_sq = float(np.sum(g_eps.values**2))
    w_d = data_weight(ops.spec)
    psi0 = w_d * total_g_sq
    unvisited_const = None  # fixed once the first pass reports visited g^2

    count_sup = 0
    count_obj = 0
    stop_reason = "max_iters"
    k = 0
    while k < cfg.max_iters:
        bp, data_sq, g_sq_vis = normal_residual(f, g_eps.values, ops.spec)
        if unvisited_const is None:
            unvisited_const = total_g_sq - g_sq_vis
        psi_k = w_d * (data_sq + unvisited_const) + cfg.reg_weight * grad_norm_sq(f)
        report.psi_history.append(psi_k)

        grad = 2.0 * (bp.values + cfg.reg_weight * neg_laplacian(f).values)
        zero_boundary(grad)
        step = tau * grad
        f = Image(ops.grid, f.values - step)
        k += 1

        sup_change = float(np.max(np.abs(step)))
        report.sup_changes.append(sup_change)
        if sup_change < cfg.tol_sup:
            count_sup += 1
        if psi_k <= cfg.tol_obj_rel * psi0:
            count_obj += 1
        if count_sup >= cfg.stop_count:
            stop_reason = "sup-change x%d" % cfg.stop_count
            break
        if count_obj >= cfg.stop_count:
            stop_reason = "objective x%d" % cfg.stop_count
            break

    report.iterations = k
    report.stop_reason = stop_reason
    return f, report
