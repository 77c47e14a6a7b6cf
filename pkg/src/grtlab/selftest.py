"""Release-gate self checks: the cross-module invariants in one report.

Each item re-derives a quantity through an independent route (dot-product
adjoint test, finite differences, analytic symbols, quadrature doubling) and
reports pass/fail; failures never raise.  A negative control deliberately
perturbs the backprojection weights to prove the adjoint test can fail.
"""

from __future__ import annotations

import numpy as np

from .geometry import GrtModel, grad_x_phi, phi, phi_alpha_prime, q0
from .harness import ExperimentConfig, kernel_spec, sigma_callable
from .keys import keys_kernel, keys_kernel_ft
from .operators import (
    Image,
    ImageGrid,
    ProjectorSpec,
    back_project,
    data_inner,
    forward_project,
    grad_norm_sq,
    image_inner,
    neg_laplacian,
)
from .sampling import DataGrid, DiskPhantom, NoiseSpec, Sinogram, build_grid, sample_noise, sigma_grid
from .solver import SolverConfig, TomoOperators, estimate_step, solve
from .theory import covariance, covariance_via_correlation, g_kernel, g_kernel_convolution


def _item(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def run_selftest(cfg: ExperimentConfig | None = None, negative_control: str | None = None) -> dict:
    cfg = cfg or ExperimentConfig()
    rng = np.random.default_rng(7)
    model = GrtModel(radius=cfg.R)
    items = []

    # symbol: q0 == 4*pi at random interior points, both models
    worst = 0.0
    classical = GrtModel(kind="classical-radon")
    for _ in range(200):
        x = rng.uniform(-0.9 * cfg.R / np.sqrt(2), 0.9 * cfg.R / np.sqrt(2), 2)
        xi = rng.standard_normal(2)
        worst = max(worst, abs(q0(model, x, xi) - 4 * np.pi))
        worst = max(worst, abs(q0(classical, x, xi) - 4 * np.pi))
    items.append(_item("q0-equals-4pi", worst < 1e-10, f"max |q0 - 4pi| = {worst:.2e}"))

    # adjoint test on a small operator pair (with optional deliberate bug)
    fine = build_grid(48, 65, cfg.R, cfg.R_rec)
    grid = ImageGrid(-cfg.R_rec, cfg.R_rec, -cfg.R_rec, cfg.R_rec, 33)
    perturb = 1.001 if negative_control == "adjoint" else 1.0
    pspec = ProjectorSpec(model, fine, arc_step_factor=0.5, adjoint_perturbation=perturb)
    worst = 0.0
    for _ in range(5):
        f = Image(grid, rng.standard_normal((33, 33)))
        g = Sinogram(fine, rng.standard_normal((48, 65)))
        lhs = data_inner(forward_project(f, pspec), g)
        rhs = image_inner(f, back_project(g, grid, pspec))
        worst = max(worst, abs(lhs - rhs) / (abs(lhs) + 1e-30))
    items.append(_item("adjoint-test", worst < 1e-10, f"max rel err = {worst:.2e}"))

    # gradient vs central finite difference of the objective
    ops = TomoOperators(grid, ProjectorSpec(model, fine, arc_step_factor=0.5))
    scfg = SolverConfig(eps=0.05, kappa=cfg.kappa, max_iters=50)
    f = Image(grid, rng.standard_normal((33, 33)))
    g = Sinogram(fine, rng.standard_normal((48, 65)))
    grad = ops.gradient(f, g, scfg)
    worst = 0.0
    for _ in range(3):
        v = rng.standard_normal((33, 33))
        v[0, :] = v[-1, :] = v[:, 0] = v[:, -1] = 0.0
        vimg = Image(grid, v)
        h = 1e-5
        fp = Image(grid, f.values + h * v)
        fm = Image(grid, f.values - h * v)
        fd = (ops.objective(fp, g, scfg) - ops.objective(fm, g, scfg)) / (2 * h)
        an = image_inner(grad, vimg)
        worst = max(worst, abs(fd - an) / (abs(an) + 1e-30))
    items.append(_item("gradient-finite-difference", worst < 1e-6, f"max rel err = {worst:.2e}"))

    # descent monotonicity on a small solve
    tau, L = estimate_step(scfg, ops)
    _, rep = solve(ops, g, scfg)
    mono = all(b <= a * (1 + 1e-12) for a, b in zip(rep.psi_history, rep.psi_history[1:]))
    items.append(_item("descent-monotone", mono, f"L = {L:.3f}, {rep.iterations} iterations"))

    # Keys kernel identities
    ok = (
        abs(keys_kernel(0.0) - 1.0) < 1e-14
        and max(abs(keys_kernel(float(k))) for k in (-2, -1, 1, 2)) < 1e-14
        and abs(keys_kernel(0.5) - 0.5625) < 1e-14
        and abs(keys_kernel_ft(0.0) - 1.0) < 1e-14
    )
    ts = rng.uniform(-3, 3, 64)
    pu = np.array([sum(keys_kernel(t - k) for k in range(-6, 7)) for t in ts])
    ok = ok and np.max(np.abs(pu - 1)) < 1e-12
    items.append(_item("keys-identities", ok, "node values, FT(0), partition of unity"))

    # noise scaling: empirical variance matches sigma^2 * delta_alpha
    cgrid = build_grid(30, 31, cfg.R, cfg.R_rec)
    ph = DiskPhantom(tuple(cfg.phantom_center), cfg.phantom_radius)
    node = (3, 15)
    draws = np.array(
        [
            sample_noise(cgrid, NoiseSpec(seed=99, trial=t), cfg.R, ph).values[node]
            for t in range(4000)
        ]
    )
    sig = sigma_grid(cgrid, cfg.R, ph, NoiseSpec(seed=99))[node]
    target = sig**2 * cgrid.delta_alpha
    rel = abs(np.var(draws) / target - 1) if target > 0 else 0.0
    items.append(_item("noise-scaling", rel < 0.1, f"rel err = {rel:.3f} over 4000 draws"))

    # theory cross-checks at reduced quadrature cost
    spec = kernel_spec(ExperimentConfig(x0=tuple(cfg.x0), kappa=cfg.kappa))
    spec = type(spec)(**{**spec.__dict__, "alpha_nodes": 400})
    al = 2.1
    worst = 0.0
    for q in (0.0, 1.5, 4.0):
        d = abs(g_kernel(spec.x0, al, q, spec) - g_kernel_convolution(spec.x0, al, q, spec))
        worst = max(worst, d)
    items.append(_item("g-two-routes", worst < 1e-6, f"max |direct - convolution| = {worst:.2e}"))
    c1 = covariance(np.array([0.5, -0.3]), spec)
    c2 = covariance_via_correlation(np.array([0.5, -0.3]), spec)
    rel = abs(c1 - c2) / abs(c1)
    items.append(_item("covariance-two-routes", rel < 1e-4, f"rel diff = {rel:.2e}"))

    if negative_control == "quadrature":
        spec = type(spec)(**{**spec.__dict__, "quadrature": type(spec.quadrature)(lambda_max=6.0, panels=4, nodes_per_panel=4)})
        c3 = covariance(np.zeros(2), spec)
        items.append(_item("quadrature-negative-control", abs(c3 - c1) > 1e-4, f"coarse C(0) = {c3:.5f}"))

    return {"items": items, "all_passed": all(i["passed"] for i in items)}
