"""The two validation experiments and their orchestration.

impulse: reconstruct from a single unit data impulse and compare against the
predicted kernel field G evaluated on the reconstruction raster.

montecarlo: repeated noisy-disk reconstructions; the noise-only values at
two probe points (full reconstruction minus the cached noise-free one) are
aggregated into sample variance/covariance and compared with the predicted
variance and covariance, plus a chi-square Gaussianity check.

Every run writes a report.json embedding the fully resolved configuration
and its hash; trial records are checkpointed so long runs can resume.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.stats import chi2 as chi2_dist
from scipy.stats import norm as norm_dist

from . import gridio
from .geometry import GrtModel, grad_x_phi, phi
from .operators import Image, ImageGrid, ProjectorSpec, back_project, forward_project
from .sampling import (
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
    sigma_value,
)
from .solver import SolveReport, SolverConfig, TomoOperators, estimate_step, solve
from .theory import KernelSpec, QuadratureSpec, TheoryCurve, covariance, g_kernel, variance_at

FULL_SQUARE = "full"


@dataclass
class ExperimentConfig:
    mode: str = "selftest"
    profile: str = "paper"
    R: float = 10.0
    R_rec: float = 3.7
    n_alpha: int = 300
    n_rho: int = 451
    fine_alpha: int = 2400
    fine_rho: int = 3601
    recon_n: int = 801
    recon_domain: tuple = (1.0, 1.4, 0.5, 0.9)
    kappa: float = 0.5
    trials: int = 1500
    seed: int = 20250809
    x0: tuple = (1.2, 0.7)
    x_check: tuple = (1.24, -1.77)
    phantom_center: tuple = (1.0, 1.0)
    phantom_radius: float = 2.0
    arc_step_factor: float = 0.5
    max_iters: int = 5000
    alpha_nodes_theory: int = 2000
    out_dir: str = "out"

    def resolved(self) -> dict:
        d = asdict(self)
        for k, v in d.items():
            if isinstance(v, tuple):
                d[k] = list(v)
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.resolved(), sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


# Grid/domain presets per (mode, profile); trials and bands per profile.
_PROFILES = {
    ("impulse", "paper"): dict(n_alpha=300, n_rho=451, fine_alpha=2400, fine_rho=3601,
                               recon_n=801, recon_domain=(1.0, 1.4, 0.5, 0.9), trials=1),
    ("impulse", "desk"): dict(n_alpha=150, n_rho=226, fine_alpha=600, fine_rho=901,
                              recon_n=201, recon_domain=(1.0, 1.4, 0.5, 0.9), trials=1),
    ("montecarlo", "paper"): dict(n_alpha=300, n_rho=451, fine_alpha=1200, fine_rho=1801,
                                  recon_n=801, recon_domain=FULL_SQUARE, trials=1500),
    ("montecarlo", "desk"): dict(n_alpha=150, n_rho=226, fine_alpha=600, fine_rho=901,
                                 recon_n=201, recon_domain=FULL_SQUARE, trials=300,
                                 arc_step_factor=1.0),
}

IMPULSE_BAND = {"paper": 0.15, "desk": 0.25}
VARIANCE_BAND_PAPER = (0.034, 0.052)
VARIANCE_REL_BAND_DESK = 0.20
COVARIANCE_ABS_BAND_PAPER = 0.006
COVARIANCE_REL_BAND_DESK = 0.25
CHI2_SIGNIFICANCE = 0.01
HIST_BINS = 30
HIST_SPAN_SIGMAS = 4.0


def make_config(mode: str, profile: str = "paper", **overrides) -> ExperimentConfig:
    base = dict(mode=mode, profile=profile)
    base.update(_PROFILES.get((mode, profile), {}))
    base.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(**base)
    if cfg.recon_domain == FULL_SQUARE:
        cfg.recon_domain = (-cfg.R_rec, cfg.R_rec, -cfg.R_rec, cfg.R_rec)
    cfg.recon_domain = tuple(cfg.recon_domain)
    cfg.x0 = tuple(cfg.x0)
    cfg.x_check = tuple(cfg.x_check)
    cfg.phantom_center = tuple(cfg.phantom_center)
    return cfg


def load_config(path, mode=None, profile=None, **overrides) -> ExperimentConfig:
    data = gridio.read_json(path)
    mode = mode or data.pop("mode", "selftest")
    profile = profile or data.pop("profile", "paper")
    data.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(mode, profile, **data)


def coarse_grid(cfg: ExperimentConfig) -> DataGrid:
    return build_grid(cfg.n_alpha, cfg.n_rho, cfg.R, cfg.R_rec)


def recon_grid(cfg: ExperimentConfig) -> ImageGrid:
    d = cfg.recon_domain
    return ImageGrid(d[0], d[1], d[2], d[3], cfg.recon_n)


def model_of(cfg: ExperimentConfig) -> GrtModel:
    return GrtModel(kind="circular", radius=cfg.R)


def phantom_of(cfg: ExperimentConfig) -> DiskPhantom:
    return DiskPhantom(tuple(cfg.phantom_center), cfg.phantom_radius)


def sigma_callable(cfg: ExperimentConfig):
    ph = phantom_of(cfg)

    def sigma(alpha, rho):
        supp = disk_support(cfg.R, ph, alpha, rho)
        return sigma_value(alpha, rho, supp)

    return sigma


def kernel_spec(cfg: ExperimentConfig) -> KernelSpec:
    grid = coarse_grid(cfg)
    return KernelSpec(
        model=model_of(cfg),
        x0=tuple(cfg.x0),
        kappa=cfg.kappa,
        mu=grid.mu,
        quadrature=QuadratureSpec(),
        alpha_nodes=cfg.alpha_nodes_theory,
        sigma=sigma_callable(cfg),
    )


def projector_spec(cfg: ExperimentConfig, fine: DataGrid) -> ProjectorSpec:
    return ProjectorSpec(model_of(cfg), fine, arc_step_factor=cfg.arc_step_factor)


def solver_config(cfg: ExperimentConfig, grid: DataGrid) -> SolverConfig:
    return SolverConfig(eps=grid.eps, kappa=cfg.kappa, max_iters=cfg.max_iters)


def impulse_index(cfg: ExperimentConfig, grid: DataGrid):
    """Data node nearest the curve through x0 at alpha = 2*pi/3."""
    j1 = int(round(grid.n_alpha / 3))
    rho_star = float(phi(model_of(cfg), np.asarray(cfg.x0), grid.alphas[j1]))
    j2 = int(round((rho_star - grid.rho_min) / grid.delta_rho))
    return j1, j2


def _base_report(cfg: ExperimentConfig) -> dict:
    return {
        "config": cfg.resolved(),
        "config_hash": cfg.config_hash(),
        "timestamps": {"finished": time.strftime("%Y-%m-%dT%H:%M:%S")},
    }


@dataclass
class ImpulseReport:
    recon: Image
    theory: Image
    diff: Image
    sup_err_interior: float
    peak_to_trough: float
    band: float
    passed: bool
    solve_report: SolveReport
    impulse_node: tuple

    def summary(self) -> dict:
        return {
            "sup_err_interior": self.sup_err_interior,
            "peak_to_trough": self.peak_to_trough,
            "ratio": self.sup_err_interior / self.peak_to_trough,
            "band": self.band,
            "passed": bool(self.passed),
            "impulse_node": list(self.impulse_node),
            "solver": self.solve_report.to_dict(),
        }


def theory_field(cfg: ExperimentConfig, grid: ImageGrid, j1: int, j2: int) -> Image:
    """G(x0, alpha_j1, (phi(x, alpha_j1) - rho_j2) / eps) over the raster.

    G is tabulated on a dense 1-D offset grid and cubic-splined onto the
    pixel offsets; G is smooth, so the spline error is far below the
    comparison bands.
    """
    cg = coarse_grid(cfg)
    spec = kernel_spec(cfg)
    al = cg.alphas[j1]
    rho_j2 = cg.rhos[j2]
    xs, ys = grid.xs, grid.ys
    xx, yy = np.meshgrid(xs, ys, indexing="ij")
    pts = np.stack([xx, yy], axis=-1)
    q = (phi(model_of(cfg), pts, al) - rho_j2) / cg.eps
    qgrid = np.arange(q.min() - 0.01, q.max() + 0.01, 0.002)
    gvals = g_kernel(spec.x0, al, qgrid, spec)
    return Image(grid, CubicSpline(qgrid, gvals)(q))


def run_impulse(cfg: ExperimentConfig, out_dir=None) -> ImpulseReport:
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cg = coarse_grid(cfg)
    j1, j2 = impulse_index(cfg, cg)
    coarse = Sinogram.zeros(cg)
    coarse.values[j1, j2] = 1.0
    fine = interpolate_fine(coarse, cfg.fine_alpha, cfg.fine_rho)

    grid = recon_grid(cfg)
    ops = TomoOperators(grid, projector_spec(cfg, fine.grid))
    recon, srep = solve(ops, fine, solver_config(cfg, cg))

    theory = theory_field(cfg, grid, j1, j2)
    diff = Image(grid, recon.values - theory.values)

    n = grid.n
    lo = int(round(0.1 * (n - 1)))
    hi = n - lo
    sup_err = float(np.max(np.abs(diff.values[lo:hi, lo:hi])))
    ptt = float(theory.values.max() - theory.values.min())
    band = IMPULSE_BAND.get(cfg.profile, 0.15)
    rep = ImpulseReport(
        recon=recon,
        theory=theory,
        diff=diff,
        sup_err_interior=sup_err,
        peak_to_trough=ptt,
        band=band,
        passed=sup_err <= band * ptt,
        solve_report=srep,
        impulse_node=(j1, j2),
    )

    gridio.write_image_raw(out / "impulse_recon.raw", recon)
    gridio.write_image_raw(out / "impulse_theory.raw", theory)
    gridio.write_image_raw(out / "impulse_diff.raw", diff)
    row = int(round((cfg.x0[1] - grid.y_lo) / grid.pixel))
    cross = np.column_stack(
        [grid.xs, recon.values[:, row], theory.values[:, row], diff.values[:, row]]
    )
    with open(out / "impulse_cross_section.csv", "w") as fh:
        fh.write("x,recon,theory,diff\n")
        np.savetxt(fh, cross, delimiter=",")
    payload = _base_report(cfg)
    payload["impulse"] = rep.summary()
    gridio.write_json(out / "report.json", payload)
    return rep


@dataclass
class StatsReport:
    trials: int
    sample_var_x0: float
    sample_var_x1: float
    sample_cov: float
    predicted_var: float
    predicted_cov: float
    values_x0: np.ndarray
    values_x1: np.ndarray
    failed_trials: int = 0
    verdicts: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)

    def summary(self) -> dict:
        return {
            "trials": self.trials,
            "failed_trials": self.failed_trials,
            "sample_var_x0": self.sample_var_x0,
            "sample_var_x1": self.sample_var_x1,
            "sample_cov": self.sample_cov,
            "predicted_var": self.predicted_var,
            "predicted_cov": self.predicted_cov,
            "verdicts": self.verdicts,
            "provenance": self.provenance,
        }


def compare_theory(values_x0, values_x1, predicted_var, predicted_cov, profile: str) -> dict:
    """Per-band verdicts: variance z-scores, band membership, chi-square GOF."""
    v0 = np.asarray(values_x0, dtype=float)
    v1 = np.asarray(values_x1, dtype=float)
    n = len(v0)
    out: dict = {"n": n}
    if n < 2 or np.allclose(v0, v0[0]):
        out["error"] = "degenerate sample: variance undefined or zero"
        out["passed"] = False
        return out
    var0 = float(np.var(v0, ddof=1))
    var1 = float(np.var(v1, ddof=1))
    cov = float(np.cov(v0, v1, ddof=1)[0, 1])
    se_var = predicted_var * np.sqrt(2.0 / (n - 1))
    out["z_var_x0"] = (var0 - predicted_var) / se_var
    out["z_var_x1"] = (var1 - predicted_var) / se_var
    if profile == "paper":
        lo, hi = VARIANCE_BAND_PAPER
        out["var_x0_pass"] = bool(lo <= var0 <= hi)
        out["var_x1_pass"] = bool(lo <= var1 <= hi)
        out["cov_pass"] = bool(abs(cov - predicted_cov) <= COVARIANCE_ABS_BAND_PAPER)
    else:
        out["var_x0_pass"] = bool(abs(var0 / predicted_var - 1) <= VARIANCE_REL_BAND_DESK)
        out["var_x1_pass"] = bool(abs(var1 / predicted_var - 1) <= VARIANCE_REL_BAND_DESK)
        out["cov_pass"] = bool(abs(cov / predicted_cov - 1) <= COVARIANCE_REL_BAND_DESK)

    # chi-square goodness of fit of x0 values against N(0, predicted_var),
    # equal-probability bins, expected count >= 5, at least 10 bins
    k = max(10, min(20, n // 15))
    if n / k < 5:
        out["chi2_error"] = "insufficient trials for chi-square binning"
        out["gauss_pass"] = False
    else:
        edges = norm_dist.ppf(np.linspace(0, 1, k + 1), loc=0, scale=np.sqrt(predicted_var))
        counts, _ = np.histogram(v0, bins=edges)
        expected = n / k
        stat = float(np.sum((counts - expected) ** 2 / expected))
        pval = float(chi2_dist.sf(stat, df=k - 1))
        out["chi2_stat"] = stat
        out["chi2_dof"] = k - 1
        out["chi2_p"] = pval
        out["gauss_pass"] = bool(pval >= CHI2_SIGNIFICANCE)
    out["passed"] = bool(
        out["var_x0_pass"] and out["var_x1_pass"] and out["cov_pass"] and out["gauss_pass"]
    )
    return out


def _records_path(out: Path, cfg: ExperimentConfig) -> Path:
    return out / f"records_{cfg.config_hash()}.csv"


def _load_records(path: Path):
    if not path.exists():
        return {}
    recs = {}
    with open(path) as fh:
        header = fh.readline()
        for line in fh:
            t, a, b = line.strip().split(",")
            recs[int(t)] = (float(a), float(b))
    return recs


def run_montecarlo(cfg: ExperimentConfig, out_dir=None, progress=False) -> StatsReport:
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    mdl = model_of(cfg)
    cg = coarse_grid(cfg)
    ph = phantom_of(cfg)
    eps = cg.eps
    x0 = np.asarray(cfg.x0, dtype=float)
    x1 = x0 + eps * np.asarray(cfg.x_check, dtype=float)

    spec = kernel_spec(cfg)
    predicted_var = variance_at(spec)
    predicted_cov = covariance(np.asarray(cfg.x_check, dtype=float), spec)

    f_hat = Sinogram(cg, forward_disk(cfg.R, ph, cg.alphas[:, None], cg.rhos[None, :]))
    c_bound = 1.05 * float(np.max(np.abs(f_hat.values)))

    grid = recon_grid(cfg)
    scfg = solver_config(cfg, cg)

    # noise-free reconstruction, computed once and reused by every trial
    clean_fine = interpolate_fine(f_hat, cfg.fine_alpha, cfg.fine_rho)
    ops = TomoOperators(grid, projector_spec(cfg, clean_fine.grid))
    clean_path = out / f"clean_{cfg.config_hash()}.raw"
    if clean_path.exists():
        clean = gridio.read_image_raw(clean_path)
    else:
        clean, _ = solve(ops, clean_fine, scfg)
        gridio.write_image_raw(clean_path, clean)
    clean0 = clean.bilinear_at(x0)
    clean1 = clean.bilinear_at(x1)

    rec_path = _records_path(out, cfg)
    records = _load_records(rec_path)
    failed = 0
    mode = "a" if rec_path.exists() else "w"
    with open(rec_path, mode) as fh:
        if mode == "w":
            fh.write("trial,v0,v1\n")
        for t in range(cfg.trials):
            if t in records:
                continue
            noise = sample_noise(cg, NoiseSpec(seed=cfg.seed, trial=t), cfg.R, ph)
            g = Sinogram(cg, f_hat.values + noise.values)
            g = hard_threshold(g, f_hat, c_bound)
            g_fine = interpolate_fine(g, cfg.fine_alpha, cfg.fine_rho)
            try:
                recon, _ = solve(ops, g_fine, scfg)
            except Exception:
                failed += 1
                continue
            v0 = recon.bilinear_at(x0) - clean0
            v1 = recon.bilinear_at(x1) - clean1
            records[t] = (v0, v1)
            fh.write(f"{t},{v0!r},{v1!r}\n")
            fh.flush()
            if progress:
                print(f"[trial {t + 1}/{cfg.trials}] v0={v0:+.4f} v1={v1:+.4f}", flush=True)

    order = sorted(records)
    v0s = np.array([records[t][0] for t in order])
    v1s = np.array([records[t][1] for t in order])
    verdicts = compare_theory(v0s, v1s, predicted_var, predicted_cov, cfg.profile)
    report = StatsReport(
        trials=len(order),
        sample_var_x0=float(np.var(v0s, ddof=1)),
        sample_var_x1=float(np.var(v1s, ddof=1)),
        sample_cov=float(np.cov(v0s, v1s, ddof=1)[0, 1]),
        predicted_var=predicted_var,
        predicted_cov=predicted_cov,
        values_x0=v0s,
        values_x1=v1s,
        failed_trials=failed,
        verdicts=verdicts,
        provenance={"seed": cfg.seed, "config_hash": cfg.config_hash(),
                    "probe_x1": list(x1), "noise_free_value_x0": clean0},
    )

    # histogram export: 30 uniform bins over +/- 4 predicted standard deviations
    span = HIST_SPAN_SIGMAS * np.sqrt(predicted_var)
    edges = np.linspace(-span, span, HIST_BINS + 1)
    h0, _ = np.histogram(v0s, bins=edges)
    h1, _ = np.histogram(v1s, bins=edges)
    centers = 0.5 * (edges[:-1] + edges[1:])
    pdf = norm_dist.pdf(centers, scale=np.sqrt(predicted_var))
    with open(out / "histogram.csv", "w") as fh:
        fh.write("bin_lo,bin_hi,count_x0,count_x1,predicted_pdf\n")
        np.savetxt(fh, np.column_stack([edges[:-1], edges[1:], h0, h1, pdf]), delimiter=",")

    payload = _base_report(cfg)
    payload["montecarlo"] = report.summary()
    gridio.write_json(out / "report.json", payload)
    return report


def run_theory(cfg: ExperimentConfig, out_dir=None) -> dict:
    out = Path(out_dir or cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cg = coarse_grid(cfg)
    spec = kernel_spec(cfg)
    j1, j2 = impulse_index(cfg, cg)
    al = cg.alphas[j1]
    qs = np.linspace(-10, 10, 801)
    gridio.write_curve_csv(out / "g_curve.csv", TheoryCurve(qs, np.asarray(g_kernel(spec.x0, al, qs, spec)), "G-vs-q"))
    c0 = variance_at(spec)
    cx = covariance(np.asarray(cfg.x_check), spec)
    direction = np.asarray(cfg.x_check, dtype=float)
    offs = np.linspace(0, 2.5, 26)
    vals = np.array([covariance(s * direction / np.linalg.norm(direction), spec) for s in offs])
    gridio.write_curve_csv(out / "c_curve.csv", TheoryCurve(offs, vals, "C-vs-offset"))
    payload = _base_report(cfg)
    payload["theory"] = {"variance": c0, "covariance_at_x_check": cx,
                         "impulse_node": [j1, j2], "alpha": al}
    gridio.write_json(out / "report.json", payload)
    return payload["theory"]
