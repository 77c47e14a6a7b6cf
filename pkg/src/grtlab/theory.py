"""Closed-form noise predictions: the limit kernel G and the covariance C.

Everything here is deterministic quadrature of the frequency-domain
formulas.  The reconstruction symbol is lam / (Q0 + kappa*lam^3) with
Q0 = 4*pi from the geometry; multiplying by the interpolation-kernel
transforms in both lattice directions gives the per-measurement impulse
kernel

    G(x, alpha, q) = (mu*W/pi) * int_0^inf sym(lam) cos(lam q) dlam,
    sym(lam) = lam/(Q0 + kappa lam^3) * ft(lam) * ft(mu a(x,alpha) lam),

where a is the chord distance (circular) or |alpha_perp . x| (classical).
The covariance of the limiting noise field is the alpha-average of the
squared symbol with phase Theta . xcheck, weighted by sigma^2 on the curves
through x0.  A real-space route (K0 convolved with vartheta, correlated on a
t-grid) provides an independent cross-check of the same quantities.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.special import sici

from .geometry import GrtModel, grad_x_phi, phi, phi_alpha_prime, q0
from .keys import keys_kernel, keys_kernel_ft


@dataclass(frozen=True)
class QuadratureSpec:
    """Frequency quadrature: composite Gauss-Legendre on [0, lambda_max].

    The integrand of G decays like lam^-8, so the default tail beyond 40 is
    far below round-off of the peak; panel counts are raised automatically
    when large phase arguments need resolving.
    """

    lambda_max: float = 40.0
    panels: int = 80
    nodes_per_panel: int = 16
    k0_lambda_cut: float = 120.0  # analytic 1/(kappa lam^2) tail beyond this


@dataclass(frozen=True)
class KernelSpec:
    """Everything the prediction formulas need at a fixed expansion point."""

    model: GrtModel
    x0: tuple
    kappa: float
    mu: float
    quadrature: QuadratureSpec = QuadratureSpec()
    alpha_nodes: int = 2000
    sigma: Optional[Callable] = None  # sigma(alpha, rho) -> array

    def __post_init__(self):
        if not (self.kappa > 0 and self.mu > 0):
            raise ValueError("kappa and mu must be positive")

    def q0_value(self) -> float:
        xi = grad_x_phi(self.model, np.asarray(self.x0, float), 0.7)
        return q0(self.model, np.asarray(self.x0, float), xi)

    def scaled(self, factor: int) -> "KernelSpec":
        """Same spec with quadrature refined by an integer factor."""
        q = self.quadrature
        return KernelSpec(
            model=self.model,
            x0=self.x0,
            kappa=self.kappa,
            mu=self.mu,
            quadrature=QuadratureSpec(
                lambda_max=q.lambda_max * factor,
                panels=q.panels * 2 * factor,
                nodes_per_panel=q.nodes_per_panel,
            ),
            alpha_nodes=self.alpha_nodes * factor,
            sigma=self.sigma,
        )


@dataclass
class TheoryCurve:
    abscissae: np.ndarray
    values: np.ndarray
    meaning: str  # "G-vs-q" | "C-vs-offset" | "histogram-pdf"

    def __post_init__(self):
        if len(self.abscissae) != len(self.values):
            raise ValueError("abscissae and values must have equal length")


def _gl_on_interval(lo: float, hi: float, panels: int, nodes: int):
    xg, wg = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    return (mid + half * xg[None, :]).ravel(), (half * np.broadcast_to(wg, half.shape + wg.shape[-1:])
                                                ).reshape(panels, nodes).ravel()


def _lambda_grid(spec: KernelSpec, max_abs_q: float = 0.0):
    """GL grid dense enough to resolve cos(lam*q) up to the given |q|."""
    q = spec.quadrature
    panels = max(q.panels, int(np.ceil(q.lambda_max * (max_abs_q + 1.0) / 14.0)))
    return _gl_on_interval(0.0, q.lambda_max, panels, q.nodes_per_panel)


def _chord(spec: KernelSpec, x, alpha):
    return np.abs(phi_alpha_prime(spec.model, x, alpha))


def _symbol(spec: KernelSpec, lam: np.ndarray, a, q0_val: float):
    """lam/(Q0 + kappa lam^3) * ft(lam) * ft(mu a lam); `a` may broadcast."""
    base = lam / (q0_val + spec.kappa * lam**3) * keys_kernel_ft(lam)
    return base * keys_kernel_ft(spec.mu * np.asarray(a) * lam)


def vartheta(t_check, x, alpha: float, spec: KernelSpec):
    """Interpolation footprint along the data line of x at angle alpha.

    Computed as an exact piecewise Gauss-Legendre integral (the integrand is
    piecewise-cubic x piecewise-cubic); collapses to the kernel itself when
    phi_alpha_prime vanishes.
    """
    t_check = np.atleast_1d(np.asarray(t_check, dtype=float))
    beta = abs(float(phi_alpha_prime(spec.model, np.asarray(x, float), alpha))) * spec.mu
    out = np.zeros_like(t_check)
    if beta == 0.0:
        out = keys_kernel(t_check)
        return out if out.shape != (1,) else float(out[0])
    xg, wg = np.polynomial.legendre.leggauss(6)
    for i, t in enumerate(t_check):
        lo = max(-2.0, t - 2.0 * beta)
        hi = min(2.0, t + 2.0 * beta)
        if lo >= hi:
            continue
        knots = set(range(int(np.ceil(lo)), int(np.floor(hi)) + 1))
        knots |= {t + k * beta for k in range(-2, 3) if lo < t + k * beta < hi}
        edges = np.array(sorted({lo, hi} | knots))
        mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
        half = 0.5 * (edges[1:] - edges[:-1])[:, None]
        s = (mid + half * xg[None, :]).ravel()
        w = (half * wg[None, :]).ravel()
        out[i] = np.sum(w * keys_kernel(s) * keys_kernel((s - t) / beta)) / beta
    return out if out.shape != (1,) else float(out[0])


def k0_kernel(t_check, x, alpha: float, spec: KernelSpec):
    """Inverse cosine transform of the reconstruction symbol.

    The symbol decays like 1/(kappa lam^2); that tail is integrated
    analytically via the sine integral beyond k0_lambda_cut, the remainder
    (bounded by Q0/(4 kappa^2 cut^4), ~6e-8 at the default cut) is dropped.
    """
    t_check = np.atleast_1d(np.asarray(t_check, dtype=float))
    q0_val = q0(spec.model, np.asarray(x, float),
                grad_x_phi(spec.model, np.asarray(x, float), alpha))
    cut = spec.quadrature.k0_lambda_cut
    tmax = float(np.max(np.abs(t_check)))
    panels = max(240, int(np.ceil(cut * (tmax + 1.0) / 14.0)))
    lam, w = _gl_on_interval(0.0, cut, panels, 10)
    s = lam / (q0_val + spec.kappa * lam**3)
    core = (s * w) @ np.cos(np.outer(lam, t_check))
    at = np.abs(t_check)
    si, _ = sici(cut * at)
    tail = (np.cos(cut * at) / cut - at * (np.pi / 2 - si)) / spec.kappa
    out = (core + tail) / np.pi
    return out if out.shape != (1,) else float(out[0])


def g_kernel(x, alpha: float, q, spec: KernelSpec):
    """Limit kernel G(x, alpha, q) by direct cosine quadrature."""
    q = np.atleast_1d(np.asarray(q, dtype=float))
    q0_val = q0(spec.model, np.asarray(x, float),
                grad_x_phi(spec.model, np.asarray(x, float), alpha))
    a = float(_chord(spec, np.asarray(x, float), alpha))
    lam, w = _lambda_grid(spec, float(np.max(np.abs(q))))
    sym = _symbol(spec, lam, a, q0_val)
    out = spec.mu * spec.model.weight / np.pi * ((sym * w) @ np.cos(np.outer(lam, q)))
    return out if out.shape != (1,) else float(out[0])


def g_kernel_convolution(x, alpha: float, q, spec: KernelSpec):
    """G by the real-space route: K0 convolved with vartheta.

    Independent of g_kernel's cosine quadrature; panels are graded toward
    the kink of K0 at the evaluation offset.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    beta = abs(float(phi_alpha_prime(spec.model, np.asarray(x, float), alpha))) * spec.mu
    tmax = 2.0 + 2.0 * beta + 1e-9
    xg, wg = np.polynomial.legendre.leggauss(10)
    out = np.empty_like(q)
    for i, qi in enumerate(q):
        edges = []
        for lo, hi in ((-tmax, qi), (qi, tmax)):
            if hi <= -tmax or lo >= tmax:
                edges.append(np.linspace(max(lo, -tmax), min(hi, tmax), 31))
                continue
            # geometric grading toward the kink end of the interval
            g = (np.arange(41) / 40.0) ** 2
            if lo == qi:
                edges.append(qi + (hi - qi) * g)
            else:
                edges.append(qi - (qi - lo) * g[::-1])
        ts, ws = [], []
        for e in edges:
            e = np.clip(e, -tmax, tmax)
            mid = 0.5 * (e[:-1] + e[1:])[:, None]
            half = 0.5 * (e[1:] - e[:-1])[:, None]
            ts.append((mid + half * xg[None, :]).ravel())
            ws.append((half * wg[None, :]).ravel())
        ts = np.concatenate(ts)
        ws = np.concatenate(ws)
        vt = vartheta(ts, x, alpha, spec)
        k0 = k0_kernel(qi - ts, x, alpha, spec)
        out[i] = spec.mu * spec.model.weight * np.sum(ws * k0 * np.asarray(vt))
    return out if out.shape != (1,) else float(out[0])


def _correlation_grid(spec: KernelSpec, t_half: float = 40.0):
    panels = max(160, int(np.ceil(t_half / 0.25)))
    return _gl_on_interval(-t_half, t_half, panels, 8)


def gg_correlation(alpha: float, p, spec: KernelSpec, t_half: float = 40.0):
    """Autocorrelation (G*G)(x0, alpha, p) = int G(p+t) G(t) dt on a
    truncated t-range; the discarded tails are O(t_half^-3) under the
    (1+|t|)^-2 kernel decay, ~1e-9 at the default range."""
    p = np.atleast_1d(np.asarray(p, dtype=float))
    t, wt = _correlation_grid(spec, t_half)
    gt = g_kernel(spec.x0, alpha, t, spec)
    out = np.empty_like(p)
    for i, pi in enumerate(p):
        gs = g_kernel(spec.x0, alpha, t + pi, spec)
        out[i] = np.sum(wt * gt * gs)
    return out if out.shape != (1,) else float(out[0])


def _alpha_nodes(spec: KernelSpec):
    n = spec.alpha_nodes
    al = np.arange(n) * (2 * np.pi / n)
    return al, 2 * np.pi / n


def _gamma_geometry(spec: KernelSpec, al: np.ndarray):
    """Per-alpha quantities on the curves through x0: rho, Theta, chord, sigma^2."""
    x0 = np.asarray(spec.x0, dtype=float)
    rho = phi(spec.model, x0, al)
    theta = grad_x_phi(spec.model, x0, al)
    a = _chord(spec, x0, al)
    if spec.sigma is None:
        raise ValueError("covariance needs a sigma(alpha, rho) callable on the spec")
    sig2 = np.asarray(spec.sigma(al, rho), dtype=float) ** 2
    return rho, theta, a, sig2


def covariance(x_check, spec: KernelSpec) -> float:
    """Noise covariance C(xcheck) between x0 and x0 + eps*xcheck.

    Fourier route: alpha-trapezoid (periodic) over the squared symbol with
    phase cos(lam * Theta . xcheck).
    """
    x_check = np.asarray(x_check, dtype=float)
    al, wal = _alpha_nodes(spec)
    rho, theta, a, sig2 = _gamma_geometry(spec, al)
    q0_val = spec.q0_value()
    lam, wl = _lambda_grid(spec, float(np.linalg.norm(x_check)))
    sym = _symbol(spec, lam[None, :], a[:, None], q0_val)
    phase = np.cos(lam[None, :] * (theta @ x_check)[:, None])
    inner = (sym**2 * phase) @ wl
    w2 = spec.model.weight**2
    return float(spec.mu**2 * w2 / np.pi * np.sum(inner * sig2) * wal)


def covariance_via_correlation(x_check, spec: KernelSpec, t_half: float = 40.0) -> float:
    """C(xcheck) by the real-space route: alpha-average of (G*G)(Theta . xcheck).

    Fully vectorized over alpha via cos((t+p)lam) = cos cos - sin sin.
    """
    x_check = np.asarray(x_check, dtype=float)
    al, wal = _alpha_nodes(spec)
    rho, theta, a, sig2 = _gamma_geometry(spec, al)
    q0_val = spec.q0_value()
    p = theta @ x_check  # per-alpha correlation offset
    max_q = t_half + float(np.max(np.abs(p))) + 1.0
    lam, wl = _lambda_grid(spec, max_q)
    t, wt = _correlation_grid(spec, t_half)
    pref = spec.mu * spec.model.weight / np.pi
    sym_w = _symbol(spec, lam[None, :], a[:, None], q0_val) * wl[None, :]  # (na, nl)
    cos_tl = np.cos(np.outer(t, lam))  # (nt, nl)
    sin_tl = np.sin(np.outer(t, lam))
    g_t = pref * (sym_w @ cos_tl.T)  # (na, nt)
    cos_pl = np.cos(p[:, None] * lam[None, :])
    sin_pl = np.sin(p[:, None] * lam[None, :])
    g_shift = pref * ((sym_w * cos_pl) @ cos_tl.T - (sym_w * sin_pl) @ sin_tl.T)
    gg = (g_t * g_shift) @ wt  # (na,)
    return float(np.sum(gg * sig2) * wal)


def variance_at(spec: KernelSpec) -> float:
    """Predicted pointwise noise variance: the covariance at zero offset."""
    return covariance(np.zeros(2), spec)


def g_curve(spec: KernelSpec, alpha: float, q_values) -> TheoryCurve:
    q_values = np.asarray(q_values, dtype=float)
    return TheoryCurve(q_values, np.asarray(g_kernel(spec.x0, alpha, q_values, spec)), "G-vs-q")


def covariance_curve(spec: KernelSpec, direction, offsets) -> TheoryCurve:
    direction = np.asarray(direction, dtype=float)
    direction = direction / np.linalg.norm(direction)
    offsets = np.asarray(offsets, dtype=float)
    vals = np.array([covariance(s * direction, spec) for s in offsets])
    return TheoryCurve(offsets, vals, "C-vs-offset")


def quadrature_stability(spec: KernelSpec, offsets, q_values, alpha: float = 0.7) -> float:
    """Max relative change of reported theory values under quadrature doubling."""
    fine = spec.scaled(2)
    worst = 0.0
    for q in q_values:
        g1 = g_kernel(spec.x0, alpha, q, spec)
        g2 = g_kernel(fine.x0, alpha, q, fine)
        worst = max(worst, abs(g1 - g2) / max(abs(g2), 1e-30))
    if spec.sigma is not None:
        for off in offsets:
            c1 = covariance(off, spec)
            c2 = covariance(off, fine)
            worst = max(worst, abs(c1 - c2) / max(abs(c2), 1e-30))
    return worst
