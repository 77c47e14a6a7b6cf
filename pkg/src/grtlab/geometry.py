"""Circular (and classical-Radon) transform geometry.

The measurement family integrates over circles of radius ``rho`` centered at
``R * (cos(alpha), sin(alpha))``; the classical model integrates over lines
``alpha_vec . x = rho``.  This module provides the defining function ``phi``,
its derivatives, the dual-point solver, and the principal symbol ``q0``,
which is exactly ``4*pi`` for both models.

Sign convention: ``perp(v) = (-v2, v1)``.  Determinant-based quantities are
meaningful up to orientation only; callers should use absolute values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

CIRCULAR = "circular"
CLASSICAL = "classical-radon"


@dataclass(frozen=True)
class GrtModel:
    """Geometric family of integration curves.

    kind is "circular" (circles of radius rho centered on the R-circle) or
    "classical-radon" (lines).  radius is only used by the circular model.
    The integration weight is identically 1 for both models.
    """

    kind: str = CIRCULAR
    radius: float = 10.0
    weight: float = 1.0

    def __post_init__(self):
        if self.kind not in (CIRCULAR, CLASSICAL):
            raise ValueError(f"unknown model kind: {self.kind!r}")
        if self.kind == CIRCULAR and not self.radius > 0:
            raise ValueError("radius must be positive")


class DualEntry(NamedTuple):
    alpha: float
    rho: float


class DualSolution(NamedTuple):
    """The two data points whose curves pass through x conormal to xi."""

    first: DualEntry
    second: DualEntry


def alpha_vec(alpha):
    """Unit vector (cos a, sin a); alpha may be an array (stacked last axis)."""
    return np.stack([np.cos(alpha), np.sin(alpha)], axis=-1)


def perp(v):
    """Rotate by +90 degrees: (v1, v2) -> (-v2, v1)."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def _check_interior(model: GrtModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if model.kind == CIRCULAR:
        r = np.linalg.norm(x, axis=-1)
        if np.any(r >= model.radius):
            raise ValueError("point outside the image domain |x| < R")
    return x


def phi(model: GrtModel, x, alpha):
    """Defining function: rho such that x lies on the curve (alpha, rho).

    Circular: |x - R*alpha_vec|.  Classical: alpha_vec . x.
    Broadcasts over x[..., 2] and alpha.
    """
    x = _check_interior(model, x)
    av = alpha_vec(alpha)
    if model.kind == CIRCULAR:
        return np.linalg.norm(x - model.radius * av, axis=-1)
    return np.einsum("...i,...i->...", av, x * np.ones_like(av))


def grad_x_phi(model: GrtModel, x, alpha):
    """Spatial gradient of phi; a unit covector for both models."""
    x = _check_interior(model, x)
    av = alpha_vec(alpha)
    if model.kind == CIRCULAR:
        d = x - model.radius * av
        return d / np.linalg.norm(d, axis=-1, keepdims=True)
    return av * np.ones_like(np.asarray(x, dtype=float))


def phi_alpha_prime(model: GrtModel, x, alpha):
    """Derivative of phi in alpha: R * Theta . perp(alpha_vec), or perp(alpha_vec) . x."""
    x = _check_interior(model, x)
    av = alpha_vec(alpha)
    if model.kind == CIRCULAR:
        theta = grad_x_phi(model, x, alpha)
        return model.radius * np.einsum("...i,...i->...", theta, perp(av))
    return np.einsum("...i,...i->...", perp(av), x * np.ones_like(av))


def chord_distance(model: GrtModel, x, alpha):
    """Distance from the origin to the chord through x and R*alpha_vec.

    Circular model only.  Equals |phi_alpha_prime(x, alpha)|.
    """
    if model.kind != CIRCULAR:
        raise ValueError("chord_distance is defined for the circular model")
    x = _check_interior(model, x)
    theta = grad_x_phi(model, x, alpha)
    center = model.radius * alpha_vec(alpha)
    return np.abs(np.einsum("...i,...i->...", center, perp(theta)))


def _grad_x_phi_alpha_prime(model: GrtModel, x, alpha):
    # Spatial gradient of phi_alpha_prime, up to an irrelevant multiple of
    # Theta for the circular model (it cancels in the determinant).
    av = alpha_vec(alpha)
    if model.kind == CIRCULAR:
        theta = grad_x_phi(model, x, alpha)
        rho = phi(model, x, alpha)
        proj = perp(av) - np.einsum("...i,...i->...", theta, perp(av))[..., None] * theta
        return (model.radius / rho)[..., None] * proj
    return perp(av) * np.ones_like(np.asarray(x, dtype=float))


def delta_phi(model: GrtModel, x, alpha):
    """det of the 2x2 matrix with rows grad_x(phi) and grad_x(phi_alpha_prime).

    Nonzero for |x| < R (circular); exactly 1 for the classical model.
    """
    x = _check_interior(model, x)
    a = grad_x_phi(model, x, alpha)
    b = _grad_x_phi_alpha_prime(model, x, alpha)
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def dual_points(model: GrtModel, x, xi) -> DualSolution:
    """Solve for the two data points whose curves pass through x conormal to xi.

    Circular model: roots t1 > 0 > t2 of |x + t*xi_hat| = R give the centers
    R*alpha_k = x + t_k*xi_hat and radii rho_k = |t_k|.
    """
    if model.kind != CIRCULAR:
        raise ValueError("dual_points is defined for the circular model")
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    nxi = np.linalg.norm(xi)
    if nxi == 0.0:
        raise ValueError("degenerate covector xi = 0")
    _check_interior(model, x)
    e = xi / nxi
    b = x @ e
    disc = b * b + model.radius**2 - x @ x
    root = np.sqrt(disc)  # > |b| since |x| < R
    entries = []
    for t in (-b + root, -b - root):
        c = x + t * e
        alpha = float(np.mod(np.arctan2(c[1], c[0]), 2 * np.pi))
        entries.append(DualEntry(alpha=alpha, rho=float(abs(t))))
    return DualSolution(*entries)


def q0(model: GrtModel, x, xi) -> float:
    """Principal symbol of the normal operator: 2*pi * sum over the dual
    points of |grad_x phi| / |delta_phi|.  Equals 4*pi for both models."""
    x = np.asarray(x, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0.0:
        raise ValueError("degenerate covector xi = 0")
    if model.kind == CIRCULAR:
        sol = dual_points(model, x, xi)
        alphas = [sol.first.alpha, sol.second.alpha]
    else:
        a1 = float(np.mod(np.arctan2(xi[1], xi[0]), 2 * np.pi))
        alphas = [a1, float(np.mod(a1 + np.pi, 2 * np.pi))]
    total = 0.0
    for ak in alphas:
        g = np.linalg.norm(grad_x_phi(model, x, ak))
        d = abs(delta_phi(model, x, ak))
        total += model.weight**2 * g / d
    return 2 * np.pi * total


def b0_symbol(model: GrtModel, x, xi_hat, kappa: float):
    """Regularized reconstruction symbol |xi| / (Q0 + kappa*|xi|^3)."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    xi_hat = np.asarray(xi_hat, dtype=float)
    n = np.linalg.norm(xi_hat)
    if n == 0.0:
        raise ValueError("degenerate covector xi = 0")
    return n / (q0(model, x, xi_hat) + kappa * n**3)
