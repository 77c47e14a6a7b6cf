"""Keys cubic-convolution interpolation kernel and sinogram refinement.

The kernel is the B-spline combination 3*B3(t) - (B2(t-1/2) + B2(t+1/2)),
supported on [-2, 2], with i(0) = 1 and i(k) = 0 at nonzero integers, so it
reproduces node values exactly.  Its Fourier transform (with the convention
F[f](lam) = int f(t) exp(i lam t) dt) is sinc(t)^3 (3 sinc t - 2 cos t) with
t = lam/2 and sinc(t) = sin(t)/t.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp


def bspline2(t):
    """Cardinal quadratic B-spline, support [-3/2, 3/2]."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    m = t <= 0.5
    out[m] = 0.75 - t[m] ** 2
    m = (t > 0.5) & (t < 1.5)
    out[m] = 0.5 * (1.5 - t[m]) ** 2
    return out


def bspline3(t):
    """Cardinal cubic B-spline, support [-2, 2]."""
    t = np.abs(np.asarray(t, dtype=float))
    out = np.zeros_like(t)
    m = t <= 1.0
    out[m] = (4.0 - 6.0 * t[m] ** 2 + 3.0 * t[m] ** 3) / 6.0
    m = (t > 1.0) & (t < 2.0)
    out[m] = (2.0 - t[m]) ** 3 / 6.0
    return out


def keys_kernel(t):
    """Piecewise-cubic interpolation kernel 3*B3(t) - (B2(t-1/2) + B2(t+1/2))."""
    t = np.asarray(t, dtype=float)
    return 3.0 * bspline3(t) - (bspline2(t - 0.5) + bspline2(t + 0.5))


def _sinc(t):
    # sin(t)/t with sinc(0) = 1 (numpy's sinc is normalized by pi)
    return np.sinc(np.asarray(t, dtype=float) / np.pi)


def keys_kernel_ft(lam):
    """Fourier transform of keys_kernel: even, equals 1 at lam = 0."""
    t = np.asarray(lam, dtype=float) / 2.0
    s = _sinc(t)
    return s**3 * (3.0 * s - 2.0 * np.cos(t))


def interp_matrix_open(n_coarse: int, n_fine: int) -> sp.csr_matrix:
    """1-D Keys interpolation matrix on [0, n_coarse - 1], zero beyond the grid.

    Fine node i sits at coarse coordinate i * (n_coarse - 1) / (n_fine - 1).
    """
    if n_fine < n_coarse:
        raise ValueError("fine grid must be at least as dense as the coarse grid")
    pos = np.arange(n_fine) * (n_coarse - 1) / (n_fine - 1)
    base = np.floor(pos).astype(int)
    rows, cols, vals = [], [], []
    for k in range(-1, 3):
        j = base + k
        w = keys_kernel(pos - j)
        m = (w != 0.0) & (j >= 0) & (j < n_coarse)
        rows.append(np.nonzero(m)[0])
        cols.append(j[m])
        vals.append(w[m])
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_fine, n_coarse),
    )
    return mat


def interp_matrix_periodic(n_coarse: int, n_fine: int) -> sp.csr_matrix:
    """1-D Keys interpolation matrix on a periodic axis of n_coarse nodes.

    Fine node i sits at coarse coordinate i * n_coarse / n_fine; neighbor
    indices wrap modulo n_coarse.
    """
    if n_fine < n_coarse:
        raise ValueError("fine grid must be at least as dense as the coarse grid")
    pos = np.arange(n_fine) * n_coarse / n_fine
    base = np.floor(pos).astype(int)
    rows, cols, vals = [], [], []
    for k in range(-1, 3):
        j = base + k
        w = keys_kernel(pos - j)
        m = w != 0.0
        rows.append(np.nonzero(m)[0])
        cols.append(np.mod(j[m], n_coarse))
        vals.append(w[m])
    mat = sp.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(n_fine, n_coarse),
    )
    return mat
