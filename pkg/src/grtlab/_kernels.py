"""Numba kernels for the matrix-free circular projector and its transpose.

Sampling scheme: for data row i1 the circles share the center R*alpha_vec.
The radii are split into a few bands; each band b lays an angular grid
phi_j = j * dphi_b with dphi_b = h / rho_hi(b), so the arc step rho * dphi
never exceeds the bound h, over the directions that can meet the image
rectangle.  Along each direction the node radii inside the rectangle are
found exactly by ray-box slabs, and consecutive samples march by delta_rho
along the ray (two adds per sample, no trig).  The value at node (i1, i2)
is the sum over its in-rectangle samples of the bilinear image read times
rho * dphi.  The backprojection scatters the identical samples, making it
the exact transpose.

Parallel accumulation uses per-chunk buffers merged in index order, so
results do not depend on thread scheduling.
"""

import numpy as np
from numba import njit, prange

TWO_PI = 2.0 * np.pi
N_RHO_BANDS = 4


@njit(inline="always")
def _bilinear_gather(img, n, u, v):
    iu = int(u)
    iv = int(v)
    if iu > n - 2:
        iu = n - 2
    if iv > n - 2:
        iv = n - 2
    fu = u - iu
    fv = v - iv
    return (img[iu, iv] * (1.0 - fu) + img[iu + 1, iv] * fu) * (1.0 - fv) + (
        img[iu, iv + 1] * (1.0 - fu) + img[iu + 1, iv + 1] * fu
    ) * fv


@njit(inline="always")
def _bilinear_scatter(buf, n, u, v, w):
    iu = int(u)
    iv = int(v)
    if iu > n - 2:
        iu = n - 2
    if iv > n - 2:
        iv = n - 2
    fu = u - iu
    fv = v - iv
    buf[iu, iv] += w * (1.0 - fu) * (1.0 - fv)
    buf[iu + 1, iv] += w * fu * (1.0 - fv)
    buf[iu, iv + 1] += w * (1.0 - fu) * fv
    buf[iu + 1, iv + 1] += w * fu * fv


@njit(inline="always")
def _ray_window(ox, oy, ex, ey, x_lo, x_hi, y_lo, y_hi, rho_min, d_rho, blo, bhi):
    """Node-index window [ilo, ihi] within band [blo, bhi] of radii whose
    sample along direction (ex, ey) lies in the box."""
    t0 = -1.0e300
    t1 = 1.0e300
    if ex > 1e-300 or ex < -1e-300:
        a = (x_lo - ox) / ex
        b = (x_hi - ox) / ex
        if a > b:
            a, b = b, a
        if a > t0:
            t0 = a
        if b < t1:
            t1 = b
    elif ox < x_lo or ox > x_hi:
        return 0, -1
    if ey > 1e-300 or ey < -1e-300:
        a = (y_lo - oy) / ey
        b = (y_hi - oy) / ey
        if a > b:
            a, b = b, a
        if a > t0:
            t0 = a
        if b < t1:
            t1 = b
    elif oy < y_lo or oy > y_hi:
        return 0, -1
    if t1 < t0:
        return 0, -1
    ilo = int(np.ceil((t0 - rho_min) / d_rho))
    ihi = int(np.floor((t1 - rho_min) / d_rho))
    if ilo < blo:
        ilo = blo
    if ihi > bhi:
        ihi = bhi
    return ilo, ihi


@njit(inline="always")
def _band_edges(n_rf, b):
    blo = (b * n_rf) // N_RHO_BANDS
    bhi = ((b + 1) * n_rf) // N_RHO_BANDS - 1
    return blo, bhi


@njit(inline="always")
def _band_rays(ox, oy, cx, cy, rc, rho_min, d_rho, rho_max, h, blo, bhi):
    """Angular step and ray index range for one radius band of one row.

    Returns (dphi, jlo, jhi); jhi < jlo when the band cannot meet the box.
    """
    dx = cx - ox
    dy = cy - oy
    d = np.sqrt(dx * dx + dy * dy)
    rb_lo = rho_min + blo * d_rho
    rb_hi = rho_min + bhi * d_rho
    if rb_lo > d + rc or rb_hi < d - rc:
        return 1.0, 0, -1
    lim = d + rc
    if rb_hi < lim:
        lim = rb_hi
    if lim > rho_max:
        lim = rho_max
    dphi = h / lim
    if d > rc:
        delta = np.arcsin(rc / d)
        phic = np.arctan2(dy, dx)
        jlo = int(np.ceil((phic - delta) / dphi))
        jhi = int(np.floor((phic + delta) / dphi))
    else:
        jlo = 0
        jhi = int(TWO_PI / dphi) - 1
    return dphi, jlo, jhi


@njit(parallel=True, fastmath=True, cache=True)
def forward_kernel(img, n, x_lo, y_lo, inv_px, R, n_af, n_rf, d_al, rho_min, d_rho, h, cx, cy, rc, out):
    x_hi = x_lo + (n - 1) / inv_px
    y_hi = y_lo + (n - 1) / inv_px
    rho_max = rho_min + (n_rf - 1) * d_rho
    nm1 = float(n - 1)
    for i1 in prange(n_af):
        al = i1 * d_al
        ox = R * np.cos(al)
        oy = R * np.sin(al)
        row = np.zeros(n_rf)
        dphi_of = np.zeros(n_rf)
        for b in range(N_RHO_BANDS):
            blo, bhi = _band_edges(n_rf, b)
            dphi, jlo, jhi = _band_rays(ox, oy, cx, cy, rc, rho_min, d_rho, rho_max, h, blo, bhi)
            if jhi < jlo:
                continue
            for i2 in range(blo, bhi + 1):
                dphi_of[i2] = dphi
            cj = np.cos(jlo * dphi)
            sj = np.sin(jlo * dphi)
            cd = np.cos(dphi)
            sd = np.sin(dphi)
            for _ in range(jlo, jhi + 1):
                ilo, ihi = _ray_window(ox, oy, cj, sj, x_lo, x_hi, y_lo, y_hi, rho_min, d_rho, blo, bhi)
                if ihi >= ilo:
                    rho0 = rho_min + ilo * d_rho
                    u = (ox + rho0 * cj - x_lo) * inv_px
                    v = (oy + rho0 * sj - y_lo) * inv_px
                    du = d_rho * cj * inv_px
                    dv = d_rho * sj * inv_px
                    for i2 in range(ilo, ihi + 1):
                        uu = min(max(u, 0.0), nm1)
                        vv = min(max(v, 0.0), nm1)
                        row[i2] += _bilinear_gather(img, n, uu, vv)
                        u += du
                        v += dv
                t = cj * cd - sj * sd
                sj = sj * cd + cj * sd
                cj = t
        for i2 in range(n_rf):
            out[i1, i2] = row[i2] * (rho_min + i2 * d_rho) * dphi_of[i2]


@njit(parallel=True, fastmath=True, cache=True)
def back_kernel(sino, n, x_lo, y_lo, inv_px, R, n_af, n_rf, d_al, rho_min, d_rho, h, cx, cy, rc, w_scale, n_chunks):
    x_hi = x_lo + (n - 1) / inv_px
    y_hi = y_lo + (n - 1) / inv_px
    rho_max = rho_min + (n_rf - 1) * d_rho
    nm1 = float(n - 1)
    bufs = np.zeros((n_chunks, n, n))
    chunk = (n_af + n_chunks - 1) // n_chunks
    for ci in prange(n_chunks):
        lo = ci * chunk
        hi = min(lo + chunk, n_af)
        buf = bufs[ci]
        for i1 in range(lo, hi):
            al = i1 * d_al
            ox = R * np.cos(al)
            oy = R * np.sin(al)
            for b in range(N_RHO_BANDS):
                blo, bhi = _band_edges(n_rf, b)
                dphi, jlo, jhi = _band_rays(ox, oy, cx, cy, rc, rho_min, d_rho, rho_max, h, blo, bhi)
                if jhi < jlo:
                    continue
                cj = np.cos(jlo * dphi)
                sj = np.sin(jlo * dphi)
                cd = np.cos(dphi)
                sd = np.sin(dphi)
                for _ in range(jlo, jhi + 1):
                    ilo, ihi = _ray_window(ox, oy, cj, sj, x_lo, x_hi, y_lo, y_hi, rho_min, d_rho, blo, bhi)
                    if ihi >= ilo:
                        rho0 = rho_min + ilo * d_rho
                        u = (ox + rho0 * cj - x_lo) * inv_px
                        v = (oy + rho0 * sj - y_lo) * inv_px
                        du = d_rho * cj * inv_px
                        dv = d_rho * sj * inv_px
                        for i2 in range(ilo, ihi + 1):
                            s = sino[i1, i2]
                            if s != 0.0:
                                w = s * (rho_min + i2 * d_rho) * dphi * w_scale
                                uu = min(max(u, 0.0), nm1)
                                vv = min(max(v, 0.0), nm1)
                                _bilinear_scatter(buf, n, uu, vv, w)
                            u += du
                            v += dv
                    t = cj * cd - sj * sd
                    sj = sj * cd + cj * sd
                    cj = t
    out = np.zeros((n, n))
    for ci in range(n_chunks):
        out += bufs[ci]
    return out


@njit(parallel=True, fastmath=True, cache=True)
def fused_normal_kernel(img, g, n, x_lo, y_lo, inv_px, R, n_af, n_rf, d_al, rho_min, d_rho, h, cx, cy, rc, w_scale, n_chunks):
    """One pass of R^T(R f - g) over the visited nodes.

    Returns (accumulated image, sum of (Rf-g)^2 over visited nodes, sum of
    g^2 over visited nodes).  Unvisited nodes have Rf = 0 identically; the
    caller accounts for their constant g^2 contribution to the objective.
    """
    x_hi = x_lo + (n - 1) / inv_px
    y_hi = y_lo + (n - 1) / inv_px
    rho_max = rho_min + (n_rf - 1) * d_rho
    nm1 = float(n - 1)
    bufs = np.zeros((n_chunks, n, n))
    data_sq = np.zeros(n_chunks)
    g_sq = np.zeros(n_chunks)
    chunk = (n_af + n_chunks - 1) // n_chunks
    for ci in prange(n_chunks):
        lo = ci * chunk
        hi = min(lo + chunk, n_af)
        buf = bufs[ci]
        dacc = 0.0
        gacc = 0.0
        row = np.zeros(n_rf)
        visited = np.zeros(n_rf, dtype=np.uint8)
        for i1 in range(lo, hi):
            al = i1 * d_al
            ox = R * np.cos(al)
            oy = R * np.sin(al)
            for i2 in range(n_rf):
                row[i2] = 0.0
                visited[i2] = 0
            for b in range(N_RHO_BANDS):
                blo, bhi = _band_edges(n_rf, b)
                dphi, jlo, jhi = _band_rays(ox, oy, cx, cy, rc, rho_min, d_rho, rho_max, h, blo, bhi)
                if jhi < jlo:
                    continue
                # gather pass
                cj = np.cos(jlo * dphi)
                sj = np.sin(jlo * dphi)
                cd = np.cos(dphi)
                sd = np.sin(dphi)
                for _ in range(jlo, jhi + 1):
                    ilo, ihi = _ray_window(ox, oy, cj, sj, x_lo, x_hi, y_lo, y_hi, rho_min, d_rho, blo, bhi)
                    if ihi >= ilo:
                        rho0 = rho_min + ilo * d_rho
                        u = (ox + rho0 * cj - x_lo) * inv_px
                        v = (oy + rho0 * sj - y_lo) * inv_px
                        du = d_rho * cj * inv_px
                        dv = d_rho * sj * inv_px
                        for i2 in range(ilo, ihi + 1):
                            uu = min(max(u, 0.0), nm1)
                            vv = min(max(v, 0.0), nm1)
                            row[i2] += _bilinear_gather(img, n, uu, vv)
                            u += du
                            v += dv
                        for i2 in range(ilo, ihi + 1):
                            visited[i2] = 1
                    t = cj * cd - sj * sd
                    sj = sj * cd + cj * sd
                    cj = t
                # residual on the visited nodes of this band
                for i2 in range(blo, bhi + 1):
                    if visited[i2] == 1:
                        r = row[i2] * (rho_min + i2 * d_rho) * dphi - g[i1, i2]
                        dacc += r * r
                        gacc += g[i1, i2] * g[i1, i2]
                        row[i2] = r * (rho_min + i2 * d_rho) * dphi * w_scale
                    else:
                        row[i2] = 0.0
                # scatter pass over the identical samples
                cj = np.cos(jlo * dphi)
                sj = np.sin(jlo * dphi)
                for _ in range(jlo, jhi + 1):
                    ilo, ihi = _ray_window(ox, oy, cj, sj, x_lo, x_hi, y_lo, y_hi, rho_min, d_rho, blo, bhi)
                    if ihi >= ilo:
                        rho0 = rho_min + ilo * d_rho
                        u = (ox + rho0 * cj - x_lo) * inv_px
                        v = (oy + rho0 * sj - y_lo) * inv_px
                        du = d_rho * cj * inv_px
                        dv = d_rho * sj * inv_px
                        for i2 in range(ilo, ihi + 1):
                            w = row[i2]
                            if w != 0.0:
                                uu = min(max(u, 0.0), nm1)
                                vv = min(max(v, 0.0), nm1)
                                _bilinear_scatter(buf, n, uu, vv, w)
                            u += du
                            v += dv
                    t = cj * cd - sj * sd
                    sj = sj * cd + cj * sd
                    cj = t
        data_sq[ci] = dacc
        g_sq[ci] = gacc
    out = np.zeros((n, n))
    for ci in range(n_chunks):
        out += bufs[ci]
    return out, data_sq.sum(), g_sq.sum()
