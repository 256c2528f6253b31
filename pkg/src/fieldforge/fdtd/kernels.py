"""Compiled Yee and CPML update loops.

Spatial derivatives carry precomputed ``1 / (kappa * spacing)`` factors so the
same loops serve uniform, graded and stretched-coordinate cells.  Every loop
reads only the other field family, so each sweep is parallel over its outer
index; E and H sweeps never overlap.
"""

import numba
import numpy as np
from numba import njit, prange

# the bundled TBB is often too old; the portable work-queue layer always loads
if numba.config.THREADING_LAYER == "default":
    numba.config.THREADING_LAYER = "workqueue"

# thread-parallel sweeps pay a launch cost per call; use them only with threads to spare
PARALLEL = numba.config.NUMBA_NUM_THREADS > 1
_kernel = njit(parallel=PARALLEL, cache=True)


@_kernel
def update_h(hx, hy, hz, ex, ey, ez, ax, ay, az, db):
    nx, ny, nz = hz.shape[0], hx.shape[1], hx.shape[2]
    for i in prange(nx + 1):
        for j in range(ny):
            for k in range(nz):
                hx[i, j, k] -= db * ((ez[i, j + 1, k] - ez[i, j, k]) * ay[j]
                                     - (ey[i, j, k + 1] - ey[i, j, k]) * az[k])
    for i in prange(nx):
        for j in range(ny + 1):
            for k in range(nz):
                hy[i, j, k] -= db * ((ex[i, j, k + 1] - ex[i, j, k]) * az[k]
                                     - (ez[i + 1, j, k] - ez[i, j, k]) * ax[i])
    for i in prange(nx):
        for j in range(ny):
            for k in range(nz + 1):
                hz[i, j, k] -= db * ((ey[i + 1, j, k] - ey[i, j, k]) * ax[i]
                                     - (ex[i, j + 1, k] - ex[i, j, k]) * ay[j])


@_kernel
def update_e(ex, ey, ez, hx, hy, hz, cax, cbx, cay, cby, caz, cbz, bx, by, bz):
    nx, ny, nz = hz.shape[0], hx.shape[1], hx.shape[2]
    for i in prange(nx):
        for j in range(1, ny):
            for k in range(1, nz):
                ex[i, j, k] = cax[i, j, k] * ex[i, j, k] + cbx[i, j, k] * (
                    (hz[i, j, k] - hz[i, j - 1, k]) * by[j] - (hy[i, j, k] - hy[i, j, k - 1]) * bz[k])
    for i in prange(1, nx):
        for j in range(ny):
            for k in range(1, nz):
                ey[i, j, k] = cay[i, j, k] * ey[i, j, k] + cby[i, j, k] * (
                    (hx[i, j, k] - hx[i, j, k - 1]) * bz[k] - (hz[i, j, k] - hz[i - 1, j, k]) * bx[i])
    for i in prange(1, nx):
        for j in range(1, ny):
            for k in range(nz):
                ez[i, j, k] = caz[i, j, k] * ez[i, j, k] + cbz[i, j, k] * (
                    (hy[i, j, k] - hy[i - 1, j, k]) * bx[i] - (hx[i, j, k] - hx[i, j - 1, k]) * by[j])


# CPML convolution terms, one kernel per field family and stretched axis.
# ``psi`` arrays keep the natural (x, y, z) order with the stretched axis
# shortened to the layer indices ``idx``; loops run in memory order.


@_kernel
def cpml_e_x(ey, ez, hy, hz, p_ey, p_ez, idx, b, c, inv_d, cby, cbz):
    ny, nz = ez.shape[1] - 1, ey.shape[2] - 1
    for s in prange(idx.shape[0]):
        i = idx[s]
        for j in range(ny):
            for k in range(1, nz):
                p_ey[s, j, k] = b[s] * p_ey[s, j, k] + c[s] * (hz[i, j, k] - hz[i - 1, j, k]) * inv_d[i]
                ey[i, j, k] -= cby[i, j, k] * p_ey[s, j, k]
        for j in range(1, ny):
            for k in range(nz):
                p_ez[s, j, k] = b[s] * p_ez[s, j, k] + c[s] * (hy[i, j, k] - hy[i - 1, j, k]) * inv_d[i]
                ez[i, j, k] += cbz[i, j, k] * p_ez[s, j, k]


@_kernel
def cpml_e_y(ez, ex, hz, hx, p_ez, p_ex, idx, b, c, inv_d, cbz, cbx):
    nx, nz = ex.shape[0], ex.shape[2] - 1
    for i in prange(nx + 1):
        for s in range(idx.shape[0]):
            j = idx[s]
            if 0 < i < nx:
                for k in range(nz):
                    p_ez[i, s, k] = b[s] * p_ez[i, s, k] + c[s] * (hx[i, j, k] - hx[i, j - 1, k]) * inv_d[j]
                    ez[i, j, k] -= cbz[i, j, k] * p_ez[i, s, k]
            if i < nx:
                for k in range(1, nz):
                    p_ex[i, s, k] = b[s] * p_ex[i, s, k] + c[s] * (hz[i, j, k] - hz[i, j - 1, k]) * inv_d[j]
                    ex[i, j, k] += cbx[i, j, k] * p_ex[i, s, k]


@_kernel
def cpml_e_z(ex, ey, hx, hy, p_ex, p_ey, idx, b, c, inv_d, cbx, cby):
    nx, ny = ex.shape[0], ey.shape[1]
    for i in prange(nx + 1):
        if i < nx:
            for j in range(1, ny):
                for s in range(idx.shape[0]):
                    k = idx[s]
                    p_ex[i, j, s] = b[s] * p_ex[i, j, s] + c[s] * (hy[i, j, k] - hy[i, j, k - 1]) * inv_d[k]
                    ex[i, j, k] -= cbx[i, j, k] * p_ex[i, j, s]
        if 0 < i < nx:
            for j in range(ny):
                for s in range(idx.shape[0]):
                    k = idx[s]
                    p_ey[i, j, s] = b[s] * p_ey[i, j, s] + c[s] * (hx[i, j, k] - hx[i, j, k - 1]) * inv_d[k]
                    ey[i, j, k] += cby[i, j, k] * p_ey[i, j, s]


@_kernel
def cpml_h_x(hy, hz, ey, ez, p_hy, p_hz, idx, b, c, inv_d, db):
    for s in prange(idx.shape[0]):
        i = idx[s]
        for j in range(hy.shape[1]):
            for k in range(hy.shape[2]):
                p_hy[s, j, k] = b[s] * p_hy[s, j, k] + c[s] * (ez[i + 1, j, k] - ez[i, j, k]) * inv_d[i]
                hy[i, j, k] += db * p_hy[s, j, k]
        for j in range(hz.shape[1]):
            for k in range(hz.shape[2]):
                p_hz[s, j, k] = b[s] * p_hz[s, j, k] + c[s] * (ey[i + 1, j, k] - ey[i, j, k]) * inv_d[i]
                hz[i, j, k] -= db * p_hz[s, j, k]


@_kernel
def cpml_h_y(hz, hx, ez, ex, p_hz, p_hx, idx, b, c, inv_d, db):
    nx = hz.shape[0]
    for i in prange(nx + 1):
        for s in range(idx.shape[0]):
            j = idx[s]
            if i < nx:
                for k in range(hz.shape[2]):
                    p_hz[i, s, k] = b[s] * p_hz[i, s, k] + c[s] * (ex[i, j + 1, k] - ex[i, j, k]) * inv_d[j]
                    hz[i, j, k] += db * p_hz[i, s, k]
            for k in range(hx.shape[2]):
                p_hx[i, s, k] = b[s] * p_hx[i, s, k] + c[s] * (ez[i, j + 1, k] - ez[i, j, k]) * inv_d[j]
                hx[i, j, k] -= db * p_hx[i, s, k]


@_kernel
def cpml_h_z(hx, hy, ex, ey, p_hx, p_hy, idx, b, c, inv_d, db):
    nx = hy.shape[0]
    for i in prange(nx + 1):
        for j in range(hx.shape[1]):
            for s in range(idx.shape[0]):
                k = idx[s]
                p_hx[i, j, s] = b[s] * p_hx[i, j, s] + c[s] * (ey[i, j, k + 1] - ey[i, j, k]) * inv_d[k]
                hx[i, j, k] += db * p_hx[i, j, s]
        if i < nx:
            for j in range(hy.shape[1]):
                for s in range(idx.shape[0]):
                    k = idx[s]
                    p_hy[i, j, s] = b[s] * p_hy[i, j, s] + c[s] * (ex[i, j, k + 1] - ex[i, j, k]) * inv_d[k]
                    hy[i, j, k] -= db * p_hy[i, j, s]


CPML_E = (cpml_e_x, cpml_e_y, cpml_e_z)
CPML_H = (cpml_h_x, cpml_h_y, cpml_h_z)


@njit(cache=True)
def weighted_sq_sum(a, w0, w1, w2):
    """``sum a[i,j,k]^2 * w0[i] * w1[j] * w2[k]``."""
    acc = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s = 0.0
            for k in range(a.shape[2]):
                s += a[i, j, k] * a[i, j, k] * w2[k]
            acc += s * w0[i] * w1[j]
    return acc


@njit(cache=True)
def weighted_dot(a, b, w0, w1, w2):
    acc = 0.0
    for i in range(a.shape[0]):
        for j in range(a.shape[1]):
            s = 0.0
            for k in range(a.shape[2]):
                s += a[i, j, k] * b[i, j, k] * w2[k]
            acc += s * w0[i] * w1[j]
    return acc
