# Compiled batch kernels; signatures mirror kernels._fallback.

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()


def dh_fk_batch(theta, d, a, alpha, kinds, base, qs):
    cdef double[::1] th = np.ascontiguousarray(theta, dtype=np.float64)
    cdef double[::1] dd = np.ascontiguousarray(d, dtype=np.float64)
    cdef double[::1] aa = np.ascontiguousarray(a, dtype=np.float64)
    cdef double[::1] al = np.ascontiguousarray(alpha, dtype=np.float64)
    cdef unsigned char[::1] kk = np.ascontiguousarray(kinds, dtype=np.uint8)
    cdef double[:, ::1] b = np.ascontiguousarray(base, dtype=np.float64)
    qs_arr = np.atleast_2d(np.asarray(qs, dtype=np.float64))
    cdef double[:, ::1] q = np.ascontiguousarray(qs_arr)
    cdef Py_ssize_t n_cfg = q.shape[0]
    cdef Py_ssize_t n_j = q.shape[1]

    ee_arr = np.empty((n_cfg, 4, 4), dtype=np.float64)
    axes_arr = np.empty((n_cfg, n_j, 3), dtype=np.float64)
    org_arr = np.empty((n_cfg, n_j, 3), dtype=np.float64)
    cdef double[:, :, ::1] ee = ee_arr
    cdef double[:, :, ::1] axes = axes_arr
    cdef double[:, :, ::1] org = org_arr

    cdef double t[4][4]
    cdef double s[4][4]
    cdef double nxt[4][4]
    cdef double tj, dj, ct, st, ca, sa, acc
    cdef Py_ssize_t i, j, r, c, k

    for i in range(n_cfg):
        for r in range(4):
            for c in range(4):
                t[r][c] = b[r, c]
        for j in range(n_j):
            for r in range(3):
                axes[i, j, r] = t[r][2]
                org[i, j, r] = t[r][3]
            if kk[j] == 0:
                tj = th[j] + q[i, j]
                dj = dd[j]
            else:
                tj = th[j]
                dj = dd[j] + q[i, j]
            ct = cos(tj)
            st = sin(tj)
            ca = cos(al[j])
            sa = sin(al[j])
            s[0][0] = ct;  s[0][1] = -ca * st; s[0][2] = sa * st;  s[0][3] = aa[j] * ct
            s[1][0] = st;  s[1][1] = ca * ct;  s[1][2] = -sa * ct; s[1][3] = aa[j] * st
            s[2][0] = 0.0; s[2][1] = sa;       s[2][2] = ca;       s[2][3] = dj
            s[3][0] = 0.0; s[3][1] = 0.0;      s[3][2] = 0.0;      s[3][3] = 1.0
            for r in range(4):
                for c in range(4):
                    acc = 0.0
                    for k in range(4):
                        acc += t[r][k] * s[k][c]
                    nxt[r][c] = acc
            for r in range(4):
                for c in range(4):
                    t[r][c] = nxt[r][c]
        for r in range(4):
            for c in range(4):
                ee[i, r, c] = t[r][c]
    return ee_arr, axes_arr, org_arr


def planar_rr_batch(qs, double r1, double r2):
    qs_arr = np.atleast_2d(np.asarray(qs, dtype=np.float64))
    cdef double[:, ::1] q = np.ascontiguousarray(qs_arr)
    cdef Py_ssize_t n = q.shape[0]
    xy_arr = np.empty((n, 2), dtype=np.float64)
    j_arr = np.empty((n, 2, 2), dtype=np.float64)
    cdef double[:, ::1] xy = xy_arr
    cdef double[:, :, ::1] jac = j_arr
    cdef double c1, s1, c12, s12
    cdef Py_ssize_t i
    for i in range(n):
        c1 = cos(q[i, 0]); s1 = sin(q[i, 0])
        c12 = cos(q[i, 0] + q[i, 1]); s12 = sin(q[i, 0] + q[i, 1])
        xy[i, 0] = r1 * c1 + r2 * c12
        xy[i, 1] = r1 * s1 + r2 * s12
        jac[i, 0, 0] = -r1 * s1 - r2 * s12
        jac[i, 0, 1] = -r2 * s12
        jac[i, 1, 0] = r1 * c1 + r2 * c12
        jac[i, 1, 1] = r2 * c12
    return xy_arr, j_arr


def pointing_batch(qs):
    qs_arr = np.atleast_2d(np.asarray(qs, dtype=np.float64))
    cdef double[:, ::1] q = np.ascontiguousarray(qs_arr)
    cdef Py_ssize_t n = q.shape[0]
    p_arr = np.empty((n, 3), dtype=np.float64)
    j_arr = np.empty((n, 3, 2), dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    cdef double[:, :, ::1] jac = j_arr
    cdef double ca, sa, cb, sb
    cdef Py_ssize_t i
    for i in range(n):
        ca = cos(q[i, 0]); sa = sin(q[i, 0])
        cb = cos(q[i, 1]); sb = sin(q[i, 1])
        p[i, 0] = ca * cb
        p[i, 1] = ca * sb
        p[i, 2] = sa
        jac[i, 0, 0] = -sa * cb
        jac[i, 0, 1] = -ca * sb
        jac[i, 1, 0] = -sa * sb
        jac[i, 1, 1] = ca * cb
        jac[i, 2, 0] = ca
        jac[i, 2, 1] = 0.0
    return p_arr, j_arr


def scara_batch(qs, double r1, double r2):
    qs_arr = np.atleast_2d(np.asarray(qs, dtype=np.float64))
    cdef double[:, ::1] q = np.ascontiguousarray(qs_arr)
    cdef Py_ssize_t n = q.shape[0]
    p_arr = np.empty((n, 3), dtype=np.float64)
    j_arr = np.zeros((n, 3, 3), dtype=np.float64)
    cdef double[:, ::1] p = p_arr
    cdef double[:, :, ::1] jac = j_arr
    cdef double c1, s1, c12, s12
    cdef Py_ssize_t i
    for i in range(n):
        c1 = cos(q[i, 0]); s1 = sin(q[i, 0])
        c12 = cos(q[i, 0] + q[i, 1]); s12 = sin(q[i, 0] + q[i, 1])
        p[i, 0] = r1 * c1 + r2 * c12
        p[i, 1] = r1 * s1 + r2 * s12
        p[i, 2] = q[i, 2]
        jac[i, 0, 0] = -r1 * s1 - r2 * s12
        jac[i, 0, 1] = -r2 * s12
        jac[i, 1, 0] = r1 * c1 + r2 * c12
        jac[i, 1, 1] = r2 * c12
        jac[i, 2, 2] = 1.0
    return p_arr, j_arr


def sv_extremes2_batch(jac):
    j_arr = np.ascontiguousarray(jac, dtype=np.float64)
    cdef double[:, :, ::1] J = j_arr
    cdef Py_ssize_t n = J.shape[0]
    cdef Py_ssize_t m = J.shape[1]
    lo_arr = np.empty(n, dtype=np.float64)
    hi_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] lo = lo_arr
    cdef double[::1] hi = hi_arr
    cdef double g00, g11, g01, mean, spread, v
    cdef Py_ssize_t i, r
    for i in range(n):
        g00 = 0.0; g11 = 0.0; g01 = 0.0
        for r in range(m):
            g00 += J[i, r, 0] * J[i, r, 0]
            g11 += J[i, r, 1] * J[i, r, 1]
            g01 += J[i, r, 0] * J[i, r, 1]
        mean = 0.5 * (g00 + g11)
        spread = 0.25 * (g00 - g11) * (g00 - g11) + g01 * g01
        spread = sqrt(spread) if spread > 0.0 else 0.0
        v = mean - spread
        lo[i] = sqrt(v) if v > 0.0 else 0.0
        v = mean + spread
        hi[i] = sqrt(v) if v > 0.0 else 0.0
    return lo_arr, hi_arr
