"""Numpy reference implementation of the batch kernels.

Matches kernels._native operation for operation; kept vectorized so the
pure install is still usable on full-size scans.
"""

import numpy as np


def dh_fk_batch(theta, d, a, alpha, kinds, base, qs):
    """Forward kinematics of an R/P chain over a batch of configurations.

    kinds is uint8 per joint (0 revolute, 1 prismatic).  Returns the end
    frames (N,4,4) plus, for each joint, the world z-axis (N,n,3) and
    origin (N,n,3) of the frame the joint acts in.
    """
    qs = np.atleast_2d(np.asarray(qs, float))
    n_cfg, n_j = qs.shape
    t = np.broadcast_to(np.asarray(base, float), (n_cfg, 4, 4)).copy()
    axes = np.empty((n_cfg, n_j, 3))
    origins = np.empty((n_cfg, n_j, 3))
    ca, sa = np.cos(alpha), np.sin(alpha)
    for j in range(n_j):
        axes[:, j] = t[:, :3, 2]
        origins[:, j] = t[:, :3, 3]
        if kinds[j] == 0:
            th = theta[j] + qs[:, j]
            dd = np.full(n_cfg, d[j])
        else:
            th = np.full(n_cfg, theta[j])
            dd = d[j] + qs[:, j]
        ct, st = np.cos(th), np.sin(th)
        step = np.zeros((n_cfg, 4, 4))
        step[:, 0, 0] = ct
        step[:, 0, 1] = -ca[j] * st
        step[:, 0, 2] = sa[j] * st
        step[:, 0, 3] = a[j] * ct
        step[:, 1, 0] = st
        step[:, 1, 1] = ca[j] * ct
        step[:, 1, 2] = -sa[j] * ct
        step[:, 1, 3] = a[j] * st
        step[:, 2, 1] = sa[j]
        step[:, 2, 2] = ca[j]
        step[:, 2, 3] = dd
        step[:, 3, 3] = 1.0
        t = t @ step
    return t, axes, origins


def planar_rr_batch(qs, r1, r2):
    """Two-link planar arm: positions (N,2) and Jacobians (N,2,2)."""
    qs = np.atleast_2d(np.asarray(qs, float))
    al, be = qs[:, 0], qs[:, 1]
    c1, s1 = np.cos(al), np.sin(al)
    c12, s12 = np.cos(al + be), np.sin(al + be)
    xy = np.stack([r1 * c1 + r2 * c12, r1 * s1 + r2 * s12], axis=-1)
    jac = np.empty((qs.shape[0], 2, 2))
    jac[:, 0, 0] = -r1 * s1 - r2 * s12
    jac[:, 0, 1] = -r2 * s12
    jac[:, 1, 0] = r1 * c1 + r2 * c12
    jac[:, 1, 1] = r2 * c12
    return xy, jac


def pointing_batch(qs):
    """Direction map of a two-axis gimbal: unit vectors and 3x2 Jacobians."""
    qs = np.atleast_2d(np.asarray(qs, float))
    al, be = qs[:, 0], qs[:, 1]
    ca, sa = np.cos(al), np.sin(al)
    cb, sb = np.cos(be), np.sin(be)
    xyz = np.stack([ca * cb, ca * sb, sa], axis=-1)
    jac = np.empty((qs.shape[0], 3, 2))
    jac[:, 0, 0] = -sa * cb
    jac[:, 0, 1] = -ca * sb
    jac[:, 1, 0] = -sa * sb
    jac[:, 1, 1] = ca * cb
    jac[:, 2, 0] = ca
    jac[:, 2, 1] = 0.0
    return xyz, jac


def scara_batch(qs, r1, r2):
    """Planar arm on a vertical slide: positions (N,3), Jacobians (N,3,3)."""
    qs = np.atleast_2d(np.asarray(qs, float))
    xy, j2 = planar_rr_batch(qs[:, :2], r1, r2)
    xyz = np.concatenate([xy, qs[:, 2:3]], axis=-1)
    jac = np.zeros((qs.shape[0], 3, 3))
    jac[:, :2, :2] = j2
    jac[:, 2, 2] = 1.0
    return xyz, jac


def sv_extremes2_batch(jac):
    """Smallest and largest singular value of each (m x 2) matrix.

    Closed form through the 2x2 Gram matrix; cheaper than a full SVD on
    scan-sized batches.
    """
    jac = np.asarray(jac, float)
    g00 = np.einsum("nm,nm->n", jac[:, :, 0], jac[:, :, 0])
    g11 = np.einsum("nm,nm->n", jac[:, :, 1], jac[:, :, 1])
    g01 = np.einsum("nm,nm->n", jac[:, :, 0], jac[:, :, 1])
    mean = 0.5 * (g00 + g11)
    spread = np.sqrt(np.maximum(0.25 * (g00 - g11) ** 2 + g01 * g01, 0.0))
    lo = np.sqrt(np.maximum(mean - spread, 0.0))
    hi = np.sqrt(np.maximum(mean + spread, 0.0))
    return lo, hi
