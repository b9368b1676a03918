import os
import subprocess
import sys

import numpy as np
import pytest

from kinplex import kernels
from kinplex.kernels import _fallback

try:
    from kinplex.kernels import _native
except ImportError:
    _native = None

needs_native = pytest.mark.skipif(_native is None,
                                  reason="compiled extension not built")


def chain_args(rng, n_cfg=64):
    theta = rng.uniform(-np.pi, np.pi, 4)
    d = rng.uniform(-0.5, 0.5, 4)
    a = rng.uniform(0.2, 1.0, 4)
    alpha = rng.uniform(-np.pi, np.pi, 4)
    kinds = np.array([0, 1, 0, 0], dtype=np.uint8)
    base = np.eye(4)
    base[0, 3] = 0.1
    qs = rng.uniform(-np.pi, np.pi, (n_cfg, 4))
    return theta, d, a, alpha, kinds, base, qs


def test_backend_label():
    assert kernels.BACKEND in ("native", "fallback")


@needs_native
def test_dh_fk_parity(rng):
    args = chain_args(rng)
    tn, axn, orn = _native.dh_fk_batch(*args)
    tf, axf, orf = _fallback.dh_fk_batch(*args)
    assert np.abs(tn - tf).max() <= 1e-13
    assert np.abs(axn - axf).max() <= 1e-13
    assert np.abs(orn - orf).max() <= 1e-13


@needs_native
def test_closed_form_map_parity(rng):
    qs = rng.uniform(-np.pi, np.pi, (256, 2))
    for fn, extra in (("planar_rr_batch", (2.0, 1.0)), ("pointing_batch", ())):
        got = getattr(_native, fn)(qs, *extra)
        want = getattr(_fallback, fn)(qs, *extra)
        for g, w in zip(got, want):
            assert np.abs(np.asarray(g) - np.asarray(w)).max() <= 1e-14
    qs3 = rng.uniform(-np.pi, np.pi, (256, 3))
    got = _native.scara_batch(qs3, 2.0, 1.0)
    want = _fallback.scara_batch(qs3, 2.0, 1.0)
    for g, w in zip(got, want):
        assert np.abs(np.asarray(g) - np.asarray(w)).max() <= 1e-14


@needs_native
def test_sv_extremes_parity(rng):
    jac = rng.standard_normal((500, 3, 2))
    lo_n, hi_n = _native.sv_extremes2_batch(jac)
    lo_f, hi_f = _fallback.sv_extremes2_batch(jac)
    assert np.abs(lo_n - lo_f).max() <= 1e-12
    assert np.abs(hi_n - hi_f).max() <= 1e-12


def test_sv_extremes_against_svd(rng):
    jac = rng.standard_normal((500, 3, 2))
    lo, hi = kernels.sv_extremes2_batch(jac)
    sv = np.linalg.svd(jac, compute_uv=False)
    assert np.abs(lo - sv[:, 1]).max() <= 1e-10
    assert np.abs(hi - sv[:, 0]).max() <= 1e-10


def test_sv_extremes_handles_rank_deficiency():
    col = np.array([[1.0], [2.0], [0.0]])
    jac = np.concatenate([col, 2 * col], axis=1)[None, :, :]
    lo, hi = kernels.sv_extremes2_batch(jac)
    assert lo[0] <= 1e-12
    assert np.isclose(hi[0], np.sqrt(5.0) * np.sqrt(5.0))


def test_pure_env_selects_fallback():
    code = "import kinplex.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, KINPLEX_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "fallback"


def test_fallback_dh_matches_pose_layer(rng):
    # one more oracle: the batched chain agrees with the scalar DH step
    from kinplex.mechanism import DHParams, dh_transform

    theta, d, a, alpha, kinds, base, qs = chain_args(rng, n_cfg=8)
    t, _, _ = _fallback.dh_fk_batch(theta, d, a, alpha, kinds, base, qs)
    for i in range(8):
        expect = base.copy()
        for j in range(4):
            kind = "R" if kinds[j] == 0 else "P"
            expect = expect @ dh_transform(
                DHParams(theta[j], d[j], a[j], alpha[j]), qs[i, j], kind)
        assert np.abs(t[i] - expect).max() <= 1e-12
