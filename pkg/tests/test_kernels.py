import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from confellip import kernels
from confellip.conformal import (
    CalibrationSet,
    build_score_machinery,
    conformal_rank,
    exact_region_membership,
    fit_ccle,
)

BACKENDS = kernels.available_backends()


def reference(V, k, alpha, lam):
    """Per-instance values through the conformal module."""
    out = []
    for inst in V:
        calib = CalibrationSet(inst[:-1, :k], inst[:-1, k:])
        fit = fit_ccle(calib, alpha, lam)
        region = fit.region(inst[-1, :k])
        out.append((fit.q, fit.x_mahalanobis(inst[-1, :k]), np.linalg.slogdet(fit.shape)[1],
                    float(region.mahalanobis(inst[-1, k:]))))
    return np.array(out).T


def test_compiled_backend_is_active_when_built():
    assert kernels.BACKEND in BACKENDS
    if "cython" in BACKENDS and not os.environ.get("CONFELLIP_PURE_PYTHON"):
        assert kernels.BACKEND == "cython"


def test_env_var_forces_fallback():
    code = "import confellip.kernels as k; print(k.BACKEND)"
    env = dict(os.environ, CONFELLIP_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.get_backend("fortran")


@pytest.mark.parametrize("backend", BACKENDS)
@given(seed=st.integers(0, 10**6), lam=st.sampled_from([0.0, 0.01, 1.0]))
def test_ccle_batch_matches_reference(backend, seed, lam):
    rng = np.random.default_rng(seed)
    k, l = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    n = int(rng.integers(k + l + 3, 40))
    V = rng.standard_normal((3, n + 1, k + l))
    V[..., k:] += V[..., :k] @ rng.standard_normal((k, l))
    q, mx, ld, rs, st_ = kernels.get_backend(backend).ccle_batch(V, k, conformal_rank(n, 0.2), lam)
    assert not st_.any()
    np.testing.assert_allclose(np.vstack([q, mx, ld, rs]), reference(V, k, 0.2, lam), rtol=1e-9, atol=1e-9)


@pytest.mark.parametrize("backend", BACKENDS)
def test_ccle_batch_flags_singular(backend):
    V = np.random.default_rng(0).standard_normal((2, 11, 3))
    V[1, :, 2] = V[1, :, 0]  # collinear columns
    *_, status = kernels.get_backend(backend).ccle_batch(V, 1, 9, 0.0)
    assert status.tolist() == [0, 1]


@pytest.mark.parametrize("backend", BACKENDS)
def test_ccle_batch_without_inputs(backend):
    rng = np.random.default_rng(1)
    V = rng.standard_normal((1, 31, 2))
    q, mx, ld, rs, _ = kernels.get_backend(backend).ccle_batch(V, 0, conformal_rank(30, 0.1), 0.0)
    B = V[0, :30] - V[0, :30].mean(axis=0)
    S = B.T @ B / 30
    c = V[0, 30] - V[0, :30].mean(axis=0)
    assert mx[0] == 0.0
    assert ld[0] == pytest.approx(np.linalg.slogdet(S)[1], rel=1e-10)
    assert rs[0] == pytest.approx(c @ np.linalg.solve(S, c), rel=1e-10)


def test_backends_agree():
    if len(BACKENDS) < 2:
        pytest.skip("compiled backend not built")
    rng = np.random.default_rng(2)
    V = rng.standard_normal((20, 201, 9))
    a = kernels.get_backend("python").ccle_batch(V, 6, 181, 0.0)
    b = kernels.get_backend("cython").ccle_batch(V, 6, 181, 0.0)
    for x, y in zip(a, b):
        np.testing.assert_allclose(x, y, rtol=1e-10, atol=1e-10)


@pytest.mark.parametrize("backend", BACKENDS)
def test_exact_membership_backend(backend):
    rng = np.random.default_rng(3)
    X = rng.standard_normal((40, 2))
    calib = CalibrationSet(X, X @ [[1.0, 0.2], [0.3, -1.0]] + rng.standard_normal((40, 2)))
    mach = build_score_machinery(calib, rng.standard_normal(2), 0.1)
    Z = 3 * rng.standard_normal((500, 2))
    n = calib.n
    rank = conformal_rank(n, 0.15)
    member, s_last, thresh = kernels.get_backend(backend).exact_membership(
        mach.G, mach.H, mach.w[:n], mach.c_diag[:n], mach.r_vectors(Z), rank)
    S = mach.scores(Z)
    np.testing.assert_allclose(s_last, S[:, -1], atol=1e-10)
    np.testing.assert_allclose(thresh, np.sort(S[:, :-1], axis=1)[:, rank - 1], atol=1e-10)
    np.testing.assert_array_equal(member.astype(bool), exact_region_membership(mach, Z, 0.15))
