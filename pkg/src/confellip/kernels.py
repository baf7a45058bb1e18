"""Backend selection for the hot kernels.

The compiled module ``confellip._ckernels`` is used when it was built;
otherwise, or when the environment variable ``CONFELLIP_PURE_PYTHON`` is set
to a non-empty value other than ``0``, the NumPy fallback is used.

Kernel contracts
----------------
``ccle_batch(V, k, n_alpha, lam)``
    ``V`` has shape ``(m, n + 1, p)``: for each of ``m`` instances, ``n``
    calibration rows ``(x, r)`` followed by one test row ``(x_new, r_new)``.
    Returns arrays ``(q, mahal_x, logdet_a, resid_mahal, status)`` where
    ``q`` is the conformal leverage quantile, ``mahal_x`` the term
    ``x_c^T (S^11)^{-1} x_c``, ``logdet_a`` the log-determinant of the Schur
    complement shape matrix, ``resid_mahal`` the value
    ``(r_new - Z0)^T A^{-1} (r_new - Z0)`` and ``status`` is nonzero where the
    ridge covariance failed to factorize.

``exact_membership(G, H, w, cdiag, R, n_alpha)``
    Exact conformal region test for many candidate points given the
    rank-one score expansion (see :class:`confellip.conformal.ScoreMachinery`).
    Returns ``(member, s_last, threshold)``.
"""

from __future__ import annotations

import os
from types import ModuleType

from confellip import _pykernels


def _load_compiled() -> ModuleType | None:
    try:
        from confellip import _ckernels
    except ImportError:
        return None
    return _ckernels


_compiled = _load_compiled()
_force_py = os.environ.get("CONFELLIP_PURE_PYTHON", "") not in ("", "0")

BACKEND = "cython" if (_compiled is not None and not _force_py) else "python"
_impl = _compiled if BACKEND == "cython" else _pykernels


def available_backends() -> list[str]:
    return ["python"] + (["cython"] if _compiled is not None else [])


def get_backend(name: str | None = None) -> ModuleType:
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        return _impl
    if name == "python":
        return _pykernels
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def ccle_batch(V, k, n_alpha, lam):
    return _impl.ccle_batch(V, int(k), int(n_alpha), float(lam))


def exact_membership(G, H, w, cdiag, R, n_alpha):
    return _impl.exact_membership(G, H, w, cdiag, R, int(n_alpha))
