"""Dense symmetric linear algebra used throughout the package.

Every application of an inverse covariance goes through :class:`SpdFactor`,
a thin immutable wrapper around a lower Cholesky factor. No jitter is ever
added: a failed factorization is reported as :class:`NotPositiveDefinite`
so callers can ask for a larger ridge parameter instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.linalg import solve_triangular

from confellip.errors import DimensionMismatch, NotPositiveDefinite

SYMMETRY_RTOL = 1e-12


def symmetrize(M: ArrayLike, rtol: float = SYMMETRY_RTOL) -> NDArray[np.float64]:
    """Return ``(M + M.T) / 2`` after checking that ``M`` is nearly symmetric.

    Raises
    ------
    DimensionMismatch
        If ``M`` is not square.
    ValueError
        If the relative asymmetry exceeds ``rtol``.
    """
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {M.shape}")
    scale = np.max(np.abs(M)) if M.size else 0.0
    asym = np.max(np.abs(M - M.T)) if M.size else 0.0
    if asym > rtol * max(scale, np.finfo(float).tiny):
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
    return 0.5 * (M + M.T)


@dataclass(frozen=True)
class SpdFactor:
    """Cholesky factor ``M = L L^T`` of a symmetric positive definite matrix."""

    lower: NDArray[np.float64]

    @property
    def dimension(self) -> int:
        return self.lower.shape[0]

    def logdet(self) -> float:
        return 2.0 * float(np.sum(np.log(np.diag(self.lower))))

    def half_solve(self, b: ArrayLike) -> NDArray[np.float64]:
        """Solve ``L y = b``; ``||y||^2`` is the inverse quadratic form."""
        return solve_triangular(self.lower, np.asarray(b, dtype=np.float64), lower=True)

    def solve(self, b: ArrayLike) -> NDArray[np.float64]:
        y = self.half_solve(b)
        return solve_triangular(self.lower, y, lower=True, trans="T")

    def inv_quad(self, b: ArrayLike) -> NDArray[np.float64] | float:
        """``b^T M^{-1} b`` for a vector, or column-wise for a ``(p, m)`` array."""
        y = self.half_solve(b)
        q = np.sum(y * y, axis=0)
        return float(q) if np.ndim(q) == 0 else q

    def inverse(self) -> NDArray[np.float64]:
        inv = self.solve(np.eye(self.dimension))
        return 0.5 * (inv + inv.T)

    def reconstruct(self) -> NDArray[np.float64]:
        return self.lower @ self.lower.T


def spd_factorize(M: ArrayLike) -> SpdFactor:
    """Cholesky-factorize a symmetric positive definite matrix.

    Parameters
    ----------
    M : array_like, shape (p, p)
        Symmetric matrix; asymmetry up to ``1e-12`` relative is averaged out.

    Returns
    -------
    SpdFactor

    Raises
    ------
    NotPositiveDefinite
        If any pivot is at or below ``p * eps * max(diag(M))``.
    """
    S = symmetrize(M)
    p = S.shape[0]
    if p == 0:
        return SpdFactor(np.zeros((0, 0)))
    max_diag = float(np.max(np.diag(S)))
    threshold = p * np.finfo(float).eps * max(max_diag, 0.0)
    if max_diag <= 0.0:
        raise NotPositiveDefinite("matrix has a nonpositive diagonal")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(L) ** 2
    if np.any(~np.isfinite(pivots)) or np.min(pivots) <= threshold:
        raise NotPositiveDefinite(
            f"smallest Cholesky pivot {np.min(pivots):.3e} <= {threshold:.3e}"
        )
    return SpdFactor(L)


@dataclass(frozen=True)
class BlockPartition:
    """View of a symmetric ``(k + l) x (k + l)`` matrix as a 2x2 block matrix."""

    full: NDArray[np.float64]
    k: int

    def __post_init__(self):
        full = symmetrize(self.full)
        if not 0 <= self.k <= full.shape[0]:
            raise DimensionMismatch(f"k={self.k} incompatible with p={full.shape[0]}")
        object.__setattr__(self, "full", full)

    @property
    def p(self) -> int:
        return self.full.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.p - self.k

    @property
    def A(self) -> NDArray[np.float64]:
        return self.full[: self.k, : self.k]

    @property
    def B(self) -> NDArray[np.float64]:
        return self.full[: self.k, self.k :]

    @property
    def Bt(self) -> NDArray[np.float64]:
        return self.full[self.k :, : self.k]

    @property
    def C(self) -> NDArray[np.float64]:
        return self.full[self.k :, self.k :]


def schur_complement(S: BlockPartition, factor_a: SpdFactor | None = None) -> NDArray[np.float64]:
    """Return ``C - B^T A^{-1} B`` for the block partition ``S``.

    ``factor_a`` may be passed to reuse an existing factorization of ``S.A``.
    With ``k = 0`` the complement is ``C`` itself.
    """
    if S.k == 0:
        return S.C.copy()
    if factor_a is None:
        factor_a = spd_factorize(S.A)
    Y = factor_a.half_solve(S.B)
    out = S.C - Y.T @ Y
    return 0.5 * (out + out.T)


def sym_eigen_extremes(M: ArrayLike) -> tuple[float, float]:
    """Smallest and largest eigenvalue of a symmetric matrix."""
    w = np.linalg.eigvalsh(symmetrize(M))
    return float(w[0]), float(w[-1])


def logdet_spd(M: ArrayLike) -> float:
    return spd_factorize(M).logdet()
