"""Ridge multivariate linear predictor used to produce residuals.

There is deliberately no intercept: the experiments use centered data and
the conformal center correction absorbs any remaining bias.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confellip.errors import DimensionMismatch
from confellip.linalg import spd_factorize


@dataclass(frozen=True)
class RidgePredictor:
    """Fitted coefficients ``beta`` (k x l); immutable once fit."""

    beta: NDArray[np.float64]
    mu0: float

    def __post_init__(self):
        beta = np.array(self.beta, dtype=np.float64)
        beta.setflags(write=False)
        object.__setattr__(self, "beta", beta)

    @property
    def k(self) -> int:
        return self.beta.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.beta.shape[1]


def ridge_fit(X_s: ArrayLike, Y_s: ArrayLike, mu0: float = 0.0) -> RidgePredictor:
    """Fit ``beta = (X^T X + mu0 I)^{-1} X^T Y`` by Cholesky on the normal equations."""
    X_s = np.atleast_2d(np.asarray(X_s, dtype=np.float64))
    Y_s = np.asarray(Y_s, dtype=np.float64)
    if Y_s.ndim == 1:
        Y_s = Y_s[:, None]
    if X_s.shape[0] != Y_s.shape[0]:
        raise DimensionMismatch("X_s and Y_s must have the same number of rows")
    if mu0 < 0:
        raise ValueError("mu0 must be nonnegative")
    k = X_s.shape[1]
    if k == 0:
        return RidgePredictor(np.zeros((0, Y_s.shape[1])), mu0)
    gram = X_s.T @ X_s + mu0 * np.eye(k)
    beta = spd_factorize(gram).solve(X_s.T @ Y_s)
    return RidgePredictor(beta, float(mu0))


def predict(model: RidgePredictor, X: ArrayLike) -> NDArray[np.float64]:
    X = np.asarray(X, dtype=np.float64)
    if X.shape[-1] != model.k:
        raise DimensionMismatch(f"expected {model.k} input columns, got {X.shape[-1]}")
    return X @ model.beta
