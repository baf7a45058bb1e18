"""Population limits of the conformal ellipsoid and the norm-residual ball.

``Sigma`` always denotes the covariance (or dispersion) of the stacked
vector ``V = (X, R)`` with ``k`` input and ``l`` residual coordinates, and
``Sigma_lam = Sigma + lam I``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confellip.conformal import Ellipsoid, EmptyRegion
from confellip.errors import DimensionMismatch, DomainError, NoRoot
from confellip.linalg import BlockPartition, logdet_spd, schur_complement, spd_factorize, symmetrize
from confellip.specfun import beta, chi2_cdf, chi2_quantile, kummer_1f1, lgamma, unit_ball_volume

LAMBDA_MAX = 1e12


def _blocks(sigma: ArrayLike, k: int) -> BlockPartition:
    sigma = symmetrize(sigma)
    if not 0 <= k <= sigma.shape[0]:
        raise DimensionMismatch(f"k={k} out of range for a {sigma.shape[0]}x{sigma.shape[0]} matrix")
    return BlockPartition(sigma, k)


def schur_logdet(sigma: ArrayLike, k: int) -> float:
    """``log det(Sigma / Sigma^11)``; equals ``log det Sigma^22`` when ``k = 0``."""
    blocks = _blocks(sigma, k)
    if k == 0:
        return logdet_spd(blocks.C)
    return logdet_spd(blocks.full) - logdet_spd(blocks.A)


@dataclass(frozen=True)
class LimitModel:
    """Population ingredients of the limit ellipsoid.

    Parameters
    ----------
    sigma : (p, p) array
        SPD covariance or dispersion of ``(X, R)``.
    k : int
        Number of input coordinates.
    q_inf : float
        Limit of the conformal quantile; see :func:`gaussian_q_infinity`
        for the Gaussian closed form, otherwise supply a plug-in estimate.
    lam : float
        Ridge parameter.
    mean : (p,) array, optional
        Mean (or location) of ``(X, R)``; zero by default.
    """

    sigma: NDArray[np.float64]
    k: int
    q_inf: float
    lam: float = 0.0
    mean: NDArray[np.float64] | None = None
    shape: NDArray[np.float64] = field(init=False, repr=False)
    coef: NDArray[np.float64] = field(init=False, repr=False)

    def __post_init__(self):
        sigma = symmetrize(self.sigma)
        p = sigma.shape[0]
        if not 1 <= self.k < p:
            raise DimensionMismatch(f"need 1 <= k < p, got k={self.k}, p={p}")
        if self.q_inf < 0:
            raise DomainError(f"q_inf must be nonnegative, got {self.q_inf}")
        if self.lam < 0:
            raise DomainError(f"lambda must be nonnegative, got {self.lam}")
        spd_factorize(sigma)
        mean = np.zeros(p) if self.mean is None else np.asarray(self.mean, dtype=np.float64)
        if mean.shape != (p,):
            raise DimensionMismatch("mean must have length p")
        k = self.k
        s11 = sigma[:k, :k] + self.lam * np.eye(k)
        f11 = spd_factorize(s11)
        cross = sigma[:k, k:]
        # Schur complement of the regularized matrix, with the unregularized
        # off-diagonal blocks entering as in the finite-sample formula
        shape = sigma[k:, k:] + self.lam * np.eye(p - k) - cross.T @ f11.solve(cross)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "shape", 0.5 * (shape + shape.T))
        object.__setattr__(self, "coef", f11.solve(cross).T)
        object.__setattr__(self, "_f11", f11)

    @property
    def p(self) -> int:
        return self.sigma.shape[0]

    @property
    def l(self) -> int:  # noqa: E743
        return self.p - self.k

    def x_mahalanobis(self, x: ArrayLike) -> float:
        xc = np.asarray(x, dtype=np.float64) - self.mean[: self.k]
        return self._f11.inv_quad(xc)

    def center(self, x: ArrayLike) -> NDArray[np.float64]:
        xc = np.asarray(x, dtype=np.float64) - self.mean[: self.k]
        return self.coef @ xc + self.mean[self.k :]

    def radius(self, x: ArrayLike) -> float:
        return self.q_inf - self.x_mahalanobis(x)


def asymptotic_ellipsoid(model: LimitModel, x: ArrayLike):
    """Limit region for input ``x``: an :class:`Ellipsoid` or an :class:`EmptyRegion`."""
    x = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if x.shape != (model.k,):
        raise DimensionMismatch(f"x must have {model.k} entries")
    rho = model.radius(x)
    cls = EmptyRegion if rho < 0 else Ellipsoid
    return cls(model.center(x), model.shape, rho)


def gaussian_q_infinity(k: int, l: int, alpha: float) -> float:  # noqa: E741
    """Gaussian limit quantile: the ``1 - alpha`` quantile of ``chi2(k + l)``."""
    if k < 0 or l < 1:
        raise DomainError(f"need k >= 0 and l >= 1, got k={k}, l={l}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    return chi2_quantile(k + l, 1.0 - alpha)


def gaussian_volume_moment(sigma: ArrayLike, k: int, l: int, alpha: float, q: float) -> float:  # noqa: E741
    """``E[Vol^q]`` of the limit ellipsoid for Gaussian data with ``lam = 0``.

    For ``k >= 1`` the moment is

        C * det(Sigma/Sigma^11)^{q/2} * q_inf^{(k+ql)/2} * 1F1(k/2, (k+ql)/2 + 1, -q_inf/2)

    with ``C = 2^{-k/2} v_l^q B(k/2, ql/2 + 1) / Gamma(k/2)``. For ``k = 0``
    the volume is deterministic.
    """
    if q <= 0:
        raise DomainError(f"moment order must be positive, got {q}")
    sigma = symmetrize(sigma)
    if sigma.shape[0] != k + l:
        raise DimensionMismatch(f"sigma must be {(k + l)}x{(k + l)}")
    q_inf = gaussian_q_infinity(k, l, alpha)
    log_det = schur_logdet(sigma, k)
    log_vl = math.log(unit_ball_volume(l))
    if k == 0:
        return math.exp(q * (log_vl + 0.5 * log_det + 0.5 * l * math.log(q_inf)))
    e = 0.5 * (k + q * l)
    log_c = -0.5 * k * math.log(2.0) + q * log_vl + math.log(beta(0.5 * k, 0.5 * q * l + 1.0)) - lgamma(0.5 * k)
    log_rest = 0.5 * q * log_det + e * math.log(q_inf)
    return math.exp(log_c + log_rest) * kummer_1f1(0.5 * k, e + 1.0, -0.5 * q_inf)


def gaussian_empty_probability(k: int, l: int, alpha: float) -> float:  # noqa: E741
    """Limit probability of an empty region: ``1 - F_{chi2(k)}(F^{-1}_{chi2(k+l)}(1 - alpha))``.

    ``l = 0`` is accepted and returns ``alpha``.
    """
    if k < 1 or l < 0:
        raise DomainError(f"need k >= 1 and l >= 0, got k={k}, l={l}")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if l == 0:
        return float(alpha)
    q_inf = chi2_quantile(k + l, 1.0 - alpha)
    return 1.0 - chi2_cdf(k, q_inf)


def asymptotic_ball_volume(q_norm: float, l: int) -> float:  # noqa: E741
    """``v_l * q_norm^{l/2}`` where ``q_norm`` is the limit quantile of ``||R||^2``."""
    if q_norm < 0:
        raise DomainError(f"q_norm must be nonnegative, got {q_norm}")
    return unit_ball_volume(l) * q_norm ** (0.5 * l)


@dataclass(frozen=True)
class TradeoffResult:
    c_alpha: float
    bound: float
    satisfied: bool


def tradeoff_ratio(sigma: ArrayLike, k: int, l: int, alpha: float,  # noqa: E741
                   quantile: Callable[[int, float], float] | None = None) -> TradeoffResult:
    """Sufficient condition for the limit ellipsoid to be smaller than the ball.

    ``c_alpha = Q_{k+l}(1 - alpha) / Q_l(1 - alpha)`` where ``Q_d`` is the
    quantile function of ``||U||^2`` for a ``d``-dimensional spherical
    vector ``U`` (chi-squared by default). The condition holds when
    ``c_alpha * (det(Sigma/Sigma^11) / det(Sigma^22))^{1/l} <= 1``.
    """
    quantile = chi2_quantile if quantile is None else quantile
    sigma = symmetrize(sigma)
    if sigma.shape[0] != k + l:
        raise DimensionMismatch(f"sigma must be {(k + l)}x{(k + l)}")
    if k == 0:
        c_alpha = 1.0
    else:
        c_alpha = quantile(k + l, 1.0 - alpha) / quantile(l, 1.0 - alpha)
    log_ratio = schur_logdet(sigma, k) - logdet_spd(sigma[k:, k:])
    bound = c_alpha * math.exp(log_ratio / l)
    return TradeoffResult(c_alpha, bound, bool(bound <= 1.0))


def regularized_schur_logdet(sigma: ArrayLike, k: int, lam: float) -> float:
    """``log(det(Sigma_lam) / det(Sigma_lam^11))``, strictly increasing in ``lam``."""
    sigma = symmetrize(sigma)
    return schur_logdet(sigma + lam * np.eye(sigma.shape[0]), k)


def solve_lambda0(sigma: ArrayLike, k: int, l: int, c: float) -> float:  # noqa: E741
    """Root of ``det(Sigma_lam) = c^{-l} det(Sigma_lam^11) det(Sigma^22)``.

    Bisection in ``lam`` to relative width ``1e-10`` after doubling the upper
    bracket from 1.

    Raises
    ------
    NoRoot
        If the target lies below the ``lam = 0`` value or the bracket passes
        ``1e12``.
    """
    if c <= 0:
        raise DomainError(f"c must be positive, got {c}")
    sigma = symmetrize(sigma)
    if sigma.shape[0] != k + l:
        raise DimensionMismatch(f"sigma must be {(k + l)}x{(k + l)}")
    target = -l * math.log(c) + logdet_spd(sigma[k:, k:])

    def g(lam: float) -> float:
        return regularized_schur_logdet(sigma, k, lam) - target

    g0 = g(0.0)
    if abs(g0) <= 1e-12 * max(1.0, abs(target)):
        return 0.0
    if g0 > 0:
        raise NoRoot("target ratio is below its value at lambda = 0")
    lo, hi = 0.0, 1.0
    while g(hi) < 0:
        lo, hi = hi, 2.0 * hi
        if hi > LAMBDA_MAX:
            raise NoRoot(f"no root below lambda = {LAMBDA_MAX:g}")
    while hi - lo > 1e-10 * hi:
        mid = 0.5 * (lo + hi)
        if g(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def asymptotic_mse_matrix(sigma: ArrayLike, k: int, lam: float) -> NDArray[np.float64]:
    """Limit second-moment matrix of the corrected prediction error.

    ``M_lam = Sigma_lam/Sigma_lam^11 - lam (I + Sigma^21 (Sigma_lam^11)^{-2} Sigma^12)``,
    which reduces to ``Sigma/Sigma^11`` at ``lam = 0``.
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    blocks = _blocks(sigma, k)
    l = blocks.l  # noqa: E741
    reg = BlockPartition(blocks.full + lam * np.eye(blocks.p), k)
    f11 = spd_factorize(reg.A)
    schur = schur_complement(reg, f11)
    t = f11.solve(blocks.B)
    M = schur - lam * (np.eye(l) + t.T @ t)
    return 0.5 * (M + M.T)


def residual_covariance(sigma_xy: ArrayLike, beta_hat: ArrayLike) -> NDArray[np.float64]:
    """Covariance of ``(X, Y - beta^T X)`` from the covariance of ``(X, Y)``."""
    sigma_xy = symmetrize(sigma_xy)
    beta_hat = np.atleast_2d(np.asarray(beta_hat, dtype=np.float64))
    k, l = beta_hat.shape  # noqa: E741
    if sigma_xy.shape[0] != k + l:
        raise DimensionMismatch("beta must be k x l with k + l = dim(sigma)")
    T = np.eye(k + l)
    T[k:, :k] = -beta_hat.T
    out = T @ sigma_xy @ T.T
    return 0.5 * (out + out.T)
