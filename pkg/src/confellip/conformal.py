"""Conformal prediction ellipsoids from a calibration sample.

The main entry points are :func:`ccle_region`, which returns the explicit
ellipsoid for a new input, :func:`ball_region` for the norm-residual
baseline, and :class:`ScoreMachinery`, which evaluates the exact
Mahalanobis-type conformity scores for arbitrary candidate residuals using
a single factorization.

All regions live in residual space; call ``region.shifted(yhat)`` to move
them to output space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confellip import kernels
from confellip.errors import (
    AlphaTooSmall,
    DimensionMismatch,
    DomainError,
    NotPositiveDefinite,
    UndefinedMetric,
)
from confellip.linalg import (
    BlockPartition,
    SpdFactor,
    schur_complement,
    spd_factorize,
    sym_eigen_extremes,
)
from confellip.specfun import unit_ball_volume

_LAMBDA_HINT = "ridge covariance is singular; increase lambda for this sample"


# ---------------------------------------------------------------------------
# Calibration data and ridge statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CalibrationSet:
    """Paired inputs ``X`` (n x k) and residuals ``R`` (n x l).

    ``Y`` and ``Yhat`` are optional; when both are given ``R`` must equal
    ``Y - Yhat``. Use :meth:`from_outputs` to build ``R`` from them.
    """

    X: NDArray[np.float64]
    R: NDArray[np.float64]
    Y: NDArray[np.float64] | None = None
    Yhat: NDArray[np.float64] | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        R = np.asarray(self.R, dtype=np.float64)
        if X.ndim == 1:
            X = X[:, None]
        if R.ndim == 1:
            R = R[:, None]
        if X.shape[0] != R.shape[0]:
            raise DimensionMismatch("X and R must have the same number of rows")
        if X.shape[0] < 2:
            raise DomainError("a calibration set needs at least 2 points")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "R", R)
        if self.Y is not None and self.Yhat is not None:
            Y = np.asarray(self.Y, dtype=np.float64).reshape(R.shape)
            Yhat = np.asarray(self.Yhat, dtype=np.float64).reshape(R.shape)
            if np.max(np.abs(Y - Yhat - R)) > 1e-12 * max(1.0, np.max(np.abs(Y))):
                raise ValueError("R must equal Y - Yhat")
            object.__setattr__(self, "Y", Y)
            object.__setattr__(self, "Yhat", Yhat)

    @classmethod
    def from_outputs(cls, X: ArrayLike, Y: ArrayLike, Yhat: ArrayLike) -> "CalibrationSet":
        Y = np.asarray(Y, dtype=np.float64)
        Yhat = np.asarray(Yhat, dtype=np.float64)
        return cls(X, Y - Yhat, Y, Yhat)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def k(self) -> int:
        return self.X.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.R.shape[1]

    @property
    def p(self) -> int:
        return self.k + self.l

    @property
    def V(self) -> NDArray[np.float64]:
        return np.hstack([self.X, self.R])

    def permuted(self, perm: ArrayLike) -> "CalibrationSet":
        perm = np.asarray(perm)
        return CalibrationSet(self.X[perm], self.R[perm])


@dataclass(frozen=True)
class RidgeStatistics:
    """Centered design and ridge covariance of a calibration sample."""

    B: NDArray[np.float64]
    mean: NDArray[np.float64]
    sigma: NDArray[np.float64]
    lam: float
    k: int
    factor_full: SpdFactor
    factor11: SpdFactor

    @property
    def n(self) -> int:
        return self.B.shape[0]

    @property
    def p(self) -> int:
        return self.B.shape[1]

    @property
    def l(self) -> int:  # noqa: E743
        return self.p - self.k

    @cached_property
    def blocks(self) -> BlockPartition:
        return BlockPartition(self.sigma, self.k)

    @property
    def x_mean(self) -> NDArray[np.float64]:
        return self.mean[: self.k]

    @property
    def r_mean(self) -> NDArray[np.float64]:
        return self.mean[self.k :]


def build_ridge_statistics(calib: CalibrationSet, lam: float) -> RidgeStatistics:
    """Center the calibration vectors and form ``B^T B / n + lam I``.

    Raises
    ------
    NotPositiveDefinite
        If the ridge covariance (or its input block) cannot be factorized.
    """
    if lam < 0:
        raise DomainError(f"lambda must be nonnegative, got {lam}")
    if calib.k < 1:
        raise DomainError("at least one input column is required (k >= 1)")
    V = calib.V
    n, p = V.shape
    mean = V.mean(axis=0)
    B = V - mean
    sigma = B.T @ B / n + lam * np.eye(p)
    sigma = 0.5 * (sigma + sigma.T)
    try:
        factor_full = spd_factorize(sigma)
        factor11 = spd_factorize(sigma[: calib.k, : calib.k])
    except NotPositiveDefinite as exc:
        raise NotPositiveDefinite(f"{_LAMBDA_HINT} ({exc})") from None
    return RidgeStatistics(B, mean, sigma, float(lam), calib.k, factor_full, factor11)


def leverage_diagonals(stats: RidgeStatistics) -> NDArray[np.float64]:
    """Diagonal ``p_i = b_i^T Sigma^{-1} b_i / n`` of the regularized projector."""
    Y = stats.factor_full.half_solve(stats.B.T)
    return np.sum(Y * Y, axis=0) / stats.n


def conformal_rank(n: int, alpha: float) -> int:
    """``n_alpha = ceil((1 - alpha)(n + 1))`` after validating ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    if alpha <= 1.0 / (n + 1):
        raise AlphaTooSmall(f"alpha={alpha} must exceed 1/(n+1)={1.0 / (n + 1):.6g}")
    # round() absorbs representation error such as 0.9 * 10 = 9.000000000000002
    return int(math.ceil(round((1.0 - alpha) * (n + 1), 9)))


def order_statistic(values: ArrayLike, rank: int) -> float:
    """``rank``-th smallest value (1-based), ties resolved by a stable sort."""
    return float(np.sort(np.asarray(values, dtype=np.float64), kind="stable")[rank - 1])


def conformal_quantile(p_diag: ArrayLike, n: int, alpha: float) -> float:
    """``q_{n,alpha} = n * p_(n_alpha)``, the ``n_alpha``-th smallest scaled leverage."""
    p_diag = np.asarray(p_diag, dtype=np.float64)
    if p_diag.shape != (n,):
        raise DimensionMismatch(f"expected {n} leverages, got shape {p_diag.shape}")
    return n * order_statistic(p_diag, conformal_rank(n, alpha))


# ---------------------------------------------------------------------------
# Region types
# ---------------------------------------------------------------------------


def _ellipsoid_volume(l: int, logdet_shape: float, radius: float) -> float:  # noqa: E741
    if radius <= 0:
        return 0.0
    return unit_ball_volume(l) * math.exp(0.5 * logdet_shape + 0.5 * l * math.log(radius))


@dataclass(frozen=True)
class Ellipsoid:
    """``{z : (z - center)^T shape^{-1} (z - center) <= radius}``."""

    center: NDArray[np.float64]
    shape: NDArray[np.float64]
    radius: float
    kind: str = field(default="ellipsoid", init=False)

    def __post_init__(self):
        center = np.atleast_1d(np.asarray(self.center, dtype=np.float64))
        shape = np.atleast_2d(np.asarray(self.shape, dtype=np.float64))
        if shape.shape != (center.size, center.size):
            raise DimensionMismatch("shape must be l x l with l = len(center)")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self) -> int:
        return self.center.size

    @cached_property
    def shape_factor(self) -> SpdFactor:
        return spd_factorize(self.shape)

    def mahalanobis(self, z: ArrayLike) -> NDArray[np.float64] | float:
        """``(z - center)^T shape^{-1} (z - center)`` for one point or rows of ``z``."""
        z = np.asarray(z, dtype=np.float64)
        diff = z - self.center
        if diff.ndim == 1:
            return self.shape_factor.inv_quad(diff)
        return np.atleast_1d(self.shape_factor.inv_quad(diff.T))

    def contains(self, z: ArrayLike):
        return self.mahalanobis(z) <= self.radius

    def volume(self) -> float:
        return _ellipsoid_volume(self.dim, self.shape_factor.logdet(), self.radius)

    def eccentricity(self) -> float:
        lo, hi = sym_eigen_extremes(self.shape)
        return math.sqrt(max(0.0, 1.0 - lo / hi))

    def shifted(self, offset: ArrayLike):
        return type(self)(**{**self._fields(), "center": self.center + np.asarray(offset)})

    def _fields(self) -> dict:
        return {"center": self.center, "shape": self.shape, "radius": self.radius}


@dataclass(frozen=True)
class EmptyRegion(Ellipsoid):
    """Empty region; keeps the shape, center and the negative radius for flooring."""

    kind: str = field(default="empty", init=False)

    def contains(self, z: ArrayLike):
        z = np.asarray(z, dtype=np.float64)
        return False if z.ndim == 1 else np.zeros(z.shape[0], dtype=bool)

    def volume(self) -> float:
        return 0.0


@dataclass(frozen=True)
class FlooredEllipsoid(Ellipsoid):
    """Ellipsoid whose radius was raised to ``epsilon**2`` to reach a minimum volume."""

    epsilon: float = 0.0
    original_radius: float = 0.0
    kind: str = field(default="floored", init=False)

    def _fields(self) -> dict:
        return {**super()._fields(), "epsilon": self.epsilon,
                "original_radius": self.original_radius}


@dataclass(frozen=True)
class FullSpace:
    """The whole residual space ``R^l``."""

    dim: int
    kind: str = field(default="full_space", init=False)

    def contains(self, z: ArrayLike):
        z = np.asarray(z, dtype=np.float64)
        return True if z.ndim == 1 else np.ones(z.shape[0], dtype=bool)

    def volume(self) -> float:
        return math.inf

    def shifted(self, offset: ArrayLike) -> "FullSpace":
        return self


RegionOutcome = Union[Ellipsoid, EmptyRegion, FlooredEllipsoid, FullSpace]


@dataclass(frozen=True)
class Ball:
    """Norm-residual region: ``{z : ||z - center||^2 <= squared_radius}``."""

    center: NDArray[np.float64]
    squared_radius: float
    kind: str = field(default="ball", init=False)

    @property
    def dim(self) -> int:
        return self.center.size

    def contains(self, z: ArrayLike):
        diff = np.asarray(z, dtype=np.float64) - self.center
        return np.sum(diff * diff, axis=-1) <= self.squared_radius

    def volume(self) -> float:
        return unit_ball_volume(self.dim) * self.squared_radius ** (0.5 * self.dim)

    def eccentricity(self) -> float:
        return 0.0

    def shifted(self, offset: ArrayLike) -> "Ball":
        return Ball(self.center + np.asarray(offset), self.squared_radius)


@dataclass(frozen=True)
class RegionMetrics:
    volume: float
    eccentricity: float


def region_metrics(region) -> RegionMetrics:
    """Volume and principal eccentricity ``sqrt(1 - lambda_min / lambda_max)``.

    Raises
    ------
    UndefinedMetric
        For :class:`FullSpace`, whose eccentricity is undefined (its volume,
        ``inf``, is available through ``region.volume()``).
    """
    if isinstance(region, FullSpace):
        raise UndefinedMetric("eccentricity is undefined for the full space")
    return RegionMetrics(region.volume(), region.eccentricity())


def apply_volume_floor(region, v_min: float):
    """Raise the radius of small or empty ellipsoids so the volume is ``v_min``.

    Regions already at least ``v_min`` in volume, and the full space, are
    returned unchanged.
    """
    if not v_min > 0:
        raise DomainError(f"v_min must be positive, got {v_min}")
    if isinstance(region, FullSpace):
        return region
    if region.volume() >= v_min:
        return region
    l = region.dim  # noqa: E741
    det_sqrt = math.exp(0.5 * region.shape_factor.logdet())
    eps = (v_min / (unit_ball_volume(l) * det_sqrt)) ** (1.0 / l)
    return FlooredEllipsoid(region.center, region.shape, eps * eps,
                            epsilon=eps, original_radius=region.radius)


# ---------------------------------------------------------------------------
# The explicit ellipsoid
# ---------------------------------------------------------------------------


FULL_SPACE_RTOL = 1e-10


def is_full_space(q, n: int):
    """``q >= n - 1`` up to rounding; the radius budget has a pole at ``q = n - 1``."""
    return q >= (n - 1) * (1.0 - FULL_SPACE_RTOL)


def radius_budget(q: float, n: int) -> float:
    """``(q + 1) / (1 - (q + 1)/n) - 1``: radius before the input correction."""
    return (q + 1.0) / (1.0 - (q + 1.0) / n) - 1.0


@dataclass(frozen=True)
class CcleFit:
    """Everything in the ellipsoid that does not depend on the new input."""

    stats: RidgeStatistics
    alpha: float
    q: float
    shape: NDArray[np.float64]
    coef: NDArray[np.float64]

    @property
    def full_space(self) -> bool:
        return bool(is_full_space(self.q, self.stats.n))

    def x_mahalanobis(self, x_new: ArrayLike) -> float:
        xc = np.asarray(x_new, dtype=np.float64) - self.stats.x_mean
        return self.stats.factor11.inv_quad(xc)

    def center(self, x_new: ArrayLike) -> NDArray[np.float64]:
        """``Z0 = Sigma^21 (Sigma^11)^{-1} (x_new - mean_x) + mean_r``."""
        xc = np.asarray(x_new, dtype=np.float64) - self.stats.x_mean
        return self.coef @ xc + self.stats.r_mean

    def radius(self, x_new: ArrayLike) -> float:
        return radius_budget(self.q, self.stats.n) - self.x_mahalanobis(x_new)

    def region(self, x_new: ArrayLike) -> RegionOutcome:
        x_new = np.atleast_1d(np.asarray(x_new, dtype=np.float64))
        if x_new.shape != (self.stats.k,):
            raise DimensionMismatch(f"x_new must have {self.stats.k} entries")
        if self.full_space:
            return FullSpace(self.stats.l)
        rho = self.radius(x_new)
        cls = EmptyRegion if rho < 0 else Ellipsoid
        return cls(self.center(x_new), self.shape, rho)

    @property
    def intercept(self) -> NDArray[np.float64]:
        """``e_n = mean_r - A_n mean_x`` of the ridge regression of R on X."""
        return self.stats.r_mean - self.coef @ self.stats.x_mean


def fit_ccle(calib: CalibrationSet, alpha: float, lam: float) -> CcleFit:
    stats = build_ridge_statistics(calib, lam)
    q = conformal_quantile(leverage_diagonals(stats), stats.n, alpha)
    blocks = stats.blocks
    shape = schur_complement(blocks, stats.factor11)
    coef = stats.factor11.solve(blocks.B).T  # Sigma^21 (Sigma^11)^{-1}
    return CcleFit(stats, float(alpha), float(q), shape, coef)


def ccle_region(calib: CalibrationSet, x_new: ArrayLike, alpha: float, lam: float) -> RegionOutcome:
    """Conformal ellipsoid for the residual of a new input ``x_new``.

    Returns :class:`FullSpace` when ``q_{n,alpha} >= n - 1``, an
    :class:`EmptyRegion` when the radius is negative, and an
    :class:`Ellipsoid` otherwise.
    """
    return fit_ccle(calib, alpha, lam).region(x_new)


def corrected_center(calib: CalibrationSet, x_new: ArrayLike, yhat_new: ArrayLike,
                     lam: float = 0.0) -> NDArray[np.float64]:
    """Corrected prediction ``Z0 + yhat_new`` (the ellipsoid center in output space)."""
    stats = build_ridge_statistics(calib, lam)
    coef = stats.factor11.solve(stats.blocks.B).T
    xc = np.asarray(x_new, dtype=np.float64) - stats.x_mean
    return coef @ xc + stats.r_mean + np.asarray(yhat_new, dtype=np.float64)


def ball_region(calib: CalibrationSet, yhat_new: ArrayLike, alpha: float) -> Ball:
    """Norm-residual ball: squared radius is the ``n_alpha``-th smallest ``||R_i||^2``."""
    sq = np.sum(calib.R * calib.R, axis=1)
    r2 = order_statistic(sq, conformal_rank(calib.n, alpha))
    return Ball(np.atleast_1d(np.asarray(yhat_new, dtype=np.float64)), r2)


# ---------------------------------------------------------------------------
# Exact scores
# ---------------------------------------------------------------------------


def exact_score_matrix(calib: CalibrationSet, x_new: ArrayLike, z: ArrayLike,
                       lam: float) -> NDArray[np.float64]:
    """All ``n + 1`` scores at candidate residual(s) ``z`` by direct inversion.

    This is the slow reference path: for every ``z`` it recenters the
    augmented sample and solves with ``W^T W + n lam I``. ``z`` may have shape
    ``(l,)`` or ``(m, l)``; the result then has shape ``(n+1,)`` or ``(m, n+1)``.
    """
    z = np.asarray(z, dtype=np.float64)
    single = z.ndim == 1
    Z = np.atleast_2d(z)
    n, k = calib.n, calib.k
    m = Z.shape[0]
    V = np.broadcast_to(calib.V, (m, n, calib.p))
    last = np.hstack([np.broadcast_to(np.asarray(x_new, dtype=np.float64), (m, k)), Z])
    Vz = np.concatenate([V, last[:, None, :]], axis=1)
    W = Vz - Vz.mean(axis=1, keepdims=True)
    M = np.einsum("mni,mnj->mij", W, W) + n * lam * np.eye(calib.p)
    try:
        L = np.linalg.cholesky(M)
    except np.linalg.LinAlgError:
        raise NotPositiveDefinite(_LAMBDA_HINT) from None
    Y = np.linalg.solve(L, W.transpose(0, 2, 1))
    S = n * np.sum(Y * Y, axis=1)
    return S[0] if single else S


@dataclass(frozen=True)
class ScoreMachinery:
    """Rank-one expansion ``S(z) = n C - n b(z) b(z)^T / (1 + d(z))``.

    Built once per ``(calibration set, x_new, lam)``; each candidate ``z``
    then costs ``O(n p)`` instead of a fresh factorization.
    """

    stats: RidgeStatistics
    x_new: NDArray[np.float64]
    p_diag: NDArray[np.float64]
    w: NDArray[np.float64]
    v_norm: float
    G: NDArray[np.float64]
    H: NDArray[np.float64]

    @property
    def n(self) -> int:
        return self.stats.n

    @property
    def c_diag(self) -> NDArray[np.float64]:
        """Diagonal of ``C_n``: ``p_i + w_i^2`` for ``i <= n`` and ``n/(n+1)`` last."""
        return np.append(self.p_diag, 0.0) + self.w * self.w

    def r_vectors(self, z: ArrayLike) -> NDArray[np.float64]:
        Z = np.atleast_2d(np.asarray(z, dtype=np.float64))
        xc = np.broadcast_to(self.x_new - self.stats.x_mean, (Z.shape[0], self.stats.k))
        return self.v_norm * np.hstack([xc, Z - self.stats.r_mean])

    def evaluate(self, z: ArrayLike):
        """Return ``(S_{n+1}(z), d_n(z), b^n(z))``, batched over rows of ``z``."""
        single = np.asarray(z).ndim == 1
        r = self.r_vectors(z)
        d = np.einsum("mi,ij,mj->m", r, self.H, r) / self.n
        b = np.hstack([r @ self.G.T / self.n, np.zeros((r.shape[0], 1))]) - self.w
        n = self.n
        s_last = n * n / (n + 1.0) * d / (1.0 + d)
        if single:
            return float(s_last[0]), float(d[0]), b[0]
        return s_last, d, b

    def scores(self, z: ArrayLike) -> NDArray[np.float64]:
        """All ``n + 1`` scores at ``z`` from the rank-one expansion."""
        single = np.asarray(z).ndim == 1
        _, d, b = self.evaluate(np.atleast_2d(z))
        S = self.n * self.c_diag - self.n * b * b / (1.0 + d[:, None])
        return S[0] if single else S


def build_score_machinery(calib: CalibrationSet, x_new: ArrayLike, lam: float) -> ScoreMachinery:
    stats = build_ridge_statistics(calib, lam)
    n = stats.n
    H = stats.factor_full.inverse()
    G = stats.B @ H
    p_diag = np.einsum("ij,ij->i", G, stats.B) / n
    v = np.full(n + 1, -1.0 / (n + 1))
    v[n] = n / (n + 1.0)
    v_norm = math.sqrt(n / (n + 1.0))
    x_new = np.atleast_1d(np.asarray(x_new, dtype=np.float64))
    if x_new.shape != (stats.k,):
        raise DimensionMismatch(f"x_new must have {stats.k} entries")
    return ScoreMachinery(stats, x_new, p_diag, v / v_norm, v_norm, G, H)


def fast_score_eval(machinery: ScoreMachinery, z: ArrayLike):
    """``(S_{n+1}(z), d_n(z), b^n(z))`` from the precomputed machinery."""
    return machinery.evaluate(z)


def exact_region_membership(machinery: ScoreMachinery, z: ArrayLike, alpha: float):
    """Whether ``z`` lies in the exact conformal region ``S_{n+1}(z) <= S_(n_alpha)(z)``.

    Accepts one point (returns ``bool``) or an ``(m, l)`` array (returns a
    boolean array).
    """
    n = machinery.n
    rank = conformal_rank(n, alpha)
    single = np.asarray(z).ndim == 1
    r = machinery.r_vectors(z)
    member, _, _ = kernels.exact_membership(
        machinery.G, machinery.H, machinery.w[:n], machinery.c_diag[:n], r, rank
    )
    member = member.astype(bool)
    return bool(member[0]) if single else member


# ---------------------------------------------------------------------------
# Probe grids and serialization
# ---------------------------------------------------------------------------


def bounding_box(center: ArrayLike, shape: ArrayLike, radius: float, scale: float = 1.5):
    """Axis-aligned box ``center +/- scale * sqrt(radius * shape_ii)``."""
    center = np.asarray(center, dtype=np.float64)
    half = scale * np.sqrt(abs(radius) * np.diag(np.asarray(shape, dtype=np.float64)))
    return center - half, center + half


def probe_grid(lower: ArrayLike, upper: ArrayLike, resolution: int = 25) -> NDArray[np.float64]:
    """Regular grid with ``resolution`` points per axis (cell centers)."""
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    axes = [lo + (np.arange(resolution) + 0.5) * (hi - lo) / resolution
            for lo, hi in zip(lower, upper)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


def _finite_or_none(x: float):
    return x if math.isfinite(x) else None


def region_to_dict(region) -> dict:
    """JSON-ready description: kind, center, shape, radius, volume, eccentricity."""
    if isinstance(region, FullSpace):
        return {"kind": region.kind, "center": None, "shape": None, "radius": None,
                "volume": None, "eccentricity": None}
    if isinstance(region, Ball):
        return {"kind": "ball", "center": region.center.tolist(),
                "shape": np.eye(region.dim).tolist(), "radius": region.squared_radius,
                "volume": region.volume(), "eccentricity": 0.0}
    out = {"kind": region.kind, "center": region.center.tolist(),
           "shape": region.shape.tolist(), "radius": region.radius,
           "volume": region.volume(), "eccentricity": region.eccentricity()}
    if isinstance(region, FlooredEllipsoid):
        out["epsilon"] = region.epsilon
    return out


def region_from_dict(data: dict):
    kind = data["kind"]
    if kind == "full_space":
        return FullSpace(int(data.get("dim", 0)))
    if kind == "ball":
        return Ball(np.asarray(data["center"]), float(data["radius"]))
    cls = {"ellipsoid": Ellipsoid, "empty": EmptyRegion}.get(kind)
    if cls is not None:
        return cls(np.asarray(data["center"]), np.asarray(data["shape"]), data["radius"])
    if kind == "floored":
        return FlooredEllipsoid(np.asarray(data["center"]), np.asarray(data["shape"]),
                                data["radius"], epsilon=data.get("epsilon", 0.0))
    raise ValueError(f"unknown region kind {kind!r}")
