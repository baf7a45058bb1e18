"""Reproducible random streams and the samplers used by the experiments.

A stream is identified by ``(seed, stream_id)`` and mapped to a Philox
counter-based generator keyed by both integers, so replicates can be
generated in any order, or in parallel, without sharing RNG state.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from confellip.errors import DomainError, UnsupportedDistribution
from confellip.linalg import spd_factorize
from confellip.specfun import MaternParams, matern_kernel

_MASK64 = (1 << 64) - 1

PHASES = {"split": 0, "calib": 1, "test": 2, "probe": 3, "aux": 4}


def derive_stream_id(*parts: int | str) -> int:
    """Deterministic 64-bit id from a tuple of ints/strings (e.g. replicate, phase)."""
    h = hashlib.blake2b(digest_size=8)
    for part in parts:
        h.update(repr(part).encode())
        h.update(b"\x1f")
    return int.from_bytes(h.digest(), "little")


@dataclass(frozen=True)
class RngStream:
    """Value-type handle on an independent random stream.

    Every call to :meth:`generator` restarts the stream from its first draw,
    so a given ``(seed, stream_id)`` always yields the same sequence.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, "seed", int(self.seed) & _MASK64)
        object.__setattr__(self, "stream_id", int(self.stream_id) & _MASK64)

    def generator(self) -> np.random.Generator:
        key = (self.stream_id << 64) | self.seed
        return np.random.Generator(np.random.Philox(key=key))

    def child(self, *parts: int | str) -> "RngStream":
        return RngStream(self.seed, derive_stream_id(self.stream_id, *parts))

    @classmethod
    def for_phase(cls, seed: int, replicate: int, phase: str) -> "RngStream":
        return cls(seed, derive_stream_id(replicate, PHASES[phase]))


def matern_covariance(p: int, params: MaternParams) -> NDArray[np.float64]:
    """Toeplitz covariance ``Sigma_ij = k_nu(i - j)`` on the grid ``1..p``."""
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    lags = np.arange(p)
    col = np.array([matern_kernel(params, float(h)) for h in lags])
    return col[np.abs(lags[:, None] - lags[None, :])]


def _as_rng(stream: RngStream | np.random.Generator) -> np.random.Generator:
    return stream.generator() if isinstance(stream, RngStream) else stream


def sample_mvn(stream, mu: ArrayLike, sigma: ArrayLike, n: int | tuple) -> NDArray[np.float64]:
    """Rows i.i.d. ``N(mu, sigma)``. ``n`` may be a tuple for batched draws."""
    L = spd_factorize(sigma).lower
    shape = (n,) if np.isscalar(n) else tuple(n)
    z = _as_rng(stream).standard_normal(shape + (L.shape[0],))
    return z @ L.T + np.asarray(mu, dtype=np.float64)


def sample_mv_cauchy(stream, sigma: ArrayLike, n: int | tuple, mu: ArrayLike | None = None):
    """Rows i.i.d. multivariate Cauchy ``C(mu, sigma)`` as ``L z / sqrt(w)``, ``w ~ chi2(1)``."""
    L = spd_factorize(sigma).lower
    shape = (n,) if np.isscalar(n) else tuple(n)
    rng = _as_rng(stream)
    z = rng.standard_normal(shape + (L.shape[0],))
    w = rng.chisquare(1.0, size=shape)
    out = (z @ L.T) / np.sqrt(w)[..., None]
    if mu is not None:
        out = out + np.asarray(mu, dtype=np.float64)
    return out


def sample_gamma_tail(stream, delta: ArrayLike, n: int | tuple) -> NDArray[np.float64]:
    """Symmetric vectors with ``T_i^2 ~ Gamma(shape=delta_i, scale=1/delta_i)``.

    Each coordinate has mean 0 and variance 1 but tail decay governed by
    ``delta_i``; the signs are independent fair coin flips.
    """
    delta = np.asarray(delta, dtype=np.float64)
    if delta.ndim != 1 or np.any(~(delta > 0)):
        raise DomainError("all tail rates must be positive")
    shape = (n,) if np.isscalar(n) else tuple(n)
    rng = _as_rng(stream)
    g = rng.standard_gamma(delta, size=shape + delta.shape) / delta
    sign = np.where(rng.integers(0, 2, size=shape + delta.shape) == 1, 1.0, -1.0)
    return sign * np.sqrt(g)


def normalized_tail_rates(eigenvalues: ArrayLike) -> NDArray[np.float64]:
    """``delta_i = lambda_i / (prod lambda)^(1/l)`` so that ``prod delta = 1``."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    return lam / np.exp(np.mean(np.log(lam)))


@dataclass(frozen=True)
class EllipticalSpec:
    """Distribution of the joint vector ``V`` used by the experiments.

    For ``gamma_tail`` the vector is ``mu + L T`` with ``L L^T = sigma`` and
    ``T`` from :func:`sample_gamma_tail`; this is not elliptical, but it has
    covariance ``sigma``.
    """

    family: str
    mu: NDArray[np.float64]
    sigma: NDArray[np.float64]
    delta: NDArray[np.float64] | None = field(default=None)

    def __post_init__(self):
        if self.family not in ("gaussian", "cauchy", "gamma_tail"):
            raise UnsupportedDistribution(f"unknown family {self.family!r}")
        sigma = np.asarray(self.sigma, dtype=np.float64)
        spd_factorize(sigma)
        object.__setattr__(self, "sigma", sigma)
        object.__setattr__(self, "mu", np.broadcast_to(
            np.asarray(self.mu, dtype=np.float64), (sigma.shape[0],)).copy())
        if self.family == "gamma_tail":
            delta = self.delta
            if delta is None:
                delta = normalized_tail_rates(np.linalg.eigvalsh(sigma))
            delta = np.asarray(delta, dtype=np.float64)
            if delta.shape != (sigma.shape[0],) or np.any(~(delta > 0)):
                raise DomainError("gamma_tail needs one positive rate per coordinate")
            if abs(np.sum(np.log(delta))) > 1e-9:
                raise DomainError("gamma_tail rates must multiply to 1")
            object.__setattr__(self, "delta", delta)

    @property
    def dim(self) -> int:
        return self.sigma.shape[0]

    def sample(self, stream, n: int | tuple) -> NDArray[np.float64]:
        if self.family == "gaussian":
            return sample_mvn(stream, self.mu, self.sigma, n)
        if self.family == "cauchy":
            return sample_mv_cauchy(stream, self.sigma, n, mu=self.mu)
        L = spd_factorize(self.sigma).lower
        return sample_gamma_tail(stream, self.delta, n) @ L.T + self.mu
