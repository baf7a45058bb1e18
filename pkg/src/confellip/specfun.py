"""Special functions for the Gaussian closed forms.

The confluent hypergeometric series and the chi-squared quantile solver are
implemented here; log-gamma and the regularized incomplete gamma function
delegate to the standard library and SciPy respectively.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from scipy import special as _sp

from confellip.errors import DomainError, NoConvergence, UnsupportedSmoothness

KUMMER_MAX_TERMS = 100_000
_SUPPORTED_NU = (0.5, 1.5, 2.5, 3.5)


def lgamma(x: float) -> float:
    """Natural log of the gamma function for ``x > 0``."""
    if not x > 0:
        raise DomainError(f"lgamma requires x > 0, got {x}")
    return math.lgamma(x)


def beta(x: float, y: float) -> float:
    """Euler Beta function ``B(x, y)`` via log-gamma."""
    return math.exp(lgamma(x) + lgamma(y) - lgamma(x + y))


def unit_ball_volume(l: int) -> float:  # noqa: E741
    """Volume of the unit ball in ``R^l``: ``pi^(l/2) / Gamma(l/2 + 1)``."""
    if l < 0:
        raise DomainError(f"dimension must be nonnegative, got {l}")
    return math.exp(0.5 * l * math.log(math.pi) - lgamma(0.5 * l + 1.0))


def reg_lower_gamma(a: float, x: float) -> float:
    """Regularized lower incomplete gamma function ``P(a, x)``."""
    if not a > 0:
        raise DomainError(f"shape must be positive, got {a}")
    if not x >= 0:
        raise DomainError(f"argument must be nonnegative, got {x}")
    return float(_sp.gammainc(a, x))


def chi2_cdf(dof: float, x: float) -> float:
    if x <= 0:
        return 0.0
    return reg_lower_gamma(0.5 * dof, 0.5 * x)


def _chi2_pdf(dof: float, x: float) -> float:
    if x <= 0:
        return 0.0
    h = 0.5 * dof
    return math.exp((h - 1.0) * math.log(x) - 0.5 * x - h * math.log(2.0) - lgamma(h))


def chi2_quantile(dof: float, p: float) -> float:
    """Quantile of the chi-squared distribution with ``dof`` degrees of freedom.

    Bracketing bisection down to a width of ``1e-8`` followed by at most five
    Newton steps, each accepted only if it stays inside the final bracket.
    """
    if not dof > 0:
        raise DomainError(f"dof must be positive, got {dof}")
    if not 0.0 <= p < 1.0:
        raise DomainError(f"p must lie in [0, 1), got {p}")
    if p == 0.0:
        return 0.0
    lo, hi = 0.0, max(1.0, float(dof))
    while chi2_cdf(dof, hi) < p:
        lo, hi = hi, 2.0 * hi
    while hi - lo > 1e-8 * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if chi2_cdf(dof, mid) < p:
            lo = mid
        else:
            hi = mid
    x = 0.5 * (lo + hi)
    for _ in range(5):
        f = chi2_cdf(dof, x) - p
        dens = _chi2_pdf(dof, x)
        if dens <= 0 or f == 0:
            break
        step = f / dens
        cand = x - step
        if not lo <= cand <= hi:
            break
        x = cand
        if abs(step) <= 1e-15 * x:
            break
    return x


def _kummer_series(a: float, b: float, x: float) -> float:
    term = 1.0
    total = 1.0
    prev_small = False
    for j in range(KUMMER_MAX_TERMS):
        term *= (a + j) / (b + j) * x / (j + 1.0)
        total += term
        small = abs(term) < 1e-16 * abs(total)
        if small and prev_small:
            return total
        if term == 0.0:
            return total
        prev_small = small
    raise NoConvergence(f"1F1({a}, {b}, {x}) did not converge in {KUMMER_MAX_TERMS} terms")


def kummer_1f1(a: float, b: float, x: float) -> float:
    """Kummer's confluent hypergeometric function ``1F1(a; b; x)``.

    Power series summed until two consecutive terms fall below ``1e-16``
    times the partial sum. Negative arguments go through the Kummer
    transformation ``1F1(a; b; x) = e^x 1F1(b - a; b; -x)`` so that the
    summed series has no cancellation when ``b > a``.
    """
    if b <= 0 and float(b).is_integer():
        raise DomainError(f"b must not be a nonpositive integer, got {b}")
    if x == 0.0:
        return 1.0
    if x < 0.0:
        return math.exp(x) * _kummer_series(b - a, b, -x)
    return _kummer_series(a, b, x)


@dataclass(frozen=True)
class MaternParams:
    """Half-integer Matérn covariance parameters."""

    nu: float
    sigma2: float = 1.0
    length_scale: float = 1.0

    def __post_init__(self):
        match = [s for s in _SUPPORTED_NU if abs(float(self.nu) - s) < 1e-12]
        if not match:
            raise UnsupportedSmoothness(f"nu must be one of {_SUPPORTED_NU}, got {self.nu}")
        object.__setattr__(self, "nu", match[0])
        if not self.sigma2 > 0:
            raise DomainError(f"sigma2 must be positive, got {self.sigma2}")
        if not self.length_scale > 0:
            raise DomainError(f"length_scale must be positive, got {self.length_scale}")


def matern_kernel(params: MaternParams, h: float) -> float:
    """Half-integer Matérn covariance at lag ``h``."""
    H = abs(h) * math.sqrt(2.0 * params.nu) / params.length_scale
    nu = params.nu
    if nu == 0.5:
        poly = 1.0
    elif nu == 1.5:
        poly = 1.0 + H
    elif nu == 2.5:
        poly = 1.0 + H + H * H / 3.0
    else:
        poly = 1.0 + H + 2.0 * H * H / 5.0 + H**3 / 15.0
    return params.sigma2 * poly * math.exp(-H)
