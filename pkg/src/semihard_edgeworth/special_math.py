"""Standard normal functions, probabilists' Hermite polynomials and
Gaussian interval moments.

All functions accept Python floats or numpy arrays and broadcast.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import DomainError, UnsupportedOrderError

INV_SQRT_2PI = 0.3989422804014327
MAX_ORDER = 4


def _finite(z, name="z"):
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{name} must be finite, got {z!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


def normal_pdf(z):
    """Standard normal density."""
    z = _finite(z)
    return _out(INV_SQRT_2PI * np.exp(-0.5 * z * z))


def normal_cdf(z):
    """Standard normal distribution function.

    Evaluated through ``ndtr`` (an erfc-based routine), which keeps full
    relative accuracy in the lower tail.
    """
    z = _finite(z)
    return _out(ndtr(z))


def hermite_he(n: int, z):
    """Probabilists' Hermite polynomial He_n(z) for 0 <= n <= 4."""
    if not 0 <= n <= MAX_ORDER:
        raise UnsupportedOrderError(f"He_{n} not supported (0 <= n <= {MAX_ORDER})")
    z = _finite(z)
    z2 = z * z
    if n == 0:
        val = np.ones_like(z)
    elif n == 1:
        val = z
    elif n == 2:
        val = z2 - 1.0
    elif n == 3:
        val = z * (z2 - 3.0)
    else:
        val = z2 * (z2 - 6.0) + 3.0
    return _out(val)


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] in standardized coordinates."""

    lo: float
    hi: float

    def __post_init__(self):
        if not (np.isfinite(self.lo) and np.isfinite(self.hi)):
            raise DomainError(f"interval endpoints must be finite: [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise DomainError(f"interval lo > hi: [{self.lo}, {self.hi}]")


def moment_antiderivative(k: int, z):
    """Antiderivative A_k with A_k'(z) = z**k * phi(z), for k <= 4."""
    if not 0 <= k <= MAX_ORDER:
        raise UnsupportedOrderError(f"moment order {k} not supported (0 <= k <= {MAX_ORDER})")
    z = _finite(z)
    p = INV_SQRT_2PI * np.exp(-0.5 * z * z)
    if k == 0:
        val = ndtr(z)
    elif k == 1:
        val = -p
    elif k == 2:
        val = ndtr(z) - z * p
    elif k == 3:
        val = -(z * z + 2.0) * p
    else:
        val = 3.0 * ndtr(z) - z * (z * z + 3.0) * p
    return _out(val)


def gaussian_interval_moment(k: int, iv: Interval) -> float:
    """Integral of z**k * phi(z) over ``iv``.

    Orders above 4 raise :class:`UnsupportedOrderError` instead of being
    generated recursively.
    """
    if iv.lo == iv.hi:
        if not 0 <= k <= MAX_ORDER:
            raise UnsupportedOrderError(f"moment order {k} not supported")
        return 0.0
    return moment_antiderivative(k, iv.hi) - moment_antiderivative(k, iv.lo)
