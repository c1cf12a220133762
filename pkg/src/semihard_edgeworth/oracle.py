"""Independent references for the closed forms: adaptive Simpson
quadrature, Monte-Carlo window estimators and power-law error fits."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import DomainError, InsufficientSampleError, InvalidMarginError, NonConvergenceError

DEFAULT_TOL = 1e-10
MAX_DEPTH = 60
MIN_DEPTH = 6
TAIL_SIGMAS = 12.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error_estimate: float
    evaluations: int


def _as_vector_fn(f: Callable) -> Callable[[np.ndarray], np.ndarray]:
    """Return a callable mapping 1-d arrays to same-shape float arrays."""
    def vec(x):
        try:
            y = np.asarray(f(x), dtype=float)
            return np.broadcast_to(y, x.shape)
        except (TypeError, ValueError):
            return np.fromiter((f(float(v)) for v in x), dtype=float, count=x.size)

    return vec


def quadrature(integrand: Callable, lo: float, hi: float, tol: float = DEFAULT_TOL,
               max_depth: int = MAX_DEPTH) -> QuadratureResult:
    """Adaptive Simpson integration with Richardson extrapolation.

    Intervals are refined breadth-first and every pending midpoint of a
    level is evaluated in one call, so numpy-aware integrands are fast;
    scalar-only integrands are evaluated point by point.  Each split halves
    the local tolerance, so the returned ``error_estimate`` (sum of
    |S2 - S1| / 15 over accepted panels) stays below ``tol``.

    Raises
    ------
    NonConvergenceError
        If a panel is still unresolved at ``max_depth`` halvings.  The
        exception carries the best estimate.
    """
    if not tol > 0:
        raise DomainError(f"tolerance must be positive, got {tol}")
    lo, hi = float(lo), float(hi)
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise DomainError("integration limits must be finite")
    if lo > hi:
        r = quadrature(integrand, hi, lo, tol, max_depth)
        return QuadratureResult(-r.value, r.error_estimate, r.evaluations)
    if lo == hi:
        return QuadratureResult(0.0, 0.0, 0)

    f = _as_vector_fn(integrand)
    fa, fm, fb = f(np.array([lo, 0.5 * (lo + hi), hi]))
    evals = 3
    a = np.array([lo]); b = np.array([hi])
    fa = np.array([fa]); fm = np.array([fm]); fb = np.array([fb])
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    eps = np.array([tol])
    pieces, errors = [], []
    depth = 0
    while a.size:
        m = 0.5 * (a + b)
        lm = 0.5 * (a + m)
        rm = 0.5 * (m + b)
        vals = f(np.concatenate([lm, rm]))
        evals += vals.size
        flm, frm = vals[:a.size], vals[a.size:]
        h = b - a
        left = h / 12.0 * (fa + 4.0 * flm + fm)
        right = h / 12.0 * (fm + 4.0 * frm + fb)
        both = left + right
        err = np.abs(both - whole) / 15.0
        if not np.all(np.isfinite(both)):
            raise DomainError("integrand is not finite on the integration interval")
        depth += 1
        done = (err <= eps) & (depth >= MIN_DEPTH)
        if depth >= max_depth and not np.all(done):
            pieces.extend(both + (both - whole) / 15.0)
            errors.extend(err)
            raise NonConvergenceError(
                f"adaptive Simpson did not converge within depth {max_depth}",
                best_estimate=math.fsum(pieces), error_estimate=math.fsum(errors))
        pieces.extend(both[done] + (both[done] - whole[done]) / 15.0)
        errors.extend(err[done])
        keep = ~done
        a, m, b = a[keep], m[keep], b[keep]
        a, b = np.concatenate([a, m]), np.concatenate([m, b])
        fa, fm, fb = (np.concatenate([fa[keep], fm[keep]]),
                      np.concatenate([flm[keep], frm[keep]]),
                      np.concatenate([fm[keep], fb[keep]]))
        whole = np.concatenate([left[keep], right[keep]])
        eps = np.concatenate([eps[keep], eps[keep]]) / 2.0
    return QuadratureResult(math.fsum(pieces), math.fsum(errors), evals)


class Estimate(NamedTuple):
    value: float
    stderr: float


def _values(sample) -> np.ndarray:
    vals = getattr(sample, "values", sample)
    vals = np.asarray(vals, dtype=float).ravel()
    if vals.size == 0:
        raise InsufficientSampleError("empty sample")
    return vals


def _mean_se(x: np.ndarray) -> Estimate:
    # plug-in (ddof=0) variance
    return Estimate(float(x.mean()), float(x.std() / math.sqrt(x.size)))


def mc_semi_hard_loss(sample, alpha: float) -> Estimate:
    """Sample mean of 1{0 < d < alpha} * (alpha - d) with its standard error."""
    if not alpha > 0:
        raise InvalidMarginError(f"alpha must be positive, got {alpha}")
    d = _values(sample)
    return _mean_se(np.where((d > 0) & (d < alpha), alpha - d, 0.0))


def mc_semi_hard_probability(sample, alpha: float) -> Estimate:
    """Fraction of the sample inside (0, alpha) with its standard error."""
    if not alpha > 0:
        raise InvalidMarginError(f"alpha must be positive, got {alpha}")
    d = _values(sample)
    return _mean_se(((d > 0) & (d < alpha)).astype(float))


@dataclass(frozen=True)
class ScalingFit:
    """Least-squares line log(error) = slope * log(n) + intercept."""

    slope: float
    intercept: float
    r_squared: float
    points: Tuple[Tuple[int, float], ...]

    @property
    def c_estimate(self) -> float:
        """Prefactor C of error ~ C * n**slope."""
        return math.exp(self.intercept)


def error_scaling_fit(points: Sequence[Tuple[float, float]]) -> ScalingFit:
    pts = tuple((int(n), float(e)) for n, e in points)
    if len(pts) < 3:
        raise InsufficientSampleError("scaling fit needs at least 3 points")
    if any(n <= 0 for n, _ in pts):
        raise DomainError("batch sizes must be positive")
    if any(not (e > 0 and math.isfinite(e)) for _, e in pts):
        raise DomainError("errors must be positive and finite for a log-log fit")
    x = np.log([n for n, _ in pts])
    y = np.log([e for _, e in pts])
    xc = x - x.mean()
    sxx = float(xc @ xc)
    if sxx == 0.0:
        raise DomainError("scaling fit needs at least two distinct batch sizes")
    slope = float(xc @ (y - y.mean())) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (slope * x + intercept)
    ss_res = float(resid @ resid)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 if ss_tot == 0.0 or ss_res <= 1e-30 else max(0.0, min(1.0, 1.0 - ss_res / ss_tot))
    return ScalingFit(slope, intercept, r2, pts)


def expansion_loss_quadrature(model, alpha: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Quadrature of (alpha - t) * density_expansion(t) over [0, alpha]."""
    from .edgeworth import density_expansion

    return quadrature(lambda t: (alpha - t) * density_expansion(model, t), 0.0, alpha, tol)


def expansion_mass_quadrature(model, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Total mass of the expanded density over mean +/- 12 sigma."""
    from .edgeworth import density_expansion

    lo = model.mean - TAIL_SIGMAS * model.sigma
    hi = model.mean + TAIL_SIGMAS * model.sigma
    return quadrature(lambda t: density_expansion(model, t), lo, hi, tol)


def exact_loss(dist, alpha: float, tol: float = DEFAULT_TOL) -> QuadratureResult:
    """Semi-hard loss of a reference law by quadrature of its exact density."""
    if not alpha > 0:
        raise InvalidMarginError(f"alpha must be positive, got {alpha}")
    lo = max(0.0, dist.support_lo)
    if lo >= alpha:
        return QuadratureResult(0.0, 0.0, 0)
    return quadrature(lambda t: (alpha - t) * dist.pdf(t), lo, alpha, tol)


class CumulantErrors(NamedTuple):
    mean: float
    variance: float
    kappa3: float
    skewness: float


def _kstats_from_power_sums(n, s1, s2, s3):
    k2 = (n * s2 - s1 * s1) / (n * (n - 1))
    k3 = (2 * s1 ** 3 - 3 * n * s1 * s2 + n * n * s3) / (n * (n - 1) * (n - 2))
    return k2, k3


def bootstrap_cumulant_se(sample, n_resamples: int = 200, seed: int = 0,
                          n_blocks: int = 1000) -> CumulantErrors:
    """Bootstrap standard errors of the mean, k2, k3 and skewness.

    The sample is cut into ``n_blocks`` contiguous blocks and whole blocks
    are resampled with replacement.  For i.i.d. draws this has the same
    target as the observation-level bootstrap, but each resample costs
    O(n_blocks) instead of O(n).
    """
    x = _values(sample)
    n_blocks = min(n_blocks, x.size // 4)
    if n_blocks < 2:
        raise InsufficientSampleError("sample too small for a block bootstrap")
    x = x[: x.size - x.size % n_blocks]
    d = (x - x.mean()).reshape(n_blocks, -1)
    per_block = np.stack([d.sum(axis=1), (d * d).sum(axis=1), (d ** 3).sum(axis=1)])
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, n_blocks, size=(n_resamples, n_blocks))
    s1, s2, s3 = (per_block[j][idx].sum(axis=1) for j in range(3))
    n = float(x.size)
    k2, k3 = _kstats_from_power_sums(n, s1, s2, s3)
    means = s1 / n + x.mean()
    return CumulantErrors(*(float(np.std(v, ddof=1)) for v in (means, k2, k3, k3 / k2 ** 1.5)))
