"""Reference laws with closed-form cumulants, and a two-cluster triplet
simulator that produces distance-difference samples.

Random streams come from PCG64 seeded through ``SeedSequence``.  Samples
are generated in fixed-size chunks, each with its own spawned child seed,
so the output depends only on ``(seed, n)`` and not on the number of
worker threads.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, List, Union

import numpy as np
from scipy.special import gammainc, gammaln, ndtr, xlogy

from .cumulants import DeltaSample
from .errors import DomainError, UnsupportedFamilyError

CHUNK_SIZE = 1 << 16
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


def _require(cond, msg):
    if not cond:
        raise DomainError(msg)


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


@dataclass(frozen=True)
class Normal:
    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        _require(math.isfinite(self.mu), "normal mean must be finite")
        _require(self.sigma > 0 and math.isfinite(self.sigma), "normal sigma must be positive")

    family = "normal"
    support_lo = -math.inf

    @property
    def mean(self):
        return self.mu

    @property
    def variance(self):
        return self.sigma ** 2

    @property
    def kappa3(self):
        return 0.0

    def pdf(self, t):
        z = (np.asarray(t, dtype=float) - self.mu) / self.sigma
        return _scalar_or_array(np.exp(-0.5 * z * z - _LOG_SQRT_2PI) / self.sigma)

    def cdf(self, t):
        return _scalar_or_array(ndtr((np.asarray(t, dtype=float) - self.mu) / self.sigma))

    def draw(self, rng, n):
        return rng.normal(self.mu, self.sigma, size=n)

    def params(self):
        return {"mean": self.mu, "sigma": self.sigma}


@dataclass(frozen=True)
class ShiftedGamma:
    """shift + Gamma(shape, scale)."""

    shape: float
    scale: float = 1.0
    shift: float = 0.0

    def __post_init__(self):
        _require(self.shape > 0 and math.isfinite(self.shape), "gamma shape must be positive")
        _require(self.scale > 0 and math.isfinite(self.scale), "gamma scale must be positive")
        _require(math.isfinite(self.shift), "gamma shift must be finite")

    family = "gamma"

    @property
    def support_lo(self):
        return self.shift

    @property
    def mean(self):
        return self.shift + self.shape * self.scale

    @property
    def variance(self):
        return self.shape * self.scale ** 2

    @property
    def kappa3(self):
        return 2.0 * self.shape * self.scale ** 3

    def pdf(self, t):
        x = (np.asarray(t, dtype=float) - self.shift) / self.scale
        if self.shape == 1.0:
            inside = x >= 0
        else:
            inside = x > 0
        xs = np.where(inside, x, 1.0)
        logf = xlogy(self.shape - 1.0, xs) - xs - gammaln(self.shape) - math.log(self.scale)
        return _scalar_or_array(np.where(inside, np.exp(logf), 0.0))

    def cdf(self, t):
        x = (np.asarray(t, dtype=float) - self.shift) / self.scale
        return _scalar_or_array(np.where(x > 0, gammainc(self.shape, np.maximum(x, 0.0)), 0.0))

    def draw(self, rng, n):
        return self.shift + rng.gamma(self.shape, self.scale, size=n)

    def params(self):
        return {"shape": self.shape, "scale": self.scale, "shift": self.shift}


@dataclass(frozen=True)
class NormalMixture:
    """w * N(mu1, sigma1^2) + (1 - w) * N(mu2, sigma2^2)."""

    w: float
    mu1: float
    sigma1: float
    mu2: float
    sigma2: float

    def __post_init__(self):
        _require(0.0 < self.w < 1.0, "mixture weight must lie in (0, 1)")
        _require(self.sigma1 > 0 and self.sigma2 > 0, "mixture sigmas must be positive")
        _require(all(map(math.isfinite, (self.mu1, self.mu2, self.sigma1, self.sigma2))),
                 "mixture parameters must be finite")

    family = "mixture"
    support_lo = -math.inf

    def _components(self):
        return ((self.w, self.mu1, self.sigma1), (1.0 - self.w, self.mu2, self.sigma2))

    @property
    def mean(self):
        return sum(w * mu for w, mu, _ in self._components())

    @property
    def variance(self):
        m = self.mean
        return sum(w * (s * s + (mu - m) ** 2) for w, mu, s in self._components())

    @property
    def kappa3(self):
        m = self.mean
        return sum(w * ((mu - m) ** 3 + 3.0 * (mu - m) * s * s) for w, mu, s in self._components())

    def pdf(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(sum(w * Normal(mu, s).pdf(t) for w, mu, s in self._components()))

    def cdf(self, t):
        t = np.asarray(t, dtype=float)
        return _scalar_or_array(sum(w * Normal(mu, s).cdf(t) for w, mu, s in self._components()))

    def draw(self, rng, n):
        first = rng.random(n) < self.w
        z = rng.standard_normal(n)
        return np.where(first, self.mu1 + self.sigma1 * z, self.mu2 + self.sigma2 * z)

    def params(self):
        return {"w": self.w, "mu1": self.mu1, "sigma1": self.sigma1,
                "mu2": self.mu2, "sigma2": self.sigma2}


ReferenceDistribution = Union[Normal, ShiftedGamma, NormalMixture]


def skewness(dist: ReferenceDistribution) -> float:
    return dist.kappa3 / dist.variance ** 1.5


def exact_density(dist: ReferenceDistribution, t):
    """Closed-form density; zero below the support of a shifted gamma."""
    return dist.pdf(t)


def exact_cdf(dist: ReferenceDistribution, t):
    return dist.cdf(t)


def batch_mean_law(dist: ReferenceDistribution, n_batch: int) -> ReferenceDistribution:
    """Exact law of the mean of ``n_batch`` i.i.d. draws."""
    if n_batch < 1:
        raise DomainError(f"n_batch must be >= 1, got {n_batch}")
    if isinstance(dist, Normal):
        return Normal(dist.mu, dist.sigma / math.sqrt(n_batch))
    if isinstance(dist, ShiftedGamma):
        return ShiftedGamma(dist.shape * n_batch, dist.scale / n_batch, dist.shift)
    raise UnsupportedFamilyError(f"{dist.family} family is not closed under averaging")


def standardized_law(dist: ReferenceDistribution) -> ReferenceDistribution:
    """Law of (X - mean) / sd, for families closed under positive affine maps."""
    sd = math.sqrt(dist.variance)
    if isinstance(dist, Normal):
        return Normal(0.0, 1.0)
    if isinstance(dist, ShiftedGamma):
        return ShiftedGamma(dist.shape, dist.scale / sd, (dist.shift - dist.mean) / sd)
    raise UnsupportedFamilyError(f"{dist.family} family has no exact standardized law here")


def _chunk_seeds(seed: int, n: int):
    n_chunks = max(1, -(-n // CHUNK_SIZE))
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [CHUNK_SIZE] * (n_chunks - 1) + [n - CHUNK_SIZE * (n_chunks - 1)]
    return list(zip(children, sizes))


def _run_chunks(seed: int, n: int, make: Callable, threads: int) -> np.ndarray:
    jobs = _chunk_seeds(seed, n)

    def work(job):
        ss, size = job
        return make(np.random.Generator(np.random.PCG64(ss)), size)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts: List[np.ndarray] = list(pool.map(work, jobs))
    else:
        parts = [work(j) for j in jobs]
    return np.concatenate(parts)


def sample(dist: ReferenceDistribution, n: int, seed: int, threads: int = 1) -> DeltaSample:
    """``n`` i.i.d. draws; identical for identical ``(seed, n)``."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    values = _run_chunks(seed, n, dist.draw, threads)
    return DeltaSample(values, source_tag=f"{dist.family}:{dist.params()}", seed=seed)


def draw_values(dist: ReferenceDistribution, n: int, seed: int, threads: int = 1) -> np.ndarray:
    """Like :func:`sample` but without the minimum-length check."""
    if n < 1:
        raise DomainError(f"sample size must be >= 1, got {n}")
    return _run_chunks(seed, n, dist.draw, threads)


class Distance(enum.Enum):
    EUCLIDEAN = "euclidean"
    SQUARED_EUCLIDEAN = "sqeuclidean"

    @classmethod
    def parse(cls, text) -> "Distance":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("_", "").replace("-", "")
        for member in cls:
            if member.value == key or member.name.replace("_", "").lower() == key:
                return member
        raise DomainError(f"unknown distance {text!r}")


@dataclass(frozen=True)
class ClusterTripletConfig:
    dimension: int = 8
    center_separation: float = 2.0
    within_sigma: float = 1.0
    distance: Distance = Distance.EUCLIDEAN
    n_triplets: int = 100_000
    seed: int = 42

    def __post_init__(self):
        _require(self.dimension >= 1, "dimension must be >= 1")
        _require(self.center_separation >= 0 and math.isfinite(self.center_separation),
                 "center separation must be >= 0")
        _require(self.within_sigma > 0 and math.isfinite(self.within_sigma),
                 "within_sigma must be positive")
        _require(self.n_triplets >= 4, "n_triplets must be >= 4")
        object.__setattr__(self, "distance", Distance.parse(self.distance))


def _triplet_chunk(cfg: ClusterTripletConfig):
    def make(rng, m):
        shape = (m, cfg.dimension)
        anchor = rng.normal(0.0, cfg.within_sigma, size=shape)
        positive = rng.normal(0.0, cfg.within_sigma, size=shape)
        negative = rng.normal(0.0, cfg.within_sigma, size=shape)
        negative[:, 0] += cfg.center_separation
        d_pos = np.einsum("ij,ij->i", anchor - positive, anchor - positive)
        d_neg = np.einsum("ij,ij->i", anchor - negative, anchor - negative)
        if cfg.distance is Distance.EUCLIDEAN:
            d_pos, d_neg = np.sqrt(d_pos), np.sqrt(d_neg)
        return d_neg - d_pos
    return make


def simulate_triplets(config: ClusterTripletConfig, threads: int = 1) -> DeltaSample:
    """Distance differences d(a, n) - d(a, p) for a two-cluster Gaussian model.

    Anchors and positives come from an isotropic Gaussian at the origin,
    negatives from the same shape centred ``center_separation`` along the
    first axis.
    """
    values = _run_chunks(config.seed, config.n_triplets, _triplet_chunk(config), threads)
    tag = (f"triplets:dim={config.dimension},sep={config.center_separation},"
           f"sigma={config.within_sigma},distance={config.distance.value}")
    return DeltaSample(values, source_tag=tag, seed=config.seed)
