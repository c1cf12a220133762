"""Sample cumulants of the distance difference via k-statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import DomainError, InsufficientSampleError, ZeroVarianceError

MIN_SAMPLES = 4
CHUNK = 1 << 16


@dataclass(frozen=True)
class DeltaSample:
    """i.i.d. draws of the distance difference with provenance."""

    values: np.ndarray
    source_tag: str = "unknown"
    seed: Optional[int] = None

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.ndim != 1:
            raise DomainError("sample values must be one-dimensional")
        if vals.size < MIN_SAMPLES:
            raise InsufficientSampleError(
                f"need at least {MIN_SAMPLES} values, got {vals.size}")
        if not np.all(np.isfinite(vals)):
            raise DomainError("sample contains non-finite values")
        object.__setattr__(self, "values", vals)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class CumulantSummary:
    mean: float
    variance: float
    kappa3: float
    skewness: float
    n_samples: int

    @property
    def sigma(self) -> float:
        return math.sqrt(self.variance)

    def as_dict(self) -> dict:
        return {
            "mean": self.mean,
            "variance": self.variance,
            "kappa3": self.kappa3,
            "skewness": self.skewness,
            "n_samples": self.n_samples,
        }


@dataclass
class MomentAccumulator:
    """Running count, mean and central sums M2, M3.

    Chunks are reduced with a two-pass update and combined with the
    pairwise merge formulas, so partial accumulators built on separate
    workers can be merged in any order.
    """

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0
    m3: float = 0.0

    @classmethod
    def from_array(cls, x) -> "MomentAccumulator":
        x = np.asarray(x, dtype=float)
        if x.size == 0:
            return cls()
        mu = float(x.mean())
        d = x - mu
        d2 = d * d
        return cls(x.size, mu, float(d2.sum()), float((d2 * d).sum()))

    def update(self, x) -> "MomentAccumulator":
        x = np.asarray(x, dtype=float).ravel()
        for start in range(0, x.size, CHUNK):
            self.merge(MomentAccumulator.from_array(x[start:start + CHUNK]))
        return self

    def merge(self, other: "MomentAccumulator") -> "MomentAccumulator":
        if other.n == 0:
            return self
        if self.n == 0:
            self.n, self.mean, self.m2, self.m3 = other.n, other.mean, other.m2, other.m3
            return self
        na, nb = self.n, other.n
        n = na + nb
        delta = other.mean - self.mean
        mean = self.mean + delta * nb / n
        m2 = self.m2 + other.m2 + delta * delta * na * nb / n
        m3 = (self.m3 + other.m3
              + delta ** 3 * na * nb * (na - nb) / (n * n)
              + 3.0 * delta * (na * other.m2 - nb * self.m2) / n)
        self.n, self.mean, self.m2, self.m3 = n, mean, m2, m3
        return self

    def summary(self) -> CumulantSummary:
        n = self.n
        if n < MIN_SAMPLES:
            raise InsufficientSampleError(f"need at least {MIN_SAMPLES} values, got {n}")
        if self.m2 <= 0.0:
            raise ZeroVarianceError("sample has zero variance")
        k2 = self.m2 / (n - 1)
        k3 = n * self.m3 / ((n - 1) * (n - 2))
        return CumulantSummary(self.mean, k2, k3, k3 / k2 ** 1.5, n)


def estimate_cumulants(sample) -> CumulantSummary:
    """Mean, k-statistics k2 and k3, and skewness k3 / k2**1.5.

    Parameters
    ----------
    sample : DeltaSample or array_like
        At least four finite values that are not all equal.
    """
    values = sample.values if isinstance(sample, DeltaSample) else DeltaSample(sample).values
    return MomentAccumulator().update(values).summary()


def estimate_cumulants_chunked(chunks: Iterable[Sequence[float]]) -> CumulantSummary:
    acc = MomentAccumulator()
    for chunk in chunks:
        acc.merge(MomentAccumulator.from_array(chunk))
    return acc.summary()


def standardize(x, summary: CumulantSummary):
    """(x - mean) / sqrt(variance)."""
    if summary.variance <= 0.0:
        raise ZeroVarianceError("cannot standardize with zero variance")
    return (x - summary.mean) / math.sqrt(summary.variance)


def unstandardize(z, summary: CumulantSummary):
    return summary.mean + z * math.sqrt(summary.variance)


def read_sample(path, source_tag: Optional[str] = None) -> DeltaSample:
    """Read a single-column text file; blank lines and ``#`` comments skipped.

    Raises DomainError naming the offending line on a parse failure.
    """
    values = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            try:
                v = float(text)
            except ValueError:
                raise DomainError(f"{path}:{lineno}: not a number: {text!r}") from None
            if not math.isfinite(v):
                raise DomainError(f"{path}:{lineno}: non-finite value {text!r}")
            values.append(v)
    return DeltaSample(np.array(values, dtype=float), source_tag or Path(path).name)


def write_sample(sample: DeltaSample, fh, header: Sequence[str] = ()) -> None:
    for line in header:
        fh.write(f"# {line}\n")
    for v in sample.values:
        fh.write(f"{v:.17g}\n")
