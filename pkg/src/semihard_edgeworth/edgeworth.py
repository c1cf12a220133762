"""First-order Edgeworth analysis of the semi-hard triplet loss.

The loss over the semi-hard window (0, alpha) is

    L(alpha) = integral_0^alpha (alpha - t) f(t) dt

with f replaced by the one-term Edgeworth density of the distance
difference.  Everything here is closed form; :mod:`.oracle` holds the
quadrature and Monte-Carlo checks.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .cumulants import CumulantSummary
from .errors import DomainError, InvalidMarginError, UndefinedRelativeError
from .special_math import hermite_he, normal_cdf, normal_pdf

log = logging.getLogger(__name__)


class Convention(enum.Enum):
    """Sign of the He3 term in the expanded density.

    ``CDF_CONSISTENT`` uses phi * (1 + c*He3), the exact derivative of
    Phi - phi * c*He2.  ``PAPER_PROOF`` uses phi * (1 - c*He3), which is
    the density whose loss integral reproduces the printed correction term.
    Here c = skewness / (6 sqrt(N)).
    """

    CDF_CONSISTENT = "cdf"
    PAPER_PROOF = "paper"

    @property
    def sign(self) -> float:
        return 1.0 if self is Convention.CDF_CONSISTENT else -1.0

    @classmethod
    def parse(cls, text) -> "Convention":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "_")
        aliases = {"cdf": cls.CDF_CONSISTENT, "cdf_consistent": cls.CDF_CONSISTENT,
                   "cdfconsistent": cls.CDF_CONSISTENT, "paper": cls.PAPER_PROOF,
                   "paper_proof": cls.PAPER_PROOF, "paperproof": cls.PAPER_PROOF}
        try:
            return aliases[key]
        except KeyError:
            raise DomainError(f"unknown convention {text!r}") from None


@dataclass(frozen=True)
class EdgeworthModel:
    mean: float
    sigma: float
    skewness: float
    n_eff: int = 1
    convention: Convention = Convention.CDF_CONSISTENT

    def __post_init__(self):
        for name in ("mean", "sigma", "skewness"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if self.sigma <= 0:
            raise DomainError(f"sigma must be positive, got {self.sigma}")
        if self.n_eff < 1:
            raise DomainError(f"n_eff must be >= 1, got {self.n_eff}")
        object.__setattr__(self, "convention", Convention.parse(self.convention))

    @classmethod
    def from_summary(cls, summary: CumulantSummary, n_eff: int,
                     convention=Convention.CDF_CONSISTENT) -> "EdgeworthModel":
        return cls(summary.mean, math.sqrt(summary.variance), summary.skewness,
                   n_eff, convention)

    def with_convention(self, convention) -> "EdgeworthModel":
        return replace(self, convention=Convention.parse(convention))

    @property
    def c(self) -> float:
        """Coefficient skewness / (6 sqrt(n_eff)) of the first correction."""
        return self.skewness / (6.0 * math.sqrt(self.n_eff))

    def zeta(self, t):
        return (t - self.mean) / self.sigma


@dataclass(frozen=True)
class LossExpansion:
    leading: float
    correction: float
    total: float
    alpha: float
    negative_density: bool = False


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not math.isfinite(alpha) or alpha <= 0.0:
        raise InvalidMarginError(f"margin alpha must be positive and finite, got {alpha}")
    return alpha


def cdf_expansion(model: EdgeworthModel, z):
    """Phi(z) - phi(z) * c * He2(z); not clipped to [0, 1]."""
    return normal_cdf(z) - normal_pdf(z) * model.c * hermite_he(2, z)


def density_expansion(model: EdgeworthModel, t):
    """Expanded density of the distance difference at ``t`` (data units)."""
    z = model.zeta(np.asarray(t, dtype=float))
    val = normal_pdf(z) * (1.0 + model.convention.sign * model.c * hermite_he(3, z)) / model.sigma
    return float(val) if np.ndim(val) == 0 else val


def _window(model, alpha):
    return model.zeta(0.0), model.zeta(alpha)


def semi_hard_probability(model: EdgeworthModel, alpha: float) -> float:
    """Edgeworth estimate of P(0 < Delta < alpha).

    The endpoint polynomials are He2, i.e. the difference of
    :func:`cdf_expansion` at the two window edges.  The value does not
    depend on ``model.convention``.
    """
    alpha = _check_alpha(alpha)
    z0, za = _window(model, alpha)
    base = normal_cdf(za) - normal_cdf(z0)
    edge = normal_pdf(za) * hermite_he(2, za) - normal_pdf(z0) * hermite_he(2, z0)
    return base - model.c * edge


def window_mass(model: EdgeworthModel, alpha: float) -> float:
    """Integral of :func:`density_expansion` over (0, alpha), closed form."""
    alpha = _check_alpha(alpha)
    z0, za = _window(model, alpha)
    base = normal_cdf(za) - normal_cdf(z0)
    edge = normal_pdf(za) * hermite_he(2, za) - normal_pdf(z0) * hermite_he(2, z0)
    return base - model.convention.sign * model.c * edge


def loss_leading(model: EdgeworthModel, alpha: float) -> float:
    """Gaussian term (alpha - mu)[Phi(za) - Phi(z0)] + sigma[phi(za) - phi(z0)]."""
    alpha = _check_alpha(alpha)
    z0, za = _window(model, alpha)
    return ((alpha - model.mean) * (normal_cdf(za) - normal_cdf(z0))
            + model.sigma * (normal_pdf(za) - normal_pdf(z0)))


def loss_correction(model: EdgeworthModel, alpha: float) -> float:
    """Coefficient of 1/sqrt(N) in the loss expansion.

    Under ``PAPER_PROOF`` this is

        (g/6) {(alpha - mu)[pa za^2 - p0 z0^2 - pa + p0] - sigma[za^3 pa - z0^3 p0]}

    with pa = phi(za), p0 = phi(z0); ``CDF_CONSISTENT`` returns its negation.
    A zero skewness gives an exact 0.0.
    """
    alpha = _check_alpha(alpha)
    z0, za = _window(model, alpha)
    pa, p0 = normal_pdf(za), normal_pdf(z0)
    bracket = ((alpha - model.mean) * (pa * za * za - p0 * z0 * z0 - pa + p0)
               - model.sigma * (za ** 3 * pa - z0 ** 3 * p0))
    printed = model.skewness / 6.0 * bracket
    value = -printed if model.convention is Convention.CDF_CONSISTENT else printed
    return value + 0.0  # -0.0 -> 0.0


def density_negative_on_window(model: EdgeworthModel, alpha: float) -> bool:
    """True when the expanded density dips below zero somewhere on [0, alpha]."""
    alpha = _check_alpha(alpha)
    z0, za = _window(model, alpha)
    candidates = [z0, za] + [z for z in (-1.0, 1.0) if z0 < z < za]
    k = model.convention.sign * model.c
    return min(1.0 + k * hermite_he(3, z) for z in candidates) < 0.0


def loss_expansion(model: EdgeworthModel, alpha: float) -> LossExpansion:
    alpha = _check_alpha(alpha)
    lead = loss_leading(model, alpha)
    corr = loss_correction(model, alpha)
    negative = density_negative_on_window(model, alpha)
    if negative:
        log.warning("expanded density is negative inside (0, %g); values reported as-is", alpha)
    return LossExpansion(lead, corr, lead + corr / math.sqrt(model.n_eff), alpha, negative)


def margin_sensitivity(model: EdgeworthModel, alpha: float) -> float:
    """Derivative of the expanded loss in alpha.

    Equal to :func:`semi_hard_probability` under ``CDF_CONSISTENT``.  Under
    ``PAPER_PROOF`` the He2 edge term flips sign so the result remains the
    derivative of that convention's loss.
    """
    return window_mass(model, alpha)


def sensitivity_at_mean(model: EdgeworthModel) -> float:
    """Margin sensitivity with alpha set to the mean (requires mean > 0).

    1/2 - Phi(-mu/sigma) - c [phi(0) He2(0) - phi(-mu/sigma) He2(-mu/sigma)]
    """
    z0 = -model.mean / model.sigma
    edge = normal_pdf(0.0) * hermite_he(2, 0.0) - normal_pdf(z0) * hermite_he(2, z0)
    return 0.5 - normal_cdf(z0) - model.convention.sign * model.c * edge


def recommend_batch_size(model: EdgeworthModel, alpha: float, epsilon: float,
                         c_estimate: float) -> int:
    """Smallest N with c_estimate / N <= epsilon * L_total(model, alpha)."""
    if not epsilon > 0 or not math.isfinite(epsilon):
        raise DomainError(f"epsilon must be positive, got {epsilon}")
    if not c_estimate > 0 or not math.isfinite(c_estimate):
        raise DomainError(f"c_estimate must be positive, got {c_estimate}")
    total = loss_expansion(model, alpha).total
    if total <= 0.0:
        raise UndefinedRelativeError(
            f"expanded loss at alpha={alpha} is {total:.6g}; relative error undefined")
    budget = epsilon * total
    n = max(1, math.ceil(c_estimate / budget))
    # ceil of a rounded quotient can be off by one either way
    while n > 1 and c_estimate / (n - 1) <= budget:
        n -= 1
    while c_estimate / n > budget:
        n += 1
    return n
