"""Edgeworth-expansion analysis of the semi-hard triplet loss."""

__version__ = "0.1.0"

from .cumulants import CumulantSummary, DeltaSample, estimate_cumulants, standardize
from .edgeworth import (Convention, EdgeworthModel, LossExpansion, cdf_expansion,
                        density_expansion, loss_correction, loss_expansion, loss_leading,
                        margin_sensitivity, recommend_batch_size, semi_hard_probability)
from .errors import EdgeworthError
from .special_math import (Interval, gaussian_interval_moment, hermite_he, normal_cdf,
                           normal_pdf)

__all__ = [
    "CumulantSummary", "DeltaSample", "estimate_cumulants", "standardize",
    "Convention", "EdgeworthModel", "LossExpansion", "cdf_expansion", "density_expansion",
    "loss_correction", "loss_expansion", "loss_leading", "margin_sensitivity",
    "recommend_batch_size", "semi_hard_probability", "EdgeworthError", "Interval",
    "gaussian_interval_moment", "hermite_he", "normal_cdf", "normal_pdf",
]
