"""Robust-loss clustering for Gaussian mixtures with a uniform background.

The library picks clusters one at a time by minimizing a truncated quadratic
loss, removes them, and repeats. It also ships a seeded mixture generator,
the theoretical margins and success bounds, sigma and k estimators, and
clustering metrics.
"""
__version__ = "0.1.0"

from .core import (ClusterEstimate, ClusteringResult, DataMatrix, LossConfig,
                   point_losses, robust_loss, total_loss)
from .clustering import crlm, kmeans_pp, ocrlm
from .datagen import (AssumptionReport, GmmubSpec, check_assumptions, check_conditions,
                      default_spec, place_means, sample_gmmub, sample_uniform_ball)
from .estimation import estimate_k, estimate_sigmas, sigma_histogram, suggest_sigma_max
from .metrics import f_measure_avg, mean_center_error, purity, rand_index
from .theory import (BoundReport, bound_report, feasible_sigma_region,
                     gaussian_loss_mean_bound, margin_w, success_prob_cor1,
                     success_prob_prop1, success_prob_thm1, success_prob_thm2,
                     uniform_loss_mean, weight_threshold)
from .kernels import BACKEND

__all__ = [
    "AssumptionReport", "BACKEND", "BoundReport", "ClusterEstimate", "ClusteringResult",
    "DataMatrix", "GmmubSpec", "LossConfig", "bound_report", "check_assumptions",
    "check_conditions", "crlm", "default_spec", "estimate_k", "estimate_sigmas",
    "f_measure_avg", "feasible_sigma_region", "gaussian_loss_mean_bound", "kmeans_pp",
    "margin_w", "mean_center_error", "ocrlm", "place_means", "point_losses", "purity",
    "rand_index", "robust_loss", "sample_gmmub", "sample_uniform_ball", "sigma_histogram",
    "success_prob_cor1", "success_prob_prop1", "success_prob_thm1", "success_prob_thm2",
    "suggest_sigma_max", "total_loss", "uniform_loss_mean", "weight_threshold",
]
