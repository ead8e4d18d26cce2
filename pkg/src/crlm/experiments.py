"""Seeded experiment harness: convergence runs and sigma_max sweeps."""
import math

import numpy as np

from .clustering import crlm, kmeans_pp
from .core import LossConfig
from .datagen import sample_gmmub
from .metrics import f_measure_avg, mean_center_error, rand_index
from .theory import feasible_sigma_region

ALGORITHMS = ("crlm", "kmeans++", "supervised")


def supervised_means(data, k):
    """Per-cluster sample means from the ground-truth labels (NaN if empty)."""
    out = np.full((k, data.d), np.nan)
    for j in range(1, k + 1):
        m = data.labels == j
        if m.any():
            out[j - 1] = data.values[m].mean(axis=0)
    return out[~np.isnan(out).any(axis=1)]


def estimated_means(data, spec, cfg, algorithm, seed, min_cluster_size=1):
    if algorithm == "crlm":
        return crlm(data, spec.k, cfg, min_cluster_size).centers
    if algorithm == "kmeans++":
        # one extra center lets k-means park a center on the background
        return kmeans_pp(data, min(spec.k + 1, data.n), seed).centers
    if algorithm == "supervised":
        return supervised_means(data, spec.k)
    raise ValueError(f"unknown algorithm {algorithm!r}")


def convergence(spec, cfg, n_grid, seeds, algorithms=ALGORITHMS, min_cluster_size=1):
    """Mean-center error for every (n, seed, algorithm).

    Returns
    -------
    list of dict
        Keys: n, seed, algorithm, error, unmatched.
    """
    rows = []
    for n in n_grid:
        n = int(round(n))
        for seed in seeds:
            data = sample_gmmub(spec, n, seed)
            for alg in algorithms:
                est = estimated_means(data, spec, cfg, alg, seed, min_cluster_size)
                err, un = mean_center_error(spec.means, est, return_unmatched=True)
                rows.append({"n": n, "seed": int(seed), "algorithm": alg,
                             "error": err, "unmatched": len(un)})
    return rows


def summarize_convergence(rows):
    """Mean error per (algorithm, n): {alg: (n array, mean error array)}."""
    out = {}
    for alg in sorted({r["algorithm"] for r in rows}):
        ns = sorted({r["n"] for r in rows if r["algorithm"] == alg})
        means = [np.mean([r["error"] for r in rows if r["algorithm"] == alg and r["n"] == n]) for n in ns]
        out[alg] = (np.array(ns, dtype=np.float64), np.array(means))
    return out


def loglog_slope(n, err):
    """Least-squares slope of log(err) against log(n)."""
    n, err = np.asarray(n, float), np.asarray(err, float)
    ok = np.isfinite(err) & (err > 0)
    if ok.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(n[ok]), np.log(err[ok]), 1)[0])


def sweep_sigma(spec, n, sigma_grid, seeds, G=4.0, k_max=None, min_cluster_size=1):
    """CRLM quality over a grid of sigma_max values.

    Returns
    -------
    list of dict
        Keys: sigma_max, f_mean, f_min, rand_mean, n_seeds.
    """
    sigma_grid = np.asarray(sigma_grid, dtype=np.float64).ravel()
    if sigma_grid.size == 0:
        raise ValueError("empty sigma grid")
    k_max = spec.k if k_max is None else k_max
    datasets = [sample_gmmub(spec, n, s) for s in seeds]
    rows = []
    for sm in sigma_grid:
        cfg = LossConfig(float(sm), G)
        fs, ris = [], []
        for data in datasets:
            res = crlm(data, k_max, cfg, min_cluster_size)
            fs.append(f_measure_avg(data.labels, res.assignment, spec.k))
            ris.append(rand_index(data.labels, res.assignment))
        rows.append({"sigma_max": float(sm), "f_mean": float(np.mean(fs)),
                     "f_min": float(np.min(fs)), "rand_mean": float(np.mean(ris)),
                     "n_seeds": len(datasets)})
    return rows


def success_interval(rows, key="f_mean", floor=0.99):
    """Contiguous sigma_max range around the best point with ``key >= floor``.

    Returns (lo, hi) grid values, or (nan, nan) when no point qualifies.
    """
    vals = np.array([r[key] for r in rows])
    sig = np.array([r["sigma_max"] for r in rows])
    good = vals >= floor
    if not good.any():
        return math.nan, math.nan
    i = int(np.argmax(vals))
    lo = hi = i
    while lo > 0 and good[lo - 1]:
        lo -= 1
    while hi < len(good) - 1 and good[hi + 1]:
        hi += 1
    return float(sig[lo]), float(sig[hi])


def theory_interval(spec, n, G=4.0, prob_floor=0.99, grid=None):
    """Theoretical sigma_max interval (single row of the feasible region)."""
    return feasible_sigma_region(spec, n, G, prob_floor, grid)[0]
