"""Data-driven choices of sigma_max and k.

Cluster spreads are read off a histogram of the shortest pairwise
distances: two points of a cluster with spread sigma are about
``sigma * sqrt(2d)`` apart, with relative fluctuation ``1/sqrt(2d)``, so each
cluster leaves a peak at its sigma once distances are divided by
``sqrt(2d)``. The histogram is built on log distances with bins a fraction
of that fluctuation wide.
"""
import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .clustering import crlm
from .core import DataMatrix

ZERO_GUARD = 1e-12
_EPS = np.finfo(np.float64).eps


@dataclass
class SigmaHistogram:
    """Histogram of scaled short distances.

    ``edges`` are log-space bin edges, ``centers`` the bin centers mapped
    back to distance / sqrt(2d) units, ``counts`` the raw counts.
    """

    edges: np.ndarray
    centers: np.ndarray
    counts: np.ndarray
    n_pairs: int
    subsampled: bool
    bin_width: float


def _shortest_pairs_exact(X, keep):
    """The ``keep`` smallest pairwise squared distances, blocked Gram."""
    n = len(X)
    C = X - X.mean(axis=0)
    sn = np.einsum("ij,ij->i", C, C)
    pool = np.empty(0)
    step = max(1, (1 << 22) // max(n, 1))
    for lo in range(0, n - 1, step):
        hi = min(lo + step, n - 1)
        G = C[lo:hi] @ C[lo + 1:].T
        s = sn[lo:hi, None] + sn[None, lo + 1:] - 2.0 * G
        # pairs (i, j) with j > i only
        r = np.arange(lo, hi)[:, None]
        c = np.arange(lo + 1, n)[None, :]
        upper = c > r
        # pairs within Gram rounding of zero get an exact difference instead
        tol = 4.0 * (C.shape[1] + 4) * _EPS * (sn[lo:hi, None] + sn[None, lo + 1:])
        near = np.nonzero(upper & (s < tol))
        if near[0].size:
            diff = C[lo + near[0]] - C[lo + 1 + near[1]]
            s[near] = np.einsum("ij,ij->i", diff, diff)
        vals = s[upper]
        pool = np.concatenate([pool, vals])
        if len(pool) > 2 * keep:
            pool = np.partition(pool, keep - 1)[:keep]
    if len(pool) > keep:
        pool = np.partition(pool, keep - 1)[:keep]
    return np.maximum(pool, 0.0)


def _shortest_pairs_sampled(X, keep_frac, n_pairs, seed):
    n = len(X)
    rng = np.random.default_rng(seed)
    i = rng.integers(0, n, size=n_pairs)
    j = rng.integers(0, n - 1, size=n_pairs)
    j = j + (j >= i)  # uniform over j != i
    out = np.empty(n_pairs)
    for lo in range(0, n_pairs, 1 << 16):
        diff = X[i[lo:lo + (1 << 16)]] - X[j[lo:lo + (1 << 16)]]
        out[lo:lo + (1 << 16)] = np.einsum("ij,ij->i", diff, diff)
    keep = max(1, int(math.ceil(keep_frac * n_pairs)))
    return np.partition(out, keep - 1)[:keep]


def short_distances(data, quantile=0.05, n_cap=20000, max_pairs=200_000_000, seed=0):
    """Shortest ``quantile`` fraction of pairwise distances, over sqrt(2d).

    Above ``n_cap`` rows, ``max_pairs`` random pairs (i != j, with
    replacement) are drawn with ``seed`` instead of using all pairs, which
    slightly biases the retained tail; the second return value reports it.
    """
    X = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ValueError("need at least two points")
    if not 0 < quantile <= 1:
        raise ValueError("quantile must be in (0, 1]")
    total = n * (n - 1) // 2
    if n <= n_cap:
        keep = max(1, int(math.ceil(quantile * total)))
        sq = _shortest_pairs_exact(X, keep)
        sub = False
    else:
        sq = _shortest_pairs_sampled(X, quantile, int(min(max_pairs, total)), seed)
        sub = True
    return np.sqrt(sq) / math.sqrt(2.0 * d), sub


def sigma_histogram(data, quantile=0.05, bins=None, seed=0, n_cap=20000, max_pairs=200_000_000):
    """Log-binned histogram of the scaled short distances.

    The default bin width is ``1/(2 sqrt(2d))`` in log space, half the
    relative spread of a within-cluster distance. An integer ``bins`` gives
    that many equal log-width bins instead. Distances below ``1e-12`` are
    dropped.
    """
    X = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)
    d = X.shape[1]
    dist, sub = short_distances(X, quantile, n_cap, max_pairs, seed)
    dist = dist[dist >= ZERO_GUARD]
    if dist.size == 0:
        return SigmaHistogram(np.zeros(1), np.zeros(0), np.zeros(0, dtype=np.int64), 0, sub, 0.0)
    lg = np.log(dist)
    lo, hi = lg.min(), lg.max()
    if bins is None:
        width = 0.5 / math.sqrt(2.0 * d)
        m = max(1, int(math.ceil((hi - lo) / width)) + 1)
        edges = lo - 0.5 * width + width * np.arange(m + 1)
    else:
        m = int(bins)
        if m < 1:
            raise ValueError("bins must be positive")
        edges = np.linspace(lo, hi if hi > lo else lo + 1.0, m + 1)
        width = edges[1] - edges[0]
    counts, edges = np.histogram(lg, bins=edges)
    centers = np.exp(0.5 * (edges[:-1] + edges[1:]))
    return SigmaHistogram(edges, centers, counts, int(dist.size), sub, float(width))


def find_sigma_peaks(hist, d, min_count=5, min_prominence=0.5, merge=3.0, gap_factor=None, G=4.0):
    """Peak positions (distance / sqrt(2d) units) of a sigma histogram.

    A peak is a bin of the [1, 2, 1]-smoothed histogram strictly above both
    neighbours (the last bin never qualifies) with prominence at least
    ``min_prominence`` times its height and a raw count of at least
    ``min_count``. Peaks closer than ``merge / sqrt(2d)`` in log space are
    merged into the taller one. Scanning upward, peaks stop at the first one
    more than ``gap_factor`` (default ``2 sqrt(2G)``) times the previous
    kept peak: distances across well separated clusters, and to the
    background, sit beyond that gap.
    """
    c = np.asarray(hist.counts, dtype=np.float64)
    if c.size == 0:
        return []
    sm = np.convolve(np.concatenate([[0.0], c, [0.0]]), [0.25, 0.5, 0.25], mode="valid")
    # zero pad on the left only, so the last bin is never a peak
    pk, props = find_peaks(np.concatenate([[0.0], sm]), prominence=0)
    pk = pk - 1
    prom = props["prominences"]
    keep = (prom >= min_prominence * sm[pk]) & (c[pk] >= min_count) & (pk < len(c) - 1)
    pk, h = pk[keep], sm[pk[keep]]
    logs = np.log(hist.centers[pk])
    tol = merge / math.sqrt(2.0 * d)
    order = np.argsort(-h, kind="stable")
    chosen = []
    for i in order:
        if all(abs(logs[i] - logs[j]) >= tol for j in chosen):
            chosen.append(i)
    vals = sorted(float(hist.centers[pk[i]]) for i in chosen)
    gap = 2.0 * math.sqrt(2.0 * G) if gap_factor is None else gap_factor
    out = []
    for v in vals:
        if out and v > gap * out[-1]:
            break
        out.append(v)
    return out


def estimate_sigmas(data, quantile=0.05, bins=None, seed=0, min_count=5, G=4.0,
                    gap_factor=None, n_cap=20000, max_pairs=200_000_000):
    """Estimate cluster standard deviations from short pairwise distances.

    Returns
    -------
    list of float
        Peak positions in ascending order.
    """
    X = data.values if isinstance(data, DataMatrix) else np.asarray(data, dtype=np.float64)
    if X.ndim != 2 or len(X) < 2:
        raise ValueError("need at least two points")
    hist = sigma_histogram(X, quantile, bins, seed, n_cap, max_pairs)
    return find_sigma_peaks(hist, X.shape[1], min_count=min_count, G=G, gap_factor=gap_factor)


def suggest_sigma_max(sigma_estimates, factor=2.2):
    """A bandwidth slightly above twice the largest estimated sigma."""
    s = np.asarray(list(sigma_estimates), dtype=np.float64)
    if s.size == 0:
        raise ValueError("no sigma estimates")
    return float(factor * s.max())


def estimate_k(data, cfg, k_cap, min_cluster_size=1):
    """Number of clusters extracted before the first too-small one (capped)."""
    if k_cap < 1:
        raise ValueError("k_cap must be positive")
    return crlm(data, k_cap, cfg, min_cluster_size).k
