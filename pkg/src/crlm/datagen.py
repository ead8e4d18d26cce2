"""Seeded sampler for Gaussian mixtures with a uniform background.

Random streams
--------------
All draws for one call come from ``numpy.random.PCG64`` generators spawned
from ``SeedSequence(seed)`` with a fixed spawn key per stream:

* stream 0: component labels
* stream 1: background points
* stream 1 + j: points of cluster j (j = 1..k)

so adding a cluster or changing its size does not disturb the draws of the
background or of the other clusters. Gaussians use numpy's ziggurat
``standard_normal`` throughout.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import DataMatrix, LossConfig


def _stream(seed, key):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(key,))))


@dataclass(frozen=True, eq=False)
class GmmubSpec:
    """Mixture of ``k`` isotropic Gaussians plus a uniform ball component.

    Parameters
    ----------
    k, d : int
        Number of clusters and dimension.
    D : float
        Background ball radius is ``D * sqrt(d)``.
    weights : array_like, shape (k + 1,)
        Cluster weights followed by the background weight.
    means : array_like, shape (k, d)
    sigmas : array_like, shape (k,)
    """

    k: int
    d: int
    D: float
    weights: np.ndarray
    means: np.ndarray
    sigmas: np.ndarray

    def __post_init__(self):
        k, d = int(self.k), int(self.d)
        if k < 0 or d < 1:
            raise ValueError("need k >= 0 and d >= 1")
        w = np.asarray(self.weights, dtype=np.float64).ravel()
        mu = np.asarray(self.means, dtype=np.float64).reshape(k, d)
        sg = np.asarray(self.sigmas, dtype=np.float64).ravel()
        if w.shape != (k + 1,) or sg.shape != (k,):
            raise ValueError("weights need k+1 entries and sigmas k entries")
        if np.any(w < 0) or not np.isclose(w.sum(), 1.0, rtol=0, atol=1e-9):
            raise ValueError("weights must be nonnegative and sum to 1")
        if np.any(~np.isfinite(sg)) or np.any(sg <= 0):
            raise ValueError("sigmas must be positive")
        if not np.isfinite(self.D) or self.D <= 0:
            raise ValueError("D must be positive")
        if not np.all(np.isfinite(mu)):
            raise ValueError("means must be finite")
        if k and np.any(np.linalg.norm(mu, axis=1) > self.D * np.sqrt(d)):
            raise ValueError("every mean must lie inside the background ball")
        for name, v in (("weights", w), ("means", mu), ("sigmas", sg)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "D", float(self.D))

    @property
    def pi_bg(self):
        return float(self.weights[-1])

    def to_dict(self):
        return {"k": self.k, "d": self.d, "D": self.D,
                "weights": self.weights.tolist(),
                "means": self.means.tolist(),
                "sigmas": self.sigmas.tolist()}

    @classmethod
    def from_dict(cls, obj):
        k, d = int(obj["k"]), int(obj["d"])
        means = np.asarray(obj.get("means", np.zeros((k, d))), dtype=np.float64).reshape(k, d)
        return cls(k, d, float(obj["D"]), obj["weights"], means, obj["sigmas"])

    def replace(self, **kw):
        cur = {"k": self.k, "d": self.d, "D": self.D, "weights": self.weights,
               "means": self.means, "sigmas": self.sigmas}
        cur.update(kw)
        return GmmubSpec(**cur)

    def resized(self, d):
        """Same mixture in dimension ``d``.

        Means keep their direction and are rescaled by sqrt(d_new/d_old) so
        that the separation in units of sqrt(d) is unchanged; extra
        coordinates are zero and dropped coordinates are truncated.
        """
        d = int(d)
        mu = np.zeros((self.k, d))
        m = min(d, self.d)
        mu[:, :m] = self.means[:, :m]
        mu *= np.sqrt(d / self.d)
        return self.replace(d=d, means=mu)


def place_means(k, d, sigma_max, G=4.0, spread=1.5):
    """Cluster means on coordinate axes.

    ``k = 1`` gives the origin. Otherwise mean j sits at ``s * e_j`` (and at
    ``-s * e_{j-d}`` once the axes are used up), with ``s`` chosen so every
    pair is ``spread`` times the required separation ``2 sigma_max sqrt(dG)``
    apart.
    """
    if k > 2 * d:
        raise ValueError("at most 2*d means fit on the axes")
    mu = np.zeros((k, d))
    if k <= 1:
        return mu
    s = spread * 2.0 * sigma_max * np.sqrt(d * G) / np.sqrt(2.0)
    for j in range(k):
        if j < d:
            mu[j, j] = s
        else:
            mu[j, j - d] = -s
    return mu


def min_radius_scale(means, d, sigma_max, G=4.0):
    """Smallest D satisfying the large-D assumption (as an infimum)."""
    d = int(d)
    norms = np.linalg.norm(np.asarray(means).reshape(-1, d), axis=1)
    top = norms.max() if norms.size else 0.0
    return max(2.0 * sigma_max * np.sqrt(G), (top + 2.0 * sigma_max * np.sqrt(d * G)) / np.sqrt(d))


def default_spec(k=3, d=100, sigmas=None, pi=0.01, sigma_max=10.0, G=4.0, D=None):
    """Default experiment mixture.

    Equal cluster weights ``pi``, standard deviations 1, 2, 3, ... and a
    background taking the rest. ``D`` defaults to twice the smallest value
    allowed by the large-D assumption for the given ``sigma_max``.
    """
    sig = np.arange(1, k + 1, dtype=np.float64) if sigmas is None else np.asarray(sigmas, float)
    w = np.append(np.full(k, pi), 1.0 - k * pi)
    mu = place_means(k, d, sigma_max, G)
    if D is None:
        D = 2.0 * min_radius_scale(mu, d, sigma_max, G)
    return GmmubSpec(k, d, D, w, mu, sig)


def _ball(rng, count, d, radius):
    z = rng.standard_normal((count, d))
    norms = np.sqrt(np.einsum("ij,ij->i", z, z))
    u = rng.random(count)
    return z / norms[:, None] * (radius * u ** (1.0 / d))[:, None]


def sample_uniform_ball(count, d, radius, seed):
    """Uniform points in the closed d-ball around the origin.

    Direction from a normalized standard Gaussian, norm ``radius * U**(1/d)``.
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    if count < 0 or d < 1:
        raise ValueError("need count >= 0 and d >= 1")
    rng = np.random.default_rng(seed)
    return DataMatrix(_ball(rng, int(count), int(d), float(radius)).reshape(int(count), int(d)))


def sample_gmmub(spec, n, seed):
    """Draw ``n`` labelled points from ``spec``.

    Labels: 0 for background, j for cluster j.
    """
    if not isinstance(spec, GmmubSpec):
        raise ValueError("spec must be a GmmubSpec")
    n = int(n)
    if n < 0:
        raise ValueError("n must be nonnegative")
    k, d = spec.k, spec.d
    comp = _stream(seed, 0).choice(k + 1, size=n, p=spec.weights / spec.weights.sum())
    labels = np.where(comp == k, 0, comp + 1).astype(np.int64)
    X = np.empty((n, d))
    bg = labels == 0
    X[bg] = _ball(_stream(seed, 1), int(bg.sum()), d, spec.D * np.sqrt(d))
    for j in range(1, k + 1):
        m = labels == j
        X[m] = spec.means[j - 1] + spec.sigmas[j - 1] * _stream(seed, 1 + j).standard_normal((int(m.sum()), d))
    return DataMatrix(X, labels)


@dataclass
class AssumptionReport:
    """Assumption and condition flags with their numeric margins.

    Margins are ratios ``lhs / rhs`` of each strict inequality (> 1 means it
    holds), reduced over clusters or pairs by their worst case.
    """

    a1: bool
    a2: bool
    a3: bool
    c1: bool | None = None
    c2: bool | None = None
    margins: dict = field(default_factory=dict)

    @property
    def assumptions_ok(self):
        return self.a1 and self.a2 and self.a3

    @property
    def conditions_ok(self):
        return bool(self.c1) and bool(self.c2)

    def to_dict(self):
        return {"a1": self.a1, "a2": self.a2, "a3": self.a3,
                "c1": self.c1, "c2": self.c2, "margins": dict(self.margins)}


def check_assumptions(spec, cfg):
    """Evaluate the large-D (A1), separation (A2) and bandwidth (A3) assumptions."""
    d, G, sm = spec.d, cfg.G, cfg.sigma_max
    rad = 2.0 * sm * np.sqrt(d * G)
    a1_r = spec.D / (2.0 * sm * np.sqrt(G))
    norms = np.linalg.norm(spec.means, axis=1)
    a1_c = spec.D * np.sqrt(d) / (norms + rad) if spec.k else np.array([np.inf])
    a1 = bool(spec.D > 2.0 * sm * np.sqrt(G)) and bool(np.all(spec.D * np.sqrt(d) > norms + rad))
    a2_m = np.inf
    a2 = True
    for l in range(spec.k):
        for j in range(l + 1, spec.k):
            dist = np.linalg.norm(spec.means[l] - spec.means[j])
            a2 = a2 and bool(dist > rad)
            a2_m = min(a2_m, dist / rad)
    a3 = bool(np.all(sm > 2.0 * spec.sigmas))
    a3_m = float(np.min(sm / (2.0 * spec.sigmas))) if spec.k else np.inf
    margins = {"a1_radius": float(a1_r), "a1_center": float(np.min(a1_c)),
               "a2": float(a2_m), "a3": a3_m}
    return AssumptionReport(a1, a2, a3, None, None, margins)


def check_conditions(data, spec, cfg):
    """Assumptions plus the realized-sample conditions C1 and C2.

    C1: no background point is closer than ``sigma_max sqrt(dG)`` to any
    cluster point. C2: every point of cluster j lies strictly within
    ``sigma_j sqrt(dG)`` of its mean.
    """
    if data.labels is None:
        raise ValueError("conditions need labelled data")
    if data.d != spec.d:
        raise ValueError("data and spec dimensions differ")
    rep = check_assumptions(spec, cfg)
    X, lab, d = data.values, data.labels, data.d
    pos, neg = X[lab > 0], X[lab == 0]
    r2 = cfg.r2(d)
    c1 = not bool(np.any(kernels.any_within(np.ascontiguousarray(neg), np.ascontiguousarray(pos), r2)))
    near = np.inf
    for p in pos:
        if len(neg):
            near = min(near, float(np.min(kernels.sqdist_to(np.ascontiguousarray(neg), p))))
    c2 = True
    worst = 0.0
    for j in range(1, spec.k + 1):
        pts = np.ascontiguousarray(X[lab == j])
        if not len(pts):
            continue
        s = kernels.sqdist_to(pts, spec.means[j - 1])
        bound = d * cfg.G * spec.sigmas[j - 1] ** 2
        c2 = c2 and bool(np.all(s < bound))
        worst = max(worst, float(np.sqrt(s.max() / bound)))
    rep.c1, rep.c2 = c1, c2
    rep.margins["c1"] = float(np.sqrt(near / r2)) if np.isfinite(near) else np.inf
    rep.margins["c2"] = 1.0 / worst if worst > 0 else np.inf
    return rep
