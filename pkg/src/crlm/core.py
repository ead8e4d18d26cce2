"""Domain types and the truncated quadratic loss.

The loss of a displacement ``x`` in ``d`` dimensions is

    l(x) = min(|x|^2 / (d sigma_max^2) - G, 0)

which is ``-G`` at the origin and exactly zero outside the ball of radius
``sigma_max * sqrt(d G)``. Membership in that ball is decided on squared
distances with a strict inequality, so a point on the boundary sphere is
outside.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels


def _as_float_matrix(values):
    X = np.ascontiguousarray(values, dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(1, -1) if X.size else X.reshape(0, 1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {X.shape}")
    return X


@dataclass(frozen=True, eq=False)
class DataMatrix:
    """Observations (rows) with optional ground-truth labels.

    Parameters
    ----------
    values : array_like, shape (n, d)
        Finite observations. ``n = 0`` is allowed for empty samples.
    labels : array_like of int, shape (n,), optional
        0 marks background points, 1..k marks the positive clusters.
    """

    values: np.ndarray
    labels: np.ndarray | None = None

    def __post_init__(self):
        X = _as_float_matrix(self.values)
        if X.shape[1] < 1:
            raise ValueError("d must be at least 1")
        if not np.all(np.isfinite(X)):
            raise ValueError("data contains non-finite entries")
        X.setflags(write=False)
        object.__setattr__(self, "values", X)
        if self.labels is not None:
            lab = np.asarray(self.labels)
            if lab.ndim != 1 or len(lab) != len(X):
                raise ValueError("labels must be a vector with one entry per row")
            if lab.size and not np.issubdtype(lab.dtype, np.integer):
                if not np.all(lab == np.round(lab)):
                    raise ValueError("labels must be integers")
            lab = lab.astype(np.int64)
            if lab.size and lab.min() < 0:
                raise ValueError("labels must be >= 0")
            lab.setflags(write=False)
            object.__setattr__(self, "labels", lab)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def d(self):
        return self.values.shape[1]

    @property
    def k(self):
        """Largest positive label, or 0 without labels."""
        if self.labels is None or self.labels.size == 0:
            return 0
        return int(self.labels.max())

    def subset(self, rows):
        rows = np.asarray(rows, dtype=np.intp)
        lab = None if self.labels is None else self.labels[rows]
        return DataMatrix(self.values[rows], lab)


@dataclass(frozen=True)
class LossConfig:
    """Loss hyperparameters.

    Parameters
    ----------
    sigma_max : float
        Loss bandwidth.
    G : float
        Truncation constant, must exceed 1.
    """

    sigma_max: float
    G: float = 4.0

    def __post_init__(self):
        s, g = float(self.sigma_max), float(self.G)
        if not np.isfinite(s) or s <= 0:
            raise ValueError("sigma_max must be a positive finite number")
        if not np.isfinite(g) or g <= 1:
            raise ValueError("G must be a finite number greater than 1")
        object.__setattr__(self, "sigma_max", s)
        object.__setattr__(self, "G", g)

    def radius(self, d):
        """Support radius sigma_max * sqrt(d G)."""
        return self.sigma_max * np.sqrt(d * self.G)

    def r2(self, d):
        """Squared support radius d G sigma_max^2."""
        return d * self.G * self.sigma_max ** 2

    def inv(self, d):
        """Scale 1 / (d sigma_max^2) applied to squared distances."""
        return 1.0 / (d * self.sigma_max ** 2)


@dataclass(frozen=True, eq=False)
class ClusterEstimate:
    """One extracted cluster: center, spread and member rows."""

    center: np.ndarray
    sigma_hat: float
    members: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.center, dtype=np.float64).ravel()
        m = np.asarray(self.members, dtype=np.intp).ravel()
        if m.size == 0:
            raise ValueError("a cluster needs at least one member")
        if len(np.unique(m)) != len(m):
            raise ValueError("duplicate member indices")
        # coincident members give an exact zero spread
        if not np.isfinite(self.sigma_hat) or self.sigma_hat < 0:
            raise ValueError("sigma_hat must be finite and nonnegative")
        c.setflags(write=False)
        m.setflags(write=False)
        object.__setattr__(self, "center", c)
        object.__setattr__(self, "members", m)
        object.__setattr__(self, "sigma_hat", float(self.sigma_hat))

    @property
    def size(self):
        return len(self.members)


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    """Ordered clusters plus a per-row assignment (0 = not clustered)."""

    clusters: list
    assignment: np.ndarray
    stopped_early: bool = False
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64).ravel()
        seen = np.zeros(len(a), dtype=bool)
        for j, c in enumerate(self.clusters, start=1):
            if c.members.size and (c.members.min() < 0 or c.members.max() >= len(a)):
                raise ValueError("member index out of range")
            if seen[c.members].any():
                raise ValueError("clusters share members")
            seen[c.members] = True
            if np.any(a[c.members] != j):
                raise ValueError("assignment disagrees with member sets")
        if np.any(a[~seen] != 0):
            raise ValueError("assignment disagrees with member sets")
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)
        object.__setattr__(self, "clusters", list(self.clusters))

    @property
    def k(self):
        return len(self.clusters)

    @property
    def centers(self):
        if not self.clusters:
            return np.zeros((0, 0))
        return np.vstack([c.center for c in self.clusters])

    @property
    def sigmas(self):
        return np.array([c.sigma_hat for c in self.clusters])


def _values(data):
    return data.values if isinstance(data, DataMatrix) else _as_float_matrix(data)


def _losses_from_sq(s, cfg, d):
    """Per-point loss from squared distances; zero outside the open ball."""
    s = np.asarray(s, dtype=np.float64)
    out = np.minimum(s * cfg.inv(d) - cfg.G, 0.0)
    out[~(s < cfg.r2(d))] = 0.0
    return out


def robust_loss(x, cfg):
    """Truncated quadratic loss of a single displacement.

    Parameters
    ----------
    x : array_like, shape (d,)
    cfg : LossConfig

    Returns
    -------
    float
        ``min(|x|^2/(d sigma_max^2) - G, 0)``, in ``[-G, 0]``.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    if x.size < 1:
        raise ValueError("x must have at least one coordinate")
    if not np.all(np.isfinite(x)):
        raise ValueError("x contains non-finite entries")
    s = kernels.sqdist_to(x.reshape(1, -1), np.zeros_like(x))
    return float(_losses_from_sq(s, cfg, x.size)[0])


def point_losses(data, center, cfg):
    """Loss of every row of ``data`` measured from ``center``."""
    X = _values(data)
    c = np.asarray(center, dtype=np.float64).ravel()
    if c.size != X.shape[1]:
        raise ValueError(f"center has length {c.size}, data has d={X.shape[1]}")
    if not np.all(np.isfinite(c)):
        raise ValueError("center contains non-finite entries")
    return _losses_from_sq(kernels.sqdist_to(X, c), cfg, X.shape[1])


def total_loss(data, center, cfg):
    """Summed loss of all rows around ``center``.

    Terms are added in row order starting from zero, which is the same
    reduction the scan kernels use, so ``total_loss(data, x_i, cfg)`` matches
    the scan value for row ``i`` exactly.
    """
    terms = point_losses(data, center, cfg)
    if terms.size == 0:
        return 0.0
    return float(np.cumsum(terms)[-1])
