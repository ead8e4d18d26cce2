"""Single-cluster extraction, the multi-cluster loop and a k-means++ baseline."""
import numpy as np

from . import kernels
from .core import ClusterEstimate, ClusteringResult, DataMatrix


def _check_data(data):
    if not isinstance(data, DataMatrix):
        data = DataMatrix(data)
    return data


def _estimate(X, members, seed_row, sigma_max):
    """Center and spread of a member set (mean-shift step)."""
    d = X.shape[1]
    if len(members) == 1:
        return ClusterEstimate(X[seed_row].copy(), sigma_max, members)
    pts = X[members]
    center = pts.mean(axis=0)
    ss = float(np.sum((pts - center) ** 2))
    sigma = np.sqrt(ss / (d * (len(members) - 1)))
    return ClusterEstimate(center, sigma, members)


def ocrlm(data, active=None, cfg=None):
    """Extract one cluster by minimizing the summed robust loss.

    Every active point is tried as a center. The winner (lowest total loss
    over the active points, lowest row index on ties) defines the member set
    of active points strictly inside the support ball, whose mean and
    spread are returned.

    Parameters
    ----------
    data : DataMatrix
    active : array_like of int, optional
        Rows taking part. Defaults to all rows.
    cfg : LossConfig

    Returns
    -------
    ClusterEstimate
    """
    if cfg is None:
        raise ValueError("cfg is required")
    data = _check_data(data)
    X = data.values
    act = np.arange(data.n) if active is None else np.unique(np.asarray(active, dtype=np.intp))
    if act.size == 0:
        raise ValueError("active set is empty")
    if act[0] < 0 or act[-1] >= data.n:
        raise ValueError("active index out of range")
    d = data.d
    r2, inv, G = cfg.r2(d), cfg.inv(d), cfg.G
    Xa = np.ascontiguousarray(X[act])
    losses = kernels.scan_losses(Xa, r2, inv, G)
    best = int(np.argmin(losses))
    s = kernels.sqdist_to(Xa, Xa[best])
    members = act[s < r2]
    return _estimate(X, members, act[best], cfg.sigma_max)


def crlm(data, k_max, cfg, min_cluster_size=1):
    """Extract up to ``k_max`` clusters by repeated single-cluster extraction.

    After each extraction the members are removed. The loop stops, without
    keeping the last estimate, as soon as a member set has at most
    ``min_cluster_size`` points.

    Only the loss of rows that had a removed member inside their ball changes
    between iterations, so only those rows are rescanned. The values of all
    other rows are bitwise what a full rescan would give, because their sums
    keep the same terms in the same order.

    Returns
    -------
    ClusteringResult
        ``extra`` holds the seed row and seed loss of each kept cluster.
    """
    if int(k_max) != k_max or k_max < 1:
        raise ValueError("k_max must be a positive integer")
    if int(min_cluster_size) != min_cluster_size or min_cluster_size < 1:
        raise ValueError("min_cluster_size must be a positive integer")
    data = _check_data(data)
    X = data.values
    d = data.d
    r2, inv, G = cfg.r2(d), cfg.inv(d), cfg.G
    act = np.arange(data.n)
    Xa = np.ascontiguousarray(X)
    vals = kernels.scan_losses(Xa, r2, inv, G) if data.n else np.zeros(0)
    clusters, seeds, seed_losses = [], [], []
    assignment = np.zeros(data.n, dtype=np.int64)
    stopped = False
    while len(clusters) < k_max and act.size:
        best = int(np.argmin(vals))
        inball = kernels.sqdist_to(Xa, Xa[best]) < r2
        members = act[inball]
        if members.size <= min_cluster_size:
            stopped = True
            break
        clusters.append(_estimate(X, members, act[best], cfg.sigma_max))
        seeds.append(int(act[best]))
        seed_losses.append(float(vals[best]))
        assignment[members] = len(clusters)
        keep = ~inball
        act = act[keep]
        vals = vals[keep]
        if not act.size or len(clusters) == k_max:
            break
        Xr = np.ascontiguousarray(Xa[keep])
        touched = np.flatnonzero(kernels.any_within(Xr, Xa[inball], r2))
        if touched.size:
            vals[touched] = kernels.row_losses(Xr, touched.astype(np.intp), r2, inv, G)
        Xa = Xr
    return ClusteringResult(clusters, assignment, stopped,
                            {"seeds": seeds, "seed_losses": seed_losses})


def _sqdist_matrix(X, C, x_sq=None):
    """Squared distances via the Gram expansion, clipped at zero."""
    if x_sq is None:
        x_sq = np.einsum("ij,ij->i", X, X)
    c_sq = np.einsum("ij,ij->i", C, C)
    return np.maximum(x_sq[:, None] - 2.0 * (X @ C.T) + c_sq[None, :], 0.0)


def kmeans_pp(data, k, seed, max_iter=300, tol=1e-4):
    """Lloyd's k-means from a D^2-weighted (k-means++) seeding.

    One seeded run, no restarts. Iterations stop when the labels repeat or
    the squared center shift falls below ``tol`` times the mean per-feature
    variance. An empty cluster is reseeded with the point farthest from its
    current center. Every point is assigned (labels 1..k).

    Returns
    -------
    ClusteringResult
        ``extra`` holds the inertia and the number of Lloyd iterations.
    """
    data = _check_data(data)
    X = data.values
    n, d = X.shape
    if int(k) != k or k < 1:
        raise ValueError("k must be a positive integer")
    if k > n:
        raise ValueError(f"k={k} exceeds the number of points n={n}")
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    rng = np.random.default_rng(seed)
    x_sq = np.einsum("ij,ij->i", X, X)
    shift_tol = tol * float(np.mean(np.var(X, axis=0)))

    idx = [int(rng.integers(n))]
    d2 = _sqdist_matrix(X, X[idx], x_sq)[:, 0]
    for _ in range(1, k):
        tot = d2.sum()
        if tot > 0:
            nxt = int(rng.choice(n, p=d2 / tot))
        else:  # all remaining points coincide with a center
            free = np.setdiff1d(np.arange(n), idx)
            nxt = int(rng.choice(free))
        idx.append(nxt)
        d2 = np.minimum(d2, _sqdist_matrix(X, X[nxt:nxt + 1], x_sq)[:, 0])
    C = X[idx].copy()

    lab = None
    it = 0
    for it in range(1, max_iter + 1):
        D2 = _sqdist_matrix(X, C, x_sq)
        new = np.argmin(D2, axis=1)
        if lab is not None and np.array_equal(new, lab):
            break
        lab = new
        own = D2[np.arange(n), lab]
        old = C.copy()
        for j in range(k):
            pts = lab == j
            if pts.any():
                C[j] = X[pts].mean(axis=0)
            else:
                far = int(np.argmax(own))
                C[j] = X[far]
                lab[far] = j
                own[far] = 0.0
        if np.sum((C - old) ** 2) <= shift_tol:
            lab = np.argmin(_sqdist_matrix(X, C, x_sq), axis=1)
            break
    clusters = []
    inertia = 0.0
    for j in range(k):
        m = np.flatnonzero(lab == j)
        if m.size == 0:
            continue
        ss = float(np.sum((X[m] - C[j]) ** 2))
        inertia += ss
        sig = np.sqrt(ss / (d * (m.size - 1))) if m.size > 1 else 0.0
        clusters.append(ClusterEstimate(C[j].copy(), sig, m))
    assignment = np.zeros(n, dtype=np.int64)
    for j, c in enumerate(clusters, start=1):
        assignment[c.members] = j
    return ClusteringResult(clusters, assignment, False,
                            {"inertia": inertia, "n_iter": it})
