"""Clustering quality metrics and label matching."""
import itertools

import numpy as np
from scipy.optimize import linear_sum_assignment

EXHAUSTIVE_MAX_K = 8


def _pair(truth, pred):
    t = np.asarray(truth).ravel()
    p = np.asarray(pred).ravel()
    if len(t) != len(p):
        raise ValueError(f"label vectors differ in length ({len(t)} vs {len(p)})")
    return t, p


def contingency(truth, pred):
    """Contingency table with the sorted unique labels of each side."""
    t, p = _pair(truth, pred)
    tu, ti = np.unique(t, return_inverse=True)
    pu, pi = np.unique(p, return_inverse=True)
    M = np.zeros((len(tu), len(pu)), dtype=np.int64)
    np.add.at(M, (ti, pi), 1)
    return M, tu, pu


def _comb2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def rand_index(truth, pred):
    """Fraction of point pairs on which the two labelings agree.

    A pair agrees when both labelings put it together or both split it.
    Fewer than two points give 1.0.
    """
    t, p = _pair(truth, pred)
    n = len(t)
    if n < 2:
        return 1.0
    M, _, _ = contingency(t, p)
    same_both = int(_comb2(M).sum())
    same_t = int(_comb2(M.sum(axis=1)).sum())
    same_p = int(_comb2(M.sum(axis=0)).sum())
    total = n * (n - 1) // 2
    agree = total + 2 * same_both - same_t - same_p
    return agree / total


def rand_index_bruteforce(truth, pred):
    """O(n^2) pair counter used as a reference."""
    t, p = _pair(truth, pred)
    n = len(t)
    if n < 2:
        return 1.0
    agree = 0
    for i in range(n):
        for j in range(i + 1, n):
            agree += (t[i] == t[j]) == (p[i] == p[j])
    return agree / (n * (n - 1) // 2)


def _f1(tp, n_true, n_pred):
    if tp == 0:
        return 0.0
    prec, rec = tp / n_pred, tp / n_true
    return 2 * prec * rec / (prec + rec)


def _best_assignment(score):
    """Row-to-column injection maximizing the summed score (rows <= cols)."""
    r, c = score.shape
    if r == 0:
        return np.zeros(0, dtype=np.intp)
    if r <= EXHAUSTIVE_MAX_K and c <= EXHAUSTIVE_MAX_K:
        best, arg = -np.inf, None
        for perm in itertools.permutations(range(c), r):
            v = score[np.arange(r), perm].sum()
            if v > best + 1e-12:
                best, arg = v, perm
        return np.asarray(arg, dtype=np.intp)
    rows, cols = linear_sum_assignment(score, maximize=True)
    out = np.empty(r, dtype=np.intp)
    out[rows] = cols
    return out


def f_measure_avg(truth, pred, k=None, pred_has_background=True):
    """Mean one-vs-rest F1 over the positive truth clusters 1..k.

    Truth clusters are matched one-to-one to predicted labels so the summed
    F1 is largest (exhaustive search for up to 8 labels, Hungarian
    assignment beyond). With ``pred_has_background`` the predicted label 0
    means background and cannot be matched to a positive cluster; otherwise
    any predicted label may be, which covers algorithms whose output labels
    carry no background meaning (for two output labels this is the better of
    the two mappings). Unmatched truth clusters score 0.
    """
    t, p = _pair(truth, pred)
    if k is None:
        k = int(t.max()) if t.size else 0
    if k < 1:
        raise ValueError("need at least one positive cluster")
    if t.size and (t.min() < 0 or t.max() > k):
        raise ValueError("truth labels must lie in 0..k")
    labels = np.unique(p)
    if pred_has_background:
        labels = labels[labels != 0]
    n_true = np.array([(t == j).sum() for j in range(1, k + 1)])
    n_pred = np.array([(p == q).sum() for q in labels])
    F = np.zeros((k, max(len(labels), 0)))
    for a in range(k):
        for b, q in enumerate(labels):
            tp = int(np.sum((t == a + 1) & (p == q)))
            F[a, b] = _f1(tp, n_true[a], n_pred[b]) if n_true[a] else 0.0
    if len(labels) < k:
        F = np.hstack([F, np.zeros((k, k - len(labels)))])
    match = _best_assignment(F)
    return float(F[np.arange(k), match].mean())


def purity(truth, pred):
    """Sum over predicted clusters of their largest truth overlap, over n."""
    t, p = _pair(truth, pred)
    if t.size == 0:
        return 1.0
    M, _, _ = contingency(t, p)
    return float(M.max(axis=0).sum() / t.size)


def mean_center_error(true_means, est_means, return_unmatched=False):
    """Average distance between true means and their matched estimates.

    Estimates are matched to true means to minimize the summed Euclidean
    distance. A true mean left without an estimate adds its own norm (its
    distance to the zero vector) and is reported. With no estimates at all
    the error is infinite.

    Returns
    -------
    float, or (float, list of int) with ``return_unmatched``
        The mean error, and the 0-based indices of unmatched true means.
    """
    T = np.atleast_2d(np.asarray(true_means, dtype=np.float64))
    E = np.asarray(est_means, dtype=np.float64)
    if T.size == 0:
        raise ValueError("no true means")
    k = len(T)
    if E.size == 0:
        err, unmatched = np.inf, list(range(k))
    else:
        E = np.atleast_2d(E)
        if E.shape[1] != T.shape[1]:
            raise ValueError("mean dimensions differ")
        cost = np.linalg.norm(T[:, None, :] - E[None, :, :], axis=2)
        if len(E) >= k:
            match = _best_assignment(-cost)
            err = cost[np.arange(k), match].sum() / k
            unmatched = []
        else:
            match = _best_assignment(-cost.T)  # every estimate gets a true mean
            used = set(int(i) for i in match)
            unmatched = [i for i in range(k) if i not in used]
            err = (cost[match, np.arange(len(E))].sum()
                   + sum(np.linalg.norm(T[i]) for i in unmatched)) / k
    if return_unmatched:
        return float(err), unmatched
    return float(err)
