import itertools

import numpy as np
import pytest

from crlm import kernels
from crlm.clustering import crlm, kmeans_pp, ocrlm
from crlm.core import DataMatrix, LossConfig, total_loss
from crlm.datagen import GmmubSpec, default_spec, sample_gmmub
from crlm.metrics import f_measure_avg, rand_index


def naive_crlm(data, k_max, cfg, min_size=1):
    """Full rescan every iteration, straight from the definition."""
    X = data.values
    active = np.arange(data.n)
    out = []
    for _ in range(k_max):
        if not active.size:
            break
        losses = [total_loss(X[active], X[i], cfg) for i in active]
        best = active[int(np.argmin(losses))]
        s = ((X[active] - X[best]) ** 2).sum(1)
        members = active[s < cfg.r2(data.d)]
        if members.size <= min_size:
            break
        out.append(members)
        active = np.setdiff1d(active, members)
    return out


def test_ocrlm_single_point():
    cfg = LossConfig(2.5)
    est = ocrlm(DataMatrix([[1.0, 2.0, 3.0]]), None, cfg)
    assert np.array_equal(est.center, [1, 2, 3])
    assert est.sigma_hat == 2.5 and est.size == 1


def test_ocrlm_small_example():
    X = np.array([[0, 0], [0.1, 0], [-0.1, 0], [100, 100], [-100, 50]], dtype=float)
    cfg = LossConfig(1.0)
    # brute-force: the losses at all five candidates
    losses = [total_loss(X, x, cfg) for x in X]
    assert int(np.argmin(losses)) == 0
    est = ocrlm(DataMatrix(X), None, cfg)
    assert sorted(est.members) == [0, 1, 2]
    assert np.allclose(est.center, [0, 0], atol=1e-15)
    assert est.sigma_hat ** 2 == pytest.approx(0.005, rel=1e-12)


def test_ocrlm_prefers_larger_cluster(rng):
    base = rng.normal(scale=0.3, size=(10, 5))
    big = base + 100.0
    small = base[:5] - 100.0
    X = np.vstack([small, big])
    cfg = LossConfig(1.0)
    losses = [total_loss(X, x, cfg) for x in X]
    assert int(np.argmin(losses)) >= 5
    est = ocrlm(DataMatrix(X), None, cfg)
    assert sorted(est.members) == list(range(5, 15))


def test_ocrlm_tie_goes_to_lowest_index():
    X = np.array([[0.0], [0.5], [10.0], [10.5]])
    est = ocrlm(DataMatrix(X), None, LossConfig(0.5))
    assert sorted(est.members) == [0, 1]
    est = ocrlm(DataMatrix(X), [1, 2, 3], LossConfig(0.5))
    assert sorted(est.members) == [2, 3]


def test_ocrlm_errors():
    with pytest.raises(ValueError):
        ocrlm(DataMatrix(np.zeros((3, 2))), [], LossConfig(1.0))


def test_crlm_recovers_separated_mixture():
    spec = default_spec(k=3, d=50, sigma_max=10.0)
    cfg = LossConfig(10.0)
    for seed in range(3):
        data = sample_gmmub(spec, 3000, seed)
        res = crlm(data, 3, cfg)
        assert rand_index(data.labels, res.assignment) == 1.0
        assert f_measure_avg(data.labels, res.assignment, 3) == 1.0


def test_crlm_singleton_stop():
    spec = default_spec(k=1, d=100, pi=0.05, sigma_max=10.0)
    data = sample_gmmub(spec, 2000, seed=7)
    res = crlm(data, 5, LossConfig(10.0))
    assert res.k == 1 and res.stopped_early
    assert res.clusters[0].size > 1
    assert set(res.clusters[0].members) == set(np.flatnonzero(data.labels == 1))


def test_crlm_kmax_one_equals_ocrlm():
    spec = default_spec(k=2, d=20, sigma_max=5.0)
    data = sample_gmmub(spec, 800, 1)
    cfg = LossConfig(5.0)
    a = crlm(data, 1, cfg).clusters[0]
    b = ocrlm(data, None, cfg)
    assert np.array_equal(a.members, b.members)
    assert np.array_equal(a.center, b.center) and a.sigma_hat == b.sigma_hat


def test_crlm_errors():
    with pytest.raises(ValueError):
        crlm(DataMatrix(np.zeros((2, 2))), 0, LossConfig(1.0))


@pytest.mark.parametrize("seed", range(4))
def test_incremental_matches_naive(seed):
    # overlapping clusters so rescans actually touch many rows
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(size=(40, 6)) + c for c in (0.0, 2.5, 6.0)] + [rng.uniform(-10, 16, (60, 6))])
    data = DataMatrix(X)
    cfg = LossConfig(0.8)
    res = crlm(data, 6, cfg)
    ref = naive_crlm(data, 6, cfg)
    assert [sorted(c.members) for c in res.clusters] == [sorted(m) for m in ref]


def test_crlm_properties(rng):
    X = np.vstack([rng.normal(size=(30, 4)), rng.normal(size=(20, 4)) + 9, rng.uniform(-20, 20, (50, 4))])
    data = DataMatrix(X)
    cfg = LossConfig(1.0)
    a, b = crlm(data, 5, cfg), crlm(data, 5, cfg)
    assert np.array_equal(a.assignment, b.assignment)
    seen = set()
    for c in a.clusters:
        assert not seen & set(c.members)
        seen |= set(c.members)
    sizes = [c.size for c in a.clusters]
    assert all(s > 1 for s in sizes)
    # seed losses increase in extraction order
    assert all(x <= y for x, y in zip(a.extra["seed_losses"], a.extra["seed_losses"][1:]))


def test_extraction_order_by_seed_loss():
    # equal-size clusters of different spread: the tighter one has the lower loss
    spec = GmmubSpec(3, 60, 400.0, [0.1, 0.1, 0.1, 0.7],
                     np.vstack([np.eye(60)[j] * 300.0 for j in range(3)]), [3.0, 1.0, 2.0])
    data = sample_gmmub(spec, 3000, 2)
    cfg = LossConfig(8.0)
    res = crlm(data, 3, cfg)
    X = data.values
    order = [np.bincount(data.labels[c.members]).argmax() for c in res.clusters]
    assert order == [2, 3, 1]


def test_crlm_with_pure_python_backend(monkeypatch):
    spec = default_spec(k=2, d=30, sigma_max=6.0)
    data = sample_gmmub(spec, 1500, 4)
    cfg = LossConfig(6.0)
    fast = crlm(data, 3, cfg)
    monkeypatch.setattr(kernels, "_impl", kernels.get_backend("numpy"))
    slow = crlm(data, 3, cfg)
    assert np.array_equal(fast.assignment, slow.assignment)
    assert fast.extra["seed_losses"] == slow.extra["seed_losses"]


def test_kmeans_k_equals_n(rng):
    X = rng.normal(size=(7, 3))
    res = kmeans_pp(DataMatrix(X), 7, seed=0)
    assert res.k == 7
    assert res.extra["inertia"] == pytest.approx(0.0, abs=1e-20)


def test_kmeans_two_points_midpoint():
    res = kmeans_pp(DataMatrix([[0.0, 0.0], [2.0, 4.0]]), 1, seed=3)
    assert np.allclose(res.centers[0], [1.0, 2.0])


def test_kmeans_errors():
    with pytest.raises(ValueError):
        kmeans_pp(DataMatrix(np.zeros((2, 2))), 3, 0)


def _lloyd_fixed_points(X):
    """All 2-partitions that are fixed points of Lloyd's iteration."""
    n = len(X)
    fixed = set()
    for mask in itertools.product([0, 1], repeat=n):
        lab = np.array(mask)
        if lab.min() == lab.max() or lab[0] != 0:
            continue
        C = np.array([X[lab == j].mean(0) for j in (0, 1)])
        D = ((X[:, None, :] - C[None]) ** 2).sum(-1)
        if np.array_equal(np.argmin(D, 1), lab):
            fixed.add(tuple(lab))
    return fixed


def test_kmeans_reaches_lloyd_fixed_point():
    X = np.array([[0, 0], [1, 0], [0, 1], [8, 8], [9, 8], [8, 9]], dtype=float)
    fixed = _lloyd_fixed_points(X)
    assert fixed == {(0, 0, 0, 1, 1, 1)}
    for seed in range(10):
        a = kmeans_pp(DataMatrix(X), 2, seed).assignment - 1
        canon = tuple(a if a[0] == 0 else 1 - a)
        assert canon in fixed
    r1, r2 = kmeans_pp(DataMatrix(X), 2, 5), kmeans_pp(DataMatrix(X), 2, 5)
    assert np.array_equal(r1.assignment, r2.assignment)
