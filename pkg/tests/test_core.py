import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from crlm.core import (ClusterEstimate, ClusteringResult, DataMatrix, LossConfig,
                       robust_loss, total_loss)
from crlm.datagen import sample_uniform_ball


def test_loss_at_origin_is_minus_g():
    for d in (1, 5, 100):
        assert robust_loss(np.zeros(d), LossConfig(3.0)) == -4.0


def test_loss_on_boundary_is_zero():
    cfg = LossConfig(1.0)
    # d=2: |x|^2 = 8 exactly
    assert robust_loss([2.0, 2.0], cfg) == 0.0
    d, sm = 4, 2.0
    cfg = LossConfig(sm)
    x = np.zeros(d)
    x[0] = np.sqrt(cfg.r2(d))
    assert x[0] ** 2 == cfg.r2(d)
    assert robust_loss(x, cfg) == 0.0


def test_loss_direct_arithmetic():
    assert robust_loss([1.0, 1.0], LossConfig(1.0)) == -3.0


def test_loss_rejects_nonfinite():
    with pytest.raises(ValueError):
        robust_loss([np.nan, 0.0], LossConfig(1.0))
    with pytest.raises(ValueError):
        robust_loss([np.inf], LossConfig(1.0))


def test_loss_config_validation():
    with pytest.raises(ValueError):
        LossConfig(0.0)
    with pytest.raises(ValueError):
        LossConfig(1.0, G=1.0)
    cfg = LossConfig(2.0, 4.0)
    assert cfg.radius(25) == pytest.approx(2.0 * 10.0)


@given(arrays(np.float64, st.integers(1, 20), elements=st.floats(-50, 50)),
       st.floats(0.1, 10), st.floats(1.01, 10))
def test_loss_range_and_truncation(x, sigma, G):
    cfg = LossConfig(sigma, G)
    v = robust_loss(x, cfg)
    assert -G <= v <= 0
    if x @ x >= cfg.r2(len(x)):
        assert v == 0.0


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-5, 5)),
       st.floats(0.01, 1.0), st.floats(1.0, 3.0))
def test_loss_monotone_in_norm(x, t, stretch):
    cfg = LossConfig(1.0)
    assert robust_loss(t * x, cfg) <= robust_loss(t * stretch * x, cfg)


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-5, 5)),
       st.integers(-6, 6), st.floats(0.3, 3.0))
def test_loss_scale_coupling(x, p, sigma):
    # powers of two scale exactly, so the identity holds bitwise
    c = 2.0 ** p
    assert robust_loss(c * x, LossConfig(c * sigma)) == robust_loss(x, LossConfig(sigma))


@given(arrays(np.float64, st.integers(1, 10), elements=st.floats(-5, 5)),
       st.floats(0.1, 10), st.floats(0.3, 3.0))
def test_loss_scale_coupling_any_factor(x, c, sigma):
    a = robust_loss(c * x, LossConfig(c * sigma))
    b = robust_loss(x, LossConfig(sigma))
    assert a == pytest.approx(b, abs=1e-12)


def test_total_loss_examples():
    cfg = LossConfig(1.0)
    c = np.zeros(3)
    far = np.array([10.0, 0.0, 0.0])
    assert total_loss(DataMatrix(np.vstack([c, far])), c, cfg) == -4.0
    assert total_loss(DataMatrix(far[None, :]), c, cfg) == 0.0
    # squared distances 0, d*sigma^2, 2*d*G*sigma^2 with d = 3
    pts = np.array([[0.0, 0, 0], [np.sqrt(3.0), 0, 0], [np.sqrt(24.0), 0, 0]])
    assert total_loss(DataMatrix(pts), c, cfg) == pytest.approx(-7.0, abs=1e-14)


def test_total_loss_dimension_mismatch():
    with pytest.raises(ValueError):
        total_loss(DataMatrix(np.zeros((3, 2))), np.zeros(3), LossConfig(1.0))


@given(arrays(np.float64, st.tuples(st.integers(1, 30), st.just(4)), elements=st.floats(-3, 3)),
       st.randoms(use_true_random=False))
def test_total_loss_permutation_invariant(X, r):
    cfg = LossConfig(1.0)
    perm = list(range(len(X)))
    r.shuffle(perm)
    a = total_loss(DataMatrix(X), X[0], cfg)
    b = total_loss(DataMatrix(X[perm]), X[0], cfg)
    assert a == pytest.approx(b, abs=1e-12)
    assert -4.0 * len(X) <= a <= 0


@pytest.mark.parametrize("d", [2, 10, 100])
def test_uniform_ball_mean_loss(d):
    sm, G, m = 1.0, 4.0, 100_000
    cfg = LossConfig(sm, G)
    X = sample_uniform_ball(m, d, cfg.radius(d), seed=d).values
    L = np.minimum((X * X).sum(1) / (d * sm ** 2) - G, 0.0)
    target = -G / (d / 2 + 1)
    se = L.std(ddof=1) / np.sqrt(m)
    assert abs(L.mean() - target) < 3 * se


@pytest.mark.parametrize("d", [2, 10, 100])
def test_uniform_ball_loss_beta_law(d):
    G, m = 4.0, 100_000
    cfg = LossConfig(1.0, G)
    X = sample_uniform_ball(m, d, cfg.radius(d), seed=100 + d).values
    L = np.minimum((X * X).sum(1) / d - G, 0.0)
    res = stats.kstest((L + G) / G, stats.beta(d / 2, 1).cdf)
    assert res.statistic < 1.63 / np.sqrt(m)


def test_datamatrix_validation():
    with pytest.raises(ValueError):
        DataMatrix(np.array([[1.0, np.nan]]))
    with pytest.raises(ValueError):
        DataMatrix(np.zeros((2, 2)), labels=[0, -1])
    with pytest.raises(ValueError):
        DataMatrix(np.zeros((2, 2)), labels=[0])
    dm = DataMatrix(np.zeros((3, 2)), labels=[0, 2, 1])
    assert (dm.n, dm.d, dm.k) == (3, 2, 2)
    with pytest.raises(ValueError):
        dm.values[0, 0] = 1.0  # read-only


def test_cluster_types():
    with pytest.raises(ValueError):
        ClusterEstimate(np.zeros(2), 1.0, [])
    c1 = ClusterEstimate(np.zeros(2), 1.0, [0, 1])
    c2 = ClusterEstimate(np.ones(2), 1.0, [1, 2])
    with pytest.raises(ValueError):
        ClusteringResult([c1, c2], [1, 1, 2])
    with pytest.raises(ValueError):
        ClusteringResult([c1], [1, 0, 0])
    r = ClusteringResult([c1], [1, 1, 0])
    assert r.k == 1 and r.centers.shape == (1, 2)
