import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crlm.metrics import (contingency, f_measure_avg, mean_center_error, purity, rand_index,
                          rand_index_bruteforce)

labelings = st.integers(0, 60).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n),
                        st.lists(st.integers(0, 5), min_size=n, max_size=n)))


def test_rand_index_examples():
    assert rand_index([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    assert rand_index([0, 0, 1, 1], [0, 1, 0, 1]) == pytest.approx(1 / 3)
    assert rand_index([0, 1, 2, 3], [5, 5, 5, 5]) == 0.0
    assert rand_index([1], [2]) == 1.0
    with pytest.raises(ValueError):
        rand_index([0, 1], [0])


@given(labelings)
def test_rand_index_matches_bruteforce(tp):
    t, p = tp
    assert rand_index(t, p) == rand_index_bruteforce(t, p)


def test_contingency_table():
    M, tu, pu = contingency([0, 0, 1, 2], [3, 3, 3, 4])
    assert M.tolist() == [[2, 0], [1, 0], [0, 1]]
    assert tu.tolist() == [0, 1, 2] and pu.tolist() == [3, 4]


def test_f_measure_examples():
    t = np.array([1] * 10 + [0] * 990)
    p = np.zeros(1000, dtype=int)
    p[:5] = 1
    assert f_measure_avg(t, p, 1) == pytest.approx(2 / 3)
    assert f_measure_avg([0, 1, 1, 2, 2], [0, 1, 1, 2, 2], 2) == 1.0
    assert f_measure_avg([0, 1, 1, 2, 2], [0, 2, 2, 1, 1], 2) == 1.0
    assert f_measure_avg([0, 1, 2], [0, 0, 0], 2) == 0.0


def test_f_measure_two_label_mapping():
    # an algorithm with labels {0, 1} and no background meaning
    t = [1, 1, 1, 0, 0, 0, 0]
    p = [0, 0, 0, 1, 1, 1, 1]
    assert f_measure_avg(t, p, 1, pred_has_background=True) == 0.0
    assert f_measure_avg(t, p, 1, pred_has_background=False) == 1.0
    flipped = [1 - v for v in p]
    assert max(f_measure_avg(t, p, 1, pred_has_background=True),
               f_measure_avg(t, flipped, 1, pred_has_background=True)) == 1.0


def test_f_measure_errors():
    with pytest.raises(ValueError):
        f_measure_avg([0, 3], [0, 1], 2)
    with pytest.raises(ValueError):
        f_measure_avg([0, 0], [0, 1], 0)


def _f_bruteforce(t, p, k):
    t, p = np.asarray(t), np.asarray(p)
    labels = [q for q in np.unique(p) if q != 0]
    best = 0.0
    cols = labels + [None] * k
    for perm in itertools.permutations(range(len(cols)), k):
        tot = 0.0
        for a, b in enumerate(perm):
            q = cols[b]
            if q is None:
                continue
            tp = np.sum((t == a + 1) & (p == q))
            nt, npred = np.sum(t == a + 1), np.sum(p == q)
            if tp:
                tot += 2 * tp / (nt + npred)
        best = max(best, tot / k)
    return best


@given(st.integers(1, 3).flatmap(lambda k: st.tuples(
    st.just(k), st.lists(st.tuples(st.integers(0, k), st.integers(0, 4)), min_size=1, max_size=40))))
def test_f_measure_matches_bruteforce(case):
    k, pairs = case
    t, p = zip(*pairs)
    assert f_measure_avg(t, p, k) == pytest.approx(_f_bruteforce(t, p, k), abs=1e-12)


def test_f_measure_hungarian_branch():
    rng = np.random.default_rng(0)
    k = 12
    t = rng.integers(0, k + 1, 3000)
    perm = np.concatenate([[0], rng.permutation(np.arange(1, k + 1))])
    assert f_measure_avg(t, perm[t], k) == 1.0
    noisy = perm[t].copy()
    noisy[:300] = rng.integers(0, k + 1, 300)
    f = f_measure_avg(t, noisy, k)
    assert 0.8 < f < 1.0
    relabel = np.concatenate([[0], rng.permutation(np.arange(1, k + 1)) + 50])
    assert f_measure_avg(t, relabel[noisy], k) == pytest.approx(f, abs=1e-12)


@given(labelings, st.randoms(use_true_random=False))
def test_relabeling_invariance(tp, rnd):
    t, p = tp
    t = [min(v, 3) for v in t]
    labels = sorted(set(p) - {0})
    new = list(range(10, 10 + len(labels)))
    rnd.shuffle(new)
    mp = dict(zip(labels, new))
    q = [mp.get(v, 0) for v in p]
    assert f_measure_avg(t, q, 3) == pytest.approx(f_measure_avg(t, p, 3), abs=1e-12)
    assert rand_index(t, q) == rand_index(t, p)
    assert purity(t, q) == purity(t, p)


def test_purity_examples():
    assert purity([0, 1, 2], [0, 1, 2]) == 1.0
    assert purity([0, 0, 1, 1], [0, 1, 2, 3]) == 1.0
    assert purity([0, 0, 1, 1], [7, 7, 7, 7]) == 0.5


@given(labelings)
def test_metric_ranges(tp):
    t, p = tp
    t = [min(v, 3) for v in t]
    assert 0.0 <= rand_index(t, p) <= 1.0
    assert 0.0 <= purity(t, p) <= 1.0
    assert 0.0 <= f_measure_avg(t, p, 3) <= 1.0


def test_mean_center_error_examples():
    T = np.array([[0.0, 0.0], [10.0, 0.0]])
    assert mean_center_error(T, T) == 0.0
    assert mean_center_error(T, T[::-1]) == 0.0
    assert mean_center_error([[3.0, 4.0]], [[0.0, 0.0]]) == 5.0
    err, un = mean_center_error(T, [[10.0, 1.0]], return_unmatched=True)
    assert un == [0] and err == pytest.approx(0.5)
    err, un = mean_center_error(T, np.zeros((0, 2)), return_unmatched=True)
    assert err == np.inf and un == [0, 1]
    # a surplus estimate is ignored
    assert mean_center_error(T, [[0.0, 1.0], [9.0, 0.0], [50.0, 50.0]]) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        mean_center_error(T, [[0.0, 0.0, 0.0]])


@given(st.integers(1, 10), st.integers(0, 3), st.randoms(use_true_random=False))
def test_mean_center_error_permutation_invariant(k, extra, rnd):
    rng = np.random.default_rng(rnd.randint(0, 2 ** 32 - 1))
    T = rng.standard_normal((k, 3))
    E = T + 0.3 * rng.standard_normal((k, 3))
    E = np.vstack([E, 5 + rng.standard_normal((extra, 3))])
    perm = rng.permutation(len(E))
    assert mean_center_error(T, E[perm]) == pytest.approx(mean_center_error(T, E), rel=1e-12)
    # the optimum can only be at most the identity matching
    assert mean_center_error(T, E) <= np.linalg.norm(T - E[:k], axis=1).mean() + 1e-12
