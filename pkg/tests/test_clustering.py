import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellfree_rlspa.channel import crandn
from cellfree_rlspa.clustering import cluster, lsf_threshold, schedule_greedy, sparsify
from cellfree_rlspa.config import SystemConfig
from cellfree_rlspa.harness import draw_block, trial_rng

# mean APs per scheduled UE at default settings, 100 blocks of seed 7
GOLDEN_CLUSTER_SIZE = 2.5412


def test_threshold_examples():
    assert lsf_threshold(np.ones((8, 5))) == 1.0
    assert lsf_threshold(np.array([[1.0, 3.0], [3.0, 1.0]])) == 2.0


def test_threshold_matches_fsum(rng):
    beta = 10 ** rng.uniform(-12, -6, size=(100, 200))
    ref = math.fsum(beta[::-1].ravel().tolist()) / beta.size
    assert lsf_threshold(beta) == pytest.approx(ref, rel=1e-12)


def test_cluster_fallback_to_argmax():
    beta = np.repeat(np.array([[0.1, 0.3], [0.5, 0.2], [0.2, 0.1]]), 2, axis=0)
    mask = cluster(beta, [0, 1], threshold=10.0, N=2)
    np.testing.assert_array_equal(mask[::2], [[False, True], [True, False], [False, False]])


def test_cluster_saturated():
    beta = np.full((12, 4), 5.0)
    assert cluster(beta, [3, 1], threshold=1.0, N=3).all()


def test_cluster_antennas_share_decision(rng):
    beta = np.repeat(rng.uniform(size=(6, 10)), 4, axis=0)
    mask = cluster(beta, np.arange(10), lsf_threshold(beta), 4)
    blocks = mask.reshape(6, 4, 10)
    assert np.all(blocks == blocks[:, :1])
    assert np.all(mask.sum(0) >= 4)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 8), st.integers(1, 4), st.integers(1, 10), st.integers(0, 2**32 - 1),
       st.floats(0.0, 3.0))
def test_argmax_inclusion_and_consistency(L, N, n, seed, thr_scale):
    rng = np.random.default_rng(seed)
    beta = np.repeat(10 ** rng.uniform(-3, 0, size=(L, n + 2)), N, axis=0)
    sched = rng.permutation(n + 2)[:n]
    thr = thr_scale * lsf_threshold(beta)
    mask = cluster(beta, sched, thr, N)
    cols = beta[:, sched]
    strongest = np.argmax(cols[::N], axis=0)
    assert np.all(mask[strongest * N, np.arange(n)])
    ap_of_row = np.arange(L * N) // N
    ok = (cols >= thr) | (ap_of_row[:, None] == strongest[None, :])
    assert np.all(~mask | ok)


def test_cluster_rejects_bad_N():
    with pytest.raises(ValueError):
        cluster(np.ones((5, 2)), [0], 1.0, 2)


def test_golden_cluster_size():
    cfg = SystemConfig()
    sizes = [draw_block(cfg, trial_rng(7, t)).mask[:: cfg.N].sum(0).mean() for t in range(100)]
    assert np.mean(sizes) == pytest.approx(GOLDEN_CLUSTER_SIZE, rel=1e-12)


def test_schedule_all_sorted(rng):
    g = crandn(rng, (6, 5))
    power = np.sum(np.abs(g) ** 2, axis=0)
    np.testing.assert_array_equal(schedule_greedy(g, 5), np.argsort(-power))


def test_schedule_dominant_column(rng):
    g = crandn(rng, (6, 9))
    g[:, 4] *= 10
    assert schedule_greedy(g, 3)[0] == 4


def _brute_force(g, n):
    power = np.sum(np.abs(g) ** 2, axis=0)
    best = max(itertools.combinations(range(g.shape[1]), n), key=lambda c: power[list(c)].sum())
    return sorted(best, key=lambda k: -power[k])


def test_schedule_brute_force_8x6(rng):
    g = crandn(rng, (8, 6))
    np.testing.assert_array_equal(schedule_greedy(g, 3), _brute_force(g, 3))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 12), st.integers(1, 6), st.data())
def test_schedule_matches_brute_force(K, M, data):
    n = data.draw(st.integers(1, K))
    seed = data.draw(st.integers(0, 2**32 - 1))
    g = crandn(np.random.default_rng(seed), (M, K))
    np.testing.assert_array_equal(schedule_greedy(g, n), _brute_force(g, n))


def test_schedule_ties_lowest_index():
    g = np.ones((3, 5), dtype=complex)
    np.testing.assert_array_equal(schedule_greedy(g, 3), [0, 1, 2])


@pytest.mark.parametrize("n", [0, 7])
def test_schedule_bad_n(n):
    with pytest.raises(ValueError):
        schedule_greedy(np.ones((2, 6)), n)


def test_sparsify(rng):
    g = crandn(rng, (8, 3))
    np.testing.assert_array_equal(sparsify(g, np.ones((8, 3), bool)), g)
    beta = np.repeat(rng.uniform(size=(4, 3)), 2, axis=0)
    minimal = cluster(beta, [0, 1, 2], threshold=np.inf, N=2)
    sparse = sparsify(g, minimal)
    assert np.all(np.count_nonzero(sparse, axis=0) == 2)
    assert np.linalg.norm(sparse) <= np.linalg.norm(g)
    with pytest.raises(ValueError):
        sparsify(g, minimal[:4])
