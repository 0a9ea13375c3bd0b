import numpy as np
import pytest

from cellfree_rlspa.channel import crandn
from cellfree_rlspa.clustering import sparsify
from cellfree_rlspa.errors import SingularChannel
from cellfree_rlspa.precoding import compose, zf


def test_identity_embedded():
    g = np.eye(6, 3, dtype=complex)
    p = zf(g)
    np.testing.assert_allclose(p.raw, g, atol=1e-14)
    np.testing.assert_allclose(p.w, g, atol=1e-14)


def test_zf_residual_random(rng):
    for _ in range(50):
        g = crandn(rng, (40, 10))
        p = zf(g)
        np.testing.assert_allclose(g.T @ p.raw, np.eye(10), atol=1e-8)


def test_scaling(rng):
    g = crandn(rng, (12, 4))
    p, q = zf(g), zf(2 * g)
    np.testing.assert_allclose(q.raw, p.raw / 2, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(q.w, p.w, rtol=1e-12, atol=1e-15)


def test_unit_norm_columns(rng):
    p = zf(crandn(rng, (30, 8)) * 1e-4)
    np.testing.assert_allclose(np.linalg.norm(p.w, axis=0), 1.0, atol=1e-10)


def test_support_within_cluster_union(default_block):
    # each ZF column mixes all served UEs, so only the union of clusters is guaranteed
    _, block = default_block
    union = block.mask.any(axis=1)
    assert np.all(block.precoder.w[~union] == 0)
    g_a = sparsify(block.channels.g_hat, block.mask)
    np.testing.assert_allclose(g_a.T @ block.precoder.raw, np.eye(block.precoder.n), atol=1e-8)


def test_singular_channel(rng):
    g = crandn(rng, (8, 3))
    g[:, 2] = g[:, 0]
    with pytest.raises(SingularChannel):
        zf(g)
    with pytest.raises(SingularChannel):
        zf(crandn(rng, (3, 4)))


def test_compose(rng):
    p = zf(crandn(rng, (10, 4)))
    np.testing.assert_array_equal(compose(p, np.ones(4)), p.w)
    assert not compose(p, np.zeros(4)).any()
    d = rng.uniform(size=4)
    assert np.linalg.norm(compose(p, d)) ** 2 == pytest.approx(np.sum(d**2), rel=1e-10)
    with pytest.raises(ValueError):
        compose(p, np.ones(3))
