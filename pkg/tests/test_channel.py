import numpy as np
import pytest

from cellfree_rlspa.channel import (
    D0_M,
    D1_M,
    Topology,
    cost231_constant_db,
    draw_channel,
    lsf,
    pathloss_db,
    pathloss_linear,
    place_nodes,
)
from cellfree_rlspa.config import SystemConfig
from cellfree_rlspa.errors import ConfigError

# hand-evaluated three-slope model at 150 m (far slope, distances in km)
PL_CONST_DB = 140.71508370390842
PL_150M = 6.488917056751326e-12


def test_cost231_constant():
    assert cost231_constant_db() == pytest.approx(PL_CONST_DB, rel=1e-12)


def test_pathloss_golden_150m():
    assert pathloss_linear(150.0) == pytest.approx(PL_150M, rel=1e-12)
    assert pathloss_db(150.0) == pytest.approx(-PL_CONST_DB - 35 * np.log10(0.15), rel=1e-12)


def test_pathloss_plateau():
    near_at_d0 = -PL_CONST_DB - 15 * np.log10(D1_M / 1000) - 20 * np.log10(D0_M / 1000)
    for d in (0.0, 1.0, 5.0, D0_M):
        assert pathloss_db(d) == pytest.approx(near_at_d0, rel=1e-12)


def test_pathloss_continuous_at_d1():
    assert pathloss_db(D1_M - 1e-9) == pytest.approx(pathloss_db(D1_M + 1e-9), abs=1e-6)


def test_pathloss_monotone():
    assert pathloss_linear(100.0) >= pathloss_linear(200.0)
    d = np.linspace(0, 600, 2001)
    assert np.all(np.diff(pathloss_linear(d)) <= 0)


def test_place_nodes_in_square():
    cfg = SystemConfig()
    topo = place_nodes(cfg, np.random.default_rng(0))
    assert topo.ap_positions.shape == (25, 2)
    assert topo.ue_positions.shape == (200, 2)
    for pts in (topo.ap_positions, topo.ue_positions):
        assert np.all((pts >= 0) & (pts <= 400))


def test_zero_area_rejected():
    with pytest.raises(ConfigError):
        SystemConfig(area_side=0.0)


def test_place_nodes_deterministic():
    cfg = SystemConfig()
    a = place_nodes(cfg, np.random.default_rng(3))
    b = place_nodes(cfg, np.random.default_rng(3))
    np.testing.assert_array_equal(a.ap_positions, b.ap_positions)
    np.testing.assert_array_equal(a.ue_positions, b.ue_positions)


def test_lsf_without_shadowing_is_pathloss():
    cfg = SystemConfig(sigma_sh_db=0.0)
    topo = place_nodes(cfg, np.random.default_rng(1))
    beta = lsf(topo, cfg, np.random.default_rng(2))
    np.testing.assert_allclose(beta[:: cfg.N], pathloss_linear(topo.distances()), rtol=1e-14)


def test_lsf_replicated_per_ap():
    cfg = SystemConfig()
    topo = place_nodes(cfg, np.random.default_rng(1))
    beta = lsf(topo, cfg, np.random.default_rng(2))
    assert beta.shape == (cfg.M, cfg.K)
    assert np.all(beta > 0)
    blocks = beta.reshape(cfg.L, cfg.N, cfg.K)
    assert np.all(blocks == blocks[:, :1, :])


def test_shadowing_moments():
    # 50 APs x 2000 UEs = 1e5 independent shadowing draws
    cfg = SystemConfig(L=50, N=1, K=2000, n=1)
    rng = np.random.default_rng(4)
    topo = place_nodes(cfg, rng)
    beta = lsf(topo, cfg, rng)
    z_db = 10 * np.log10(beta / pathloss_linear(topo.distances()))
    assert abs(z_db.mean()) <= 0.1
    assert abs(z_db.std() - 8.0) <= 0.1


def test_decomposition_exact(rng):
    beta = 10 ** rng.uniform(-12, -6, size=(40, 10))
    ch = draw_channel(beta, 0.15, rng)
    assert np.array_equal(ch.g_true, ch.g_hat + ch.g_err)
    resid = np.abs(ch.g_true - ch.g_hat - ch.g_err)
    assert np.all(resid <= 4 * np.finfo(float).eps * np.abs(ch.g_true))


def test_error_variance_alpha_015():
    rng = np.random.default_rng(5)
    ch = draw_channel(np.ones((100, 1000)), 0.15, rng)
    var = np.mean(np.abs(ch.g_err) ** 2)
    assert var == pytest.approx(0.15, rel=0.01)


def test_tiny_alpha_ratio():
    rng = np.random.default_rng(6)
    ch = draw_channel(np.ones((200, 500)), 1e-6, rng)
    ratio = np.sum(np.abs(ch.g_err) ** 2) / np.sum(np.abs(ch.g_true) ** 2)
    assert ratio == pytest.approx(1e-6, rel=0.05)


def test_second_moments_within_3se():
    rng = np.random.default_rng(7)
    alpha, draws = 0.15, 20_000
    beta = np.array([[1e-9, 3e-8], [5e-7, 2e-10]])
    ch = draw_channel(np.broadcast_to(beta, (draws, 2, 2)), alpha, rng)
    for g, scale in ((ch.g_hat, 1 - alpha), (ch.g_err, alpha)):
        p = np.abs(g) ** 2
        mean, se = p.mean(0), p.std(0, ddof=1) / np.sqrt(draws)
        assert np.all(np.abs(mean - scale * beta) <= 3 * se)


@pytest.mark.parametrize("alpha", [0.0, 1.0, -0.1])
def test_alpha_out_of_range(alpha, rng):
    with pytest.raises(ValueError):
        draw_channel(np.ones((2, 2)), alpha, rng)


def test_channel_deterministic():
    beta = np.full((8, 3), 1e-8)
    a = draw_channel(beta, 0.15, np.random.default_rng(9))
    b = draw_channel(beta, 0.15, np.random.default_rng(9))
    for f in ("g_true", "g_hat", "g_err"):
        np.testing.assert_array_equal(getattr(a, f), getattr(b, f))


def test_select_keeps_order(rng):
    ch = draw_channel(np.ones((4, 6)), 0.2, rng)
    sub = ch.select([5, 0, 2])
    np.testing.assert_array_equal(sub.g_hat, ch.g_hat[:, [5, 0, 2]])
    np.testing.assert_array_equal(sub.beta_sched, ch.beta_sched[:, [5, 0, 2]])


def test_distances():
    topo = Topology(np.array([[0.0, 0.0]]), np.array([[3.0, 4.0], [0.0, 0.0]]))
    np.testing.assert_array_equal(topo.distances(), [[5.0, 0.0]])
