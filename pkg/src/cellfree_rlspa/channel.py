"""Network geometry, large-scale fading and imperfect-CSI channel draws.

Random draws follow a fixed order within a trial: AP/UE positions, shadowing,
small-scale fading, estimation error. Callers pass one
:class:`numpy.random.Generator` through all of them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import SystemConfig

# Three-slope pathloss with the Hata-COST231 constant.
CARRIER_MHZ = 1900.0
AP_HEIGHT_M = 15.0
UE_HEIGHT_M = 1.65
D0_M = 10.0
D1_M = 50.0


def cost231_constant_db(
    f_mhz: float = CARRIER_MHZ, h_ap: float = AP_HEIGHT_M, h_ue: float = UE_HEIGHT_M
) -> float:
    lf = np.log10(f_mhz)
    return float(
        46.3
        + 33.9 * lf
        - 13.82 * np.log10(h_ap)
        - (1.1 * lf - 0.7) * h_ue
        + (1.56 * lf - 0.8)
    )


_PL_CONST_DB = cost231_constant_db()


@dataclass(frozen=True)
class Topology:
    ap_positions: np.ndarray  # (L, 2) meters
    ue_positions: np.ndarray  # (K, 2) meters

    def distances(self) -> np.ndarray:
        """AP-to-UE distance matrix of shape (L, K)."""
        diff = self.ap_positions[:, None, :] - self.ue_positions[None, :, :]
        return np.hypot(diff[..., 0], diff[..., 1])


@dataclass(frozen=True)
class ChannelSet:
    """True, estimated and error channels for a set of UE columns."""

    g_true: np.ndarray
    g_hat: np.ndarray
    g_err: np.ndarray
    beta_sched: np.ndarray

    def select(self, columns) -> "ChannelSet":
        idx = np.asarray(columns, dtype=int)
        return ChannelSet(
            self.g_true[:, idx],
            self.g_hat[:, idx],
            self.g_err[:, idx],
            self.beta_sched[:, idx],
        )


def place_nodes(config: SystemConfig, rng: np.random.Generator) -> Topology:
    side = config.area_side
    aps = rng.uniform(0.0, side, size=(config.L, 2))
    ues = rng.uniform(0.0, side, size=(config.K, 2))
    return Topology(aps, ues)


def pathloss_db(distance_m):
    """Three-slope pathloss (negative dB gain) at ``distance_m`` meters."""
    # clamping at d0 yields the flat plateau of the innermost slope
    d_km = np.maximum(np.asarray(distance_m, dtype=float), D0_M) / 1000.0
    d1_km = D1_M / 1000.0
    near = -_PL_CONST_DB - 15.0 * np.log10(d1_km) - 20.0 * np.log10(d_km)
    far = -_PL_CONST_DB - 35.0 * np.log10(d_km)
    return np.where(d_km > d1_km, far, near)


def pathloss_linear(distance_m):
    """Linear pathloss gain; scalar in, float out."""
    gain = 10.0 ** (pathloss_db(distance_m) / 10.0)
    return float(gain) if np.ndim(gain) == 0 else gain


def lsf(topology: Topology, config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Large-scale fading matrix ``beta`` of shape (L*N, K), linear scale.

    Shadowing is drawn once per (AP, UE) pair and shared by the AP's antennas.
    """
    pl = pathloss_linear(topology.distances())
    z = rng.standard_normal(pl.shape)
    beta_ap = pl * 10.0 ** ((config.sigma_sh_db * z + config.lsf_gain_db) / 10.0)
    return np.repeat(beta_ap, config.N, axis=0)


def crandn(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard circularly-symmetric complex Gaussian samples, CN(0, 1)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_channel(beta: np.ndarray, alpha: float, rng: np.random.Generator) -> ChannelSet:
    """Draw ``G = G_hat + G_err`` with error power fraction ``alpha``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    beta = np.asarray(beta, dtype=float)
    h = crandn(rng, beta.shape)
    h_err = crandn(rng, beta.shape)
    sqrt_beta = np.sqrt(beta)
    g_hat = np.sqrt(1.0 - alpha) * sqrt_beta * h
    g_err = np.sqrt(alpha) * sqrt_beta * h_err
    return ChannelSet(g_hat + g_err, g_hat, g_err, beta)
