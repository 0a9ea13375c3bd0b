"""Network, signal and robustness parameters."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError

# Moment-based band for the error-norm bounds, as multiples of E||G_err||_F^2.
KAPPA1_FACTOR = 0.5
KAPPA2_FACTOR = 1.5


@dataclass(frozen=True)
class SystemConfig:
    """Scalar parameters of one simulated network.

    Defaults reproduce the evaluation setup: 25 APs with 4 antennas each,
    200 candidate UEs of which 25 are scheduled, a 400 m square and a CSI
    imperfection factor of 0.15.

    ``lsf_gain_db`` is a common gain added to every LSF coefficient (for
    instance a link budget referring ``sigma_w2 = 1`` to a physical noise
    floor); 0 keeps the bare pathloss scale.

    ``kappa1``/``kappa2`` left as ``None`` are resolved per scheduled block
    from the error statistics (see :func:`resolve_kappas`).
    """

    L: int = 25
    N: int = 4
    K: int = 200
    n: int = 25
    area_side: float = 400.0
    rho_f: float = 1.0
    sigma_w2: float = 1.0
    alpha: float = 0.15
    kappa1: Optional[float] = None
    kappa2: Optional[float] = None
    sigma_sh_db: float = 8.0
    lsf_gain_db: float = 0.0
    n_sym: int = 175
    p_max: float = 1.0
    seed: int = 0
    gd_iters: int = 30
    constellation: str = "gaussian"
    tight_power_projection: bool = False

    def __post_init__(self):
        for name in ("L", "N", "K", "n", "n_sym", "gd_iters"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value < 1:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        if not self.n <= self.M <= self.K:
            raise ConfigError(
                f"need n <= L*N <= K, got n={self.n}, L*N={self.M}, K={self.K}"
            )
        if not self.area_side > 0:
            raise ConfigError(f"area_side must be positive, got {self.area_side}")
        for name in ("rho_f", "sigma_w2", "p_max"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be strictly positive")
        if not 0.0 < self.alpha < 1.0:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.sigma_sh_db < 0:
            raise ConfigError("sigma_sh_db must be non-negative")
        if self.kappa1 is not None and not self.kappa1 > 0:
            raise ConfigError("kappa1 must be positive")
        if self.kappa2 is not None and not self.kappa2 > 0:
            raise ConfigError("kappa2 must be positive")
        if (
            self.kappa1 is not None
            and self.kappa2 is not None
            and self.kappa1 > self.kappa2
        ):
            raise ConfigError("kappa1 must not exceed kappa2")
        if self.constellation not in ("gaussian", "qpsk"):
            raise ConfigError(f"unknown constellation {self.constellation!r}")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    @property
    def M(self) -> int:
        """Total number of AP antennas."""
        return self.L * self.N

    def replace(self, **changes) -> "SystemConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def resolve_kappas(config: SystemConfig, beta_sched) -> tuple[float, float]:
    """Return ``(kappa1, kappa2)`` for a scheduled block.

    Explicit config values win. Otherwise both bounds are tied to the
    expected squared error norm ``alpha * sum(beta_sched)``.
    """
    expected = config.alpha * float(beta_sched.sum())
    k1 = config.kappa1 if config.kappa1 is not None else KAPPA1_FACTOR * expected
    k2 = config.kappa2 if config.kappa2 is not None else KAPPA2_FACTOR * expected
    if k1 > k2:
        raise ConfigError(f"resolved kappa1={k1} exceeds kappa2={k2}")
    return k1, k2
