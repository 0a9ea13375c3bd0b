import numpy as np
import pytest

from cellfree_rlspa.config import SystemConfig
from cellfree_rlspa.harness import draw_block, trial_rng


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def default_block():
    cfg = SystemConfig(rho_f=10.0)
    return cfg, draw_block(cfg, trial_rng(0, 0))
