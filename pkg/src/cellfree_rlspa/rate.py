"""Sum-rate under imperfect CSI, received signals and residual errors."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import crandn
from .errors import NumericalFailure


@dataclass(frozen=True)
class SumRateSample:
    sr_bits: float
    snr_db: float
    method: str
    trial: int
    per_symbol: tuple = ()


def error_covariance_closed(
    beta_sched: np.ndarray,
    p_a: np.ndarray,
    rho_f: float,
    alpha: float,
    sigma_w2: float,
) -> np.ndarray:
    """Closed form of ``E[rho_f G_err^T P_a P_a^H G_err*] + sigma_w2 I``.

    With independent zero-mean error entries of variance ``alpha * beta`` the
    expectation is diagonal: entry k is ``rho_f alpha sum_m beta[m, k] [P_a P_a^H]_{mm}``.
    """
    antenna_power = np.sum(np.abs(p_a) ** 2, axis=1)  # diag(P_a P_a^H)
    diag = rho_f * alpha * (beta_sched.T @ antenna_power) + sigma_w2
    return np.diag(diag.astype(complex))


def sum_rate(g_hat: np.ndarray, p_a: np.ndarray, r: np.ndarray, rho_f: float) -> float:
    """``log2 det(rho_f G_hat^T P_a P_a^H G_hat* R^{-1} + I)`` in bits/s/Hz.

    Evaluated as ``log2 det(R + S) - log2 det(R)`` with ``S`` the signal
    covariance, both via Cholesky, which keeps the argument Hermitian.
    """
    heff = g_hat.T @ p_a
    signal = rho_f * (heff @ heff.conj().T)
    r = 0.5 * (r + r.conj().T)
    total = r + 0.5 * (signal + signal.conj().T)
    try:
        ld_total = 2.0 * np.sum(np.log(np.real(np.diag(np.linalg.cholesky(total)))))
        ld_r = 2.0 * np.sum(np.log(np.real(np.diag(np.linalg.cholesky(r)))))
    except np.linalg.LinAlgError as exc:
        raise NumericalFailure("sum-rate argument is not positive definite") from exc
    # tiny negative values are rounding on a zero rate
    return max(float((ld_total - ld_r) / np.log(2.0)), 0.0)


def received_signal(
    g_true: np.ndarray,
    p_a: np.ndarray,
    x: np.ndarray,
    rho_f: float,
    sigma_w2: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """``sqrt(rho_f) G^T P_a x + w`` with ``w ~ CN(0, sigma_w2 I)``."""
    n = p_a.shape[1]
    noise = np.sqrt(sigma_w2) * crandn(rng, n)
    return np.sqrt(rho_f) * (g_true.T @ (p_a @ x)) + noise


def residual_error(x: np.ndarray, y: np.ndarray) -> float:
    x, y = np.asarray(x), np.asarray(y)
    if x.shape != y.shape:
        raise ValueError("x and y must have equal length")
    diff = x - y
    return float(np.real(np.vdot(diff, diff)))
