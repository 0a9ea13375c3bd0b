"""User scheduling by channel power and LSF-threshold AP clustering."""

from __future__ import annotations

import numpy as np


def lsf_threshold(beta: np.ndarray) -> float:
    """Network-wide clustering threshold: the mean of all LSF coefficients."""
    return float(np.mean(beta))


def schedule_greedy(g_hat_full: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` UEs with the largest estimated channel power.

    Returned in descending order of ``||g_hat[:, k]||^2``; ties go to the
    lower index.
    """
    K = g_hat_full.shape[1]
    if not 1 <= n <= K:
        raise ValueError(f"cannot schedule n={n} of K={K} UEs")
    power = np.sum(np.abs(g_hat_full) ** 2, axis=0)
    # stable sort on -power keeps lower indices first among equals
    order = np.argsort(-power, kind="stable")
    return order[:n]


def cluster(beta: np.ndarray, schedule, threshold: float, N: int) -> np.ndarray:
    """Boolean serving mask of shape (M, n) for the scheduled UEs.

    An AP serves UE k when its LSF reaches ``threshold``; the strongest AP of
    each UE always serves it. Antennas of one AP share the decision.
    """
    cols = beta[:, np.asarray(schedule, dtype=int)]
    M, n = cols.shape
    if M % N:
        raise ValueError(f"M={M} is not a multiple of N={N}")
    # rows of one AP are identical, so the first antenna stands for the AP
    per_ap = cols[::N, :]
    active = per_ap >= threshold
    strongest = np.argmax(per_ap, axis=0)
    active[strongest, np.arange(n)] = True
    return np.repeat(active, N, axis=0)


def sparsify(g_hat: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if g_hat.shape != mask.shape:
        raise ValueError(f"shape mismatch: {g_hat.shape} vs {mask.shape}")
    return np.where(mask, g_hat, 0.0)
