"""Zero-forcing precoding on the sparsified channel estimate."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import SingularChannel

MAX_GRAM_COND = 1e12


@dataclass(frozen=True)
class Precoder:
    w: np.ndarray  # (M, n) unit-norm columns
    raw: np.ndarray  # (M, n) unnormalized ZF solution

    @property
    def n(self) -> int:
        return self.w.shape[1]


def zf(g_a_hat: np.ndarray) -> Precoder:
    """ZF precoder satisfying ``g_a_hat.T @ raw == I``.

    ``raw = conj(G) (G^T conj(G))^{-1}``; the normalized directions ``w`` scale
    every column of ``raw`` to unit Euclidean norm.

    Raises
    ------
    SingularChannel
        If the condition number of the Gram matrix exceeds ``MAX_GRAM_COND``.
    """
    M, n = g_a_hat.shape
    if n > M:
        raise SingularChannel(f"cannot zero-force {n} streams with {M} antennas")
    gram = g_a_hat.T @ g_a_hat.conj()
    gram = 0.5 * (gram + gram.conj().T)
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond > MAX_GRAM_COND:
        raise SingularChannel(f"Gram matrix condition number {cond:.3g}")
    # gram is Hermitian, so conj(G) gram^{-1} = (gram^{-1} G^T)^H
    factor = linalg.cho_factor(gram)
    raw = linalg.cho_solve(factor, g_a_hat.T).conj().T
    norms = np.linalg.norm(raw, axis=0)
    return Precoder(raw / norms, raw)


def compose(precoder: Precoder, d: np.ndarray) -> np.ndarray:
    """Precoding matrix ``P_a = W diag(d)``."""
    d = np.asarray(d, dtype=float)
    if d.shape != (precoder.n,):
        raise ValueError(f"d must have shape ({precoder.n},), got {d.shape}")
    return precoder.w * d[None, :]
