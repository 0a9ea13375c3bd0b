"""Leading-order FLOP models of the compared allocators."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class FlopModel:
    method: str
    flops: float
    params: tuple


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if value < 1:
            raise ValueError(f"{name} must be positive, got {value}")


def flops_rlspa(m_total: int, n: int, n_sym: int, detailed: bool = False) -> float:
    """``n_sym (n^3 + M n^2)``; ``detailed`` adds the lambda (Mn) and projection (Mn + n) terms."""
    _check_positive(m_total=m_total, n=n, n_sym=n_sym)
    per_symbol = n**3 + m_total * n**2
    if detailed:
        per_symbol += 2 * m_total * n + n
    return float(n_sym * per_symbol)


def flops_rgdpa(m_total: int, n: int, iters: int) -> float:
    _check_positive(m_total=m_total, n=n, iters=iters)
    return float(4 * iters * m_total * n**2)


def flops_gdpa(m_total: int, n: int, iters: int) -> float:
    _check_positive(m_total=m_total, n=n, iters=iters)
    return float(3 * iters * m_total * n**2)


def complexity_table(
    L_values, N: int = 4, n: int = 25, n_sym: int = 175, iters: int = 30, detailed: bool = False
) -> list[FlopModel]:
    """FLOP counts per method for each AP count, with ``M = N * L``."""
    rows = []
    for L in L_values:
        M = N * L
        rows.append(FlopModel("rlspa", flops_rlspa(M, n, n_sym, detailed), (M, n, n_sym)))
        rows.append(FlopModel("rgdpa_style", flops_rgdpa(M, n, iters), (M, n, iters)))
        rows.append(FlopModel("gdpa_style", flops_gdpa(M, n, iters), (M, n, iters)))
    return rows
