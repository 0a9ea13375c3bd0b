"""Per-symbol power allocation: regularized LS (RLSPA) and baselines.

All allocators solve for a real amplitude vector ``d`` composing
``P_a = W diag(d)``. The LS cost is

    J(d) = ||x - A d||^2 + lam ||d||^2,   A = sqrt(rho_f) G_hat^T W diag(x),

whose real minimizer is ``(Re{A^T A*} + lam I)^{-1} Re{A^T x*}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import optimize

from .config import SystemConfig
from .errors import ConfigError, Divergence, NonConvergence, SingularSystem
from .precoding import Precoder

SINGULAR_COND = 1e13
DIVERGENCE_PATIENCE = 5
RISE_RTOL = 1e-9


@dataclass(frozen=True)
class PowerVector:
    d: np.ndarray
    feasible: bool = False
    method: str = ""


def _directions(w) -> np.ndarray:
    return w.w if isinstance(w, Precoder) else np.asarray(w)


def draw_symbols(n: int, rng: np.random.Generator, constellation: str = "gaussian") -> np.ndarray:
    """Unit-average-power symbol vector."""
    if constellation == "gaussian":
        return (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / np.sqrt(2.0)
    if constellation == "qpsk":
        bits = rng.integers(0, 2, size=(2, n))
        return ((2 * bits[0] - 1) + 1j * (2 * bits[1] - 1)) / np.sqrt(2.0)
    raise ValueError(f"unknown constellation {constellation!r}")


def build_A(g_hat: np.ndarray, w, x: np.ndarray, rho_f: float) -> np.ndarray:
    """Effective LS matrix ``sqrt(rho_f) G_hat^T W diag(x)`` (n x n)."""
    W = _directions(w)
    return np.sqrt(rho_f) * (g_hat.T @ W) * np.asarray(x)[None, :]


def reg_param(w, x: np.ndarray, rho_f: float, kappa2: float) -> float:
    """Tikhonov weight ``rho_f * kappa2 * ||W diag(x)||_F^2``."""
    W = _directions(w)
    return float(rho_f * kappa2 * np.sum(np.abs(W * np.asarray(x)[None, :]) ** 2))


def real_normal_equations(a: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(Re{A^T A*}, Re{A^T x*})``, the real Gram matrix and right-hand side."""
    return np.real(a.T @ a.conj()), np.real(a.T @ np.conj(x))


def ls_cost(a: np.ndarray, lam: float, x: np.ndarray, d: np.ndarray) -> float:
    r = x - a @ d
    return float(np.real(np.vdot(r, r)) + lam * np.dot(d, d))


def ls_gradient(a: np.ndarray, lam: float, x: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Gradient of :func:`ls_cost` with respect to real ``d``."""
    H, b = real_normal_equations(a, x)
    return 2.0 * (H @ d - b) + 2.0 * lam * d


def solve_rls(a: np.ndarray, lam: float, x: np.ndarray) -> np.ndarray:
    """Closed-form real minimizer of the regularized LS cost (before projection)."""
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    H, b = real_normal_equations(a, x)
    n = H.shape[0]
    system = H + lam * np.eye(n)
    if lam == 0 and np.linalg.cond(H) > SINGULAR_COND:
        raise SingularSystem("real Gram matrix is singular and lambda is zero")
    try:
        return np.linalg.solve(system, b)
    except np.linalg.LinAlgError as exc:
        raise SingularSystem(str(exc)) from exc


def total_power(d: np.ndarray, w) -> float:
    """``||W diag(d)||_F^2``."""
    W = _directions(w)
    return float(np.sum(np.abs(W * np.asarray(d)[None, :]) ** 2))


def project_total_power(d: np.ndarray, w, p_max: float, tight: bool = False) -> np.ndarray:
    """Rescale ``d`` when the total power exceeds ``p_max``.

    The default rule multiplies by ``p_max / ||W diag(d)||_F^2``, which lands
    strictly inside the power ball. ``tight=True`` uses the square root of that
    ratio and lands on the boundary instead.
    """
    d = np.asarray(d, dtype=float)
    p = total_power(d, w)
    if p <= p_max:
        return d.copy()
    ratio = p_max / p
    return d * (np.sqrt(ratio) if tight else ratio)


def project_nonneg(d: np.ndarray) -> np.ndarray:
    return np.maximum(np.asarray(d, dtype=float), 0.0)


def project_feasible(d: np.ndarray, w, p_max: float, tight: bool = False) -> np.ndarray:
    """Power rescale followed by zeroing of negative entries."""
    return project_nonneg(project_total_power(d, w, p_max, tight))


def rlspa(
    g_hat: np.ndarray,
    w,
    x: np.ndarray,
    config: SystemConfig,
    kappa2: Optional[float] = None,
    lambda_scale: float = 1.0,
) -> PowerVector:
    """Robust LS power allocation for one symbol vector.

    ``kappa2`` overrides ``config.kappa2``; one of them must be set.
    ``lambda_scale`` multiplies the analytic regularization weight.
    """
    if kappa2 is None:
        kappa2 = config.kappa2
    if kappa2 is None:
        raise ConfigError("kappa2 is unresolved; pass it explicitly or set it in the config")
    a = build_A(g_hat, w, x, config.rho_f)
    lam = lambda_scale * reg_param(w, x, config.rho_f, kappa2)
    d = solve_rls(a, lam, x)
    d = project_feasible(d, w, config.p_max, config.tight_power_projection)
    return PowerVector(d, feasible=True, method="rlspa")


def epa(n: int, p_max: float) -> PowerVector:
    """Equal power: every stream gets ``p_max / n``."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return PowerVector(np.full(n, np.sqrt(p_max / n)), feasible=True, method="epa")


def largest_eigenvalue(H: np.ndarray, iters: int = 50, seed: int = 0) -> float:
    """Power-iteration estimate of the top eigenvalue of a symmetric PSD matrix."""
    v = np.random.default_rng(seed).standard_normal(H.shape[0])
    v /= np.linalg.norm(v)
    est = 0.0
    for _ in range(iters):
        hv = H @ v
        nrm = np.linalg.norm(hv)
        if nrm == 0.0:
            return 0.0
        est = float(v @ hv)
        v = hv / nrm
    return max(est, float(v @ (H @ v)))


def gd_descend(
    a: np.ndarray,
    lam: float,
    x: np.ndarray,
    iters: int,
    step: Optional[float] = None,
    d0: Optional[np.ndarray] = None,
) -> np.ndarray:
    """Plain gradient descent on the LS cost; returns the unprojected iterate.

    The default step is ``1 / (2 (lambda_max + lam))`` with ``lambda_max``
    estimated by power iteration on ``Re{A^T A*}``.
    """
    if iters < 1:
        raise ValueError("iters must be at least 1")
    H, b = real_normal_equations(a, x)
    n = H.shape[0]
    if step is None:
        step = 1.0 / (2.0 * (largest_eigenvalue(H) + lam))
    if not step > 0:
        raise ValueError("step must be positive")
    d = np.full(n, 1.0 / np.sqrt(n)) if d0 is None else np.array(d0, dtype=float)

    xx = float(np.real(np.vdot(x, x)))

    def cost(v):
        return float(xx + v @ H @ v - 2.0 * b @ v + lam * v @ v)

    prev = cost(d)
    rising = 0
    for _ in range(iters):
        d = d - step * (2.0 * (H @ d - b) + 2.0 * lam * d)
        cur = cost(d)
        # rounding jitter at convergence is not divergence
        rising = rising + 1 if cur > prev + RISE_RTOL * abs(prev) else 0
        if rising >= DIVERGENCE_PATIENCE:
            raise Divergence(f"cost increased {rising} times in a row (step={step:.3g})")
        prev = cur
    return d


def gd_solve(
    a: np.ndarray,
    lam: float,
    x: np.ndarray,
    w,
    p_max: float,
    iters: int = 30,
    step: Optional[float] = None,
    tight: bool = False,
) -> PowerVector:
    """Gradient-descent baseline followed by the same projections as RLSPA.

    ``lam > 0`` gives the robust (RGDPA-style) variant, ``lam == 0`` the
    non-robust (GDPA-style) one. Iterations start from equal power.
    """
    d0 = epa(a.shape[1], p_max).d
    d = gd_descend(a, lam, x, iters, step=step, d0=d0)
    label = "rgdpa_style" if lam > 0 else "gdpa_style"
    return PowerVector(project_feasible(d, w, p_max, tight), feasible=True, method=label)


def nnls_oracle(a: np.ndarray, lam: float, x: np.ndarray, maxiter: Optional[int] = None) -> PowerVector:
    """Non-negative minimizer of the regularized LS cost (KKT point).

    The complex system is lifted to real rows and the ridge term is stacked
    as ``sqrt(lam) I``; Lawson-Hanson active-set NNLS does the rest. No power
    cap is applied.
    """
    if lam < 0:
        raise ValueError("lambda must be non-negative")
    n = a.shape[1]
    a_t = np.vstack([a.real, a.imag, np.sqrt(lam) * np.eye(n)])
    x_t = np.concatenate([np.real(x), np.imag(x), np.zeros(n)])
    budget = 50 * n if maxiter is None else maxiter
    try:
        d, _ = optimize.nnls(a_t, x_t, maxiter=budget)
    except RuntimeError as exc:
        raise NonConvergence(f"NNLS did not converge in {budget} iterations") from exc
    return PowerVector(d, feasible=False, method="nnls")


def kkt_residual(a: np.ndarray, lam: float, x: np.ndarray, d: np.ndarray) -> float:
    """Largest KKT violation of ``d`` for the non-negative LS problem.

    Combines stationarity on the free set, dual feasibility (gradient >= 0)
    on the active set and primal feasibility. Gradient terms are measured
    relative to ``||grad J(0)||_inf`` so the figure does not depend on the
    channel scale.
    """
    g = ls_gradient(a, lam, x, d)
    scale = np.max(np.abs(ls_gradient(a, lam, x, np.zeros_like(d))))
    if scale == 0.0:
        scale = 1.0
    free = d > 0
    stat = np.max(np.abs(g[free]), initial=0.0) / scale
    dual = np.max(-g[~free], initial=0.0) / scale
    primal = np.max(-d, initial=0.0)
    return float(max(stat, dual, primal))
