"""Oracle checks for the solver, covariance, ZF and experiment pipeline.

Each check builds its own random instances, compares the library against an
independent route (numerical minimizer, finite differences, Monte Carlo,
active-set NNLS, brute formula evaluation) and returns a :class:`CheckResult`.
The ``validate`` CLI command and the acceptance tests both call these.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from . import complexity, power
from .channel import crandn
from .clustering import sparsify
from .config import SystemConfig
from .errors import SingularChannel
from .harness import (
    ExperimentSpec,
    block_sum_rate,
    draw_block,
    run_experiment,
    snr_to_rho,
    trial_rng,
)
from .rate import error_covariance_closed


@dataclass
class CheckResult:
    name: str
    passed: bool
    metric: float
    tolerance: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"[{status}] {self.name}: metric={self.metric:.3e} "
            f"tol={self.tolerance:.1e} ({self.seconds:.2f}s)"
        )


def _random_instance(rng, n):
    a = crandn(rng, (n, n))
    x = crandn(rng, n)
    return a, x


def _numerical_minimizer(a, lam, x):
    """Minimize J over real d by trust-region LS on the stacked real residual."""
    n = a.shape[1]

    def residual(d):
        r = x - a @ d
        return np.concatenate([r.real, r.imag, np.sqrt(lam) * d])

    sol = optimize.least_squares(
        residual, np.zeros(n), method="trf", jac="3-point", xtol=1e-15, ftol=1e-15, gtol=1e-15
    )
    return sol.x


def _direct_cost(a, lam, x, d):
    r = x - a @ d
    return float(np.sum(np.abs(r) ** 2) + lam * np.sum(d**2))


def check_closed_form(instances=100, n=5, lambdas=(0.1, 1.0, 10.0), seed=1,
                      tol=1e-6, grad_tol=1e-5, h=1e-6) -> CheckResult:
    """Closed form vs numerical minimizer, analytic gradient vs central differences."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_sol, worst_grad = 0.0, 0.0
    for i in range(instances):
        a, x = _random_instance(rng, n)
        lam = lambdas[i % len(lambdas)]
        d_cf = power.solve_rls(a, lam, x)
        d_num = _numerical_minimizer(a, lam, x)
        worst_sol = max(worst_sol, np.linalg.norm(d_cf - d_num) / np.linalg.norm(d_num))

        d = rng.standard_normal(n)
        g = power.ls_gradient(a, lam, x, d)
        fd = np.array([
            (_direct_cost(a, lam, x, d + h * e) - _direct_cost(a, lam, x, d - h * e)) / (2 * h)
            for e in np.eye(n)
        ])
        worst_grad = max(worst_grad, np.linalg.norm(g - fd) / np.linalg.norm(fd))
    passed = worst_sol <= tol and worst_grad <= grad_tol
    return CheckResult(
        "closed-form optimality", passed, worst_sol, tol, time.perf_counter() - t0,
        {"max_rel_solution_error": worst_sol, "max_rel_gradient_error": worst_grad,
         "gradient_tol": grad_tol},
    )


def complex_form_solution(a, lam, x):
    """``(A^H A + A^T A* + 2 lam I)^{-1} (A^T x* + A^H x)``, evaluated in complex arithmetic."""
    n = a.shape[1]
    lhs = a.conj().T @ a + a.T @ a.conj() + 2.0 * lam * np.eye(n)
    rhs = a.T @ np.conj(x) + a.conj().T @ x
    return np.linalg.solve(lhs, rhs)


def check_real_form(instances=1000, n=5, seed=2, tol=1e-10) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst, worst_imag = 0.0, 0.0
    for _ in range(instances):
        a, x = _random_instance(rng, n)
        lam = 10.0 ** rng.uniform(-1, 1)
        ref = complex_form_solution(a, lam, x)
        d = power.solve_rls(a, lam, x)
        worst = max(worst, np.linalg.norm(ref - d) / np.linalg.norm(d))
        worst_imag = max(worst_imag, np.max(np.abs(ref.imag)) / np.linalg.norm(d))
    passed = worst <= tol
    return CheckResult("real-form equivalence", passed, worst, tol, time.perf_counter() - t0,
                       {"max_rel_imag": worst_imag})


def check_covariance(M=20, n=5, alpha=0.15, draws=100_000, rho_f=10.0, sigma_w2=1.0,
                     seed=3, diag_tol=0.02, off_se=3.0, chunk=10_000) -> CheckResult:
    """Closed-form error covariance vs the Monte Carlo mean over error draws."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    beta = 10.0 ** rng.uniform(-1, 1, size=(M, n))
    p_a = crandn(rng, (M, n)) / np.sqrt(M)
    closed = error_covariance_closed(beta, p_a, rho_f, alpha, sigma_w2)

    s1 = np.zeros((n, n), complex)
    s2 = np.zeros((n, n))
    done = 0
    std = np.sqrt(alpha * beta)
    while done < draws:
        m = min(chunk, draws - done)
        g_err = std[None] * crandn(rng, (m, M, n))
        b = np.einsum("dmk,mj->dkj", g_err, p_a)  # G_err^T P_a per draw
        sample = rho_f * np.einsum("dkj,dlj->dkl", b, b.conj()) + sigma_w2 * np.eye(n)
        s1 += sample.sum(axis=0)
        s2 += (np.abs(sample) ** 2).sum(axis=0)
        done += m
    mean = s1 / draws
    var = np.maximum(s2 / draws - np.abs(mean) ** 2, 0.0)
    se = np.sqrt(var / draws)

    dc, dm = np.real(np.diag(closed)), np.real(np.diag(mean))
    diag_err = float(np.max(np.abs(dm - dc) / dc))
    off = ~np.eye(n, dtype=bool)
    off_ratio = float(np.max(np.abs(mean[off]) / se[off]))
    passed = diag_err <= diag_tol and off_ratio <= off_se and np.allclose(closed[off], 0)
    return CheckResult("covariance oracle", passed, diag_err, diag_tol, time.perf_counter() - t0,
                       {"max_offdiag_over_se": off_ratio, "offdiag_se_bound": off_se})


def _random_config(rng) -> SystemConfig:
    L = int(rng.integers(3, 12))
    N = int(rng.integers(1, 5))
    M = L * N
    n = int(rng.integers(1, max(M // 3, 1) + 1))
    K = int(rng.integers(M, 3 * M + 1))
    return SystemConfig(
        L=L, N=N, K=K, n=n,
        area_side=float(rng.uniform(100, 1000)),
        alpha=float(rng.uniform(0.01, 0.5)),
        p_max=float(10.0 ** rng.uniform(-1, 1)),
        rho_f=float(10.0 ** rng.uniform(0, 2)),
        lsf_gain_db=float(rng.uniform(0, 120)),
        seed=int(rng.integers(0, 2**31)),
    )


def check_feasibility(runs=1000, seed=4, slack=1e-9) -> CheckResult:
    """RLSPA outputs satisfy d >= 0 and ||W diag(d)||_F^2 <= p_max on random pipelines."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(seed)
    worst_excess, worst_neg, failures, skipped = -np.inf, 0.0, 0, 0
    done = 0
    while done < runs:
        cfg = _random_config(rng)
        try:
            block = draw_block(cfg, trial_rng(cfg.seed, done))
        except SingularChannel:
            skipped += 1
            continue
        done += 1
        x = power.draw_symbols(cfg.n, rng)
        # exercise weak and absent regularization too
        scale = (1.0, float(rng.uniform()), 0.0)[done % 3]
        d = power.rlspa(block.channels.g_hat, block.precoder, x, cfg,
                        kappa2=block.kappa2, lambda_scale=scale).d
        excess = power.total_power(d, block.precoder) - cfg.p_max
        neg = float(np.max(-d, initial=0.0))
        worst_excess = max(worst_excess, excess)
        worst_neg = max(worst_neg, neg)
        failures += int(excess > slack or neg > 0)
    return CheckResult("feasibility", failures == 0, worst_excess, slack, time.perf_counter() - t0,
                       {"failures": failures, "max_negative": worst_neg, "skipped_singular": skipped})


def check_rate_ordering(trials=200, snr_grid_db=(0.0, 5.0, 10.0, 15.0, 20.0),
                        symbols_per_trial=8, base=None, seed=0, rtol=1e-9) -> CheckResult:
    """Mean sum-rate ordering RLSPA >= RGDPA-style >= GDPA-style and monotone SNR curves.

    ``rtol`` absorbs floating-point rounding only: ``a >= b`` is accepted
    when ``a >= b - rtol * |b|``.
    """
    t0 = time.perf_counter()
    base = (base or SystemConfig()).replace(seed=seed)
    methods = ("rlspa", "rgdpa_style", "gdpa_style")
    spec = ExperimentSpec(base=base, snr_grid_db=tuple(snr_grid_db), methods=methods,
                          trials=trials, symbols_per_trial=symbols_per_trial)
    table = run_experiment(spec)

    def geq(u, v):
        return u >= v - rtol * abs(v)

    curves = {m: [table.lookup(m, s).mean_sr for s in snr_grid_db] for m in methods}
    order_ok = all(
        geq(curves["rlspa"][i], curves["rgdpa_style"][i])
        and geq(curves["rgdpa_style"][i], curves["gdpa_style"][i])
        for i in range(len(snr_grid_db))
    )
    mono_ok = all(geq(c[i + 1], c[i]) for c in curves.values() for i in range(len(c) - 1))
    margin = min(
        min(curves["rlspa"][i] - curves["rgdpa_style"][i],
            curves["rgdpa_style"][i] - curves["gdpa_style"][i])
        for i in range(len(snr_grid_db))
    )
    return CheckResult("rate ordering", order_ok and mono_ok and not table.errors, margin, rtol,
                       time.perf_counter() - t0,
                       {"curves": curves, "snr_grid_db": list(snr_grid_db),
                        "ordering": order_ok, "monotone": mono_ok, "failed_trials": len(table.errors)})


def check_flop_models(L_values=(10, 15, 20, 25, 30, 40, 50), n=25, N=4, n_sym=175, iters=30) -> CheckResult:
    """FLOP models against direct formula evaluation, and RLSPA largest at L = 25."""
    t0 = time.perf_counter()
    worst = 0.0
    largest_ok = True
    for L in L_values:
        M = N * L
        got = (complexity.flops_rlspa(M, n, n_sym), complexity.flops_rgdpa(M, n, iters),
               complexity.flops_gdpa(M, n, iters))
        want = (n_sym * (n**3 + M * n**2), 4 * iters * M * n**2, 3 * iters * M * n**2)
        worst = max(worst, max(abs(g - w) for g, w in zip(got, want)))
        if L == 25:
            largest_ok = got == (13_671_875, 7_500_000, 5_625_000) and got[0] > got[1] > got[2]
    return CheckResult("flop models", worst == 0 and largest_ok, float(worst), 0.0,
                       time.perf_counter() - t0)


def check_nnls_closeness(instances=200, n=10, snr_db=10.0, seed=5, rel_tol=0.03,
                         kkt_tol=1e-8, base=None) -> CheckResult:
    """Sum-rate with clip-projected RLSPA vs with the KKT-consistent NNLS solution.

    Both vectors go through the same total-power rescale before the rate is
    evaluated.
    """
    t0 = time.perf_counter()
    cfg = (base or SystemConfig()).replace(n=n)
    cfg = cfg.replace(rho_f=snr_to_rho(snr_db, cfg.sigma_w2))
    rng = np.random.default_rng(seed)
    sr_alg, sr_nnls, worst_kkt = [], [], 0.0
    for i in range(instances):
        block = draw_block(cfg, trial_rng(seed, i))
        x = power.draw_symbols(n, rng)
        g_hat, w = block.channels.g_hat, block.precoder
        a = power.build_A(g_hat, w, x, cfg.rho_f)
        lam = power.reg_param(w, x, cfg.rho_f, block.kappa2)
        d_alg = power.rlspa(g_hat, w, x, cfg, kappa2=block.kappa2).d
        d_kkt = power.nnls_oracle(a, lam, x).d
        worst_kkt = max(worst_kkt, power.kkt_residual(a, lam, x, d_kkt))
        d_kkt = power.project_total_power(d_kkt, w, cfg.p_max)
        sr_alg.append(block_sum_rate(block, d_alg, cfg))
        sr_nnls.append(block_sum_rate(block, d_kkt, cfg))
    m_alg, m_nnls = float(np.mean(sr_alg)), float(np.mean(sr_nnls))
    rel = abs(m_alg - m_nnls) / m_nnls
    return CheckResult("nnls closeness", rel <= rel_tol and worst_kkt <= kkt_tol, rel, rel_tol,
                       time.perf_counter() - t0,
                       {"mean_sr_projected": m_alg, "mean_sr_nnls": m_nnls, "max_kkt": worst_kkt,
                        "kkt_tol": kkt_tol})


def check_zf(draws=100, seed=6, tol=1e-8, base=None) -> CheckResult:
    """``G_a_hat^T raw = I`` on pipeline draws at M = 100, n = 25."""
    t0 = time.perf_counter()
    cfg = base or SystemConfig()
    worst = 0.0
    for i in range(draws):
        block = draw_block(cfg, trial_rng(seed, i))
        g_a = sparsify(block.channels.g_hat, block.mask)
        worst = max(worst, float(np.max(np.abs(g_a.T @ block.precoder.raw - np.eye(cfg.n)))))
    return CheckResult("zf correctness", worst <= tol, worst, tol, time.perf_counter() - t0)


def run_all(ordering_trials=200) -> list[CheckResult]:
    """Every oracle suite at its acceptance size (ordering trials configurable)."""
    return [
        check_closed_form(),
        check_real_form(),
        check_covariance(),
        check_feasibility(),
        check_rate_ordering(trials=ordering_trials),
        check_flop_models(),
        check_nnls_closeness(),
        check_zf(),
    ]
