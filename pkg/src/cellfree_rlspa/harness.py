"""Seeded Monte Carlo experiments over SNR, allocator and network size.

Every trial owns one generator seeded from ``(master_seed, trial_index)``.
Draws happen in a fixed order (positions, shadowing, small-scale fading,
estimation error, symbols), so all allocators and SNR points of a trial see
the same network, schedule and symbols.
"""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import power
from .channel import ChannelSet, draw_channel, lsf, place_nodes
from .clustering import cluster, lsf_threshold, schedule_greedy, sparsify
from .complexity import complexity_table
from .config import SystemConfig, resolve_kappas
from .errors import ConfigError, SingularChannel
from .precoding import Precoder, compose, zf
from .rate import SumRateSample, error_covariance_closed, sum_rate

log = logging.getLogger(__name__)

METHODS = ("rlspa", "rgdpa_style", "gdpa_style", "epa")
CSV_HEADER = ("method", "snr_db", "mean_sr", "std_sr", "trials", "seed")
MAX_RETRIES = 10
OUTPUT_DIR_ENV = "CELLFREE_RLSPA_OUTDIR"


@dataclass(frozen=True)
class Block:
    """One scheduled coherence block: channels, clusters and ZF precoder."""

    channels: ChannelSet
    schedule: np.ndarray
    mask: np.ndarray
    precoder: Precoder
    kappa1: float
    kappa2: float


@dataclass(frozen=True)
class ExperimentSpec:
    base: SystemConfig = field(default_factory=SystemConfig)
    snr_grid_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    methods: tuple = ("rlspa", "rgdpa_style", "gdpa_style")
    trials: int = 200
    symbols_per_trial: int = 8
    lambda_sweep: tuple = ()
    output_path: str = "results.csv"
    threads: int = 1

    def __post_init__(self):
        if self.trials < 1:
            raise ConfigError("trials must be at least 1")
        if self.symbols_per_trial < 1:
            raise ConfigError("symbols_per_trial must be at least 1")
        if not self.snr_grid_db:
            raise ConfigError("snr_grid_db must not be empty")
        if not self.methods:
            raise ConfigError("methods must not be empty")
        unknown = set(self.methods) - set(METHODS)
        if unknown:
            raise ConfigError(f"unknown methods: {sorted(unknown)}")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["base"] = self.base.to_dict()
        return out


@dataclass
class ResultRow:
    method: str
    snr_db: float
    mean_sr: float
    std_sr: float
    trials: int
    seed: int


@dataclass
class ResultTable:
    rows: list
    complexity: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    def lookup(self, method: str, snr_db: float) -> ResultRow:
        for row in self.rows:
            if row.method == method and row.snr_db == snr_db:
                return row
        raise KeyError((method, snr_db))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based per-trial generator; independent of execution order."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, trial])))


def snr_to_rho(snr_db: float, sigma_w2: float) -> float:
    return sigma_w2 * 10.0 ** (snr_db / 10.0)


def draw_block(config: SystemConfig, rng: np.random.Generator) -> Block:
    """Place nodes, schedule, cluster and precode one block.

    Redraws (from the same generator) when the ZF Gram matrix is singular,
    at most ``MAX_RETRIES`` times.
    """
    last = None
    for _ in range(MAX_RETRIES):
        topo = place_nodes(config, rng)
        beta = lsf(topo, config, rng)
        full = draw_channel(beta, config.alpha, rng)
        selected = schedule_greedy(full.g_hat, config.n)
        chans = full.select(selected)
        mask = cluster(beta, selected, lsf_threshold(beta), config.N)
        try:
            precoder = zf(sparsify(chans.g_hat, mask))
        except SingularChannel as exc:
            last = exc
            log.debug("singular ZF draw, redrawing: %s", exc)
            continue
        k1, k2 = resolve_kappas(config, chans.beta_sched)
        return Block(chans, selected, mask, precoder, k1, k2)
    raise SingularChannel(f"no usable channel after {MAX_RETRIES} draws: {last}")


def allocate(
    method: str,
    block: Block,
    x: np.ndarray,
    config: SystemConfig,
    lambda_scale: float = 1.0,
) -> np.ndarray:
    """Power vector ``d`` chosen by ``method`` for symbol vector ``x``."""
    g_hat, w = block.channels.g_hat, block.precoder
    if method == "epa":
        return power.epa(config.n, config.p_max).d
    if method == "rlspa":
        return power.rlspa(g_hat, w, x, config, kappa2=block.kappa2, lambda_scale=lambda_scale).d
    if method in ("rgdpa_style", "gdpa_style"):
        a = power.build_A(g_hat, w, x, config.rho_f)
        lam = 0.0
        if method == "rgdpa_style":
            lam = lambda_scale * power.reg_param(w, x, config.rho_f, block.kappa2)
        return power.gd_solve(
            a, lam, x, w, config.p_max, iters=config.gd_iters, tight=config.tight_power_projection
        ).d
    raise ConfigError(f"unknown method {method!r}")


def block_sum_rate(block: Block, d: np.ndarray, config: SystemConfig) -> float:
    p_a = compose(block.precoder, d)
    r = error_covariance_closed(
        block.channels.beta_sched, p_a, config.rho_f, config.alpha, config.sigma_w2
    )
    return sum_rate(block.channels.g_hat, p_a, r, config.rho_f)


def _draw_symbol_block(config: SystemConfig, rng, count: int) -> list:
    return [power.draw_symbols(config.n, rng, config.constellation) for _ in range(count)]


def _evaluate(block, symbols, config, snr_db, method, trial, lambda_scale) -> SumRateSample:
    cfg = config.replace(rho_f=snr_to_rho(snr_db, config.sigma_w2))
    rates = tuple(
        block_sum_rate(block, allocate(method, block, x, cfg, lambda_scale), cfg)
        for x in symbols
    )
    return SumRateSample(float(np.mean(rates)), snr_db, method, trial, rates)


def run_trial(
    config: SystemConfig,
    snr_db: float,
    method: str,
    rng: np.random.Generator,
    symbols_per_trial: int = 8,
    trial: int = 0,
    lambda_scale: float = 1.0,
) -> SumRateSample:
    """Sum-rate of one allocator on one freshly drawn block, averaged over symbols."""
    block = draw_block(config, rng)
    symbols = _draw_symbol_block(config, rng, symbols_per_trial)
    return _evaluate(block, symbols, config, snr_db, method, trial, lambda_scale)


def _trial_grid(spec: ExperimentSpec, trial: int, lambda_scales: Sequence[float]):
    """All (scale, method, snr) samples of one trial, sharing one block draw."""
    rng = trial_rng(spec.base.seed, trial)
    try:
        block = draw_block(spec.base, rng)
    except SingularChannel as exc:
        return trial, None, str(exc)
    symbols = _draw_symbol_block(spec.base, rng, spec.symbols_per_trial)
    out = {}
    for scale in lambda_scales:
        for method in spec.methods:
            for snr in spec.snr_grid_db:
                sample = _evaluate(block, symbols, spec.base, snr, method, trial, scale)
                out[(scale, method, snr)] = sample.sr_bits
    return trial, out, None


def _run_grid(spec: ExperimentSpec, lambda_scales: Sequence[float]):
    def work(t):
        return _trial_grid(spec, t, lambda_scales)

    if spec.threads == 1:
        results = [work(t) for t in range(spec.trials)]
    else:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            results = list(pool.map(work, range(spec.trials)))
    # pool.map preserves submission order, so reduction follows trial index
    good = [r for r in results if r[1] is not None]
    errors = [{"trial": t, "error": msg} for t, _, msg in results if msg is not None]
    for err in errors:
        log.warning("trial %(trial)d failed: %(error)s", err)
    return good, errors


def _aggregate(values, label, snr, spec) -> ResultRow:
    arr = np.asarray(values, dtype=float)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return ResultRow(label, float(snr), float(arr.mean()), std, int(arr.size), spec.base.seed)


def run_experiment(spec: ExperimentSpec) -> ResultTable:
    """Average every (method, SNR) pair over ``spec.trials`` seeded trials."""
    good, errors = _run_grid(spec, (1.0,))
    if not good:
        raise SingularChannel(f"all {spec.trials} trials failed")
    rows = []
    for method in spec.methods:
        for snr in spec.snr_grid_db:
            vals = [res[(1.0, method, snr)] for _, res, _ in good]
            rows.append(_aggregate(vals, method, snr, spec))
    return ResultTable(rows, errors=errors)


def sweep_label(scale: float) -> str:
    return f"rlspa@lambda*{scale:g}"


def lambda_sweep(spec: ExperimentSpec) -> ResultTable:
    """RLSPA mean sum-rate with the regularization weight scaled by each multiplier."""
    if not spec.lambda_sweep:
        raise ConfigError("lambda_sweep must list at least one multiplier")
    if any(s < 0 for s in spec.lambda_sweep):
        raise ConfigError("lambda multipliers must be non-negative")
    sweep_spec = dataclasses.replace(spec, methods=("rlspa",))
    good, errors = _run_grid(sweep_spec, tuple(spec.lambda_sweep))
    if not good:
        raise SingularChannel(f"all {spec.trials} trials failed")
    rows = []
    for scale in spec.lambda_sweep:
        for snr in spec.snr_grid_db:
            vals = [res[(scale, "rlspa", snr)] for _, res, _ in good]
            rows.append(_aggregate(vals, sweep_label(scale), snr, spec))
    return ResultTable(rows, errors=errors)


# --- I/O -------------------------------------------------------------------


def _fmt(value: float) -> str:
    return repr(float(value))


def emit(table: ResultTable, path, spec: Optional[ExperimentSpec] = None) -> Path:
    """Write the CSV table and a JSON sidecar (``<path>.json``).

    Floats are written with ``repr`` so that :func:`read_table` restores them
    exactly.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in table.rows:
                writer.writerow(
                    [r.method, _fmt(r.snr_db), _fmt(r.mean_sr), _fmt(r.std_sr), r.trials, r.seed]
                )
        sidecar = {
            "spec": spec.to_dict() if spec is not None else None,
            "errors": table.errors,
            "complexity": [dataclasses.asdict(m) for m in table.complexity],
        }
        with open(sidecar_path(path), "w") as fh:
            json.dump(sidecar, fh, indent=2, sort_keys=True)
            fh.write("\n")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc
    return path


def sidecar_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.name + ".json")


def read_table(path) -> ResultTable:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_HEADER:
            raise ValueError(f"unexpected header {header}")
        rows = [
            ResultRow(m, float(s), float(mu), float(sd), int(t), int(seed))
            for m, s, mu, sd, t, seed in reader
        ]
    return ResultTable(rows)


def emit_complexity(rows, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("method", "M", "flops"))
        for m in rows:
            writer.writerow([m.method, m.params[0], _fmt(m.flops)])
    return path


# --- config files ------------------------------------------------------------

_SYSTEM_FIELDS = {f.name: f for f in dataclasses.fields(SystemConfig)}


def _coerce(name: str, raw: str, current):
    raw = raw.strip()
    if name in ("kappa1", "kappa2"):
        return None if raw.lower() in ("", "auto", "none") else float(raw)
    if isinstance(current, bool):
        if raw.lower() in ("1", "true", "yes", "on"):
            return True
        if raw.lower() in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{name}: expected a boolean, got {raw!r}")
    if isinstance(current, int):
        return int(raw)
    if isinstance(current, float):
        return float(raw)
    return raw


def _floats(raw: str) -> tuple:
    return tuple(float(v) for v in raw.replace(",", " ").split())


def load_spec(path) -> ExperimentSpec:
    """Read an ``ExperimentSpec`` from an INI-style file.

    Sections ``[system]`` (any :class:`SystemConfig` field) and
    ``[experiment]`` (``snr_grid_db``, ``methods``, ``trials``,
    ``symbols_per_trial``, ``lambda_sweep``, ``output_path``, ``threads``).
    """
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # N and n are different fields
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except (OSError, configparser.Error) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    defaults = SystemConfig()
    system = {}
    if parser.has_section("system"):
        for key, raw in parser.items("system"):
            if key not in _SYSTEM_FIELDS:
                raise ConfigError(f"unknown [system] key {key!r}")
            try:
                system[key] = _coerce(key, raw, getattr(defaults, key))
            except ValueError as exc:
                raise ConfigError(f"[system] {key}: {exc}") from exc
    base = SystemConfig(**system)
    exp = {}
    if parser.has_section("experiment"):
        sec = parser["experiment"]
        try:
            for key, raw in sec.items():
                if key == "snr_grid_db":
                    exp[key] = _floats(raw)
                elif key == "lambda_sweep":
                    exp[key] = _floats(raw)
                elif key == "methods":
                    exp[key] = tuple(m for m in raw.replace(",", " ").split())
                elif key in ("trials", "symbols_per_trial", "threads"):
                    exp[key] = int(raw)
                elif key == "output_path":
                    exp[key] = raw.strip()
                else:
                    raise ConfigError(f"unknown [experiment] key {key!r}")
        except ValueError as exc:
            raise ConfigError(f"[experiment]: {exc}") from exc
    return ExperimentSpec(base=base, **exp)


def resolve_output(path: str) -> Path:
    """Relative output paths land under ``$CELLFREE_RLSPA_OUTDIR`` when it is set."""
    p = Path(path)
    outdir = os.environ.get(OUTPUT_DIR_ENV)
    if outdir and not p.is_absolute():
        return Path(outdir) / p
    return p


def default_complexity(L_values=(10, 15, 20, 25, 30, 40, 50), base: Optional[SystemConfig] = None):
    base = base or SystemConfig()
    return complexity_table(L_values, N=base.N, n=base.n, n_sym=base.n_sym, iters=base.gd_iters)


def is_finite_table(table: ResultTable) -> bool:
    return all(math.isfinite(r.mean_sr) and math.isfinite(r.std_sr) for r in table.rows)
