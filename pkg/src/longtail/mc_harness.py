"""Replicated Monte Carlo experiments certifying the limit theorems.

An experiment fixes one process, one corollary statistic (or the
reduction-principle residual), a threshold schedule, an ascending grid of
path lengths and a replication count, then evaluates the statistic on
independent paths.  Per-replication seeds are derived from
(base_seed, n, rep) with a splitmix64-style mix, so the row set is a pure
function of the configuration — independent of worker count, scheduling
and chunking — and any single row can be recomputed in isolation.

Aggregation per grid point reports

    ks              Kolmogorov-Smirnov distance to the predicted limit law
                    (NaN when the predicted scale is zero or no law applies)
    empirical_scale median(|value|) / q_{0.75}(unit limit law), a robust
                    estimate of the statistic's own scale parameter
    lr_norm         empirical L^{r0} norm, the norm controlling the
                    reduction-principle decay rate
    count_ok        replications that evaluated without error

and a log-log least-squares fit of lr_norm against n estimates the decay
exponent.  Everything is re-derivable bit-identically from the row table.

Configuration is accepted either as dotted `key = value` text (with
`#` comments and comma-separated lists) or as JSON with the same keys,
flat or nested.  The environment variable LONGTAIL_SEED, when set,
overrides the configured base_seed (and nothing else).
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from .innovations import InnovationSpec
from .limit_theory import TheoryReport, ThresholdSchedule, make_schedule, theory_report, threshold_at
from .linear_process import MarginalLaw, ProcessSpec, marginal_law, simulate_path
from .pot_estimators import (
    COROLLARY_IDS,
    residual_from_plan,
    residual_plan,
    statistic_from_plan,
    statistic_plan,
)
from .stable_numerics import StableLaw, sas_cdf, sas_quantile

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "ReplicationRow",
    "AggregateRow",
    "ReplicationTable",
    "derive_seed",
    "run_experiment",
    "ks_distance",
    "lr_norm_estimate",
    "rate_fit",
    "parse_config_text",
    "load_config",
    "build_process_spec",
    "build_experiment_config",
    "build_simulate_config",
    "read_samples_csv",
    "parse_limit_law",
    "flatten_config",
]

EXPERIMENT_IDS = COROLLARY_IDS + ("ReductionResidual",)

ROWS_HEADER = "corollary_id,n,rep,raw,centered_scaled,u_or_k,status"
AGG_HEADER = "n,ks,empirical_scale,lr_norm,count_ok"


class ConfigError(ValueError):
    """Raised for malformed or inconsistent experiment configuration."""


# ----------------------------------------------------------------------
# deterministic seed derivation
# ----------------------------------------------------------------------

_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_MASK = (1 << 64) - 1


def derive_seed(base_seed: int, *parts: int) -> int:
    """Mix (base_seed, parts...) into one 64-bit seed, splitmix64 style.

    Each part p updates the state h by the finalizer of splitmix64:
    h = mix64((h XOR p) + 0x9E3779B97F4A7C15), where mix64 xor-shifts by
    30/27/31 with multipliers 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB,
    all modulo 2^64.  The chain is order-sensitive, so (n, rep) pairs and
    permutations of them land on distinct streams.
    """
    h = base_seed & _MASK
    for p in parts:
        h = (h ^ (int(p) & _MASK)) & _MASK
        h = (h + _GAMMA) & _MASK
        h ^= h >> 30
        h = (h * _MIX1) & _MASK
        h ^= h >> 27
        h = (h * _MIX2) & _MASK
        h ^= h >> 31
    return h


# ----------------------------------------------------------------------
# configuration
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment description.

    n_grid must be strictly ascending; replications >= 2 so that scale
    aggregates are defined.  residual_kind is only consulted when
    corollary_id == "ReductionResidual".
    """

    process: ProcessSpec
    corollary_id: str
    schedule: ThresholdSchedule
    n_grid: tuple[int, ...]
    replications: int
    base_seed: int = 0
    output_path: str | None = None
    residual_kind: str = "count"
    method: str = "fft"

    def __post_init__(self):
        if self.corollary_id not in EXPERIMENT_IDS:
            raise ConfigError(f"unknown corollary_id {self.corollary_id!r}")
        grid = tuple(int(n) for n in self.n_grid)
        if len(grid) == 0 or any(n < 2 for n in grid):
            raise ConfigError(f"n_grid must be nonempty with entries >= 2, got {grid}")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ConfigError(f"n_grid must be strictly ascending, got {grid}")
        object.__setattr__(self, "n_grid", grid)
        if self.replications < 2:
            raise ConfigError(f"replications must be >= 2, got {self.replications}")
        if self.residual_kind not in ("count", "hill"):
            raise ConfigError(f"residual_kind must be 'count' or 'hill', got {self.residual_kind!r}")
        if self.method not in ("direct", "fft"):
            raise ConfigError(f"method must be 'direct' or 'fft', got {self.method!r}")
        rand = "Rand" in self.corollary_id
        if self.corollary_id == "ReductionResidual":
            if self.schedule.kind == "RandomK":
                raise ConfigError("ReductionResidual requires a deterministic schedule")
        elif rand != (self.schedule.kind == "RandomK"):
            raise ConfigError(
                f"schedule kind {self.schedule.kind!r} does not match {self.corollary_id}"
            )


class ReplicationRow(NamedTuple):
    corollary_id: str
    n: int
    rep: int
    raw: float
    centered_scaled: float
    u_or_k: float
    status: str


class AggregateRow(NamedTuple):
    n: int
    ks: float
    empirical_scale: float
    lr_norm: float
    count_ok: int


@dataclass
class ReplicationTable:
    """Row-level results plus per-n aggregates of one experiment."""

    config: ExperimentConfig
    theory: TheoryReport
    scale_by_n: dict[int, float]
    rows: list[ReplicationRow] = field(default_factory=list)
    aggregates: list[AggregateRow] = field(default_factory=list)
    rate_slope: float = math.nan
    rate_intercept: float = math.nan

    def ok_values(self, n: int) -> np.ndarray:
        return np.array(
            [r.centered_scaled for r in self.rows if r.n == n and r.status == "ok"], dtype=float
        )

    def recompute_aggregates(self) -> list[AggregateRow]:
        """Re-derive the aggregate rows from the row table (bit-identical)."""
        return _aggregate(self.rows, self.config, self.theory, self.scale_by_n)

    def rows_csv(self) -> str:
        out = [ROWS_HEADER]
        for r in self.rows:
            out.append(
                f"{r.corollary_id},{r.n},{r.rep},{r.raw!r},{r.centered_scaled!r},{r.u_or_k!r},{r.status}"
            )
        return "\n".join(out) + "\n"

    def aggregates_csv(self) -> str:
        out = [AGG_HEADER]
        for a in self.aggregates:
            out.append(f"{a.n},{a.ks!r},{a.empirical_scale!r},{a.lr_norm!r},{a.count_ok}")
        return "\n".join(out) + "\n"

    def write(self, out_dir: str) -> tuple[str, str]:
        os.makedirs(out_dir, exist_ok=True)
        rows_path = os.path.join(out_dir, "rows.csv")
        agg_path = os.path.join(out_dir, "aggregates.csv")
        with open(rows_path, "w", newline="\n") as fh:
            fh.write(self.rows_csv())
        with open(agg_path, "w", newline="\n") as fh:
            fh.write(self.aggregates_csv())
        return rows_path, agg_path


# ----------------------------------------------------------------------
# sample-level statistics
# ----------------------------------------------------------------------

def ks_distance(samples: np.ndarray, cdf: Callable[[np.ndarray], np.ndarray]) -> float:
    """Exact Kolmogorov-Smirnov distance sup_x |F_m(x) - F(x)|.

    Evaluated at the order statistics: max over i of
    max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m).
    """
    xs = np.sort(np.asarray(samples, dtype=float))
    m = xs.size
    if m == 0:
        raise ValueError("need at least one sample")
    try:
        fv = np.asarray(cdf(xs), dtype=float)
    except (TypeError, ValueError):
        fv = np.array([float(cdf(x)) for x in xs])
    if fv.shape != xs.shape:
        fv = np.array([float(cdf(x)) for x in xs])
    i = np.arange(1, m + 1, dtype=float)
    return float(np.max(np.maximum(i / m - fv, fv - (i - 1.0) / m)))


def lr_norm_estimate(samples: np.ndarray, r: float) -> float:
    """Empirical L^r norm (mean |x|^r)^{1/r} for r >= 1."""
    if r < 1.0:
        raise ValueError(f"r must be >= 1, got {r}")
    xs = np.asarray(samples, dtype=float)
    if xs.size == 0:
        raise ValueError("need at least one sample")
    return float(np.mean(np.abs(xs) ** r) ** (1.0 / r))


def rate_fit(n_grid, values) -> tuple[float, float]:
    """Least-squares slope and intercept of log(values) against log(n_grid)."""
    ns = np.asarray(n_grid, dtype=float)
    vs = np.asarray(values, dtype=float)
    if ns.shape != vs.shape or ns.size < 2:
        raise ValueError("need matching grids with at least two points")
    if np.any(ns <= 0.0) or np.any(~np.isfinite(vs)) or np.any(vs <= 0.0):
        raise ValueError("rate fit needs positive finite values on a positive grid")
    slope, intercept = np.polyfit(np.log(ns), np.log(vs), 1)
    return float(slope), float(intercept)


# ----------------------------------------------------------------------
# experiment driver
# ----------------------------------------------------------------------

def _build_plans(config: ExperimentConfig, theory: TheoryReport,
                 marginal: MarginalLaw) -> dict[int, dict]:
    plans = {}
    for n in config.n_grid:
        if config.corollary_id == "ReductionResidual":
            u = threshold_at(config.schedule, n)
            plans[n] = residual_plan(n, theory, marginal, u, config.residual_kind)
        else:
            plans[n] = statistic_plan(config.corollary_id, n, theory, config.schedule, marginal)
    return plans


def _eval_block(args) -> list[ReplicationRow]:
    """Evaluate replications rep_lo..rep_hi-1 at one grid point (worker task)."""
    process, corollary_id, plan, base_seed, n, rep_lo, rep_hi, method = args
    rows = []
    for rep in range(rep_lo, rep_hi):
        seed = derive_seed(base_seed, n, rep)
        try:
            path = simulate_path(process, n, seed, method=method)
            if corollary_id == "ReductionResidual":
                raw, value, u_or_k = residual_from_plan(path, plan)
            else:
                raw, value, u_or_k = statistic_from_plan(corollary_id, path, plan)
            rows.append(ReplicationRow(corollary_id, n, rep, raw, value, u_or_k, "ok"))
        except Exception as exc:  # failed replication: recorded, not fatal
            rows.append(
                ReplicationRow(
                    corollary_id, n, rep, math.nan, math.nan, math.nan,
                    f"error:{type(exc).__name__}:{exc}".replace(",", ";")[:120],
                )
            )
    return rows


def _aggregate(rows: list[ReplicationRow], config: ExperimentConfig,
               theory: TheoryReport, scale_by_n: dict[int, float]) -> list[AggregateRow]:
    heavy = theory.alpha < 2.0
    if heavy:
        unit_q75 = sas_quantile(StableLaw(theory.alpha, 1.0), 0.75)
    else:
        unit_q75 = float(stats.norm.ppf(0.75))
    out = []
    for n in config.n_grid:
        vals = np.array(
            [r.centered_scaled for r in sorted(rows) if r.n == n and r.status == "ok"]
        )
        count_ok = vals.size
        if count_ok == 0:
            out.append(AggregateRow(n, math.nan, math.nan, math.nan, 0))
            continue
        emp_scale = float(np.median(np.abs(vals))) / unit_q75
        lr = lr_norm_estimate(vals, theory.r0)
        ps = scale_by_n.get(n, math.nan)
        if config.corollary_id == "ReductionResidual" or not ps > 0.0:
            ks = math.nan
        elif heavy:
            law = StableLaw(theory.alpha, theory.eta * ps)
            ks = ks_distance(vals, lambda x: sas_cdf(law, x))
        else:
            sd = math.sqrt(theory.sigma2) * ps
            ks = ks_distance(vals, lambda x: stats.norm.cdf(x, scale=sd))
        out.append(AggregateRow(n, ks, emp_scale, lr, count_ok))
    return out


def run_experiment(config: ExperimentConfig, workers: int = 1) -> ReplicationTable:
    """Run all replications of an experiment and aggregate them.

    Per-replication seeds come from derive_seed(base_seed, n, rep), so the
    resulting row table is identical for every worker count; workers > 1
    fan the (n, replication-block) tasks over a process pool.  Failed
    replications are recorded with an error status and excluded from
    aggregates.
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    theory = theory_report(
        config.process.d, innovation=config.process.innovation, c_a=config.process.ca
    )
    marginal = marginal_law(config.process)
    plans = _build_plans(config, theory, marginal)
    scale_by_n = {n: plans[n].get("scale", math.nan) for n in config.n_grid}

    tasks = []
    block = max(1, math.ceil(config.replications / max(workers, 1) / 4))
    for n in config.n_grid:
        for lo in range(0, config.replications, block):
            hi = min(lo + block, config.replications)
            tasks.append(
                (config.process, config.corollary_id, plans[n], config.base_seed,
                 n, lo, hi, config.method)
            )

    rows: list[ReplicationRow] = []
    if workers == 1:
        for t in tasks:
            rows.extend(_eval_block(t))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for chunk in pool.map(_eval_block, tasks):
                rows.extend(chunk)
    order = {n: i for i, n in enumerate(config.n_grid)}
    rows.sort(key=lambda r: (order[r.n], r.rep))

    table = ReplicationTable(config=config, theory=theory, scale_by_n=scale_by_n, rows=rows)
    table.aggregates = _aggregate(rows, config, theory, scale_by_n)
    finite = [(n, a.lr_norm) for n, a in zip(config.n_grid, table.aggregates)
              if math.isfinite(a.lr_norm) and a.lr_norm > 0.0]
    if len(finite) >= 2:
        slope, intercept = rate_fit([f[0] for f in finite], [f[1] for f in finite])
        table.rate_slope, table.rate_intercept = slope, intercept
    return table


# ----------------------------------------------------------------------
# configuration parsing
# ----------------------------------------------------------------------

def flatten_config(mapping: dict) -> dict:
    """Flatten nested dict keys with dots; already-flat mappings pass through."""
    flat: dict = {}

    def _walk(prefix: str, obj: dict) -> None:
        for k, v in obj.items():
            if isinstance(v, dict):
                _walk(prefix + str(k) + ".", v)
            else:
                flat[prefix + str(k)] = v

    _walk("", mapping)
    return flat


def _cast(token: str):
    token = token.strip()
    low = token.lower()
    if low in ("true", "false"):
        return low == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        return token


def parse_config_text(text: str) -> dict:
    """Parse dotted `key = value` lines (or a JSON object) into a flat dict.

    `#` starts a comment; commas produce lists; ints, floats and booleans
    are auto-typed.  JSON input may be nested, in which case keys are
    flattened with dots.
    """
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return flatten_config(data)
    out: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {line!r}")
        key, _, val = line.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if "," in val:
            out[key] = [_cast(t) for t in val.split(",") if t.strip()]
        else:
            out[key] = _cast(val)
    return out


def load_config(path: str) -> dict:
    """Read a config file (dotted key=value or JSON) into a flat dict."""
    try:
        with open(path) as fh:
            return parse_config_text(fh.read())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _pop(cfg: dict, key: str, default=None, required: bool = False):
    if key in cfg:
        return cfg.pop(key)
    if required:
        raise ConfigError(f"missing required config key {key!r}")
    return default


def build_process_spec(cfg: dict) -> ProcessSpec:
    """Build a ProcessSpec from dotted `process.*` keys (consumed from cfg)."""
    family = _pop(cfg, "process.innovation.family", required=True)
    nu = _pop(cfg, "process.innovation.nu")
    scale = _pop(cfg, "process.innovation.scale", 1.0)
    d = _pop(cfg, "process.d", required=True)
    ca = _pop(cfg, "process.ca", 1.0)
    J = _pop(cfg, "process.J", required=True)
    try:
        innovation = InnovationSpec(str(family), nu=nu, scale=float(scale))
        return ProcessSpec(innovation, d=float(d), ca=float(ca), J=int(J))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _base_seed_with_env(cfg_value) -> int:
    env = os.environ.get("LONGTAIL_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"LONGTAIL_SEED must be an integer, got {env!r}") from exc
    return int(cfg_value)


def build_experiment_config(cfg: dict) -> ExperimentConfig:
    """Resolve a config mapping (flat dotted or nested) into an ExperimentConfig.

    Unknown keys are rejected so that typos fail loudly.  LONGTAIL_SEED,
    when set in the environment, overrides base_seed and nothing else.
    """
    cfg = flatten_config(dict(cfg))
    corollary = _pop(cfg, "corollary", _pop(cfg, "corollary_id", required=False))
    if corollary is None:
        raise ConfigError("missing required config key 'corollary'")
    process = build_process_spec(cfg)
    kind = _pop(cfg, "schedule.kind")
    if kind is None:
        kind = ("RandomK" if "Rand" in str(corollary)
                else "LightLog" if str(corollary).startswith("Light") else "HeavyPower")
    delta = _pop(cfg, "schedule.delta")
    c = _pop(cfg, "schedule.c", 1.0)
    beta = _pop(cfg, "schedule.beta")
    n_grid = _pop(cfg, "n_grid", required=True)
    if not isinstance(n_grid, list):
        n_grid = [n_grid]
    replications = _pop(cfg, "replications", required=True)
    base_seed = _base_seed_with_env(_pop(cfg, "base_seed", 0))
    residual_kind = _pop(cfg, "residual.kind", "count")
    method = _pop(cfg, "method", "fft")
    output_path = _pop(cfg, "output_path")
    if cfg:
        raise ConfigError(f"unknown config keys: {sorted(cfg)}")
    try:
        theory = theory_report(process.d, innovation=process.innovation, c_a=process.ca)
        schedule = make_schedule(
            str(kind), theory,
            delta=None if delta is None else float(delta),
            c=float(c),
            beta=None if beta is None else float(beta),
        )
        return ExperimentConfig(
            process=process,
            corollary_id=str(corollary),
            schedule=schedule,
            n_grid=tuple(int(n) for n in n_grid),
            replications=int(replications),
            base_seed=base_seed,
            output_path=None if output_path is None else str(output_path),
            residual_kind=str(residual_kind),
            method=str(method),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def build_simulate_config(cfg: dict) -> tuple[ProcessSpec, int, int, str]:
    """Resolve a config mapping into (process, n, seed, method) for one path."""
    cfg = flatten_config(dict(cfg))
    process = build_process_spec(cfg)
    n = _pop(cfg, "n", required=True)
    seed = _pop(cfg, "seed", 0)
    method = _pop(cfg, "method", "fft")
    if cfg:
        raise ConfigError(f"unknown config keys: {sorted(cfg)}")
    if method not in ("direct", "fft"):
        raise ConfigError(f"method must be 'direct' or 'fft', got {method!r}")
    try:
        return process, int(n), int(seed), str(method)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def parse_limit_law(text: str) -> tuple[Callable[[np.ndarray], np.ndarray], str]:
    """Parse a limit-law spec `stable:ALPHA:ETA` or `normal:SIGMA2` into (cdf, label)."""
    parts = [p.strip() for p in str(text).split(":")]
    try:
        if parts[0].lower() == "stable" and len(parts) == 3:
            law = StableLaw(float(parts[1]), float(parts[2]))
            return (lambda x: sas_cdf(law, x)), f"stable(alpha={law.alpha}, eta={law.eta})"
        if parts[0].lower() == "normal" and len(parts) == 2:
            sigma2 = float(parts[1])
            if sigma2 <= 0.0:
                raise ValueError(f"sigma2 must be positive, got {sigma2}")
            sd = math.sqrt(sigma2)
            return (lambda x: stats.norm.cdf(x, scale=sd)), f"normal(sigma2={sigma2})"
    except ValueError as exc:
        raise ConfigError(f"invalid limit spec {text!r}: {exc}") from exc
    raise ConfigError(f"invalid limit spec {text!r}; use stable:ALPHA:ETA or normal:SIGMA2")


def read_samples_csv(path: str) -> np.ndarray:
    """Read a single-column CSV of samples, tolerating an `x` header row."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise ConfigError(f"cannot read samples {path}: {exc}") from exc
    if not lines:
        raise ConfigError(f"samples file {path} is empty")
    start = 0
    try:
        float(lines[0])
    except ValueError:
        start = 1
    try:
        return np.array([float(ln) for ln in lines[start:]], dtype=float)
    except ValueError as exc:
        raise ConfigError(f"samples file {path} has non-numeric entries: {exc}") from exc
