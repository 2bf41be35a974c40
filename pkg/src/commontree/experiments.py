"""Monte Carlo harness: scaling sweeps, exponent fits, chain comparisons.

Every replicate draws from a counter-style substream keyed by
``(master_seed, n, replicate)``, so results are reproducible and
independent of execution order: the same config and master seed produce
byte-identical report files whether replicates run sequentially or in a
worker pool.  Reports are written as CSV (with ``#`` comment lines
echoing the resolved config) or as a JSON mirror of exactly the same
content, and the report path can additionally render a figure next to
the delimited output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .construction import run_construction
from .labels import original_range
from .mast import mast
from .stochastic import estimate_q, martingale_check
from .trees import SizeGuardError, random_tree

__all__ = [
    "ExperimentConfig",
    "SizeSummary",
    "ScalingResult",
    "ChainComparisonReport",
    "run_scaling_construct",
    "run_scaling_mast",
    "run_chain_vs_construction",
    "run_martingale_experiment",
    "write_report",
]

MODES = ("construct", "mast", "chain", "martingale")
MAST_SIZE_LIMIT = 256
CHAIN_SIZE_LIMIT = 2000
#: chain trajectories simulated per construction replicate in chain mode
CHAIN_RUN_FACTOR = 100


@dataclass(frozen=True)
class ExperimentConfig:
    """Resolved parameters of one experiment run.

    ``sizes`` is the sweep of leaf counts (for martingale mode it holds
    the single maximum step count instead).  ``workers`` only controls
    execution, never results, and is therefore not part of any output.
    """

    mode: str
    sizes: tuple[int, ...]
    cutoff: int = 10
    replications: int = 200
    master_seed: int = 0
    output_path: str | None = None
    output_format: str = "csv"
    figure_path: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        sizes = tuple(int(n) for n in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise ValueError("sizes must be non-empty")
        if any(b <= a for a, b in zip(sizes, sizes[1:])):
            raise ValueError(f"sizes must be increasing, got {sizes}")
        if sizes[0] < 1:
            raise ValueError("sizes must be positive")
        if self.replications < 1:
            raise ValueError("replications must be at least 1")
        if self.cutoff < 2:
            raise ValueError("cutoff must be at least 2")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must fit in 64 bits")
        if self.output_format not in ("csv", "json"):
            raise ValueError(f"output_format must be csv or json, got {self.output_format!r}")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")

    def header_lines(self) -> list[str]:
        """Config echo for report headers (excludes execution-only knobs)."""
        sizes = ",".join(str(n) for n in self.sizes)
        return [
            "# commontree experiment",
            f"# mode={self.mode} sizes={sizes} cutoff={self.cutoff}"
            f" replications={self.replications} master_seed={self.master_seed}"
            f" format={self.output_format}",
        ]

    def header_dict(self) -> dict:
        return {
            "mode": self.mode,
            "sizes": list(self.sizes),
            "cutoff": self.cutoff,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "format": self.output_format,
        }


@dataclass(frozen=True)
class SizeSummary:
    n: int
    mean_size: float
    std_error: float
    replications: int


@dataclass(frozen=True)
class ScalingResult:
    """Per-size statistics plus the least-squares log-log exponent fit.

    ``rows`` carries the raw per-replicate samples as
    ``(n, replicate, size, seed_sub)`` in deterministic order.  The fit
    fields are NaN when fewer than 3 sizes were swept (no fit is done).
    """

    records: tuple[SizeSummary, ...]
    rows: tuple[tuple[int, int, int, int], ...]
    fitted_slope: float
    fitted_intercept: float
    slope_std_error: float


@dataclass(frozen=True)
class ChainComparisonReport:
    """Construction-vs-chain comparison at one leaf count.

    ``p_hat`` is the fraction of all leaf slots picked by the
    construction, so ``n * p_hat`` equals the mean output size exactly
    (an accounting identity over the same runs, checked in exact
    arithmetic).  ``q_hat`` is the window-entry probability of the size
    chain; the sandwich ``q/(cutoff-1) <= p <= q`` is checked within
    3 combined standard errors.  ``size_cov`` is the output-size
    coefficient of variation, reported descriptively.
    """

    n: int
    cutoff: int
    replications: int
    chain_runs: int
    p_hat: float
    p_std_error: float
    q_hat: float
    q_std_error: float
    mean_output_size: float
    size_cov: float
    identity_ok: bool
    sandwich_low: float
    sandwich_high: float
    sandwich_ok: bool
    rows: tuple[tuple[int, int, int, int], ...]


def _substream(master_seed: int, *key: int) -> np.random.SeedSequence:
    return np.random.SeedSequence((master_seed, *key))


def _substream_seed(master_seed: int, *key: int) -> int:
    return int(_substream(master_seed, *key).generate_state(1, np.uint64)[0])


def _scaling_task(task: tuple[str, int, int, int, int]) -> tuple[int, int, int, int]:
    mode, master_seed, cutoff, n, replicate = task
    rng = np.random.default_rng(_substream(master_seed, n, replicate))
    labels = original_range(n)
    t = random_tree(labels, rng)
    t_prime = random_tree(labels, rng)
    if mode == "construct":
        size = len(run_construction(t, t_prime, cutoff, rng).picked)
    else:
        size = mast(t, t_prime).size
    return (n, replicate, size, _substream_seed(master_seed, n, replicate))


def _run_tasks(cfg: ExperimentConfig) -> list[tuple[int, int, int, int]]:
    tasks = [
        (cfg.mode, cfg.master_seed, cfg.cutoff, n, r)
        for n in cfg.sizes
        for r in range(cfg.replications)
    ]
    if cfg.workers > 1:
        from multiprocessing import Pool

        with Pool(cfg.workers) as pool:
            rows = pool.map(_scaling_task, tasks, chunksize=8)
    else:
        rows = [_scaling_task(task) for task in tasks]
    rows.sort(key=lambda row: (row[0], row[1]))
    return rows


def _summarize(rows: list[tuple[int, int, int, int]], n: int, reps: int) -> SizeSummary:
    sizes = np.array([size for (m, _, size, _) in rows if m == n], dtype=float)
    std_error = float(sizes.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return SizeSummary(
        n=n, mean_size=float(sizes.mean()), std_error=std_error, replications=reps
    )


def _fit_loglog(records: tuple[SizeSummary, ...]) -> tuple[float, float, float]:
    if len(records) < 3:
        return (math.nan, math.nan, math.nan)
    x = np.log([rec.n for rec in records])
    y = np.log([rec.mean_size for rec in records])
    x_bar, y_bar = x.mean(), y.mean()
    sxx = float(((x - x_bar) ** 2).sum())
    slope = float(((x - x_bar) * (y - y_bar)).sum() / sxx)
    intercept = float(y_bar - slope * x_bar)
    residuals = y - (intercept + slope * x)
    sigma2 = float((residuals**2).sum() / (len(records) - 2))
    return (slope, intercept, math.sqrt(sigma2 / sxx))


def _scaling(cfg: ExperimentConfig) -> ScalingResult:
    rows = _run_tasks(cfg)
    records = tuple(_summarize(rows, n, cfg.replications) for n in cfg.sizes)
    slope, intercept, slope_se = _fit_loglog(records)
    result = ScalingResult(
        records=records,
        rows=tuple(rows),
        fitted_slope=slope,
        fitted_intercept=intercept,
        slope_std_error=slope_se,
    )
    write_report(cfg, result)
    return result


def run_scaling_construct(cfg: ExperimentConfig) -> ScalingResult:
    """Sweep n, run the construction R times per size, fit the exponent."""
    if cfg.mode != "construct":
        raise ValueError(f"config mode must be 'construct', got {cfg.mode!r}")
    return _scaling(cfg)


def run_scaling_mast(cfg: ExperimentConfig) -> ScalingResult:
    """Sweep n, compute the exact agreement size per replicate, fit."""
    if cfg.mode != "mast":
        raise ValueError(f"config mode must be 'mast', got {cfg.mode!r}")
    if max(cfg.sizes) > MAST_SIZE_LIMIT:
        raise SizeGuardError(
            f"exact agreement sweeps are guarded at n <= {MAST_SIZE_LIMIT},"
            f" got {max(cfg.sizes)}"
        )
    return _scaling(cfg)


def run_chain_vs_construction(cfg: ExperimentConfig) -> list[ChainComparisonReport]:
    """Estimate p (construction) and q (size chain) side by side.

    For each n the construction runs ``replications`` times on fresh
    uniform tree pairs; the chain runs ``CHAIN_RUN_FACTOR`` times as many
    trajectories from its own substream.  The mean output size must equal
    ``n * p_hat`` exactly, and the sandwich
    ``q/(cutoff-1) <= p <= q`` is evaluated within 3 combined SE.
    """
    if cfg.mode != "chain":
        raise ValueError(f"config mode must be 'chain', got {cfg.mode!r}")
    if max(cfg.sizes) > CHAIN_SIZE_LIMIT:
        raise SizeGuardError(
            f"chain comparisons are guarded at n <= {CHAIN_SIZE_LIMIT},"
            f" got {max(cfg.sizes)}"
        )
    if min(cfg.sizes) < 5:
        raise ValueError("chain comparisons need n >= 5")
    reports = []
    for n in cfg.sizes:
        rows = []
        total_picked = 0
        for r in range(cfg.replications):
            rng = np.random.default_rng(_substream(cfg.master_seed, n, r))
            labels = original_range(n)
            t = random_tree(labels, rng)
            t_prime = random_tree(labels, rng)
            size = len(run_construction(t, t_prime, cfg.cutoff, rng).picked)
            total_picked += size
            rows.append((n, r, size, _substream_seed(cfg.master_seed, n, r)))
        sizes = np.array([size for (_, _, size, _) in rows], dtype=float)
        mean_size = float(sizes.mean())
        size_sd = float(sizes.std(ddof=1)) if cfg.replications > 1 else 0.0
        p_hat = total_picked / (cfg.replications * n)
        p_se = size_sd / n / math.sqrt(cfg.replications)
        # n * p_hat == mean output size must hold as exact arithmetic,
        # not merely within float rounding
        identity_ok = Fraction(total_picked, cfg.replications * n) * n == Fraction(
            total_picked, cfg.replications
        )
        chain_runs = cfg.replications * CHAIN_RUN_FACTOR
        chain_rng = np.random.default_rng(_substream(cfg.master_seed, n, 2**32))
        q_hat, q_se = estimate_q(n, cfg.cutoff, chain_runs, chain_rng)
        low = q_hat / (cfg.cutoff - 1)
        low_se = q_se / (cfg.cutoff - 1)
        sandwich_ok = (
            p_hat >= low - 3.0 * math.hypot(low_se, p_se)
            and p_hat <= q_hat + 3.0 * math.hypot(q_se, p_se)
        )
        reports.append(
            ChainComparisonReport(
                n=n,
                cutoff=cfg.cutoff,
                replications=cfg.replications,
                chain_runs=chain_runs,
                p_hat=p_hat,
                p_std_error=p_se,
                q_hat=q_hat,
                q_std_error=q_se,
                mean_output_size=mean_size,
                size_cov=(size_sd / mean_size) if mean_size else math.nan,
                identity_ok=identity_ok,
                sandwich_low=low,
                sandwich_high=q_hat,
                sandwich_ok=sandwich_ok,
                rows=tuple(rows),
            )
        )
    write_report(cfg, reports)
    return reports


def run_martingale_experiment(
    cfg: ExperimentConfig,
) -> list[tuple[int, float, float]]:
    """Fragmentation martingale estimates; ``sizes`` holds the single t_max."""
    if cfg.mode != "martingale":
        raise ValueError(f"config mode must be 'martingale', got {cfg.mode!r}")
    if len(cfg.sizes) != 1:
        raise ValueError("martingale mode takes exactly one size: the step count")
    t_max = cfg.sizes[0]
    rng = np.random.default_rng(_substream(cfg.master_seed, t_max, 0))
    rows = martingale_check(t_max, cfg.replications, rng)
    write_report(cfg, rows)
    return rows


# --------------------------------------------------------------------------
# report writing
# --------------------------------------------------------------------------


def write_report(cfg: ExperimentConfig, result) -> None:
    """Render ``result`` to cfg.output_path (CSV or JSON) and optionally
    draw the matching figure next to it.  No-op when no path is set."""
    if cfg.output_path is not None:
        text = (
            _render_csv(cfg, result)
            if cfg.output_format == "csv"
            else _render_json(cfg, result)
        )
        with open(cfg.output_path, "w", encoding="utf-8") as handle:
            handle.write(text)
    if cfg.figure_path is not None:
        from . import plots

        plots.render_figure(cfg, result, cfg.figure_path)


def _render_csv(cfg: ExperimentConfig, result) -> str:
    lines = cfg.header_lines()
    if cfg.mode == "martingale":
        lines.append("t,estimate,std_error")
        for t, estimate, std_error in result:
            lines.append(f"{t},{estimate!r},{std_error!r}")
        return "\n".join(lines) + "\n"

    lines.append(
        "# summary rows have replicate=-1 with size=mean_size and"
        " seed_sub=std_error"
    )
    lines.append("n,replicate,size,seed_sub")
    if cfg.mode == "chain":
        for report in result:
            for n, r, size, seed_sub in report.rows:
                lines.append(f"{n},{r},{size},{seed_sub}")
        for report in result:
            lines.append(
                f"{report.n},-1,{report.mean_output_size!r},"
                f"{report.p_std_error * report.n!r}"
            )
            lines.append(
                f"# chain n={report.n}: p_hat={report.p_hat!r}"
                f" p_std_error={report.p_std_error!r} q_hat={report.q_hat!r}"
                f" q_std_error={report.q_std_error!r}"
                f" mean_output_size={report.mean_output_size!r}"
                f" size_cov={report.size_cov!r}"
                f" identity_ok={report.identity_ok}"
                f" sandwich_low={report.sandwich_low!r}"
                f" sandwich_high={report.sandwich_high!r}"
                f" sandwich_ok={report.sandwich_ok}"
                f" chain_runs={report.chain_runs}"
            )
        return "\n".join(lines) + "\n"

    for n, r, size, seed_sub in result.rows:
        lines.append(f"{n},{r},{size},{seed_sub}")
    for rec in result.records:
        lines.append(f"{rec.n},-1,{rec.mean_size!r},{rec.std_error!r}")
    lines.append(
        f"# fit: slope={result.fitted_slope!r}"
        f" intercept={result.fitted_intercept!r}"
        f" slope_std_error={result.slope_std_error!r}"
    )
    return "\n".join(lines) + "\n"


def _render_json(cfg: ExperimentConfig, result) -> str:
    payload: dict = {"config": cfg.header_dict()}
    if cfg.mode == "martingale":
        payload["rows"] = [
            {"t": t, "estimate": estimate, "std_error": std_error}
            for t, estimate, std_error in result
        ]
    elif cfg.mode == "chain":
        payload["rows"] = [
            {"n": n, "replicate": r, "size": size, "seed_sub": seed_sub}
            for report in result
            for n, r, size, seed_sub in report.rows
        ]
        payload["reports"] = [
            {
                "n": report.n,
                "cutoff": report.cutoff,
                "replications": report.replications,
                "chain_runs": report.chain_runs,
                "p_hat": report.p_hat,
                "p_std_error": report.p_std_error,
                "q_hat": report.q_hat,
                "q_std_error": report.q_std_error,
                "mean_output_size": report.mean_output_size,
                "size_cov": report.size_cov,
                "identity_ok": report.identity_ok,
                "sandwich_low": report.sandwich_low,
                "sandwich_high": report.sandwich_high,
                "sandwich_ok": report.sandwich_ok,
            }
            for report in result
        ]
    else:
        payload["rows"] = [
            {"n": n, "replicate": r, "size": size, "seed_sub": seed_sub}
            for n, r, size, seed_sub in result.rows
        ]
        payload["summaries"] = [
            {
                "n": rec.n,
                "mean_size": rec.mean_size,
                "std_error": rec.std_error,
                "replications": rec.replications,
            }
            for rec in result.records
        ]
        payload["fit"] = {
            "slope": result.fitted_slope,
            "intercept": result.fitted_intercept,
            "slope_std_error": result.slope_std_error,
        }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"
