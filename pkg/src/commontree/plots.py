"""Figure rendering for experiment reports.

Figures are drawn headlessly (Agg) straight to files, next to the
delimited report they illustrate.  matplotlib is imported lazily so the
plain CLI paths never pay for it.
"""

from __future__ import annotations

import math

__all__ = ["render_figure"]


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def render_figure(cfg, result, path: str) -> None:
    """Dispatch on the experiment mode and save a figure to ``path``."""
    if cfg.mode == "martingale":
        _martingale_figure(result, path)
    elif cfg.mode == "chain":
        _chain_figure(result, path)
    else:
        _scaling_figure(cfg, result, path)


def _scaling_figure(cfg, result, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ns = [rec.n for rec in result.records]
    means = [rec.mean_size for rec in result.records]
    errs = [rec.std_error for rec in result.records]
    ax.errorbar(ns, means, yerr=errs, fmt="o", capsize=3, label="mean size")
    if not math.isnan(result.fitted_slope):
        grid = [min(ns), max(ns)]
        fit = [
            math.exp(result.fitted_intercept + result.fitted_slope * math.log(n))
            for n in grid
        ]
        ax.plot(
            grid,
            fit,
            "--",
            label=(
                f"slope {result.fitted_slope:.3f}"
                f" ± {result.slope_std_error:.3f}"
            ),
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("leaves n")
    ax.set_ylabel("mean common subtree size")
    ax.set_title(f"{cfg.mode} scaling, cutoff={cfg.cutoff}, R={cfg.replications}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _chain_figure(reports, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ns = [rep.n for rep in reports]
    ax.errorbar(
        ns,
        [rep.p_hat for rep in reports],
        yerr=[3 * rep.p_std_error for rep in reports],
        fmt="o",
        capsize=3,
        label="p (construction)",
    )
    ax.errorbar(
        ns,
        [rep.q_hat for rep in reports],
        yerr=[3 * rep.q_std_error for rep in reports],
        fmt="s",
        capsize=3,
        label="q (chain)",
    )
    ax.plot(
        ns,
        [rep.sandwich_low for rep in reports],
        ":",
        color="gray",
        label="q / (cutoff-1)",
    )
    ax.set_xlabel("leaves n")
    ax.set_ylabel("probability")
    ax.set_title(f"chain vs construction, cutoff={reports[0].cutoff}")
    if len(ns) > 1:
        ax.set_xscale("log")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _martingale_figure(rows, path: str) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.0, 4.5))
    ts = [t for t, _, _ in rows]
    ax.errorbar(
        ts,
        [estimate for _, estimate, _ in rows],
        yerr=[3 * se for _, _, se in rows],
        fmt="o",
        capsize=3,
        label="estimate ± 3 SE",
    )
    ax.axhline(1.0, linestyle="--", color="gray")
    ax.set_xlabel("step t")
    ax.set_ylabel("normalized moment")
    ax.set_title("fragmentation martingale check")
    ax.set_xticks(ts)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
