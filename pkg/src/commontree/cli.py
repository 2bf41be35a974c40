"""Command-line entry point.

Verbs: ``gen`` (sample uniform trees), ``mast`` (exact agreement size),
``construct`` (randomized recursive common subtree), ``chain`` /
``martingale`` / ``beta`` (stochastic-model probes), and ``experiment``
(Monte Carlo sweeps with CSV/JSON reports and optional figures).

Every run echoes its resolved configuration: as ``#`` header lines in
report files, as a ``config`` field in JSON payloads, and as a comment
line on stderr for bare-payload verbs.  Exit codes: 0 success, 2 usage,
3 size-guard violation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .construction import run_construction
from .experiments import (
    ExperimentConfig,
    run_chain_vs_construction,
    run_martingale_experiment,
    run_scaling_construct,
    run_scaling_mast,
)
from .labels import original_range
from .stochastic import (
    BETA_RANDOM,
    estimate_q,
    martingale_check,
    solve_beta_centroid,
)
from .trees import SizeGuardError, parse_newick, random_tree, to_newick

__all__ = ["main", "build_parser"]


def _echo_config(**kwargs) -> None:
    parts = " ".join(f"{key}={value}" for key, value in kwargs.items())
    print(f"# config: {parts}", file=sys.stderr)


def _read_tree_pair(path: str):
    with open(path, "r", encoding="utf-8") as handle:
        lines = [
            line.strip()
            for line in handle
            if line.strip() and not line.startswith("#")
        ]
    if len(lines) < 2:
        raise ValueError(f"{path} must contain two Newick lines, found {len(lines)}")
    return parse_newick(lines[0]), parse_newick(lines[1])


def _cmd_gen(args) -> int:
    _echo_config(verb="gen", n=args.n, seed=args.seed, count=args.count)
    rng = np.random.default_rng(args.seed)
    labels = original_range(args.n)
    lines = [to_newick(random_tree(labels, rng)) for _ in range(args.count)]
    if args.out:
        with open(args.out, "w", encoding="utf-8") as handle:
            handle.write(f"# gen n={args.n} seed={args.seed} count={args.count}\n")
            handle.write("\n".join(lines) + "\n")
    else:
        print("\n".join(lines))
    return 0


def _cmd_mast(args) -> int:
    _echo_config(verb="mast", trees=args.trees)
    from .mast import mast

    t, t_prime = _read_tree_pair(args.trees)
    result = mast(t, t_prime)
    payload = {
        "config": {"verb": "mast", "trees": args.trees},
        "size": result.size,
        "witness": [label.name for label in sorted(result.witness)],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_construct(args) -> int:
    _echo_config(
        verb="construct", trees=args.trees, cutoff=args.cutoff, seed=args.seed
    )
    t, t_prime = _read_tree_pair(args.trees)
    rng = np.random.default_rng(args.seed)
    output = run_construction(t, t_prime, args.cutoff, rng)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8") as handle:
            handle.write(
                f"# construct trees={args.trees} cutoff={args.cutoff}"
                f" seed={args.seed}\n"
            )
            handle.write(
                "item_id,parent_id,depth,m_before,b1,b2,b3,stopped,picked_label\n"
            )
            for rec in output.item_trace:
                branches = [
                    "" if b is None else str(b) for b in (rec.b1, rec.b2, rec.b3)
                ]
                picked = rec.picked_label.name if rec.picked_label else ""
                handle.write(
                    f"{rec.item_id},{rec.parent_id},{rec.depth},{rec.m_before},"
                    f"{branches[0]},{branches[1]},{branches[2]},"
                    f"{int(rec.stopped)},{picked}\n"
                )
    payload = {
        "config": {
            "verb": "construct",
            "trees": args.trees,
            "cutoff": args.cutoff,
            "seed": args.seed,
        },
        "size": len(output.picked),
        "picked": [label.name for label in sorted(output.picked)],
        "subtree": to_newick(output.subtree),
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_chain(args) -> int:
    _echo_config(
        verb="chain", n=args.n, cutoff=args.cutoff, runs=args.runs, seed=args.seed
    )
    rng = np.random.default_rng(args.seed)
    q_hat, std_error = estimate_q(args.n, args.cutoff, args.runs, rng)
    payload = {
        "config": {
            "verb": "chain",
            "n": args.n,
            "cutoff": args.cutoff,
            "runs": args.runs,
            "seed": args.seed,
        },
        "q_hat": q_hat,
        "std_error": std_error,
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_martingale(args) -> int:
    _echo_config(
        verb="martingale", tmax=args.tmax, samples=args.samples, seed=args.seed
    )
    rng = np.random.default_rng(args.seed)
    rows = martingale_check(args.tmax, args.samples, rng)
    payload = {
        "config": {
            "verb": "martingale",
            "tmax": args.tmax,
            "samples": args.samples,
            "seed": args.seed,
        },
        "rows": [
            {"t": t, "estimate": estimate, "std_error": std_error}
            for t, estimate, std_error in rows
        ],
    }
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cmd_beta(args) -> int:
    _echo_config(verb="beta", mode=args.mode)
    value = BETA_RANDOM if args.mode == "random" else solve_beta_centroid(args.tolerance)
    print(repr(value))
    return 0


def _cmd_experiment(args) -> int:
    sizes = tuple(int(part) for part in args.sizes.split(",") if part)
    cfg = ExperimentConfig(
        mode=args.mode,
        sizes=sizes,
        cutoff=args.cutoff,
        replications=args.reps,
        master_seed=args.seed,
        output_path=args.out,
        output_format=args.format,
        figure_path=args.figure,
        workers=args.workers,
    )
    _echo_config(
        verb="experiment",
        mode=cfg.mode,
        sizes=",".join(map(str, cfg.sizes)),
        cutoff=cfg.cutoff,
        reps=cfg.replications,
        seed=cfg.master_seed,
        format=cfg.output_format,
        out=cfg.output_path,
    )
    if cfg.mode == "construct":
        result = run_scaling_construct(cfg)
    elif cfg.mode == "mast":
        result = run_scaling_mast(cfg)
    elif cfg.mode == "chain":
        result = run_chain_vs_construction(cfg)
    else:
        result = run_martingale_experiment(cfg)
    if cfg.output_path is None:
        from .experiments import _render_csv, _render_json

        text = _render_csv(cfg, result) if cfg.output_format == "csv" else _render_json(cfg, result)
        sys.stdout.write(text)
    else:
        print(f"report written to {cfg.output_path}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="commontree",
        description="Common subtrees of random leaf-labeled binary trees.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("gen", help="sample uniform leaf-labeled trees as Newick")
    p.add_argument("--n", type=int, required=True, help="number of leaves")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=1, help="trees to emit")
    p.add_argument("--out", help="write to file instead of stdout")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("mast", help="exact maximum agreement subtree of two trees")
    p.add_argument("--trees", required=True, help="file with two Newick lines")
    p.set_defaults(func=_cmd_mast)

    p = sub.add_parser("construct", help="randomized recursive common subtree")
    p.add_argument("--trees", required=True, help="file with two Newick lines")
    p.add_argument("--cutoff", type=int, default=10, help="recursion cutoff K")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trace", help="write per-item trace CSV to this path")
    p.set_defaults(func=_cmd_construct)

    p = sub.add_parser("chain", help="estimate window-entry probability q")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--cutoff", type=int, default=10)
    p.add_argument("--runs", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_chain)

    p = sub.add_parser("martingale", help="fragmentation martingale check")
    p.add_argument("--tmax", type=int, default=3)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_martingale)

    p = sub.add_parser("beta", help="growth exponents of the split models")
    p.add_argument("--mode", choices=("random", "centroid"), required=True)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.set_defaults(func=_cmd_beta)

    p = sub.add_parser("experiment", help="Monte Carlo sweeps with reports")
    p.add_argument(
        "--mode", choices=("construct", "mast", "chain", "martingale"), required=True
    )
    p.add_argument("--sizes", required=True, help="comma-separated leaf counts")
    p.add_argument("--cutoff", type=int, default=10)
    p.add_argument("--reps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", help="report path (stdout when omitted)")
    p.add_argument("--figure", help="also render a figure to this path")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_experiment)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SizeGuardError as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 4
    except ValueError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
