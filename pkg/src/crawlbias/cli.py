"""Command line front end.

Exit codes: 0 success, 2 bad input or configuration, 3 a correction
failed to converge.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from contextlib import contextmanager

from . import analytic, experiments
from .estimators import ConvergenceError, bfs_correct, mhrw_correct, rw_correct
from .generate import configuration_model, degree_sequence_from_distribution, rewire_to_assortativity
from .graph import GraphFormatError, RAW, load_edge_list, stats_row
from .samplers import trace_from_csv, trace_to_csv
from .experiments import ConfigError


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConvergenceError as exc:
        print(f"error: correction did not converge after {exc.iterations} iterations "
              f"(residual {exc.residual:.3g})", file=sys.stderr)
        return 3
    except BrokenPipeError:
        # downstream reader went away (e.g. piping into head); not an error,
        # but stdout must be detached so the interpreter's exit flush stays quiet
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crawlbias",
        description="Measure, predict, and undo the degree bias of graph crawls.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--rng-seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", default="-", help="output file, '-' for stdout (default)")

    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", parents=[common],
                       help="size, moments, and assortativity of an edge list")
    p.add_argument("edgelist", help="whitespace separated edge list file")
    p.add_argument("--raw", action="store_true",
                   help="keep self loops, duplicate edges, and small components")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("generate", parents=[common],
                       help="write a random graph with a prescribed degree distribution")
    p.add_argument("--pk", required=True, help=PK_HELP)
    p.add_argument("--nodes", type=int, required=True)
    p.add_argument("--assortativity", type=float, default=None,
                   help="rewire toward this degree correlation after generating")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("sample", parents=[common],
                       help="run one crawl and write its trace as CSV")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--edgelist", help="crawl this edge list file")
    src.add_argument("--pk", help=PK_HELP + " (generates a graph first; needs --nodes)")
    p.add_argument("--nodes", type=int, default=0)
    p.add_argument("--technique", required=True,
                   choices=["bfs", "dfs", "ff", "sbs", "rw", "mhrw", "wwor", "stub"])
    p.add_argument("--budget", type=int, required=True,
                   help="nodes to collect (steps, for walks)")
    p.add_argument("--seed-node", type=int, default=None,
                   help="start node (default: degree-weighted draw)")
    p.add_argument("--ff-p", type=float, default=0.5, help="spread probability for ff")
    p.add_argument("--sbs-n", type=int, default=2, help="referrals per node for sbs")
    p.add_argument("--raw", action="store_true")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("curves", parents=[common],
                       help="run a replicated experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("correct", parents=[common],
                       help="recover unbiased statistics from a trace CSV")
    p.add_argument("--trace", required=True)
    p.add_argument("--f", type=float, default=None,
                   help="fraction of the graph covered (needed for bfs correction)")
    p.add_argument("--method", choices=["bfs", "rw", "mhrw"], default="bfs")
    p.set_defaults(func=cmd_correct)

    p = sub.add_parser("compare", parents=[common],
                       help="RMSE of neighborhood estimators vs corrected traversal")
    p.add_argument("--config", required=True)
    p.set_defaults(func=cmd_compare)

    return parser


PK_HELP = ("degree distribution: 'regular:K', 'bimodal:K1:K2:W1', "
           "'powerlaw:GAMMA:KMIN:KMAX', or a JSON object of fractions")


@contextmanager
def _open_out(path: str):
    if path == "-":
        yield sys.stdout
    else:
        with open(path, "w", encoding="utf-8") as fh:
            yield fh


def cmd_stats(args: argparse.Namespace) -> int:
    g = load_edge_list(args.edgelist, RAW if args.raw else None)
    row = stats_row(g)
    cols = ["nodes", "edges", "mean_degree", "k2_over_k", "assortativity"]
    with _open_out(args.out) as out:
        experiments.write_rows_csv([row], cols, out)
    return 0


def cmd_generate(args: argparse.Namespace) -> int:
    d = experiments._parse_pk_maybe_json(args.pk)
    rng = random.Random(args.rng_seed)
    seq = degree_sequence_from_distribution(d, args.nodes)
    g = configuration_model(seq, rng)
    if args.assortativity is not None:
        g = rewire_to_assortativity(g, args.assortativity, rng).graph
    with _open_out(args.out) as out:
        out.write(f"# pk {args.pk} nodes {args.nodes} rng_seed {args.rng_seed}\n")
        for u, v in g.edges():
            out.write(f"{u} {v}\n")
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    rng = random.Random(args.rng_seed)
    if args.edgelist:
        g = load_edge_list(args.edgelist, RAW if args.raw else None)
    else:
        if args.nodes < 1:
            raise ConfigError("--pk needs --nodes")
        d = experiments._parse_pk_maybe_json(args.pk)
        seq = degree_sequence_from_distribution(d, args.nodes)
        g = configuration_model(seq, rng)
    tech = experiments.TechniqueSpec(args.technique, p=args.ff_p, names=args.sbs_n)
    if args.seed_node is not None:
        component = [args.seed_node]
    else:
        from .samplers import weighted_without_replacement
        component = weighted_without_replacement(g.degrees(), 1, rng)
        if not component:
            raise ConfigError("graph has no edges to start a crawl from")
    trace = experiments.run_technique(g, component, tech, args.budget, rng)
    with _open_out(args.out) as out:
        trace_to_csv(trace, out, labels=g.labels, rng_seed=args.rng_seed)
    return 0


def cmd_curves(args: argparse.Namespace) -> int:
    cfg = experiments.load_config(args.config)
    cfg.master_seed = args.rng_seed if args.rng_seed != 0 else cfg.master_seed
    meta = [cfg.metadata_line()]
    if cfg.mode == "analytic":
        model = cfg.source.model()
        if model is None:
            g = experiments._build_graph(cfg.source, random.Random(cfg.master_seed))
            from .graph import degree_distribution
            model = degree_distribution(g)
        rows = analytic.curve_rows(model, cfg.f_grid)
        cols = ["f", "t", "mean_q", "q_k_json"]
    elif cfg.mode == "bias":
        rows = experiments.run_bias_curves(cfg)
        cols = experiments.BIAS_COLUMNS
    elif cfg.mode == "correction":
        rows = experiments.run_correction_eval(cfg)
        cols = experiments.CORRECTION_COLUMNS
    elif cfg.mode == "assortativity":
        rows = experiments.run_assortativity_sweep(cfg)
        cols = experiments.SWEEP_COLUMNS
    else:
        raise ConfigError(f"mode {cfg.mode!r} is not a curves mode; "
                          "use the compare subcommand for mode 'compare'")
    with _open_out(args.out) as out:
        experiments.write_rows_csv(rows, cols, out, metadata=meta)
    return 0


def cmd_correct(args: argparse.Namespace) -> int:
    trace = trace_from_csv(args.trace)
    if args.method == "bfs":
        f_real = args.f if args.f is not None else trace.coverage
        if f_real is None:
            raise ConfigError("bfs correction needs --f or a trace with coverage metadata")
        report = bfs_correct(trace, f_real)
    elif args.method == "rw":
        report = rw_correct(trace)
    else:
        report = mhrw_correct(trace)
    sampled = sum(trace.degrees) / len(trace.degrees)
    with _open_out(args.out) as out:
        cols = ["method", "sampled_mean", "corrected_mean", "iterations", "t_value", "residual"]
        row = {
            "method": report.technique,
            "sampled_mean": sampled,
            "corrected_mean": report.mean,
            "iterations": report.iterations,
            "t_value": "" if report.t_value is None else report.t_value,
            "residual": "" if report.residual is None else report.residual,
        }
        experiments.write_rows_csv([row], cols, out)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    cfg = experiments.load_config(args.config)
    cfg.master_seed = args.rng_seed if args.rng_seed != 0 else cfg.master_seed
    rows = experiments.run_compare(cfg)
    cols = ["method", "mean_estimate", "rmse", "replicas", "diag_iterations", "diag_residual"]
    with _open_out(args.out) as out:
        experiments.write_rows_csv(rows, cols, out, metadata=[cfg.metadata_line()])
    return 0


if __name__ == "__main__":
    sys.exit(main())
