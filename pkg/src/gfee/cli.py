"""Command-line entry point: embed, evaluate, simulate, verify, baseline.

Exit codes: 0 success, 1 runtime error, 2 input/usage validation failure.
Every run's randomness flows from --seed; when omitted a seed is drawn and
printed on stderr so the run can be reproduced.
"""

from __future__ import annotations

import argparse
import os
import sys

from .classify import EvalProtocol, cross_validate
from .embedding import export_binary, export_csv, fuse
from .experiments import run_baseline, run_simulation, verify_theorems, write_gnuplot, write_table
from .graph import GraphCollection, read_edgelist, read_labels, validate_collection
from .ingest import load_manifest
from .sbm import BlockSpec, named_spec


class _ValidationFailure(Exception):
    pass


def _parse_ints(text: str):
    return tuple(int(x) for x in text.split(",") if x.strip())


def _ensure_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    seed = int.from_bytes(os.urandom(4), "big")
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _load_inputs(args):
    if getattr(args, "manifest", None):
        collection, labels = load_manifest(args.manifest)
    else:
        if not args.graphs or not args.labels:
            raise _ValidationFailure("either --manifest or --graphs and --labels required")
        labels = read_labels(args.labels)
        graphs = [
            read_edgelist(p, n=labels.n, directed=args.directed, simple=args.simple)
            for p in args.graphs
        ]
        collection = GraphCollection(tuple(graphs))
    report = validate_collection(collection, labels)
    if not report.ok:
        raise _ValidationFailure(str(report))
    return collection, labels


def _cmd_embed(args) -> int:
    collection, labels = _load_inputs(args)
    emb = fuse(collection, labels, jobs=args.jobs)
    if args.format == "csv":
        export_csv(emb, args.out)
    else:
        export_binary(emb, args.out)
    print(f"n={emb.n} M={emb.M} K={emb.K} dims={emb.Z.shape[1]}")
    return 0


def _cmd_evaluate(args) -> int:
    collection, labels = _load_inputs(args)
    if args.subset:
        indices = [i - 1 for i in _parse_ints(args.subset)]
        if any(i < 0 or i >= collection.M for i in indices):
            raise _ValidationFailure(f"--subset indices must be in 1..{collection.M}")
        collection = collection.subset(indices)
    protocol = EvalProtocol(folds=args.folds, replicates=args.replicates,
                            neighbor_count=args.knn, seed=_ensure_seed(args))
    report = cross_validate(collection, labels, protocol, jobs=args.jobs)
    print(report.to_json())
    return 0


def _resolve_cli_spec(args) -> BlockSpec:
    if getattr(args, "spec", None):
        with open(args.spec) as fh:
            return BlockSpec.from_json(fh.read())
    return named_spec(args.sim)


def _emit(rows, args) -> None:
    if args.out and args.out != "-":
        write_table(rows, args.out)
    else:
        write_table(rows, sys.stdout)
    if getattr(args, "gnuplot_dir", None):
        write_gnuplot(rows, args.gnuplot_dir)


def _cmd_simulate(args) -> int:
    protocol = EvalProtocol(folds=args.folds, replicates=args.replicates,
                            neighbor_count=args.knn, seed=_ensure_seed(args))
    rows = run_simulation(_resolve_cli_spec(args), args.n_grid, protocol, jobs=args.jobs)
    _emit(rows, args)
    return 0


def _cmd_verify(args) -> int:
    protocol = EvalProtocol(folds=args.folds, replicates=args.replicates,
                            neighbor_count=args.knn, seed=_ensure_seed(args))
    rows = verify_theorems(_resolve_cli_spec(args), args.n_grid, protocol, jobs=args.jobs)
    _emit(rows, args)
    return 0


def _cmd_baseline(args) -> int:
    if args.method == "gfee" and args.dmax is not None:
        print("warning: --dmax ignored for gfee (no dimension parameter)",
              file=sys.stderr)
    protocol = EvalProtocol(folds=args.folds, replicates=args.replicates,
                            neighbor_count=args.knn, seed=_ensure_seed(args))
    rows = run_baseline(_resolve_cli_spec(args), args.method, args.n_grid, protocol,
                        d_max=args.dmax or 30, jobs=args.jobs)
    _emit(rows, args)
    return 0


def _add_io_flags(p):
    p.add_argument("--graphs", nargs="+", metavar="FILE", help="edgelist files (1-based)")
    p.add_argument("--labels", metavar="FILE", help="label file, one integer per line")
    p.add_argument("--manifest", metavar="JSON", help="dataset manifest")
    p.add_argument("--directed", action="store_true", help="treat graphs as directed")
    p.add_argument("--simple", action="store_true", help="drop self-loops with a warning")


def _add_protocol_flags(p, folds=5, replicates=20):
    p.add_argument("--folds", type=int, default=folds)
    p.add_argument("--replicates", type=int, default=replicates)
    p.add_argument("--knn", type=int, default=5)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--jobs", type=int, default=os.cpu_count())


def _add_sim_flags(p):
    p.add_argument("--sim", choices=("sim1", "sim2", "sim3"), default="sim1")
    p.add_argument("--spec", metavar="JSON", help="block-spec file overriding --sim")
    p.add_argument("--n-grid", dest="n_grid", type=_parse_ints, default=None,
                   metavar="N1,N2,...")
    p.add_argument("--out", default="-", metavar="FILE")
    p.add_argument("--gnuplot-dir", dest="gnuplot_dir", default=None, metavar="DIR")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gfee",
                                     description="multi-graph fusion encoder embedding")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("embed", help="write the fusion embedding of given graphs")
    _add_io_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=("csv", "bin"), default="csv")
    p.add_argument("--jobs", type=int, default=os.cpu_count())
    p.set_defaults(func=_cmd_embed)

    p = sub.add_parser("evaluate", help="cross-validated 5-NN error report")
    _add_io_flags(p)
    _add_protocol_flags(p)
    p.add_argument("--subset", default=None, metavar="I,J,...",
                   help="1-based graph indices to fuse")
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("simulate", help="error tables over a vertex-count grid")
    _add_sim_flags(p)
    _add_protocol_flags(p, folds=10)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("verify", help="convergence/identifiability/monotonicity checks")
    _add_sim_flags(p)
    _add_protocol_flags(p, folds=10)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("baseline", help="spectral baseline comparison tables")
    _add_sim_flags(p)
    _add_protocol_flags(p, folds=10)
    p.add_argument("--method", choices=("gfee", "omnibus", "mase", "use"),
                   required=True)
    p.add_argument("--dmax", type=int, default=None)
    p.set_defaults(func=_cmd_baseline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _ValidationFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - unexpected runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
