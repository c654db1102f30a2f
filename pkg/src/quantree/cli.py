"""Command line: ``forward``, ``invert``, ``compare`` and ``example``.

Exit codes: 0 success, 2 input error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .errors import InputError, NumericalError
from .forward import read_weyl_csv
from .io import EXAMPLES, load_graph, write_graph
from .local import SolverConfig
from .pipeline import _jsonable, compare_dir, run_forward, run_inverse, write_inverse_outputs

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3

log = logging.getLogger("quantree")


def _cmd_forward(args) -> int:
    graph, edges = load_graph(args.graph, require_potentials=True)
    run_forward(graph, edges, K=args.K, alpha_min=args.alpha_min, alpha_max=args.alpha_max,
                im_offset=args.im_offset, seed=args.seed, out=args.out)
    log.info("wrote %s", args.out)
    return EXIT_OK


def _config(args) -> SolverConfig:
    return SolverConfig(N=args.N, Nc=args.Nc, KD=args.KD, KN=args.KN, xm_points=args.xm_points,
                        use_type2=args.use_type2, drop_threshold=args.drop_threshold)


def _cmd_invert(args) -> int:
    graph, _ = load_graph(args.graph)
    samples = read_weyl_csv(args.weyl)
    if samples.M.shape[1] != graph.m:
        raise InputError(f"Weyl file has {samples.M.shape[1]} leaves, graph has {graph.m}")
    if all(isinstance(v, int) for v in samples.leaves) and not set(samples.leaves) <= set(graph.leaves):
        samples = type(samples)(samples.rho, samples.M, tuple(graph.leaves))
    cfg = _config(args)
    try:
        result = run_inverse(graph, samples, cfg)
    except NumericalError as exc:
        partial = getattr(exc, "partial", None)
        if partial is not None:
            write_inverse_outputs(partial, args.out_dir)
        raise
    write_inverse_outputs(result, args.out_dir)
    log.info("recovered %d edges into %s", len(result.edges), args.out_dir)
    return EXIT_OK


def _cmd_compare(args) -> int:
    _, edges = load_graph(args.graph, require_potentials=True)
    table = compare_dir(args.recovered, edges, args.out_dir)
    summary = {eid: {k: row[k] for k in ("max_abs_error", "max_rel_error")} for eid, row in table.items()}
    print(json.dumps(_jsonable(summary), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_example(args) -> int:
    write_graph(EXAMPLES[args.name](), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quantree", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("forward", help="sample the Weyl matrix of a tree with known potentials")
    f.add_argument("--graph", required=True, help="graph JSON with potentials")
    f.add_argument("--K", type=int, default=180, help="number of spectral points")
    f.add_argument("--alpha-min", type=float, default=0.0)
    f.add_argument("--alpha-max", type=float, default=2.0)
    f.add_argument("--im-offset", type=float, default=0.1)
    f.add_argument("--seed", type=int, default=1, help="seed of the alpha draw")
    f.add_argument("--out", required=True, help="output Weyl CSV")
    f.set_defaults(func=_cmd_forward)

    d = SolverConfig()
    i = sub.add_parser("invert", help="recover all edge potentials from Weyl samples")
    i.add_argument("--graph", required=True, help="graph JSON (topology; potentials ignored)")
    i.add_argument("--weyl", required=True, help="Weyl CSV written by 'forward'")
    i.add_argument("--out-dir", required=True)
    i.add_argument("--N", type=int, default=d.N, help="NSBF truncation order")
    i.add_argument("--Nc", type=int, default=None, help="coefficients used for t0 (default N)")
    i.add_argument("--KD", type=int, default=d.KD, help="Dirichlet eigenvalues used")
    i.add_argument("--KN", type=int, default=d.KN, help="Neumann eigenvalues used")
    i.add_argument("--xm-points", type=int, default=d.xm_points, help="interior points per edge")
    i.add_argument("--use-type2", choices=("none", "all"), default=d.use_type2)
    i.add_argument("--seed", type=int, default=1, help="accepted for symmetry; the inverse is deterministic")
    i.add_argument("--drop-threshold", type=float, default=d.drop_threshold)
    i.set_defaults(func=_cmd_invert)

    c = sub.add_parser("compare", help="error table of recovered potentials against a reference graph")
    c.add_argument("--recovered", required=True, help="directory with edge_<id>.csv files")
    c.add_argument("--graph", required=True, help="reference graph JSON with potentials")
    c.add_argument("--out-dir", default=None, help="where to write curve CSVs and errors.csv")
    c.set_defaults(func=_cmd_compare)

    e = sub.add_parser("example", help="write one of the built-in example graphs")
    e.add_argument("name", choices=sorted(EXAMPLES))
    e.add_argument("--out", required=True)
    e.set_defaults(func=_cmd_example)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
