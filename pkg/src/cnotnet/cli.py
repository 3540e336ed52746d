"""Command-line entry point: ``cnotnet <command> [options]``.

Every table is written as CSV preceded by ``#``-prefixed JSON metadata
(tool version, resolved configuration, seeds, runtime), or as a single JSON
document with ``--format json``.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from contextlib import contextmanager

import numpy as np

from . import __version__
from .analysis import (
    SCAN_COLUMNS,
    BoundNotApplicable,
    FitError,
    bound_report,
    fit_scan,
    parse_n_range,
    power_law_fit,
    scan_connectivity,
)
from .channel import (
    CeilingError,
    attractor_projection,
    basis_projector,
    superoperator_gap,
    trajectory,
)
from .eigen import EigenError, LanczosConfig, LanczosNotConverged
from .groupwalk import (
    DEFAULT_GROUP_CAP,
    GroupOverflowError,
    bipartiteness_check,
    build_walk_matrix,
    direct_trace_phi_power,
    group_of,
    trace_phi_power,
    walk_spectrum,
)
from .induced import DisconnectedGraphError
from .network import RNG_NAME, InteractionGraph, NetworkError, make_topology
from .output import FORMAT_VERSION, csv_string, dumps, read_csv

log = logging.getLogger("cnotnet")

EXIT_OK = 0
EXIT_FAILED_CHECK = 1
EXIT_USAGE = 2
EXIT_ERROR = 3


class UsageError(ValueError):
    pass


def _pair(text: str) -> tuple[float, float]:
    parts = [float(x) for x in text.split(",")]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers, e.g. 1,2")
    return parts[0], parts[1]


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file whose keys mirror the long option names")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--output", "-o", help="output path (default: stdout)")
    common.add_argument("--seed", type=_u64, default=0, help="master seed")
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--no-assert", action="store_true", help="report bound violations as warnings")
    common.add_argument("--max-iterations", type=int, default=LanczosConfig.max_iterations)
    common.add_argument("--tolerance", type=float, default=LanczosConfig.tolerance)

    parser = argparse.ArgumentParser(prog="cnotnet", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("connectivity", parents=[common], help="scan algebraic connectivity over N")
    p.add_argument("--topology", default="complete")
    p.add_argument("--n", default="3..13", help="N range, e.g. 3..13 or 4,6,8")
    p.add_argument("--noise", type=float, default=None, help="noise epsilon in [0, 1]")
    p.add_argument("--replicas", type=int, default=20)
    p.add_argument("--fit", type=_pair, default=None, help="fit exponents e1,e2")
    p.add_argument("--fit-min", type=int, default=8)
    p.add_argument("--fit-output", help="where to write the fit JSON (default: stderr)")
    p.add_argument("--no-diameter", action="store_true", help="skip the diameter bound")

    p = sub.add_parser("bounds", parents=[common], help="check both connectivity lower bounds")
    p.add_argument("--topology", default="complete")
    p.add_argument("--n", default="3..10")
    p.add_argument("--graph", help="interaction graph JSON file (overrides --topology/--n)")

    p = sub.add_parser("fit", parents=[common], help="power-law fit of a connectivity CSV")
    p.add_argument("--input", "-i", required=True)
    p.add_argument("--exponents", type=_pair, default=(1.0, 2.0))
    p.add_argument("--fit-min", type=int, default=8)

    p = sub.add_parser("trajectory", parents=[common], help="distance to the attractor manifold over time")
    p.add_argument("--topology", default="complete")
    p.add_argument("--n", type=int, default=6)
    p.add_argument("--graph", help="interaction graph JSON file (overrides --topology/--n)")
    p.add_argument("--init", default="000001,101010,111111", help="comma-separated ket labels, qubit 0 first")
    p.add_argument("--steps", type=int, default=50)

    p = sub.add_parser("group", parents=[common], help="group walk, its spectrum and the trace identity")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--p", type=float, default=None, help="N=2 only: probability of CNOT(0->1)")
    p.add_argument("--topology", default="complete")
    p.add_argument("--cap", type=int, default=DEFAULT_GROUP_CAP)
    p.add_argument("--powers", type=int, default=10, help="compare traces for n = 0..POWERS")
    return parser


def parse_args(argv=None) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        with open(args.config) as fh:
            overrides = json.load(fh)
        sub = parser._subparsers._group_actions[0].choices[args.command]
        sub.set_defaults(**{k.replace("-", "_"): v for k, v in overrides.items()})
        args = parser.parse_args(argv)
    return args


def _lanczos(args) -> LanczosConfig:
    return LanczosConfig(max_iterations=args.max_iterations, tolerance=args.tolerance, seed=args.seed)


def _graph(args, n: int | None = None) -> InteractionGraph:
    if getattr(args, "graph", None):
        with open(args.graph) as fh:
            return InteractionGraph.from_json(fh.read())
    return make_topology(args.topology, n if n is not None else args.n)


def _metadata(args, started: float, **extra) -> dict:
    config = {k: v for k, v in vars(args).items() if k not in ("output",)}
    return {
        "format_version": FORMAT_VERSION,
        "tool": "cnotnet",
        "version": __version__,
        "command": args.command,
        "config": config,
        "seeds": {"master": args.seed, "noise_rng": RNG_NAME},
        "runtime_seconds": round(time.perf_counter() - started, 3),
        **extra,
    }


@contextmanager
def _sink(path):
    if path:
        with open(path, "w", newline="") as fh:
            yield fh
    else:
        yield sys.stdout


def _emit(args, columns, rows, meta, extra_json=None) -> None:
    with _sink(args.output) as fh:
        if args.format == "json":
            doc = {"metadata": meta, "columns": list(columns), "rows": [list(r) for r in rows]}
            doc.update(extra_json or {})
            fh.write(dumps(doc, indent=1) + "\n")
        else:
            fh.write(csv_string(columns, rows, meta))


def _check(ok: bool, message: str, args) -> bool:
    if ok:
        return True
    if args.no_assert:
        log.warning("%s", message)
        return True
    log.error("%s", message)
    return False


def cmd_connectivity(args, started) -> int:
    ns = parse_n_range(args.n)
    if not ns or min(ns) < 2:
        raise UsageError(f"N range {args.n!r} must contain only values >= 2")
    if args.replicas < 1:
        raise UsageError("--replicas must be at least 1")
    points = scan_connectivity(args.topology, ns, args.noise, args.replicas, args.seed,
                               _lanczos(args), args.threads, with_diameter=not args.no_diameter)
    rows = [p.row() for p in points]
    fit = fit_scan(points, args.fit, args.fit_min).to_dict() if args.fit else None
    meta = _metadata(args, started, fit=fit)
    _emit(args, SCAN_COLUMNS, rows, meta, {"fit": fit})
    if fit is not None and args.format == "csv":
        text = dumps(fit, indent=1) + "\n"
        if args.fit_output:
            with open(args.fit_output, "w") as fh:
                fh.write(text)
        else:
            sys.stderr.write(text)
    ok = True
    for p in points:
        if args.no_diameter:
            continue
        ok &= _check(p.bounds_hold, f"lower bound violated at N={p.n_qubits}", args)
    return EXIT_OK if ok else EXIT_FAILED_CHECK


def cmd_bounds(args, started) -> int:
    graphs = [_graph(args)] if args.graph else [make_topology(args.topology, n) for n in parse_n_range(args.n)]
    columns = ("N", "gamma", "diameter", "bound19", "bound19_ok", "bound21", "bound21_ok")
    rows, ok = [], True
    for g in graphs:
        r = bound_report(g, args.topology, _lanczos(args))
        rows.append((g.n_qubits, r.gamma, r.diameter, r.diameter_bound, r.diameter_ok,
                     "" if r.min_weight_bound is None else r.min_weight_bound,
                     "" if r.min_weight_ok is None else r.min_weight_ok))
        ok &= _check(r.satisfied, f"lower bound violated at N={g.n_qubits}", args)
    _emit(args, columns, rows, _metadata(args, started))
    return EXIT_OK if ok else EXIT_FAILED_CHECK


def cmd_fit(args, started) -> int:
    with open(args.input) as fh:
        _, rows = read_csv(fh.read())
    points = [(int(r["N"]), float(r["gamma_mean"])) for r in rows]
    fit = power_law_fit(points, args.exponents, args.fit_min).to_dict()
    fit["metadata"] = _metadata(args, started)
    with _sink(args.output) as fh:
        fh.write(dumps(fit, indent=1) + "\n")
    return EXIT_OK


def cmd_trajectory(args, started) -> int:
    g = _graph(args)
    labels = [s.strip() for s in args.init.split(",") if s.strip()]
    if not labels:
        raise UsageError("--init needs at least one basis state")
    if args.steps < 1:
        raise UsageError("--steps must be at least 1")
    projection = attractor_projection(g)
    gap = superoperator_gap(g, projection, _lanczos(args))
    rows, ok = [], True
    for label in labels:
        traj = trajectory(g, basis_projector(label, g.n_qubits), args.steps, projection, gap.beta_star, label)
        for step, dist, bound in traj.rows():
            rows.append((label, step, dist, bound))
            ok &= _check(dist <= bound + 1e-9, f"{label}: distance exceeds bound at step {step}", args)
    meta = _metadata(args, started, graph=g.to_dict(), beta_star=gap.beta_star,
                     lambda_2=gap.lambda_2, lambda_min=gap.lambda_min, attractor_dim=projection.dim)
    _emit(args, ("init", "step", "distance", "bound"), rows, meta)
    return EXIT_OK if ok else EXIT_FAILED_CHECK


def cmd_group(args, started) -> int:
    if args.p is not None:
        if args.n != 2:
            raise UsageError("--p is only meaningful with --n 2")
        g = InteractionGraph(2, ((0, 1, args.p), (1, 0, 1.0 - args.p)))
    else:
        g = make_topology(args.topology, args.n)
    gt = group_of(g, args.cap)
    w = build_walk_matrix(gt, g.probabilities)
    doc = {"order": gt.order, "generators": [list(x) for x in g.pairs], "probabilities": g.probabilities}
    if gt.order <= 4096:
        values, _ = walk_spectrum(w)
        unit = np.abs(values) >= 1 - 1e-9
        inside = np.abs(values[~unit])
        doc["W"] = w.to_dense()
        doc["spectrum"] = values
        doc["subleading"] = float(inside.max()) if inside.size else None
    bipartite, _ = bipartiteness_check(gt, w)
    doc["bipartite"] = bipartite
    table, ok = [], True
    for k in range(args.powers + 1):
        via_walk = trace_phi_power(gt, w, k)
        direct = direct_trace_phi_power(g, k)
        table.append({"n": k, "walk": via_walk, "direct": direct, "diff": abs(via_walk - direct)})
        ok &= _check(abs(via_walk - direct) <= 1e-10, f"trace identity fails at n={k}", args)
    doc["trace_table"] = table
    doc["metadata"] = _metadata(args, started)
    with _sink(args.output) as fh:
        fh.write(dumps(doc, indent=1) + "\n")
    return EXIT_OK if ok else EXIT_FAILED_CHECK


COMMANDS = {
    "connectivity": cmd_connectivity,
    "bounds": cmd_bounds,
    "fit": cmd_fit,
    "trajectory": cmd_trajectory,
    "group": cmd_group,
}


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, started)
    except (GroupOverflowError, LanczosNotConverged, CeilingError, DisconnectedGraphError,
            BoundNotApplicable, FitError, EigenError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR
    except (UsageError, NetworkError, ValueError) as exc:
        log.error("usage: %s", exc)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
