"""Command-line driver: ``itpn build|diff|bounds|wcrt|simulate``."""

import argparse
import sys

from .bound import fmt
from .graph import EQUIVALENCES, METHODS, TDIS_IDENTITIES, BoundExceeded, BuildOptions, build, diff_graphs
from .io import ParseError, dump_stats, export_dot, load_model, stats_record
from .model import ContractError, random_run
from .polyhedra import OracleBudgetExceeded
from .quant import InvalidPath, PathQuery, TaskSpec, path_duration_bounds, response_time

EXIT_OK, EXIT_FAIL, EXIT_PARSE, EXIT_BOUNDED, EXIT_BUDGET = 0, 1, 2, 3, 4


def _open_out(name):
    return sys.stdout if name == "-" else open(name, "w")


def _write(name, text):
    if name == "-":
        sys.stdout.write(text)
    else:
        with open(name, "w") as f:
            f.write(text)


def _graph(net, args, method=None):
    opts = BuildOptions(method=method or args.method, equivalence=args.equiv,
                        max_classes=args.max_classes, max_depth=args.max_depth,
                        tdis_identity=args.tdis_identity)
    return build(net, opts)


def _seq(net, text):
    return tuple(net.tindex(t.strip()) for t in text.split(",") if t.strip())


def _names(net, seq):
    return ",".join(net.transitions[t] for t in seq)


def cmd_build(net, args):
    status = EXIT_OK
    try:
        g = _graph(net, args)
    except BoundExceeded as e:
        print(f"bounded: {e}", file=sys.stderr)
        g, status = e.graph, EXIT_BOUNDED
    if args.dot:
        _write(args.dot, export_dot(net, g, args.verbosity))
    record = stats_record(g)
    if args.stats:
        _write(args.stats, dump_stats(record) + "\n")
    else:
        print(f"{g.method}: {record['classes']} classes, {record['edges']} edges "
              f"({record['time_ms']} ms)")
    return status


def cmd_diff(net, args):
    methods = [m.strip() for m in args.methods.split(",")]
    if len(methods) != 2 or any(m not in METHODS for m in methods):
        print("--methods needs two of " + ",".join(METHODS), file=sys.stderr)
        return EXIT_FAIL
    graphs = []
    status = EXIT_OK
    for m in methods:
        try:
            graphs.append(_graph(net, args, m))
        except BoundExceeded as e:
            graphs.append(e.graph)
            status = EXIT_BOUNDED
    d = diff_graphs(graphs[0], graphs[1], args.depth)
    for label, seqs in ((methods[0], d.only_first), (methods[1], d.only_second)):
        print(f"only in {label}: {len(seqs)}")
        for s in seqs:
            print("  " + _names(net, s))
    return status


def cmd_bounds(net, args):
    g = _graph(net, args)
    q = PathQuery(_seq(net, args.path), 0, args.origin)
    lo, hi = path_duration_bounds(g, q)
    print(f"[{fmt(lo)}, {fmt(hi)}]")
    return EXIT_OK


def cmd_wcrt(net, args):
    g = _graph(net, args)
    task = TaskSpec(net.tindex(args.start), net.tindex(args.end))
    r = response_time(g, task, args.max_len, args.max_paths)
    if not r.found:
        print(f"no path from {args.start} to {args.end}")
        return EXIT_FAIL
    print(f"BCRT {fmt(r.bcrt)}  WCRT {fmt(r.wcrt)}  paths {r.paths}"
          + ("  (truncated)" if r.truncated else ""))
    return EXIT_BOUNDED if r.truncated else EXIT_OK


def cmd_simulate(net, args):
    run = random_run(net, args.steps, args.seed)
    for t, theta in run.steps:
        print(f"{net.transitions[t]} @ {fmt(theta)}")
    if run.deadlocked:
        print("deadlock")
    if args.check_against:
        g = _graph(net, args, args.check_against)
        if g.follow(run.untimed()) is None:
            print(f"run is not a path of the {args.check_against} graph")
            return EXIT_FAIL
        print(f"run replays in the {args.check_against} graph")
    return EXIT_OK


def parser():
    p = argparse.ArgumentParser(prog="itpn", description="State-class graphs of time Petri nets with inhibitor arcs")
    sub = p.add_subparsers(dest="cmd", required=True)

    def common(sp, method=True):
        sp.add_argument("model")
        if method:
            sp.add_argument("--method", choices=METHODS, default="tdis")
        sp.add_argument("--equiv", choices=EQUIVALENCES, default="equality")
        sp.add_argument("--tdis-identity", choices=TDIS_IDENTITIES, default="dbm")
        sp.add_argument("--max-classes", type=int, default=100_000)
        sp.add_argument("--max-depth", type=int, default=None)

    b = sub.add_parser("build", help="build a state-class graph")
    common(b)
    b.add_argument("--dot")
    b.add_argument("--verbosity", choices=("id", "marking", "full"), default="marking")
    b.add_argument("--stats")

    d = sub.add_parser("diff", help="compare untimed languages of two graphs")
    common(d, method=False)
    d.add_argument("--methods", required=True)
    d.add_argument("--depth", type=int, required=True)

    q = sub.add_parser("bounds", help="duration bounds of a path from the root")
    common(q)
    q.add_argument("--path", required=True)
    q.add_argument("--from", dest="origin", type=int, default=None)

    w = sub.add_parser("wcrt", help="best/worst-case response time of a task")
    common(w)
    w.add_argument("--start", required=True)
    w.add_argument("--end", required=True)
    w.add_argument("--max-len", type=int, default=64)
    w.add_argument("--max-paths", type=int, default=10000)

    s = sub.add_parser("simulate", help="random concrete run")
    common(s, method=False)
    s.add_argument("--steps", type=int, default=10)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--check-against", choices=METHODS)
    return p


COMMANDS = {"build": cmd_build, "diff": cmd_diff, "bounds": cmd_bounds,
            "wcrt": cmd_wcrt, "simulate": cmd_simulate}


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        net = load_model(args.model)
    except ParseError as e:
        print(f"{args.model}: {e}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as e:
        print(e, file=sys.stderr)
        return EXIT_FAIL
    try:
        return COMMANDS[args.cmd](net, args)
    except OracleBudgetExceeded as e:
        print(f"oracle budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except BoundExceeded as e:
        print(f"bounded: {e}", file=sys.stderr)
        return EXIT_BOUNDED
    except (InvalidPath, ContractError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
