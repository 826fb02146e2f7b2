"""Command line front end.

Exit status: 0 when every check passes (or a search completes), 1 when a
verification failure was found, 2 on usage or parse errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import harness
from .formats import ParseError, read_graph, write_graph
from .generators import FAMILIES, InstanceSpec

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


def _write_csv(path: Optional[str], rows: list[dict]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            harness.write_csv(rows, fh)


def cmd_verify(args: argparse.Namespace) -> int:
    mode = "exhaustive" if args.exhaustive else "sampled"
    jsonl = open(args.report, "w") if args.report else None
    try:
        report = harness.verify_theorem(
            args.k,
            args.n,
            mode=mode,
            trials=args.trials,
            seed=args.seed,
            oracle_every=args.oracle_every,
            jsonl=jsonl,
            debug=args.debug,
        )
    finally:
        if jsonl is not None:
            jsonl.close()
    summary = report.summary()
    _write_csv(args.csv, [summary])
    print(json.dumps(report.to_json() if args.verbose else summary, indent=1))
    for rep in report.failures:
        print(f"FAILURE {rep.label}: {rep.failure}", file=sys.stderr)
    return EXIT_OK if report.ok else EXIT_FAIL


def _load_suite(spec: str) -> list:
    if spec == "builtin":
        return harness.builtin_bounds_suite()
    path = Path(spec)
    if path.is_dir():
        return [(str(p), read_graph(p)) for p in sorted(path.iterdir()) if p.is_file()]
    if path.suffix == ".jsonl":
        from .formats import parse_json

        return [
            (f"{path}:{i}", parse_json(line))
            for i, line in enumerate(path.read_text().splitlines(), start=1)
            if line.strip()
        ]
    return [(str(path), read_graph(path))]


def cmd_bounds(args: argparse.Namespace) -> int:
    checks = harness.bounds_registry(_load_suite(args.suite))
    rows = []
    for chk in checks:
        status = "pass" if chk.passed else "FAIL"
        p = chk.parameters
        print(
            f"{status} {chk.bound:17s} k={p['k']} [{p['variant']}] "
            f"observed={chk.observed} claimed={chk.claimed} over {len(p['instances'])} instance(s)"
        )
        rows.append(
            {
                "bound": chk.bound,
                "k": p["k"],
                "variant": p["variant"],
                "instances": len(p["instances"]),
                "observed": chk.observed,
                "claimed": chk.claimed,
                "passed": chk.passed,
            }
        )
    _write_csv(args.csv, rows)
    return EXIT_OK if all(c.passed for c in checks) else EXIT_FAIL


def cmd_search(args: argparse.Namespace) -> int:
    result = harness.search_tightness(
        args.k, args.n_min, args.n_max, args.budget, seed=args.seed, out_dir=args.out
    )
    for n in result.n_values:
        b = result.best[n]
        print(f"n={n}: smallest capped rainbow size seen {b['size']} (energy {b['energy']:.3f})")
    if result.witnesses:
        for w in result.witnesses:
            print(f"witness (re-verified): {w}")
    else:
        print("no witness found; this is inconclusive")
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    params = {}
    for key in ("n", "k", "m", "palette", "p", "seed"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    if args.square:
        params["square"] = json.loads(Path(args.square).read_text())
    try:
        graph = InstanceSpec(args.family, params).build()
    except KeyError as exc:
        raise UsageError(f"family {args.family} needs parameter --{exc.args[0]}") from None
    if args.out:
        write_graph(graph, args.out)
    else:
        from .formats import format_text

        sys.stdout.write(format_text(graph))
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    report = harness.run_file(args.file, args.k)
    print(json.dumps(report.to_json(), indent=1))
    return EXIT_FAIL if report.failure else EXIT_OK


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rainbow", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="check the finder and oracle on a suite of graphs")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exhaustive", action="store_true", help="all colourings up to renaming (n <= 5)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--oracle-every", type=int, default=1, help="run the oracle on every j-th instance")
    p.add_argument("--report", help="per-instance JSON-lines output")
    p.add_argument("--csv", help="aggregate CSV output")
    p.add_argument("--debug", action="store_true", help="check state invariants after every step")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("bounds", help="compare exact maxima with the cited lower bounds")
    p.add_argument("--suite", default="builtin", help="'builtin', a graph file, a directory or a .jsonl")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("search", help="look for graphs with no size-k rainbow matching")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--budget", type=int, default=10_000, help="moves per value of n")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="search-out", help="directory for log and witnesses")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("gen", help="write an instance")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--palette", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--square", help="JSON file holding a Latin square")
    p.add_argument("--out", help="output path (.json for JSON, text otherwise)")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("run", help="evaluate one graph file")
    p.add_argument("--file", required=True)
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(func=cmd_run)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ParseError, UsageError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
