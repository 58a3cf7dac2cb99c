"""Command-line surface: exact reports, Monte Carlo simulation, instance
generation, and theoretical-curve sweeps; results go out as CSV.

Exit codes: 2 bad flags or domain errors, 3 capacity exceeded, 4 malformed
instance file.
"""

from __future__ import annotations

import argparse
import os
import sys

from .experiments import (CSV_HEADER, ExperimentConfig, csv_row, exact_report,
                          monte_carlo, theoretical_curve)
from .generators import parse_generator_spec
from .graph import InstanceParseError, parse_instance, serialize_instance
from .solvers import CapacityError

EXIT_USAGE = 2
EXIT_CAPACITY = 3
EXIT_PARSE = 4


def _load_instance(args):
    if getattr(args, "instance", None):
        with open(args.instance, "r", encoding="utf-8") as fh:
            inst = parse_instance(fh.read())
        return inst, os.path.basename(args.instance)
    if getattr(args, "generator", None):
        return parse_generator_spec(args.generator), args.generator
    raise ValueError("one of --instance or --generator is required")


def _load_second_face(args, inst):
    if not getattr(args, "faces", None):
        return None
    with open(args.faces, "r", encoding="utf-8") as fh:
        other = parse_instance(fh.read())
    same_topology = (other.kind == inst.kind
                     and other.left_size == inst.left_size
                     and other.right_size == inst.right_size
                     and other.vertex_count == inst.vertex_count
                     and all(e1[:2] == e2[:2]
                             for e1, e2 in zip(other.edges, inst.edges))
                     and other.m == inst.m)
    if not same_topology:
        raise ValueError("--faces file must have the same topology as the instance")
    return tuple(w for _, _, w in other.edges)


def _emit(lines, out_path):
    text = "\n".join(lines) + "\n"
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _add_run_flags(sub, monte: bool):
    src = sub.add_mutually_exclusive_group(required=True)
    src.add_argument("--instance", help="instance file path")
    src.add_argument("--generator", help='generator spec, e.g. "tight-vertex k=8 p=0.5"')
    sub.add_argument("--model", required=True,
                     choices=["random-order", "aosp", "two-faced"])
    sub.add_argument("--arrival", required=True, choices=["vertex", "edge"])
    sub.add_argument("--algorithm", default="greedy-based",
                     choices=["greedy-based", "thresholded", "opt-based"])
    sub.add_argument("--adversary", default="worst",
                     help="worst (default), or ascending/descending/random for edges")
    sub.add_argument("--p", type=float, nargs="+", required=True,
                     help="sampling probabilities; one CSV row each")
    sub.add_argument("--faces", help="second-face instance file (two-faced model)")
    sub.add_argument("--limit", type=int, default=20,
                     help="exact enumeration limit (items)")
    sub.add_argument("--seed", type=int, default=0)
    if monte:
        sub.add_argument("--trials", type=int, required=True)
    sub.add_argument("--out", help="write CSV here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchlab",
        description="greedy-based online matching: exact and Monte Carlo "
                    "competitive-ratio measurement")
    subs = parser.add_subparsers(dest="command", required=True)

    ex = subs.add_parser("exact", help="closed-form expectation over all samples")
    _add_run_flags(ex, monte=False)

    sim = subs.add_parser("simulate", help="Monte Carlo estimate")
    _add_run_flags(sim, monte=True)

    gen = subs.add_parser("generate", help="write a generated instance file")
    gen.add_argument("spec", nargs="+",
                     help='generator spec tokens, e.g. tight-vertex k=1 p=0.5')
    gen.add_argument("--out", help="output path (stdout if omitted)")

    cur = subs.add_parser("curve", help="theoretical competitive-ratio values")
    cur.add_argument("--model", required=True,
                     choices=["random-order", "aosp", "two-faced"])
    cur.add_argument("--arrival", required=True, choices=["vertex", "edge"])
    cur.add_argument("--p", type=float, nargs="+", required=True)
    cur.add_argument("--out", help="write output here instead of stdout")
    return parser


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "generate":
            inst = parse_generator_spec(" ".join(args.spec))
            _emit([serialize_instance(inst).rstrip("\n")], args.out)
            return 0
        if args.command == "curve":
            lines = [f"{p:.10g},{theoretical_curve(args.model, args.arrival, p):.12g}"
                     for p in args.p]
            _emit(lines, args.out)
            return 0
        inst, instance_id = _load_instance(args)
        second_face = _load_second_face(args, inst)
        lines = [CSV_HEADER]
        for p in args.p:
            config = ExperimentConfig(
                model=args.model, arrival=args.arrival, p=p,
                algorithm=args.algorithm, adversary=args.adversary,
                mode="exact" if args.command == "exact" else "monte-carlo",
                trials=getattr(args, "trials", 0), seed=args.seed,
                enumeration_limit=args.limit, second_face=second_face)
            if args.command == "exact":
                est = exact_report(inst, config)
            else:
                est = monte_carlo(inst, config)
            lines.append(csv_row(config, est, instance_id))
        _emit(lines, args.out)
        return 0
    except InstanceParseError as exc:
        print(f"matchlab: parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except CapacityError as exc:
        print(f"matchlab: capacity: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ValueError, OSError, KeyError) as exc:
        print(f"matchlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
