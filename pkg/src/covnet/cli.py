"""``covnet`` command line.

Exit codes: 0 success, 2 invariant violation, 3 parse/shape error,
4 oracle-limit refusal.
"""

from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from .errors import CovnetError
from .generate import KINDS, GeneratorSpec, generate_instance
from .graph import classify_demands, load_cost
from .harness import batch, verify
from .io import (
    certificate_to_json,
    dumps,
    instance_to_json,
    load_json,
    read_instance,
    solution_to_json,
    spanner_to_json,
)
from .laminar import solve_laminar
from .oracle import OracleLimits, exact_coverage_optimum
from .spanner import build_group_spanner, certify_spanner
from .sunflower import solve_sunflower


def _emit(text: str, path: str | None) -> None:
    if path:
        Path(path).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    spec = GeneratorSpec(kind=args.kind, n=args.n, m=args.m if args.m is not None else args.n,
                         g=args.g, depth=args.depth, seed=args.seed, model=args.model,
                         group_size=args.group_size)
    _emit(dumps(instance_to_json(generate_instance(spec))), args.output)
    return 0


def cmd_solve(args) -> int:
    inst = read_instance(args.input)
    algo = args.algo
    if algo == "auto":
        algo = "laminar" if classify_demands(inst).laminar else "sunflower"
    if algo == "laminar":
        sol, cert = solve_laminar(inst)
        doc = solution_to_json(sol, load_cost(inst, sol), algo="laminar", primal=cert.primal,
                               dual=cert.dual, ratio_bound="2")
        if args.certificate:
            Path(args.certificate).write_text(dumps(certificate_to_json(cert)), encoding="utf-8")
    else:
        limits = OracleLimits.parse(args.limits, OracleLimits.from_env())
        res = solve_sunflower(inst, args.bound, limits)
        doc = solution_to_json(res.routing, res.cost, algo="sunflower", lower_bound=res.lower_bound,
                               bound_mode=res.bound_mode, ratio=res.ratio, ratio_bound=str(res.ratio_bound),
                               spanner_edges=len(res.spanner.h), L=res.spanner.L)
    _emit(dumps(doc), args.output)
    return 0


def cmd_spanner(args) -> int:
    inst = read_instance(args.input)
    groups = [grp.terminals for grp in inst.groups]
    res = build_group_spanner(inst.graph, groups)
    certs = certify_spanner(res, inst.graph, groups, args.oracle_limit) if args.certify else None
    _emit(dumps(spanner_to_json(res, certs)), args.output)
    return 2 if certs is not None and not certs["passed"] else 0


def cmd_oracle(args) -> int:
    inst = read_instance(args.input)
    limits = OracleLimits.parse(args.limits, OracleLimits.from_env())
    sol, opt = exact_coverage_optimum(inst, limits)
    doc = {"optimum": str(opt), "solution": solution_to_json(sol, opt)}
    _emit(dumps(doc), args.output)
    return 0


def cmd_verify(args) -> int:
    inst = read_instance(args.input)
    artifact = load_json(args.artifact)
    cert = load_json(args.certificate) if args.certificate else None
    limits = OracleLimits.parse(args.limits, OracleLimits.from_env())
    report = verify(inst, artifact, cert, limits, args.oracle_limit)
    _emit(dumps(report.to_json()), args.output)
    return 0 if report.passed else 2


def cmd_batch(args) -> int:
    text = Path(args.spec).read_text(encoding="utf-8")
    doc = load_json(args.spec) if text.strip() else None
    limits = OracleLimits.parse(args.limits, OracleLimits.from_env())
    table, ok = batch(doc, limits)
    _emit(table, args.output)
    return 0 if ok else 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="covnet", description="Network design with coverage costs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded random instance")
    p.add_argument("--kind", choices=KINDS, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, help="edge count (default n)")
    p.add_argument("--g", type=int, default=2)
    p.add_argument("--depth", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--model", choices=("random", "cycle"), default="random")
    p.add_argument("--group-size", type=int, default=3)
    p.add_argument("--output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve an instance")
    p.add_argument("--algo", choices=("laminar", "sunflower", "auto"), default="auto")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--certificate", help="write the laminar dual certificate here")
    p.add_argument("--bound", choices=("oracle", "relaxed"), default="relaxed")
    p.add_argument("--limits", help="oracle limits, e.g. e=14,g=3,k=10")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("spanner", help="build a group spanner")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--certify", action="store_true")
    p.add_argument("--oracle-limit", type=int, default=6)
    p.set_defaults(func=cmd_spanner)

    p = sub.add_parser("oracle", help="exact coverage optimum for small instances")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--limits")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("verify", help="check a solution, certificate or spanner")
    p.add_argument("--input", required=True)
    p.add_argument("--artifact", required=True)
    p.add_argument("--certificate")
    p.add_argument("--output")
    p.add_argument("--limits")
    p.add_argument("--oracle-limit", type=int, default=6)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("batch", help="run a seeded batch and print a CSV summary")
    p.add_argument("spec")
    p.add_argument("--output")
    p.add_argument("--limits")
    p.set_defaults(func=cmd_batch)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore" if args.command == "batch" else "default")
            return args.func(args)
    except CovnetError as exc:
        print(f"covnet: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"covnet: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
