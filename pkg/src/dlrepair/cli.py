"""Command-line interface.

Exit status: 0 on success (or a true answer / found repair), 1 for a false
answer or no repair, 2 when a budget-capped search comes back empty, 64 for
usage errors, 65 for input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import repair as repair_mod
from . import sat as sat_mod
from . import setcover as setcover_mod
from .classify import classify
from .engine import eval_member
from .model import ArityMismatch, Instance, InvalidUpdate, Program, Update
from .parser import (
    SourceError,
    parse_fact,
    parse_instance,
    parse_program,
    parse_tuple,
    render_fact,
    render_instance,
    render_program,
    render_tuple,
)

EXIT_OK = 0
EXIT_FALSE = 1
EXIT_BUDGET = 2
EXIT_USAGE = 64
EXIT_INPUT = 65

_STATUS_EXIT = {
    repair_mod.FOUND: EXIT_OK,
    repair_mod.NO_REPAIR: EXIT_FALSE,
    repair_mod.BUDGET_EXHAUSTED: EXIT_BUDGET,
}


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: A003 - argparse API
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="dlrepair", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def io_args(p: _Parser, data: bool = True, tup: bool = True) -> None:
        p.add_argument("-q", "--query", required=True, help="query file (.dl)")
        if data:
            p.add_argument("-d", "--data", required=True, help="fact database file (.facts)")
        if tup:
            p.add_argument("-t", "--tuple", required=True, dest="tuple_text", help='target tuple, e.g. "(a,b)"')

    io_args(sub.add_parser("classify", help="report the query's syntactic fragment"), data=False, tup=False)
    io_args(sub.add_parser("eval", help="is the tuple in the answer?"))
    io_args(sub.add_parser("decide", help="does any repair exist?"))
    p_bound = sub.add_parser("bound", help="does a repair of size at most k exist?")
    io_args(p_bound)
    p_bound.add_argument("-k", type=int, required=True)
    p_size = sub.add_parser("size", help="minimum repair size")
    io_args(p_size)
    p_size.add_argument("--budget", type=int, default=None)
    p_rep = sub.add_parser("repair", help="compute a minimum repair")
    io_args(p_rep)
    p_rep.add_argument("--budget", type=int, default=None)
    p_rep.add_argument("--oracle", action="store_true", help="use the brute-force reference search")
    p_rep.add_argument("--json", action="store_true", dest="as_json")
    io_args(sub.add_parser("sat", help="is the query satisfiable?"), data=False, tup=False)
    p_gen = sub.add_parser("gen-setcover", help="generate a random set-cover instance")
    p_gen.add_argument("--seed", type=int, required=True)
    p_gen.add_argument("-n", type=int, required=True, help="universe size")
    p_gen.add_argument("-m", type=int, required=True, help="number of sets")
    p_gen.add_argument("--density", type=float, required=True)
    p_red = sub.add_parser("reduce-setcover", help="translate a set-cover instance into a repair problem")
    p_red.add_argument("-i", "--input", required=True, help="set-cover file")
    p_red.add_argument("-o", "--outdir", required=True)
    p_ext = sub.add_parser("extract-cover", help="turn a repair back into a set cover")
    p_ext.add_argument("-i", "--input", required=True, help="set-cover file")
    p_ext.add_argument("--repair", required=True, dest="repair_json", help="repair JSON file")
    return parser


def _load(args) -> tuple[Program, Instance | None, tuple[str, ...] | None]:
    program = parse_program(Path(args.query).read_text())
    instance = None
    target = None
    if getattr(args, "data", None) is not None:
        instance = parse_instance(Path(args.data).read_text())
    if getattr(args, "tuple_text", None) is not None:
        target = parse_tuple(args.tuple_text)
    return program, instance, target


def _repair_json(result: repair_mod.RepairResult) -> str:
    payload = {
        "status": result.status,
        "size": result.size,
        "insert": [render_fact(f) for f in sorted(result.repair.insertions)] if result.repair else [],
        "delete": [render_fact(f) for f in sorted(result.repair.deletions)] if result.repair else [],
        "witness_assignment": dict(sorted(result.witness_assignment.items()))
        if result.witness_assignment is not None
        else None,
    }
    return json.dumps(payload)


def _print_repair(result: repair_mod.RepairResult, out) -> None:
    print(f"status: {result.status}", file=out)
    if result.status != repair_mod.FOUND:
        return
    print(f"size: {result.size}", file=out)
    for f in sorted(result.repair.insertions):
        print(f"insert: {render_fact(f)}", file=out)
    for f in sorted(result.repair.deletions):
        print(f"delete: {render_fact(f)}", file=out)
    if result.witness_assignment:
        pairs = ", ".join(f"{k}={v}" for k, v in sorted(result.witness_assignment.items()))
        print(f"witness: {pairs}", file=out)


def _oracle_defaults(program: Program, instance: Instance, target: tuple[str, ...], budget: int | None):
    flags = classify(program)
    if flags.is_ucq:
        domain = repair_mod.SearchDomain.for_ucq(program, instance, target)
        if budget is None:
            budget = max(
                (r.positive_count() + r.negative_count() for r in program.rules), default=0
            )
    elif flags.is_positive_datalog:
        domain = repair_mod.SearchDomain.for_positive_datalog(program, instance, target)
        if budget is None:
            budget = repair_mod.DEFAULT_SP_BUDGET
    else:
        if budget is None:
            budget = repair_mod.DEFAULT_SP_BUDGET
        domain = repair_mod.SearchDomain.for_spdatalog(program, instance, target, budget)
    return domain, budget


def _read_repair_json(path: str) -> Update:
    data = json.loads(Path(path).read_text())
    ins = [parse_fact(s, allow_fresh=True) for s in data.get("insert", [])]
    dels = [parse_fact(s, allow_fresh=True) for s in data.get("delete", [])]
    return Update.of(ins, dels)


def run(argv: list[str], out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        args = _build_parser().parse_args(argv)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=err)
        return EXIT_USAGE

    try:
        if args.command == "classify":
            program, _, _ = _load(args)
            for name, value in classify(program).as_dict().items():
                print(f"{name}: {str(value).lower()}", file=out)
            return EXIT_OK

        if args.command == "eval":
            program, instance, target = _load(args)
            member = eval_member(program, instance, target)
            print(str(member).lower(), file=out)
            return EXIT_OK if member else EXIT_FALSE

        if args.command == "decide":
            program, instance, target = _load(args)
            exists = sat_mod.ma_dec(program, instance, target)
            print(str(exists).lower(), file=out)
            return EXIT_OK if exists else EXIT_FALSE

        if args.command == "bound":
            program, instance, target = _load(args)
            ok = repair_mod.ma_bound(program, instance, target, args.k)
            print(str(ok).lower(), file=out)
            return EXIT_OK if ok else EXIT_FALSE

        if args.command == "size":
            program, instance, target = _load(args)
            result = repair_mod.ma_min(program, instance, target, budget=args.budget)
            if result.status == repair_mod.FOUND:
                print(result.size, file=out)
            else:
                print(result.status.replace("_", " "), file=out)
            return _STATUS_EXIT[result.status]

        if args.command == "repair":
            program, instance, target = _load(args)
            if args.oracle:
                domain, budget = _oracle_defaults(program, instance, target, args.budget)
                result = repair_mod.oracle_ma_min(program, instance, target, domain, budget)
            else:
                result = repair_mod.ma_min(program, instance, target, budget=args.budget)
            if args.as_json:
                print(_repair_json(result), file=out)
            else:
                _print_repair(result, out)
            return _STATUS_EXIT[result.status]

        if args.command == "sat":
            program, _, _ = _load(args)
            flags = classify(program)
            if flags.is_ucq:
                result = sat_mod.sat_ucqneg(program)
            elif flags.is_positive_datalog:
                result = sat_mod.sat_datalog_positive(program)
            else:
                raise sat_mod.Unsupported("satisfiability for recursive programs with negation")
            print("satisfiable" if result.satisfiable else "unsatisfiable", file=out)
            if result.satisfiable and result.witness is not None:
                for fact in result.witness:
                    print(f"witness: {render_fact(fact)}", file=out)
            return EXIT_OK if result.satisfiable else EXIT_FALSE

        if args.command == "gen-setcover":
            cover = setcover_mod.generate(args.seed, args.n, args.m, args.density)
            out.write(setcover_mod.render_setcover(cover))
            return EXIT_OK

        if args.command == "reduce-setcover":
            cover = setcover_mod.parse_setcover(Path(args.input).read_text())
            program, instance, target = setcover_mod.reduce_f(cover)
            outdir = Path(args.outdir)
            outdir.mkdir(parents=True, exist_ok=True)
            (outdir / "query.dl").write_text(render_program(program))
            (outdir / "data.facts").write_text(render_instance(instance))
            (outdir / "tuple.txt").write_text(render_tuple(target) + "\n")
            for name in ("query.dl", "data.facts", "tuple.txt"):
                print(outdir / name, file=out)
            return EXIT_OK

        if args.command == "extract-cover":
            cover = setcover_mod.parse_setcover(Path(args.input).read_text())
            update = _read_repair_json(args.repair_json)
            for name in setcover_mod.extract_h(cover, update):
                print(name, file=out)
            return EXIT_OK

        raise AssertionError(f"unhandled command {args.command}")
    except (SourceError, ArityMismatch, InvalidUpdate, OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run(sys.argv[1:]))
