"""Command-line surface.

Subcommands: run (evaluate a term under one of three engines), check
(orthogonality diagnostics), tier (check or infer tier signatures), compile
(function definitions to a rewrite program), bench (cost curves as CSV).

Exit codes: 0 ok, 1 analysis found problems or engines disagreed, 2 bad
input (parse or validation), 3 stuck term, 4 budget exceeded.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import dataclass
from typing import Optional, Union

from .bigstep import MemoStats, eval_memo, naive_run
from .errors import (
    BudgetExceededError,
    MemotrsError,
    ParseError,
    StuckError,
)
from .grsr import (
    TierSignature,
    check_tiers_explained,
    compile_function,
    default_tier_bound,
    infeasibility_reason,
    infer_tiers,
    rename_operations,
)
from .grsr_parser import GrsrDef, parse_grsr
from .heap import Heap
from .parser import (
    format_program,
    format_term,
    parse_program,
    parse_program_loose,
    parse_term,
)
from .smallstep import ELoc, initial_expression, run, run_traced
from .terms import (
    App,
    Program,
    Term,
    minimal_shared_size,
    program_diagnostics,
    term_size,
)

DEFAULT_NAIVE_BUDGET = 10**7
DEFAULT_DEPTH_CAP = 16
# sizes at or above this print as a marker instead of a number
OVERFLOW_LIMIT = 2**63


@dataclass
class RunReport:
    engine: str
    input_text: str
    value_text: str
    dag_nodes: int
    unfolded_size: Union[int, str]
    cost_m: int
    total_steps: int
    heap_size: Optional[int]
    cache_size: Optional[int]
    wall_ns: int


def _size_or_overflow(n: int) -> Union[int, str]:
    return n if n < OVERFLOW_LIMIT else "overflow"


def _run_naive(
    program: Program, term: Term, text: str, budget: Optional[int], depth_cap: int
) -> tuple[RunReport, Term]:
    t0 = time.perf_counter_ns()
    res = naive_run(program, term, budget)
    wall = time.perf_counter_ns() - t0
    report = RunReport(
        engine="naive",
        input_text=text,
        value_text=format_term(res.value, max_depth=depth_cap, compress=True),
        dag_nodes=minimal_shared_size([res.value]),
        unfolded_size=_size_or_overflow(term_size(res.value)),
        cost_m=res.rewrite_steps,
        total_steps=res.total_steps,
        heap_size=None,
        cache_size=None,
        wall_ns=wall,
    )
    return report, res.value


def _run_memo(
    program: Program, term: Term, text: str, budget: Optional[int], depth_cap: int
) -> tuple[RunReport, Term]:
    stats = MemoStats()
    t0 = time.perf_counter_ns()
    out = eval_memo(program, {}, term, budget=budget, stats=stats)
    wall = time.perf_counter_ns() - t0
    report = RunReport(
        engine="memo",
        input_text=text,
        value_text=format_term(out.value, max_depth=depth_cap, compress=True),
        dag_nodes=minimal_shared_size([out.value]),
        unfolded_size=_size_or_overflow(term_size(out.value)),
        cost_m=out.cost,
        total_steps=stats.work,
        heap_size=None,
        cache_size=len(out.cache),
        wall_ns=wall,
    )
    return report, out.value


def _run_shared(
    program: Program,
    term: Term,
    text: str,
    budget: Optional[int],
    depth_cap: int,
    dot_path: Optional[str] = None,
    trace_path: Optional[str] = None,
) -> tuple[RunReport, Term]:
    heap, expr = initial_expression(program, Heap.empty(), term)
    t0 = time.perf_counter_ns()
    if trace_path is not None:
        with open(trace_path, "w", newline="") as fh:
            cfg, stats = run_traced(program, heap, expr, fh, step_budget=budget)
    else:
        cfg, stats = run(program, heap, expr, step_budget=budget)
    wall = time.perf_counter_ns() - t0
    assert isinstance(cfg.expr, ELoc)
    loc = cfg.expr.loc
    value = cfg.heap.unfold(loc)
    if dot_path is not None:
        with open(dot_path, "w", newline="") as fh:
            fh.write(cfg.heap.to_dot([loc]))
    report = RunReport(
        engine="shared",
        input_text=text,
        value_text=format_term(value, max_depth=depth_cap, compress=True),
        dag_nodes=cfg.heap.reachable_count(loc),
        unfolded_size=_size_or_overflow(cfg.heap.unfolded_size(loc)),
        cost_m=stats.applies,
        total_steps=stats.total,
        heap_size=cfg.heap.node_count,
        cache_size=len(cfg.cache),
        wall_ns=wall,
    )
    return report, value


_ENGINES = {"naive": _run_naive, "memo": _run_memo, "shared": _run_shared}


def _print_report(r: RunReport, out) -> None:
    out.write(f"engine: {r.engine}\n")
    out.write(f"input: {r.input_text}\n")
    out.write(f"value: {r.value_text}\n")
    out.write(f"value dag nodes: {r.dag_nodes}\n")
    out.write(f"unfolded size: {r.unfolded_size}\n")
    out.write(f"m: {r.cost_m}\n")
    out.write(f"total steps: {r.total_steps}\n")
    if r.heap_size is not None:
        out.write(f"heap size: {r.heap_size}\n")
    if r.cache_size is not None:
        out.write(f"cache size: {r.cache_size}\n")
    out.write(f"wall ms: {r.wall_ns / 1e6:.3f}\n")


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}")


def cmd_run(args) -> int:
    program = parse_program(_read(args.file))
    term = parse_term(args.term, program.signature)
    out = sys.stdout
    if (args.trace or args.dot) and args.engine != "shared" and not args.check_all:
        raise ParseError("--trace and --dot need the shared engine")
    if args.check_all:
        shared_rep, shared_val = _run_shared(
            program, term, args.term, args.budget, args.depth_cap,
            dot_path=args.dot, trace_path=args.trace,
        )
        memo_rep, memo_val = _run_memo(
            program, term, args.term, args.budget, args.depth_cap
        )
        naive_budget = args.budget if args.budget else DEFAULT_NAIVE_BUDGET
        naive_note = None
        naive_val = None
        try:
            naive_rep, naive_val = _run_naive(
                program, term, args.term, naive_budget, args.depth_cap
            )
        except BudgetExceededError as e:
            naive_rep = None
            naive_note = str(e)
        for rep in (shared_rep, memo_rep, naive_rep):
            if rep is not None:
                _print_report(rep, out)
                out.write("\n")
        if naive_note:
            out.write(f"naive: skipped ({naive_note})\n")
        problems = []
        if memo_val != shared_val:
            problems.append("memo and shared values differ")
        if memo_rep.cost_m != shared_rep.cost_m:
            problems.append(
                f"m differs: memo {memo_rep.cost_m}, shared {shared_rep.cost_m}"
            )
        if naive_val is not None and naive_val != shared_val:
            problems.append("naive and shared values differ")
        if problems:
            for p in problems:
                out.write(f"DISAGREEMENT: {p}\n")
            return 1
        out.write("agreement: ok\n")
        return 0
    if args.engine == "naive" and args.budget is None:
        args.budget = DEFAULT_NAIVE_BUDGET
    report, _ = _ENGINES[args.engine](
        program, term, args.term, args.budget, args.depth_cap,
        **(
            {"dot_path": args.dot, "trace_path": args.trace}
            if args.engine == "shared"
            else {}
        ),
    )
    _print_report(report, out)
    return 0


def cmd_check(args) -> int:
    sig, rules = parse_program_loose(_read(args.file))
    problems = program_diagnostics(sig, rules)
    if problems:
        for p in problems:
            print(p)
        return 1
    print("orthogonal")
    return 0


def _tier_line(d: GrsrDef, tmax_flag: Optional[int]) -> str:
    f = d.expr
    fully = d.annotated and d.tier_output is not None and all(
        i is not None for i in d.tier_inputs
    )
    if fully:
        sig = TierSignature(tuple(d.tier_inputs), d.tier_output)
        derivation, reason = check_tiers_explained(f, sig)
        if derivation is not None:
            return f"{d.name}: accepted {sig}"
        return f"{d.name}: rejected {sig}: {reason}"
    tmax = tmax_flag if tmax_flag is not None else default_tier_bound(f)
    sigs = infer_tiers(f, tmax)
    if d.annotated:
        def fits(s: TierSignature) -> bool:
            pins = [*zip(s.inputs, d.tier_inputs), (s.output, d.tier_output)]
            return all(want is None or got == want for got, want in pins)

        sigs = [s for s in sigs if fits(s)]
    if sigs:
        listed = ", ".join(str(s) for s in sigs)
        return f"{d.name}: signatures up to tier {tmax}: {listed}"
    reason = infeasibility_reason(f)
    tail = f": {reason}" if reason else ""
    return f"{d.name}: no signatures up to tier {tmax}{tail}"


def cmd_tier(args) -> int:
    gf = parse_grsr(_read(args.file))
    for d in gf.defs:
        print(_tier_line(d, args.tmax))
    return 0


def cmd_compile(args) -> int:
    gf = parse_grsr(_read(args.file))
    if not gf.defs:
        raise ParseError("no definitions to compile")
    if args.entry is not None:
        try:
            target = gf.lookup(args.entry)
        except KeyError:
            raise ParseError(f"no definition named {args.entry}")
    else:
        target = gf.defs[-1]
    program, entry = compile_function(target.expr)
    mapping: dict[str, str] = {}
    for d in gf.defs:
        _, name = compile_function(d.expr)
        if name in program.signature.operations and name not in mapping:
            mapping[name] = d.name
    mapping = {k: v for k, v in mapping.items() if k != v}
    program = rename_operations(program, mapping)
    entry = mapping.get(entry, entry)
    text = f"# entry: {entry}\n" + format_program(program)
    if args.output:
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
        print(f"entry: {entry}")
        print(f"wrote {args.output}")
    else:
        sys.stdout.write(text)
    return 0


def _family_term(args, program: Program, n: int) -> Term:
    sig = program.signature
    if args.template is not None:
        return parse_term(args.template.replace("{n}", str(n)), sig)
    if sig.constructors.get("zero") != 0 or sig.constructors.get("suc") != 1:
        raise ParseError("the sucN family needs constructors zero/0 and suc/1")
    if sig.operations.get(args.entry) != 1:
        raise ParseError(f"the sucN family needs a unary operation, got {args.entry}")
    t: Term = App("zero", ())
    for _ in range(n):
        t = App("suc", (t,))
    return App(args.entry, (t,))


def cmd_bench(args) -> int:
    program = parse_program(_read(args.file))
    engines = args.engine.split(",")
    for e in engines:
        if e not in _ENGINES:
            raise ParseError(f"unknown engine {e}")
    try:
        lo_text, hi_text = args.range.split("..", 1)
        lo, hi = int(lo_text), int(hi_text)
    except ValueError:
        raise ParseError(f"bad range {args.range!r}, expected A..B")
    if args.template is None and args.entry is None:
        raise ParseError("give an entry operation or --template")
    out = open(args.csv, "w", newline="") if args.csv else sys.stdout
    try:
        out.write("engine,n,m,total_steps,heap_nodes,unfolded_size_or_overflow,wall_ns\n")
        for n in range(lo, hi + 1):
            term = _family_term(args, program, n)
            text = format_term(term, max_depth=4)
            for eng in engines:
                budget = args.budget
                if eng == "naive" and budget is None:
                    budget = DEFAULT_NAIVE_BUDGET
                t0 = time.perf_counter_ns()
                try:
                    report, _ = _ENGINES[eng](program, term, text, budget, 1)
                except BudgetExceededError:
                    wall = time.perf_counter_ns() - t0
                    out.write(f"{eng},{n},,,,overflow,{wall}\n")
                    continue
                # answer sub-DAG size for every engine, not the whole heap
                row_heap = report.dag_nodes
                out.write(
                    f"{eng},{n},{report.cost_m},{report.total_steps},"
                    f"{row_heap},{report.unfolded_size},{report.wall_ns}\n"
                )
    finally:
        if args.csv:
            out.close()
    return 0


def _budget_value(text: str) -> int:
    if "^" in text:
        base, _, exp = text.partition("^")
        return int(base) ** int(exp)
    return int(text)


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="memotrs",
        description="Run, analyze, compile, and benchmark constructor "
        "rewrite programs with memoization and sharing.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="evaluate a term")
    p.add_argument("file", help="program file")
    p.add_argument("term", help="ground term to evaluate")
    p.add_argument("--engine", choices=sorted(_ENGINES), default="shared")
    p.add_argument("--budget", type=_budget_value, default=None,
                   help="step budget (accepts B^E)")
    p.add_argument("--check-all", action="store_true",
                   help="run every engine and require agreement")
    p.add_argument("--dot", metavar="FILE", help="write the answer DAG (shared)")
    p.add_argument("--trace", metavar="FILE", help="write a step trace CSV (shared)")
    p.add_argument("--depth-cap", type=int, default=DEFAULT_DEPTH_CAP,
                   help="print the value only to this depth")
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("check", help="orthogonality diagnostics")
    p.add_argument("file")
    p.set_defaults(fn=cmd_check)

    p = sub.add_parser("tier", help="check or infer tier signatures")
    p.add_argument("file")
    p.add_argument("--tmax", type=int, default=None, help="largest tier to try")
    p.set_defaults(fn=cmd_tier)

    p = sub.add_parser("compile", help="compile function definitions")
    p.add_argument("file")
    p.add_argument("-o", "--output", metavar="FILE", help="write the program here")
    p.add_argument("--entry", help="definition to compile (default: last)")
    p.set_defaults(fn=cmd_compile)

    p = sub.add_parser("bench", help="cost curves over an input family")
    p.add_argument("file")
    p.add_argument("entry", nargs="?", default=None,
                   help="unary operation for the sucN family")
    p.add_argument("--family", choices=["sucN"], default="sucN")
    p.add_argument("--template", default=None,
                   help="term template with an {n} placeholder (overrides family)")
    p.add_argument("--range", default="1..20", help="n range A..B")
    p.add_argument("--engine", default="shared",
                   help="comma-separated: naive,memo,shared")
    p.add_argument("--budget", type=_budget_value, default=None)
    p.add_argument("--csv", metavar="FILE", help="write rows here (default stdout)")
    p.set_defaults(fn=cmd_bench)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except StuckError as e:
        print(f"stuck: {e}", file=sys.stderr)
        return 3
    except BudgetExceededError as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 4
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except MemotrsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
