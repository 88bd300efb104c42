"""Big-step evaluation: plain call-by-value and the cost-annotated memoizing form.

Both evaluators use explicit stacks, so recursion depth never tracks input
depth. The plain evaluator re-derives every value it touches node by node
(that exponential behavior on duplication-heavy programs is the point of
having it), and its budget bounds the total number of inferences. The
memoizing evaluator caches operation calls on evaluated arguments; its cost
counts cache writes only, and reads are free.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .errors import BudgetExceededError, StuckError
from .terms import App, Program, Rule, Term, Var, match_term, substitute

CacheKey = tuple[str, tuple[Term, ...]]
TermCache = dict[CacheKey, Term]

_EVAL, _CON, _CALL, _UPDATE = 0, 1, 2, 3


@dataclass
class NaiveResult:
    value: Term
    rewrite_steps: int
    total_steps: int


@dataclass
class CostedOutcome:
    cache: TermCache
    value: Term
    cost: int


@dataclass
class MemoStats:
    updates: int = 0
    reads: int = 0
    work: int = 0


def match_rule(rule: Rule, args: tuple[Term, ...]) -> Optional[dict[str, Term]]:
    """Match every argument pattern; patterns are jointly linear."""
    binding: dict[str, Term] = {}
    for p, a in zip(rule.lhs.args, args):
        b = match_term(p, a)
        if b is None:
            return None
        binding.update(b)
    return binding


def _find_rule(
    program: Program, sym: str, args: tuple[Term, ...]
) -> tuple[Rule, dict[str, Term]]:
    for rule in program.rules_for(sym):
        binding = match_rule(rule, args)
        if binding is not None:
            return rule, binding
    witness = App(sym, args)
    raise StuckError(f"no rule matches {sym}/{len(args)} call", witness)


def naive_run(program: Program, term: Term, budget: Optional[int] = None) -> NaiveResult:
    """Call-by-value evaluation without caching.

    Every inference counts toward the budget: one per constructor node
    derived (values included, every time they are derived), one per
    operation split, one per rule firing.
    """
    sig = program.signature
    vals: list[Term] = []
    work: list = [(_EVAL, term)]
    rewrites = 0
    total = 0
    while work:
        frame = work.pop()
        tag = frame[0]
        if tag == _EVAL:
            t = frame[1]
            if isinstance(t, Var):
                raise StuckError(f"free variable {t.name} in evaluated term", t)
            total += 1
            if budget is not None and total > budget:
                raise BudgetExceededError(
                    f"naive evaluation exceeded {budget} inferences", "naive", budget
                )
            k = len(t.args)
            if sig.is_constructor(t.sym):
                work.append((_CON, t.sym, k))
            else:
                work.append((_CALL, t.sym, k))
            for a in reversed(t.args):
                work.append((_EVAL, a))
        elif tag == _CON:
            _, sym, k = frame
            if k:
                args = tuple(vals[len(vals) - k :])
                del vals[len(vals) - k :]
            else:
                args = ()
            vals.append(App(sym, args))
        else:  # _CALL
            _, sym, k = frame
            if k:
                args = tuple(vals[len(vals) - k :])
                del vals[len(vals) - k :]
            else:
                args = ()
            rule, binding = _find_rule(program, sym, args)
            rewrites += 1
            total += 1
            if budget is not None and total > budget:
                raise BudgetExceededError(
                    f"naive evaluation exceeded {budget} inferences", "naive", budget
                )
            work.append((_EVAL, substitute(rule.rhs, binding)))
    assert len(vals) == 1
    return NaiveResult(vals[0], rewrites, total)


def eval_cbv(program: Program, term: Term, budget: Optional[int] = None) -> Term:
    """The value of a ground term under plain call-by-value evaluation."""
    return naive_run(program, term, budget).value


def eval_memo(
    program: Program,
    cache: TermCache,
    term: Term,
    budget: Optional[int] = None,
    stats: Optional[MemoStats] = None,
) -> CostedOutcome:
    """Memoized call-by-value evaluation with cost accounting.

    Cost counts cache writes (one per operation call evaluated via its rule);
    cache reads cost nothing. The input cache is not modified; the outcome
    carries the extended one. A constructor-only term is its own value at no
    cost and with no cache effect, so such subterms are returned directly
    instead of being re-derived. The optional budget bounds internal work
    units (frames processed) and exists to abort runaway evaluations.
    """
    sig = program.signature
    cache2: TermCache = dict(cache)
    known: set[int] = set()  # ids of terms established to be values
    for v in cache2.values():
        known.add(id(v))
    cost = 0
    work_units = 0
    vals: list[Term] = []
    work: list = [(_EVAL, term)]

    def is_known_value(t: Term) -> bool:
        if id(t) in known:
            return True
        if not t.ground:
            return False
        # walk once, marking constructor-only subterms
        pending = [t]
        nodes: list[Term] = []
        while pending:
            node = pending.pop()
            if id(node) in known:
                continue
            if not sig.is_constructor(node.sym):
                return False
            nodes.append(node)
            pending.extend(node.args)
        known.update(id(n) for n in nodes)
        return True

    while work:
        frame = work.pop()
        work_units += 1
        if budget is not None and work_units > budget:
            raise BudgetExceededError(
                f"memoized evaluation exceeded {budget} work units", "memo", budget
            )
        tag = frame[0]
        if tag == _EVAL:
            t = frame[1]
            if isinstance(t, Var):
                raise StuckError(f"free variable {t.name} in evaluated term", t)
            if is_known_value(t):
                vals.append(t)
                continue
            k = len(t.args)
            if sig.is_constructor(t.sym):
                work.append((_CON, t.sym, k))
            else:
                work.append((_CALL, t.sym, k))
            for a in reversed(t.args):
                work.append((_EVAL, a))
        elif tag == _CON:
            _, sym, k = frame
            if k:
                args = tuple(vals[len(vals) - k :])
                del vals[len(vals) - k :]
            else:
                args = ()
            v = App(sym, args)
            known.add(id(v))
            vals.append(v)
        elif tag == _CALL:
            _, sym, k = frame
            if k:
                args = tuple(vals[len(vals) - k :])
                del vals[len(vals) - k :]
            else:
                args = ()
            key = (sym, args)
            hit = cache2.get(key)
            if hit is not None:
                if stats is not None:
                    stats.reads += 1
                vals.append(hit)
                continue
            rule, binding = _find_rule(program, sym, args)
            cost += 1
            if stats is not None:
                stats.updates += 1
            work.append((_UPDATE, key))
            work.append((_EVAL, substitute(rule.rhs, binding)))
        else:  # _UPDATE
            v = vals[-1]
            cache2[frame[1]] = v
            known.add(id(v))
    assert len(vals) == 1
    if stats is not None:
        stats.work = work_units
    return CostedOutcome(cache2, vals[0], cost)


def equivalence_check(program: Program, term: Term, budget: Optional[int] = None) -> bool:
    """Whether plain and memoized evaluation agree on term's value."""
    plain = eval_cbv(program, term, budget)
    memo = eval_memo(program, {}, term)
    return plain == memo.value
