"""Shared test utilities.

reference_eval is a deliberately simple recursive interpreter used as an
oracle; it shares no code with the engines under test (its own matching and
substitution). Also here: value enumeration, a seeded generator of
structurally recursive programs, and tree-shape accounting.
"""

from __future__ import annotations

import random
from itertools import product
from typing import Optional

from memotrs import App, Program, Rule, Signature, Term, Var


# --------------------------------------------------------------- oracle


def _match(pattern: Term, subject: Term, binding: dict[str, Term]) -> bool:
    if isinstance(pattern, Var):
        if pattern.name in binding:
            return binding[pattern.name] == subject
        binding[pattern.name] = subject
        return True
    if isinstance(subject, Var):
        return False
    if pattern.sym != subject.sym or len(pattern.args) != len(subject.args):
        return False
    return all(_match(p, s, binding) for p, s in zip(pattern.args, subject.args))


def _subst(t: Term, binding: dict[str, Term]) -> Term:
    if isinstance(t, Var):
        return binding[t.name]
    return App(t.sym, tuple(_subst(a, binding) for a in t.args))


def reference_eval(program: Program, t: Term) -> Term:
    """Innermost call-by-value evaluation by plain recursion."""
    if isinstance(t, Var):
        raise ValueError(f"free variable {t.name}")
    args = tuple(reference_eval(program, a) for a in t.args)
    if program.signature.is_constructor(t.sym):
        return App(t.sym, args)
    for rule in program.rules_for(t.sym):
        binding: dict[str, Term] = {}
        if all(
            _match(p, a, binding) for p, a in zip(rule.lhs.args, args)
        ) and len(rule.lhs.args) == len(args):
            return reference_eval(program, _subst(rule.rhs, binding))
    raise ValueError(f"no rule for {t.sym}")


# --------------------------------------------------- value construction


def suc_chain(n: int) -> Term:
    t: Term = App("zero", ())
    for _ in range(n):
        t = App("suc", (t,))
    return t


def nat_of(t: Term) -> int:
    n = 0
    while t.sym == "suc":
        n += 1
        t = t.args[0]
    assert t.sym == "zero"
    return n


def enum_values(constructors: dict[str, int], max_size: int) -> list[Term]:
    """Every ground constructor term with at most max_size nodes, smallest
    first; order is deterministic."""
    by_size: list[list[Term]] = [[] for _ in range(max_size + 1)]
    names = sorted(constructors)
    for size in range(1, max_size + 1):
        for con in names:
            k = constructors[con]
            if k == 0:
                if size == 1:
                    by_size[1].append(App(con, ()))
                continue
            # distribute size - 1 nodes among k children, each >= 1
            for split in _compositions(size - 1, k):
                for kids in product(*(by_size[s] for s in split)):
                    by_size[size].append(App(con, kids))
    out: list[Term] = []
    for bucket in by_size:
        out.extend(bucket)
    return out


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first, *rest)


def random_value(rng: random.Random, constructors: dict[str, int], depth: int) -> Term:
    nullary = [c for c, k in constructors.items() if k == 0]
    if depth <= 0:
        return App(rng.choice(sorted(nullary)), ())
    con = rng.choice(sorted(constructors))
    k = constructors[con]
    return App(con, tuple(random_value(rng, constructors, depth - 1) for _ in range(k)))


# ----------------------------------------------- random program generator


def random_program(seed: int) -> Program:
    """A seeded orthogonal program: every operation case-splits its first
    argument over the whole constructor set, and recursive calls only ever
    receive pattern subvariables as their first argument, so evaluation
    always terminates."""
    rng = random.Random(seed)
    cons = {"a": 0}
    if rng.random() < 0.85:
        cons["b"] = 1
    if rng.random() < 0.65:
        cons["c"] = 2
    if rng.random() < 0.3:
        cons["d"] = 0
    n_ops = rng.randint(1, 3)
    op_names = ["f", "g", "h"][:n_ops]
    ops = {name: rng.randint(1, 2) for name in op_names}
    sig = Signature(cons, ops)

    def rhs_term(depth: int, recursers: list[Term], passthru: list[Term]) -> Term:
        roll = rng.random()
        if depth <= 0 or roll < 0.25:
            if passthru and rng.random() < 0.6:
                return rng.choice(passthru)
            nullary = sorted(c for c, k in cons.items() if k == 0)
            return App(rng.choice(nullary), ())
        if roll < 0.55 and recursers:
            op = rng.choice(op_names)
            first = rng.choice(recursers)
            rest = tuple(
                rhs_term(depth - 1, recursers, passthru)
                for _ in range(ops[op] - 1)
            )
            return App(op, (first, *rest))
        con = rng.choice(sorted(cons))
        return App(
            con, tuple(rhs_term(depth - 1, recursers, passthru) for _ in range(cons[con]))
        )

    rules = []
    for op, arity in ops.items():
        extra = [Var(f"x{i}") for i in range(2, arity + 1)]
        for con in sorted(cons):
            k = cons[con]
            ys = [Var(f"y{i}") for i in range(1, k + 1)]
            lhs = App(op, (App(con, tuple(ys)), *extra))
            rhs = rhs_term(2, list(ys), ys + extra)
            rules.append(Rule(lhs, rhs))
    return Program(sig, rules)


# ------------------------------------------------------- tree accounting


def depth_profile(t: Term) -> list[int]:
    """Node count of the unfolded tree at each depth; computed on the DAG,
    so exponentially large trees are fine."""
    profiles: dict[int, list[int]] = {}
    stack: list[tuple[Term, bool]] = [(t, False)]
    while stack:
        node, done = stack.pop()
        if id(node) in profiles:
            continue
        if done:
            merged = [1]
            for a in node.args:
                for i, cnt in enumerate(profiles[id(a)], start=1):
                    if i == len(merged):
                        merged.append(0)
                    merged[i] += cnt
            profiles[id(node)] = merged
        else:
            stack.append((node, True))
            stack.extend((a, False) for a in node.args)
    return profiles[id(t)]


def fib(i: int) -> int:
    # fib(0) = fib(1) = 1
    a, b = 1, 1
    for _ in range(i):
        a, b = b, a + b
    return a


def complete_tree(n: int) -> Term:
    t: Term = App("leaf", ())
    for _ in range(n):
        t = App("branch", (t, t))
    return t


def rabbit_tree(n: int) -> Term:
    """Independent recurrence for the expected rabbits output."""
    adults, babies = App("leafm", ()), App("leafn", ())
    if n == 0:
        return App("leafn", ())
    for _ in range(n - 1):
        adults, babies = App("m", (adults, babies)), App("n", (adults,))
    return babies
