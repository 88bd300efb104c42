"""A function algebra closed under composition, case split, and simultaneous
structural recursion, with a tier discipline and a compiler to rewrite programs.

Functions are built from constructor functions and projections via three
schemes. Tier checking assigns numeric levels to argument and result
positions; simultaneous recursion requires its recursion argument to sit
strictly above its result, which is what keeps accepted functions feasible.
compile() turns a function into an orthogonal rewrite program, one operation
per structurally distinct subexpression.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from itertools import product
from typing import Iterable, Optional

from .errors import GrsrError
from .terms import App, Program, Rule, Signature, Term, Var


class Algebra:
    """A named free algebra: an ordered list of constructors with arities."""

    __slots__ = ("name", "constructors", "_index", "key")

    def __init__(self, name: str, constructors: Iterable[tuple[str, int]]):
        self.name = name
        self.constructors = tuple(constructors)
        if not self.constructors:
            raise GrsrError(f"algebra {name} has no constructors")
        self._index: dict[str, int] = {}
        for i, (con, ar) in enumerate(self.constructors):
            if con in self._index:
                raise GrsrError(f"algebra {name} repeats constructor {con}")
            if ar < 0:
                raise GrsrError(f"negative arity for {con}")
            self._index[con] = i
        if all(ar > 0 for _, ar in self.constructors):
            raise GrsrError(f"algebra {name} has no nullary constructor, so no values")
        body = ",".join(f"{c}/{a}" for c, a in self.constructors)
        self.key = f"{name}{{{body}}}"

    def index(self, con: str) -> int:
        if con not in self._index:
            raise GrsrError(f"{con} is not a constructor of algebra {self.name}")
        return self._index[con]

    def arity(self, con: str) -> int:
        return self.constructors[self.index(con)][1]

    def __eq__(self, other) -> bool:
        return isinstance(other, Algebra) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return f"Algebra({self.key})"


class FunctionExpr:
    """Base of the combinator tree; every node knows its arity and a
    canonical structural key (equality and compilation reuse it)."""

    __slots__ = ("arity", "key")

    def __eq__(self, other) -> bool:
        return isinstance(other, FunctionExpr) and self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        return self.key


class ConstructorFn(FunctionExpr):
    __slots__ = ("algebra", "con")

    def __init__(self, algebra: Algebra, con: str):
        self.algebra = algebra
        self.con = con
        self.arity = algebra.arity(con)  # also validates membership
        self.key = f"cons[{algebra.name}.{con}/{self.arity}]"


class Proj(FunctionExpr):
    __slots__ = ("index",)

    def __init__(self, arity: int, index: int):
        if arity < 1 or not 1 <= index <= arity:
            raise GrsrError(f"projection {index} of {arity} arguments is ill-formed")
        self.arity = arity
        self.index = index
        self.key = f"proj[{arity},{index}]"


class Comp(FunctionExpr):
    __slots__ = ("outer", "inners")

    def __init__(self, outer: FunctionExpr, inners: Iterable[FunctionExpr]):
        self.outer = outer
        self.inners = tuple(inners)
        if outer.arity != len(self.inners):
            raise GrsrError(
                f"composition: outer takes {outer.arity} arguments, "
                f"{len(self.inners)} inner functions given"
            )
        if not self.inners:
            raise GrsrError("composition needs at least one inner function")
        arities = {g.arity for g in self.inners}
        if len(arities) != 1:
            raise GrsrError(f"composition: inner arities differ: {sorted(arities)}")
        self.arity = self.inners[0].arity
        self.key = f"comp({outer.key};{','.join(g.key for g in self.inners)})"


class Case(FunctionExpr):
    """Case split on the head constructor of the first argument."""

    __slots__ = ("algebra", "branches", "params")

    def __init__(self, algebra: Algebra, branches: Iterable[FunctionExpr]):
        self.algebra = algebra
        self.branches = tuple(branches)
        cons = algebra.constructors
        if len(self.branches) != len(cons):
            raise GrsrError(
                f"case over {algebra.name} needs {len(cons)} branches, "
                f"got {len(self.branches)}"
            )
        params: Optional[int] = None
        for (con, ar), f in zip(cons, self.branches):
            p = f.arity - ar
            if p < 0:
                raise GrsrError(f"case branch for {con} has too few arguments")
            if params is None:
                params = p
            elif params != p:
                raise GrsrError("case branches disagree on parameter count")
        self.params = params if params is not None else 0
        self.arity = 1 + self.params
        self.key = f"case[{algebra.key}]({','.join(f.key for f in self.branches)})"


class SimRec(FunctionExpr):
    """Simultaneous structural recursion on the first argument.

    grid[i][j] defines component j at constructor i; it receives the
    constructor's subterms, then every component's value on every subterm
    (component-major), then the parameters. select picks the component this
    node denotes.
    """

    __slots__ = ("algebra", "grid", "select", "components", "params", "grid_key")

    def __init__(
        self,
        algebra: Algebra,
        grid: Iterable[Iterable[FunctionExpr]],
        select: int = 1,
    ):
        self.algebra = algebra
        self.grid = tuple(tuple(row) for row in grid)
        cons = algebra.constructors
        if len(self.grid) != len(cons):
            raise GrsrError(
                f"recursion over {algebra.name} needs {len(cons)} rows, "
                f"got {len(self.grid)}"
            )
        widths = {len(row) for row in self.grid}
        if len(widths) != 1:
            raise GrsrError("recursion rows disagree on component count")
        n = widths.pop()
        if n < 1:
            raise GrsrError("recursion needs at least one component")
        self.components = n
        if not 1 <= select <= n:
            raise GrsrError(f"select {select} out of range 1..{n}")
        self.select = select
        params: Optional[int] = None
        for (con, ar), row in zip(cons, self.grid):
            for f in row:
                p = f.arity - ar * (1 + n)
                if p < 0:
                    raise GrsrError(f"recursion entry for {con} has too few arguments")
                if params is None:
                    params = p
                elif params != p:
                    raise GrsrError("recursion entries disagree on parameter count")
        self.params = params if params is not None else 0
        self.arity = 1 + self.params
        rows = ";".join(",".join(f.key for f in row) for row in self.grid)
        self.grid_key = f"rec[{algebra.key}]({rows})"
        self.key = f"{self.grid_key}@{select}"


def eval_grsr(f: FunctionExpr, args: Iterable[Term]) -> Term:
    """Denotational evaluation; the reference oracle for the compiler."""
    args = tuple(args)
    if len(args) != f.arity:
        raise GrsrError(f"{f.key} takes {f.arity} arguments, got {len(args)}")
    t = type(f)
    if t is ConstructorFn:
        return App(f.con, args)
    if t is Proj:
        return args[f.index - 1]
    if t is Comp:
        return eval_grsr(f.outer, tuple(eval_grsr(g, args) for g in f.inners))
    if t is Case:
        scrut = _scrutinee(f.algebra, args[0])
        branch = f.branches[f.algebra.index(scrut.sym)]
        return eval_grsr(branch, scrut.args + args[1:])
    if t is SimRec:
        return _eval_simrec(f, f.select - 1, args)
    raise GrsrError(f"unknown function form {f!r}")


def _scrutinee(algebra: Algebra, v: Term) -> App:
    if not isinstance(v, App) or v.sym not in algebra._index:
        raise GrsrError(f"expected a value of algebra {algebra.name}")
    if len(v.args) != algebra.arity(v.sym):
        raise GrsrError(f"malformed value: {v.sym} applied at the wrong arity")
    return v


def _eval_simrec(f: SimRec, j: int, args: tuple[Term, ...]) -> Term:
    scrut = _scrutinee(f.algebra, args[0])
    params = args[1:]
    row = f.grid[f.algebra.index(scrut.sym)]
    rec: list[Term] = []
    for jj in range(f.components):
        for x in scrut.args:
            rec.append(_eval_simrec(f, jj, (x,) + params))
    return eval_grsr(row[j], scrut.args + tuple(rec) + params)


# ---------------------------------------------------------------- tiering


@dataclass(frozen=True)
class TierSignature:
    inputs: tuple[int, ...]
    output: int

    def __str__(self) -> str:
        ins = ", ".join(str(i) for i in self.inputs)
        return f"({ins}) -> {self.output}"


class TierDerivation:
    """A tier assignment for every sub-expression occurrence."""

    __slots__ = ("expr", "signature", "premises")

    def __init__(
        self,
        expr: FunctionExpr,
        signature: TierSignature,
        premises: tuple["TierDerivation", ...],
    ):
        self.expr = expr
        self.signature = signature
        self.premises = premises

    def __repr__(self) -> str:
        return f"TierDerivation({self.expr.key}, {self.signature})"


class _Node:
    __slots__ = ("expr", "ins", "out", "kids")

    def __init__(self, expr: FunctionExpr, ins: list[int], out: int, kids: list):
        self.expr = expr
        self.ins = ins
        self.out = out
        self.kids = kids


class _TierProblem:
    def __init__(self):
        self.parent: list[int] = []
        self.edges: list[tuple[int, int, str]] = []  # hi > lo, with a note

    def var(self) -> int:
        self.parent.append(len(self.parent))
        return len(self.parent) - 1

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def eq(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb

    def gt(self, hi: int, lo: int, note: str) -> None:
        self.edges.append((hi, lo, note))


def _collect(f: FunctionExpr, prob: _TierProblem) -> _Node:
    t = type(f)
    if t is ConstructorFn:
        v = prob.var()
        return _Node(f, [v] * f.arity, v, [])
    if t is Proj:
        ins = [prob.var() for _ in range(f.arity)]
        return _Node(f, ins, ins[f.index - 1], [])
    if t is Comp:
        outer = _collect(f.outer, prob)
        inners = [_collect(g, prob) for g in f.inners]
        ins = [prob.var() for _ in range(f.arity)]
        out = prob.var()
        prob.eq(out, outer.out)
        for node, ov in zip(inners, outer.ins):
            prob.eq(node.out, ov)
            for a, b in zip(node.ins, ins):
                prob.eq(a, b)
        return _Node(f, ins, out, [outer, *inners])
    if t is Case:
        p = prob.var()
        qs = [prob.var() for _ in range(f.params)]
        m = prob.var()
        kids = []
        for (con, ar), g in zip(f.algebra.constructors, f.branches):
            node = _collect(g, prob)
            for k in range(ar):
                prob.eq(node.ins[k], p)
            for k, q in enumerate(qs):
                prob.eq(node.ins[ar + k], q)
            prob.eq(node.out, m)
            kids.append(node)
        return _Node(f, [p, *qs], m, kids)
    if t is SimRec:
        p = prob.var()
        qs = [prob.var() for _ in range(f.params)]
        m = prob.var()
        prob.gt(p, m, f"recursion argument must sit strictly above the result in {f.key}")
        n = f.components
        kids = []
        for (con, ar), row in zip(f.algebra.constructors, f.grid):
            for g in row:
                node = _collect(g, prob)
                for k in range(ar):
                    prob.eq(node.ins[k], p)
                for k in range(n * ar):
                    prob.eq(node.ins[ar + k], m)
                for k, q in enumerate(qs):
                    prob.eq(node.ins[ar + n * ar + k], q)
                prob.eq(node.out, m)
                kids.append(node)
        return _Node(f, [p, *qs], m, kids)
    raise GrsrError(f"unknown function form {f!r}")


def _solve(
    prob: _TierProblem, pins: Iterable[tuple[int, int]], cap: Optional[int]
) -> tuple[Optional[dict[int, int]], Optional[str]]:
    """Minimal tier values per class, or a reason none exist."""
    class_pin: dict[int, int] = {}
    for v, c in pins:
        r = prob.find(v)
        if r in class_pin and class_pin[r] != c:
            return None, f"position forced to both tier {class_pin[r]} and {c}"
        class_pin[r] = c
    above: dict[int, list[tuple[int, str]]] = {}
    for hi, lo, note in prob.edges:
        rh, rl = prob.find(hi), prob.find(lo)
        if rh == rl:
            return None, note
        above.setdefault(rh, []).append((rl, note))
    val: dict[int, int] = {}
    state: dict[int, int] = {}  # 1 visiting, 2 done
    classes = {prob.find(v) for v in range(len(prob.parent))}

    def visit(c: int) -> Optional[str]:
        if state.get(c) == 2:
            return None
        if state.get(c) == 1:
            return "recursion tiers form a cycle"
        state[c] = 1
        bound = 0
        for lo, note in above.get(c, ()):
            bad = visit(lo)
            if bad is not None:
                return bad
            if val[lo] + 1 > bound:
                bound = val[lo] + 1
        if c in class_pin:
            if class_pin[c] < bound:
                return (
                    f"tier {class_pin[c]} pinned below a required minimum of {bound}"
                )
            val[c] = class_pin[c]
        else:
            val[c] = bound
        state[c] = 2
        return None

    for c in classes:
        bad = visit(c)
        if bad is not None:
            return None, bad
    if cap is not None:
        for c, v in val.items():
            if v > cap:
                return None, f"needs a tier above the bound {cap}"
    return {v: val[prob.find(v)] for v in range(len(prob.parent))}, None


def _derivation(node: _Node, val: dict[int, int]) -> TierDerivation:
    sig = TierSignature(tuple(val[v] for v in node.ins), val[node.out])
    return TierDerivation(
        node.expr, sig, tuple(_derivation(k, val) for k in node.kids)
    )


def check_tiers_explained(
    f: FunctionExpr, sig: TierSignature
) -> tuple[Optional[TierDerivation], Optional[str]]:
    """Derivation for f at the given signature, or None with the blocker."""
    if len(sig.inputs) != f.arity:
        raise GrsrError(f"{f.key} takes {f.arity} arguments, signature has "
                        f"{len(sig.inputs)}")
    prob = _TierProblem()
    root = _collect(f, prob)
    pins = list(zip([*root.ins, root.out], [*sig.inputs, sig.output]))
    val, reason = _solve(prob, pins, None)
    if val is None:
        return None, reason
    return _derivation(root, val), None


def check_tiers(f: FunctionExpr, sig: TierSignature) -> Optional[TierDerivation]:
    derivation, _ = check_tiers_explained(f, sig)
    return derivation


def infeasibility_reason(f: FunctionExpr) -> Optional[str]:
    """Why no tier signature can exist at all, or None if some might.

    Pin-independent: detects structural contradictions (a tier forced
    strictly above itself)."""
    prob = _TierProblem()
    _collect(f, prob)
    _, reason = _solve(prob, [], None)
    return reason


def _count_simrecs(f: FunctionExpr) -> int:
    seen: set[str] = set()

    def walk(g: FunctionExpr) -> None:
        t = type(g)
        if t is SimRec:
            seen.add(g.grid_key)
            for row in g.grid:
                for h in row:
                    walk(h)
        elif t is Comp:
            walk(g.outer)
            for h in g.inners:
                walk(h)
        elif t is Case:
            for h in g.branches:
                walk(h)

    walk(f)
    return len(seen)


def default_tier_bound(f: FunctionExpr) -> int:
    return _count_simrecs(f) + 1


def infer_tiers(f: FunctionExpr, t_max: Optional[int] = None) -> list[TierSignature]:
    """All signatures with tiers <= t_max admitting a derivation."""
    if t_max is None:
        t_max = default_tier_bound(f)
    prob = _TierProblem()
    root = _collect(f, prob)
    positions = [*root.ins, root.out]
    found: list[TierSignature] = []
    for combo in product(range(t_max + 1), repeat=len(positions)):
        val, _ = _solve(prob, list(zip(positions, combo)), t_max)
        if val is not None:
            found.append(TierSignature(tuple(combo[:-1]), combo[-1]))
    return found


def validate_derivation(d: TierDerivation) -> None:
    """Re-check a derivation rule by rule; raises GrsrError on a bad node."""
    f = d.expr
    sig = d.signature
    t = type(f)
    if len(sig.inputs) != f.arity:
        raise GrsrError(f"derivation arity mismatch at {f.key}")
    if t is ConstructorFn:
        if any(i != sig.output for i in sig.inputs):
            raise GrsrError(f"constructor function must be uniform: {f.key}")
        if d.premises:
            raise GrsrError("constructor function has no premises")
    elif t is Proj:
        if sig.output != sig.inputs[f.index - 1]:
            raise GrsrError(f"projection must return its argument's tier: {f.key}")
        if d.premises:
            raise GrsrError("projection has no premises")
    elif t is Comp:
        outer, *inners = d.premises
        if outer.signature.output != sig.output:
            raise GrsrError("composition output tier mismatch")
        if len(inners) != len(f.inners):
            raise GrsrError("composition premise count mismatch")
        for g, ov in zip(inners, outer.signature.inputs):
            if g.signature.output != ov:
                raise GrsrError("composition intermediate tier mismatch")
            if g.signature.inputs != sig.inputs:
                raise GrsrError("composition input tier mismatch")
        for p in d.premises:
            validate_derivation(p)
    elif t is Case:
        p = sig.inputs[0]
        qs = sig.inputs[1:]
        for (con, ar), br in zip(f.algebra.constructors, d.premises):
            want = (p,) * ar + qs
            if br.signature.inputs != want or br.signature.output != sig.output:
                raise GrsrError(f"case branch for {con} typed wrongly")
            validate_derivation(br)
    elif t is SimRec:
        p = sig.inputs[0]
        qs = sig.inputs[1:]
        m = sig.output
        if not p > m:
            raise GrsrError("recursion argument tier must exceed the result tier")
        n = f.components
        idx = 0
        for (con, ar), row in zip(f.algebra.constructors, f.grid):
            for _ in row:
                entry = d.premises[idx]
                idx += 1
                want = (p,) * ar + (m,) * (n * ar) + qs
                if entry.signature.inputs != want or entry.signature.output != m:
                    raise GrsrError(f"recursion entry for {con} typed wrongly")
                validate_derivation(entry)
    else:
        raise GrsrError(f"unknown function form {f!r}")


# ---------------------------------------------------------------- compiler


def _h8(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:8]


def _vars(prefix: str, n: int, start: int = 1) -> list[Var]:
    return [Var(f"{prefix}{i}") for i in range(start, start + n)]


def compile_function(f: FunctionExpr) -> tuple[Program, str]:
    """Compile to an orthogonal rewrite program; returns it with the entry
    operation's name. Structurally equal subexpressions share one operation."""
    cons: dict[str, int] = {}
    ops: dict[str, int] = {}
    rules: list[Rule] = []
    named: dict[str, str] = {}  # structural key -> operation name
    grids: dict[str, list[str]] = {}  # grid key -> per-component names

    def add_algebra(a: Algebra) -> None:
        for con, ar in a.constructors:
            if cons.get(con, ar) != ar:
                raise GrsrError(f"constructor {con} declared at two arities")
            cons[con] = ar

    def visit(g: FunctionExpr) -> str:
        if g.key in named:
            return named[g.key]
        t = type(g)
        if t is ConstructorFn:
            add_algebra(g.algebra)
            name = f"mk_{g.con}"
            named[g.key] = name
            ops[name] = g.arity
            xs = _vars("x", g.arity)
            rules.append(Rule(App(name, tuple(xs)), App(g.con, tuple(xs))))
            return name
        if t is Proj:
            name = f"pr{g.arity}_{g.index}"
            named[g.key] = name
            ops[name] = g.arity
            xs = _vars("x", g.arity)
            rules.append(Rule(App(name, tuple(xs)), xs[g.index - 1]))
            return name
        if t is Comp:
            outer = visit(g.outer)
            inner = [visit(h) for h in g.inners]
            name = f"cp_{_h8(g.key)}"
            named[g.key] = name
            ops[name] = g.arity
            xs = tuple(_vars("x", g.arity))
            calls = tuple(App(h, xs) for h in inner)
            rules.append(Rule(App(name, xs), App(outer, calls)))
            return name
        if t is Case:
            add_algebra(g.algebra)
            branches = [visit(h) for h in g.branches]
            name = f"cs_{_h8(g.key)}"
            named[g.key] = name
            ops[name] = g.arity
            zs = _vars("z", g.params)
            for (con, ar), br in zip(g.algebra.constructors, branches):
                ys = _vars("y", ar)
                lhs = App(name, (App(con, tuple(ys)), *zs))
                rules.append(Rule(lhs, App(br, (*ys, *zs))))
            return name
        if t is SimRec:
            add_algebra(g.algebra)
            if g.grid_key not in grids:
                n = g.components
                entry_ops = [[visit(h) for h in row] for row in g.grid]
                comp_names = [f"rc{j + 1}_{_h8(g.grid_key)}" for j in range(n)]
                grids[g.grid_key] = comp_names
                for j, cname in enumerate(comp_names):
                    named[f"{g.grid_key}@{j + 1}"] = cname
                    ops[cname] = g.arity
                zs = _vars("z", g.params)
                for (con, ar), row_ops in zip(g.algebra.constructors, entry_ops):
                    ys = _vars("y", ar)
                    rec_calls = tuple(
                        App(comp_names[jj], (y, *zs))
                        for jj in range(n)
                        for y in ys
                    )
                    pat = App(con, tuple(ys))
                    for j, cname in enumerate(comp_names):
                        lhs = App(cname, (pat, *zs))
                        rhs = App(row_ops[j], (*ys, *rec_calls, *zs))
                        rules.append(Rule(lhs, rhs))
            return grids[g.grid_key][g.select - 1]
        raise GrsrError(f"unknown function form {g!r}")

    entry = visit(f)
    program = Program(Signature(cons, ops), rules)
    return program, entry


def rename_operations(program: Program, mapping: dict[str, str]) -> Program:
    """A copy of the program with operations renamed per mapping."""
    sig = program.signature
    new_ops: dict[str, int] = {}
    for op, ar in sig.operations.items():
        new = mapping.get(op, op)
        if new in new_ops or new in sig.constructors:
            raise GrsrError(f"operation rename collides on {new}")
        new_ops[new] = ar

    def rewrite(t: Term) -> Term:
        memo: dict[int, Term] = {}
        stack: list[tuple[Term, bool]] = [(t, False)]
        while stack:
            node, done = stack.pop()
            if id(node) in memo:
                continue
            if isinstance(node, Var):
                memo[id(node)] = node
            elif done:
                args = tuple(memo[id(a)] for a in node.args)
                sym = node.sym
                if sym in sig.operations:
                    sym = mapping.get(sym, sym)
                memo[id(node)] = App(sym, args)
            else:
                stack.append((node, True))
                stack.extend((a, False) for a in node.args)
        return memo[id(t)]

    new_rules = [Rule(rewrite(r.lhs), rewrite(r.rhs)) for r in program.rules]
    return Program(Signature(dict(sig.constructors), new_ops), new_rules)
