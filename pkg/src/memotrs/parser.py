"""Concrete syntax: program files, terms on the command line, and formatting.

Program files have three sections, in order:

    constructors: zero/0, suc/1;
    operations: add/2;
    rules:
      add(zero, y) -> y;
      add(suc(x), y) -> suc(add(x, y));

Identifiers not declared in the signature are variables (rules only).
`suc^5(zero)` abbreviates five nested applications of a unary symbol and is
accepted anywhere a term is. `#` starts a line comment.
"""

from __future__ import annotations

import re
from typing import Iterable, Optional

from .errors import ParseError
from .terms import App, Program, Rule, Signature, Term, Var

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)"
    r"|(?P<comment>#[^\n]*)"
    r"|(?P<nl>\n)"
    r"|(?P<arrow>->)"
    r"|(?P<darrow>=>)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<nat>[0-9]+)"
    r"|(?P<punct>[(),;:/^{}\[\]@=*])"
)


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind: str, text: str, line: int, col: int):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    def __repr__(self) -> str:
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "nl":
            line += 1
            col = 1
        elif kind in ("ws", "comment"):
            col += len(tok)
        else:
            tokens.append(Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


class TokenStream:
    def __init__(self, tokens: list[Token]):
        self._tokens = tokens
        self._pos = 0

    def peek(self) -> Token:
        return self._tokens[self._pos]

    def next(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def at_punct(self, text: str) -> bool:
        tok = self.peek()
        return tok.kind == "punct" and tok.text == text

    def at_name(self, text: Optional[str] = None) -> bool:
        tok = self.peek()
        return tok.kind == "name" and (text is None or tok.text == text)

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.peek()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text if text is not None else kind
            got = tok.text if tok.text else "end of input"
            raise ParseError(f"expected {want!r}, found {got!r}", tok.line, tok.col)
        return self.next()

    def error(self, message: str) -> ParseError:
        tok = self.peek()
        return ParseError(message, tok.line, tok.col)


def _expand_power(sym: str, count: int, inner: Term) -> Term:
    t = inner
    for _ in range(count):
        t = App(sym, (t,))
    return t


def parse_term_tokens(ts: TokenStream, sig: Optional[Signature], allow_vars: bool) -> Term:
    """Parse one term; iterative, so deeply nested input cannot overflow."""

    def make(sym: str, args: tuple[Term, ...], tok: Token) -> Term:
        if sig is None:
            return App(sym, args)
        if sig.is_constructor(sym) or sig.is_operation(sym):
            ar = sig.arity(sym)
            if ar != len(args):
                raise ParseError(
                    f"{sym} declared with arity {ar}, applied to {len(args)}",
                    tok.line,
                    tok.col,
                )
            return App(sym, args)
        if not args and allow_vars:
            return Var(sym)
        raise ParseError(f"undeclared symbol: {sym}", tok.line, tok.col)

    result: Optional[Term] = None
    frames: list[list] = []  # [sym, power, args, name token]
    while True:
        if result is None:
            tok = ts.expect("name")
            sym = tok.text
            power: Optional[int] = None
            if ts.at_punct("^"):
                ts.next()
                power = int(ts.expect("nat").text)
            if ts.at_punct("("):
                ts.next()
                if ts.at_punct(")"):
                    ts.next()
                    if power is not None:
                        raise ParseError(
                            f"{sym}^{power} needs one argument", tok.line, tok.col
                        )
                    result = make(sym, (), tok)
                else:
                    frames.append([sym, power, [], tok])
                    continue
            else:
                if power is not None:
                    raise ParseError(
                        f"{sym}^{power} needs a parenthesized argument",
                        tok.line,
                        tok.col,
                    )
                result = make(sym, (), tok)
        if not frames:
            return result
        frame = frames[-1]
        if ts.at_punct(","):
            ts.next()
            frame[2].append(result)
            result = None
            continue
        ts.expect("punct", ")")
        frame[2].append(result)
        frames.pop()
        sym, power, args, tok = frame
        if power is not None:
            if len(args) != 1:
                raise ParseError(f"{sym}^{power} takes one argument", tok.line, tok.col)
            base = args[0]
            if sig is not None:
                probe = make(sym, (base,), tok)  # arity check on the repeated symbol
                result = _expand_power(sym, power - 1, probe) if power > 0 else base
            else:
                result = _expand_power(sym, power, base)
        else:
            result = make(sym, tuple(args), tok)


def parse_term(text: str, sig: Optional[Signature] = None, allow_vars: bool = False) -> Term:
    """Parse a standalone term, validating symbols against sig when given."""
    ts = TokenStream(tokenize(text))
    t = parse_term_tokens(ts, sig, allow_vars)
    ts.expect("eof")
    return t


def _parse_decls(ts: TokenStream) -> dict[str, int]:
    decls: dict[str, int] = {}
    if ts.at_punct(";"):
        ts.next()
        return decls
    while True:
        tok = ts.expect("name")
        ts.expect("punct", "/")
        ar = int(ts.expect("nat").text)
        if tok.text in decls:
            raise ParseError(f"duplicate declaration of {tok.text}", tok.line, tok.col)
        decls[tok.text] = ar
        if ts.at_punct(","):
            ts.next()
            continue
        ts.expect("punct", ";")
        return decls


def parse_program_loose(text: str) -> tuple[Signature, list[Rule]]:
    """Parse a program file without the whole-program validity checks.

    Symbols and applied arities are still checked during term parsing; rule
    shape, linearity, and ambiguity are not. Used by diagnostics."""
    ts = TokenStream(tokenize(text))
    ts.expect("name", "constructors")
    ts.expect("punct", ":")
    constructors = _parse_decls(ts)
    ts.expect("name", "operations")
    ts.expect("punct", ":")
    operations = _parse_decls(ts)
    sig = Signature(constructors, operations)
    ts.expect("name", "rules")
    ts.expect("punct", ":")
    rules: list[Rule] = []
    while ts.peek().kind != "eof":
        lhs_tok = ts.peek()
        lhs = parse_term_tokens(ts, sig, allow_vars=True)
        ts.expect("arrow")
        rhs = parse_term_tokens(ts, sig, allow_vars=True)
        ts.expect("punct", ";")
        if not isinstance(lhs, App):
            raise ParseError("left-hand side must be an operation call",
                             lhs_tok.line, lhs_tok.col)
        rules.append(Rule(lhs, rhs))
    return sig, rules


def parse_program(text: str) -> Program:
    """Parse and validate a program file."""
    sig, rules = parse_program_loose(text)
    return Program(sig, rules)


def format_term(t: Term, max_depth: Optional[int] = None, compress: bool = False) -> str:
    """Render a term; beyond max_depth subterms print as '...'.

    With compress=True, unary chains of length >= 3 print as sym^N(inner).
    """
    parts: list[str] = []
    stack: list = [(t, 0)]
    while stack:
        item = stack.pop()
        if isinstance(item, str):
            parts.append(item)
            continue
        node, depth = item
        if max_depth is not None and depth > max_depth:
            parts.append("...")
            continue
        if isinstance(node, Var):
            parts.append(node.name)
            continue
        if compress and len(node.args) == 1:
            run = 0
            inner: Term = node
            while (
                isinstance(inner, App)
                and len(inner.args) == 1
                and inner.sym == node.sym
            ):
                run += 1
                inner = inner.args[0]
            if run >= 3:
                parts.append(f"{node.sym}^{run}(")
                stack.append(")")
                stack.append((inner, depth + 1))
                continue
        if not node.args:
            parts.append(node.sym)
            continue
        parts.append(node.sym + "(")
        stack.append(")")
        for i, a in enumerate(reversed(node.args)):
            stack.append((a, depth + 1))
            if i != len(node.args) - 1:
                stack.append(", ")
    return "".join(parts)


def _format_decls(decls: dict[str, int]) -> str:
    return ", ".join(f"{name}/{ar}" for name, ar in decls.items())


def format_program(p: Program) -> str:
    """Canonical text for a program; parse_program inverts it."""
    lines = [
        f"constructors: {_format_decls(p.signature.constructors)};",
        f"operations: {_format_decls(p.signature.operations)};",
        "rules:",
    ]
    for rule in p.rules:
        lines.append(f"  {format_term(rule.lhs)} -> {format_term(rule.rhs)};")
    return "\n".join(lines) + "\n"
