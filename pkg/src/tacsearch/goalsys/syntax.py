"""Lexer, parsers and canonical printers for goals and tactic expressions.

Tactic grammar (left-associative combinators)::

    expr   := atom (("THEN" atom) | ("THENL" "[" [expr ("," expr)*] "]"))*
    atom   := "(" expr ")" | unit | ALIAS
    unit   := "Refl" | "Sym" | "Assumption"
            | ("Rewrite" | "RewriteRev" | "Simp" | "Auto") thms
            | ("Induct" | "Cases") STRING
    thms   := "[" [name ("," name)*] "]" | "□"
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterator

from .terms import SIGNATURE, App, Equation, Goal, SortError, Term, Var

PLACEHOLDER = "□"

NULLARY = ("Refl", "Sym", "Assumption")
LIST_TACTICS = ("Rewrite", "RewriteRev", "Simp", "Auto")
VAR_TACTICS = ("Induct", "Cases")
TACTIC_NAMES = NULLARY + LIST_TACTICS + VAR_TACTICS
COMBINATORS = ("THEN", "THENL")


class ParseError(ValueError):
    """Syntax error; ``pos`` is a 1-based character offset into the input."""

    def __init__(self, msg: str, pos: int, line: int | None = None, col: int | None = None):
        self.msg = msg
        self.pos = pos
        self.line = line
        self.col = col
        where = f"line {line}, column {col}" if line is not None else f"offset {pos}"
        super().__init__(f"{msg} at {where}")


_TOKEN = re.compile(
    r"""
    (?P<ws>\s+|--[^\n]*)
  | (?P<turnstile>\|-)
  | (?P<assign>:=)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*(?:\.[A-Za-z_][A-Za-z0-9_]*)?)
  | (?P<zero>0)
  | (?P<string>"[^"\n]*")
  | (?P<punct>[()\[\],.=:□])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    pos: int  # 0-based


def tokenize(text: str) -> list[Token]:
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", i + 1)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), i))
        i = m.end()
    out.append(Token("eof", "", len(text)))
    return out


class TokenStream:
    def __init__(self, text: str, tokens: list[Token] | None = None, start: int = 0):
        self.text = text
        self.toks = tokenize(text) if tokens is None else tokens
        self.i = start

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.peek()
        self.i += 1
        return t

    def error(self, msg: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(msg, tok.pos + 1)

    def expect(self, text: str) -> Token:
        t = self.peek()
        if t.text != text:
            found = "end of input" if t.kind == "eof" else repr(t.text)
            raise self.error(f"expected {text!r}, found {found}")
        return self.next()

    def at(self, text: str) -> bool:
        return self.peek().text == text


# ---------------------------------------------------------------- terms/goals


def parse_term_tokens(ts: TokenStream) -> Term:
    t = ts.peek()
    if t.kind == "zero":
        ts.next()
        return App("0")
    if t.kind != "name" or "." in t.text:
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ts.error(f"expected a term, found {found}")
    ts.next()
    name = t.text
    if name in SIGNATURE:
        arity = len(SIGNATURE[name][0])
        if arity == 0:
            return App(name)
        ts.expect("(")
        args = [parse_term_tokens(ts)]
        while ts.at(","):
            ts.next()
            args.append(parse_term_tokens(ts))
        ts.expect(")")
        if len(args) != arity:
            raise ParseError(f"{name} expects {arity} arguments, got {len(args)}", t.pos + 1)
        return App(name, tuple(args))
    if ts.at("("):
        raise ts.error(f"unknown function symbol {name!r}", t)
    try:
        return Var(name)
    except ValueError as e:
        raise ParseError(str(e), t.pos + 1) from None


def parse_equation_tokens(ts: TokenStream) -> Equation:
    lhs = parse_term_tokens(ts)
    ts.expect("=")
    rhs = parse_term_tokens(ts)
    return Equation(lhs, rhs)


def parse_goal_tokens(ts: TokenStream) -> Goal:
    start = ts.peek()
    hyps: list[Equation] = []
    if ts.at("|-"):
        ts.next()
        concl = parse_equation_tokens(ts)
    else:
        first = parse_equation_tokens(ts)
        eqs = [first]
        while ts.at(","):
            ts.next()
            eqs.append(parse_equation_tokens(ts))
        if ts.at("|-"):
            ts.next()
            hyps = eqs
            concl = parse_equation_tokens(ts)
        elif len(eqs) == 1:
            concl = first
        else:
            raise ts.error("expected '|-' after hypotheses")
    try:
        return Goal(tuple(hyps), concl)
    except SortError as e:
        raise ParseError(str(e), start.pos + 1) from None


def parse_term(text: str) -> Term:
    ts = TokenStream(text)
    t = parse_term_tokens(ts)
    if ts.peek().kind != "eof":
        raise ts.error(f"trailing input {ts.peek().text!r}")
    return t


def parse_goal(text: str) -> Goal:
    ts = TokenStream(text)
    g = parse_goal_tokens(ts)
    if ts.peek().kind != "eof":
        raise ts.error(f"trailing input {ts.peek().text!r}")
    return g


def print_goal(g: Goal) -> str:
    return str(g)


# ------------------------------------------------------------------ tactics


class Tactic:
    """Base class of the tactic expression tree."""

    def __str__(self):
        return print_tactic(self)

    def units(self) -> list[Unit]:
        return []


@dataclass(frozen=True)
class ThmList:
    names: tuple[str, ...]

    def __str__(self):
        return "[" + ", ".join(self.names) + "]"


@dataclass(frozen=True)
class Hole:
    def __str__(self):
        return PLACEHOLDER


@dataclass(frozen=True)
class Unit(Tactic):
    name: str
    arg: ThmList | Hole | str | None = None

    def __str__(self):
        return print_tactic(self)

    def units(self):
        return [self]


@dataclass(frozen=True)
class Then(Tactic):
    first: Tactic
    second: Tactic

    def __str__(self):
        return print_tactic(self)

    def units(self):
        return self.first.units() + self.second.units()


@dataclass(frozen=True)
class ThenL(Tactic):
    first: Tactic
    branches: tuple[Tactic, ...]

    def __str__(self):
        return print_tactic(self)

    def units(self):
        out = self.first.units()
        for b in self.branches:
            out += b.units()
        return out


@dataclass(frozen=True)
class Alias(Tactic):
    """Reference to a script-local ``def``; removed by globalization."""

    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Paren(Tactic):
    """Explicit parentheses kept only where the source had them."""

    inner: Tactic

    def __str__(self):
        return print_tactic(self)

    def units(self):
        return self.inner.units()


def print_tactic(t: Tactic) -> str:
    if isinstance(t, Unit):
        if t.arg is None:
            return t.name
        if isinstance(t.arg, str):
            return f'{t.name} "{t.arg}"'
        return f"{t.name} {t.arg}"
    if isinstance(t, Then):
        second = print_tactic(t.second)
        if isinstance(t.second, (Then, ThenL)):
            second = f"({second})"
        return f"{print_tactic(t.first)} THEN {second}"
    if isinstance(t, ThenL):
        return f"{print_tactic(t.first)} THENL [" + ", ".join(print_tactic(b) for b in t.branches) + "]"
    if isinstance(t, Paren):
        return f"({print_tactic(t.inner)})"
    if isinstance(t, Alias):
        return t.name
    raise TypeError(t)


def strip_parens(t: Tactic) -> Tactic:
    if isinstance(t, Paren):
        return strip_parens(t.inner)
    if isinstance(t, Then):
        return Then(strip_parens(t.first), strip_parens(t.second))
    if isinstance(t, ThenL):
        return ThenL(strip_parens(t.first), tuple(strip_parens(b) for b in t.branches))
    return t


def _parse_thms(ts: TokenStream) -> ThmList | Hole:
    if ts.at(PLACEHOLDER):
        ts.next()
        return Hole()
    ts.expect("[")
    names = []
    if not ts.at("]"):
        while True:
            t = ts.next()
            if t.kind != "name":
                raise ts.error("expected a theorem name", t)
            names.append(t.text)
            if not ts.at(","):
                break
            ts.next()
    ts.expect("]")
    return ThmList(tuple(names))


def _parse_atom(ts: TokenStream) -> Tactic:
    t = ts.peek()
    if t.text == "(":
        ts.next()
        inner = parse_tactic_tokens(ts)
        ts.expect(")")
        return Paren(inner)
    if t.kind != "name":
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise ts.error(f"expected a tactic, found {found}")
    ts.next()
    if t.text in NULLARY:
        return Unit(t.text)
    if t.text in LIST_TACTICS:
        return Unit(t.text, _parse_thms(ts))
    if t.text in VAR_TACTICS:
        s = ts.next()
        if s.kind != "string":
            raise ts.error(f"{t.text} expects a quoted variable name", s)
        return Unit(t.text, s.text[1:-1])
    if t.text in COMBINATORS:
        raise ts.error(f"unexpected {t.text}", t)
    if "." in t.text:
        raise ts.error(f"unknown tactic {t.text!r}", t)
    return Alias(t.text)


def parse_tactic_tokens(ts: TokenStream) -> Tactic:
    node = _parse_atom(ts)
    while ts.peek().text in COMBINATORS:
        op = ts.next().text
        if op == "THEN":
            node = Then(node, _parse_atom(ts))
        else:
            ts.expect("[")
            branches = []
            if not ts.at("]"):
                branches.append(parse_tactic_tokens(ts))
                while ts.at(","):
                    ts.next()
                    branches.append(parse_tactic_tokens(ts))
            ts.expect("]")
            node = ThenL(node, tuple(branches))
    return node


def parse_tactic(text: str, keep_parens: bool = False) -> Tactic:
    ts = TokenStream(text)
    t = parse_tactic_tokens(ts)
    if ts.peek().kind != "eof":
        raise ts.error(f"trailing input {ts.peek().text!r}")
    return t if keep_parens else strip_parens(t)


def normalize_code(text: str) -> str:
    """Whitespace-canonical form of a tactic text."""
    return print_tactic(parse_tactic(text))


def map_units(t: Tactic, f) -> Tactic:
    if isinstance(t, Unit):
        return f(t)
    if isinstance(t, Then):
        return Then(map_units(t.first, f), map_units(t.second, f))
    if isinstance(t, ThenL):
        return ThenL(map_units(t.first, f), tuple(map_units(b, f) for b in t.branches))
    if isinstance(t, Paren):
        return Paren(map_units(t.inner, f))
    return t


def iter_thm_names(t: Tactic) -> Iterator[str]:
    for u in t.units():
        if isinstance(u.arg, ThmList):
            yield from u.arg.names
