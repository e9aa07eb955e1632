"""Corpus scripts: parsing, alias inlining, name qualification and unit splitting.

Script grammar::

    theory <id>
    def <ALIAS> = <tactic-expr>
    theorem <id> : <goal> := <tactic-expr> .
    -- comment
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..goalsys.syntax import (
    Alias,
    ParseError,
    Paren,
    Tactic,
    Then,
    ThenL,
    ThmList,
    TokenStream,
    Unit,
    parse_goal_tokens,
    parse_tactic_tokens,
    print_tactic,
    strip_parens,
)
from ..goalsys.tactics import Context
from ..goalsys.terms import Goal

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class TheoryDecl:
    name: str
    line: int = 0


@dataclass(frozen=True)
class AliasDef:
    name: str
    body: Tactic
    line: int = 0


@dataclass(frozen=True)
class TheoremDecl:
    name: str
    statement: Goal
    proof: Tactic
    proof_text: str
    line: int = 0


Decl = TheoryDecl | AliasDef | TheoremDecl


def _line_col(text: str, pos: int) -> tuple[int, int]:
    line = text.count("\n", 0, pos) + 1
    col = pos - (text.rfind("\n", 0, pos) + 1) + 1
    return line, col


def _relocate(text: str, e: ParseError) -> ParseError:
    line, col = _line_col(text, e.pos - 1)
    return ParseError(e.msg, e.pos, line, col)


def parse_script(text: str) -> list[Decl]:
    ts = TokenStream(text)
    out: list[Decl] = []
    try:
        while ts.peek().kind != "eof":
            tok = ts.next()
            line = _line_col(text, tok.pos)[0]
            if tok.text == "theory":
                name = ts.next()
                if name.kind != "name" or "." in name.text:
                    raise ts.error("expected a theory name", name)
                out.append(TheoryDecl(name.text, line))
            elif tok.text == "def":
                name = ts.next()
                if name.kind != "name" or "." in name.text:
                    raise ts.error("expected an alias name", name)
                ts.expect("=")
                out.append(AliasDef(name.text, parse_tactic_tokens(ts), line))
            elif tok.text == "theorem":
                name = ts.next()
                if name.kind != "name" or "." in name.text:
                    raise ts.error("expected a theorem name", name)
                ts.expect(":")
                stmt = parse_goal_tokens(ts)
                ts.expect(":=")
                start = ts.peek().pos
                proof = parse_tactic_tokens(ts)
                end = ts.peek().pos
                if not ts.at("."):
                    raise ts.error("unterminated proof: expected '.'")
                ts.next()
                out.append(TheoremDecl(name.text, stmt, proof, text[start:end].strip(), line))
            else:
                raise ts.error(f"expected 'theory', 'def' or 'theorem', found {tok.text!r}", tok)
    except ParseError as e:
        raise _relocate(text, e) from None
    return out


@dataclass
class Globalized:
    tactic: Tactic
    unresolved: list[str] = field(default_factory=list)
    references: list[str] = field(default_factory=list)

    @property
    def text(self) -> str:
        return print_tactic(self.tactic)


def globalize(proof: Tactic, aliases: dict[str, Tactic], ctx: Context) -> Globalized:
    """Inline aliases and fully qualify theorem references.

    Unresolvable references stay unqualified and are reported in ``unresolved``.
    """
    res = Globalized(proof)

    def walk(t: Tactic, depth: int = 0) -> Tactic:
        if depth > 50:
            raise ValueError("alias expansion too deep")
        if isinstance(t, Alias):
            if t.name not in aliases:
                res.unresolved.append(t.name)
                return t
            body = walk(aliases[t.name], depth + 1)
            return Paren(body) if isinstance(body, (Then, ThenL)) else body
        if isinstance(t, Unit):
            if isinstance(t.arg, ThmList):
                names = []
                for n in t.arg.names:
                    q = ctx.resolve(n)
                    if q is None:
                        res.unresolved.append(n)
                        names.append(n)
                    else:
                        res.references.append(q)
                        names.append(q)
                return Unit(t.name, ThmList(tuple(names)))
            return t
        if isinstance(t, Then):
            return Then(walk(t.first, depth), walk(t.second, depth))
        if isinstance(t, ThenL):
            return ThenL(walk(t.first, depth), tuple(walk(b, depth) for b in t.branches))
        if isinstance(t, Paren):
            return Paren(walk(t.inner, depth))
        raise TypeError(t)

    res.tactic = walk(proof)
    for n in res.unresolved:
        log.warning("globalization failed for %s", n)
    return res


def split_tactic_units(proof: Tactic) -> tuple[Tactic, list[Unit]]:
    """Combinator skeleton (parentheses dropped) and its units in execution order."""
    tree = strip_parens(proof)
    return tree, tree.units()
