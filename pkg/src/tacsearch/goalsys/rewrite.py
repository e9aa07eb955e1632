"""Leftmost-outermost term rewriting with step, size and wall-clock bounds."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .terms import App, Equation, Term, Var, term_vars

MAX_STEPS = 1000
MAX_TERM_SIZE = 4000


class TacticTimeout(Exception):
    pass


class RewriteLimit(Exception):
    pass


class Deadline:
    __slots__ = ("end",)

    def __init__(self, seconds: float | None):
        self.end = None if seconds is None else time.monotonic() + seconds

    def check(self):
        if self.end is not None and time.monotonic() > self.end:
            raise TacticTimeout()

    @property
    def expired(self) -> bool:
        return self.end is not None and time.monotonic() > self.end


def _is_permutation(lhs: Term, rhs: Term) -> bool:
    """True if ``rhs`` is ``lhs`` with its variables permuted (and differs from it)."""
    if lhs == rhs:
        return False
    mapping: dict[str, str] = {}

    def walk(a, b):
        if isinstance(a, Var):
            if not isinstance(b, Var):
                return False
            return mapping.setdefault(a.name, b.name) == b.name
        if not isinstance(b, App) or a.sym != b.sym:
            return False
        return all(walk(x, y) for x, y in zip(a.args, b.args))

    return walk(lhs, rhs) and len(set(mapping.values())) == len(mapping)


def term_order_key(t: Term) -> tuple:
    """Total order: size, then variables before applications, then name, then arguments."""
    if isinstance(t, Var):
        return (1, 0, t.name, ())
    return (t.size, 1, t.sym, tuple(term_order_key(a) for a in t.args))


@dataclass(frozen=True)
class Rule:
    lhs: Term
    rhs: Term
    name: str = ""
    fixed: bool = False  # variables are goal constants (hypotheses)
    permutative: bool = False

    @staticmethod
    def oriented(eq: Equation, name: str = "", reverse: bool = False, fixed: bool = False) -> Rule | None:
        lhs, rhs = (eq.rhs, eq.lhs) if reverse else (eq.lhs, eq.rhs)
        if lhs == rhs:
            return None
        if not fixed:
            if isinstance(lhs, Var):
                return None
            if not set(term_vars(rhs)) <= set(term_vars(lhs)):
                return None
        return Rule(lhs, rhs, name, fixed, (not fixed) and _is_permutation(lhs, rhs))


def match(pat: Term, t: Term, bind: dict) -> dict | None:
    if isinstance(pat, Var):
        have = bind.get(pat.name)
        if have is None:
            bind[pat.name] = t
            return bind
        return bind if have == t else None
    if not isinstance(t, App) or t.sym != pat.sym:
        return None
    for p, a in zip(pat.args, t.args):
        if match(p, a, bind) is None:
            return None
    return bind


def instantiate(t: Term, bind: dict) -> Term:
    if isinstance(t, Var):
        return bind[t.name]
    if not t.args:
        return t
    return App(t.sym, tuple(instantiate(a, bind) for a in t.args))


class RuleSet:
    """Rules indexed by head symbol; fixed (hypothesis) rules by exact left side."""

    def __init__(self, rules=()):
        self.by_head: dict[str, list[Rule]] = {}
        self.fixed: dict[Term, Term] = {}
        self.rules: list[Rule] = []
        for r in rules:
            self.add(r)

    def add(self, r: Rule | None):
        if r is None:
            return
        self.rules.append(r)
        if r.fixed:
            self.fixed.setdefault(r.lhs, r.rhs)
        else:
            self.by_head.setdefault(r.lhs.sym, []).append(r)

    def __len__(self):
        return len(self.rules)

    def apply_at_root(self, t: Term) -> Term | None:
        hit = self.fixed.get(t)
        if hit is not None:
            return hit
        if isinstance(t, Var):
            return None
        for r in self.by_head.get(t.sym, ()):
            b = match(r.lhs, t, {})
            if b is None:
                continue
            new = instantiate(r.rhs, b)
            if r.permutative and not term_order_key(new) < term_order_key(t):
                continue
            return new
        return None

    def step(self, t: Term) -> Term | None:
        """One leftmost-outermost rewrite step, or None at normal form."""
        new = self.apply_at_root(t)
        if new is not None:
            return new
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                na = self.step(a)
                if na is not None:
                    args = t.args[:i] + (na,) + t.args[i + 1 :]
                    return App(t.sym, args)
        return None

    def rewrites_anywhere(self, t: Term):
        """All single-step rewrites of ``t`` at any position (for search)."""
        new = self.apply_all_root(t)
        yield from new
        if isinstance(t, App):
            for i, a in enumerate(t.args):
                for na in self.rewrites_anywhere(a):
                    yield App(t.sym, t.args[:i] + (na,) + t.args[i + 1 :])

    def apply_all_root(self, t: Term) -> list[Term]:
        out = []
        hit = self.fixed.get(t)
        if hit is not None:
            out.append(hit)
        if isinstance(t, App):
            for r in self.by_head.get(t.sym, ()):
                b = match(r.lhs, t, {})
                if b is not None:
                    out.append(instantiate(r.rhs, b))
        return out


def normalize(t: Term, rules: RuleSet, deadline: Deadline | None = None, limit: int = MAX_STEPS) -> tuple[Term, int]:
    steps = 0
    while True:
        new = rules.step(t)
        if new is None:
            return t, steps
        if steps >= limit:
            raise RewriteLimit()
        t = new
        steps += 1
        if t.size > MAX_TERM_SIZE:
            raise RewriteLimit()
        if deadline is not None:
            deadline.check()


def rewrite_equation(eq: Equation, rules: RuleSet, deadline: Deadline | None = None, limit: int = MAX_STEPS) -> tuple[Equation, int, bool]:
    """Rewrite both sides, left side first, checking closure after every step.

    Returns ``(equation, steps, closed)``. Raises :class:`RewriteLimit` when the
    step bound is exhausted before a normal form is reached.
    """
    lhs, rhs = eq.lhs, eq.rhs
    steps = 0
    if lhs == rhs:
        return eq, 0, True
    while True:
        new = rules.step(lhs)
        if new is not None:
            cand = (new, rhs)
        else:
            new = rules.step(rhs)
            if new is None:
                return Equation(lhs, rhs), steps, False
            cand = (lhs, new)
        if steps >= limit:
            raise RewriteLimit()
        lhs, rhs = cand
        steps += 1
        if lhs.size + rhs.size > MAX_TERM_SIZE:
            raise RewriteLimit()
        if lhs == rhs:
            return Equation(lhs, rhs), steps, True
        if deadline is not None:
            deadline.check()
