"""Tactic interpreter, theorem context and replay-based validation."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .rewrite import (
    MAX_STEPS,
    Deadline,
    RewriteLimit,
    Rule,
    RuleSet,
    TacticTimeout,
    normalize,
    rewrite_equation,
)
from .syntax import Alias, Hole, Paren, Tactic, Then, ThenL, ThmList, Unit, parse_tactic
from .terms import App, Goal, Var, fresh_name, substitute, var_sorts

log = logging.getLogger(__name__)

# Built-in definitional equations, registered per theory of the signature.
BASE_SIMPSET: dict[str, tuple[str, ...]] = {
    "nat": (
        "add(0,y) = y",
        "add(S(x),y) = S(add(x,y))",
        "mul(0,y) = 0",
        "mul(S(x),y) = add(y,mul(x,y))",
    ),
    "list": (
        "app(nil,l) = l",
        "app(cons(h,t),l) = cons(h,app(t,l))",
        "len(nil) = 0",
        "len(cons(h,t)) = S(len(t))",
        "rev(nil) = nil",
        "rev(cons(h,t)) = app(rev(t),cons(h,nil))",
    ),
}

AUTO_DEPTH = 4
AUTO_NODES = 5000


def _base_rules() -> list[Rule]:
    from .syntax import parse_goal

    rules = []
    for thy, eqs in BASE_SIMPSET.items():
        for i, text in enumerate(eqs):
            eq = parse_goal(text).concl
            rules.append(Rule.oriented(eq, f"{thy}.def{i}"))
    return rules


BASE_RULES = _base_rules()


class TacticFailure(Exception):
    pass


@dataclass(frozen=True)
class Success:
    goals: tuple[Goal, ...]

    @property
    def ok(self):
        return True


@dataclass(frozen=True)
class Failure:
    reason: str = ""

    @property
    def ok(self):
        return False


@dataclass(frozen=True)
class Timeout:
    @property
    def ok(self):
        return False


TacticOutcome = Success | Failure | Timeout


@dataclass
class Context:
    """Theorems visible to tactics, in declaration order, plus the current theory."""

    theorems: dict[str, Goal] = field(default_factory=dict)
    theory: str | None = None
    _by_short: dict[str, list[str]] = field(default_factory=dict, repr=False)
    _rules: dict[tuple[str, bool], Rule | None] = field(default_factory=dict, repr=False)
    stats: dict[str, int] = field(default_factory=lambda: {"max_rewrite_steps": 0}, repr=False)

    def __post_init__(self):
        for q in self.theorems:
            self._index(q)

    def _index(self, qname: str):
        short = qname.split(".", 1)[1]
        self._by_short.setdefault(short, []).append(qname)

    def add(self, theory: str, name: str, stmt: Goal) -> str:
        q = f"{theory}.{name}"
        if q in self.theorems:
            raise ValueError(f"duplicate theorem {q}")
        self.theorems[q] = stmt
        self._index(q)
        return q

    def copy(self) -> Context:
        return Context(dict(self.theorems), self.theory)

    def resolve(self, name: str) -> str | None:
        if "." in name:
            return name if name in self.theorems else None
        cands = self._by_short.get(name, [])
        if self.theory is not None and f"{self.theory}.{name}" in self.theorems:
            return f"{self.theory}.{name}"
        if len(cands) == 1:
            return cands[0]
        return None

    def is_unambiguous(self, short: str) -> bool:
        return len(self._by_short.get(short, [])) == 1

    def rule(self, name: str, reverse: bool = False) -> Rule | None:
        q = self.resolve(name)
        if q is None:
            raise TacticFailure(f"unknown theorem {name}")
        key = (q, reverse)
        if key not in self._rules:
            stmt = self.theorems[q]
            # conditional theorems are not usable as rewrite rules
            self._rules[key] = None if stmt.hyps else Rule.oriented(stmt.concl, q, reverse)
        return self._rules[key]


def _thm_names(u: Unit) -> tuple[str, ...]:
    if isinstance(u.arg, Hole):
        raise TacticFailure("uninstantiated placeholder")
    assert isinstance(u.arg, ThmList)
    return u.arg.names


def _hyp_rules(g: Goal, reverse: bool = False) -> list[Rule]:
    return [Rule.oriented(h, "hyp", reverse=reverse, fixed=True) for h in g.hyps]


def _rewrite(u: Unit, g: Goal, ctx: Context, deadline: Deadline, reverse: bool, simp: bool) -> tuple[Goal, ...]:
    rules = RuleSet()
    for n in _thm_names(u):
        rules.add(ctx.rule(n, reverse))
    for r in _hyp_rules(g, reverse):
        rules.add(r)
    if simp:
        for r in BASE_RULES:
            rules.add(r)
    try:
        eq, steps, closed = rewrite_equation(g.concl, rules, deadline, MAX_STEPS)
    except RewriteLimit:
        raise TacticFailure("rewrite bound exceeded") from None
    ctx.stats["max_rewrite_steps"] = max(ctx.stats["max_rewrite_steps"], steps)
    if closed:
        return ()
    if steps == 0:
        raise TacticFailure("no rewrite applied")
    return (Goal(g.hyps, eq),)


def _auto(u: Unit, g: Goal, ctx: Context, deadline: Deadline) -> tuple[Goal, ...]:
    names = _thm_names(u)
    norm = RuleSet()
    steps = RuleSet()
    for n in names:
        norm.add(ctx.rule(n))
        steps.add(ctx.rule(n))
        steps.add(ctx.rule(n, reverse=True))
    for r in _hyp_rules(g):
        norm.add(r)
        steps.add(r)
    for r in _hyp_rules(g, reverse=True):
        steps.add(r)
    for r in BASE_RULES:
        norm.add(r)

    def nf(t):
        return normalize(t, norm, deadline)[0]

    try:
        left, right = nf(g.concl.lhs), nf(g.concl.rhs)
    except RewriteLimit:
        raise TacticFailure("auto: normalization diverged") from None
    if left == right:
        return ()
    seen = [{left}, {right}]
    frontier = [[left], [right]]
    nodes = 2
    for _ in range(AUTO_DEPTH):
        side = 0 if len(frontier[0]) <= len(frontier[1]) else 1
        nxt = []
        for t in frontier[side]:
            for s in steps.rewrites_anywhere(t):
                deadline.check()
                try:
                    s = nf(s)
                except RewriteLimit:
                    continue
                if s in seen[1 - side]:
                    return ()
                if s not in seen[side]:
                    seen[side].add(s)
                    nxt.append(s)
                    nodes += 1
                    if nodes >= AUTO_NODES:
                        raise TacticFailure("auto: node budget exhausted")
        frontier[side] = nxt
        if not nxt:
            break
    raise TacticFailure("auto: no proof found")


def _split(u: Unit, g: Goal, induct: bool) -> tuple[Goal, ...]:
    v = u.arg
    assert isinstance(v, str)
    names = g.vars()
    if v not in names:
        raise TacticFailure(f"no variable {v}")
    sort = var_sorts(g)[v]
    if sort == "nat":
        base, step = App("0"), App("S", (Var(v),))
    else:
        h = Var(fresh_name("h", set(names)))
        base, step = App("nil"), App("cons", (h, Var(v)))
    if induct:
        if any(v in h.vars() for h in g.hyps):
            raise TacticFailure(f"{v} occurs in a hypothesis")
        g0 = g.substitute({v: base})
        g1 = Goal(g.hyps + (g.concl,), g.concl.map(lambda t: substitute(t, {v: step})))
        return (g0, g1)
    return (g.substitute({v: base}), g.substitute({v: step}))


def _unit(u: Unit, g: Goal, ctx: Context, deadline: Deadline) -> tuple[Goal, ...]:
    name = u.name
    if name == "Refl":
        if g.concl.lhs == g.concl.rhs:
            return ()
        raise TacticFailure("sides differ")
    if name == "Sym":
        return (Goal(g.hyps, g.concl.swap()),)
    if name == "Assumption":
        if g.concl in g.hyps:
            return ()
        raise TacticFailure("no matching hypothesis")
    if name == "Rewrite":
        return _rewrite(u, g, ctx, deadline, reverse=False, simp=False)
    if name == "RewriteRev":
        return _rewrite(u, g, ctx, deadline, reverse=True, simp=False)
    if name == "Simp":
        return _rewrite(u, g, ctx, deadline, reverse=False, simp=True)
    if name == "Auto":
        return _auto(u, g, ctx, deadline)
    if name == "Induct":
        return _split(u, g, induct=True)
    if name == "Cases":
        return _split(u, g, induct=False)
    raise TacticFailure(f"unknown tactic {name}")


def run(t: Tactic, g: Goal, ctx: Context, deadline: Deadline) -> tuple[Goal, ...]:
    """Interpret a tactic expression; raises TacticFailure / TacticTimeout."""
    deadline.check()
    if isinstance(t, Unit):
        return _unit(t, g, ctx, deadline)
    if isinstance(t, Paren):
        return run(t.inner, g, ctx, deadline)
    if isinstance(t, Then):
        out: list[Goal] = []
        for sub in run(t.first, g, ctx, deadline):
            out.extend(run(t.second, sub, ctx, deadline))
        return tuple(out)
    if isinstance(t, ThenL):
        subs = run(t.first, g, ctx, deadline)
        if len(subs) != len(t.branches):
            raise TacticFailure(f"THENL expects {len(subs)} tactics, got {len(t.branches)}")
        out = []
        for sub, b in zip(subs, t.branches):
            out.extend(run(b, sub, ctx, deadline))
        return tuple(out)
    if isinstance(t, Alias):
        raise TacticFailure(f"unresolved alias {t.name}")
    raise TypeError(t)


def as_tactic(code) -> Tactic:
    if isinstance(code, Tactic):
        return code
    return parse_tactic(str(code))


def apply_tactic(code, g: Goal, timeout: float | None, ctx: Context | None = None) -> TacticOutcome:
    """Apply a tactic with a wall-clock budget; deterministic away from the budget edge."""
    ctx = ctx if ctx is not None else Context()
    t = as_tactic(code)
    deadline = Deadline(timeout)
    try:
        goals = run(t, g, ctx, deadline)
    except TacticTimeout:
        return Timeout()
    except TacticFailure as e:
        return Failure(str(e))
    except RecursionError:
        return Failure("recursion limit")
    if deadline.expired:
        return Timeout()
    return Success(goals)


def replay_proof(script, g: Goal, ctx: Context | None = None, timeout: float = 10.0) -> bool:
    """True iff the script closes ``g`` completely."""
    try:
        t = as_tactic(script)
    except ValueError:
        return False
    out = apply_tactic(t, g, timeout, ctx)
    return isinstance(out, Success) and not out.goals
