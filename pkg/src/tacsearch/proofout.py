"""Turning a solved search tree into a short, readable, replayable script."""

from __future__ import annotations

import time
from dataclasses import dataclass

from .goalsys.syntax import Tactic, Then, ThenL, ThmList, Unit, map_units, parse_tactic, print_tactic
from .goalsys.tactics import Context, Success, apply_tactic, replay_proof
from .goalsys.terms import Goal

# a trial slower than this counts as a different effect
STEP_TIMEOUT = 0.25
REPLAY_TIMEOUT = 10.0


@dataclass(frozen=True)
class ProofScript:
    structure: Tactic

    @property
    def text(self) -> str:
        return print_tactic(self.structure)

    @property
    def unit_count(self) -> int:
        return len(self.structure.units())

    def __str__(self):
        return self.text


def _tac(script) -> Tactic:
    if isinstance(script, ProofScript):
        return script.structure
    if isinstance(script, Tactic):
        return script
    return parse_tactic(script)


def unit_count(script) -> int:
    return len(_tac(script).units())


# -------------------------------------------------------------- extraction


def extract_proof(tree) -> Tactic:
    """Read a proof off a solved tree, taking the first solving tactic of every goal."""
    root = tree.nodes[tree.root.id]
    assert root.solved, "extract_proof needs a solved root"

    def p_node(node) -> list[Tactic]:
        return [p_goal(node, i) for i in range(len(node.goals))]

    def p_goal(node, i) -> Tactic:
        child = next(tree.nodes[c] for c in node.children[i] if tree.nodes[c].solved)
        t = parse_tactic(child.tactic)
        subs = p_node(child)
        if not subs:
            return t
        if len(subs) == 1:
            return Then(t, subs[0])
        return ThenL(t, tuple(subs))

    return p_goal(root, 0)


# ------------------------------------------------------------ minimization


class _Effects:
    """Memoized goal effects for the minimizers."""

    def __init__(self, ctx: Context | None, timeout: float = STEP_TIMEOUT):
        self.ctx = ctx
        self.timeout = timeout
        self.memo: dict[tuple[str, Goal], tuple[Goal, ...] | None] = {}

    def __call__(self, t: Tactic, g: Goal) -> tuple[Goal, ...] | None:
        key = (print_tactic(t), g)
        if key not in self.memo:
            out = apply_tactic(t, g, self.timeout, self.ctx)
            self.memo[key] = out.goals if isinstance(out, Success) else None
        return self.memo[key]

    def same(self, t1: Tactic, t2: Tactic, goals) -> bool:
        for g in goals:
            a, b = self(t1, g), self(t2, g)
            if a is None or b is None:
                return False
            if tuple(x.key for x in a) != tuple(x.key for x in b):
                return False
        return True

    def outputs(self, t: Tactic, goals) -> list[Goal] | None:
        res: list[Goal] = []
        for g in goals:
            o = self(t, g)
            if o is None:
                return None
            res.extend(o)
        return res


def _min_len(t: Tactic, goals: list[Goal], eff: _Effects) -> Tactic:
    if isinstance(t, Then):
        if eff.same(t.second, t, goals):
            return _min_len(t.second, goals, eff)
        first = _min_len(t.first, goals, eff)
        subs = eff.outputs(first, goals)
        if subs is None:
            return t
        return Then(first, _min_len(t.second, subs, eff))
    if isinstance(t, ThenL):
        first = _min_len(t.first, goals, eff)
        outs = [eff(first, g) for g in goals]
        if any(o is None or len(o) != len(t.branches) for o in outs):
            return t
        branches = tuple(_min_len(b, [o[i] for o in outs], eff) for i, b in enumerate(t.branches))
        return ThenL(first, branches)
    return t


def _min_args(t: Tactic, goals: list[Goal], eff: _Effects) -> Tactic:
    if isinstance(t, Unit):
        if not isinstance(t.arg, ThmList):
            return t
        names = list(t.arg.names)
        i = 0
        while i < len(names):
            cand = Unit(t.name, ThmList(tuple(names[:i] + names[i + 1:])))
            if eff.same(cand, Unit(t.name, ThmList(tuple(names))), goals):
                names.pop(i)
            else:
                i += 1
        return Unit(t.name, ThmList(tuple(names)))
    if isinstance(t, Then):
        first = _min_args(t.first, goals, eff)
        subs = eff.outputs(first, goals)
        if subs is None:
            return t
        return Then(first, _min_args(t.second, subs, eff))
    if isinstance(t, ThenL):
        first = _min_args(t.first, goals, eff)
        outs = [eff(first, g) for g in goals]
        if any(o is None or len(o) != len(t.branches) for o in outs):
            return t
        return ThenL(first, tuple(_min_args(b, [o[i] for o in outs], eff) for i, b in enumerate(t.branches)))
    return t


def _fixpoint(fn, script, conjecture: Goal, ctx: Context | None) -> Tactic:
    t = _tac(script)
    eff = _Effects(ctx)
    while True:
        nxt = fn(t, [conjecture], eff)
        if nxt == t:
            return t
        if not replay_proof(nxt, conjecture, ctx, REPLAY_TIMEOUT):
            return t
        t = nxt


def minimize_length(script, conjecture: Goal, ctx: Context | None = None) -> Tactic:
    """Drop ``A`` from ``A THEN B`` wherever ``B`` alone has the same effect."""
    return _fixpoint(_min_len, script, conjecture, ctx)


def minimize_args(script, conjecture: Goal, ctx: Context | None = None) -> Tactic:
    """Greedily drop theorem-list elements whose removal keeps each unit's effect."""
    return _fixpoint(_min_args, script, conjecture, ctx)


def embellish(script, conjecture: Goal, ctx: Context) -> Tactic:
    """Drop theory qualifiers from names that stay unambiguous."""
    t = _tac(script)

    def short(u: Unit) -> Unit:
        if not isinstance(u.arg, ThmList):
            return u
        names = []
        for q in u.arg.names:
            s = q.split(".", 1)[-1]
            keep = "." in q and not (ctx.is_unambiguous(s) and ctx.resolve(s) == q)
            names.append(q if keep else s)
        return Unit(u.name, ThmList(tuple(names)))

    pretty = map_units(t, short)
    if pretty == t:
        return t
    a = apply_tactic(t, conjecture, REPLAY_TIMEOUT, ctx)
    b = apply_tactic(pretty, conjecture, REPLAY_TIMEOUT, ctx)
    if isinstance(a, Success) and isinstance(b, Success) and a.goals == b.goals:
        return pretty
    return t


def finalize(raw, conjecture: Goal, ctx: Context, minimize: bool = True) -> str:
    """Minimize then embellish, keeping only stages that still replay."""
    t = _tac(raw)
    if minimize:
        t = minimize_length(t, conjecture, ctx)
        t = minimize_args(t, conjecture, ctx)
    t = embellish(t, conjecture, ctx)
    return print_tactic(t)


def sidecar(theorem: str, script, conjecture: Goal, ctx: Context | None = None) -> dict:
    start = time.perf_counter()
    ok = replay_proof(script, conjecture, ctx, REPLAY_TIMEOUT)
    ms = (time.perf_counter() - start) * 1000
    return {
        "theorem": theorem,
        "script": print_tactic(_tac(script)),
        "unit_count": unit_count(script),
        "replay_ms": round(ms, 3),
        "replays": ok,
    }
