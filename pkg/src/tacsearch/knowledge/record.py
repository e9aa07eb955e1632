"""Recording goal-tactic pairs from human proofs, with orthogonalization and abstraction."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from ..config import SearchConfig
from ..goalsys.rewrite import Deadline, TacticTimeout
from ..goalsys.syntax import Hole, Tactic, Then, ThenL, ThmList, Unit, map_units, parse_tactic, print_tactic
from ..goalsys.tactics import Context, Failure, Success, TacticFailure, TacticOutcome, apply_tactic, run
from ..goalsys.terms import Goal, list_subsumed
from ..predict import goal_features
from .db import GoalListDB, GoalListRecord, GoalTacticPair, KnowledgeBase, TacticDB, TheoremDB
from .script import TheoremDecl, globalize, split_tactic_units

log = logging.getLogger(__name__)

RECORD_TIMEOUT = 2.0


# ------------------------------------------------------------- abstraction


@dataclass(frozen=True)
class AbstractedTactic:
    code: str
    origin: str


def has_hole(code: str) -> bool:
    return "□" in code


def abstract_tactic(t: str | Tactic) -> AbstractedTactic | None:
    """Replace every literal theorem list by the placeholder; None if there is none."""
    tac = parse_tactic(t) if isinstance(t, str) else t
    if not any(isinstance(u.arg, ThmList) for u in tac.units()):
        return None
    abst = map_units(tac, lambda u: Unit(u.name, Hole()) if isinstance(u.arg, ThmList) else u)
    return AbstractedTactic(print_tactic(abst), print_tactic(tac))


def fill_holes(code: str | Tactic, lists) -> str:
    """Fill placeholders left to right; ``lists`` is one list or a sequence per hole."""
    tac = parse_tactic(code) if isinstance(code, str) else code
    if isinstance(lists, ThmList):
        it = None
        fixed = lists
    else:
        it = iter(lists)
        fixed = None

    def fill(u: Unit):
        if isinstance(u.arg, Hole):
            return Unit(u.name, fixed if it is None else next(it))
        return u

    return print_tactic(map_units(tac, fill))


def instantiate(code: str, g: Goal, theorems: TheoremDB | None, radius: int = 16, fdb=None, names=None) -> str:
    """Fill every placeholder with the theorems nearest to ``g``."""
    if not has_hole(code):
        return code
    fdb = fdb if fdb is not None else (theorems.features if theorems is not None else None)
    if fdb is None or fdb.N == 0:
        return fill_holes(code, ThmList(()))
    preds = fdb.predict(goal_features(g), radius, "sim1")
    if names is None:
        names = [theorems.records[i].name for i, _ in preds]
    else:
        names = [names(i) for i, _ in preds]
    return fill_holes(code, ThmList(tuple(names)))


# --------------------------------------------------------- competitions


class OutcomeCache:
    """Memoized tactic applications keyed by (code, goal)."""

    def __init__(self, ctx: Context, cfg: SearchConfig):
        self.ctx = ctx
        self.cfg = cfg
        self.table: dict[tuple[str, Goal], TacticOutcome] = {}
        self.hits = 0

    def timeout_for(self, code: str) -> float:
        return self.cfg.auto_timeout if code.startswith("Auto ") and " THEN" not in code else self.cfg.tactic_timeout

    def __call__(self, code: str, g: Goal, timeout: float | None = None) -> TacticOutcome:
        key = (code, g)
        out = self.table.get(key)
        if out is not None:
            self.hits += 1
            return out
        out = apply_tactic(code, g, timeout if timeout is not None else self.timeout_for(code), self.ctx)
        if not (isinstance(out, Failure) and out.reason.startswith("unknown theorem")):
            self.table[key] = out
        return out


@dataclass
class Candidate:
    code: str  # as stored (may hold placeholders)
    concrete: str
    coverage: int
    order: tuple
    outcome: TacticOutcome

    @property
    def output(self) -> tuple[Goal, ...] | None:
        return self.outcome.goals if isinstance(self.outcome, Success) else None


@dataclass
class Competition:
    goal: Goal
    incumbent: str
    candidates: list[Candidate]
    winner: Candidate

    def goal_list_records(self) -> list[GoalListRecord]:
        out = [GoalListRecord(self.winner.output, self.goal, True)]
        for c in self.candidates:
            if c is not self.winner and c.output is not None:
                out.append(GoalListRecord(c.output, self.goal, False))
        return out


def orthogonalize(
    t: str,
    g: Goal,
    db: TacticDB,
    outcome: OutcomeCache,
    theorems: TheoremDB | None = None,
    radius: int = 20,
    abstraction: bool = True,
    abs_radius: int = 16,
) -> Competition:
    """Hold a competition on ``g``: the highest-coverage tactic subsuming ``t`` wins.

    Ties go to the earliest tactic in the database, then to ``t`` itself.
    """
    base = outcome(t, g)
    if not isinstance(base, Success):
        raise ValueError(f"incumbent {t} does not succeed on {g}")
    target = base.goals

    pool: list[str] = []
    if len(db):
        for seq, _ in db.features.predict(goal_features(g), radius, "sim1"):
            code = db.pairs[seq].tactic
            if code not in pool:
                pool.append(code)
    if t not in pool:
        pool.append(t)
    abst = abstract_tactic(t) if abstraction else None
    if abst is not None and abst.code not in pool:
        pool.append(abst.code)

    n = len(pool)
    cands: list[Candidate] = []
    for code in pool:
        concrete = instantiate(code, g, theorems, abs_radius) if has_hole(code) else code
        cov = db.coverage(code)
        if abst is not None and code == abst.code:
            cov = max(cov, db.coverage(t))
        first = db.first_seq(code)
        if first is not None:
            order = (0, first)
        else:
            order = (1, 0 if code == t else 1)
        cands.append(Candidate(code, concrete, cov, order, outcome(concrete, g) if code != t else base))
    assert len(cands) == n

    winner = None
    for c in cands:
        if c.output is None or not list_subsumed(c.output, target):
            continue
        if winner is None or (-c.coverage, c.order) < (-winner.coverage, winner.order):
            winner = c
    assert winner is not None  # t subsumes itself
    return Competition(g, t, cands, winner)


def subsumes_tactic(t1: str, t2: str, g: Goal, outcome: OutcomeCache) -> bool:
    o1, o2 = outcome(t1, g), outcome(t2, g)
    if not (isinstance(o1, Success) and isinstance(o2, Success)):
        return False
    return list_subsumed(o1.goals, o2.goals)


def collect_goal_list_records(competitions) -> GoalListDB:
    db = GoalListDB()
    for comp in competitions:
        for r in comp.goal_list_records():
            db.add(r)
    return db


# ---------------------------------------------------------------- recording


@dataclass
class UnitEvent:
    unit: str
    goal: Goal
    output: tuple[Goal, ...]


def _run_recording(t: Tactic, g: Goal, ctx: Context, deadline: Deadline, events: list[UnitEvent]) -> tuple[Goal, ...]:
    if isinstance(t, Unit):
        out = run(t, g, ctx, deadline)
        events.append(UnitEvent(print_tactic(t), g, out))
        return out
    if isinstance(t, Then):
        res: list[Goal] = []
        for sub in _run_recording(t.first, g, ctx, deadline, events):
            res.extend(_run_recording(t.second, sub, ctx, deadline, events))
        return tuple(res)
    if isinstance(t, ThenL):
        subs = _run_recording(t.first, g, ctx, deadline, events)
        if len(subs) != len(t.branches):
            raise TacticFailure("THENL arity mismatch")
        res = []
        for sub, b in zip(subs, t.branches):
            res.extend(_run_recording(b, sub, ctx, deadline, events))
        return tuple(res)
    raise TacticFailure(f"cannot record {t!r}")


def trace_units(t: Tactic, g: Goal, ctx: Context, timeout: float = RECORD_TIMEOUT) -> list[UnitEvent] | None:
    """Unit applications of a proof in execution order, or None if it does not close ``g``."""
    events: list[UnitEvent] = []
    try:
        left = _run_recording(t, g, ctx, Deadline(timeout), events)
    except (TacticFailure, TacticTimeout):
        return None
    return events if not left else None


@dataclass
class Recorder:
    """Single-writer builder of a knowledge base from theorem declarations."""

    ctx: Context
    cfg: SearchConfig = field(default_factory=SearchConfig)
    kb: KnowledgeBase = field(default_factory=KnowledgeBase)
    competitions: list[Competition] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.outcome = OutcomeCache(self.ctx, self.cfg)

    def record_proof(self, decl: TheoremDecl, theory: str, aliases: dict) -> list[GoalTacticPair]:
        glob = globalize(decl.proof, aliases, self.ctx)
        tree, _ = split_tactic_units(glob.tactic)
        events = trace_units(tree, decl.statement, self.ctx)
        qname = f"{theory}.{decl.name}"
        if events is None:
            msg = f"proof of {qname} does not replay; no pairs recorded"
            log.warning(msg)
            self.warnings.append(msg)
            return []
        stored = []
        for ev in events:
            stored.append(self.store(ev.unit, ev.goal, ev.output, theory, qname))
        return stored

    def store(self, unit: str, g: Goal, output: tuple[Goal, ...], theory: str, theorem: str = "") -> GoalTacticPair:
        # the human step succeeded under the recording budget; keep that result
        self.outcome.table[(unit, g)] = Success(output)
        if self.cfg.orthogonalization:
            comp = orthogonalize(
                unit, g, self.kb.tactics, self.outcome, self.kb.theorems,
                self.cfg.ortho_radius, self.cfg.abstraction, self.cfg.abs_radius,
            )
        else:
            # single-candidate competition: the unit itself, labeled positive
            cand = Candidate(unit, unit, 0, (1, 0), Success(output))
            comp = Competition(g, unit, [cand], cand)
        self.competitions.append(comp)
        for r in comp.goal_list_records():
            self.kb.goallists.add(r)
        w = comp.winner
        pair = GoalTacticPair(
            g, w.code, w.output, theory, theorem=theorem,
            instance=w.concrete if w.concrete != w.code else None,
        )
        return self.kb.tactics.add(pair)
