"""Recorded knowledge: goal-tactic pairs, theorems and labeled goal lists."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from ..goalsys.syntax import parse_goal
from ..goalsys.terms import Goal
from ..predict import FeatureDB, goal_features, goal_list_features


@dataclass
class GoalTacticPair:
    goal: Goal
    tactic: str
    output: tuple[Goal, ...]
    theory: str = ""
    seq: int = 0
    theorem: str = ""
    # concrete code applied at record time when ``tactic`` carries placeholders
    instance: str | None = None


@dataclass
class TheoremRecord:
    name: str  # fully qualified
    statement: Goal
    dependencies: tuple[str, ...] = ()
    seq: int = 0

    @property
    def theory(self) -> str:
        return self.name.split(".", 1)[0]


@dataclass
class GoalListRecord:
    goals: tuple[Goal, ...]
    origin_goal: Goal
    positive: bool
    seq: int = 0

    @property
    def label(self) -> str:
        return "positive" if self.positive else "negative"


class TacticDB:
    """Goal-tactic pairs in insertion order with a coverage map."""

    kind = "tactic"

    def __init__(self, pairs=()):
        self.pairs: list[GoalTacticPair] = []
        self._covered: dict[str, set[str]] = {}
        self._first_seq: dict[str, int] = {}
        self.features = FeatureDB()
        for p in pairs:
            self.add(p)

    def __len__(self):
        return len(self.pairs)

    def add(self, pair: GoalTacticPair) -> GoalTacticPair:
        pair.seq = len(self.pairs)
        self.pairs.append(pair)
        self._covered.setdefault(pair.tactic, set()).add(pair.goal.key)
        self._first_seq.setdefault(pair.tactic, pair.seq)
        self.features.add(pair.seq, goal_features(pair.goal))
        return pair

    def coverage(self, tactic: str) -> int:
        return len(self._covered.get(tactic, ()))

    def coverage_map(self) -> dict[str, int]:
        return {t: len(gs) for t, gs in self._covered.items()}

    def first_seq(self, tactic: str) -> int | None:
        return self._first_seq.get(tactic)

    def tactics(self) -> list[str]:
        return list(self._first_seq)


class TheoremDB:
    kind = "theorem"

    def __init__(self, records=()):
        self.records: list[TheoremRecord] = []
        self.by_name: dict[str, TheoremRecord] = {}
        self.features = FeatureDB()
        for r in records:
            self.add(r)

    def __len__(self):
        return len(self.records)

    def add(self, rec: TheoremRecord) -> TheoremRecord:
        rec.seq = len(self.records)
        self.records.append(rec)
        self.by_name[rec.name] = rec
        self.features.add(rec.seq, goal_features(rec.statement))
        return rec


class GoalListDB:
    kind = "goal_list"

    def __init__(self, records=()):
        self.records: list[GoalListRecord] = []
        self.features = FeatureDB()
        for r in records:
            self.add(r)

    def __len__(self):
        return len(self.records)

    def add(self, rec: GoalListRecord) -> GoalListRecord:
        rec.seq = len(self.records)
        self.records.append(rec)
        self.features.add(rec.seq, goal_list_features(rec.goals))
        return rec


@dataclass
class KnowledgeBase:
    tactics: TacticDB = field(default_factory=TacticDB)
    theorems: TheoremDB = field(default_factory=TheoremDB)
    goallists: GoalListDB = field(default_factory=GoalListDB)


# ------------------------------------------------------------ persistence


def _goal(text: str) -> Goal:
    return parse_goal(text)


def dump_jsonl(path: Path, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False, sort_keys=True) + "\n")


def load_jsonl(path: Path) -> list[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def save_knowledge(kb: KnowledgeBase, out: Path) -> None:
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    dump_jsonl(
        out / "tactics.jsonl",
        (
            {
                "seq": p.seq,
                "theory": p.theory,
                "theorem": p.theorem,
                "goal": str(p.goal),
                "tactic": p.tactic,
                "instance": p.instance,
                "output": [str(g) for g in p.output],
            }
            for p in kb.tactics.pairs
        ),
    )
    dump_jsonl(
        out / "theorems.jsonl",
        (
            {"seq": r.seq, "name": r.name, "statement": str(r.statement), "dependencies": list(r.dependencies)}
            for r in kb.theorems.records
        ),
    )
    dump_jsonl(
        out / "goallists.jsonl",
        (
            {"seq": r.seq, "goals": [str(g) for g in r.goals], "origin": str(r.origin_goal), "label": r.label}
            for r in kb.goallists.records
        ),
    )
    rows = []
    for db in (kb.tactics, kb.theorems, kb.goallists):
        rows += db.features.records(db.kind)
    dump_jsonl(out / "features.jsonl", rows)


def load_knowledge(path: Path) -> KnowledgeBase:
    path = Path(path)
    kb = KnowledgeBase()
    for row in load_jsonl(path / "tactics.jsonl"):
        kb.tactics.add(
            GoalTacticPair(
                _goal(row["goal"]),
                row["tactic"],
                tuple(_goal(g) for g in row["output"]),
                row["theory"],
                theorem=row["theorem"],
                instance=row["instance"],
            )
        )
    for row in load_jsonl(path / "theorems.jsonl"):
        kb.theorems.add(TheoremRecord(row["name"], _goal(row["statement"]), tuple(row["dependencies"])))
    for row in load_jsonl(path / "goallists.jsonl"):
        kb.goallists.add(
            GoalListRecord(tuple(_goal(g) for g in row["goals"]), _goal(row["origin"]), row["label"] == "positive")
        )
    return kb
