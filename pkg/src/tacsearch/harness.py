"""Corpus ingestion, chronological re-proving, tuning and one-shot proving."""

from __future__ import annotations

import csv
import itertools
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .config import SearchConfig
from .goalsys.syntax import ParseError, parse_goal
from .goalsys.tactics import Context, replay_proof
from .goalsys.terms import Goal
from .knowledge.db import KnowledgeBase, TheoremRecord
from .knowledge.record import Recorder
from .knowledge.script import AliasDef, TheoremDecl, TheoryDecl, globalize, parse_script
from .predict import preselect
from .proofout import unit_count
from .search import SearchStatus, search

log = logging.getLogger(__name__)


class CorpusError(ValueError):
    pass


def corpus_files(corpus: str | Path) -> list[Path]:
    root = Path(corpus)
    if root.is_file():
        return [root]
    if not root.is_dir():
        raise CorpusError(f"{root}: no such corpus")
    return sorted(root.glob("*.thy"))


def load_corpus(corpus: str | Path) -> list[tuple[Path, list]]:
    out = []
    for path in corpus_files(corpus):
        try:
            out.append((path, parse_script(path.read_text(encoding="utf-8"))))
        except ParseError as e:
            raise CorpusError(f"{path}:{e.line}:{e.col}: {e.msg}") from None
    return out


@dataclass
class Knowledge:
    kb: KnowledgeBase = field(default_factory=KnowledgeBase)
    ctx: Context = field(default_factory=Context)
    warnings: list[str] = field(default_factory=list)
    recorder: Recorder | None = None


BeforeHook = Callable[[int, str, TheoremDecl, Knowledge], None]


def walk_corpus(corpus, cfg: SearchConfig | None = None, before: BeforeHook | None = None, stop: int | None = None) -> Knowledge:
    """Record every theorem in corpus order.

    ``before(i, name, decl, knowledge)`` runs right before theorem ``i`` is
    recorded, when the knowledge holds exactly theorems ``0 .. i-1``.
    """
    cfg = cfg or SearchConfig()
    k = Knowledge()
    k.recorder = Recorder(k.ctx, cfg, k.kb, warnings=k.warnings)
    idx = 0
    for path, decls in load_corpus(corpus):
        aliases: dict = {}
        theory = None
        for d in decls:
            if isinstance(d, TheoryDecl):
                theory = d.name
                k.ctx.theory = theory
            elif isinstance(d, AliasDef):
                aliases[d.name] = d.body
            elif isinstance(d, TheoremDecl):
                if theory is None:
                    raise CorpusError(f"{path}:{d.line}: theorem {d.name} before any theory declaration")
                if stop is not None and idx >= stop:
                    return k
                qname = f"{theory}.{d.name}"
                if before is not None:
                    before(idx, qname, d, k)
                k.recorder.record_proof(d, theory, aliases)
                glob = globalize(d.proof, aliases, k.ctx)
                deps = tuple(dict.fromkeys(glob.references))
                k.kb.theorems.add(TheoremRecord(qname, d.statement, deps))
                k.ctx.add(theory, d.name, d.statement)
                idx += 1
    return k


def build_knowledge(corpus, cfg: SearchConfig | None = None) -> Knowledge:
    return walk_corpus(corpus, cfg)


def theorem_names(corpus) -> list[str]:
    out = []
    for _, decls in load_corpus(corpus):
        theory = None
        for d in decls:
            if isinstance(d, TheoryDecl):
                theory = d.name
            elif isinstance(d, TheoremDecl):
                out.append(f"{theory}.{d.name}")
    return out


# ------------------------------------------------------------------ reports


@dataclass
class RunReport:
    records: list[dict] = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def solved(self) -> int:
        return sum(1 for r in self.records if r["status"] == "proved")

    @property
    def solve_rate(self) -> float:
        return self.solved / len(self.records) if self.records else 0.0

    def curve(self) -> list[tuple[float, int]]:
        """(seconds, problems solved in at most that time), non-decreasing."""
        times = sorted(r["search_ms"] / 1000 for r in self.records if r["status"] == "proved")
        return [(t, i + 1) for i, t in enumerate(times)]

    def histogram(self) -> list[tuple[int, int]]:
        counts: dict[int, int] = {}
        for r in self.records:
            if r["status"] == "proved":
                counts[r["proof_units"]] = counts.get(r["proof_units"], 0) + 1
        return sorted(counts.items())

    def as_dict(self) -> dict:
        return {
            "config": self.config,
            "records": self.records,
            "solved": self.solved,
            "total": len(self.records),
            "solve_rate": self.solve_rate,
            "curve": self.curve(),
            "histogram": self.histogram(),
        }

    def comparable(self) -> list[dict]:
        return [{k: v for k, v in r.items() if k not in ("wall_ms", "search_ms", "finalize_ms")} for r in self.records]

    def write(self, out: str | Path) -> None:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.as_dict(), indent=2, sort_keys=True) + "\n")
        with open(out / "curve.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["seconds", "solved"])
            w.writerows((f"{t:.6f}", n) for t, n in self.curve())
        with open(out / "histogram.csv", "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["units", "proofs"])
            w.writerows(self.histogram())


class FairnessError(AssertionError):
    pass


def check_fairness(index: int, n_pairs: int, presel) -> None:
    """No prediction for theorem ``index`` may touch knowledge recorded from it onwards."""
    for p in presel.pairs:
        if p.seq >= n_pairs:
            raise FairnessError(f"pair {p.seq} recorded after theorem {index} started")
    for t in presel.theorems:
        if t.seq >= index:
            raise FairnessError(f"theorem {t.name} is not older than theorem {index}")


def reprove(
    corpus,
    cfg: SearchConfig | None = None,
    select: Callable[[int], bool] | None = None,
    stop: int | None = None,
    progress: Callable[[dict], None] | None = None,
) -> RunReport:
    """Search every selected theorem with the knowledge of its predecessors, then record it."""
    cfg = cfg or SearchConfig()
    report = RunReport(config=cfg.as_dict())

    def before(i, qname, decl, k: Knowledge):
        if select is not None and not select(i):
            return
        ctx = k.ctx
        assert qname not in ctx.theorems
        start = time.monotonic()
        presel = preselect(decl.statement, k.kb.tactics, k.kb.theorems, k.kb.goallists, cfg.preselect_n)
        check_fairness(i, len(k.kb.tactics), presel)
        status, _ = search(decl.statement, k.kb, ctx, cfg, presel=presel)
        rec = record_of(qname, decl.statement, status, ctx, time.monotonic() - start)
        report.records.append(rec)
        if progress is not None:
            progress(rec)

    walk_corpus(corpus, cfg, before, stop=stop)
    return report


def record_of(name: str, goal: Goal, status: SearchStatus, ctx: Context, seconds: float) -> dict:
    rec = {
        "name": name,
        "status": status.status,
        "wall_ms": round(seconds * 1000, 3),
        "search_ms": round(status.wall_time * 1000, 3),
        "finalize_ms": round(status.finalize_time * 1000, 3),
        "steps": status.steps,
        "nodes": status.nodes,
        "proof_units": 0,
        "script": status.script,
        "raw_script": status.raw_script,
    }
    if status.proved:
        rec["proof_units"] = unit_count(status.script)
        rec["raw_replays"] = replay_proof(status.raw_script, goal, ctx)
        rec["replays"] = replay_proof(status.script, goal, ctx)
    return rec


# ------------------------------------------------------------------- tuning


def tune_slice(n: int) -> set[int]:
    """Every third theorem of the first half of the corpus."""
    return set(range(0, n // 2, 3))


def grid_configs(grid: dict[str, list], base: SearchConfig | None = None) -> list[SearchConfig]:
    base = base or SearchConfig()
    keys = list(grid)
    return [base.with_(**dict(zip(keys, vals))) for vals in itertools.product(*(grid[k] for k in keys))]


@dataclass
class TuneTable:
    keys: list[str]
    rows: list[tuple[dict, int]]

    def best(self) -> tuple[dict, int]:
        best = self.rows[0]
        for row in self.rows[1:]:
            if row[1] > best[1]:
                best = row
        return best

    def write_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([*self.keys, "solved"])
            for params, solved in self.rows:
                w.writerow([*(params[k] for k in self.keys), solved])


def tune(corpus, grid: dict[str, list], base: SearchConfig | None = None) -> TuneTable:
    n = len(theorem_names(corpus))
    part = tune_slice(n)
    stop = max(part) + 1 if part else 0
    keys = list(grid)
    rows = []
    for cfg in grid_configs(grid, base):
        rep = reprove(corpus, cfg, select=part.__contains__, stop=stop)
        rows.append(({k: getattr(cfg, k) for k in keys}, rep.solved))
    return TuneTable(keys, rows)


# -------------------------------------------------------------------- prove


def prove(goal_text: str, corpus, cfg: SearchConfig | None = None, knowledge: Knowledge | None = None) -> SearchStatus:
    goal = parse_goal(goal_text)
    cfg = cfg or SearchConfig()
    k = knowledge or build_knowledge(corpus, cfg)
    k.ctx.theory = None
    status, _ = search(goal, k.kb, k.ctx, cfg)
    return status
