"""Feature extraction, TF-IDF similarity and k-nearest-neighbour prediction.

Every recorded object (goal-tactic pair, theorem, goal list) is reduced to a
set of string features. Shared rare features make objects similar: each
feature weighs ``ln(N / df) ** 6`` and

    sim1(a, b) = sum of weights over the shared features
    sim2(a, b) = sim1(a, b) / ln(e + |a| + |b|)

Predictions sort a dataset by similarity to a query, older entries first on
ties.
"""

from __future__ import annotations

import heapq
import math
from functools import cached_property
from collections import Counter
from dataclasses import dataclass, field
from typing import Hashable, Iterable, TYPE_CHECKING

from .goalsys.terms import SIGNATURE, App, Goal, Term, Var, mask_vars, subterms, var_sorts

if TYPE_CHECKING:
    from .knowledge.db import GoalListDB, GoalTacticPair, TacticDB, TheoremDB

FeatureSet = frozenset


def extract_term_features(t: Term, sorts: dict[str, str] | None = None) -> frozenset[str]:
    """Symbol names, variable-masked subterms, variable names and sort features."""
    sorts = sorts or {}
    feats: set[str] = set()
    for s in subterms(t):
        feats.add(mask_vars(s))
        if isinstance(s, Var):
            feats.add(s.name)
            feats.add("ty:" + sorts.get(s.name, "nat"))
        else:
            feats.add(s.sym)
            arg_sorts, res = SIGNATURE[s.sym]
            feats.update("ty:" + x for x in (*arg_sorts, res))
    return frozenset(feats)


def extract_goal_features(g: Goal) -> frozenset[str]:
    sorts = var_sorts(g)
    feats: set[str] = set()
    for h in g.hyps:
        for side in (h.lhs, h.rhs):
            feats.update("asm:" + f for f in extract_term_features(side, sorts))
    for side in (g.concl.lhs, g.concl.rhs):
        feats.update("concl:" + f for f in extract_term_features(side, sorts))
    return frozenset(feats)


_goal_feature_cache: dict[Goal, frozenset[str]] = {}


def goal_features(g: Goal) -> frozenset[str]:
    f = _goal_feature_cache.get(g)
    if f is None:
        if len(_goal_feature_cache) > 200_000:
            _goal_feature_cache.clear()
        f = _goal_feature_cache[g] = extract_goal_features(g)
    return f


def extract_goal_list_features(goals: Iterable[Goal]) -> frozenset[str]:
    out: set[str] = set()
    for g in goals:
        out |= goal_features(g)
    return frozenset(out)


goal_list_features = extract_goal_list_features


# ------------------------------------------------------------------ TF-IDF


def tfidf(n: int, df: int) -> float:
    return math.log(n / df) ** 6


class FeatureDB:
    """Feature sets keyed by object id, with document frequencies and postings."""

    def __init__(self):
        self.ids: list[Hashable] = []
        self.feats: list[frozenset[str]] = []
        self.df: Counter[str] = Counter()
        self.postings: dict[str, list[int]] = {}
        self._w: dict[str, float] = {}
        self._index: dict[Hashable, int] = {}

    @property
    def N(self) -> int:
        return len(self.ids)

    def __len__(self):
        return len(self.ids)

    def add(self, obj_id: Hashable, features: Iterable[str]) -> None:
        fs = frozenset(features)
        idx = len(self.ids)
        self._index[obj_id] = idx
        self.ids.append(obj_id)
        self.feats.append(fs)
        for f in fs:
            self.df[f] += 1
            self.postings.setdefault(f, []).append(idx)
        self._w.clear()

    def features_of(self, obj_id: Hashable) -> frozenset[str]:
        return self.feats[self._index[obj_id]]

    def weight(self, f: str) -> float:
        """Weight of ``f``; unknown features weigh as if present everywhere (0)."""
        w = self._w.get(f)
        if w is None:
            d = self.df.get(f, 0)
            w = tfidf(self.N, d) if d else 0.0
            self._w[f] = w
        return w

    def sim1(self, f0: Iterable[str], f1: Iterable[str]) -> float:
        shared = set(f0) & set(f1)
        return math.fsum(self.weight(f) for f in shared)

    def sim2(self, f0: Iterable[str], f1: Iterable[str]) -> float:
        f0, f1 = frozenset(f0), frozenset(f1)
        return self.sim1(f0, f1) / math.log(math.e + len(f0) + len(f1))

    def scores(self, query: Iterable[str], measure: str = "sim1") -> dict[int, float]:
        """Nonzero-candidate scores by entry index, accumulated from postings."""
        q = frozenset(query)
        acc: dict[int, list[float]] = {}
        for f in q:
            post = self.postings.get(f)
            if not post:
                continue
            w = self.weight(f)
            if w == 0.0:
                continue
            for i in post:
                acc.setdefault(i, []).append(w)
        out = {i: math.fsum(ws) for i, ws in acc.items()}
        if measure == "sim2":
            nq = len(q)
            out = {i: s / math.log(math.e + nq + len(self.feats[i])) for i, s in out.items()}
        elif measure != "sim1":
            raise ValueError(f"unknown similarity {measure!r}")
        return out

    def predict(self, query: Iterable[str], k: int | None = None, measure: str = "sim1") -> list[tuple[Hashable, float]]:
        """The ``k`` most similar entries, descending, insertion order on ties."""
        if k is not None and k < 1:
            raise ValueError("k must be positive")
        n = self.N
        k = n if k is None else min(k, n)
        scores = self.scores(query, measure)
        pos = [(-s, i) for i, s in scores.items() if s > 0.0]
        if len(pos) > k:
            top = heapq.nsmallest(k, pos)
        else:
            top = sorted(pos)
        out = [(self.ids[i], -ns) for ns, i in top]
        if len(out) < k:
            taken = {i for _, i in top}
            for i in range(n):
                if len(out) >= k:
                    break
                if i not in taken:
                    out.append((self.ids[i], 0.0))
        return out

    def records(self, kind: str) -> list[dict]:
        return [{"id": i, "kind": kind, "features": sorted(f)} for i, f in zip(self.ids, self.feats)]

    @classmethod
    def from_records(cls, rows: Iterable[dict]) -> FeatureDB:
        db = cls()
        for row in rows:
            db.add(row["id"], row["features"])
        return db


def tfidf_weight(db: FeatureDB, f: str) -> float:
    return db.weight(f)


def sim1(db: FeatureDB, f0, f1) -> float:
    return db.sim1(f0, f1)


def sim2(db: FeatureDB, f0, f1) -> float:
    return db.sim2(f0, f1)


MEASURE = {"tactic": "sim1", "theorem": "sim1", "goal_list": "sim2"}


def predict_k(db: FeatureDB, dataset: str, query, k: int) -> list[tuple[Hashable, float]]:
    return db.predict(query, k, MEASURE[dataset])


# ------------------------------------------------------------ preselection


def dependency_closure_pairs(db: TacticDB, seed: GoalTacticPair) -> set[int]:
    """Sequence numbers of all pairs reachable from ``seed`` through recorded outputs."""
    by_goal: dict[str, list[int]] = {}
    for p in db.pairs:
        by_goal.setdefault(p.goal.key, []).append(p.seq)
    closed = {seed.seq}
    frontier = [seed.seq]
    while frontier:
        nxt = []
        for s in frontier:
            for g in db.pairs[s].output:
                for c in by_goal.get(g.key, ()):
                    if c not in closed:
                        closed.add(c)
                        nxt.append(c)
        frontier = nxt
    return closed


def pair_parents(db: TacticDB) -> dict[int, int]:
    """Child seq -> parent seq; the parent is the earliest pair whose output holds the child's goal."""
    producer: dict[str, int] = {}
    for p in db.pairs:
        for g in p.output:
            producer.setdefault(g.key, p.seq)
    return {p.seq: producer[p.goal.key] for p in db.pairs if p.goal.key in producer}


def theorem_parents(db: TheoremDB) -> dict[int, int]:
    parent: dict[str, int] = {}
    for r in db.records:
        for d in r.dependencies:
            parent.setdefault(d, r.seq)
    return {r.seq: parent[r.name] for r in db.records if r.name in parent}


def dependency_scores(fdb: FeatureDB, query, parents: dict[int, int], measure: str = "sim1") -> list[float]:
    sc = fdb.scores(query, measure)
    own = [sc.get(i, 0.0) for i in range(fdb.N)]
    # ids are sequence numbers, so index == id
    return [max(own[i], own[parents[i]]) if i in parents else own[i] for i in range(fdb.N)]


def _top(scores: list[float], n: int) -> list[int]:
    order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
    return sorted(order[:n])


@dataclass
class PreselectedContext:
    pairs: list = field(default_factory=list)
    theorems: list = field(default_factory=list)
    goallists: list = field(default_factory=list)
    pair_db: FeatureDB = field(default_factory=FeatureDB)
    theorem_db: FeatureDB = field(default_factory=FeatureDB)
    goallist_db: FeatureDB = field(default_factory=FeatureDB)

    @cached_property
    def pairs_by_seq(self) -> dict:
        return {p.seq: p for p in self.pairs}

    @cached_property
    def goallists_by_seq(self) -> dict:
        return {r.seq: r for r in self.goallists}

    def max_seq(self) -> int:
        seqs = [p.seq for p in self.pairs] + [t.seq for t in self.theorems]
        return max(seqs, default=-1)


def preselect(conjecture: Goal, db_t: TacticDB, db_r: TheoremDB, db_l: GoalListDB, n: int = 500) -> PreselectedContext:
    q = goal_features(conjecture)
    pair_idx = _top(dependency_scores(db_t.features, q, pair_parents(db_t)), n)
    thm_idx = _top(dependency_scores(db_r.features, q, theorem_parents(db_r)), n)
    ctx = PreselectedContext()
    for i in pair_idx:
        p = db_t.pairs[i]
        ctx.pairs.append(p)
        ctx.pair_db.add(p.seq, db_t.features.feats[i])
    for i in thm_idx:
        r = db_r.records[i]
        ctx.theorems.append(r)
        ctx.theorem_db.add(r.name, db_r.features.feats[i])
    origins = {p.goal.key for p in ctx.pairs}
    for r in db_l.records:
        if r.origin_goal.key in origins:
            ctx.goallists.append(r)
            ctx.goallist_db.add(r.seq, db_l.features.feats[r.seq])
    return ctx
