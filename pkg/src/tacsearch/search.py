"""Monte Carlo tree search over tactic applications.

Each node holds a list of goals; only its first unsolved goal (the open goal)
receives tactics. One MCTS step selects a node by descending through the
children of open goals, tries the next predicted tactic on the selected
node's open goal, and backpropagates visits, failures and prior evaluations
along the traversed path.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass
from typing import Callable

from .config import SearchConfig
from .goalsys.syntax import ThmList, Unit, print_tactic
from .goalsys.tactics import Context, Success
from .goalsys.terms import Goal, list_subsumed
from .knowledge.db import KnowledgeBase
from .knowledge.record import OutcomeCache, fill_holes, has_hole
from .predict import PreselectedContext, goal_features, goal_list_features, preselect

log = logging.getLogger(__name__)


def prior_policy(i: int, c: float) -> float:
    return (1 - c) ** i * c


def widening_policy(n: int, c: float) -> float:
    return (1 - c) ** n * c


def cur_evaluation(eval_sum: float, n_desc: int, failure: int) -> float:
    return eval_sum / (n_desc + failure)


def cur_policy(visit_child: int, visit_parent: int) -> float:
    assert visit_parent > 0, "a parent is visited before any of its children exist"
    return (1 + visit_child) / math.sqrt(visit_parent)


class Node:
    __slots__ = (
        "id", "goals", "parent", "parent_goal", "tactic", "rank", "prior_policy", "prior_eval",
        "visit", "failure", "eval_sum", "n_desc", "solved_goals", "solved", "children",
        "outputs", "cursor", "exhausted",
    )

    def __init__(self, id, goals, parent=None, parent_goal=None, tactic=None, rank=0, prior_policy=1.0, prior_eval=0.0):
        self.id = id
        self.goals: tuple[Goal, ...] = goals
        self.parent: int | None = parent
        self.parent_goal: int | None = parent_goal
        self.tactic: str | None = tactic
        self.rank = rank
        self.prior_policy = prior_policy
        self.prior_eval = prior_eval
        self.visit = 0
        self.failure = 0
        self.eval_sum = prior_eval
        self.n_desc = 1
        self.solved_goals = [False] * len(goals)
        self.solved = not goals
        self.children: list[list[int]] = [[] for _ in goals]
        self.outputs: list[list[tuple[Goal, ...]]] = [[] for _ in goals]
        self.cursor = [0] * len(goals)
        self.exhausted = [False] * len(goals)

    def open_goal(self) -> int | None:
        for i, s in enumerate(self.solved_goals):
            if not s:
                return i
        return None

    @property
    def cur_evaluation(self) -> float:
        return cur_evaluation(self.eval_sum, self.n_desc, self.failure)


@dataclass
class SearchStatus:
    status: str  # "proved" | "saturated" | "timeout"
    script: str | None = None
    raw_script: str | None = None
    steps: int = 0
    nodes: int = 0
    cache_hits: int = 0
    wall_time: float = 0.0
    finalize_time: float = 0.0

    @property
    def proved(self) -> bool:
        return self.status == "proved"

    def summary(self) -> dict:
        return {
            "status": self.status,
            "script": self.script,
            "raw_script": self.raw_script,
            "steps": self.steps,
            "nodes": self.nodes,
            "cache_hits": self.cache_hits,
            "wall_time": round(self.wall_time, 6),
            "finalize_time": round(self.finalize_time, 6),
        }

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True)


class SearchTree:
    def __init__(self, conjecture: Goal, ctx: Context, presel: PreselectedContext, cfg: SearchConfig, outcome: OutcomeCache | None = None):
        self.ctx = ctx
        self.presel = presel
        self.cfg = cfg
        self.outcome = outcome or OutcomeCache(ctx, cfg)
        self.nodes: list[Node] = []
        self._cands: dict[Goal, list[tuple[str, bool]]] = {}
        self.root = self._new_node((conjecture,), None, None, None, 0, 1.0)
        self.steps = 0

    # -------------------------------------------------------------- priors

    def prior_policy(self, i: int) -> float:
        if not self.cfg.learned_policy:
            return self.cfg.c_policy
        return prior_policy(i, self.cfg.c_policy)

    def widening_policy(self, node: Node, gi: int) -> float:
        return widening_policy(len(node.children[gi]), self.cfg.c_policy)

    def prior_evaluation(self, goals) -> float:
        if not self.cfg.evaluation:
            return 0.0
        return prior_evaluation(goals, self.presel, self.cfg.eval_radius)

    def node_value(self, child: Node, parent: Node) -> float:
        explo = child.prior_policy / cur_policy(child.visit, parent.visit)
        return child.cur_evaluation + self.cfg.c_exploration * explo

    # --------------------------------------------------------------- nodes

    def _new_node(self, goals, parent, parent_goal, tactic, rank, policy) -> Node:
        node = Node(len(self.nodes), tuple(goals), parent, parent_goal, tactic, rank, policy,
                    self.prior_evaluation(goals))
        self.nodes.append(node)
        return node

    def ancestors(self, node: Node) -> list[Node]:
        out = []
        p = node.parent
        while p is not None:
            out.append(self.nodes[p])
            p = self.nodes[p].parent
        return out

    def under_solved(self, node: Node) -> bool:
        return node.solved or any(a.solved for a in self.ancestors(node))

    # ---------------------------------------------------------- candidates

    def candidates(self, g: Goal) -> list[tuple[str, bool]]:
        """Tactics to try on ``g`` in order, each flagged whether it is the priority Auto call."""
        hit = self._cands.get(g)
        if hit is not None:
            return hit
        cfg, ps = self.cfg, self.presel
        out: list[tuple[str, bool]] = []
        seen: set[str] = set()
        feats = goal_features(g)
        thm_preds = None

        def thm_names(k):
            nonlocal thm_preds
            if thm_preds is None:
                thm_preds = ps.theorem_db.predict(feats, None, "sim1") if ps.theorem_db.N else []
            return tuple(name for name, _ in thm_preds[:k])

        if cfg.auto_priority:
            code = print_tactic(Unit("Auto", ThmList(thm_names(cfg.auto_premises))))
            out.append((code, True))
            seen.add(code)
        if cfg.learned_order:
            order = [ps.pairs_by_seq[s].tactic for s, _ in ps.pair_db.predict(feats, None, "sim1")] if ps.pair_db.N else []
        else:
            order = [p.tactic for p in ps.pairs]
        for code in order:
            if has_hole(code):
                if not cfg.abstraction:
                    continue
                code = fill_holes(code, ThmList(thm_names(cfg.abs_radius)))
            if code not in seen:
                seen.add(code)
                out.append((code, False))
        self._cands[g] = out
        return out

    # ------------------------------------------------------------ mcts step

    def select(self) -> list[Node]:
        cur = self.nodes[self.root.id]
        path = [cur]
        while True:
            gi = cur.open_goal()
            if gi is None:
                break
            kids = cur.children[gi]
            if not kids:
                break
            best, best_v = None, -math.inf
            for cid in kids:  # creation order == rank order; strict > keeps lowest rank on ties
                v = self.node_value(self.nodes[cid], cur)
                if v > best_v:
                    best, best_v = self.nodes[cid], v
            if self.widening_policy(cur, gi) >= best_v:
                break
            cur = best
            path.append(cur)
        return path

    def extend(self, node: Node) -> tuple[Node | None, str]:
        """Try the next untested tactic on the node's open goal."""
        if self.under_solved(node):
            return None, "solved"
        gi = node.open_goal()
        g = node.goals[gi]
        cands = self.candidates(g)
        if node.cursor[gi] >= len(cands):
            node.exhausted[gi] = True
            return None, "exhausted"
        code, priority = cands[node.cursor[gi]]
        node.cursor[gi] += 1
        if node.cursor[gi] >= len(cands):
            node.exhausted[gi] = True
        timeout = self.cfg.auto_timeout if priority else self.cfg.tactic_timeout
        out = self.outcome(code, g, timeout)
        if not isinstance(out, Success):
            return None, "failed"
        produced = out.goals
        seen = {x.key for a in [node, *self.ancestors(node)] for x in a.goals}
        if any(x.key in seen for x in produced):
            return None, "loop"
        if any(list_subsumed(prev, produced) for prev in node.outputs[gi]):
            return None, "redundant"
        rank = len(node.children[gi])
        child = self._new_node(produced, node.id, gi, code, rank, self.prior_policy(rank))
        node.children[gi].append(child.id)
        node.outputs[gi].append(produced)
        return child, "extended"

    def backpropagate(self, path: list[Node], child: Node | None):
        if child is None:
            for n in path:
                n.visit += 1
                n.failure += 1
            return
        for n in path:
            n.visit += 1
            n.eval_sum += child.prior_eval
            n.n_desc += 1
        child.visit += 1
        if child.solved:
            self._propagate_solved(child)

    def _propagate_solved(self, node: Node):
        while node.solved and node.parent is not None:
            parent = self.nodes[node.parent]
            parent.solved_goals[node.parent_goal] = True
            parent.solved = all(parent.solved_goals)
            node = parent

    def step(self) -> str:
        path = self.select()
        child, why = self.extend(path[-1])
        self.backpropagate(path, child)
        self.steps += 1
        return why

    def saturated(self) -> bool:
        """No reachable unsolved node has an untested tactic for its open goal."""
        stack = [self.root]
        while stack:
            n = stack.pop()
            if n.solved:
                continue
            gi = n.open_goal()
            if n.cursor[gi] < len(self.candidates(n.goals[gi])):
                return False
            stack.extend(self.nodes[c] for c in n.children[gi])
        return True


def prior_evaluation(goals, presel: PreselectedContext, k: int = 10) -> float:
    """Share of positive lists among the ``k`` recorded goal lists nearest to ``goals``."""
    db = presel.goallist_db
    if db.N == 0:
        return 0.0
    preds = db.predict(goal_list_features(goals), k, "sim2")
    pos = sum(1 for seq, _ in preds if presel.goallists_by_seq[seq].positive)
    return pos / k


def search(
    conjecture: Goal,
    kb: KnowledgeBase,
    ctx: Context,
    cfg: SearchConfig | None = None,
    presel: PreselectedContext | None = None,
    on_step: Callable[[SearchTree], None] | None = None,
) -> tuple[SearchStatus, SearchTree]:
    cfg = cfg or SearchConfig()
    start = time.monotonic()
    if presel is None:
        presel = preselect(conjecture, kb.tactics, kb.theorems, kb.goallists, cfg.preselect_n)
    tree = SearchTree(conjecture, ctx, presel, cfg)
    status = "timeout"
    while True:
        if tree.root.solved:
            status = "proved"
            break
        if time.monotonic() - start >= cfg.global_timeout:
            break
        if cfg.max_steps is not None and tree.steps >= cfg.max_steps:
            break
        why = tree.step()
        if on_step is not None:
            on_step(tree)
        if why == "exhausted" and tree.saturated():
            status = "saturated"
            break
    res = SearchStatus(status, steps=tree.steps, nodes=len(tree.nodes), cache_hits=tree.outcome.hits)
    res.wall_time = time.monotonic() - start
    if status == "proved":
        from .proofout import extract_proof, finalize

        raw = extract_proof(tree)
        res.raw_script = print_tactic(raw)
        res.script = finalize(raw, conjecture, ctx, minimize=cfg.minimize)
        res.finalize_time = time.monotonic() - start - res.wall_time
    return res, tree
