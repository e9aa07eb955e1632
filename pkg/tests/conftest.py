import math
from pathlib import Path

import pytest
from hypothesis import strategies as st

from tacsearch.goalsys.terms import App, Equation, Goal, Var

ROOT = Path(__file__).resolve().parent.parent
CORPUS = ROOT / "corpus"
FIXTURES = Path(__file__).resolve().parent / "fixtures"

NAT_VARS = ("x", "y", "n", "m")
LIST_VARS = ("l", "r", "s")


def nat_terms(depth=3):
    leaf = st.one_of(st.sampled_from(NAT_VARS).map(Var), st.just(App("0")))
    if depth == 0:
        return leaf
    sub = nat_terms(depth - 1)
    lsub = list_terms(depth - 1)
    return st.one_of(
        leaf,
        sub.map(lambda a: App("S", (a,))),
        st.tuples(sub, sub).map(lambda p: App("add", p)),
        st.tuples(sub, sub).map(lambda p: App("mul", p)),
        lsub.map(lambda a: App("len", (a,))),
    )


def list_terms(depth=3):
    leaf = st.one_of(st.sampled_from(LIST_VARS).map(Var), st.just(App("nil")))
    if depth == 0:
        return leaf
    sub = list_terms(depth - 1)
    nsub = nat_terms(depth - 1)
    return st.one_of(
        leaf,
        st.tuples(nsub, sub).map(lambda p: App("cons", p)),
        st.tuples(sub, sub).map(lambda p: App("app", p)),
        sub.map(lambda a: App("rev", (a,))),
    )


def equations(depth=2):
    return st.one_of(
        st.tuples(nat_terms(depth), nat_terms(depth)),
        st.tuples(list_terms(depth), list_terms(depth)),
    ).map(lambda p: Equation(*p))


def goals(depth=2, max_hyps=2):
    return st.builds(lambda hs, c: Goal(tuple(hs), c), st.lists(equations(depth), max_size=max_hyps), equations(depth))


def renamings():
    """Injective renaming of all test variables, sort-preserving."""
    nat = st.permutations(["a", "b", "c", "d", "e"]).map(lambda p: dict(zip(NAT_VARS, p)))
    lst = st.permutations(["p", "q", "t", "u"]).map(lambda p: dict(zip(LIST_VARS, p)))
    return st.tuples(nat, lst).map(lambda t: {**t[0], **t[1]})


@pytest.fixture(scope="session")
def corpus_knowledge():
    from tacsearch.harness import build_knowledge

    return build_knowledge(CORPUS)


# ------------------------------------------------------------ search oracle


def scratch_solved(tree):
    """Solved flags by the inductive definition: a node is solved when every goal has a solved child."""
    memo = {}

    def solved(nid):
        if nid not in memo:
            n = tree.nodes[nid]
            memo[nid] = all(any(solved(c) for c in kids) for kids in n.children)
        return memo[nid]

    return [solved(n.id) for n in tree.nodes]


def subtree(tree, nid):
    out, stack = [], [nid]
    while stack:
        n = tree.nodes[stack.pop()]
        out.append(n)
        for kids in n.children:
            stack.extend(kids)
    return out


def check_acyclic(tree):
    seen = set()
    stack = [tree.root.id]
    while stack:
        nid = stack.pop()
        assert nid not in seen, f"node {nid} reached twice"
        seen.add(nid)
        n = tree.nodes[nid]
        for gi, kids in enumerate(n.children):
            for c in kids:
                assert tree.nodes[c].parent == nid and tree.nodes[c].parent_goal == gi
                stack.append(c)
    assert seen == set(range(len(tree.nodes)))


class SearchSpy:
    """Records every backpropagated path and recomputes the tree statistics from scratch."""

    def __init__(self, tree):
        self.tree = tree
        self.events = []
        orig = tree.backpropagate

        def spy(path, child):
            self.events.append(([n.id for n in path], None if child is None else child.id))
            orig(path, child)

        tree.backpropagate = spy

    def mismatches(self):
        tree = self.tree
        bad = []
        failures = [0] * len(tree.nodes)
        visits = [0] * len(tree.nodes)
        for path, child in self.events:
            for nid in path:
                visits[nid] += 1
                if child is None:
                    failures[nid] += 1
            if child is not None:
                visits[child] += 1
        flags = scratch_solved(tree)
        for n in tree.nodes:
            desc = subtree(tree, n.id)
            ev = math.fsum(d.prior_eval for d in desc) / (len(desc) + failures[n.id])
            if abs(ev - n.cur_evaluation) > 1e-9 * max(1.0, abs(ev)):
                bad.append(("cur_evaluation", n.id, ev, n.cur_evaluation))
            if n.failure != failures[n.id] or n.visit != visits[n.id]:
                bad.append(("counts", n.id))
            if flags[n.id] != n.solved:
                bad.append(("solved", n.id, flags[n.id], n.solved))
        return bad


def instrumented_search(conjecture, kb, ctx, cfg, presel=None):
    """Run the MCTS loop step by step, checking statistics against scratch recomputation."""
    from tacsearch.predict import preselect
    from tacsearch.search import SearchTree

    presel = presel or preselect(conjecture, kb.tactics, kb.theorems, kb.goallists, cfg.preselect_n)
    tree = SearchTree(conjecture, ctx, presel, cfg)
    spy = SearchSpy(tree)
    problems = []
    while not tree.root.solved and tree.steps < cfg.max_steps:
        why = tree.step()
        problems.extend(spy.mismatches())
        check_acyclic(tree)
        if why == "exhausted" and tree.saturated():
            break
    return tree, problems


# --------------------------------------------------------- acceptance lines

ACCEPTANCE: list[str] = []


def acceptance(n: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title}" + (f" ({detail})" if detail else "")
    ACCEPTANCE.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
