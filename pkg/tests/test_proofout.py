import pytest

from tacsearch.config import SearchConfig
from tacsearch.goalsys import Success, apply_tactic, parse_goal, parse_tactic, print_tactic, replay_proof
from tacsearch.goalsys.tactics import Context
from tacsearch.harness import load_corpus
from tacsearch.knowledge import TheoremDecl, TheoryDecl, AliasDef, globalize
from tacsearch.predict import PreselectedContext
from tacsearch.proofout import (
    ProofScript,
    embellish,
    extract_proof,
    finalize,
    minimize_args,
    minimize_length,
    sidecar,
    unit_count,
)
from tacsearch.search import SearchTree

from conftest import CORPUS

G = parse_goal


def nat_ctx(theory=None):
    ctx = Context(theory="nat")
    ctx.add("nat", "add_0_r", G("|- add(n,0) = n"))
    ctx.add("nat", "add_S_r", G("|- add(n,S(m)) = S(add(n,m))"))
    ctx.add("nat", "add_comm", G("|- add(n,m) = add(m,n)"))
    ctx.theory = theory
    return ctx


def attach(tree, node, gi, code):
    out = apply_tactic(code, node.goals[gi], 5.0, tree.ctx)
    assert isinstance(out, Success)
    child = tree._new_node(out.goals, node.id, gi, code, len(node.children[gi]), 1.0)
    node.children[gi].append(child.id)
    if child.solved:
        tree._propagate_solved(child)
    return child


def tree_for(goal):
    return SearchTree(G(goal), nat_ctx(), PreselectedContext(), SearchConfig())


# --------------------------------------------------------------- extraction


def test_extract_single_unit():
    tree = tree_for("|- x = x")
    attach(tree, tree.root, 0, "Refl")
    assert print_tactic(extract_proof(tree)) == "Refl"


def test_extract_thenl():
    tree = tree_for("|- add(n,0) = n")
    split = attach(tree, tree.root, 0, 'Induct "n"')
    attach(tree, split, 0, "Simp []")
    attach(tree, split, 1, "Simp []")
    assert print_tactic(extract_proof(tree)) == 'Induct "n" THENL [Simp [], Simp []]'


def test_extract_then_skips_unsolved_siblings():
    tree = tree_for("|- x = add(x,0)")
    attach(tree, tree.root, 0, 'Cases "x"')  # dead end, left unsolved
    sym = attach(tree, tree.root, 0, "Sym")
    attach(tree, sym, 0, "Simp [nat.add_0_r]")
    t = extract_proof(tree)
    assert print_tactic(t) == "Sym THEN Simp [nat.add_0_r]"
    assert replay_proof(t, G("|- x = add(x,0)"), tree.ctx)


def test_extract_needs_solved_root():
    tree = tree_for("|- x = add(x,0)")
    with pytest.raises(AssertionError):
        extract_proof(tree)


# ------------------------------------------------------------- minimization


def test_minimize_length_drops_unneeded_prefix():
    g = G("|- add(x,0) = x")
    t = minimize_length("Sym THEN Simp [nat.add_0_r]", g, nat_ctx())
    assert print_tactic(t) == "Simp [nat.add_0_r]"


def test_minimize_length_inside_branches():
    g = G("|- add(n,0) = n")
    t = minimize_length('Induct "n" THENL [Sym THEN Simp [], Simp []]', g, nat_ctx())
    assert print_tactic(t) == 'Induct "n" THENL [Simp [], Simp []]'


def test_minimize_length_keeps_needed_units():
    g = G("|- add(n,0) = n")
    t = 'Induct "n" THENL [Simp [], Simp []]'
    assert print_tactic(minimize_length(t, g, nat_ctx())) == t


def test_minimize_args_drops_unused_theorem():
    g = G("|- add(x,0) = x")
    t = minimize_args("Simp [nat.add_comm, nat.add_0_r]", g, nat_ctx())
    assert print_tactic(t) == "Simp [nat.add_0_r]"


def test_minimize_args_keeps_all_needed():
    g = G("|- add(x,S(0)) = S(x)")
    t = minimize_args("Simp [nat.add_0_r, nat.add_S_r]", g, nat_ctx())
    assert print_tactic(t) == "Simp [nat.add_0_r, nat.add_S_r]"


def test_embellish_shortens_unique_names():
    ctx = nat_ctx()
    t = embellish("Simp [nat.add_0_r]", G("|- add(x,0) = x"), ctx)
    assert print_tactic(t) == "Simp [add_0_r]"


def test_embellish_keeps_clashing_names():
    ctx = nat_ctx()
    ctx.add("nat", "comm", G("|- add(n,m) = add(m,n)"))
    ctx.add("list", "comm", G("|- app(l,r) = app(r,l)"))
    t = embellish("Rewrite [nat.comm] THEN Simp [nat.add_0_r]", G("|- add(0,x) = x"), ctx)
    assert print_tactic(t) == "Rewrite [nat.comm] THEN Simp [add_0_r]"


def test_finalize_pipeline():
    g = G("|- add(x,0) = x")
    assert finalize("Sym THEN Simp [nat.add_comm, nat.add_0_r]", g, nat_ctx()) == "Simp [add_0_r]"
    assert finalize("Sym THEN Simp [nat.add_0_r]", g, nat_ctx(), minimize=False) == "Sym THEN Simp [add_0_r]"


def test_proof_script_and_sidecar():
    s = ProofScript(parse_tactic('Induct "n" THEN Simp []'))
    assert s.unit_count == 2 and str(s) == 'Induct "n" THEN Simp []'
    assert unit_count("Refl") == 1
    car = sidecar("nat.t", s, G("|- add(n,0) = n"), nat_ctx())
    assert car["replays"] and car["unit_count"] == 2 and car["replay_ms"] >= 0
    assert not sidecar("nat.t", "Refl", G("|- add(n,0) = n"))["replays"]


# -------------------------------------------- properties on the corpus proofs


def corpus_proofs(limit=None):
    ctx = Context()
    out = []
    for _, decls in load_corpus(CORPUS):
        aliases = {}
        for d in decls:
            if isinstance(d, TheoryDecl):
                ctx.theory = d.name
            elif isinstance(d, AliasDef):
                aliases[d.name] = d.body
            elif isinstance(d, TheoremDecl):
                t = globalize(d.proof, aliases, ctx).tactic
                out.append((d.statement, t, ctx.copy()))
                ctx.add(ctx.theory, d.name, d.statement)
    return out[:limit]


@pytest.fixture(scope="module")
def human_proofs():
    # every fourth proof keeps this module quick; the acceptance suite covers found proofs
    return corpus_proofs()[::4]


def test_minimizers_on_human_proofs(human_proofs):
    for goal, t, ctx in human_proofs:
        short = minimize_length(t, goal, ctx)
        assert unit_count(short) <= unit_count(t)
        assert replay_proof(short, goal, ctx)
        assert minimize_length(short, goal, ctx) == short
        lean = minimize_args(short, goal, ctx)
        assert replay_proof(lean, goal, ctx)
        assert minimize_args(lean, goal, ctx) == lean
        pretty = embellish(lean, goal, ctx)
        assert replay_proof(pretty, goal, ctx)
