from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tacsearch.config import SearchConfig
from tacsearch.goalsys import ParseError, Success, apply_tactic, parse_goal, parse_tactic, print_tactic
from tacsearch.goalsys.syntax import ThmList
from tacsearch.goalsys.tactics import Context
from tacsearch.goalsys.terms import list_subsumed
from tacsearch.harness import build_knowledge, walk_corpus
from tacsearch.knowledge import (
    AliasDef,
    GoalTacticPair,
    OutcomeCache,
    Recorder,
    TacticDB,
    TheoremDB,
    TheoremDecl,
    TheoryDecl,
    abstract_tactic,
    collect_goal_list_records,
    fill_holes,
    globalize,
    instantiate,
    orthogonalize,
    parse_script,
    save_knowledge,
    split_tactic_units,
    subsumes_tactic,
)
from tacsearch.knowledge.db import TheoremRecord, load_knowledge

from conftest import CORPUS, FIXTURES

G = parse_goal


def nat_ctx():
    ctx = Context(theory="nat")
    ctx.add("nat", "add_0_r", G("|- add(n,0) = n"))
    ctx.add("nat", "add_S_r", G("|- add(n,S(m)) = S(add(n,m))"))
    ctx.add("nat", "add_comm", G("|- add(n,m) = add(m,n)"))
    return ctx


# ---------------------------------------------------------------- scripts


def test_parse_script_declarations():
    decls = parse_script('theory list\ndef LIST_INDUCT = Induct "l"\ntheorem a : |- app(l,nil) = l := LIST_INDUCT THEN Simp [] .\n')
    assert [type(d) for d in decls] == [TheoryDecl, AliasDef, TheoremDecl]
    thm = decls[2]
    assert thm.name == "a" and thm.proof_text == "LIST_INDUCT THEN Simp []" and thm.line == 3


def test_unterminated_proof_reports_line():
    with pytest.raises(ParseError) as e:
        parse_script("theory t\ntheorem a : |- x = x := Refl\n")
    assert "unterminated proof" in e.value.msg
    assert e.value.line == 3


def test_script_error_has_column():
    with pytest.raises(ParseError) as e:
        parse_script("theory t\ntheorem a : |- add(x = x := Refl .")
    assert (e.value.line, e.value.col) == (2, 22)


def test_globalize_inlines_and_qualifies():
    ctx = Context(theory="list")
    ctx.add("list", "app_nil", G("|- app(l,nil) = l"))
    aliases = {"LIST_INDUCT": parse_tactic('Induct "l"')}
    res = globalize(parse_tactic("LIST_INDUCT THEN Simp [app_nil]"), aliases, ctx)
    assert res.text == 'Induct "l" THEN Simp [list.app_nil]'
    assert res.unresolved == [] and res.references == ["list.app_nil"]
    again = globalize(res.tactic, {}, ctx)
    assert again.text == res.text


def test_globalize_keeps_unknown_reference(caplog):
    res = globalize(parse_tactic("Simp [mystery]"), {}, Context(theory="nat"))
    assert res.text == "Simp [mystery]"
    assert res.unresolved == ["mystery"]
    assert "mystery" in caplog.text


def test_globalize_wraps_compound_alias():
    aliases = {"TWO": parse_tactic("Sym THEN Simp []")}
    res = globalize(parse_tactic("TWO THEN Refl", keep_parens=True), aliases, Context())
    assert res.text == "(Sym THEN Simp []) THEN Refl"


@pytest.mark.parametrize(
    "code, units",
    [
        ('Sym THEN Induct "n" THENL [Refl, Simp []]', ["Sym", 'Induct "n"', "Refl", "Simp []"]),
        ("Refl", ["Refl"]),
        ("(Sym THEN Sym) THEN Auto [nat.a]", ["Sym", "Sym", "Auto [nat.a]"]),
    ],
)
def test_split_units(code, units):
    _, got = split_tactic_units(parse_tactic(code, keep_parens=True))
    assert [print_tactic(u) for u in got] == units


# -------------------------------------------------------------- recording


def record(text, cfg=None, ctx=None):
    ctx = ctx or nat_ctx()
    rec = Recorder(ctx, cfg or SearchConfig())
    decl = [d for d in parse_script(text) if isinstance(d, TheoremDecl)][0]
    return rec, rec.record_proof(decl, "nat", {})


def test_linear_proof_records_each_unit():
    rec, pairs = record("theory nat theorem t : |- add(S(0),add(n,0)) = S(n) := Sym THEN Sym THEN Simp [add_0_r] .")
    assert len(pairs) == 3


def test_thenl_records_root_base_step():
    rec, pairs = record('theory nat theorem t : |- add(n,0) = n := Induct "n" THENL [Simp [], Simp []] .')
    assert [str(p.goal) for p in pairs] == [
        "|- add(n,0) = n",
        "|- add(0,0) = 0",
        "add(n,0) = n |- add(S(n),0) = S(n)",
    ]


def test_failing_proof_records_nothing():
    rec, pairs = record("theory nat theorem t : |- add(n,0) = n := Refl .")
    assert pairs == [] and len(rec.kb.tactics) == 0
    assert rec.warnings and "does not replay" in rec.warnings[0]


def test_running_example_golden():
    text = (FIXTURES / "running_example.thy").read_text()
    ctx = Context()
    lines = []
    aliases = {}
    for d in parse_script(text):
        if isinstance(d, TheoryDecl):
            ctx.theory = d.name
        elif isinstance(d, AliasDef):
            aliases[d.name] = d.body
        else:
            lines.append(f"{ctx.theory}.{d.name}: {globalize(d.proof, aliases, ctx).text}")
            ctx.add(ctx.theory, d.name, d.statement)
    assert "\n".join(lines) + "\n" == (FIXTURES / "running_example.globalized.txt").read_text()

    plain = walk_corpus(FIXTURES / "running_example.thy", SearchConfig(orthogonalization=False))
    units = "".join(f"{p.theorem}: {p.tactic}\n" for p in plain.kb.tactics.pairs)
    assert units == (FIXTURES / "running_example.units.txt").read_text()
    full = walk_corpus(FIXTURES / "running_example.thy")
    assert f"{len(full.kb.tactics)}\n" == (FIXTURES / "running_example.pairs.txt").read_text()


# ------------------------------------------------------- orthogonalization


def cache(ctx):
    return OutcomeCache(ctx, SearchConfig(tactic_timeout=1.0, auto_timeout=1.0))


def test_subsumes_tactic_cases():
    ctx = nat_ctx()
    oc = cache(ctx)
    g = G("|- add(x,0) = add(0,x)")
    # closing the goal subsumes any output
    assert subsumes_tactic("Simp [nat.add_0_r]", "Sym", g, oc)
    # a failing tactic subsumes nothing
    assert not subsumes_tactic("Refl", "Sym", g, oc)
    # one goal does not subsume a disjoint pair
    assert not subsumes_tactic("Sym", 'Cases "x"', g, oc)
    a, b = G("|- x = y"), G("|- add(x,0) = y")
    assert list_subsumed([a], [a, b]) and not list_subsumed([a, b], [a])


def test_orthogonalize_empty_db_keeps_incumbent():
    ctx = nat_ctx()
    comp = orthogonalize("Simp [nat.add_0_r]", G("|- add(x,0) = x"), TacticDB(), cache(ctx), abstraction=False)
    assert comp.winner.code == "Simp [nat.add_0_r]"


def test_orthogonalize_prefers_covering_tactic():
    ctx = nat_ctx()
    db = TacticDB()
    for i, goal in enumerate(["add(0,0) = 0", "add(0,y) = y", "add(S(0),0) = S(0)", "mul(0,y) = 0", "len(nil) = 0"]):
        db.add(GoalTacticPair(G("|- " + goal), "Simp []", (), "nat"))
    db.add(GoalTacticPair(G("|- x = x"), "Refl", (), "nat"))
    g = G("|- add(0,add(x,0)) = add(x,0)")
    comp = orthogonalize("Rewrite [nat.add_0_r]", g, db, cache(ctx), abstraction=False)
    assert comp.winner.code == "Simp []"
    assert db.coverage("Simp []") == 5


def test_orthogonalize_excludes_failing_candidates():
    ctx = nat_ctx()
    db = TacticDB([GoalTacticPair(G(f"|- x{i} = x{i}"), "Refl", (), "nat") for i in range(6)])
    comp = orthogonalize("Simp [nat.add_0_r]", G("|- add(x0,0) = x0"), db, cache(ctx), abstraction=False)
    assert comp.winner.code == "Simp [nat.add_0_r]"


def test_goal_list_labels():
    ctx = nat_ctx()
    comp = orthogonalize("Simp [nat.add_0_r]", G("|- add(x,0) = x"), TacticDB(), cache(ctx), abstraction=False)
    recs = collect_goal_list_records([comp])
    assert [r.positive for r in recs.records] == [True]
    db = TacticDB([GoalTacticPair(G("|- add(y,0) = z"), t, (), "nat") for t in ("Sym", 'Cases "y"', "Simp [nat.add_0_r]")])
    comp = orthogonalize("Simp [nat.add_0_r]", G("|- add(x,0) = x"), db, cache(ctx), abstraction=False)
    # Cases "y" fails on a goal over x, so only Sym yields a negative list
    labels = sorted(r.positive for r in comp.goal_list_records())
    assert labels == [False, True]


# ------------------------------------------------------------- abstraction


def test_abstract_examples():
    assert abstract_tactic("Simp [list.app_nil]").code == "Simp □"
    assert abstract_tactic("Refl") is None
    assert abstract_tactic("Rewrite [a.b] THEN Auto [c.d]").code == "Rewrite □ THEN Auto □"


names = st.lists(st.sampled_from(["nat.a", "nat.b", "list.c", "x.y"]), max_size=3).map(tuple)


@given(st.lists(st.tuples(st.sampled_from(["Simp", "Rewrite", "Auto", "RewriteRev"]), names), min_size=1, max_size=3))
def test_abstraction_round_trip(units):
    code = " THEN ".join(f"{n} [{', '.join(ns)}]" for n, ns in units)
    code = print_tactic(parse_tactic(code))
    ab = abstract_tactic(code)
    assert ab.origin == code
    assert fill_holes(ab.code, [ThmList(ns) for _, ns in units]) == code


def test_instantiate():
    th = TheoremDB()
    th.add(TheoremRecord("t.a", G("|- add(x,0) = x")))
    th.add(TheoremRecord("t.b", G("|- len(nil) = 0")))
    assert instantiate("Simp □", G("|- add(y,0) = y"), th) == "Simp [t.a, t.b]"
    assert instantiate("Simp [t.b]", G("|- x = x"), th) == "Simp [t.b]"
    assert instantiate("Simp □", G("|- x = x"), TheoremDB()) == "Simp []"


# ------------------------------------------------------ corpus invariants


def test_coverage_equals_recount(corpus_knowledge):
    db = corpus_knowledge.kb.tactics
    recount = {}
    for p in db.pairs:
        recount.setdefault(p.tactic, set()).add(p.goal.key)
    assert db.coverage_map() == {t: len(gs) for t, gs in recount.items()}


def test_corpus_records_without_warnings(corpus_knowledge):
    assert corpus_knowledge.warnings == []
    assert len(corpus_knowledge.kb.theorems) >= 100


def test_stored_pairs_replay(corpus_knowledge):
    ctx = corpus_knowledge.ctx
    for p in corpus_knowledge.kb.tactics.pairs:
        code = p.instance or p.tactic
        out = apply_tactic(code, p.goal, 5.0, ctx)
        assert isinstance(out, Success), (p.tactic, str(p.goal))
        assert [g.key for g in out.goals] == [g.key for g in p.output]


def test_dependencies_are_older(corpus_knowledge):
    seen = set()
    for r in corpus_knowledge.kb.theorems.records:
        assert set(r.dependencies) <= seen, r.name
        seen.add(r.name)


def test_winner_subsumes_incumbent(corpus_knowledge):
    ctx = corpus_knowledge.ctx
    oc = cache(ctx)
    rec = corpus_knowledge.recorder
    for comp in rec.competitions:
        base = oc(comp.incumbent, comp.goal)
        assert isinstance(base, Success)
        assert list_subsumed(comp.winner.output, base.goals)


def test_persistence_is_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    save_knowledge(build_knowledge(FIXTURES / "running_example.thy").kb, a)
    save_knowledge(build_knowledge(FIXTURES / "running_example.thy").kb, b)
    for name in ("tactics.jsonl", "theorems.jsonl", "goallists.jsonl", "features.jsonl"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    kb = load_knowledge(a)
    save_knowledge(kb, tmp_path / "c")
    assert (tmp_path / "c" / "tactics.jsonl").read_bytes() == (a / "tactics.jsonl").read_bytes()
