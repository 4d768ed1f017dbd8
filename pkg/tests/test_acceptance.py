"""Acceptance criteria, one test per criterion.

Run with ``pytest tests/test_acceptance.py -v``; a PASS/FAIL line per
criterion is printed in the terminal summary.
"""
import random
import time
from pathlib import Path

import pytest

from fixmine import corpus
from fixmine.antiunify import anti_unify_edits, anti_unify_trees, more_precise
from fixmine.corpus import generate_synthetic, load_corpus, seeded_patterns
from fixmine.edits import MOD, UNMOD, BugReport, EditPattern, PatternStats, edit_equal
from fixmine.fix import enumerate_candidates, rank_candidates
from fixmine.learn import cluster
from fixmine.minijava import SourceFile, parse_statement
from fixmine.pipeline import cross_validate, learn_from_pairs, predict_fixes, same_text
from fixmine.tree import Hole, Node, pattern_equal
from randedits import rand_edit_set

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
N = Node


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


@pytest.mark.criterion(1, "tree anti-unification golden")
def test_tree_anti_unification_golden():
    with Timer() as t:
        g, _ = anti_unify_trees(parse_statement("a = a + a;"), parse_statement("b = b + 2;"))
    h0, h1 = Hole(0, "Name"), Hole(1, None)
    expected = N("Assign", "", [("target", h0), ("value", N("BinEx", "+", [("left", h0), ("right", h1)]))])
    assert pattern_equal(g, expected)
    assert t.elapsed < 1.0


def _assign(name, num):
    return N("Assign", "", [("target", N("Name", name)), ("value", N("Num", num))])


def _when(cond, then):
    return N("If", "", [("cond", N("Name", cond)), ("then", then)])


@pytest.mark.criterion(2, "edit anti-unification golden")
def test_edit_anti_unification_golden():
    # { f(); g(); x = 1; } -> { f(); x = 1; if (c) g(); }
    b1 = N("Block", "", [("stmt", N("Call", "f")), ("stmt", N("Call", "g")), ("stmt", _assign("x", "1"))])
    a1 = N("Block", "", [("stmt", N("Call", "f")), ("stmt", _assign("x", "1")), ("stmt", _when("c", N("Call", "g")))])
    m1 = {((), (), MOD), ((0,), (0,), UNMOD), ((1,), (2, 1), MOD), ((2,), (1,), UNMOD),
          ((2, 0), (1, 0), UNMOD), ((2, 1), (1, 1), UNMOD)}
    # { return; y = 2; } -> { y = 2; if (c) onResult(); }
    b2 = N("Block", "", [("stmt", N("Return")), ("stmt", _assign("y", "2"))])
    a2 = N("Block", "", [("stmt", _assign("y", "2")), ("stmt", _when("c", N("Call", "onResult")))])
    m2 = {((), (), MOD), ((1,), (0,), UNMOD), ((1, 0), (0, 0), UNMOD), ((1, 1), (0, 1), UNMOD)}
    with Timer() as t:
        g = anti_unify_edits(EditPattern(b1, a1, frozenset(m1)), EditPattern(b2, a2, frozenset(m2)))

    h0, h1, h2, h3 = Hole(0, None), Hole(1, "Call"), Hole(2, "Name"), Hole(3, "Num")
    ctx = N("Assign", "", [("target", h2), ("value", h3)])
    expected = EditPattern(
        N("Block", "", [("stmt", h0), ("stmt", ctx)]),
        N("Block", "", [("stmt", ctx), ("stmt", N("If", "", [("cond", N("Name", "c")), ("then", h1)]))]),
        frozenset({((), (), MOD), ((1,), (0,), UNMOD), ((1, 0), (0, 0), UNMOD), ((1, 1), (0, 1), UNMOD)}),
    )
    assert edit_equal(g, expected)
    assert t.elapsed < 1.0


def _ranking_patterns():
    def guard(v):
        return N("If", "", [("cond", N("BinEx", "==", [("left", v), ("right", N("Literal", "null"))])),
                            ("then", N("Return"))])

    v, m = Hole(0, "Name", True), Hole(1, "Name")
    call = N("Call", "", [("receiver", v), ("name", m)])
    stmt = N("ExprStmt", "", [("expr", call)])
    # (empty) -> if (h0 == null) return;
    p1 = EditPattern(N("Block"), N("Block", "", [("stmt", guard(v))]), frozenset({((), (), MOD)}))
    # h0.h1() -> h0 != null && h0.h1()
    p2 = EditPattern(call, N("BinEx", "&&", [
        ("left", N("BinEx", "!=", [("left", v), ("right", N("Literal", "null"))])), ("right", call)]),
        frozenset({((), (1,), UNMOD), ((0,), (1, 0), UNMOD), ((1,), (1, 1), UNMOD)}))
    # h0.h1(); -> if (h0 == null) return; h0.h1();
    p3 = EditPattern(N("Block", "", [("stmt", stmt)]), N("Block", "", [("stmt", guard(v)), ("stmt", stmt)]),
                     frozenset({((), (), MOD), ((0,), (1,), UNMOD)}))
    stats = PatternStats.for_leaf(-1)
    return [p.with_stats(stats) for p in (p1, p2, p3)]


@pytest.mark.criterion(3, "ranking worked example")
def test_ranking_worked_example():
    with Timer() as t:
        src = SourceFile.from_text(corpus.NULLCHECK_TARGET_BEFORE, "FeedFragment.mj")
        bug = BugReport("FeedFragment.mj", corpus.NULLCHECK_TARGET_LINE, corpus.NULLCHECK_TARGET_VARIABLE)
        cands = enumerate_candidates(_ranking_patterns(), 100, src, bug)
        assert sorted(c.pattern_id for c in cands) == [0, 0, 0, 1, 2]
        # prevalence and specialization depend on the pattern only, location on the site
        injected = {0: (0.03, 20.0), 1: (0.05, 40.0), 2: (0.02, 200.0)}
        location = {1: 0.95, 2: 0.9}
        for c in cands:
            c.prevalence, c.specialization = injected[c.pattern_id]
            c.location = location.get(c.pattern_id, 0.5 if c.z < 0 else 0.0)
        ranked = rank_candidates(cands, dedupe=False)
    assert [c.pattern_id for c in ranked] == [2, 1, 0, 0, 0]
    assert ranked[2].z < 0
    for c, want in zip(ranked, [3.6, 1.9, 0.3, 0.0, 0.0]):
        assert abs(c.total - want) <= 1e-9
    assert t.elapsed < 1.0


@pytest.mark.criterion(4, "null-check end-to-end fix with validation")
def test_nullcheck_end_to_end():
    with Timer() as t:
        pairs = load_corpus(CORPUS / "nullcheck")
        assert len(pairs) == 4
        ps, _, _ = learn_from_pairs(pairs)
        src = SourceFile.load(CORPUS / "target" / "FeedFragment.mj")
        bug = BugReport.load(CORPUS / "target" / "bug.json")
        assert bug.variable == "mListView"
        cands = predict_fixes(ps, src, bug, top=5, validate=True, nullable={"mListView"})
    assert cands, "no candidate produced"
    assert same_text(cands[0].text, corpus.NULLCHECK_TARGET_AFTER)
    assert cands[0].text == corpus.NULLCHECK_TARGET_AFTER
    assert cands[0].validated is True
    assert any(edit_equal(e, seeded_patterns()["early_return"], check_mappings=False) for e in ps.patterns)
    assert t.elapsed < 5.0


@pytest.mark.criterion(5, "single-pair round trip on the demo corpus")
def test_demo_round_trip():
    with Timer() as t:
        pairs = load_corpus(CORPUS / "demo")
        failures = []
        for p in pairs:
            ps, _, _ = learn_from_pairs([p])
            cands = predict_fixes(ps, p.before, p.bug, top=1)
            if not cands or not same_text(cands[0].text, p.after.text):
                failures.append(p.name)
    assert len(pairs) >= 20
    assert failures == []
    assert t.elapsed < 30.0


@pytest.mark.criterion(6, "dendrogram invariants on random edit sets")
def test_dendrogram_invariants():
    violations = []
    with Timer() as t:
        for seed in range(200):
            edits = rand_edit_set(random.Random(seed), max_edits=12)
            assert 1 <= len(edits) <= 12
            d = cluster(edits)
            assert len(d.nodes) == 2 * len(edits) - 1
            assert d.nodes[d.root].leaf_count == len(edits)
            for a, b, p in d.parents:
                node, left, right = d.nodes[p], d.nodes[a], d.nodes[b]
                if not edit_equal(node, anti_unify_edits(left, right)):
                    violations.append((seed, p, "not the generalization of its children"))
                if node.leaf_count != left.leaf_count + right.leaf_count:
                    violations.append((seed, p, "leaf count"))
                for c in (left, right):
                    if not more_precise(c, node):
                        violations.append((seed, p, "child not more precise"))
    assert violations == []
    assert t.elapsed < 60.0


@pytest.mark.criterion(7, "synthetic pattern recovery")
def test_synthetic_recovery():
    with Timer() as t:
        pairs = generate_synthetic(60, noise_ratio=0.1, seed=0)
        clean = {p.name for p in pairs if p.kind != "noise"}
        assert len(clean) == 60
        assert len(pairs) - len(clean) == 6
        res = cross_validate(pairs, folds=10, top=5, seed=0)
        ps, _, _ = learn_from_pairs(pairs)
    top1, top5 = res.accuracy(1, clean), res.accuracy(5, clean)
    print(f"synthetic top-1 {top1:.3f} top-5 {top5:.3f}")
    assert top1 >= 0.80
    assert top5 >= 0.90
    for kind, seeded in seeded_patterns().items():
        assert any(edit_equal(e, seeded, check_mappings=False) for e in ps.patterns), kind
    assert t.elapsed < 120.0


@pytest.mark.criterion(8, "published accuracy table (not reproducible)")
def test_published_accuracy_not_reproducible():
    pytest.skip("the large industrial training corpora are unpublished; criteria 5-7 substitute for the accuracy table "
                "and criterion 4 checks the validation loop")
