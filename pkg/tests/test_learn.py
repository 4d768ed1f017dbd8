import json
import random

import pytest
from hypothesis import given, strategies as st

from fixmine import corpus
from fixmine.antiunify import more_precise
from fixmine.diff import extract_concrete_edits
from fixmine.edits import MOD, UNMOD, EditPattern, PatternStats, edit_equal, geom_mean, geom_param
from fixmine.learn import (PatternSet, _Clusterer, cluster, learn_patterns, merge_preference, partition_edits,
                           prune_hierarchy)
from fixmine.minijava import parse_source
from fixmine.pipeline import corpus_edits, learn_from_pairs
from fixmine.tree import Hole, Node
from randedits import rand_edit_set

N = Node
GUARD = N("If", "", [("cond", N("BinEx", "==", [("left", Hole(0, "Name", True)), ("right", N("Literal", "null"))])),
                     ("then", N("Return"))])


def test_leaf_stats_initialization():
    above, below, same = PatternStats.for_leaf(-2), PatternStats.for_leaf(3), PatternStats.for_leaf(0)
    assert (above.ratio_above, below.ratio_above, same.ratio_above) == (1.0, 0.0, 0.5)
    assert geom_mean(above.geom_above) == pytest.approx(2)
    assert geom_mean(below.geom_below) == pytest.approx(3)
    assert same.geom_above == same.geom_below == 1.0


def test_stats_merge_rules():
    m = PatternStats.merge(PatternStats.for_leaf(-1, 0), PatternStats.for_leaf(-3, 1))
    assert m.geom_above == pytest.approx(1 / 3)
    assert m.leaf_count == 2 and m.fix_count == 2
    m = PatternStats.merge(PatternStats.for_leaf(-1, 0), PatternStats.for_leaf(1, 1))
    assert m.ratio_above == pytest.approx(0.5)
    m = PatternStats.merge(PatternStats.for_leaf(-1, 0), PatternStats.for_leaf(-1, 0))
    assert m.leaf_count == 2 and m.fix_count == 1


@given(st.lists(st.integers(-6, 6), min_size=1, max_size=8))
def test_merged_stats_stay_in_range(zs):
    s = PatternStats.for_leaf(zs[0], 0)
    for k, z in enumerate(zs[1:], 1):
        s = PatternStats.merge(s, PatternStats.for_leaf(z, k))
    assert 0.0 <= s.ratio_above <= 1.0
    assert 0.0 < s.geom_above <= 1.0 and 0.0 < s.geom_below <= 1.0
    assert s.leaf_count == len(zs)
    above = [-z for z in zs if z < 0]
    if above and all(z != 0 for z in zs):
        assert s.ratio_above == pytest.approx(len(above) / len(zs))
        assert geom_mean(s.geom_above) == pytest.approx(sum(above) / len(above))


def _insert(label_stmt, key="stmt"):
    return EditPattern(N("Block"), N("Block", "", [(key, label_stmt)]), frozenset({((), (), MOD)}))


def test_partition_by_edited_labels():
    ifs = [_insert(GUARD) for _ in range(3)]
    assert len(partition_edits(ifs)) == 1
    key = next(iter(partition_edits(ifs)))
    assert "If" in key
    modifier = EditPattern(N("Modifier", "public"), N("Modifier", "private"), frozenset({((), (), MOD)}))
    assert len(partition_edits(ifs + [modifier])) == 2
    assert partition_edits([]) == {}


def test_merge_preference_prefers_bound_after_holes():
    bound = EditPattern(N("Block"), N("Block", "", [("stmt", N("Return"))]), frozenset({((), (), MOD)}))
    open_ = EditPattern(N("Block"), N("Block", "", [("stmt", Hole(3))]),
                        frozenset({((), (), MOD), ((0,), (0,), MOD), ((1,), (1,), MOD)}))
    assert merge_preference((1, bound), (0, open_)) < 0
    assert merge_preference((0, bound), (1, bound)) < 0
    assert merge_preference((1, bound), (0, bound)) > 0


def test_merge_preference_counts_unmod_mappings():
    ctx = N("ExprStmt", "", [("expr", Hole(1))])
    three = EditPattern(N("Block", "", [("stmt", ctx)]), N("Block", "", [("stmt", N("Return")), ("stmt", ctx)]),
                        frozenset({((), (), MOD), ((0,), (1,), UNMOD), ((0, 0), (1, 0), UNMOD)}))
    two = EditPattern(three.before, three.after, frozenset({((), (), MOD), ((0,), (1,), UNMOD)}))
    assert merge_preference((1, three), (0, two)) < 0


def test_cluster_single_and_identical():
    e = _insert(GUARD).with_stats(PatternStats.for_leaf(-1, 0))
    d = cluster([e])
    assert len(d.nodes) == 1 and d.parents == []
    d = cluster([e, e])
    assert edit_equal(d.nodes[d.root], e)
    assert d.nodes[d.root].leaf_count == 2
    with pytest.raises(ValueError):
        cluster([])


def test_nullcheck_hierarchy_contents():
    ps, d, _ = learn_from_pairs(corpus.nullcheck_pairs())
    seeded = corpus.seeded_patterns()["early_return"]
    assert any(edit_equal(e, seeded, check_mappings=False) for e in ps.patterns)
    # the most general kept pattern inserts the guard in front of an arbitrary call statement
    blocks = [e for e in ps.patterns if e.before.label == "Block" and e.stats.fix_count == 4]
    assert blocks
    assert all(e.after.kids[0].label == "If" for e in blocks)


def test_two_identical_fixes():
    _, before, after, line, var = corpus.NULLCHECK_PAIRS[0]
    pairs = corpus.pairs_from_texts([("a", before, after, line, var), ("b", before, after, line, var)])
    ps, d, n = learn_from_pairs(pairs)
    leaves = n // 2
    twins = [e for e in d.nodes[n:] if e.leaf_count == 2 and e.stats.fix_count == 2]
    assert len(twins) >= leaves
    assert all(any(edit_equal(t, leaf) for leaf in d.nodes[:n]) for t in twins[:leaves])


def test_pruning_threshold_and_open_holes():
    e = _insert(GUARD).with_stats(PatternStats.for_leaf(-1, 0))
    d = cluster([e])
    assert prune_hierarchy(d, 200) == []
    assert prune_hierarchy(d, 100) == [0]
    open_ = _insert(Hole(5)).with_stats(PatternStats.for_leaf(-1, 0))
    assert prune_hierarchy(cluster([open_]), 1) == []


def _replay_chain_consistent(d, edits):
    part_of = {}
    for key, members in partition_edits(edits).items():
        for m in members:
            part_of[m] = key
    c = _Clusterer(d)
    active = set(range(len(edits)))
    for a, b, p in d.parents:
        if part_of[a] == part_of[b]:
            best = c.candidate(a, b)[0]
            for x in active - {a, b}:
                if part_of[x] != part_of[a]:
                    continue
                if c.candidate(a, x)[0] < best or c.candidate(b, x)[0] < best:
                    return False
        part_of[p] = part_of[a] if part_of[a] == part_of[b] else None
        active -= {a, b}
        active.add(p)
    return True


def test_nn_chain_merges_are_reciprocal_nearest_neighbours():
    for seed in range(30):
        edits = rand_edit_set(random.Random(seed), max_edits=6)
        assert _replay_chain_consistent(cluster(edits), edits), seed


def test_clustering_is_deterministic():
    edits = rand_edit_set(random.Random(11), max_edits=10)
    d1, d2 = cluster(edits), cluster(list(edits))
    assert d1.parents == d2.parents
    assert all(edit_equal(x, y) for x, y in zip(d1.nodes, d2.nodes))


def test_support_grows_towards_the_root():
    for seed in range(20):
        d = cluster(rand_edit_set(random.Random(seed)))
        for a, b, p in d.parents:
            assert d.nodes[p].leaf_count > max(d.nodes[a].leaf_count, d.nodes[b].leaf_count)
        for leaf in d.nodes[: d.leaf_count]:
            assert more_precise(leaf, d.nodes[d.root])


def test_pattern_set_json_round_trip(tmp_path):
    ps, _, _ = learn_from_pairs(corpus.nullcheck_pairs())
    path = tmp_path / "p.json"
    path.write_text(ps.dumps())
    back = PatternSet.load(path)
    assert back.training_size == ps.training_size
    assert all(edit_equal(x, y) for x, y in zip(back.patterns, ps.patterns))
    assert [x.stats for x in back.patterns] == [y.stats for y in ps.patterns]
    assert json.loads(path.read_text())["parents"]
