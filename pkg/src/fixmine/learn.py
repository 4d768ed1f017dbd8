"""Hierarchical clustering of concrete edits into a dendrogram of edit patterns."""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Optional

from .antiunify import anti_unify_edits
from .edits import (
    MOD,
    UNMOD,
    EditPattern,
    PatternStats,
    is_wildcard,
    mappings_from_json,
    mappings_to_json,
)
from .tree import Node, from_json_obj, holes, iter_paths, node_count, resolve, to_json_obj

log = logging.getLogger(__name__)

DEFAULT_MIN_SUPPORT = 0.01


def edit_step_labels(e: EditPattern) -> frozenset:
    """Labels of nodes that carry an edit step of their own (not just a modified descendant).

    Unmapped nodes count as inserted/deleted, mapped nodes count when their
    values differ or when their parents are not mapped to each other.
    """
    bmap = {pb: pa for pb, pa, _ in e.mappings}
    amapped = set(bmap.values())
    labels = set()
    for path, n in iter_paths(e.before):
        if path not in bmap:
            labels.add(_label(n))
            continue
        pa = bmap[path]
        m = resolve(e.after, pa)
        if isinstance(n, Node) and isinstance(m, Node) and n.value != m.value:
            labels.add(n.label)
        if path and pa and bmap.get(path[:-1]) != pa[:-1]:
            labels.add(_label(n))
    for path, n in iter_paths(e.after):
        if path not in amapped:
            labels.add(_label(n))
    return frozenset(labels)


def _label(n) -> str:
    return n.label if n.label is not None else "?"


def partition_edits(edits: list[EditPattern]) -> dict[tuple, list[int]]:
    """Group edit indices by the sorted labels of their edited nodes."""
    parts: dict[tuple, list[int]] = {}
    for i, e in enumerate(edits):
        parts.setdefault(tuple(sorted(edit_step_labels(e))), []).append(i)
    return parts


# -- merge preference -------------------------------------------------------


def merge_key(result: EditPattern, subst: Optional[dict] = None) -> tuple:
    """Sort key of a candidate merge result; smaller keys are preferred.

    ``subst`` (hole -> pair of generalized subtrees) feeds the size part of
    the third criterion; without it that component is 0.
    """
    open_after = 1 if result.unbound_after_holes() else 0
    mods = sum(1 for m in result.mappings if m[2] == MOD)
    hole_set = {h.index: h for h in holes(result.before) + holes(result.after)}
    generalized = sum(node_count(x) + node_count(y) for x, y in (subst or {}).values())
    unmod_labeled = 0
    unmod = 0
    for pb, _, flag in result.mappings:
        if flag == UNMOD:
            unmod += 1
            if not is_wildcard(resolve(result.before, pb)):
                unmod_labeled += 1
    errors = sum(1 for h in hole_set.values() if h.error)
    return (open_after, -mods, len(hole_set), generalized, -unmod_labeled, -errors, -unmod)


def merge_preference(c1: tuple, c2: tuple) -> int:
    """Compare candidate merges ``(order, result, subst)``; negative means c1 wins."""
    k1 = merge_key(c1[1], c1[2] if len(c1) > 2 else None) + (c1[0],)
    k2 = merge_key(c2[1], c2[2] if len(c2) > 2 else None) + (c2[0],)
    return (k1 > k2) - (k1 < k2)


# -- clustering -------------------------------------------------------------


@dataclass
class Dendrogram:
    nodes: list[EditPattern]
    parents: list[tuple[int, int, int]] = field(default_factory=list)
    leaf_count: int = 0

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    def children_of(self) -> dict[int, tuple[int, int]]:
        return {p: (a, b) for a, b, p in self.parents}


class _Clusterer:
    def __init__(self, dendro: Dendrogram):
        self.d = dendro
        self.cache: dict[tuple[int, int], tuple[tuple, EditPattern]] = {}

    def candidate(self, i: int, j: int) -> tuple[tuple, EditPattern]:
        a, b = (i, j) if i < j else (j, i)
        hit = self.cache.get((a, b))
        if hit is None:
            e1, e2 = self.d.nodes[a], self.d.nodes[b]
            g, subst = anti_unify_edits(e1, e2, with_subst=True)
            key = merge_key(g, subst) + ((a, b),)
            hit = (key, g)
            self.cache[(a, b)] = hit
        return hit

    def merge(self, i: int, j: int) -> int:
        a, b = (i, j) if i < j else (j, i)
        _, g = self.candidate(a, b)
        self.d.nodes.append(g)
        p = len(self.d.nodes) - 1
        self.d.parents.append((a, b, p))
        return p

    def run(self, members: list[int]) -> int:
        active = set(members)
        chain: list[int] = []
        while len(active) > 1:
            if not chain:
                chain.append(min(active))
            top = chain[-1]
            best, best_key = None, None
            for x in sorted(active):
                if x == top:
                    continue
                key = self.candidate(top, x)[0]
                if best_key is None or key < best_key:
                    best, best_key = x, key
            if len(chain) >= 2 and self.candidate(top, chain[-2])[0] <= best_key:
                best = chain[-2]
            if len(chain) >= 2 and best == chain[-2]:
                chain.pop()
                chain.pop()
                active -= {top, best}
                active.add(self.merge(top, best))
            elif best in chain:
                # cannot happen with a total order; merge directly to stay safe
                chain.clear()
                active -= {top, best}
                active.add(self.merge(top, best))
            else:
                chain.append(best)
        return next(iter(active))


def cluster(edits: list[EditPattern]) -> Dendrogram:
    """Build the dendrogram: cluster each label partition, then fold the partition roots."""
    if not edits:
        raise ValueError("cannot cluster an empty edit list")
    d = Dendrogram(list(edits), [], len(edits))
    c = _Clusterer(d)
    roots = [c.run(members) for _, members in sorted(partition_edits(edits).items())]
    acc = roots[0]
    for r in roots[1:]:
        acc = c.merge(acc, r)
    return d


def propagate_stats(parent: EditPattern, left: EditPattern, right: EditPattern) -> PatternStats:
    """Statistics of ``parent`` from those of the two merged children."""
    return PatternStats.merge(left.stats, right.stats)


def prune_hierarchy(d: Dendrogram, training_size: int, min_support: float = DEFAULT_MIN_SUPPORT) -> list[int]:
    """Indices of dendrogram nodes kept as fix patterns."""
    keep = []
    for i, e in enumerate(d.nodes):
        support = (e.stats.fix_count if e.stats else 1) / max(training_size, 1)
        if support + 1e-12 < min_support:
            continue
        if e.unbound_after_holes():
            continue
        if e.before == e.after:
            continue
        keep.append(i)
    return keep


# -- pattern sets -----------------------------------------------------------


@dataclass
class PatternSet:
    training_size: int
    patterns: list[EditPattern]
    node_ids: list[int] = field(default_factory=list)
    node_count: int = 0
    parents: list = field(default_factory=list)

    def to_json(self) -> dict:
        out = []
        for k, e in enumerate(self.patterns):
            out.append({
                "before": to_json_obj(e.before),
                "after": to_json_obj(e.after),
                "mappings": mappings_to_json(e.mappings),
                "stats": e.stats.to_json() if e.stats else None,
                "node": self.node_ids[k] if k < len(self.node_ids) else k,
            })
        return {
            "trainingSetSize": self.training_size,
            "patterns": out,
            "nodeCount": self.node_count,
            "parents": [list(p) for p in self.parents],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=1)

    @classmethod
    def from_json(cls, obj) -> "PatternSet":
        pats, ids = [], []
        for k, p in enumerate(obj["patterns"]):
            cache: dict = {}
            before = from_json_obj(p["before"], True, cache)
            after = from_json_obj(p["after"], True, cache)
            stats = PatternStats.from_json(p["stats"]) if p.get("stats") else None
            pats.append(EditPattern(before, after, mappings_from_json(p.get("mappings", [])), stats))
            ids.append(int(p.get("node", k)))
        return cls(int(obj["trainingSetSize"]), pats, ids, int(obj.get("nodeCount", len(pats))),
                   [tuple(x) for x in obj.get("parents", [])])

    @classmethod
    def load(cls, path) -> "PatternSet":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


def learn_patterns(edits: list[EditPattern], training_size: int,
                   min_support: float = DEFAULT_MIN_SUPPORT) -> tuple[PatternSet, Dendrogram]:
    d = cluster(edits)
    keep = prune_hierarchy(d, training_size, min_support)
    log.info("clustered %d edits into %d nodes, kept %d patterns", len(edits), len(d.nodes), len(keep))
    ps = PatternSet(training_size, [d.nodes[i] for i in keep], keep, len(d.nodes), list(d.parents))
    return ps, d
