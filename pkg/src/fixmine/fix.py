"""Apply learned edit patterns to a buggy file and rank the resulting fixes."""
from __future__ import annotations

import difflib
from dataclasses import dataclass
from typing import Iterator, Optional

from .diff import anchor_offset, change_anchor
from .edits import UNMOD, BugReport, EditPattern, PatternStats, geom_pmf
from .minijava import RenderError, SourceFile, SpliceRegion, splice_region
from .tree import SEQUENCE_LABELS, Hole, Node, Path, Pattern, holes, iter_paths, node_count, replace_at, resolve


@dataclass(frozen=True)
class Match:
    """One way the before part matches: where, and what each node/hole bound to.

    ``corr`` maps pattern paths to ``(target path, window start)``; the start
    is only meaningful for sequence nodes, which match a contiguous run of
    statements.
    """

    site: Path
    subst: dict
    corr: dict


def _chain_to_dict(chain) -> dict:
    out = {}
    while chain is not None:
        ppath, tpath, start, chain = chain
        out[ppath] = (tpath, start)
    return out


def _match(p: Pattern, t: Pattern, ppath: Path, tpath: Path, subst: dict, chain, error_var) -> Iterator:
    if isinstance(p, Hole):
        if p.label is not None and (not isinstance(t, Node) or t.label != p.label):
            return
        if p.error and error_var is not None and not (
            isinstance(t, Node) and t.label == "Name" and t.value == error_var
        ):
            return
        bound = subst.get(p.index)
        if bound is not None:
            if bound != t:
                return
            yield subst, (ppath, tpath, 0, chain)
            return
        new = dict(subst)
        new[p.index] = t
        yield new, (ppath, tpath, 0, chain)
        return
    if not isinstance(t, Node) or t.label != p.label or t.value != p.value:
        return
    k, n = len(p.children), len(t.children)
    if p.label in SEQUENCE_LABELS:
        starts = range(n - k + 1)
    elif k == n and all(a == b for (a, _), (b, _) in zip(p.children, t.children)):
        starts = range(1)
    else:
        return
    for s in starts:
        yield from _match_kids(p, t, ppath, tpath, 0, s, subst, (ppath, tpath, s, chain), error_var)


def _match_kids(p: Node, t: Node, ppath, tpath, j, s, subst, chain, error_var) -> Iterator:
    if j == len(p.children):
        yield subst, chain
        return
    ploc, pc = p.children[j]
    tloc, tc = t.children[s + j]
    if ploc != tloc:
        return
    for sub2, chain2 in _match(pc, tc, ppath + (j,), tpath + (s + j,), subst, chain, error_var):
        yield from _match_kids(p, t, ppath, tpath, j + 1, s, sub2, chain2, error_var)


def find_matches(p: Pattern, t: Node, error_var: Optional[str] = None) -> list[Match]:
    """All matches of ``p`` in ``t``, in pre-order of the site, then window start."""
    out = []
    for path, node in iter_paths(t):
        for subst, chain in _match(p, node, (), path, {}, None, error_var):
            corr = _chain_to_dict(chain)
            out.append(Match(path, subst, corr))
    return out


def match_pattern(p: Pattern, t: Node) -> list[tuple[Path, dict]]:
    """``(site, substitution)`` for every match; substitutions map hole index to subtree."""
    return [(m.site, m.subst) for m in find_matches(p, t)]


# -- instantiation ----------------------------------------------------------


class InstantiationError(ValueError):
    pass


def instantiate(e: EditPattern, m: Match, target: Node, error_var: Optional[str] = None) -> Node:
    """Build the concrete replacement for the matched site."""
    amap = {pa: (pb, flag) for pb, pa, flag in e.mappings}
    site_node = resolve(target, m.site)

    def conc(tpath: Path) -> Node:
        return resolve(site_node, tpath[len(m.site):])

    def build(ap: Pattern, apath: Path) -> Pattern:
        hit = amap.get(apath)
        if hit is not None and hit[0] in m.corr:
            bpath, flag = hit
            tpath, start = m.corr[bpath]
            tnode = conc(tpath)
            if flag == UNMOD:
                return tnode
            bp = resolve(e.before, bpath)
            if (isinstance(ap, Node) and isinstance(bp, Node) and ap.label in SEQUENCE_LABELS
                    and bp.label == ap.label and tnode.label == ap.label):
                kids = list(tnode.children[:start])
                kids += [(loc, build(c, apath + (k,))) for k, (loc, c) in enumerate(ap.children)]
                kids += list(tnode.children[start + len(bp.children):])
                return Node(ap.label, ap.value, kids)
        if isinstance(ap, Hole):
            if ap.index in m.subst:
                return m.subst[ap.index]
            if ap.error and error_var is not None:
                return Node("Name", error_var)
            raise InstantiationError(f"hole h{ap.index} is unbound")
        return Node(ap.label, ap.value, [(loc, build(c, apath + (k,))) for k, (loc, c) in enumerate(ap.children)])

    out = build(e.after, ())
    if not isinstance(out, Node):
        raise InstantiationError("after part did not instantiate to a tree")
    return out


# -- scores -----------------------------------------------------------------


def score_prevalence(stats: PatternStats, training_size: int) -> float:
    return stats.fix_count / training_size if training_size else 0.0


def score_location(stats: PatternStats, z: int) -> float:
    if z < 0:
        return stats.ratio_above * geom_pmf(stats.geom_above, -z)
    if z > 0:
        return (1.0 - stats.ratio_above) * geom_pmf(stats.geom_below, z)
    return max(stats.ratio_above * geom_pmf(stats.geom_above, 0),
               (1.0 - stats.ratio_above) * geom_pmf(stats.geom_below, 0))


def score_specialization(tree: Node, match_count: int) -> float:
    if match_count <= 0:
        raise ValueError("pattern does not match")
    return node_count(tree) / match_count


@dataclass
class FixCandidate:
    pattern_id: int
    site: Path
    z: int
    subst: dict
    prevalence: float
    location: float
    specialization: float
    patch: str = ""
    text: str = ""
    region: Optional[SpliceRegion] = None
    validated: Optional[bool] = None
    order: int = 0

    @property
    def total(self) -> float:
        return self.prevalence * self.location * self.specialization

    def to_json(self, rank: int) -> dict:
        return {
            "rank": rank,
            "patternId": self.pattern_id,
            "z": self.z,
            "scores": {
                "prevalence": self.prevalence,
                "location": self.location,
                "specialization": self.specialization,
                "total": self.total,
            },
            "patch": self.patch,
            "validated": self.validated,
        }


def needs_error_variable(e: EditPattern) -> bool:
    return any(h.error for h in holes(e.before) + holes(e.after))


def unified_patch(old: str, new: str, path: str) -> str:
    return "".join(difflib.unified_diff(old.splitlines(True), new.splitlines(True), path, path))


def enumerate_candidates(patterns, training_size: int, file: SourceFile, bug: BugReport) -> list[FixCandidate]:
    """Every (pattern, match) pair that yields a real change, scored but unranked.

    ``patterns`` is a list of :class:`EditPattern` with statistics.
    """
    out = []
    for pid, e in enumerate(patterns):
        if needs_error_variable(e) and bug.variable is None:
            continue
        matches = find_matches(e.before, file.tree, bug.variable)
        if not matches:
            continue
        special = score_specialization(file.tree, len(matches))
        prev = score_prevalence(e.stats, training_size) if e.stats else 0.0
        for m in matches:
            try:
                repl = instantiate(e, m, file.tree, bug.variable)
            except InstantiationError:
                continue
            if repl == resolve(file.tree, m.site):
                continue
            try:
                text, region = splice_region(file, m.site, repl)
            except RenderError:
                continue
            z = anchor_offset(change_anchor(file.tree, replace_at(file.tree, m.site, repl)), bug.line)
            loc = score_location(e.stats, z) if e.stats else 0.0
            out.append(FixCandidate(pid, m.site, z, m.subst, prev, loc, special,
                                    unified_patch(file.text, text, file.path), text, region,
                                    order=len(out)))
    return out


def rank_candidates(cands: list[FixCandidate], dedupe: bool = True) -> list[FixCandidate]:
    """Sort by total score, then specialization, then closeness to the warning.

    With ``dedupe`` only the best-ranked candidate per distinct patched text
    is kept.
    """
    ranked = sorted(cands, key=lambda c: (-c.total, -c.specialization, abs(c.z), c.order))
    if not dedupe:
        return ranked
    seen, out = set(), []
    for c in ranked:
        key = c.text if c.text else id(c)
        if key in seen:
            continue
        seen.add(key)
        out.append(c)
    return out


def predict(patterns, training_size: int, file: SourceFile, bug: BugReport, top: int = 5) -> list[FixCandidate]:
    return rank_candidates(enumerate_candidates(patterns, training_size, file, bug))[:top]
