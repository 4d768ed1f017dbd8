"""Anti-unification (least general generalization) of tree and edit patterns.

Edit patterns are generalized in three steps: unmodified context is stripped
from both sides, the stripped before and after trees are anti-unified with
one shared hole memo, and finally unmodified context that both inputs agree
on is added back together with the node mappings.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .edits import MOD, UNMOD, EditPattern, PatternStats, edit_equal, is_wildcard
from .tree import SEQUENCE_LABELS, Hole, Node, Path, Pattern, holes, pattern_equal, resolve

Substitution = dict  # Hole -> (left subtree, right subtree)


def _err(p: Pattern) -> bool:
    return p.error


class AntiUnifier:
    """Stateful anti-unifier whose hole memo can span several calls."""

    def __init__(self):
        self.memo: dict = {}
        self.subst: Substitution = {}
        self.next_index = 0

    def hole_for(self, x: Pattern, y: Pattern) -> Hole:
        key = (x, y, _err(x), _err(y))
        h = self.memo.get(key)
        if h is None:
            lx = x.label
            label = lx if lx is not None and lx == y.label else None
            h = Hole(self.next_index, label, _err(x) and _err(y))
            self.next_index += 1
            self.memo[key] = h
            self.subst[h] = (x, y)
        return h

    def unify(self, x: Pattern, y: Pattern, prov: Optional[dict] = None, here: Path = (),
              px: Path = (), py: Path = (), xmap=None, ymap=None) -> Pattern:
        """Anti-unify ``x`` and ``y``.

        When ``prov`` is given, every result path is recorded with the pair of
        input paths it came from (translated through ``xmap``/``ymap``).
        """
        if prov is not None:
            prov[here] = (xmap[px] if xmap is not None else px, ymap[py] if ymap is not None else py)
        if (
            isinstance(x, Node)
            and isinstance(y, Node)
            and x.label == y.label
            and x.value == y.value
            and len(x.children) == len(y.children)
            and all(l1 == l2 for (l1, _), (l2, _) in zip(x.children, y.children))
        ):
            kids = []
            for k, ((loc, cx), (_, cy)) in enumerate(zip(x.children, y.children)):
                kids.append((loc, self.unify(cx, cy, prov, here + (k,), px + (k,), py + (k,), xmap, ymap)))
            return Node(x.label, x.value, kids, None, x.error and y.error)
        return self.hole_for(x, y)


def anti_unify_trees(p: Pattern, q: Pattern) -> tuple[Pattern, Substitution]:
    """Least general generalization of two tree patterns and its substitution."""
    au = AntiUnifier()
    g = au.unify(p, q)
    return g, au.subst


# -- stripping unmodified context ------------------------------------------


def _child_windows(e: EditPattern, ub: set, ua: set) -> tuple[dict, dict]:
    """Kept child window ``[lo, hi)`` for every sequence node on both sides."""
    bmap = e.before_map()
    wb: dict[Path, tuple[int, int]] = {}
    wa: dict[Path, tuple[int, int]] = {}

    def span(node, path, unmod):
        mods = [k for k in range(len(node.children)) if path + (k,) not in unmod]
        return (mods[0], mods[-1] + 1) if mods else None

    def walk(p, path, unmod, out):
        if isinstance(p, Node):
            if p.label in SEQUENCE_LABELS:
                out[path] = span(p, path, unmod)
            for k, (_, c) in enumerate(p.children):
                walk(c, path + (k,), unmod, out)

    walk(e.before, (), ub, wb)
    walk(e.after, (), ua, wa)
    amap = {pa: pb for pb, (pa, _) in bmap.items()}
    for pb, win in list(wb.items()):
        pa = bmap.get(pb, (None,))[0]
        if pa not in wa:
            wb[pb] = win or (0, 0)
            continue
        wa_win = wa[pa]
        if win is None and wa_win is not None:
            g = 0
            for k in range(len(resolve(e.before, pb).children)):
                partner = bmap.get(pb + (k,), (None,))[0]
                if partner is not None and partner[:-1] == pa and partner[-1] < wa_win[0]:
                    g = k + 1
            wb[pb] = (g, g)
        elif wa_win is None and win is not None:
            g = 0
            for k in range(len(resolve(e.after, pa).children)):
                partner = amap.get(pa + (k,))
                if partner is not None and partner[:-1] == pb and partner[-1] < win[0]:
                    g = k + 1
            wa[pa] = (g, g)
        elif win is None:
            wb[pb] = (0, 0)
            wa[pa] = (0, 0)
    for pa, win in list(wa.items()):
        if win is None:
            wa[pa] = (0, 0)
    return wb, wa


def _strip(p: Pattern, unmod: set, windows: dict, path: Path, spath: Path, pmap: dict) -> Pattern:
    pmap[spath] = path
    if isinstance(p, Hole):
        return p
    lo, hi = windows.get(path, (0, len(p.children))) if p.label in SEQUENCE_LABELS else (0, len(p.children))
    kids = []
    for k in range(lo, hi):
        loc, c = p.children[k]
        cpath, cspath = path + (k,), spath + (len(kids),)
        if cpath in unmod:
            _record(c, cpath, cspath, pmap)
            kids.append((loc, c))
        else:
            kids.append((loc, _strip(c, unmod, windows, cpath, cspath, pmap)))
    return Node(p.label, p.value, kids, p.span, p.error)


def _record(p: Pattern, path: Path, spath: Path, pmap: dict) -> None:
    pmap[spath] = path
    if isinstance(p, Node):
        for k in range(len(p.children)):
            _record(p.children[k][1], path + (k,), spath + (k,), pmap)


def strip_unmod(p: Pattern, unmod: set, windows: Optional[dict] = None) -> Pattern:
    """Drop unmodified context from a pattern.

    ``unmod`` is the set of paths whose subtrees are unmodified.  In a
    statement sequence only the span from the first to the last modified
    child survives (an all-unmodified sequence becomes empty).  Children of
    other nodes are kept, and stripping recurses into the modified ones.
    """
    if windows is None:
        windows = {}

        def walk(q, path):
            if isinstance(q, Node):
                if q.label in SEQUENCE_LABELS:
                    mods = [k for k in range(len(q.children)) if path + (k,) not in unmod]
                    windows[path] = (mods[0], mods[-1] + 1) if mods else (0, 0)
                for k, (_, c) in enumerate(q.children):
                    walk(c, path + (k,))

        walk(p, ())
    if () in unmod and not (isinstance(p, Node) and p.label in SEQUENCE_LABELS):
        return p
    return _strip(p, unmod, windows, (), (), {})


@dataclass
class _Side:
    edit: EditPattern
    ub: set
    ua: set
    wb: dict
    wa: dict
    sb: Pattern
    sa: Pattern
    pmb: dict
    pma: dict
    bmap: dict


def _prepare(e: EditPattern) -> _Side:
    cached = e.__dict__.get("_side")
    if cached is not None:
        return cached
    side = _compute_side(e)
    object.__setattr__(e, "_side", side)
    return side


def _compute_side(e: EditPattern) -> _Side:
    ub, ua = e.unmod_paths()
    wb, wa = _child_windows(e, ub, ua)
    pmb, pma = {}, {}
    sb = e.before if () in ub and not _is_seq(e.before) else _strip(e.before, ub, wb, (), (), pmb)
    sa = e.after if () in ua and not _is_seq(e.after) else _strip(e.after, ua, wa, (), (), pma)
    if not pmb:
        _record(sb, (), (), pmb)
    if not pma:
        _record(sa, (), (), pma)
    return _Side(e, ub, ua, wb, wa, sb, sa, pmb, pma, e.before_map())


def _is_seq(p: Pattern) -> bool:
    return isinstance(p, Node) and p.label in SEQUENCE_LABELS


_SIGNATURES = (("L", "L"), ("R", "R"), ("R", "L"), ("L", "R"))


def _context_items(au: AntiUnifier, s1: _Side, s2: _Side, xs: tuple, ys: tuple):
    """Greedily grow the mapped sequence pair outward with shared unmodified context."""
    sides = []
    for s, x, y in ((s1, xs[0], ys[0]), (s2, xs[1], ys[1])):
        bnode, anode = resolve(s.edit.before, x), resolve(s.edit.after, y)
        cmap = {}
        for k in range(len(bnode.children)):
            hit = s.bmap.get(x + (k,))
            if hit and hit[1] == UNMOD and hit[0][:-1] == y:
                cmap[k] = hit[0][-1]
        sides.append([bnode, anode, cmap, list(s.wb[x]), list(s.wa[y])])
    left, right, aleft, aright = [], [], [], []
    while True:
        for sb, sa in _SIGNATURES:
            picks = []
            for bnode, anode, cmap, wb, wa in sides:
                cb = wb[0] - 1 if sb == "L" else wb[1]
                want = wa[0] - 1 if sa == "L" else wa[1]
                if 0 <= cb < len(bnode.children) and 0 <= want < len(anode.children) and cmap.get(cb) == want:
                    picks.append((cb, want))
                else:
                    break
            if len(picks) < 2:
                continue
            (b1, a1), (b2, a2) = picks
            provb, prova = {}, {}
            gb = au.unify(sides[0][0].children[b1][1], sides[1][0].children[b2][1], provb,
                          (), xs[0] + (b1,), xs[1] + (b2,))
            if is_wildcard(gb):
                continue
            ga = au.unify(sides[0][1].children[a1][1], sides[1][1].children[a2][1], prova,
                          (), ys[0] + (a1,), ys[1] + (a2,))
            locb = sides[0][0].children[b1][0]
            loca = sides[0][1].children[a1][0]
            (left if sb == "L" else right).append((locb, gb, provb))
            (aleft if sa == "L" else aright).append((loca, ga, prova))
            for side, (cb, ca) in zip(sides, picks):
                wb, wa = side[3], side[4]
                if sb == "L":
                    wb[0] -= 1
                else:
                    wb[1] += 1
                if sa == "L":
                    wa[0] -= 1
                else:
                    wa[1] += 1
            break
        else:
            return left, right, aleft, aright


def _rebuild(p: Pattern, path: Path, new_path: Path, inserts: dict, prov: dict, out: dict) -> Pattern:
    if path in prov:
        out[new_path] = prov[path]
    if isinstance(p, Hole):
        return p
    left, right = inserts.get(path, ([], []))
    kids = []
    for loc, g, gprov in reversed(left):
        _place(g, gprov, new_path + (len(kids),), out)
        kids.append((loc, g))
    for k, (loc, c) in enumerate(p.children):
        kids.append((loc, _rebuild(c, path + (k,), new_path + (len(kids),), inserts, prov, out)))
    for loc, g, gprov in right:
        _place(g, gprov, new_path + (len(kids),), out)
        kids.append((loc, g))
    return Node(p.label, p.value, kids, None, p.error)


def _place(g: Pattern, gprov: dict, at: Path, out: dict) -> None:
    for rel, src in gprov.items():
        out[at + rel] = src


def anti_unify_edits(e1: EditPattern, e2: EditPattern, with_subst: bool = False):
    """Generalize two edit patterns; statistics of the inputs are merged.

    With ``with_subst`` the hole substitution is returned as well.
    """
    s1, s2 = _prepare(e1), _prepare(e2)
    au = AntiUnifier()
    provb, prova = {}, {}
    gb = au.unify(s1.sb, s2.sb, provb, (), (), (), s1.pmb, s2.pmb)
    ga = au.unify(s1.sa, s2.sa, prova, (), (), (), s1.pma, s2.pma)

    rev_a = {v: k for k, v in prova.items()}
    ins_b, ins_a = {}, {}
    for rb in sorted(provb):
        node = resolve(gb, rb)
        if not _is_seq(node):
            continue
        x1, x2 = provb[rb]
        h1, h2 = s1.bmap.get(x1), s2.bmap.get(x2)
        if not h1 or not h2:
            continue
        ra = rev_a.get((h1[0], h2[0]))
        if ra is None or not _is_seq(resolve(ga, ra)) or resolve(ga, ra).label != node.label:
            continue
        if x1 not in s1.wb or x2 not in s2.wb or h1[0] not in s1.wa or h2[0] not in s2.wa:
            continue
        left, right, aleft, aright = _context_items(au, s1, s2, (x1, x2), (h1[0], h2[0]))
        if left or right:
            ins_b[rb] = (left, right)
            ins_a[ra] = (aleft, aright)
    new_provb, new_prova = {}, {}
    gb = _rebuild(gb, (), (), ins_b, provb, new_provb)
    ga = _rebuild(ga, (), (), ins_a, prova, new_prova)

    rev_a = {v: k for k, v in new_prova.items()}
    maps = set()
    for rb, (x1, x2) in new_provb.items():
        h1, h2 = s1.bmap.get(x1), s2.bmap.get(x2)
        if not h1 or not h2:
            continue
        ra = rev_a.get((h1[0], h2[0]))
        if ra is None:
            continue
        flag = UNMOD if h1[1] == UNMOD and h2[1] == UNMOD else MOD
        maps.add((rb, ra, flag))
    stats = None
    if e1.stats is not None and e2.stats is not None:
        stats = PatternStats.merge(e1.stats, e2.stats)
    g = EditPattern(gb, ga, frozenset(maps), stats, None)
    if with_subst:
        used = {h.index for h in holes(gb)} | {h.index for h in holes(ga)}
        return g, {h: pair for h, pair in au.subst.items() if h.index in used}
    return g


def more_precise(p, q) -> bool:
    """``p`` is at least as precise as ``q``: generalizing both yields ``q``."""
    if isinstance(p, EditPattern):
        return edit_equal(anti_unify_edits(p, q), q)
    return pattern_equal(anti_unify_trees(p, q)[0], q)
