"""GumTree-style tree differencing and extraction of concrete edits.

Mapping happens in three steps: a top-down pass pairing identical subtrees
(height >= 2, largest first), a bottom-up pass pairing ancestors by the
dice coefficient of their mapped descendants, and a light recovery pass
that aligns the still-unmapped children of every bottom-up pair with an
LCS (by identity, then by label+value, then by label).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .edits import MOD, UNMOD, BugReport, EditPattern, PatternStats, tag_error
from .tree import SEQUENCE_LABELS, Node, Path, strip_spans

MIN_HEIGHT = 2
MIN_DICE = 0.5


class _Index:
    """Flat pre-order view of a tree."""

    def __init__(self, root: Node):
        self.nodes: list[Node] = []
        self.paths: list[Path] = []
        self.parent: list[int] = []
        self.kids: list[list[int]] = []
        stack = [(root, (), -1)]
        while stack:
            node, path, par = stack.pop()
            i = len(self.nodes)
            self.nodes.append(node)
            self.paths.append(path)
            self.parent.append(par)
            self.kids.append([])
            if par >= 0:
                self.kids[par].append(i)
            for k in range(len(node.children) - 1, -1, -1):
                stack.append((node.children[k][1], path + (k,), i))
        n = len(self.nodes)
        self.end = list(range(1, n + 1))
        self.height = [1] * n
        for i in range(n - 1, -1, -1):
            if self.kids[i]:
                self.end[i] = self.end[self.kids[i][-1]]
                self.height[i] = 1 + max(self.height[k] for k in self.kids[i])
        self.by_path = {p: i for i, p in enumerate(self.paths)}
        self.post: list[int] = []
        self._postorder(0)

    def _postorder(self, root: int) -> None:
        stack = [(root, False)]
        while stack:
            i, done = stack.pop()
            if done:
                self.post.append(i)
                continue
            stack.append((i, True))
            for k in reversed(self.kids[i]):
                stack.append((k, False))

    def size(self, i: int) -> int:
        return self.end[i] - i

    def is_desc(self, d: int, i: int) -> bool:
        return i < d < self.end[i]

    def ancestors(self, i: int):
        i = self.parent[i]
        while i >= 0:
            yield i
            i = self.parent[i]


class _Matcher:
    def __init__(self, before: Node, after: Node):
        self.b = _Index(before)
        self.a = _Index(after)
        self.b2a: dict[int, int] = {}
        self.a2b: dict[int, int] = {}

    def link(self, i: int, j: int) -> None:
        self.b2a[i] = j
        self.a2b[j] = i

    def link_subtree(self, i: int, j: int) -> None:
        for k in range(self.b.size(i)):
            self.link(i + k, j + k)

    def subtree_free(self, i: int, j: int) -> bool:
        return all(i + k not in self.b2a for k in range(self.b.size(i))) and all(
            j + k not in self.a2b for k in range(self.a.size(j))
        )

    def dice(self, i: int, j: int) -> float:
        nb, na = self.b.size(i) - 1, self.a.size(j) - 1
        if nb + na == 0:
            return 0.0
        common = 0
        for d in range(i + 1, self.b.end[i]):
            p = self.b2a.get(d)
            if p is not None and self.a.is_desc(p, j):
                common += 1
        return 2.0 * common / (nb + na)

    def top_down(self) -> None:
        max_h = min(self.b.height[0], self.a.height[0])
        for h in range(max_h, MIN_HEIGHT - 1, -1):
            groups: dict[Node, tuple[list, list]] = {}
            for i, node in enumerate(self.b.nodes):
                if self.b.height[i] == h and i not in self.b2a:
                    groups.setdefault(node, ([], []))[0].append(i)
            for j, node in enumerate(self.a.nodes):
                if self.a.height[j] == h and j not in self.a2b and node in groups:
                    groups[node][1].append(j)
            ambiguous = []
            for bs, as_ in groups.values():
                if not as_:
                    continue
                if len(bs) == 1 and len(as_) == 1:
                    self.link_subtree(bs[0], as_[0])
                else:
                    ambiguous.extend((i, j) for i in bs for j in as_)

            def parent_dice(pair):
                pi, pj = self.b.parent[pair[0]], self.a.parent[pair[1]]
                d = self.dice(pi, pj) if pi >= 0 and pj >= 0 else 0.0
                return (-d, pair[0], pair[1])

            for i, j in sorted(ambiguous, key=parent_dice):
                if i not in self.b2a and j not in self.a2b and self.subtree_free(i, j):
                    self.link_subtree(i, j)

    def bottom_up(self) -> None:
        for i in self.b.post:
            if i in self.b2a or not self.b.kids[i] or i == 0:
                continue
            label = self.b.nodes[i].label
            cands = set()
            for d in range(i + 1, self.b.end[i]):
                p = self.b2a.get(d)
                if p is None:
                    continue
                for anc in self.a.ancestors(p):
                    if anc not in self.a2b and self.a.nodes[anc].label == label:
                        cands.add(anc)
            best, best_d = None, MIN_DICE
            for j in sorted(cands):
                d = self.dice(i, j)
                if d > best_d:
                    best, best_d = j, d
            if best is not None:
                self.link(i, best)
                self.recover(i, best)
        if 0 not in self.b2a and 0 not in self.a2b and self.b.nodes[0].label == self.a.nodes[0].label:
            self.link(0, 0)
        if self.b2a.get(0) == 0:
            self.recover(0, 0)

    def recover(self, i: int, j: int) -> None:
        bn, an = self.b.nodes, self.a.nodes
        keys = (
            lambda x: x,
            lambda x: (x.label, x.value),
            lambda x: x.label,
        )
        for level, key in enumerate(keys):
            ub = [c for c in self.b.kids[i] if c not in self.b2a]
            ua = [c for c in self.a.kids[j] if c not in self.a2b]
            if not ub or not ua:
                return
            pairs = _lcs(ub, ua, lambda x, y: key(bn[x]) == key(an[y]))
            for x, y in pairs:
                if level == 0:
                    if self.subtree_free(x, y):
                        self.link_subtree(x, y)
                else:
                    self.link(x, y)
                    self.recover(x, y)

    def run(self) -> None:
        self.top_down()
        self.bottom_up()


def _lcs(xs: list, ys: list, eq) -> list[tuple]:
    n, m = len(xs), len(ys)
    dp = [[0] * (m + 1) for _ in range(n + 1)]
    for p in range(n - 1, -1, -1):
        for q in range(m - 1, -1, -1):
            if eq(xs[p], ys[q]):
                dp[p][q] = dp[p + 1][q + 1] + 1
            else:
                dp[p][q] = max(dp[p + 1][q], dp[p][q + 1])
    out, p, q = [], 0, 0
    while p < n and q < m:
        if eq(xs[p], ys[q]) and dp[p][q] == dp[p + 1][q + 1] + 1:
            out.append((xs[p], ys[q]))
            p += 1
            q += 1
        elif dp[p + 1][q] >= dp[p][q + 1]:
            p += 1
        else:
            q += 1
    return out


def _increasing_keep(seq: list[int]) -> set[int]:
    """Positions of a longest increasing subsequence; ties keep later items."""
    n = len(seq)
    best = [1] * n
    prev = [-1] * n
    for k in range(n):
        for q in range(k):
            if seq[q] < seq[k] and best[q] + 1 >= best[k]:
                best[k], prev[k] = best[q] + 1, q
    if not n:
        return set()
    top = max(best)
    k = max(i for i in range(n) if best[i] == top)
    keep = set()
    while k >= 0:
        keep.add(k)
        k = prev[k]
    return keep


def _match(before: Node, after: Node) -> _Matcher:
    m = _Matcher(before, after)
    m.run()
    return m


def compute_mappings(before: Node, after: Node) -> set[tuple[Path, Path]]:
    """Injective, label-preserving node mapping between two trees."""
    m = _match(before, after)
    return {(m.b.paths[i], m.a.paths[j]) for i, j in m.b2a.items()}


@dataclass
class Classification:
    """Per-node edit flags, keyed by path.

    ``before_steps`` holds ``delete``/``move``/``update`` flags and
    ``after_steps`` ``insert``/``move``/``update``.  The ``*_modified`` sets
    contain every path whose subtree holds at least one edit step.
    """

    before_steps: dict
    after_steps: dict
    before_modified: set
    after_modified: set

    def before_flags(self, path: Path) -> set:
        flags = set(self.before_steps.get(path, ()))
        flags.add("modified" if path in self.before_modified else "unmodified")
        return flags

    def after_flags(self, path: Path) -> set:
        flags = set(self.after_steps.get(path, ()))
        flags.add("modified" if path in self.after_modified else "unmodified")
        return flags


def _classify(m: _Matcher) -> tuple[dict, dict, list, list]:
    b, a = m.b, m.a
    bsteps: dict[int, set] = {}
    asteps: dict[int, set] = {}
    for i in range(len(b.nodes)):
        if i not in m.b2a:
            bsteps.setdefault(i, set()).add("delete")
    for j in range(len(a.nodes)):
        if j not in m.a2b:
            asteps.setdefault(j, set()).add("insert")
    for i, j in m.b2a.items():
        if b.nodes[i].value != a.nodes[j].value:
            bsteps.setdefault(i, set()).add("update")
            asteps.setdefault(j, set()).add("update")
        pi, pj = b.parent[i], a.parent[j]
        if (pi < 0) != (pj < 0) or (pi >= 0 and m.b2a.get(pi) != pj):
            bsteps.setdefault(i, set()).add("move")
            asteps.setdefault(j, set()).add("move")
    # reorderings among siblings whose parents are mapped to each other
    for i, j in m.b2a.items():
        kept = [c for c in b.kids[i] if m.b2a.get(c) is not None and a.parent[m.b2a[c]] == j]
        if len(kept) < 2:
            continue
        order = {c: k for k, c in enumerate(a.kids[j])}
        keep = _increasing_keep([order[m.b2a[c]] for c in kept])
        for k, c in enumerate(kept):
            if k not in keep:
                bsteps.setdefault(c, set()).add("move")
                asteps.setdefault(m.b2a[c], set()).add("move")
    bdirty = [False] * len(b.nodes)
    for i in range(len(b.nodes) - 1, -1, -1):
        bdirty[i] = i in bsteps or any(bdirty[k] for k in b.kids[i])
    adirty = [False] * len(a.nodes)
    for j in range(len(a.nodes) - 1, -1, -1):
        adirty[j] = j in asteps or any(adirty[k] for k in a.kids[j])
    return bsteps, asteps, bdirty, adirty


def classify_edits(before: Node, after: Node, mapping=None) -> Classification:
    """Edit-step flags for every node.  ``mapping`` defaults to :func:`compute_mappings`."""
    m = _Matcher(before, after)
    if mapping is None:
        m.run()
    else:
        for pb, pa in mapping:
            m.link(m.b.by_path[tuple(pb)], m.a.by_path[tuple(pa)])
    bsteps, asteps, bdirty, adirty = _classify(m)
    return Classification(
        {m.b.paths[i]: f for i, f in bsteps.items()},
        {m.a.paths[j]: f for j, f in asteps.items()},
        {m.b.paths[i] for i, d in enumerate(bdirty) if d},
        {m.a.paths[j] for j, d in enumerate(adirty) if d},
    )


# -- anchor line ------------------------------------------------------------


def change_anchor(old: Node, new: Node) -> Optional[tuple[str, int]]:
    """Locate the smallest changed region of ``old`` (which must carry spans).

    Returns ``("replace", line)`` with the first line of the replaced code,
    ``("insert", line)`` when code is inserted right after ``line`` (0 means
    at the top of the file), or ``None`` if the trees are equal.
    """
    while True:
        if old == new:
            return None
        if old.span is None:
            raise ValueError("anchor computation needs spans on the old tree")
        if not isinstance(new, Node) or old.label != new.label:
            return ("replace", old.span[0])
        if old.label in SEQUENCE_LABELS:
            ok, nk = old.kids, new.kids
            n, m = len(ok), len(nk)
            k = 0
            while k < min(n, m) and ok[k] == nk[k]:
                k += 1
            s = 0
            while s < min(n, m) - k and ok[n - 1 - s] == nk[m - 1 - s]:
                s += 1
            om, nm = ok[k : n - s], nk[k : m - s]
            if len(om) == 1 and len(nm) == 1 and isinstance(nm[0], Node) and om[0].label == nm[0].label:
                old, new = om[0], nm[0]
                continue
            if om:
                return ("replace", om[0].span[0])
            if k > 0:
                return ("insert", ok[k - 1].span[1])
            if n:
                return ("insert", ok[0].span[0] - 1)
            return ("insert", old.span[0] if old.label == "Block" else old.span[1])
        locs_o = [l for l, _ in old.children]
        locs_n = [l for l, _ in new.children]
        if old.value != new.value or locs_o != locs_n:
            return ("replace", old.span[0])
        diff = [k for k, ((_, x), (_, y)) in enumerate(zip(old.children, new.children)) if x != y]
        if len(diff) != 1:
            return ("replace", old.span[0])
        old, new = old.children[diff[0]][1], new.children[diff[0]][1]


def anchor_offset(anchor: Optional[tuple[str, int]], bug_line: int) -> int:
    """Signed line offset of a change anchor from the warning line (negative = above)."""
    if anchor is None:
        return 0
    kind, line = anchor
    if kind == "replace":
        return line - bug_line
    # insertion between ``line`` and ``line + 1``
    return line - bug_line if line < bug_line else line + 1 - bug_line


# -- concrete edits ---------------------------------------------------------


def _rebase(path: Path, root: Path) -> Optional[Path]:
    if path[: len(root)] == root:
        return path[len(root):]
    return None


def extract_concrete_edits(before: Node, after: Node, bug: Optional[BugReport] = None,
                           fix_id=None) -> list[EditPattern]:
    """Every mapped subtree pair that contains a modification, as a hole-free edit.

    Ancestor-rooted edits go all the way up to the roots; region-parent edits
    coincide with mapped pairs, so they are not emitted twice.  Pairs whose
    two sides are identical trees (moved but otherwise untouched) are skipped.
    """
    m = _match(before, after)
    _, _, bdirty, adirty = _classify(m)
    flags = {i: (MOD if bdirty[i] or adirty[j] else UNMOD) for i, j in m.b2a.items()}
    variable = bug.variable if bug else None
    edits = []
    for i in range(len(m.b.nodes)):
        j = m.b2a.get(i)
        if j is None or flags[i] == UNMOD:
            continue
        bt, at = m.b.nodes[i], m.a.nodes[j]
        if bt == at:
            continue
        broot, aroot = m.b.paths[i], m.a.paths[j]
        maps = set()
        for x in range(i, m.b.end[i]):
            y = m.b2a.get(x)
            if y is None or not (y == j or m.a.is_desc(y, j)):
                continue
            maps.add((_rebase(m.b.paths[x], broot), _rebase(m.a.paths[y], aroot), flags[x]))
        z = anchor_offset(change_anchor(bt, at), bug.line) if bug else 0
        edits.append(
            EditPattern(
                strip_spans(tag_error(bt, variable)),
                strip_spans(tag_error(at, variable)),
                frozenset(maps),
                PatternStats.for_leaf(z, fix_id),
                z,
            )
        )
    return edits


def modified_labels(before: Node, after: Node) -> set[str]:
    """Labels of nodes that carry an edit step on either side."""
    m = _match(before, after)
    bsteps, asteps, _, _ = _classify(m)
    return {m.b.nodes[i].label for i in bsteps} | {m.a.nodes[j].label for j in asteps}
