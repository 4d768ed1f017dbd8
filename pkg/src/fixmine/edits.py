"""Edit patterns, their learned statistics and bug reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Optional

from .tree import Hole, Node, Path, Pattern, holes, iter_paths, pattern_equal, resolve

MOD = "mod"
UNMOD = "unmod"

Mapping = tuple[Path, Path, str]


@dataclass(frozen=True)
class BugReport:
    file: str
    line: int
    variable: Optional[str] = None
    category: str = "NullPointerException"

    def __post_init__(self):
        if self.line < 1:
            raise ValueError("bug line must be >= 1")

    @classmethod
    def from_json(cls, obj) -> "BugReport":
        try:
            return cls(str(obj["file"]), int(obj["line"]), obj.get("variable"), obj.get("category", "NullPointerException"))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"bad bug report: {exc}") from exc

    @classmethod
    def load(cls, path) -> "BugReport":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {"file": self.file, "line": self.line, "variable": self.variable, "category": self.category}


def geom_param(mean: float) -> float:
    """Parameter p of a geometric law on {0, 1, ...} whose mean is ``mean``."""
    return 1.0 / (mean + 1.0)


def geom_mean(p: float) -> float:
    return (1.0 - p) / p


def geom_pmf(p: float, d: int) -> float:
    return p * (1.0 - p) ** d


@dataclass(frozen=True)
class PatternStats:
    """Support and line-offset statistics of one pattern.

    ``ratio_above`` is the share of training fixes applied above the warning
    line.  ``fixes`` holds the ids of the distinct training fixes the pattern
    generalizes; ``fix_count`` is its size and drives prevalence and pruning.
    """

    leaf_count: int
    ratio_above: float
    geom_above: float
    geom_below: float
    fixes: frozenset = field(default=frozenset(), compare=False)
    fix_count: int = 0

    @classmethod
    def for_leaf(cls, z: int, fix_id=None) -> "PatternStats":
        if z < 0:
            ratio, above, below = 1.0, geom_param(-z), 1.0
        elif z > 0:
            ratio, above, below = 0.0, 1.0, geom_param(z)
        else:
            ratio, above, below = 0.5, 1.0, 1.0
        fixes = frozenset() if fix_id is None else frozenset([fix_id])
        return cls(1, ratio, above, below, fixes, len(fixes) or 1)

    @classmethod
    def merge(cls, left: "PatternStats", right: "PatternStats") -> "PatternStats":
        n1, n2 = left.leaf_count, right.leaf_count
        n = n1 + n2
        ratio = (n1 * left.ratio_above + n2 * right.ratio_above) / n

        def side(w1, p1, w2, p2):
            if w1 + w2 <= 0:
                return 1.0
            return geom_param((w1 * geom_mean(p1) + w2 * geom_mean(p2)) / (w1 + w2))

        above = side(n1 * left.ratio_above, left.geom_above, n2 * right.ratio_above, right.geom_above)
        below = side(n1 * (1 - left.ratio_above), left.geom_below,
                     n2 * (1 - right.ratio_above), right.geom_below)
        fixes = left.fixes | right.fixes
        count = len(fixes) if fixes else max(left.fix_count, right.fix_count)
        return cls(n, ratio, above, below, fixes, count)

    def to_json(self) -> dict:
        return {
            "leafCount": self.leaf_count,
            "fixCount": self.fix_count,
            "ratioAbove": self.ratio_above,
            "geomAbove": self.geom_above,
            "geomBelow": self.geom_below,
        }

    @classmethod
    def from_json(cls, obj) -> "PatternStats":
        leaves = int(obj["leafCount"])
        return cls(leaves, float(obj["ratioAbove"]), float(obj["geomAbove"]), float(obj["geomBelow"]),
                   frozenset(), int(obj.get("fixCount", leaves)))


@dataclass(frozen=True)
class EditPattern:
    before: Pattern
    after: Pattern
    mappings: frozenset = frozenset()
    stats: Optional[PatternStats] = None
    z: Optional[int] = None

    @property
    def leaf_count(self) -> int:
        return self.stats.leaf_count if self.stats else 1

    def unmod_paths(self) -> tuple[set, set]:
        b, a = set(), set()
        for pb, pa, flag in self.mappings:
            if flag == UNMOD:
                b.add(pb)
                a.add(pa)
        return b, a

    def before_map(self) -> dict:
        return {pb: (pa, flag) for pb, pa, flag in self.mappings}

    def unbound_after_holes(self) -> list[Hole]:
        bound = {h.index for h in holes(self.before)}
        return [h for h in holes(self.after) if h.index not in bound and not h.error]

    def with_stats(self, stats: PatternStats) -> "EditPattern":
        return replace(self, stats=stats)

    def term(self) -> str:
        from .tree import to_term

        return f"{to_term(self.before)} -> {to_term(self.after)}"


def edit_equal(e1: EditPattern, e2: EditPattern, check_mappings: bool = True) -> bool:
    """Equality modulo one hole renaming shared by the before and after parts."""
    ren = ({}, {})
    if not (pattern_equal(e1.before, e2.before, ren) and pattern_equal(e1.after, e2.after, ren)):
        return False
    return not check_mappings or e1.mappings == e2.mappings


def check_mappings(e: EditPattern) -> None:
    """Raise ``ValueError`` unless mappings resolve and are injective both ways."""
    seen_b, seen_a = set(), set()
    for pb, pa, flag in e.mappings:
        if flag not in (MOD, UNMOD):
            raise ValueError(f"bad mapping flag {flag!r}")
        resolve(e.before, pb)
        resolve(e.after, pa)
        if pb in seen_b or pa in seen_a:
            raise ValueError("mapping is not injective")
        seen_b.add(pb)
        seen_a.add(pa)


def mappings_to_json(mappings) -> list:
    return [[list(pb), list(pa), flag] for pb, pa, flag in sorted(mappings)]


def mappings_from_json(obj) -> frozenset:
    return frozenset((tuple(pb), tuple(pa), str(flag)) for pb, pa, flag in obj)


def all_paths(p: Pattern) -> list[Path]:
    return [path for path, _ in iter_paths(p)]


def is_wildcard(p: Pattern) -> bool:
    return isinstance(p, Hole) and p.label is None


def tag_error(t: Pattern, variable: Optional[str]) -> Pattern:
    """Mark ``Name`` nodes whose value equals ``variable`` as the error variable."""
    if variable is None or isinstance(t, Hole):
        return t
    kids = [(l, tag_error(c, variable)) for l, c in t.children]
    err = t.error or (t.label == "Name" and t.value == variable)
    return Node(t.label, t.value, kids, t.span, err)
