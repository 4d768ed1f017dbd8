"""A toy syntactic null-dereference checker used to produce and validate bug reports.

A dereference ``v.m()`` or ``v.f`` of a name listed as nullable is reported
unless one of these guards is visible:

* an earlier ``if (v == null) return;`` in the same or an enclosing block,
* an enclosing ``if`` whose condition has a ``v != null`` conjunct
  (or the else branch of ``if (v == null)``),
* ``v != null && ...`` to the left within the same expression,
* a ternary ``v != null ? ... : ...``.

No data flow is tracked: reassigning ``v`` does not invalidate a guard.
"""
from __future__ import annotations

import json
from typing import Iterable, Optional

from .edits import BugReport
from .minijava import ParseError, SourceFile
from .tree import Node


def _null_test(e: Node, op: str) -> Optional[str]:
    if not isinstance(e, Node) or e.label != "BinEx" or e.value != op:
        return None
    l, r = e.kids
    if isinstance(l, Node) and isinstance(r, Node):
        if l.label == "Name" and r.label == "Literal" and r.value == "null":
            return l.value
        if r.label == "Name" and l.label == "Literal" and l.value == "null":
            return r.value
    return None


def _nonnull(e: Node) -> set:
    """Names known to be non-null when ``e`` is true."""
    v = _null_test(e, "!=")
    if v is not None:
        return {v}
    if isinstance(e, Node) and e.label == "BinEx" and e.value == "&&":
        l, r = e.kids
        return _nonnull(l) | _nonnull(r)
    return set()


def _null(e: Node) -> set:
    """Names known to be non-null when ``e`` is false."""
    v = _null_test(e, "==")
    if v is not None:
        return {v}
    if isinstance(e, Node) and e.label == "BinEx" and e.value == "||":
        l, r = e.kids
        return _null(l) | _null(r)
    return set()


def _returns(s: Node) -> bool:
    if s.label == "Return":
        return True
    return s.label == "Block" and bool(s.kids) and s.kids[0].label == "Return"


class _Checker:
    def __init__(self, nullable: set, path: str):
        self.nullable = nullable
        self.path = path
        self.found: list[tuple[int, str]] = []

    def expr(self, e: Node, guarded: frozenset) -> None:
        if not isinstance(e, Node):
            return
        lab = e.label
        if lab in ("Call", "FieldAccess"):
            recv = next((c for l, c in e.children if l == "receiver"), None)
            if (isinstance(recv, Node) and recv.label == "Name" and recv.value in self.nullable
                    and recv.value not in guarded):
                self.found.append((e.span[0] if e.span else 1, recv.value))
        if lab == "BinEx" and e.value in ("&&", "||"):
            l, r = e.kids
            self.expr(l, guarded)
            extra = _nonnull(l) if e.value == "&&" else _null(l)
            self.expr(r, guarded | extra)
            return
        if lab == "Ternary":
            c, t, f = e.kids
            self.expr(c, guarded)
            self.expr(t, guarded | _nonnull(c))
            self.expr(f, guarded | _null(c))
            return
        for c in e.kids:
            self.expr(c, guarded)

    def block(self, b: Node, guarded: frozenset) -> None:
        g = guarded
        for s in b.kids:
            self.stmt(s, g)
            if s.label == "If" and len(s.children) == 2 and _returns(s.kids[1]):
                g = g | _null(s.kids[0])

    def stmt(self, s: Node, guarded: frozenset) -> None:
        lab = s.label
        if lab == "Block":
            self.block(s, guarded)
        elif lab == "If":
            cond = s.kids[0]
            self.expr(cond, guarded)
            self.stmt(s.kids[1], guarded | _nonnull(cond))
            if len(s.kids) > 2:
                self.stmt(s.kids[2], guarded | _null(cond))
        elif lab in ("CompilationUnit", "Class"):
            for c in s.kids:
                if c.label in ("Class", "Method", "VarDecl"):
                    self.stmt(c, frozenset())
        elif lab == "Method":
            self.block(s.kids[-1], frozenset())
        else:
            for c in s.kids:
                self.expr(c, guarded)


def analyze(file: SourceFile, nullable: Iterable[str]) -> list[BugReport]:
    """Unguarded dereferences of nullable names, ordered by line."""
    ch = _Checker(set(nullable), file.path)
    ch.stmt(file.tree, frozenset())
    seen = sorted(set(ch.found))
    return [BugReport(file.path, line, var) for line, var in seen]


def load_config(path) -> set:
    with open(path, encoding="utf-8") as fh:
        obj = json.load(fh)
    names = obj.get("nullableNames") if isinstance(obj, dict) else None
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise ValueError("config must be {\"nullableNames\": [string, ...]}")
    return set(names)


def expected_line(bug_line: int, region) -> tuple[int, int]:
    """Where the warning would sit after the patch: an inclusive line range."""
    if region is None or bug_line < region.start:
        return bug_line, bug_line
    end_old = region.start + region.old_count
    if bug_line >= end_old:
        shift = region.new_count - region.old_count
        return bug_line + shift, bug_line + shift
    return region.start, region.start + max(region.new_count, 1) - 1


def validate_fix(candidate, file: SourceFile, bug: BugReport, nullable: Iterable[str]) -> bool:
    """True iff the patched file parses and the original warning is gone."""
    try:
        patched = SourceFile.from_text(candidate.text, file.path)
    except ParseError:
        return False
    lo, hi = expected_line(bug.line, candidate.region)
    for r in analyze(patched, nullable):
        if r.variable == bug.variable and lo <= r.line <= hi:
            return False
    return True
