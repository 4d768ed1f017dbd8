"""Labeled ordered trees, tree patterns with holes, and their JSON encoding.

A :class:`Node` has a label, a (possibly empty) value and an ordered list of
``(location, child)`` edges.  A :class:`Hole` is a pattern variable; tree
patterns are simply trees that may contain holes at any position.

Structural equality and hashing ignore spans and error tags, so nodes can be
used directly as dictionary keys (the anti-unification memo relies on this).
"""
from __future__ import annotations

import json
from typing import Any, Iterator, Optional, Sequence, Union

#: Labels whose children form a statement list.  Patterns rooted at (or
#: containing) such nodes describe a contiguous window of the children.
SEQUENCE_LABELS = frozenset({"Block", "CompilationUnit"})

Span = tuple[int, int]
Path = tuple[int, ...]


class TreeFormatError(ValueError):
    """Raised for malformed tree documents."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class HoleInvariantError(ValueError):
    """Raised when holes sharing an index disagree on label or error flag."""


class Hole:
    __slots__ = ("index", "label", "error", "_hash")
    size = 1

    def __init__(self, index: int, label: Optional[str] = None, error: bool = False):
        if index < 0:
            raise ValueError("hole index must be non-negative")
        self.index = index
        self.label = label
        self.error = bool(error)
        self._hash = hash(("?hole", index, label, self.error))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Hole):
            return NotImplemented
        return (self.index, self.label, self.error) == (other.index, other.label, other.error)

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return to_term(self)

    @property
    def children(self) -> tuple:
        return ()


class Node:
    """Immutable tree node.  ``children`` is a tuple of ``(location, subtree)``."""

    __slots__ = ("label", "value", "children", "span", "error", "_hash", "size")

    def __init__(
        self,
        label: str,
        value: str = "",
        children: Sequence[tuple[str, "Pattern"]] = (),
        span: Optional[Span] = None,
        error: bool = False,
    ):
        if not label:
            raise ValueError("node label must be non-empty")
        self.label = label
        self.value = value
        self.children = tuple((loc, child) for loc, child in children)
        self.span = span
        self.error = error
        self._hash = hash((label, value, self.children))
        self.size = 1 + sum(c.size for _, c in self.children)

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Node):
            return NotImplemented
        return (
            self._hash == other._hash
            and self.label == other.label
            and self.value == other.value
            and self.children == other.children
        )

    def __hash__(self) -> int:
        return self._hash

    def __repr__(self) -> str:
        return to_term(self)

    @property
    def kids(self) -> list["Pattern"]:
        return [c for _, c in self.children]

    def replace(self, **changes: Any) -> "Node":
        fields = {
            "label": self.label,
            "value": self.value,
            "children": self.children,
            "span": self.span,
            "error": self.error,
        }
        fields.update(changes)
        return Node(**fields)


Pattern = Union[Node, Hole]
Tree = Node


def leaf(label: str, value: str = "", span: Optional[Span] = None) -> Node:
    return Node(label, value, (), span)


def is_concrete(p: Pattern) -> bool:
    return not any(isinstance(n, Hole) for n in iter_nodes(p))


def iter_nodes(p: Pattern) -> Iterator[Pattern]:
    """Pre-order traversal."""
    stack = [p]
    while stack:
        n = stack.pop()
        yield n
        if isinstance(n, Node):
            stack.extend(c for _, c in reversed(n.children))


def iter_paths(p: Pattern, prefix: Path = ()) -> Iterator[tuple[Path, Pattern]]:
    """Pre-order traversal yielding ``(path, node)``."""
    yield prefix, p
    if isinstance(p, Node):
        for i, (_, c) in enumerate(p.children):
            yield from iter_paths(c, prefix + (i,))


def node_count(p: Pattern) -> int:
    """Number of nodes; a hole counts as one node."""
    return p.size


def holes(p: Pattern) -> list[Hole]:
    return [n for n in iter_nodes(p) if isinstance(n, Hole)]


def resolve(p: Pattern, path: Sequence[int]) -> Pattern:
    node = p
    for i in path:
        if not isinstance(node, Node) or i >= len(node.children):
            raise KeyError(f"path {tuple(path)} does not resolve")
        node = node.children[i][1]
    return node


def replace_at(p: Pattern, path: Sequence[int], new: Pattern) -> Pattern:
    if not path:
        return new
    assert isinstance(p, Node)
    i = path[0]
    loc, child = p.children[i]
    kids = list(p.children)
    kids[i] = (loc, replace_at(child, path[1:], new))
    return p.replace(children=kids)


def strip_spans(p: Pattern) -> Pattern:
    if isinstance(p, Hole):
        return p
    return Node(p.label, p.value, [(l, strip_spans(c)) for l, c in p.children], None, p.error)


def same_spans(a: Pattern, b: Pattern) -> bool:
    """True iff ``a == b`` and every corresponding node carries the same span."""
    if a != b:
        return False
    if isinstance(a, Hole):
        return True
    if a.span != b.span:
        return False
    return all(same_spans(x, y) for (_, x), (_, y) in zip(a.children, b.children))


# -- term notation ----------------------------------------------------------


def to_term(p: Pattern) -> str:
    """Compact term notation, e.g. ``BinEx:+(Name:x, h0:Literal)``."""
    if isinstance(p, Hole):
        s = f"h{p.index}:{p.label or '?'}"
        return s + "!" if p.error else s
    head = f"{p.label}:{p.value}" if p.value else p.label
    if not p.children:
        return head
    return head + "(" + ", ".join(to_term(c) for _, c in p.children) + ")"


# -- equality modulo hole renaming -----------------------------------------


def _align(p: Pattern, q: Pattern, fwd: dict[int, int], bwd: dict[int, int]) -> bool:
    if isinstance(p, Hole) or isinstance(q, Hole):
        if not (isinstance(p, Hole) and isinstance(q, Hole)):
            return False
        if p.label != q.label or p.error != q.error:
            return False
        a, b = fwd.get(p.index), bwd.get(q.index)
        if a is None and b is None:
            fwd[p.index] = q.index
            bwd[q.index] = p.index
            return True
        return a == q.index and b == p.index
    if p.label != q.label or p.value != q.value or len(p.children) != len(q.children):
        return False
    for (l1, c1), (l2, c2) in zip(p.children, q.children):
        if l1 != l2 or not _align(c1, c2, fwd, bwd):
            return False
    return True


def pattern_equal(p: Pattern, q: Pattern, renaming: Optional[tuple[dict, dict]] = None) -> bool:
    """Structural equality up to a bijective renaming of hole indices.

    Spans are ignored.  Passing ``renaming`` (two dicts) lets callers extend
    one renaming across several trees, e.g. the two sides of an edit pattern.
    """
    fwd, bwd = renaming if renaming is not None else ({}, {})
    return _align(p, q, fwd, bwd)


def check_holes(*trees: Pattern) -> None:
    """Raise :class:`HoleInvariantError` if equal indices disagree."""
    seen: dict[int, tuple[Optional[str], bool]] = {}
    for t in trees:
        for h in holes(t):
            sig = (h.label, h.error)
            if seen.setdefault(h.index, sig) != sig:
                raise HoleInvariantError(f"hole {h.index} used with inconsistent label/error flag")


# -- JSON documents ---------------------------------------------------------


def to_json_obj(p: Pattern) -> dict[str, Any]:
    if isinstance(p, Hole):
        return {"hole": {"index": p.index, "label": p.label, "errorVariable": p.error}}
    obj: dict[str, Any] = {
        "label": p.label,
        "value": p.value,
        "children": [{"location": loc, "tree": to_json_obj(c)} for loc, c in p.children],
    }
    if p.span is not None:
        obj["span"] = {"startLine": p.span[0], "endLine": p.span[1]}
    return obj


def serialize_tree(p: Pattern) -> str:
    return json.dumps(to_json_obj(p), ensure_ascii=False, separators=(",", ":"))


def from_json_obj(obj: Any, pattern: bool = False, _cache: Optional[dict] = None) -> Pattern:
    cache: dict[int, Hole] = {} if _cache is None else _cache
    if not isinstance(obj, dict):
        raise TreeFormatError("tree node must be an object")
    if "hole" in obj:
        if not pattern:
            raise TreeFormatError("hole found in a non-pattern document")
        h = obj["hole"]
        try:
            hole = Hole(int(h["index"]), h.get("label"), bool(h.get("errorVariable", False)))
        except (KeyError, TypeError, ValueError) as exc:
            raise TreeFormatError(f"bad hole: {exc}") from exc
        prev = cache.get(hole.index)
        if prev is None:
            cache[hole.index] = hole
            return hole
        if prev != hole:
            raise HoleInvariantError(f"hole {hole.index} used with inconsistent label/error flag")
        return prev
    try:
        label = obj["label"]
        value = obj.get("value", "")
        raw_children = obj.get("children", [])
    except (KeyError, TypeError) as exc:
        raise TreeFormatError(f"missing field {exc}") from exc
    if not isinstance(label, str) or not label or not isinstance(value, str):
        raise TreeFormatError("label must be a non-empty string and value a string")
    children = []
    for edge in raw_children:
        if not isinstance(edge, dict) or "tree" not in edge:
            raise TreeFormatError("child edge must be {location, tree}")
        children.append((str(edge.get("location", "")), from_json_obj(edge["tree"], pattern, cache)))
    span = None
    if "span" in obj and obj["span"] is not None:
        s = obj["span"]
        try:
            span = (int(s["startLine"]), int(s["endLine"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise TreeFormatError(f"bad span: {exc}") from exc
        if span[0] < 1 or span[1] < span[0]:
            raise TreeFormatError(f"invalid span {span}")
    return Node(label, value, children, span)


def parse_tree_doc(text: Union[str, bytes], pattern: bool = False) -> Pattern:
    """Decode a JSON tree document.  Holes are accepted only if ``pattern``."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise TreeFormatError(exc.msg, len(text[: exc.pos].encode("utf-8"))) from exc
    return from_json_obj(obj, pattern)
