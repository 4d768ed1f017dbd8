"""Fix corpora on disk, the bundled demo corpora and a synthetic corpus generator.

A corpus directory holds triples ``NAME.before.mj``, ``NAME.after.mj`` and
``NAME.bug.json``.
"""
from __future__ import annotations

import json
import os
import random
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Optional

from .edits import BugReport
from .minijava import SourceFile


class CorpusError(ValueError):
    """Raised for incomplete or empty corpus directories."""


@dataclass
class FixPair:
    name: str
    before: SourceFile
    after: SourceFile
    bug: BugReport
    kind: str = ""


def load_corpus(directory) -> list[FixPair]:
    d = FsPath(directory)
    if not d.is_dir():
        raise CorpusError(f"{d} is not a directory")
    names = set()
    for f in d.iterdir():
        for suffix in (".before.mj", ".after.mj", ".bug.json"):
            if f.name.endswith(suffix):
                names.add(f.name[: -len(suffix)])
    if not names:
        raise CorpusError(f"{d} contains no fix pairs")
    pairs = []
    for name in sorted(names):
        parts = [d / f"{name}{s}" for s in (".before.mj", ".after.mj", ".bug.json")]
        missing = [p.name for p in parts if not p.exists()]
        if missing:
            raise CorpusError(f"pair {name!r} is missing {', '.join(missing)}")
        before = SourceFile.load(parts[0])
        after = SourceFile.load(parts[1])
        try:
            bug = BugReport.load(parts[2])
        except ValueError as exc:
            raise CorpusError(f"{parts[2].name}: {exc}") from exc
        pairs.append(FixPair(name, before, after, bug))
    return pairs


def atomic_write(path, text: str) -> None:
    path = FsPath(path)
    tmp = path.with_name(f".{path.name}.tmp{os.getpid()}")
    with open(tmp, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_corpus(directory, pairs: list[tuple]) -> None:
    """Write ``(name, before_text, after_text, line, variable)`` tuples as a corpus."""
    d = FsPath(directory)
    d.mkdir(parents=True, exist_ok=True)
    for name, before, after, line, variable in pairs:
        atomic_write(d / f"{name}.before.mj", before)
        atomic_write(d / f"{name}.after.mj", after)
        bug = {"file": f"{name}.before.mj", "line": line, "variable": variable,
               "category": "NullPointerException" if variable else "Other"}
        atomic_write(d / f"{name}.bug.json", json.dumps(bug, indent=1) + "\n")


def pairs_from_texts(items: list[tuple], kind: str = "") -> list[FixPair]:
    out = []
    for name, before, after, line, variable in items:
        path = f"{name}.before.mj"
        out.append(FixPair(name, SourceFile.from_text(before, path), SourceFile.from_text(after, f"{name}.after.mj"),
                           BugReport(path, line, variable), kind))
    return out


def _cls(name: str, body: str, header: str = "void run()") -> str:
    lines = body.strip("\n").split("\n")
    inner = "\n".join("        " + l if l else l for l in lines)
    return f"class {name} {{\n    {header} {{\n{inner}\n    }}\n}}\n"


# -- null-check demo (four fixes that all add an early return) --------------

NULLCHECK_PAIRS = [
    ("progress",
     _cls("Worker", "task.makeProgress();", "public void doWork()"),
     _cls("Worker", "if (task == null)\n    return;\ntask.makeProgress();", "public void doWork()"),
     3, "task"),
    ("camera",
     _cls("Preview", "mCamera.release();\nmCamera = null;", "void onPause()"),
     _cls("Preview", "if (mCamera == null)\n    return;\nmCamera.release();\nmCamera = null;", "void onPause()"),
     3, "mCamera"),
    ("adapter",
     _cls("ListFragment", "int n = 0;\nmAdapter.notifyDataSetChanged();", "void refresh()"),
     _cls("ListFragment", "int n = 0;\nif (mAdapter == null)\n    return;\nmAdapter.notifyDataSetChanged();",
          "void refresh()"),
     4, "mAdapter"),
    ("status",
     _cls("Monitor", "log(mConn.status());", "void report()"),
     _cls("Monitor", "if (mConn == null)\n    return;\nlog(mConn.status());", "void report()"),
     3, "mConn"),
]

NULLCHECK_TARGET_BEFORE = _cls("FeedFragment", "mListView.clearListeners();\nmListView = null;", "void onDestroyView()")
NULLCHECK_TARGET_AFTER = _cls("FeedFragment", "if (mListView == null)\n    return;\nmListView.clearListeners();\nmListView = null;",
                  "void onDestroyView()")
NULLCHECK_TARGET_LINE = 3
NULLCHECK_TARGET_VARIABLE = "mListView"


# -- round-trip demo corpus: one small fix per pair -------------------------

DEMO_PAIRS = [
    ("early_return",
     _cls("A", "int n = 1;\nsession.close();"),
     _cls("A", "int n = 1;\nif (session == null)\n    return;\nsession.close();"), 4, "session"),
    ("conjunct",
     _cls("B", "if (user.isAdmin()) {\n    grant();\n}"),
     _cls("B", "if (user != null && user.isAdmin()) {\n    grant();\n}"), 3, "user"),
    ("ternary",
     _cls("C", "Object name = item.label();\nshow(name);"),
     _cls("C", "Object name = item != null ? item.label() : null;\nshow(name);"), 3, "item"),
    ("wrap_guard",
     _cls("D", "cursor.close();\ndone();"),
     _cls("D", "if (cursor != null) {\n    cursor.close();\n}\ndone();"), 3, "cursor"),
    ("rename_call",
     _cls("E", "stream.close();"),
     _cls("E", "stream.closeQuietly();"), 3, None),
    ("literal",
     _cls("F", "int retries = 0;\nstart(retries);"),
     _cls("F", "int retries = 3;\nstart(retries);"), 3, None),
    ("operator",
     _cls("G", "if (i < limit) {\n    step();\n}"),
     _cls("G", "if (i <= limit) {\n    step();\n}"), 3, None),
    ("reset_field",
     _cls("H", "mPlayer.release();\nlog(\"released\");"),
     _cls("H", "mPlayer.release();\nmPlayer = null;\nlog(\"released\");"), 3, "mPlayer"),
    ("delete_stmt",
     _cls("I", "debug(state);\nstate.apply();"),
     _cls("I", "state.apply();"), 3, None),
    ("add_argument",
     _cls("J", "conn.connect();"),
     _cls("J", "conn.connect(timeout);"), 3, None),
    ("negate",
     _cls("K", "if (ready) {\n    go();\n}"),
     _cls("K", "if (!ready) {\n    go();\n}"), 3, None),
    ("return_value",
     _cls("L", "return count;", "int total()"),
     _cls("L", "return count + 1;", "int total()"), 3, None),
    ("null_return",
     _cls("M", "return entry.key();", "String key()"),
     _cls("M", "if (entry == null)\n    return null;\nreturn entry.key();", "String key()"), 3, "entry"),
    ("else_branch",
     _cls("N", "if (cache.has(k)) {\n    hit();\n}"),
     _cls("N", "if (cache.has(k)) {\n    hit();\n} else {\n    miss();\n}"), 3, None),
    ("field_to_call",
     "class O {\n    int size() {\n        return list.length;\n    }\n}\n",
     "class O {\n    int size() {\n        return list.size();\n    }\n}\n", 3, None),
    ("add_modifier",
     "class P {\n    int counter;\n    void run() {\n        tick();\n    }\n}\n",
     "class P {\n    private int counter;\n    void run() {\n        tick();\n    }\n}\n", 2, None),
    ("change_modifier",
     "class Q {\n    public void helper() {\n        work();\n    }\n}\n",
     "class Q {\n    private void helper() {\n        work();\n    }\n}\n", 2, None),
    ("add_annotation",
     "class R {\n    public String toString() {\n        return name;\n    }\n}\n",
     "class R {\n    @Override\n    public String toString() {\n        return name;\n    }\n}\n", 2, None),
    ("append_stmt",
     _cls("S", "buffer.write(data);"),
     _cls("S", "buffer.write(data);\nbuffer.flush();"), 3, None),
    ("swap_receiver",
     _cls("T", "a.equals(b);"),
     _cls("T", "b.equals(a);"), 3, None),
    ("guard_field",
     _cls("U", "int w = view.width;\nlayout(w);"),
     _cls("U", "int w = view != null ? view.width : 0;\nlayout(w);"), 3, "view"),
    ("assign_default",
     _cls("V", "label = text;"),
     _cls("V", "label = text == null ? \"\" : text;"), 3, "text"),
    ("nested_guard",
     _cls("W", "if (ok) {\n    mTimer.cancel();\n}"),
     _cls("W", "if (ok) {\n    if (mTimer == null)\n        return;\n    mTimer.cancel();\n}"), 4, "mTimer"),
]


# -- synthetic corpus -------------------------------------------------------

_NOUNS = ["task", "camera", "adapter", "player", "view", "cursor", "socket", "session", "buffer", "timer",
          "client", "parser", "loader", "cache", "handler", "reader", "writer", "queue", "stream", "widget"]
_VERBS = ["start", "stop", "reset", "flush", "close", "open", "load", "save", "update", "refresh",
          "notify", "render", "detach", "attach", "resume", "pause", "clear", "dispose", "sync", "poll"]
_PREDICATES = ["isReady", "isOpen", "isEmpty", "isValid", "hasNext", "isActive", "isDirty", "isVisible"]


def _ident(rng: random.Random, prefix: str = "") -> str:
    word = rng.choice(_NOUNS)
    base = prefix + word[0].upper() + word[1:] if prefix else word
    return f"{base}{rng.randint(1, 99)}"


def _filler(rng: random.Random, used: set) -> str:
    kind = rng.randrange(3)
    name = _ident(rng, "tmp")
    while name in used:
        name = _ident(rng, "tmp")
    used.add(name)
    if kind == 0:
        return f"int {name} = {rng.randint(0, 9)};"
    if kind == 1:
        return f"{rng.choice(_VERBS)}({rng.randint(0, 9)});"
    return f"{name} = {rng.randint(0, 9)};"


def _method_text(cls_name: str, meth: str, lines: list[str]) -> str:
    body = "\n".join("        " + l for l in lines)
    return f"class {cls_name} {{\n    void {meth}() {{\n{body}\n    }}\n}}\n"


SEEDED_KINDS = ("early_return", "conjunct", "ternary")


def synthetic_fix(kind: str, rng: random.Random, index: int) -> tuple:
    """One generated fix ``(name, before, after, line, variable)`` of the given kind."""
    used: set = set()
    var = _ident(rng, "m")
    used.add(var)
    cls_name = f"Gen{index}{rng.choice(_NOUNS).capitalize()}"
    meth = rng.choice(_VERBS) + rng.choice(_NOUNS).capitalize()
    pre = [_filler(rng, used) for _ in range(rng.randint(0, 2))]
    post = [_filler(rng, used) for _ in range(rng.randint(0, 2))]
    call = f"{rng.choice(_VERBS)}{rng.randint(1, 99)}"
    line = 3 + len(pre)
    if kind == "early_return":
        site = [f"{var}.{call}();"]
        fixed = [f"if ({var} == null)", "    return;", f"{var}.{call}();"]
    elif kind == "conjunct":
        pred = rng.choice(_PREDICATES)
        inner = [f"    {rng.choice(_VERBS)}({k});" for k in range(rng.randint(1, 2))]
        site = [f"if ({var}.{pred}()) {{"] + inner + ["}"]
        fixed = [f"if ({var} != null && {var}.{pred}()) {{"] + inner + ["}"]
    elif kind == "ternary":
        local = _ident(rng, "local")
        site = [f"Object {local} = {var}.{call}();", f"use({local});"]
        fixed = [f"Object {local} = {var} != null ? {var}.{call}() : null;", f"use({local});"]
    elif kind == "noise":
        name = _ident(rng, "count")
        old, new = rng.sample(range(10, 99), 2)
        site = [f"int {name} = {old};"]
        fixed = [f"int {name} = {new};"]
        return (f"noise{index:03d}", _method_text(cls_name, meth, pre + site + post),
                _method_text(cls_name, meth, pre + fixed + post), line, None)
    else:
        raise ValueError(f"unknown fix kind {kind!r}")
    return (f"{kind}{index:03d}", _method_text(cls_name, meth, pre + site + post),
            _method_text(cls_name, meth, pre + fixed + post), line, var)


def generate_synthetic(n_fixes: int = 60, noise_ratio: float = 0.1, seed: int = 0) -> list[FixPair]:
    """``n_fixes`` seeded fixes spread over the three seeded kinds plus noise pairs."""
    rng = random.Random(seed)
    pairs = []
    for i in range(n_fixes):
        kind = SEEDED_KINDS[i % len(SEEDED_KINDS)]
        pairs.extend(pairs_from_texts([synthetic_fix(kind, rng, i)], kind))
    for i in range(int(round(n_fixes * noise_ratio))):
        pairs.extend(pairs_from_texts([synthetic_fix("noise", rng, n_fixes + i)], "noise"))
    return pairs


def demo_pairs() -> list[FixPair]:
    return pairs_from_texts(DEMO_PAIRS, "demo")


def nullcheck_pairs() -> list[FixPair]:
    return pairs_from_texts(NULLCHECK_PAIRS, "nullcheck")


def repo_corpus_dir(name: str) -> Optional[FsPath]:
    """Location of a bundled corpus when running from a source checkout."""
    here = FsPath(__file__).resolve().parents[2] / "corpus" / name
    return here if here.is_dir() else None


def seeded_patterns() -> dict:
    """The edit patterns the synthetic generator plants, as hole patterns."""
    from .edits import EditPattern
    from .tree import Hole, Node

    def name_call(recv, meth):
        return Node("Call", "", [("receiver", recv), ("name", meth)])

    def not_null(v, op="!="):
        return Node("BinEx", op, [("left", v), ("right", Node("Literal", "null"))])

    v, m = Hole(0, "Name", True), Hole(1, "Name")
    stmt = Node("ExprStmt", "", [("expr", name_call(v, m))])
    guard = Node("If", "", [("cond", not_null(v, "==")), ("then", Node("Return"))])
    early = EditPattern(Node("Block", "", [("stmt", stmt)]), Node("Block", "", [("stmt", guard), ("stmt", stmt)]))

    body = Hole(2, "Block")
    test = name_call(v, m)
    conj = EditPattern(
        Node("If", "", [("cond", test), ("then", body)]),
        Node("If", "", [("cond", Node("BinEx", "&&", [("left", not_null(v)), ("right", test)])), ("then", body)]),
    )

    local = Hole(3, "Name")
    call = name_call(v, m)
    tern = Node("Ternary", "", [("cond", not_null(v)), ("then", call), ("else", Node("Literal", "null"))])
    ternary = EditPattern(
        Node("VarDecl", "Object", [("name", local), ("init", call)]),
        Node("VarDecl", "Object", [("name", local), ("init", tern)]),
    )
    return {"early_return": early, "conjunct": conj, "ternary": ternary}
