"""Parser and printer for a small Java-like language (``.mj`` files).

The grammar covers classes, methods, annotations, blocks, if/else, return,
variable declarations, assignments, expression statements, calls with
receiver chains, field access, binary/unary operators, ternaries and
literals.  Every parsed node carries a line span.

The printer is deterministic (4-space indent, one statement per line), so
``parse_source(print_tree(t)) == t`` for every tree it can render.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .tree import SEQUENCE_LABELS, Node, Path, replace_at, resolve

MODIFIERS = frozenset(
    {"public", "private", "protected", "static", "final", "abstract", "synchronized"}
)
KEYWORDS = frozenset({"class", "if", "else", "return", "true", "false", "null"}) | MODIFIERS
LABELS = frozenset(
    {
        "CompilationUnit", "Class", "Method", "Modifier", "Annotation", "Param", "Block",
        "If", "Return", "VarDecl", "Assign", "ExprStmt", "Call", "FieldAccess", "BinEx",
        "UnEx", "Ternary", "Name", "Literal",
    }
)
STATEMENT_LABELS = frozenset({"Block", "If", "Return", "VarDecl", "Assign", "ExprStmt"})

_BINARY_PREC = {
    "||": 2, "&&": 3, "==": 4, "!=": 4, "<": 5, ">": 5, "<=": 5, ">=": 5,
    "+": 6, "-": 6, "*": 7, "/": 7, "%": 7,
}
_TERNARY_PREC = 1
_UNARY_PREC = 8
_POSTFIX_PREC = 9

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|/\*.*?\*/)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>\d+)
  | (?P<ident>[A-Za-z_$][A-Za-z0-9_$]*)
  | (?P<op>==|!=|&&|\|\||<=|>=|[{}()\[\];,.=+\-*/%<>!?:@])
    """,
    re.VERBOSE | re.DOTALL,
)


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


class RenderError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        chunk = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "comment":
            nls = chunk.count("\n")
            if nls:
                line += nls
                line_start = pos + chunk.rfind("\n") + 1
        elif kind != "ws":
            if kind == "ident" and chunk in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, chunk, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def advance(self) -> Token:
        t = self.tok
        self.i += 1
        return t

    def expect(self, text: str) -> Token:
        if not self.at(text):
            t = self.tok
            raise ParseError(f"expected {text!r}, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def ident(self) -> Token:
        t = self.tok
        if t.kind != "ident":
            raise ParseError(f"expected identifier, found {t.text or 'end of input'!r}", t.line, t.col)
        return self.advance()

    def last_line(self) -> int:
        return self.toks[self.i - 1].line

    def error(self, message: str) -> ParseError:
        return ParseError(message, self.tok.line, self.tok.col)

    # -- declarations
    def compilation_unit(self) -> Node:
        classes = []
        while self.tok.kind != "eof":
            classes.append(("class", self.class_decl()))
        end = self.toks[-1].line if self.toks[-1].col > 1 else max(1, self.toks[-1].line - 1)
        start = 1
        if classes:
            end = max(end, classes[-1][1].span[1])
        return Node("CompilationUnit", "", classes, (start, max(start, end)))

    def _prefix(self) -> tuple[list, list, int]:
        start = self.tok.line
        anns, mods = [], []
        while self.at("@"):
            at = self.advance()
            name = self.ident()
            anns.append(("ann", Node("Annotation", name.text, (), (at.line, name.line))))
        while self.tok.kind == "kw" and self.tok.text in MODIFIERS:
            t = self.advance()
            mods.append(("mod", Node("Modifier", t.text, (), (t.line, t.line))))
        return anns, mods, start

    def class_decl(self) -> Node:
        anns, mods, start = self._prefix()
        self.expect("class")
        name = self.ident()
        self.expect("{")
        members = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated class body")
            members.append(("member", self.member()))
        self.expect("}")
        kids = anns + mods + [("name", _name(name))] + members
        return Node("Class", "", kids, (start, self.last_line()))

    def type_name(self) -> str:
        parts = [self.ident().text]
        while self.at(".") and self.peek().kind == "ident":
            self.advance()
            parts.append(self.ident().text)
        text = ".".join(parts)
        while self.at("[") and self.peek().text == "]":
            self.advance()
            self.advance()
            text += "[]"
        return text

    def member(self) -> Node:
        anns, mods, start = self._prefix()
        type_ = self.type_name()
        name = self.ident()
        if self.at("("):
            self.advance()
            params = []
            while not self.at(")"):
                pstart = self.tok.line
                ptype = self.type_name()
                pname = self.ident()
                params.append(("param", Node("Param", ptype, [("name", _name(pname))], (pstart, pname.line))))
                if not self.at(")"):
                    self.expect(",")
            self.expect(")")
            body = self.block()
            kids = anns + mods + [("name", _name(name))] + params + [("body", body)]
            return Node("Method", type_, kids, (start, body.span[1]))
        if anns:
            raise self.error("annotations are only supported on methods and classes")
        return self._var_rest(mods, type_, name, start)

    def _var_rest(self, mods: list, type_: str, name: Token, start: int) -> Node:
        kids = mods + [("name", _name(name))]
        if self.at("="):
            self.advance()
            kids.append(("init", self.expr()))
        self.expect(";")
        return Node("VarDecl", type_, kids, (start, self.last_line()))

    # -- statements
    def block(self) -> Node:
        start = self.expect("{").line
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                raise self.error("unterminated block")
            stmts.append(("stmt", self.statement()))
        end = self.expect("}").line
        return Node("Block", "", stmts, (start, end))

    def _looks_like_decl(self) -> bool:
        if self.tok.kind == "kw" and self.tok.text in MODIFIERS:
            return True
        if self.tok.kind != "ident":
            return False
        j = self.i + 1
        while self.toks[j].text == "." and self.toks[j + 1].kind == "ident":
            j += 2
        while self.toks[j].text == "[" and self.toks[j + 1].text == "]":
            j += 2
        return self.toks[j].kind == "ident"

    def statement(self) -> Node:
        t = self.tok
        if self.at("{"):
            return self.block()
        if self.at("if"):
            self.advance()
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.statement()
            kids = [("cond", cond), ("then", then)]
            end = then.span[1]
            if self.at("else"):
                self.advance()
                other = self.statement()
                kids.append(("else", other))
                end = other.span[1]
            return Node("If", "", kids, (t.line, end))
        if self.at("return"):
            self.advance()
            kids = [] if self.at(";") else [("expr", self.expr())]
            end = self.expect(";").line
            return Node("Return", "", kids, (t.line, end))
        if self._looks_like_decl():
            mods = []
            while self.tok.kind == "kw" and self.tok.text in MODIFIERS:
                m = self.advance()
                mods.append(("mod", Node("Modifier", m.text, (), (m.line, m.line))))
            type_ = self.type_name()
            name = self.ident()
            return self._var_rest(mods, type_, name, t.line)
        e = self.expr()
        if self.at("="):
            if e.label not in ("Name", "FieldAccess"):
                raise self.error("invalid assignment target")
            self.advance()
            rhs = self.expr()
            end = self.expect(";").line
            return Node("Assign", "", [("target", e), ("value", rhs)], (t.line, end))
        end = self.expect(";").line
        return Node("ExprStmt", "", [("expr", e)], (t.line, end))

    # -- expressions
    def expr(self) -> Node:
        cond = self.binary(_TERNARY_PREC + 1)
        if self.at("?"):
            self.advance()
            then = self.expr()
            self.expect(":")
            other = self.expr()
            return Node("Ternary", "", [("cond", cond), ("then", then), ("else", other)],
                        (cond.span[0], other.span[1]))
        return cond

    def binary(self, min_prec: int) -> Node:
        left = self.unary()
        while self.tok.kind == "op" and _BINARY_PREC.get(self.tok.text, 0) >= min_prec:
            op = self.advance().text
            right = self.binary(_BINARY_PREC[op] + 1)
            left = Node("BinEx", op, [("left", left), ("right", right)], (left.span[0], right.span[1]))
        return left

    def unary(self) -> Node:
        if self.at("!") or self.at("-"):
            t = self.advance()
            operand = self.unary()
            return Node("UnEx", t.text, [("operand", operand)], (t.line, operand.span[1]))
        return self.postfix()

    def postfix(self) -> Node:
        e = self.primary()
        while True:
            if self.at("."):
                self.advance()
                name = self.ident()
                if self.at("("):
                    args = self.args()
                    kids = [("receiver", e), ("name", _name(name))] + args
                    e = Node("Call", "", kids, (e.span[0], self.last_line()))
                else:
                    e = Node("FieldAccess", "", [("receiver", e), ("name", _name(name))],
                             (e.span[0], name.line))
            elif self.at("(") and e.label == "Name" and e.value != "this":
                args = self.args()
                e = Node("Call", "", [("name", e)] + args, (e.span[0], self.last_line()))
            else:
                return e

    def args(self) -> list:
        self.expect("(")
        args = []
        while not self.at(")"):
            args.append(("arg", self.expr()))
            if not self.at(")"):
                self.expect(",")
        self.expect(")")
        return args

    def primary(self) -> Node:
        t = self.tok
        if t.kind == "ident":
            self.advance()
            return _name(t)
        if t.kind in ("number", "string") or t.text in ("true", "false", "null"):
            self.advance()
            return Node("Literal", t.text, (), (t.line, t.line))
        if self.at("("):
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        raise ParseError(f"unexpected token {t.text or 'end of input'!r}", t.line, t.col)


def _name(t: Token) -> Node:
    return Node("Name", t.text, (), (t.line, t.line))


def parse_source(text: str) -> Node:
    """Parse a whole ``.mj`` file into a ``CompilationUnit`` tree."""
    return _Parser(text).compilation_unit()


def parse_statement(text: str) -> Node:
    """Parse exactly one statement (handy for snippets such as ``x = y + 2;``)."""
    p = _Parser(text)
    s = p.statement()
    if p.tok.kind != "eof":
        raise p.error("trailing input after statement")
    return s


def parse_expression(text: str) -> Node:
    p = _Parser(text)
    e = p.expr()
    if p.tok.kind != "eof":
        raise p.error("trailing input after expression")
    return e


# -- printing ---------------------------------------------------------------

INDENT = "    "


def _kids(n: Node, loc: str) -> list[Node]:
    return [c for l, c in n.children if l == loc]


def _one(n: Node, loc: str) -> Optional[Node]:
    for l, c in n.children:
        if l == loc:
            return c
    return None


def _need(n: Node, loc: str) -> Node:
    c = _one(n, loc)
    if c is None or not isinstance(c, Node):
        raise RenderError(f"{n.label} is missing its {loc!r} child")
    return c


def _prec(e: Node) -> int:
    if e.label == "BinEx":
        return _BINARY_PREC[e.value]
    if e.label == "Ternary":
        return _TERNARY_PREC
    if e.label == "UnEx":
        return _UNARY_PREC
    return _POSTFIX_PREC


def print_expr(e: Node, min_prec: int = 0) -> str:
    if not isinstance(e, Node):
        raise RenderError("cannot render a hole")
    lab = e.label
    if lab in ("Name", "Literal"):
        s = e.value
    elif lab == "BinEx":
        if e.value not in _BINARY_PREC:
            raise RenderError(f"unknown operator {e.value!r}")
        p = _BINARY_PREC[e.value]
        s = f"{print_expr(_need(e, 'left'), p)} {e.value} {print_expr(_need(e, 'right'), p + 1)}"
    elif lab == "UnEx":
        s = e.value + print_expr(_need(e, "operand"), _UNARY_PREC)
    elif lab == "Ternary":
        s = (f"{print_expr(_need(e, 'cond'), _TERNARY_PREC + 1)} ? "
             f"{print_expr(_need(e, 'then'), _TERNARY_PREC)} : {print_expr(_need(e, 'else'), _TERNARY_PREC)}")
    elif lab == "Call":
        recv = _one(e, "receiver")
        args = ", ".join(print_expr(a) for a in _kids(e, "arg"))
        head = _need(e, "name").value
        if recv is not None:
            head = f"{print_expr(recv, _POSTFIX_PREC)}.{head}"
        s = f"{head}({args})"
    elif lab == "FieldAccess":
        s = f"{print_expr(_need(e, 'receiver'), _POSTFIX_PREC)}.{_need(e, 'name').value}"
    else:
        raise RenderError(f"cannot render {lab!r} as an expression")
    if _prec(e) < min_prec:
        return f"({s})"
    return s


def _indent(lines: list[str]) -> list[str]:
    return [INDENT + l if l else l for l in lines]


def _block_body(b: Node) -> list[str]:
    return _indent([l for s in _kids(b, "stmt") for l in print_lines(s)])


def _if_lines(s: Node) -> list[str]:
    cond = print_expr(_need(s, "cond"))
    then = _need(s, "then")
    other = _one(s, "else")
    if then.label == "Block":
        lines = [f"if ({cond}) {{"] + _block_body(then) + ["}"]
    else:
        lines = [f"if ({cond})"] + _indent(print_lines(then))
    if other is None:
        return lines
    closed = lines[-1] == "}"
    if other.label == "If":
        rest = _if_lines(other)
        head = "else " + rest[0]
    elif other.label == "Block":
        rest = ["{"] + _block_body(other) + ["}"]
        head = "else {"
    else:
        rest = [""] + _indent(print_lines(other))
        head = "else"
    if closed:
        lines[-1] = "} " + head
    else:
        lines.append(head)
    return lines + rest[1:]


def _prefix_text(n: Node) -> str:
    return "".join(m.value + " " for m in _kids(n, "mod"))


def print_lines(s: Node) -> list[str]:
    """Render a statement or declaration as a list of lines (no base indent)."""
    if not isinstance(s, Node):
        raise RenderError("cannot render a hole")
    lab = s.label
    if lab not in LABELS:
        raise RenderError(f"unknown label {lab!r}")
    if lab == "CompilationUnit":
        return [l for c in _kids(s, "class") for l in print_lines(c)]
    if lab == "Class":
        anns = [f"@{a.value}" for a in _kids(s, "ann")]
        head = f"{_prefix_text(s)}class {_need(s, 'name').value} {{"
        body = _indent([l for m in _kids(s, "member") for l in print_lines(m)])
        return anns + [head] + body + ["}"]
    if lab == "Method":
        anns = [f"@{a.value}" for a in _kids(s, "ann")]
        params = ", ".join(f"{p.value} {_need(p, 'name').value}" for p in _kids(s, "param"))
        head = f"{_prefix_text(s)}{s.value} {_need(s, 'name').value}({params}) {{"
        return anns + [head] + _block_body(_need(s, "body")) + ["}"]
    if lab == "Block":
        return ["{"] + _block_body(s) + ["}"]
    if lab == "If":
        return _if_lines(s)
    if lab == "Return":
        e = _one(s, "expr")
        return ["return;" if e is None else f"return {print_expr(e)};"]
    if lab == "VarDecl":
        init = _one(s, "init")
        text = f"{_prefix_text(s)}{s.value} {_need(s, 'name').value}"
        return [text + (";" if init is None else f" = {print_expr(init)};")]
    if lab == "Assign":
        return [f"{print_expr(_need(s, 'target'))} = {print_expr(_need(s, 'value'))};"]
    if lab == "ExprStmt":
        return [print_expr(_need(s, "expr")) + ";"]
    if lab in ("Modifier", "Annotation", "Param"):
        raise RenderError(f"{lab} cannot be rendered on its own")
    return [print_expr(s)]


def print_tree(t: Node) -> str:
    """Render a tree.  Whole files end with a newline; an empty unit is ``""``."""
    lines = print_lines(t)
    if t.label == "CompilationUnit":
        return "\n".join(lines) + "\n" if lines else ""
    return "\n".join(lines)


# -- source files and splicing ----------------------------------------------


@dataclass
class SourceFile:
    path: str
    text: str
    tree: Node = field(repr=False)

    @classmethod
    def from_text(cls, text: str, path: str = "<memory>") -> "SourceFile":
        return cls(path, text, parse_source(text))

    @classmethod
    def load(cls, path) -> "SourceFile":
        with open(path, encoding="utf-8") as fh:
            return cls.from_text(fh.read(), str(path))


@dataclass(frozen=True)
class SpliceRegion:
    """Lines ``[start, start + old_count)`` of the input became ``new_count`` lines."""

    start: int
    old_count: int
    new_count: int


def _leading_ws(line: str) -> str:
    return line[: len(line) - len(line.lstrip(" \t"))]


def splice_region(file: SourceFile, site: Sequence[int], replacement: Node) -> tuple[str, SpliceRegion]:
    """Like :func:`splice_patch` but also report which lines were rewritten."""
    site = tuple(site)
    old_tree = file.tree
    resolve(old_tree, site)
    if not site:
        text = print_tree(replacement)
        return text, SpliceRegion(1, len(file.text.splitlines()), len(text.splitlines()))
    new_tree = replace_at(old_tree, site, replacement)
    # deepest sequence ancestor-or-self of the site that survives the replacement
    seq_path: Path = ()
    for k in range(len(site), -1, -1):
        p = site[:k]
        old, new = resolve(old_tree, p), resolve(new_tree, p)
        if old.label in SEQUENCE_LABELS and isinstance(new, Node) and new.label == old.label:
            seq_path = p
            break
    old_seq, new_seq = resolve(old_tree, seq_path), resolve(new_tree, seq_path)
    old_kids, new_kids = old_seq.kids, new_seq.kids
    n, m = len(old_kids), len(new_kids)
    k = 0
    while k < min(n, m) and old_kids[k] == new_kids[k]:
        k += 1
    s = 0
    while s < min(n, m) - k and old_kids[n - 1 - s] == new_kids[m - 1 - s]:
        s += 1
    old_mid, new_mid = old_kids[k : n - s], new_kids[k : m - s]

    lines = file.text.split("\n")
    for node in old_kids:
        if node.span is None:
            raise RenderError("splice site lacks a span")
    if old_mid:
        start, end = old_mid[0].span[0], old_mid[-1].span[1]
        indent = _leading_ws(lines[start - 1])
    elif k < n:
        start = end = old_kids[k].span[0]
        end = start - 1
        indent = _leading_ws(lines[start - 1])
    elif n:
        start = old_kids[-1].span[1] + 1
        end = start - 1
        indent = _leading_ws(lines[old_kids[-1].span[0] - 1])
    elif old_seq.label == "Block" and old_seq.span and old_seq.span[1] > old_seq.span[0]:
        start = old_seq.span[0] + 1
        end = start - 1
        indent = _leading_ws(lines[old_seq.span[0] - 1]) + INDENT
    elif old_seq.label == "CompilationUnit":
        body = file.text.rstrip("\n")
        text = (body + "\n" if body else "") + print_tree(new_seq)[len(print_tree(old_seq)):]
        return text, SpliceRegion(len(body.splitlines()) + 1, 0, len(text.splitlines()) - len(body.splitlines()))
    else:
        raise RenderError("cannot splice into a single-line block")
    new_lines = [indent + l if l else l for c in new_mid for l in print_lines(c)]
    out = lines[: start - 1] + new_lines + lines[end:]
    return "\n".join(out), SpliceRegion(start, end - start + 1, len(new_lines))


def splice_patch(file: SourceFile, site: Sequence[int], replacement: Node) -> str:
    """Replace the subtree at ``site`` and return the new file text.

    Only the lines of the statements that actually change are rewritten;
    inserted lines take the indentation of the statement they replace or
    precede.
    """
    return splice_region(file, site, replacement)[0]


def normalize(text: str) -> list[str]:
    """Lines with empty lines dropped; whitespace otherwise kept exactly."""
    return [l for l in text.split("\n") if l.strip()]
