import pytest
from hypothesis import given

from fixmine.minijava import (ParseError, SourceFile, normalize, parse_expression, parse_source, parse_statement,
                              print_expr, print_tree, splice_region, tokenize)
from fixmine.tree import Node, to_term
from strategies import expressions, programs


def test_statement_shapes():
    assert to_term(parse_statement("x.run(a, 1);")) == "ExprStmt(Call(Name:x, Name:run, Name:a, Literal:1))"
    assert to_term(parse_statement("return;")) == "Return"
    assert to_term(parse_statement("int n = 0;")) == "VarDecl:int(Name:n, Literal:0)"


def test_precedence():
    e = parse_expression("a + b * c == d && !e")
    assert to_term(e) == "BinEx:&&(BinEx:==(BinEx:+(Name:a, BinEx:*(Name:b, Name:c)), Name:d), UnEx:!(Name:e))"
    assert print_expr(parse_expression("(a + b) * c")) == "(a + b) * c"
    assert print_expr(parse_expression("a - (b - c)")) == "a - (b - c)"
    assert print_expr(parse_expression("a - b - c")) == "a - b - c"


def test_spans_are_line_ranges():
    t = parse_source("class A {\n  void m() {\n    x.f();\n    if (c) {\n      y();\n    }\n  }\n}\n")
    body = t.kids[0].kids[-1].kids[-1]
    assert body.label == "Block"
    assert [s.span for s in body.kids] == [(3, 3), (4, 6)]


@pytest.mark.parametrize("src,line", [("class A {\n void m() {\n x = ;\n }\n}", 3),
                                      ("class {", 1),
                                      ("class A { void m() { x.f() } }", 1),
                                      ("class A { void m() { @ } }", 1)])
def test_parse_errors_have_positions(src, line):
    with pytest.raises(ParseError) as info:
        parse_source(src)
    assert info.value.line == line


def test_tokenize_skips_comments():
    toks = [t.text for t in tokenize("a // note\n/* block */ b")]
    assert toks[:2] == ["a", "b"]


def test_else_if_chain_round_trips():
    src = "class A {\n    void m() {\n        if (a)\n            x();\n        else if (b)\n            y();\n        else\n            z();\n    }\n}\n"
    assert print_tree(parse_source(src)) == src


def test_normalize_drops_empty_lines_only():
    assert normalize("a\n\n  b\n") == ["a", "  b"]
    assert normalize("a\n b") != normalize("a\nb")


def test_splice_keeps_surrounding_text():
    text = "class A {\n    void m() {\n        x.f(); // keep me\n        y.g();\n    }\n}\n"
    f = SourceFile.from_text(text)
    block = f.tree.kids[0].kids[-1].kids[-1]
    new_block = Node("Block", "", list(block.children) + [("stmt", parse_statement("z.h();"))])
    out, region = splice_region(f, (0, 1, 1), new_block)
    assert "// keep me" in out
    assert out.splitlines()[4] == "        z.h();"
    assert (region.start, region.old_count, region.new_count) == (5, 0, 1)


@given(programs())
def test_print_parse_fixpoint(src):
    t = parse_source(src)
    printed = print_tree(t)
    assert parse_source(printed) == t
    assert print_tree(parse_source(printed)) == printed


@given(expressions(3))
def test_expression_round_trip(src):
    e = parse_expression(src)
    assert parse_expression(print_expr(e)) == e
