import pytest

from popcert.terms import App, Var, render_term
from popcert.trs import ParseError, parse_trs, parse_term_in, render_trs

from conftest import load, t


def test_halfbits_shape(halfbits):
    r = halfbits
    assert len(r.rules) == 6
    assert r.var_names == ("x",)
    assert r.signature["half"].arity == 1
    assert r.signature["s"].arity == 1
    assert r.signature["0"].arity == 0
    assert r.defined == {"half", "bits"}
    assert r.constructors == {"0", "s"}
    assert r.rule(3).lhs == t(r, "half(s(s(x)))")
    assert r.rule(3).rhs == t(r, "s(half(x))")
    assert r.rule(6).rhs == t(r, "s(bits(s(half(x))))")


def test_rule_indices_are_one_based(halfbits):
    assert [r.index for r in halfbits.rules] == [1, 2, 3, 4, 5, 6]


def test_comments_and_commas():
    r = parse_trs(
        """
        # leading comment
        (VAR x y)  # trailing comment
        (RULES f(x, y) -> g(x), g(x) -> x)
        """
    )
    assert len(r.rules) == 2
    assert r.signature["f"].arity == 2


def test_unknown_sections_skipped():
    r = parse_trs("(VAR x)(RULES f(x) -> x)(COMMENT anything (nested) here)")
    assert len(r.rules) == 1


def test_parse_render_roundtrip(halfbits, exponential, table):
    for r in (halfbits, exponential, table):
        assert parse_trs(render_trs(r)) == r
    # and render is stable on a reparse
    text = render_trs(table)
    assert render_trs(parse_trs(text)) == text


def test_sorts_and_types(table):
    assert table.sorts == ("Nat", "Bool", "Pair", "List")
    assert table.sort_decls["cons"].arg_sorts == ("Pair", "List")
    assert table.sort_decls["cons"].sort == "List"
    assert table.sort_decls["0"].arg_sorts == ()
    assert table.signature["pr"].sort == "Pair"


def test_error_variable_lhs():
    with pytest.raises(ParseError):
        parse_trs("(VAR x)(RULES x -> x)")


def test_error_fresh_rhs_variable():
    with pytest.raises(ParseError):
        parse_trs("(VAR x y)(RULES f(x) -> y)")


def test_error_arity_mismatch_has_position():
    with pytest.raises(ParseError) as e:
        parse_trs("(VAR x)\n(RULES f(x) -> x, f(x, x) -> x)")
    assert "previously" in str(e.value)
    assert str(e.value).startswith("2:")


def test_error_variable_applied():
    with pytest.raises(ParseError):
        parse_trs("(VAR x)(RULES f(x(0)) -> 0)")


def test_error_unbalanced():
    with pytest.raises(ParseError):
        parse_trs("(VAR x)(RULES f(x) -> x")


def test_error_declared_arity_conflicts_with_usage():
    with pytest.raises(ParseError):
        parse_trs("(VAR x)(TYPES f : A A -> A)(RULES f(x) -> x)")


def test_parse_term_in(halfbits):
    u = parse_term_in(halfbits, "bits(s(half(x)))")
    assert isinstance(u, App) and u.sym.name == "bits"
    assert render_term(u, halfbits.var_names) == "bits(s(half(x)))"
    with pytest.raises(ParseError):
        parse_term_in(halfbits, "unknown(x)")
    with pytest.raises(ParseError):
        parse_term_in(halfbits, "half(x) junk")


def test_refined_partition_halfbits(halfbits):
    # arguments of left-hand sides mention only 0 and s
    assert halfbits.gconstructors == {"0", "s"}
    assert halfbits.gdefined == {"half", "bits"}


def test_refined_partition_exponential(exponential):
    # g occurs inside an argument of a left-hand side, so it is demoted
    assert exponential.defined == {"exp", "e", "g", "dup1", "dup2"}
    assert exponential.gdefined == {"exp", "e", "dup1", "dup2"}
    assert exponential.gconstructors == {"g", "s", "pr", "0"}


def test_constructor_trs_flag(halfbits, exponential, table):
    assert halfbits.is_constructor_trs()
    assert table.is_constructor_trs()
    assert not exponential.is_constructor_trs()


def test_left_linear(halfbits, table):
    assert halfbits.is_left_linear()
    assert table.is_left_linear()
    nonlinear = parse_trs("(VAR x)(RULES eq(x, x) -> tt)")
    assert not nonlinear.is_left_linear()
