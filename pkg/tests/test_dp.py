import pytest

from popcert.dp import (
    CongruencePath,
    congruence_paths,
    estimate_graph,
    is_cyclic_class,
    is_non_duplicating,
    mark_root,
    pair_signature,
    sccs,
    to_dot,
    tp_sort_decls,
    tpwidp,
    union_system,
    usable_rules,
    widp,
)
from popcert.rewriting import derivation_length, enumerate_values, innermost_step
from popcert.terms import App, apply_subst, ground_instances, match, render_term, variables
from popcert.trs import parse_trs

from conftest import load, t


def rt(trs, pair):
    lhs = render_term(pair.lhs, trs.var_names)
    rhs = render_term(pair.rhs, trs.var_names)
    return f"{lhs} -> {rhs}"


def test_widp_halfbits(halfbits):
    pairs = widp(halfbits)
    assert len(pairs) == 6
    assert [p.index for p in pairs] == [7, 8, 9, 10, 11, 12]
    assert [p.origin for p in pairs] == [1, 2, 3, 4, 5, 6]
    assert [rt(halfbits, p) for p in pairs] == [
        "half#(0) -> c1",
        "half#(s(0)) -> c2",
        "half#(s(s(x))) -> half#(x)",
        "bits#(0) -> c3",
        "bits#(s(0)) -> c4",
        "bits#(s(s(x))) -> bits#(s(half(x)))",
    ]
    # identity grouping for single parts, fresh nullary heads otherwise
    assert pairs[2].compound is None and pairs[5].compound is None
    assert pairs[0].compound.arity == 0
    assert all(p.lhs.sym.kind == "marked" for p in pairs)


def test_widp_marks_constructor_side_roots(exponential):
    # g is constructor-side in the refined split but still heads a rule
    pairs = widp(exponential)
    assert [rt(exponential, p) for p in pairs] == [
        "exp#(x) -> e#(g(x))",
        "e#(g(s(x))) -> dup1#(g(x))",
        "g#(0) -> c1",
        "dup1#(x) -> dup2#(e(x),x)",
        "dup2#(x,y) -> e#(y)",
    ]


def test_widp_variable_rhs():
    trs = parse_trs("(VAR x)(RULES f(x) -> x)")
    (p,) = widp(trs)
    assert rt(trs, p) == "f#(x) -> x"
    assert p.compound is None


def test_widp_table(table):
    pairs = widp(table)
    assert [rt(table, p) for p in pairs] == [
        "f#(s(x)) -> c1(g#(x),f#(x))",
        "f#(0) -> c2",
        "g#(s(x)) -> g#(x)",
        "g#(0) -> c3",
    ]


def test_tpwidp_every_pair_compound(halfbits):
    pairs = tpwidp(halfbits)
    assert [rt(halfbits, p) for p in pairs] == [
        "half#(0) -> c1",
        "half#(s(0)) -> c2",
        "half#(s(s(x))) -> c3(half#(x))",
        "bits#(0) -> c4",
        "bits#(s(0)) -> c5",
        "bits#(s(s(x))) -> c6(bits#(s(half(x))))",
    ]
    # contexts keep what the grouping removed
    assert render_term(pairs[2].represented_context) == "s(_)"
    assert render_term(pairs[5].represented_context) == "s(_)"
    assert render_term(pairs[1].represented_context) == "0"


def test_tpwidp_sort_propagation(table):
    pairs = tpwidp(table)
    assert render_term(pairs[0].represented_context, table.var_names) == "cons(pr(x,_),_)"
    decls = tp_sort_decls(table, pairs)
    assert decls["f#"].sort == "List" and decls["f#"].arg_sorts == ("Nat",)
    assert decls["c1"].arg_sorts == ("Bool", "List")
    assert decls["c1"].sort == "List"
    assert decls["c2"] == decls["c2"].__class__((), "List")
    assert decls["c3"].arg_sorts == ("Bool",)
    assert decls["c4"].sort == "Bool"


def test_pair_count_matches_rule_count():
    for name in ("halfbits", "exponential", "table", "division", "reverse"):
        trs = load(name)
        assert len(widp(trs)) == len(trs.rules)
        assert len(tpwidp(trs)) == len(trs.rules)
        for p in widp(trs):
            assert p.lhs == mark_root(trs.rule(p.origin).lhs)


def test_usable_rules_halfbits(halfbits):
    pairs = widp(halfbits)
    usable = usable_rules(pairs, halfbits)
    assert [r.index for r in usable] == [1, 2, 3]


def test_usable_rules_closure():
    trs = parse_trs("(VAR x)(RULES f(s(x)) -> g(f(x)), g(x) -> h(x), h(x) -> 0)")
    pairs = widp(trs)
    assert [r.index for r in usable_rules(pairs, trs)] == [1, 2, 3]


def test_usable_rules_empty(table):
    # every defined occurrence in the pair rhs's is marked, so nothing is usable
    assert usable_rules(widp(table), table) == ()


def test_usable_rules_monotone(halfbits):
    pairs = widp(halfbits)
    small = set(usable_rules(pairs[:3], halfbits))
    assert small <= set(usable_rules(pairs, halfbits))


def test_graph_halfbits(halfbits):
    pairs = widp(halfbits)
    g = estimate_graph(pairs, halfbits)
    assert g.edges == {(9, 9), (9, 7), (9, 8), (12, 12), (12, 11)}


def test_graph_nullary_compounds_have_no_successors(halfbits):
    g = estimate_graph(widp(halfbits), halfbits)
    for i in (7, 8, 10, 11):
        assert g.successors(i) == []


def test_graph_cap_abstracts_usable_calls():
    trs = parse_trs("(VAR x)(RULES f(x) -> f(g(x)), g(0) -> 0)")
    pairs = widp(trs)
    g = estimate_graph(pairs, trs)
    loop = pairs[0].index
    assert (loop, loop) in g.edges


def test_graph_estimation_sound_on_bounded_chains(halfbits):
    pairs = widp(halfbits)
    g = estimate_graph(pairs, halfbits)
    values, _ = enumerate_values(halfbits, 5)
    fillers = [v for group in values for v in group]
    for p in pairs:
        reached = set()
        for comp in p.components():
            if not isinstance(comp, App):
                continue
            for sigma in ground_instances(variables(comp), fillers):
                frontier = {apply_subst(comp, sigma)}
                seen = set(frontier)
                for _ in range(8):
                    nxt = set()
                    for u in frontier:
                        for q in pairs:
                            if match(q.lhs, u) is not None:
                                reached.add(q.index)
                        nxt.update(w for v in (innermost_step(halfbits, u),)
                                   for w in v if w not in seen)
                    seen |= nxt
                    frontier = nxt
        for qi in reached:
            assert (p.index, qi) in g.edges


def test_sccs_halfbits(halfbits):
    g = estimate_graph(widp(halfbits), halfbits)
    classes = sccs(g)
    assert classes == [(7,), (8,), (9,), (10,), (11,), (12,)]
    assert [c for c in classes if is_cyclic_class(g, c)] == [(9,), (12,)]


def test_sccs_cycle_collapse():
    trs = parse_trs("(VAR x y)(RULES f(s(x)) -> g(x), g(x) -> f(s(x)))")
    g = estimate_graph(widp(trs), trs)
    assert sccs(g) == [(3, 4)]


def test_congruence_paths_halfbits(halfbits):
    g = estimate_graph(widp(halfbits), halfbits)
    paths = congruence_paths(g)
    assert [p.nodes for p in paths] == [
        ((9,),),
        ((9,), (7,)),
        ((9,), (8,)),
        ((10,),),
        ((12,),),
        ((12,), (11,)),
    ]
    assert paths[1].strict_part == (7,)
    assert paths[1].weak_part == (9,)
    assert paths[0].weak_part == ()


def test_congruence_paths_table(table):
    g = estimate_graph(widp(table), table)
    paths = congruence_paths(g)
    strict_parts = {p.strict_part for p in paths}
    # every class shows up as a strict part at least once
    assert strict_parts == {(5,), (6,), (7,), (8,)}
    assert ((5,), (7,), (8,)) in {p.nodes for p in paths}


def test_every_class_is_some_strict_part():
    for name in ("halfbits", "exponential", "table", "division"):
        trs = load(name)
        g = estimate_graph(widp(trs), trs)
        covered = set()
        for p in congruence_paths(g):
            covered.add(p.strict_part)
        assert covered == set(sccs(g))


def test_non_duplication(halfbits, exponential):
    assert is_non_duplicating(widp(halfbits))
    # the duplicating cascade survives into its pairs
    assert not is_non_duplicating(widp(exponential))


def test_dot_export(halfbits):
    g = estimate_graph(widp(halfbits), halfbits)
    dot = to_dot(g)
    assert "p9 -> p7;" in dot
    assert dot.startswith("digraph")


def test_tpwidp_preserves_derivation_lengths(halfbits):
    plain = widp(halfbits)
    typed = tpwidp(halfbits)
    u_plain = union_system(halfbits, plain, usable_rules(plain, halfbits))
    u_typed = union_system(halfbits, typed, usable_rules(typed, halfbits))
    values, _ = enumerate_values(halfbits, 6)
    for group in values[1:]:
        for v in group:
            for fname in ("half", "bits"):
                start = mark_root(App(halfbits.signature[fname], (v,)))
                assert derivation_length(u_plain, start) == derivation_length(u_typed, start)


def test_pair_signature(halfbits):
    sig = pair_signature(halfbits, widp(halfbits))
    assert "half#" in sig and "c1" in sig and "half" in sig
    assert sig["half#"].kind == "marked"
    assert sig["c1"].kind == "compound"
