"""Sequence orders, predicative interpretations, and the embedding harness."""

import random

import pytest

from popcert.dp import mark_root, tpwidp, usable_rules
from popcert.orders import (
    ArgumentFiltering,
    OrderParams,
    Precedence,
    SafeMapping,
    apply_filtering,
)
from popcert.popseq import (
    BOTTOM,
    BULLET,
    EMPTY,
    Interpretation,
    SeqOrder,
    check_embedding,
    default_k,
    erasure_steps,
    gpop_seq,
    gpp_seq,
    is_seq,
    nf_v,
    pred_N,
    pred_Q,
    pred_S,
    seq,
    value_steps,
)
from popcert.terms import App, Symbol, Var, app, bnorm, render_term, width
from popcert.trs import TRS, Rule

from conftest import halfbits_params, t

A = app(Symbol("a", 0))
F = Symbol("f", 1)
G = Symbol("g", 2)
SMALL_PREC = Precedence({"f": 2, "g": 1, "a": 0})


# ---------------------------------------------------------------------------
# The orders on sequences


def test_projection_out_of_applications():
    assert gpp_seq(app(F, A), A, 2, prec=SMALL_PREC)
    assert gpop_seq(app(F, A), A, 2, prec=SMALL_PREC)
    # and out of sequences
    assert gpop_seq(seq(A, BULLET), A, 1, prec=SMALL_PREC)


def test_empty_sequence_is_minimal():
    assert not gpop_seq(EMPTY, EMPTY, 3)
    assert not gpp_seq(EMPTY, BULLET, 3)
    assert gpop_seq(seq(BULLET), EMPTY, 1)
    assert gpp_seq(BULLET, EMPTY, 1)  # via the empty width check


def test_bullet_below_every_proper_symbol():
    assert gpp_seq(app(F, A), BULLET, 1, prec=SMALL_PREC)
    assert gpp_seq(A, BULLET, 1, prec=SMALL_PREC)
    assert not gpp_seq(BULLET, A, 5, prec=SMALL_PREC)
    assert not gpp_seq(BULLET, BOTTOM, 5)
    assert not gpp_seq(BOTTOM, BULLET, 5)


def test_width_allowance_gates_fanout():
    s = app(F, A)
    assert width(s) == 1
    assert not gpp_seq(s, seq(A, A), 1, prec=SMALL_PREC)  # 2 < 1+1 fails
    assert gpp_seq(s, seq(A, A), 2, prec=SMALL_PREC)
    # a sequence may not grow k-or-more entries wider
    assert not gpop_seq(seq(BULLET), seq(BULLET, BULLET), 1)
    assert gpop_seq(seq(BULLET, BULLET), seq(BULLET), 1)


def test_depth_budget_decrements_under_roots():
    s = app(F, A)
    # placing copies of s's argument below a sequence costs one level
    assert not gpp_seq(s, seq(A, A), 2, l=1, prec=SMALL_PREC)
    assert gpp_seq(s, seq(A, A), 2, l=2, prec=SMALL_PREC)
    # the budget floor empties the relation
    assert not gpp_seq(s, A, 2, l=0, prec=SMALL_PREC)


def test_bullet_runs_compare_by_count():
    assert gpop_seq(seq(EMPTY, BULLET, BULLET), seq(EMPTY, BULLET), 1)
    assert not gpop_seq(seq(EMPTY, BULLET), seq(EMPTY, BULLET), 4)
    assert not gpop_seq(seq(EMPTY, BULLET), seq(EMPTY, BULLET, BULLET), 4)


def test_strict_order_includes_auxiliary_order():
    order = SeqOrder(SMALL_PREC, 3)
    rnd = random.Random(771)
    hits = 0
    for _ in range(300):
        s = _rand_seq_term(rnd, 3)
        u = _rand_seq_term(rnd, 3)
        if order.gpp(s, u, 3):
            hits += 1
            assert order.gpop(s, u, 3)
    assert hits > 10


def _rand_seq_term(rnd, depth):
    r = rnd.random()
    if depth <= 0 or r < 0.3:
        return rnd.choice([EMPTY, BULLET, A])
    if r < 0.6:
        return seq(*(_rand_seq_term(rnd, depth - 1) for _ in range(rnd.randrange(0, 3))))
    if r < 0.8:
        return app(F, _rand_seq_term(rnd, depth - 1))
    return app(G, _rand_seq_term(rnd, depth - 1), _rand_seq_term(rnd, depth - 1))


def test_monotone_in_both_budgets_and_width_bounded():
    rnd = random.Random(20260818)
    k = 2
    small = SeqOrder(SMALL_PREC, k)
    wider = SeqOrder(SMALL_PREC, k + 1)
    hits = 0
    for _ in range(400):
        s = _rand_seq_term(rnd, 3)
        u = _rand_seq_term(rnd, 3)
        assert not small.gpop(s, s)
        if small.gpop(s, u, k):
            hits += 1
            assert small.gpop(s, u, k + 1)
            assert wider.gpop(s, u, k)
            assert width(u) < width(s) + k
    assert hits > 30


def _shuffled(rnd, u):
    if isinstance(u, App) and u.args:
        args = [_shuffled(rnd, a) for a in u.args]
        rnd.shuffle(args)
        return App(u.sym, tuple(args))
    return u


def test_orders_respect_argument_permutation():
    rnd = random.Random(4242)
    order = SeqOrder(SMALL_PREC, 2)
    hits = 0
    for _ in range(300):
        s = _rand_seq_term(rnd, 3)
        u = _rand_seq_term(rnd, 3)
        s2, u2 = _shuffled(rnd, s), _shuffled(rnd, u)
        assert order.equiv(s, s2) and order.equiv(u, u2)
        if order.gpop(s, u, 2):
            hits += 1
            assert order.gpop(s2, u2, 2)
    assert hits > 20


def test_sequences_render_flat():
    assert render_term(seq(BULLET, EMPTY)) == "[@ []]"
    assert render_term(BOTTOM) == "_bot"
    assert is_seq(EMPTY) and not is_seq(BULLET)


# ---------------------------------------------------------------------------
# Predicative interpretations


def test_values_interpret_to_the_empty_sequence(halfbits):
    ex5 = halfbits_params()
    assert pred_S(t(halfbits, "s(s(0))"), ex5) == EMPTY
    # collapsing the half argument turns this into a value as well
    assert pred_S(t(halfbits, "half(s(0))"), ex5) == EMPTY


def test_norm_component_counts_bullets(halfbits):
    ex5 = halfbits_params()
    assert pred_N(t(halfbits, "s(0)"), ex5) == seq(EMPTY, BULLET, BULLET)
    assert pred_N(t(halfbits, "0"), ex5) == seq(EMPTY, BULLET)


def test_guarded_call_keeps_normalized_head(halfbits):
    params = OrderParams(
        Precedence({"half": 1, "s": 0, "0": 0}),
        SafeMapping({"half": ()}),
        ArgumentFiltering({}),
        frozenset({"half"}),
    )
    u = t(halfbits, "half(s(0))")
    got = pred_S(u, params)
    half = halfbits.signature["half"]
    assert got == seq(app(half, seq(EMPTY, BULLET, BULLET)))
    assert pred_N(u, params) == seq(got, BULLET, BULLET, BULLET)


def test_safe_arguments_ride_along_as_components(halfbits):
    params = OrderParams(
        Precedence({"half": 1, "s": 0, "0": 0}),
        SafeMapping({"half": (1,)}),
        ArgumentFiltering({}),
        frozenset({"half"}),
    )
    got = pred_S(t(halfbits, "half(s(0))"), params)
    assert is_seq(got) and len(got.args) == 2
    head, safe_part = got.args
    assert isinstance(head, App) and head.sym.name == "half" and head.sym.arity == 0
    assert safe_part == EMPTY  # s(0) is a value


def test_norm_width_matches_filtered_size(halfbits):
    ex5 = halfbits_params()
    for text in ("0", "s(s(s(0)))", "half(s(s(0)))", "bits(s(0))",
                 "bits(half(s(s(s(0)))))", "s(bits(s(half(0))))"):
        u = t(halfbits, text)
        assert width(pred_N(u, ex5)) == bnorm(apply_filtering(ex5.filtering, u)) + 1


def test_extended_interpretation_splits_compounds(halfbits):
    ex5 = halfbits_params()
    zero = t(halfbits, "0")
    one = t(halfbits, "s(0)")
    c0 = app(Symbol("c7", 0, kind="compound"))
    c2 = app(Symbol("c8", 2, kind="compound"), zero, one)
    assert pred_Q(c0, ex5) == EMPTY
    assert pred_Q(c2, ex5) == seq(seq(pred_N(zero, ex5)), seq(pred_N(one, ex5)))
    # non-compound roots wrap as a singleton
    marked = mark_root(t(halfbits, "bits(s(0))"))
    assert pred_Q(marked, ex5) == seq(pred_N(marked, ex5))
    # nesting recurses through compound layers
    nested = app(Symbol("c9", 1, kind="compound"), c2)
    assert pred_Q(nested, ex5) == seq(pred_Q(c2, ex5))


def test_interpretation_object_reuses_adapted_mapping(halfbits):
    ex5 = halfbits_params()
    it = Interpretation(ex5)
    u = t(halfbits, "bits(s(s(0)))")
    assert it.pred_s(u) == pred_S(u, ex5)
    head = it.pred_s(u).args[0]
    assert isinstance(head, App) and head.sym.name == "bits"


# ---------------------------------------------------------------------------
# Normal-form erasure and value-restricted steps


def _toy():
    zero = Symbol("0", 0)
    s = Symbol("s", 1)
    f = Symbol("f", 1, kind="defined")
    x = Var(0)
    rule = Rule(app(f, app(s, x)), app(f, x), 1)
    return TRS((rule,), {"0": zero, "s": s, "f": f}), f, s, zero


def _num(s, zero, n):
    u = app(zero)
    for _ in range(n):
        u = app(s, u)
    return u


def test_erasure_normal_form():
    toy, f, s, zero = _toy()
    value = _num(s, zero, 2)
    assert nf_v(toy, value) == value
    redex = app(f, _num(s, zero, 1))
    assert nf_v(toy, redex) == redex
    assert nf_v(toy, app(f, app(zero))) == BOTTOM
    # maximal stuck subterm wins, even when nested
    assert nf_v(toy, app(f, app(f, app(zero)))) == BOTTOM
    assert nf_v(toy, app(s, app(f, app(zero)))) == app(s, BOTTOM)
    open_term = app(f, Var(3))
    assert nf_v(toy, open_term) == open_term


def test_value_steps_respect_argument_restriction():
    toy, f, s, zero = _toy()
    assert value_steps(toy, toy.rules, app(f, _num(s, zero, 1))) == [app(f, app(zero))]
    # an unevaluated defined argument blocks the outer redex
    blocked = app(f, app(s, app(f, app(zero))))
    assert value_steps(toy, toy.rules, blocked) == []
    # the erasure constant counts as value material
    assert value_steps(toy, toy.rules, app(f, app(s, BOTTOM))) == [app(f, BOTTOM)]


def test_erasure_steps_replace_stuck_calls():
    toy, f, s, zero = _toy()
    assert erasure_steps(toy, app(s, app(f, app(zero)))) == [app(s, BOTTOM)]
    assert erasure_steps(toy, app(f, _num(s, zero, 1))) == []
    # terms already touched by erasure stay put
    assert erasure_steps(toy, app(f, BOTTOM)) == []


# ---------------------------------------------------------------------------
# The embedding harness


def _direct_params():
    return OrderParams(
        Precedence({"f": 1, "s": 0, "0": 0}),
        SafeMapping({"f": ()}),
        ArgumentFiltering({}),
        frozenset({"f"}),
    )


def test_embedding_direct_mode_counts_the_chain():
    toy, f, s, zero = _toy()
    rep = check_embedding(toy.rules, [], _direct_params(), app(f, _num(s, zero, 3)))
    assert rep.ok
    assert rep.strict_steps == 3 and rep.max_chain == 3
    assert rep.weak_steps == 1  # the final stuck call erases
    assert rep.terms_explored == 5
    assert rep.k == 6


def test_embedding_normalizes_the_start_term():
    toy, f, s, zero = _toy()
    start = app(f, app(s, app(f, app(zero))))
    rep = check_embedding(toy.rules, [], _direct_params(), start)
    assert rep.ok
    # start collapses to f(s(_bot)); one strict step to f(_bot) remains
    assert rep.terms_explored == 2
    assert rep.strict_steps == 1 and rep.max_chain == 1
    assert rep.weak_steps == 0


def test_embedding_trivial_on_value_start(halfbits):
    ex5 = halfbits_params()
    pairs = tpwidp(halfbits)
    rep = check_embedding([p.as_rule() for p in pairs],
                          usable_rules(pairs, halfbits),
                          ex5, t(halfbits, "s(s(0))"))
    assert rep.ok
    assert rep.terms_explored == 1
    assert rep.strict_steps == 0 and rep.weak_steps == 0 and rep.max_chain == 0


def test_embedding_halfbits_pairs_descend(halfbits):
    ex5 = halfbits_params()
    pairs = tpwidp(halfbits)
    usables = usable_rules(pairs, halfbits)
    assert tuple(r.index for r in usables) == (1, 2, 3)
    start = mark_root(t(halfbits, "bits(s(s(s(s(s(s(0)))))))"))
    rep = check_embedding([p.as_rule() for p in pairs], usables, ex5, start)
    assert rep.ok
    assert rep.k == default_k([p.as_rule() for p in pairs] + list(usables), ex5.filtering) == 12
    assert rep.strict_steps >= 3
    assert rep.max_chain == 3  # two halvings and the final base pair
    assert rep.weak_steps >= 3


def test_embedding_rejects_collapsed_rules_as_strict(halfbits):
    # half steps vanish under the filtering, so demanding strict descent
    # for them must be refuted by some witnessed step
    ex5 = halfbits_params()
    pairs = tpwidp(halfbits)
    start = mark_root(t(halfbits, "bits(s(s(s(s(s(s(0)))))))"))
    rep = check_embedding(halfbits.rules[:3], [p.as_rule() for p in pairs],
                          ex5, start, root_only=False)
    assert not rep.ok
    kind, u, v = rep.violation
    assert kind == "strict"
    it = Interpretation(ex5)
    order = SeqOrder(ex5.prec, rep.k)
    assert not order.gpop(it.pred_q(u), it.pred_q(v))


def test_embedding_fuel_guard():
    toy, f, s, zero = _toy()
    from popcert.rewriting import FuelExhausted

    with pytest.raises(FuelExhausted):
        check_embedding(toy.rules, [], _direct_params(),
                        app(f, _num(s, zero, 40)), fuel=10)
