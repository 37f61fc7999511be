"""Strongly linear interpretations: evaluation, compatibility, synthesis."""

import random

import pytest

from popcert.sli import SLIWeights, check_compat, interpret, symbol_counts, synthesize
from popcert.terms import Symbol, Var, app, variables
from popcert.trs import Rule

from conftest import t

EX6 = SLIWeights({"0": 0, "s": 1, "half": 1})


def test_interpret_evaluates_sums(halfbits):
    assert interpret(EX6, t(halfbits, "half(s(s(x)))"), {0: 0}) == 3
    assert interpret(EX6, t(halfbits, "x"), {0: 5}) == 5
    assert interpret(EX6, t(halfbits, "0"), {}) == 0
    assert interpret(EX6, t(halfbits, "half(s(s(x)))"), {0: 7}) == 10


def test_interpret_requires_weights(halfbits):
    with pytest.raises(KeyError):
        interpret(EX6, t(halfbits, "bits(0)"), {})


def test_negative_weight_rejected():
    with pytest.raises(ValueError):
        SLIWeights({"f": -1})


def test_compat_on_half_rules(halfbits):
    assert check_compat(EX6, halfbits.rules[:3])
    # weight sum ties are not strict decreases
    flat = SLIWeights({"0": 0, "s": 0, "half": 0})
    assert not check_compat(flat, halfbits.rules[:3])


def test_compat_rejects_duplication():
    f = Symbol("f", 1)
    c = Symbol("c", 2)
    x = Var(0)
    dup = Rule(app(f, x), app(c, x, x), 1)
    assert not check_compat(SLIWeights({}), [dup])
    assert synthesize([dup]) is None


def test_compat_empty_rules():
    assert check_compat(SLIWeights({}), [])


def test_compat_antitone_under_rule_addition(halfbits):
    full = SLIWeights({"0": 0, "s": 1, "half": 1, "bits": 0})
    rules = list(halfbits.rules)
    rnd = random.Random(99)
    for _ in range(40):
        k = rnd.randrange(len(rules))
        subset = rnd.sample(rules, k)
        extra = rnd.sample(rules, rnd.randrange(len(rules) - k) + 1 if len(rules) > k else 1)
        small = check_compat(full, subset)
        if not small:
            assert not check_compat(full, subset + extra)
        if check_compat(full, subset + extra):
            assert small


def test_synthesize_half_rules(halfbits):
    got = synthesize(halfbits.rules[:3])
    assert got is not None
    assert check_compat(got, halfbits.rules[:3])
    # smallest-first search lands exactly on the textbook weights
    assert got.weight == {"0": 0, "half": 1, "s": 1}


def test_synthesize_self_loop_absent():
    f = Symbol("f", 1)
    x = Var(0)
    assert synthesize([Rule(app(f, x), app(f, x), 1)]) is None


def test_synthesize_projection():
    f = Symbol("f", 1)
    x = Var(0)
    got = synthesize([Rule(app(f, x), x, 1)])
    assert got is not None and got.weight["f"] >= 1
    assert check_compat(got, [Rule(app(f, x), x, 1)])


def test_synthesize_circular_swap_absent():
    f, g, x = Symbol("f", 1), Symbol("g", 1), Var(0)
    rules = [Rule(app(f, x), app(g, x), 1), Rule(app(g, x), app(f, x), 2)]
    assert synthesize(rules) is None


def test_synthesize_honours_coefficient_bound():
    f, g, x = Symbol("f", 1), Symbol("g", 1), Var(0)
    tower = x
    for _ in range(17):
        tower = app(g, tower)
    rules = [Rule(app(f, x), tower, 1), Rule(app(g, x), x, 2)]
    # needs c_f >= 1 + 17*c_g with c_g >= 1, beyond the default ceiling
    assert synthesize(rules) is None
    wide = synthesize(rules, max_coeff=32)
    assert wide is not None and check_compat(wide, rules)
    assert wide.weight["f"] == 18 and wide.weight["g"] == 1


def test_symbol_counts(halfbits):
    assert symbol_counts(t(halfbits, "half(s(s(x)))")) == {"half": 1, "s": 2}


def test_random_assignment_semantics(halfbits):
    got = synthesize(halfbits.rules[:3])
    assert got is not None
    rnd = random.Random(7)
    for rule in halfbits.rules[:3]:
        ids = variables(rule.lhs) | variables(rule.rhs)
        for _ in range(200):
            alpha = {i: rnd.randrange(0, 50) for i in ids}
            assert interpret(got, rule.lhs, alpha) > interpret(got, rule.rhs, alpha)


def test_synthesized_weights_always_compatible():
    rnd = random.Random(2024)
    syms = [Symbol("a", 0), Symbol("u", 1), Symbol("v", 1), Symbol("w", 2)]

    def rand_term(depth, var_pool):
        if depth <= 0 or rnd.random() < 0.3:
            if var_pool and rnd.random() < 0.6:
                return Var(rnd.choice(var_pool))
            return app(syms[0])
        sym = rnd.choice(syms[1:])
        return app(sym, *(rand_term(depth - 1, var_pool) for _ in range(sym.arity)))

    found = 0
    for i in range(60):
        n = rnd.randrange(1, 4)
        rules = []
        for j in range(n):
            lhs = rand_term(3, [0, 1])
            while isinstance(lhs, Var):
                lhs = rand_term(3, [0, 1])
            rules.append(Rule(lhs, rand_term(2, sorted(variables(lhs))), j + 1))
        got = synthesize(rules)
        if got is not None:
            found += 1
            assert check_compat(got, rules)
            for rule in rules:
                ids = variables(rule.lhs) | variables(rule.rhs)
                for _ in range(20):
                    alpha = {k: rnd.randrange(0, 30) for k in ids}
                    assert interpret(got, rule.lhs, alpha) > interpret(got, rule.rhs, alpha)
    assert found > 5
