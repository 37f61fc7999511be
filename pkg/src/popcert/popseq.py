"""Sequence orders, predicative interpretations, and embedding harnesses.

The certificate checkers in :mod:`popcert.orders` decide a syntactic order on
rule sides.  The machinery here provides the independent yardstick those
decisions are measured against: terms are interpreted as *sequences* (variadic
lists written ``[a b c]``), and an approximated path order on sequences --
parameterized by a width budget ``k`` and a recursion budget ``l`` -- is
decided directly.  Concrete rewrite derivations can then be replayed step by
step, checking that every strict step strictly decreases the interpretation
and every weak step weakly decreases it.

The interpretation of a term ``t`` only remembers its recursion skeleton: a
term that is a value collapses to the empty sequence, and elsewhere each
guarded call contributes a normalized root applied to the interpretations of
its normal arguments, while safe arguments are carried alongside in the
sequence.  Sizes of values survive only as runs of the minimal constant ``@``
(one run per node, measured by :func:`popcert.terms.bnorm`).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterable, Optional

from .orders import ArgumentFiltering, OrderParams, Precedence, apply_filtering, multiset_cmp, perfect_matching
from .rewriting import FuelExhausted, is_normal_form
from .terms import (
    App,
    BOTTOM_NAME,
    BULLET_NAME,
    SEQ_NAME,
    Symbol,
    Term,
    Var,
    apply_subst,
    bnorm,
    is_ground,
    match,
    subterms,
    width,
)
from .trs import TRS, Rule

BULLET = App(Symbol(BULLET_NAME, 0, kind="auxiliary"))
BOTTOM = App(Symbol(BOTTOM_NAME, 0, kind="auxiliary"))
_RESERVED = frozenset({SEQ_NAME, BULLET_NAME, BOTTOM_NAME})
_MINIMAL = frozenset({BULLET_NAME, BOTTOM_NAME})


def seq(*items: Term) -> App:
    return App(Symbol(SEQ_NAME, len(items), kind="auxiliary"), items)


def is_seq(t: Term) -> bool:
    return isinstance(t, App) and t.sym.name == SEQ_NAME


EMPTY = seq()


# ---------------------------------------------------------------------------
# The approximated orders on sequences


class SeqOrder:
    """Finite approximations of the path order on sequences.

    ``k`` bounds how much wider a right-hand side may get; the per-query
    budget ``l`` bounds how often a left-hand root may be replicated across
    a sequence.  Both orders treat the empty sequence as minimal, compare
    sequence nodes by multiset covers, and fall back on the permutative
    equivalence induced by the precedence.
    """

    __slots__ = ("prec", "k", "_memo")

    def __init__(self, prec: Precedence, k: int):
        if k < 1:
            raise ValueError("the width allowance k must be at least 1")
        self.prec = prec
        self.k = k
        self._memo: dict[tuple, bool] = {}

    # roots: reserved names compare structurally, everything else by rank
    def _eq_roots(self, f: Symbol, g: Symbol) -> bool:
        if f.name == g.name:
            return True
        if f.name in _RESERVED or g.name in _RESERVED:
            return False
        return self.prec.eq(f.name, g.name)

    def _gt_roots(self, f: Symbol, g: Symbol) -> bool:
        if f.name in _RESERVED:
            return False
        if g.name in _MINIMAL:
            return True
        if g.name == SEQ_NAME:
            return False
        return self.prec.gt(f.name, g.name)

    def equiv(self, s: Term, t: Term) -> bool:
        if s == t:
            return True
        if not isinstance(s, App) or not isinstance(t, App):
            return False
        key = (0, s, t)
        got = self._memo.get(key)
        if got is None:
            got = (
                len(s.args) == len(t.args)
                and self._eq_roots(s.sym, t.sym)
                and perfect_matching(s.args, t.args, self.equiv)
            )
            self._memo[key] = got
        return got

    def gpp(self, s: Term, t: Term, l: int) -> bool:
        if l < 1 or not isinstance(s, App):
            return False
        key = (1, s, t, l)
        got = self._memo.get(key)
        if got is None:
            self._memo[key] = got = self._gpp(s, t, l)
        return got

    def _gpp(self, s: App, t: Term, l: int) -> bool:
        for si in s.args:
            if self.gpp(si, t, l) or self.equiv(si, t):
                return True
        if not is_seq(s) and isinstance(t, App):
            if is_seq(t) or self._gt_roots(s.sym, t.sym):
                if len(t.args) < self.k + width(s) and all(
                    self.gpp(s, tj, l - 1) for tj in t.args
                ):
                    return True
        if is_seq(s) and is_seq(t) and len(t.args) < self.k + width(s):
            if multiset_cmp(
                s.args, t.args, lambda a, b: self.gpp(a, b, l), self.equiv
            ).strict:
                return True
        return False

    def geq_pp(self, s: Term, t: Term, l: int) -> bool:
        return self.gpp(s, t, l) or self.equiv(s, t)

    def gpop(self, s: Term, t: Term, l: Optional[int] = None) -> bool:
        if l is None:
            l = self.k
        if l < 1 or not isinstance(s, App):
            return False
        key = (2, s, t, l)
        got = self._memo.get(key)
        if got is None:
            self._memo[key] = got = self._gpop(s, t, l)
        return got

    def _gpop(self, s: App, t: Term, l: int) -> bool:
        if self.gpp(s, t, l):
            return True
        for si in s.args:
            if self.gpop(si, t, l) or self.equiv(si, t):
                return True
        if not is_seq(s):
            if is_seq(t) and len(t.args) < self.k + width(s):
                # one slot may recurse through the full order
                for j0 in range(len(t.args)):
                    if not self.gpop(s, t.args[j0], l - 1):
                        continue
                    if all(
                        self.gpp(s, t.args[j], l - 1)
                        for j in range(len(t.args))
                        if j != j0
                    ):
                        return True
            if isinstance(t, App) and not is_seq(t) and self._eq_roots(s.sym, t.sym):
                if self.gpop(seq(*s.args), seq(*t.args), l):
                    return True
        if is_seq(s) and is_seq(t) and len(t.args) < self.k + width(s):
            if multiset_cmp(
                s.args, t.args, lambda a, b: self.gpop(a, b, l), self.equiv
            ).strict:
                return True
        return False

    def geq(self, s: Term, t: Term, l: Optional[int] = None) -> bool:
        return self.gpop(s, t, l) or self.equiv(s, t)


def gpp_seq(s: Term, t: Term, k: int, l: Optional[int] = None, prec: Optional[Precedence] = None) -> bool:
    """One-shot auxiliary-order query; l defaults to k."""
    order = SeqOrder(prec if prec is not None else Precedence({}), k)
    return order.gpp(s, t, k if l is None else l)


def gpop_seq(s: Term, t: Term, k: int, l: Optional[int] = None, prec: Optional[Precedence] = None) -> bool:
    """One-shot sequence-order query; l defaults to k."""
    order = SeqOrder(prec if prec is not None else Precedence({}), k)
    return order.gpop(s, t, k if l is None else l)


# ---------------------------------------------------------------------------
# Predicative interpretations


class Interpretation:
    """Maps terms to sequences, forgetting everything but the call skeleton."""

    __slots__ = ("filtering", "safe", "guard", "_nsyms")

    def __init__(self, params: OrderParams):
        self.filtering = params.filtering
        self.safe = params.adapted_safe()
        self.guard = params.guard
        self._nsyms: dict[tuple[str, int], Symbol] = {}

    def _is_value(self, u: Term) -> bool:
        return not any(
            isinstance(w, App) and w.sym.name in self.guard for w in subterms(u)
        )

    def _nsym(self, sym: Symbol, arity: int) -> Symbol:
        if arity == sym.arity:
            return sym
        key = (sym.name, arity)
        got = self._nsyms.get(key)
        if got is None:
            kind = "defined" if sym.kind == "marked" else sym.kind
            got = self._nsyms[key] = Symbol(sym.name, arity, kind=kind)
        return got

    def _s(self, u: Term) -> App:
        if self._is_value(u):
            return EMPTY
        assert isinstance(u, App)
        normal = sorted(self.safe.normal_of(u.sym))
        safe = sorted(self.safe.safe_of(u.sym))
        head = App(
            self._nsym(u.sym, len(normal)),
            tuple(self._n(u.args[j - 1]) for j in normal),
        )
        return seq(head, *(self._s(u.args[i - 1]) for i in safe))

    def _n(self, u: Term) -> App:
        return seq(self._s(u), *([BULLET] * bnorm(u)))

    def _q(self, u: Term) -> App:
        if isinstance(u, App) and u.sym.kind == "compound":
            return seq(*(self._q(a) for a in u.args))
        return seq(self._n(u))

    def pred_s(self, t: Term) -> App:
        return self._s(apply_filtering(self.filtering, t))

    def pred_n(self, t: Term) -> App:
        return self._n(apply_filtering(self.filtering, t))

    def pred_q(self, t: Term) -> App:
        return self._q(apply_filtering(self.filtering, t))


def pred_S(t: Term, params: OrderParams) -> App:
    return Interpretation(params).pred_s(t)


def pred_N(t: Term, params: OrderParams) -> App:
    return Interpretation(params).pred_n(t)


def pred_Q(t: Term, params: OrderParams) -> App:
    return Interpretation(params).pred_q(t)


# ---------------------------------------------------------------------------
# Value-restricted stepping and normal-form erasure


def nf_v(trs: TRS, t: Term) -> Term:
    """Replace every maximal ground normal form with guarded root by ``_bot``.

    The replacement system is confluent and terminating, so a single
    top-down pass yields the normal form.
    """
    if (
        isinstance(t, App)
        and t.sym.name in trs.gdefined
        and is_ground(t)
        and is_normal_form(trs, t)
    ):
        return BOTTOM
    if isinstance(t, Var) or not t.args:
        return t
    return App(t.sym, tuple(nf_v(trs, a) for a in t.args))


def _value_like(trs: TRS, t: Term) -> bool:
    # constructor terms extended with the erasure constant and compounds
    return not any(
        isinstance(w, App) and w.sym.name in trs.gdefined for w in subterms(t)
    )


def value_steps(trs: TRS, rules: Iterable[Rule], t: Term, root_only: bool = False) -> list[Term]:
    """Successors of one rewrite step whose redex has value arguments."""
    rules = tuple(rules)
    out: list[Term] = []
    seen: set[Term] = set()

    def emit(u: Term) -> None:
        if u not in seen:
            seen.add(u)
            out.append(u)

    def go(u: Term, wrap: Callable[[Term], Term]) -> None:
        if not isinstance(u, App):
            return
        if all(_value_like(trs, a) for a in u.args):
            for rule in rules:
                sigma = match(rule.lhs, u)
                if sigma is not None:
                    emit(wrap(apply_subst(rule.rhs, sigma)))
        if not root_only:
            for i, a in enumerate(u.args):
                rebuild = lambda v, i=i, u=u: wrap(
                    App(u.sym, u.args[:i] + (v,) + u.args[i + 1 :])
                )
                go(a, rebuild)

    go(t, lambda v: v)
    return out


def erasure_steps(trs: TRS, t: Term) -> list[Term]:
    """Single steps replacing one stuck guarded subterm by ``_bot``."""
    out: list[Term] = []

    def stuck(u: Term) -> bool:
        return (
            isinstance(u, App)
            and u.sym.name in trs.gdefined
            and is_ground(u)
            and not any(isinstance(w, App) and w.sym.name == BOTTOM_NAME for w in subterms(u))
            and is_normal_form(trs, u)
        )

    def go(u: Term, wrap: Callable[[Term], Term]) -> None:
        if not isinstance(u, App):
            return
        if stuck(u):
            out.append(wrap(BOTTOM))
            return
        for i, a in enumerate(u.args):
            go(a, lambda v, i=i, u=u: wrap(App(u.sym, u.args[:i] + (v,) + u.args[i + 1 :])))

    go(t, lambda v: v)
    return out


# ---------------------------------------------------------------------------
# The embedding harness


@dataclass(frozen=True)
class EmbeddingReport:
    ok: bool
    k: int
    terms_explored: int
    strict_steps: int
    weak_steps: int
    max_chain: int
    violation: Optional[tuple[str, Term, Term]] = None


def _obligations(system) -> tuple[Rule, ...]:
    if isinstance(system, TRS):
        return system.rules
    return tuple(system)


def _mixed_system(obligations: Iterable) -> TRS:
    sig: dict[str, Symbol] = {}
    rules = []
    for i, ob in enumerate(obligations, 1):
        rules.append(Rule(ob.lhs, ob.rhs, i))
        for side in (ob.lhs, ob.rhs):
            for u in subterms(side):
                if isinstance(u, App):
                    sig.setdefault(u.sym.name, u.sym)
    return TRS(tuple(rules), sig)


def default_k(obligations: Iterable, filtering: ArgumentFiltering) -> int:
    """Width allowance from the filtered right-hand sides: max 3*||pi(r)||."""
    k = 1
    for ob in obligations:
        k = max(k, 3 * bnorm(apply_filtering(filtering, ob.rhs)))
    return k


def check_embedding(
    strict,
    weak,
    params: OrderParams,
    start: Term,
    k: Optional[int] = None,
    fuel: int = 10_000,
    root_only: Optional[bool] = None,
) -> EmbeddingReport:
    """Replay value-restricted derivations from ``start`` and test descent.

    Every step by a strict rule must strictly decrease the interpretation in
    the k-approximated sequence order; steps by weak rules and normal-form
    erasures must decrease weakly.  Terms whose interpretation should drop
    strictly are located at the root unless the strict rules carry marked
    roots (then any position works, mirroring how marked calls sit under
    compound contexts).
    """
    strict_rules = _obligations(strict)
    weak_rules = _obligations(weak)
    union = _mixed_system(strict_rules + weak_rules)
    if k is None:
        k = default_k(strict_rules + weak_rules, params.filtering)
    if root_only is None:
        root_only = not any(
            isinstance(r.lhs, App) and r.lhs.sym.kind == "marked" for r in strict_rules
        )
    order = SeqOrder(params.prec, k)
    interp = Interpretation(params)

    s0 = nf_v(union, start)
    seen = {s0}
    queue = deque([s0])
    interps = {s0: interp.pred_q(s0)}
    edges: dict[Term, list[tuple[Term, bool]]] = {}
    strict_steps = weak_steps = 0

    while queue:
        u = queue.popleft()
        if len(seen) > fuel:
            raise FuelExhausted(f"more than {fuel} terms reachable from {start}")
        qu = interps[u]
        succ: list[tuple[Term, bool]] = []
        for v in value_steps(union, strict_rules, u, root_only):
            succ.append((v, True))
        for v in value_steps(union, weak_rules, u, False):
            succ.append((v, False))
        for v in erasure_steps(union, u):
            succ.append((v, False))
        edges[u] = succ
        for v, is_strict in succ:
            qv = interps.get(v)
            if qv is None:
                qv = interps[v] = interp.pred_q(v)
            if is_strict:
                strict_steps += 1
                if not order.gpop(qu, qv):
                    return EmbeddingReport(
                        False, k, len(seen), strict_steps, weak_steps,
                        0, ("strict", u, v),
                    )
            else:
                weak_steps += 1
                if not order.geq(qu, qv):
                    return EmbeddingReport(
                        False, k, len(seen), strict_steps, weak_steps,
                        0, ("weak", u, v),
                    )
            if v not in seen:
                seen.add(v)
                queue.append(v)

    # longest chain of strict steps witnessed in the explored graph
    state: dict[Term, int] = {}
    best: dict[Term, int] = {}

    def chain(u: Term) -> int:
        got = best.get(u)
        if got is not None:
            return got
        if state.get(u) == 1:
            raise FuelExhausted("cycle in value-restricted rewriting")
        state[u] = 1
        m = 0
        for v, is_strict in edges.get(u, ()):
            m = max(m, chain(v) + (1 if is_strict else 0))
        state[u] = 2
        best[u] = m
        return m

    return EmbeddingReport(True, k, len(seen), strict_steps, weak_steps, chain(s0))
