"""Polynomial path orders over quasi-precedences with argument filterings.

The order compares terms rooted in a signature that is split into a *guard*
set (the symbols whose calls are being measured, usually the defined symbols
plus their marked variants) and the rest (data constructors and compounds).
Each symbol additionally carries a partition of its argument positions into
*normal* and *safe* ones: descents through normal positions may drive further
recursion, descents into safe positions may only pass data along.

Three relations are provided, each defined on terms over the filtered
signature:

* ``equiv_safe`` -- permutative equivalence: equal ranks at the root and a
  bijection between arguments that respects the safe/normal split.
* ``gsq`` -- the auxiliary order: either some argument (a normal one, when
  the root is guarded) already dominates the right-hand side, or the root
  strictly out-ranks a guarded comparison and dominates every argument.
* ``gpop`` -- the full order, adding a one-safe-position descent clause and
  a multiset comparison between equal-ranked roots.

An :class:`ArgumentFiltering` is applied up front: ``orient`` filters both
sides of every obligation and decides them with the order induced by the
adapted safe mapping.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Sequence

from .terms import App, Symbol, Term, Var, is_subterm
from .trs import TRS


class Precedence:
    """Quasi-precedence given by a total rank assignment name -> int."""

    __slots__ = ("rank",)

    def __init__(self, rank: Mapping[str, int]):
        self.rank = dict(rank)

    def rank_of(self, name: str) -> int:
        try:
            return self.rank[name]
        except KeyError:
            raise KeyError(f"no rank assigned to symbol {name!r}") from None

    def gt(self, f: str, g: str) -> bool:
        return self.rank_of(f) > self.rank_of(g)

    def eq(self, f: str, g: str) -> bool:
        return self.rank_of(f) == self.rank_of(g)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Precedence) and self.rank == other.rank

    def __repr__(self) -> str:
        inner = ", ".join(f"{n}:{r}" for n, r in sorted(self.rank.items()))
        return f"Precedence({inner})"


class SafeMapping:
    """Maps symbol names to their safe argument positions (1-based).

    Unlisted symbols have every position safe, which is the mandatory
    choice for constructors.
    """

    __slots__ = ("safe",)

    def __init__(self, safe: Mapping[str, Iterable[int]] | None = None):
        self.safe = {name: frozenset(ps) for name, ps in (safe or {}).items()}

    def safe_of(self, sym: Symbol) -> frozenset[int]:
        got = self.safe.get(sym.name)
        if got is None:
            return frozenset(range(1, sym.arity + 1))
        return got

    def normal_of(self, sym: Symbol) -> frozenset[int]:
        return frozenset(range(1, sym.arity + 1)) - self.safe_of(sym)

    def safe_args(self, t: App) -> list[Term]:
        ps = self.safe_of(t.sym)
        return [a for i, a in enumerate(t.args, 1) if i in ps]

    def normal_args(self, t: App) -> list[Term]:
        ps = self.safe_of(t.sym)
        return [a for i, a in enumerate(t.args, 1) if i not in ps]

    def __eq__(self, other: object) -> bool:
        return isinstance(other, SafeMapping) and self.safe == other.safe

    def __repr__(self) -> str:
        inner = ", ".join(
            f"{n}:{{{','.join(map(str, sorted(ps)))}}}" for n, ps in sorted(self.safe.items())
        )
        return f"SafeMapping({inner})"


class ArgumentFiltering:
    """Per-symbol projection: collapse to one argument or keep a sublist.

    ``pi`` maps a name either to an int i (replace f(..) by the filtered
    i-th argument) or to a strictly increasing tuple of kept positions.
    Unlisted symbols keep all arguments.
    """

    __slots__ = ("pi",)

    def __init__(self, pi: Mapping[str, int | Sequence[int]] | None = None):
        norm: dict[str, int | tuple[int, ...]] = {}
        for name, entry in (pi or {}).items():
            if isinstance(entry, int):
                norm[name] = entry
            else:
                kept = tuple(entry)
                if list(kept) != sorted(set(kept)):
                    raise ValueError(f"kept positions for {name!r} must strictly increase")
                norm[name] = kept
        self.pi = norm

    def of(self, sym: Symbol) -> int | tuple[int, ...]:
        got = self.pi.get(sym.name)
        if got is None:
            return tuple(range(1, sym.arity + 1))
        if isinstance(got, int):
            if not 1 <= got <= sym.arity:
                raise ValueError(f"collapse position {got} out of range for {sym}")
            return got
        if any(not 1 <= p <= sym.arity for p in got):
            raise ValueError(f"kept positions {got} out of range for {sym}")
        return got

    def collapses(self, name: str) -> bool:
        return isinstance(self.pi.get(name), int)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ArgumentFiltering) and self.pi == other.pi

    def __repr__(self) -> str:
        parts = []
        for name, entry in sorted(self.pi.items()):
            if isinstance(entry, int):
                parts.append(f"{name}->{entry}")
            else:
                parts.append(f"{name}->[{','.join(map(str, entry))}]")
        return f"ArgumentFiltering({', '.join(parts)})"


def _filtered_symbol(sym: Symbol, arity: int) -> Symbol:
    if arity == sym.arity:
        return sym
    unmarked = sym.unmarked
    if unmarked is not None and unmarked.arity != arity:
        unmarked = Symbol(unmarked.name, arity, kind=unmarked.kind)
    return Symbol(sym.name, arity, kind=sym.kind, unmarked=unmarked)


def apply_filtering(pi: ArgumentFiltering, t: Term) -> Term:
    """Homomorphic image of t under the filtering."""
    if isinstance(t, Var):
        return t
    entry = pi.of(t.sym)
    if isinstance(entry, int):
        return apply_filtering(pi, t.args[entry - 1])
    args = tuple(apply_filtering(pi, t.args[p - 1]) for p in entry)
    return App(_filtered_symbol(t.sym, len(args)), args)


@dataclass(frozen=True)
class OrderParams:
    """Everything needed to run the order: precedence, safe mapping,
    argument filtering and the guard set."""

    prec: Precedence
    safe: SafeMapping
    filtering: ArgumentFiltering
    guard: frozenset[str]

    def adapted_safe(self) -> SafeMapping:
        """Safe mapping over the filtered signature.

        Collapsed symbols disappear; for a kept-list entry the surviving
        safe positions are renumbered by their index in the kept list.
        """
        out: dict[str, frozenset[int]] = {}
        for name, ps in self.safe.safe.items():
            entry = self.filtering.pi.get(name)
            if isinstance(entry, int):
                continue
            if entry is None:
                out[name] = ps
                continue
            out[name] = frozenset(i for i, p in enumerate(entry, 1) if p in ps)
        return SafeMapping(out)

    def order(self) -> "PopOrder":
        return PopOrder(self.prec, self.adapted_safe(), self.guard)


def is_admissible(
    prec: Precedence, trs: TRS | None = None, guard: Iterable[str] | None = None
) -> bool:
    """Admissibility of a precedence with respect to a guard set.

    (i) anything strictly above a guarded symbol is itself guarded;
    (ii) equivalent symbols are on the same side of the guard line.
    With a total rank assignment this forces every guarded symbol strictly
    above every unguarded one.
    """
    if guard is None:
        if trs is None:
            raise ValueError("need a TRS or an explicit guard set")
        guard = trs.gdefined
    gset = set(guard)
    names = list(prec.rank)
    for f in names:
        for g in names:
            if prec.gt(f, g) and g in gset and f not in gset:
                return False
            if prec.eq(f, g) and (f in gset) != (g in gset):
                return False
    return True


def validate_params(
    params: OrderParams, signature: Mapping[str, Symbol], safe_filtering: bool = False
) -> list[str]:
    """Sanity complaints about parameters over a given signature.

    Empty list means fine.  ``safe_filtering`` additionally demands that
    compound symbols keep their full argument list.
    """
    out: list[str] = []
    for name, sym in signature.items():
        if name in params.prec.rank:
            continue
        out.append(f"symbol {name} has no rank")
    for name, ps in params.safe.safe.items():
        sym = signature.get(name)
        if sym is None:
            continue
        if any(not 1 <= p <= sym.arity for p in ps):
            out.append(f"safe positions of {name} out of range")
        if name not in params.guard and ps != frozenset(range(1, sym.arity + 1)):
            out.append(f"unguarded symbol {name} must keep all positions safe")
    for name, entry in params.filtering.pi.items():
        sym = signature.get(name)
        if sym is None:
            continue
        try:
            params.filtering.of(sym)
        except ValueError as exc:
            out.append(str(exc))
            continue
        if safe_filtering and sym.kind == "compound":
            if entry != tuple(range(1, sym.arity + 1)):
                out.append(f"compound {name} must not be filtered")
    return out


# ---------------------------------------------------------------------------
# Multiset comparison


@dataclass(frozen=True)
class MulCmp:
    strict: bool
    equiv: bool

    @property
    def label(self) -> str:
        if self.strict and self.equiv:
            return "weak-only"
        if self.strict:
            return "strict"
        if self.equiv:
            return "equiv"
        return "incomparable"

    @property
    def weak(self) -> bool:
        return self.strict or self.equiv


Rel = Callable[[Term, Term], bool]


def _blocks(elems: Sequence[Term]) -> list[tuple[Term, int]]:
    """Group a multiset into (value, count) pairs; order is first occurrence."""
    out: list[list] = []
    for u in elems:
        for b in out:
            if b[0] == u:
                b[1] += 1
                break
        else:
            out.append([u, 1])
    return [(u, c) for u, c in out]


def perfect_matching(ms: Sequence[Term], mt: Sequence[Term], rel: Rel) -> bool:
    """Is there a bijection pairing every left with a related right?

    Identical elements are interchangeable, so the search distributes
    whole blocks of equal values rather than permuting individuals.
    """
    if len(ms) != len(mt):
        return False
    lb = _blocks(ms)
    rb = _blocks(mt)
    free = [c for _, c in lb]

    def go(j: int) -> bool:
        if j == len(rb):
            return True
        v, d = rb[j]
        cands = [i for i, (u, _) in enumerate(lb) if rel(u, v)]

        def dist(idx: int, remaining: int) -> bool:
            if remaining == 0:
                return go(j + 1)
            if idx == len(cands):
                return False
            i = cands[idx]
            for use in range(min(free[i], remaining), -1, -1):
                free[i] -= use
                if dist(idx + 1, remaining - use):
                    return True
                free[i] += use
            return False

        return dist(0, d)

    return go(0)


def multiset_cmp(
    ms: Sequence[Term], mt: Sequence[Term], strict: Rel, equiv: Rel
) -> MulCmp:
    """Compare multisets under the extension of a quasi-order.

    ``equiv`` holds when a bijection matches the elements pairwise;
    ``strict`` when the right side splits into a part matched bijectively
    and a nonempty-remainder-dominated part: every unmatched right element
    lies strictly below some left element outside the matching, and at
    least one left element is outside it.
    """
    is_eq = perfect_matching(ms, mt, equiv)

    lb = _blocks(ms)
    rb = _blocks(mt)
    total = len(ms)
    taken = [0] * len(lb)

    def go(j: int, deferred: tuple[Term, ...]) -> bool:
        if j == len(rb):
            if sum(taken) == total:
                return False
            # domination is checked only once the matching is fixed, so a
            # dominator can never be consumed by a later equivalence match;
            # left-overs are shareable, hence a per-value scan suffices
            return all(
                any(taken[i] < c and strict(u, v) for i, (u, c) in enumerate(lb))
                for v in deferred
            )
        v, d = rb[j]
        cands = [i for i, (u, _) in enumerate(lb) if equiv(u, v)]

        def dist(idx: int, remaining: int) -> bool:
            if idx == len(cands):
                # whatever is left of this block gets deferred to domination
                return go(j + 1, deferred + (v,) if remaining else deferred)
            i = cands[idx]
            for use in range(min(lb[i][1] - taken[i], remaining), -1, -1):
                taken[i] += use
                if dist(idx + 1, remaining - use):
                    return True
                taken[i] -= use
            return False

        return dist(0, d)

    is_strict = go(0, ())
    return MulCmp(is_strict, is_eq)


# ---------------------------------------------------------------------------
# The order proper


class PopOrder:
    """Decides the order on terms over the (already filtered) signature."""

    __slots__ = ("prec", "safe", "guard", "_memo")

    def __init__(self, prec: Precedence, safe: SafeMapping, guard: Iterable[str]):
        self.prec = prec
        self.safe = safe
        self.guard = frozenset(guard)
        self._memo: dict[tuple[str, Term, Term], bool] = {}

    # -- permutative equivalence

    def equiv(self, s: Term, t: Term) -> bool:
        """Equal up to rank-preserving argument permutations (safe split ignored)."""
        if s == t:
            return True
        if not isinstance(s, App) or not isinstance(t, App):
            return False
        key = ("eqv", s, t)
        got = self._memo.get(key)
        if got is None:
            got = (
                len(s.args) == len(t.args)
                and self.prec.eq(s.sym.name, t.sym.name)
                and perfect_matching(s.args, t.args, self.equiv)
            )
            self._memo[key] = got
        return got

    def equiv_safe(self, s: Term, t: Term) -> bool:
        """As equiv, but the permutation must map safe positions to safe ones."""
        if s == t:
            return True
        if not isinstance(s, App) or not isinstance(t, App):
            return False
        key = ("eqs", s, t)
        got = self._memo.get(key)
        if got is None:
            got = (
                len(s.args) == len(t.args)
                and self.prec.eq(s.sym.name, t.sym.name)
                and perfect_matching(
                    self.safe.safe_args(s), self.safe.safe_args(t), self.equiv_safe
                )
                and perfect_matching(
                    self.safe.normal_args(s), self.safe.normal_args(t), self.equiv_safe
                )
            )
            self._memo[key] = got
        return got

    # -- auxiliary order

    def gsq(self, s: Term, t: Term) -> bool:
        if not isinstance(s, App):
            return False
        key = ("gsq", s, t)
        got = self._memo.get(key)
        if got is not None:
            return got
        f = s.sym
        guarded = f.name in self.guard
        positions = self.safe.normal_of(f) if guarded else range(1, f.arity + 1)
        result = False
        for i in positions:
            si = s.args[i - 1]
            if self.gsq(si, t) or self.equiv_safe(si, t):
                result = True
                break
        if not result and isinstance(t, App) and guarded and self.prec.gt(f.name, t.sym.name):
            result = all(self.gsq(s, tj) for tj in t.args)
        self._memo[key] = result
        return result

    def geq_sq(self, s: Term, t: Term) -> bool:
        return self.gsq(s, t) or self.equiv_safe(s, t)

    # -- the full order

    def gpop(self, s: Term, t: Term) -> bool:
        if not isinstance(s, App):
            return False
        key = ("pop", s, t)
        got = self._memo.get(key)
        if got is not None:
            return got
        self._memo[key] = result = self._gpop(s, t)
        return result

    def _gpop(self, s: App, t: Term) -> bool:
        # any argument may carry the comparison here, safe or not
        for si in s.args:
            if self.gpop(si, t) or self.equiv_safe(si, t):
                return True
        if self.gsq(s, t):
            return True
        if not isinstance(t, App):
            return False
        f, g = s.sym, t.sym
        if f.name in self.guard and self.prec.gt(f.name, g.name) and t.args:
            safe_t = self.safe.safe_of(g)
            for j0 in safe_t:
                if not self.gpop(s, t.args[j0 - 1]):
                    continue
                ok = True
                for j, tj in enumerate(t.args, 1):
                    if j == j0 or self.gsq(s, tj):
                        continue
                    if j in safe_t and tj != s and is_subterm(tj, s):
                        continue
                    ok = False
                    break
                if ok:
                    return True
        if self.prec.eq(f.name, g.name):
            nm = multiset_cmp(
                self.safe.normal_args(s), self.safe.normal_args(t), self.gpop, self.equiv_safe
            )
            if nm.strict:
                sm = multiset_cmp(
                    self.safe.safe_args(s), self.safe.safe_args(t), self.gpop, self.equiv_safe
                )
                if sm.weak:
                    return True
        return False

    def geq(self, s: Term, t: Term) -> bool:
        return self.gpop(s, t) or self.equiv_safe(s, t)


def gpop_filtered(s: Term, t: Term, params: OrderParams) -> bool:
    """Strict comparison after filtering both sides."""
    order = params.order()
    return order.gpop(apply_filtering(params.filtering, s), apply_filtering(params.filtering, t))


def geq_filtered(s: Term, t: Term, params: OrderParams) -> bool:
    """Weak comparison after filtering both sides."""
    order = params.order()
    return order.geq(apply_filtering(params.filtering, s), apply_filtering(params.filtering, t))


# ---------------------------------------------------------------------------
# Orienting rule sets


@dataclass(frozen=True)
class OrientReport:
    mode: str
    results: tuple[tuple[int, bool], ...]

    @property
    def ok(self) -> bool:
        return all(h for _, h in self.results)

    def failures(self) -> tuple[int, ...]:
        return tuple(i for i, h in self.results if not h)


def orient(obligations: Iterable, params: OrderParams, mode: str = "strict") -> OrientReport:
    """Decide every obligation (anything with lhs/rhs/index) under params.

    mode "strict" demands a strict decrease on each, mode "weak" allows
    equivalence as well.
    """
    if mode not in ("strict", "weak"):
        raise ValueError(f"unknown mode {mode!r}")
    order = params.order()
    pi = params.filtering
    results = []
    for ob in obligations:
        ls = apply_filtering(pi, ob.lhs)
        rs = apply_filtering(pi, ob.rhs)
        holds = order.gpop(ls, rs) if mode == "strict" else order.gpop(ls, rs) or order.equiv_safe(ls, rs)
        results.append((ob.index, holds))
    return OrientReport(mode, tuple(results))


# ---------------------------------------------------------------------------
# Parameter serialization (line oriented, order independent, round-trip exact)


def params_to_text(params: OrderParams) -> str:
    lines = []
    for name in sorted(params.prec.rank):
        lines.append(f"rank {name} {params.prec.rank[name]}")
    for name in sorted(params.safe.safe):
        ps = " ".join(str(p) for p in sorted(params.safe.safe[name]))
        lines.append(f"safe {name} {ps}".rstrip())
    lines.append(("guard " + " ".join(sorted(params.guard))).rstrip())
    for name in sorted(params.filtering.pi):
        entry = params.filtering.pi[name]
        if isinstance(entry, int):
            lines.append(f"collapse {name} {entry}")
        else:
            ps = " ".join(str(p) for p in entry)
            lines.append(f"keep {name} {ps}".rstrip())
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> OrderParams:
    rank: dict[str, int] = {}
    safe: dict[str, frozenset[int]] = {}
    guard: frozenset[str] = frozenset()
    pi: dict[str, int | tuple[int, ...]] = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        if kind == "rank":
            rank[parts[1]] = int(parts[2])
        elif kind == "safe":
            safe[parts[1]] = frozenset(int(p) for p in parts[2:])
        elif kind == "guard":
            guard = frozenset(parts[1:])
        elif kind == "collapse":
            pi[parts[1]] = int(parts[2])
        elif kind == "keep":
            pi[parts[1]] = tuple(int(p) for p in parts[2:])
        else:
            raise ValueError(f"unknown parameter line {line!r}")
    return OrderParams(Precedence(rank), SafeMapping(safe), ArgumentFiltering(pi), guard)
