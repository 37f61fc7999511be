"""Step relations, normal forms, and derivation-length search.

Everything here is exhaustive rather than strategy-committed: a step
function returns every one-step successor allowed by the restriction, and
derivation length is the longest path in that successor graph, computed
with memoization and an explicit fuel bound.
"""

from __future__ import annotations

from typing import Callable, Iterable, Iterator, Optional

from .terms import App, Subst, Term, Var, apply_subst, match
from .trs import TRS, Rule


class FuelExhausted(RuntimeError):
    pass


class EnumerationOverflow(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Predicates


def is_value(trs: TRS, t: Term, refined: bool = False) -> bool:
    """True iff t is built from constructors and variables only."""
    cons = trs.gconstructors if refined else trs.constructors
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, App):
            if u.sym.name not in cons:
                return False
            stack.extend(u.args)
    return True


def is_basic(trs: TRS, t: Term, refined: bool = False) -> bool:
    """True iff t is a defined symbol applied to values (a start term)."""
    dfs = trs.gdefined if refined else trs.defined
    if not isinstance(t, App) or t.sym.name not in dfs:
        return False
    return all(is_value(trs, a, refined) for a in t.args)


def _matches_some_rule(rules: tuple[Rule, ...], u: Term) -> bool:
    return any(match(r.lhs, u) is not None for r in rules)


def is_normal_form(trs: TRS, t: Term) -> bool:
    """No rule of trs matches any subterm of t."""
    stack = [t]
    rules = trs.rules
    while stack:
        u = stack.pop()
        if isinstance(u, App):
            if _matches_some_rule(rules, u):
                return False
            stack.extend(u.args)
    return True


# ---------------------------------------------------------------------------
# Step relations


def _root_reducts(rules: tuple[Rule, ...], u: Term) -> list[Term]:
    out = []
    for r in rules:
        sigma = match(r.lhs, u)
        if sigma is not None:
            out.append(apply_subst(r.rhs, sigma))
    return out


def _dedupe(ts: Iterable[Term]) -> list[Term]:
    seen: set[Term] = set()
    out = []
    for t in ts:
        if t not in seen:
            seen.add(t)
            out.append(t)
    return out


def innermost_step(trs: TRS, t: Term) -> list[Term]:
    """All one-step successors contracting an innermost redex.

    A redex may be contracted only if its proper subterms are normal forms;
    any such position is allowed, so the result can have several elements.
    """
    if isinstance(t, Var):
        return []
    out: list[Term] = []
    args_normal = True
    for i, a in enumerate(t.args):
        for a2 in innermost_step(trs, a):
            args_normal = False
            out.append(App(t.sym, t.args[:i] + (a2,) + t.args[i + 1:]))
    if args_normal:
        out.extend(_root_reducts(trs.rules, t))
    return _dedupe(out)


def full_step(trs: TRS, t: Term) -> list[Term]:
    """All one-step successors with no strategy restriction."""
    if isinstance(t, Var):
        return []
    out = _root_reducts(trs.rules, t)
    for i, a in enumerate(t.args):
        for a2 in full_step(trs, a):
            out.append(App(t.sym, t.args[:i] + (a2,) + t.args[i + 1:]))
    return _dedupe(out)


def q_restricted_step(trs: TRS, q: TRS, t: Term, root_only: bool = False) -> list[Term]:
    """Rewrite with trs, but a redex fires only if its arguments are q-normal.

    With q == trs this is innermost rewriting; with an empty q it is full
    rewriting.
    """
    if isinstance(t, Var):
        return []
    out: list[Term] = []
    if all(is_normal_form(q, a) for a in t.args):
        out.extend(_root_reducts(trs.rules, t))
    if not root_only:
        for i, a in enumerate(t.args):
            for a2 in q_restricted_step(trs, q, a):
                out.append(App(t.sym, t.args[:i] + (a2,) + t.args[i + 1:]))
    return _dedupe(out)


def _union_trs(strict: TRS, weak: TRS) -> TRS:
    sig = dict(strict.signature)
    sig.update(weak.signature)
    rules = list(strict.rules) + [
        Rule(r.lhs, r.rhs, len(strict.rules) + i) for i, r in enumerate(weak.rules, start=1)
    ]
    names = strict.var_names if len(strict.var_names) >= len(weak.var_names) else weak.var_names
    return TRS(rules, sig, names)


def _weak_closure(weak: TRS, q: TRS, t: Term, cap: int) -> list[Term]:
    seen = {t}
    queue = [t]
    order = [t]
    while queue:
        u = queue.pop()
        for v in q_restricted_step(weak, q, u):
            if v not in seen:
                if len(seen) >= cap:
                    raise FuelExhausted("weak closure exceeded cap")
                seen.add(v)
                queue.append(v)
                order.append(v)
    return order


def relative_step(strict: TRS, weak: TRS, t: Term, root_only: bool = False,
                  cap: int = 10_000) -> list[Term]:
    """One strict step modulo weak ones.

    Successors are reached by any number of weak steps, one strict step
    (at the root when root_only), then any number of weak steps, where every
    individual step requires the redex arguments to be normal for the union
    of both systems.
    """
    q = _union_trs(strict, weak)
    out: list[Term] = []
    for u in _weak_closure(weak, q, t, cap):
        for v in q_restricted_step(strict, q, u, root_only=root_only):
            out.extend(_weak_closure(weak, q, v, cap))
    return _dedupe(out)


# ---------------------------------------------------------------------------
# Derivation length


def longest_path(t: Term, succ: Callable[[Term], Iterable[Term]], fuel: int) -> int:
    """Length of the longest successor chain from t.

    Fuel is consumed once per explored edge; a cycle or an exhausted budget
    raises FuelExhausted (a cycle means the true length is infinite).
    """
    memo: dict[Term, int] = {}
    on_stack: set[Term] = set()
    budget = fuel

    # explicit stack: (term, successor list, next index, best so far)
    t0 = t
    stack: list[list] = [[t0, None, 0, 0]]
    on_stack.add(t0)
    while stack:
        frame = stack[-1]
        u, succs, i, best = frame
        if succs is None:
            succs = frame[1] = list(succ(u))
        if i < len(succs):
            frame[2] += 1
            v = succs[i]
            budget -= 1
            if budget < 0:
                raise FuelExhausted(f"fuel exhausted after {fuel} steps")
            if v in memo:
                frame[3] = max(frame[3], 1 + memo[v])
            elif v in on_stack:
                raise FuelExhausted("cycle detected: derivation length is infinite")
            else:
                on_stack.add(v)
                stack.append([v, None, 0, 0])
        else:
            memo[u] = frame[3]
            on_stack.discard(u)
            stack.pop()
            if stack:
                parent = stack[-1]
                parent[3] = max(parent[3], 1 + frame[3])
    return memo[t0]


def derivation_length(trs: TRS, t: Term, strategy: str = "innermost",
                      fuel: int = 100_000) -> int:
    """Maximal number of steps from t under the given strategy."""
    if strategy == "innermost":
        return longest_path(t, lambda u: innermost_step(trs, u), fuel)
    if strategy == "full":
        return longest_path(t, lambda u: full_step(trs, u), fuel)
    raise ValueError(f"unknown strategy {strategy!r}")


def relative_derivation_length(strict: TRS, weak: TRS, t: Term,
                               root_only: bool = True, fuel: int = 100_000) -> int:
    """Maximal number of strict-modulo-weak steps from t."""
    return longest_path(t, lambda u: relative_step(strict, weak, u, root_only=root_only), fuel)


# ---------------------------------------------------------------------------
# Runtime-complexity sampling


def enumerate_values(trs: TRS, max_size: int, per_size_cap: int = 10_000,
                     strict_cap: bool = False) -> tuple[list[list[Term]], bool]:
    """Ground constructor terms grouped by exact size (index 0 unused)."""
    by_size: list[list[Term]] = [[] for _ in range(max_size + 1)]
    truncated = False
    cons = sorted(trs.constructors)
    for n in range(1, max_size + 1):
        bucket = by_size[n]
        for name in cons:
            sym = trs.signature[name]
            if sym.arity == 0:
                if n == 1:
                    bucket.append(App(sym, ()))
                continue
            for combo in _arg_combos(by_size, sym.arity, n - 1):
                bucket.append(App(sym, combo))
                if len(bucket) > per_size_cap:
                    break
            if len(bucket) > per_size_cap:
                break
        if len(bucket) > per_size_cap:
            if strict_cap:
                raise EnumerationOverflow(
                    f"more than {per_size_cap} ground terms of size {n}")
            del bucket[per_size_cap:]
            truncated = True
    return by_size, truncated


def _arg_combos(by_size: list[list[Term]], k: int, total: int) -> Iterator[tuple[Term, ...]]:
    """All k-tuples of already-enumerated terms with sizes summing to total."""
    if k == 0:
        if total == 0:
            yield ()
        return
    if total < k:
        return
    for first in range(1, total - (k - 1) + 1):
        for head in by_size[first]:
            for tail in _arg_combos(by_size, k - 1, total - first):
                yield (head,) + tail


def enumerate_basic_terms(trs: TRS, max_size: int, per_size_cap: int = 10_000,
                          strict_cap: bool = False) -> tuple[list[list[Term]], bool]:
    """Ground basic terms grouped by exact size."""
    values, truncated = enumerate_values(trs, max_size, per_size_cap, strict_cap)
    by_size: list[list[Term]] = [[] for _ in range(max_size + 1)]
    for name in sorted(trs.defined):
        sym = trs.signature[name]
        for n in range(1, max_size + 1):
            if sym.arity == 0:
                if n == 1:
                    by_size[n].append(App(sym, ()))
                continue
            bucket = by_size[n]
            for combo in _arg_combos(values, sym.arity, n - 1):
                bucket.append(App(sym, combo))
                if len(bucket) > per_size_cap:
                    if strict_cap:
                        raise EnumerationOverflow(
                            f"more than {per_size_cap} basic terms of size {n}")
                    del bucket[per_size_cap:]
                    truncated = True
                    break
    return by_size, truncated


def runtime_complexity_samples(trs: TRS, max_size: int, fuel: int = 100_000,
                               per_size_cap: int = 10_000, strict_cap: bool = False,
                               on_fuel: str = "raise") -> dict:
    """Max innermost derivation length over ground basic terms, per size bound.

    Returns a dict with `samples` = list of (n, rc(n)) for n = 1..max_size
    (monotone in n by construction), plus enumeration metadata.  on_fuel
    controls what happens when one start term exhausts the fuel: "raise"
    propagates, "stop" truncates the report at the previous size.
    """
    if on_fuel not in ("raise", "stop"):
        raise ValueError("on_fuel must be 'raise' or 'stop'")
    basic, truncated = enumerate_basic_terms(trs, max_size, per_size_cap, strict_cap)
    memo: dict[Term, int] = {}
    samples: list[tuple[int, int]] = []
    best = 0
    count = 0
    fuel_hit = False
    for n in range(1, max_size + 1):
        try:
            for t in basic[n]:
                count += 1
                if t in memo:
                    d = memo[t]
                else:
                    d = longest_path(t, lambda u: innermost_step(trs, u), fuel)
                    memo[t] = d
                best = max(best, d)
        except FuelExhausted:
            if on_fuel == "raise":
                raise
            fuel_hit = True
            break
        samples.append((n, best))
    return {
        "samples": samples,
        "terms_examined": count,
        "truncated": truncated,
        "fuel_exhausted": fuel_hit,
    }
