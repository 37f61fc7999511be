"""Strongly linear interpretations: each symbol adds its arguments plus a weight.

A weight assignment sends every n-ary symbol f to the function
x1 + ... + xn + c_f over the naturals.  A rule set is compatible when each
left-hand side evaluates strictly above its right-hand side under every
assignment of naturals to variables; because the interpretations are sums,
that is a finite check on variable multiplicities and weight totals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from .terms import App, Term, Var, subterms, var_multiplicities
from .trs import Rule


@dataclass(frozen=True)
class SLIWeights:
    weight: dict[str, int] = field(default_factory=dict)

    def __post_init__(self):
        for name, c in self.weight.items():
            if c < 0:
                raise ValueError(f"negative weight {c} for symbol {name!r}")

    def weight_of(self, name: str) -> int:
        try:
            return self.weight[name]
        except KeyError:
            raise KeyError(f"no weight assigned to symbol {name!r}") from None


def interpret(weights: SLIWeights, t: Term, assignment: Mapping[int, int]) -> int:
    """Evaluate t: assigned values for variables, weights summed per symbol."""
    total = 0
    for u in subterms(t):
        if isinstance(u, Var):
            total += assignment[u.id]
        else:
            total += weights.weight_of(u.sym.name)
    return total


def symbol_counts(t: Term) -> dict[str, int]:
    out: dict[str, int] = {}
    for u in subterms(t):
        if isinstance(u, App):
            out[u.sym.name] = out.get(u.sym.name, 0) + 1
    return out


def _dominates(lhs: Term, rhs: Term) -> bool:
    lv = var_multiplicities(lhs)
    for x, n in var_multiplicities(rhs).items():
        if lv.get(x, 0) < n:
            return False
    return True


def check_compat(weights: SLIWeights, rules: Iterable[Rule]) -> bool:
    """Does every rule decrease strictly under all natural assignments?

    Equivalent finite test: the lhs multiplicity of each variable covers the
    rhs multiplicity, and the summed symbol weights drop by at least one.
    """
    for rule in rules:
        if not _dominates(rule.lhs, rule.rhs):
            return False
        lw = sum(weights.weight_of(f) * n for f, n in symbol_counts(rule.lhs).items())
        rw = sum(weights.weight_of(f) * n for f, n in symbol_counts(rule.rhs).items())
        if lw <= rw:
            return False
    return True


def synthesize(rules: Iterable[Rule], max_coeff: int = 16) -> Optional[SLIWeights]:
    """Search bounded natural weights making every rule strictly decreasing.

    Weights are tried smallest-first per symbol, so the found witness is the
    lexicographically least one in symbol-name order.
    """
    rules = tuple(rules)
    if not all(_dominates(r.lhs, r.rhs) for r in rules):
        return None

    nets: list[dict[str, int]] = []
    names: set[str] = set()
    for r in rules:
        lc, rc = symbol_counts(r.lhs), symbol_counts(r.rhs)
        net = {f: lc.get(f, 0) - rc.get(f, 0) for f in {*lc, *rc}}
        net = {f: n for f, n in net.items() if n}
        nets.append(net)
        names |= set(lc) | set(rc)

    order = sorted(names)
    chosen: dict[str, int] = {}

    def feasible() -> bool:
        # can every constraint still reach >= 1 with unassigned weights?
        for net in nets:
            best = 0
            for f, n in net.items():
                c = chosen.get(f)
                if c is not None:
                    best += n * c
                elif n > 0:
                    best += n * max_coeff
            if best < 1:
                return False
        return True

    def assign(i: int) -> bool:
        if i == len(order):
            return all(
                sum(n * chosen[f] for f, n in net.items()) >= 1 for net in nets
            )
        f = order[i]
        for c in range(max_coeff + 1):
            chosen[f] = c
            if feasible() and assign(i + 1):
                return True
        del chosen[f]
        return False

    if not assign(0):
        return None
    return SLIWeights(dict(chosen))
