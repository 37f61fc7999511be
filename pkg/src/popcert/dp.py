"""Dependency pairs for innermost runtime analysis.

A rule's right-hand side decomposes into a context free of recursive
symbols and the maximal subterms rooted in ``gdefined`` (taken left to
right).  The pair for the rule rewrites the marked left-hand side to those
parts, marked and grouped under a fresh compound constructor when there is
not exactly one of them.  Pair numbering continues the rule numbering of
the originating system, so a six-rule system yields pairs 7..12.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .terms import (
    App,
    Symbol,
    Term,
    Var,
    functions,
    max_var,
    rename_vars,
    subterms,
    unify,
    var_multiplicities,
)
from .trs import TRS, Rule, SortDecl

MARK = "#"

# placeholder for a removed part inside a represented context
HOLE = Symbol("_", 0, kind="auxiliary")


def mark_symbol(sym: Symbol) -> Symbol:
    return Symbol(sym.name + MARK, sym.arity, kind="marked", unmarked=sym)


def mark_root(t: Term) -> Term:
    if not isinstance(t, App):
        return t
    return App(mark_symbol(t.sym), t.args)


@dataclass(frozen=True)
class DependencyPair:
    """lhs -> rhs over the marked signature, generated by rule `origin`."""

    lhs: Term
    rhs: Term
    index: int
    origin: int
    compound: Optional[Symbol] = None
    represented_context: Optional[Term] = None

    def root(self) -> Symbol:
        assert isinstance(self.lhs, App)
        return self.lhs.sym

    def as_rule(self) -> Rule:
        return Rule(self.lhs, self.rhs, self.index)

    def components(self) -> tuple[Term, ...]:
        """The grouped parts: compound arguments, or the rhs itself."""
        if isinstance(self.rhs, App) and self.rhs.sym.kind == "compound":
            return self.rhs.args
        return (self.rhs,)


def _decompose(t: Term, gdefined: frozenset[str], parts: list[Term]) -> Term:
    """Strip maximal gdefined-rooted subterms into `parts`; return the context."""
    if isinstance(t, Var):
        return t
    if t.sym.name in gdefined:
        parts.append(t)
        return App(HOLE, ())
    return App(t.sym, tuple(_decompose(a, gdefined, parts) for a in t.args))


def _make_pairs(trs: TRS, per_rule_compound: bool) -> list[DependencyPair]:
    pairs: list[DependencyPair] = []
    taken = set(trs.signature)
    counter = itertools.count(1)
    n = len(trs.rules)
    for rule in trs.rules:
        lhs = mark_root(rule.lhs)
        parts: list[Term] = []
        if isinstance(rule.rhs, Var):
            # a collapsing rule: the variable itself is the single part
            parts = [rule.rhs]
            context: Term = App(HOLE, ())
        else:
            context = _decompose(rule.rhs, trs.gdefined, parts)
        marked = tuple(mark_root(u) for u in parts)
        index = n + rule.index
        if per_rule_compound or len(marked) != 1:
            name = next(f"c{i}" for i in counter if f"c{i}" not in taken)
            taken.add(name)
            comp = Symbol(name, len(marked), kind="compound")
            pairs.append(DependencyPair(
                lhs, App(comp, marked), index, rule.index,
                compound=comp,
                represented_context=context if per_rule_compound else None,
            ))
        else:
            pairs.append(DependencyPair(lhs, marked[0], index, rule.index))
    return pairs


def widp(trs: TRS) -> list[DependencyPair]:
    """One pair per rule; a compound head only when the part count is not 1."""
    return _make_pairs(trs, per_rule_compound=False)


def tpwidp(trs: TRS) -> list[DependencyPair]:
    """As widp, but every pair owns a compound recording its context.

    Keeping one compound per rule lets the removed context be re-attached
    later, which is what makes sort information carry over (see
    tp_sort_decls).
    """
    return _make_pairs(trs, per_rule_compound=True)


def pair_signature(trs: TRS, pairs: Sequence[DependencyPair]) -> dict[str, Symbol]:
    """The original signature extended with every symbol the pairs mention."""
    sig = dict(trs.signature)
    for p in pairs:
        for side in (p.lhs, p.rhs):
            for u in subterms(side):
                if isinstance(u, App):
                    sig.setdefault(u.sym.name, u.sym)
    return sig


def union_system(trs: TRS, pairs: Sequence[DependencyPair],
                 rules: Optional[Iterable[Rule]] = None) -> TRS:
    """Pairs-as-rules together with `rules` (default: all of trs), for stepping.

    Rule indices stay disjoint because pair numbering continues the rule
    numbering.
    """
    base = trs.rules if rules is None else tuple(rules)
    return TRS(tuple(p.as_rule() for p in pairs) + tuple(base),
               pair_signature(trs, pairs), trs.var_names)


def tp_sort_decls(trs: TRS, pairs: Sequence[DependencyPair]) -> dict[str, SortDecl]:
    """Sort declarations extended to marked and compound symbols.

    Marked symbols keep the declaration of their originals.  A compound's
    argument sorts are the sorts of the holes of its represented context,
    and its result sort is the sort of the originating rule, so pairs made
    by tpwidp stay well-sorted whenever the rules were.
    """
    if not trs.sort_decls:
        return {}
    decls = dict(trs.sort_decls)
    for p in pairs:
        for side in (p.lhs, p.rhs):
            for u in subterms(side):
                if isinstance(u, App) and u.sym.kind == "marked":
                    base = decls.get(u.sym.unmarked.name)
                    if base is not None:
                        decls[u.sym.name] = base
    for p in pairs:
        if p.compound is None or p.represented_context is None:
            continue
        origin = trs.rule(p.origin)
        root_decl = decls.get(origin.root())
        if root_decl is None:
            continue
        hole_sorts: list[str] = []
        complete = True

        def walk(u: Term, expected: str) -> None:
            nonlocal complete
            if isinstance(u, Var):
                return
            if u.sym.name == HOLE.name:
                hole_sorts.append(expected)
                return
            d = decls.get(u.sym.name)
            if d is None:
                complete = False
                return
            for a, es in zip(u.args, d.arg_sorts):
                walk(a, es)

        walk(p.represented_context, root_decl.sort)
        if complete:
            decls[p.compound.name] = SortDecl(tuple(hole_sorts), root_decl.sort)
    return decls


# ---------------------------------------------------------------------------
# Usable rules


def usable_rules(pairs: Sequence[DependencyPair], trs: TRS) -> tuple[Rule, ...]:
    """Rules reachable from pair right-hand sides through the call relation.

    Only gdefined symbols propagate: a defined symbol that the refined
    partition counts as constructor-side never contributes its rules.
    """
    gd = trs.gdefined
    by_root: dict[str, list[Rule]] = {}
    for r in trs.rules:
        by_root.setdefault(r.root(), []).append(r)
    need: set[str] = set()
    queue: list[str] = []
    for p in pairs:
        for name in sorted(functions(p.rhs) & gd):
            if name not in need:
                need.add(name)
                queue.append(name)
    while queue:
        name = queue.pop()
        for r in by_root.get(name, ()):
            for g in sorted(functions(r.rhs) & gd):
                if g not in need:
                    need.add(g)
                    queue.append(g)
    out = [r for r in trs.rules if r.root() in need]
    return tuple(out)


# ---------------------------------------------------------------------------
# Graph estimation


def _icap(trs: TRS, t: Term, fresh: "itertools.count") -> Term:
    """Abstract subterms an innermost step could rewrite by fresh variables.

    Variables stay: in an innermost chain they are instantiated by normal
    forms.  An application is abstracted when, after abstracting its
    arguments, some rule's left-hand side unifies with it.
    """
    if isinstance(t, Var):
        return t
    args = tuple(_icap(trs, a, fresh) for a in t.args)
    cand = App(t.sym, args)
    offset = max_var(cand) + 1
    for rule in trs.rules:
        if unify(cand, rename_vars(rule.lhs, offset)) is not None:
            return Var(next(fresh))
    return cand


def _may_follow(trs: TRS, component: Term, lhs: Term) -> bool:
    if isinstance(component, Var):
        # a variable part can be instantiated by anything reachable
        return True
    fresh = itertools.count(max_var(component) + 1)
    cap = _icap(trs, component, fresh)
    renamed = rename_vars(lhs, max_var(cap) + 1)
    return unify(cap, renamed) is not None


@dataclass(frozen=True)
class DependencyGraph:
    nodes: tuple[DependencyPair, ...]
    edges: frozenset[tuple[int, int]]

    def node(self, index: int) -> DependencyPair:
        for p in self.nodes:
            if p.index == index:
                return p
        raise KeyError(index)

    def successors(self, index: int) -> list[int]:
        return sorted(b for a, b in self.edges if a == index)


def estimate_graph(pairs: Sequence[DependencyPair], trs: TRS) -> DependencyGraph:
    """Over-approximated reachability between pairs.

    There is an edge p -> q when some component of p's right-hand side,
    with rewritable subterms abstracted away, unifies with q's (renamed)
    left-hand side.
    """
    edges: set[tuple[int, int]] = set()
    for p in pairs:
        comps = p.components()
        for q in pairs:
            if any(_may_follow(trs, u, q.lhs) for u in comps):
                edges.add((p.index, q.index))
    return DependencyGraph(tuple(pairs), frozenset(edges))


# ---------------------------------------------------------------------------
# SCCs, congruence classes, and paths


def sccs(g: DependencyGraph) -> list[tuple[int, ...]]:
    """All strongly connected components, ordered by least member index."""
    order = sorted(p.index for p in g.nodes)
    succ: dict[int, list[int]] = {i: [] for i in order}
    for a, b in sorted(g.edges):
        succ[a].append(b)

    index_of: dict[int, int] = {}
    low: dict[int, int] = {}
    on_stack: set[int] = set()
    stack: list[int] = []
    counter = itertools.count()
    out: list[tuple[int, ...]] = []

    def strongconnect(v: int) -> None:
        # iterative Tarjan; frames carry the next successor position
        work = [(v, 0)]
        while work:
            node, pi = work.pop()
            if pi == 0:
                index_of[node] = low[node] = next(counter)
                stack.append(node)
                on_stack.add(node)
            recurse = False
            for j in range(pi, len(succ[node])):
                w = succ[node][j]
                if w not in index_of:
                    work.append((node, j + 1))
                    work.append((w, 0))
                    recurse = True
                    break
                if w in on_stack:
                    low[node] = min(low[node], index_of[w])
            if recurse:
                continue
            if low[node] == index_of[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                out.append(tuple(sorted(comp)))
            if work:
                parent = work[-1][0]
                low[parent] = min(low[parent], low[node])

    for v in order:
        if v not in index_of:
            strongconnect(v)
    return sorted(out, key=lambda c: c[0])


def is_cyclic_class(g: DependencyGraph, cls: tuple[int, ...]) -> bool:
    return len(cls) > 1 or (cls[0], cls[0]) in g.edges


@dataclass(frozen=True)
class CongruencePath:
    """A source-rooted path of congruence classes; the last one is strict."""

    nodes: tuple[tuple[int, ...], ...]

    @property
    def strict_part(self) -> tuple[int, ...]:
        return self.nodes[-1]

    @property
    def weak_part(self) -> tuple[int, ...]:
        return tuple(sorted(i for cls in self.nodes[:-1] for i in cls))


def congruence_paths(g: DependencyGraph) -> list[CongruencePath]:
    """Every prefix of every maximal source-rooted path in the class graph.

    Emitting prefixes too guarantees each class shows up as the strict part
    of some path, which is what the per-path bound maximises over.
    """
    classes = sccs(g)
    cls_of: dict[int, int] = {}
    for ci, cls in enumerate(classes):
        for i in cls:
            cls_of[i] = ci
    succ: dict[int, set[int]] = {ci: set() for ci in range(len(classes))}
    has_incoming: set[int] = set()
    for a, b in g.edges:
        ca, cb = cls_of[a], cls_of[b]
        if ca != cb:
            succ[ca].add(cb)
            has_incoming.add(cb)
    sources = [ci for ci in range(len(classes)) if ci not in has_incoming]

    out: list[CongruencePath] = []
    seen: set[tuple[tuple[int, ...], ...]] = set()

    def emit(path: tuple[int, ...]) -> None:
        key = tuple(classes[ci] for ci in path)
        if key not in seen:
            seen.add(key)
            out.append(CongruencePath(key))

    def dfs(path: tuple[int, ...]) -> None:
        emit(path)
        for nxt in sorted(succ[path[-1]], key=lambda ci: classes[ci][0]):
            dfs(path + (nxt,))

    for src in sources:
        dfs((src,))
    return out


def is_non_duplicating(pairs: Sequence[DependencyPair]) -> bool:
    """No variable occurs more often in a pair's rhs than in its lhs."""
    for p in pairs:
        left = var_multiplicities(p.lhs)
        for v, k in var_multiplicities(p.rhs).items():
            if k > left.get(v, 0):
                return False
    return True


def to_dot(g: DependencyGraph) -> str:
    lines = ["digraph pairs {"]
    for p in g.nodes:
        lines.append(f'  p{p.index} [label="{p.index}"];')
    for a, b in sorted(g.edges):
        lines.append(f"  p{a} -> p{b};")
    lines.append("}")
    return "\n".join(lines)
