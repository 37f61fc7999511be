"""First-order terms over a finite signature.

Terms are immutable and structurally hashed (the hash is computed once at
construction), so they can be used directly as dictionary keys in memoized
search procedures.  Variables are identified by natural numbers; display
names live in the rewrite system that owns them, not in the term itself.
"""

from __future__ import annotations

from typing import Iterable, Iterator, Mapping, Optional, Sequence

# Symbol roles.  "constructor" and "defined" come from the rule set,
# "marked" symbols name recursion entry points, "compound" symbols group
# the pieces of a split right-hand side, and "auxiliary" covers reserved
# constants such as the hole filler and the unit used by sequence orders.
KINDS = ("constructor", "defined", "marked", "compound", "auxiliary")

BOTTOM_NAME = "_bot"
BULLET_NAME = "@"
SEQ_NAME = "~seq"  # internal; sequences render as [a b c]


class Symbol:
    """A function symbol: a name with a fixed arity and a role.

    Two symbols are equal when their names and arities agree; the role is
    metadata (it never distinguishes two symbols of the same name within
    one signature).
    """

    __slots__ = ("name", "arity", "kind", "unmarked", "arg_sorts", "sort")

    def __init__(
        self,
        name: str,
        arity: int,
        kind: str = "constructor",
        unmarked: "Symbol | None" = None,
        arg_sorts: tuple[str, ...] | None = None,
        sort: str | None = None,
    ):
        if kind not in KINDS:
            raise ValueError(f"unknown symbol kind {kind!r}")
        if kind == "marked" and (unmarked is None or unmarked.arity != arity):
            raise ValueError("marked symbol needs an unmarked original of equal arity")
        self.name = name
        self.arity = arity
        self.kind = kind
        self.unmarked = unmarked
        self.arg_sorts = arg_sorts
        self.sort = sort

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, Symbol):
            return NotImplemented
        return self.name == other.name and self.arity == other.arity

    def __hash__(self) -> int:
        return hash((self.name, self.arity))

    def __repr__(self) -> str:
        return f"Symbol({self.name!r}/{self.arity}, {self.kind})"


class Term:
    __slots__ = ("_hash",)

    def __hash__(self) -> int:
        return self._hash  # type: ignore[attr-defined]


class Var(Term):
    """A variable, identified by a natural number."""

    __slots__ = ("id",)

    def __init__(self, id: int):
        self.id = id
        self._hash = hash(("var", id))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        return isinstance(other, Var) and other.id == self.id

    __hash__ = Term.__hash__

    def __repr__(self) -> str:
        return f"Var({self.id})"


class App(Term):
    """An application of a symbol to exactly `symbol.arity` arguments."""

    __slots__ = ("sym", "args")

    def __init__(self, sym: Symbol, args: Sequence[Term] = ()):
        args = tuple(args)
        if len(args) != sym.arity:
            raise ValueError(f"{sym.name} expects {sym.arity} arguments, got {len(args)}")
        self.sym = sym
        self.args = args
        self._hash = hash((sym.name, sym.arity, args))

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App):
            return False
        if self._hash != other._hash:
            return False
        return self.sym == other.sym and self.args == other.args

    __hash__ = Term.__hash__

    def __repr__(self) -> str:
        return f"App({render_term(self)})"


def app(sym: Symbol, *args: Term) -> App:
    return App(sym, args)


# ---------------------------------------------------------------------------
# Traversal and measures


def subterms(t: Term) -> Iterator[Term]:
    """All subterms of t, preorder, including t itself."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(reversed(u.args))


def proper_subterms(t: Term) -> Iterator[Term]:
    it = subterms(t)
    next(it)
    return it


def is_subterm(s: Term, t: Term) -> bool:
    """True iff s occurs in t (t itself included)."""
    return any(u == s for u in subterms(t))


def variables(t: Term) -> set[int]:
    return {u.id for u in subterms(t) if isinstance(u, Var)}


def var_multiplicities(t: Term) -> dict[int, int]:
    out: dict[int, int] = {}
    for u in subterms(t):
        if isinstance(u, Var):
            out[u.id] = out.get(u.id, 0) + 1
    return out


def functions(t: Term) -> set[str]:
    """Names of the function symbols occurring in t."""
    return {u.sym.name for u in subterms(t) if isinstance(u, App)}


def symbol_multiplicities(t: Term) -> dict[str, int]:
    out: dict[str, int] = {}
    for u in subterms(t):
        if isinstance(u, App):
            out[u.sym.name] = out.get(u.sym.name, 0) + 1
    return out


def is_ground(t: Term) -> bool:
    return not any(isinstance(u, Var) for u in subterms(t))


def size(t: Term) -> int:
    """Number of symbol and variable occurrences."""
    return sum(1 for _ in subterms(t))


def depth(t: Term) -> int:
    if isinstance(t, Var) or not t.args:  # type: ignore[union-attr]
        return 1
    return 1 + max(depth(a) for a in t.args)  # type: ignore[union-attr]


def width(t: Term) -> int:
    """max of the argument count and the widths of the arguments; 1 at leaves."""
    if isinstance(t, Var):
        return 1
    if not t.args:
        return 1
    return max(len(t.args), max(width(a) for a in t.args))


def bnorm(t: Term) -> int:
    """Norm that grows with both depth and argument count.

    bnorm(x) = 1 for variables; bnorm(f(t1..tn)) = 1 + max(n, bnorm(ti)),
    where the max over zero arguments is 0.
    """
    if isinstance(t, Var):
        return 1
    if not t.args:
        return 1
    return 1 + max(len(t.args), max(bnorm(a) for a in t.args))


# ---------------------------------------------------------------------------
# Substitution, matching, unification

Subst = Mapping[int, Term]


def apply_subst(t: Term, sigma: Subst) -> Term:
    if isinstance(t, Var):
        return sigma.get(t.id, t)
    if not t.args:
        return t
    return App(t.sym, tuple(apply_subst(a, sigma) for a in t.args))


def match(pattern: Term, subject: Term) -> Optional[dict[int, Term]]:
    """A substitution sigma with pattern*sigma == subject, or None."""
    sigma: dict[int, Term] = {}
    stack = [(pattern, subject)]
    while stack:
        p, s = stack.pop()
        if isinstance(p, Var):
            bound = sigma.get(p.id)
            if bound is None:
                sigma[p.id] = s
            elif bound != s:
                return None
        else:
            if not isinstance(s, App) or s.sym != p.sym:
                return None
            stack.extend(zip(p.args, s.args))
    return sigma


def rename_vars(t: Term, offset: int) -> Term:
    """Shift every variable id by offset (used to keep unification sides apart)."""
    if isinstance(t, Var):
        return Var(t.id + offset)
    if not t.args:
        return t
    return App(t.sym, tuple(rename_vars(a, offset) for a in t.args))


def max_var(t: Term) -> int:
    vs = variables(t)
    return max(vs) if vs else -1


def _walk(t: Term, sigma: dict[int, Term]) -> Term:
    while isinstance(t, Var) and t.id in sigma:
        t = sigma[t.id]
    return t


def _occurs(vid: int, t: Term, sigma: dict[int, Term]) -> bool:
    t = _walk(t, sigma)
    if isinstance(t, Var):
        return t.id == vid
    return any(_occurs(vid, a, sigma) for a in t.args)


def unify(s: Term, t: Term) -> Optional[dict[int, Term]]:
    """Most general unifier of s and t (triangular form), or None.

    The caller is responsible for renaming apart; variable ids are shared.
    """
    sigma: dict[int, Term] = {}
    stack = [(s, t)]
    while stack:
        a, b = stack.pop()
        a, b = _walk(a, sigma), _walk(b, sigma)
        if a == b:
            continue
        if isinstance(a, Var):
            if _occurs(a.id, b, sigma):
                return None
            sigma[a.id] = b
        elif isinstance(b, Var):
            if _occurs(b.id, a, sigma):
                return None
            sigma[b.id] = a
        else:
            if a.sym != b.sym:
                return None
            stack.extend(zip(a.args, b.args))
    return sigma


# ---------------------------------------------------------------------------
# Rendering


def render_term(t: Term, var_names: Sequence[str] | Mapping[int, str] | None = None) -> str:
    """Prefix notation: f(a,b); sequences as [a b]; variables by name or x<i>."""

    def vname(i: int) -> str:
        if var_names is None:
            return f"x{i}"
        if isinstance(var_names, Mapping):
            return var_names.get(i, f"x{i}")
        return var_names[i] if 0 <= i < len(var_names) else f"x{i}"

    parts: list[str] = []

    def go(u: Term) -> None:
        if isinstance(u, Var):
            parts.append(vname(u.id))
            return
        if u.sym.name == SEQ_NAME:
            parts.append("[")
            for k, a in enumerate(u.args):
                if k:
                    parts.append(" ")
                go(a)
            parts.append("]")
            return
        parts.append(u.sym.name)
        if u.args:
            parts.append("(")
            for k, a in enumerate(u.args):
                if k:
                    parts.append(",")
                go(a)
            parts.append(")")

    go(t)
    return "".join(parts)


def ground_instances(vars_needed: Iterable[int], fillers: Sequence[Term]) -> Iterator[dict[int, Term]]:
    """All substitutions mapping the given variables into the filler terms."""
    ids = sorted(set(vars_needed))
    if not ids:
        yield {}
        return
    counters = [0] * len(ids)
    n = len(fillers)
    while True:
        yield {vid: fillers[c] for vid, c in zip(ids, counters)}
        i = 0
        while i < len(ids):
            counters[i] += 1
            if counters[i] < n:
                break
            counters[i] = 0
            i += 1
        else:
            return
