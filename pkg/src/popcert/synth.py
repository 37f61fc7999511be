"""Parameter synthesis for the path order, by propositional search.

encode() turns strict/weak orientation obligations over a finite signature
into CNF.  Rank atoms spell out a total quasi-precedence kept admissible
against the guard line, safe atoms choose the safe argument positions of
guarded symbols, and selector atoms choose a restricted argument filtering
per symbol: identity, collapse to one argument, or drop one argument.  One
derivation atom per (left subterm, right subterm, relation) is tied to the
defining clauses of the order, so any model decodes to parameters orienting
every obligation.  decode() reads a model back and re-verifies it against
the actual order before trusting it; solve() runs the internal engine or an
external solver over the CNF text format; search_backtracking() enumerates
the same parameter space exhaustively and serves as the reference answer.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional, Sequence

from .orders import (
    ArgumentFiltering,
    OrderParams,
    PopOrder,
    Precedence,
    SafeMapping,
    apply_filtering,
    orient,
)
from .sat import ExternalSolver, SolverError, solve_cnf, to_dimacs
from .terms import App, Symbol, Term, Var, subterms, variables
from .trs import Rule


def _syms_in(t: Term):
    for u in subterms(t):
        if isinstance(u, App):
            yield u.sym


class EncodingCapacityError(RuntimeError):
    pass


class DecodeError(RuntimeError):
    pass


class SearchSpaceError(RuntimeError):
    pass


ENV_SOLVER = "POPCERT_SAT_SOLVER"


# ---------------------------------------------------------------------------
# Obligation sets


@dataclass(frozen=True)
class ObligationSet:
    """Orientation problem: strict pairs, weak pairs, and guard policy.

    The guard set is derived from the obligations themselves: left-hand root
    symbols, thinned to those never occurring below a left-hand root when
    refined_partition is set, joined with every marked symbol in sight when
    marked_guard is set.  safe_filtering pins compound symbols to the
    identity filtering; identity_filtering pins every symbol (plain-order
    search, no filtering at all).
    """

    strict: tuple[Rule, ...] = ()
    weak: tuple[Rule, ...] = ()
    signature: Mapping[str, Symbol] = field(default_factory=dict)
    safe_filtering: bool = False
    marked_guard: bool = True
    refined_partition: bool = True
    identity_filtering: bool = False

    def __post_init__(self):
        object.__setattr__(self, "strict", tuple(self.strict))
        object.__setattr__(self, "weak", tuple(self.weak))
        self.symbols()  # arity consistency check

    def obligations(self) -> tuple[Rule, ...]:
        return self.strict + self.weak

    def symbols(self) -> dict[str, Symbol]:
        """All symbols occurring in the obligations, name to symbol."""
        out: dict[str, Symbol] = {}
        for name, sym in self.signature.items():
            out[name] = sym
        for ob in self.obligations():
            for side in (ob.lhs, ob.rhs):
                for sym in _syms_in(side):
                    before = out.get(sym.name)
                    if before is not None and before.arity != sym.arity:
                        raise ValueError(
                            f"symbol {sym.name} used with arities "
                            f"{before.arity} and {sym.arity}"
                        )
                    if before is None:
                        out[sym.name] = sym
        return out

    def occurring(self) -> dict[str, Symbol]:
        """Symbols actually appearing in obligation terms."""
        out: dict[str, Symbol] = {}
        for ob in self.obligations():
            for side in (ob.lhs, ob.rhs):
                for sym in _syms_in(side):
                    out.setdefault(sym.name, sym)
        return out

    def guard(self) -> frozenset[str]:
        occ = self.occurring()
        roots = {
            ob.lhs.sym.name for ob in self.obligations() if isinstance(ob.lhs, App)
        }
        if self.refined_partition:
            inner: set[str] = set()
            for ob in self.obligations():
                if isinstance(ob.lhs, App):
                    for arg in ob.lhs.args:
                        inner.update(sym.name for sym in _syms_in(arg))
            roots -= inner
        if self.marked_guard:
            roots.update(n for n, sym in occ.items() if sym.kind == "marked")
        return frozenset(roots & set(occ))


@dataclass
class EncodingArtifact:
    """CNF plus the atom dictionary needed to read a model back."""

    num_vars: int
    clauses: tuple[tuple[int, ...], ...]
    atoms: dict[tuple, int]
    obls: ObligationSet
    guard: frozenset[str]
    names: tuple[str, ...]
    symbols: dict[str, Symbol]

    def dimacs(self) -> str:
        return to_dimacs(self.num_vars, self.clauses)


# ---------------------------------------------------------------------------
# The encoder


class _Encoder:
    def __init__(self, obls: ObligationSet, max_vars: int, max_clauses: int):
        self.obls = obls
        self.syms = obls.occurring()
        self.names = tuple(sorted(self.syms))
        self.guard = obls.guard()
        self.max_vars = max_vars
        self.max_clauses = max_clauses
        self.nvars = 0
        self.clauses: list[tuple[int, ...]] = []
        self.atoms: dict[tuple, int] = {}
        self.true_lit = self.fresh()
        self.emit([self.true_lit])

    # -- plumbing

    def fresh(self) -> int:
        self.nvars += 1
        if self.nvars > self.max_vars:
            raise EncodingCapacityError(f"variable budget {self.max_vars} exceeded")
        return self.nvars

    def emit(self, lits: Iterable[int]) -> None:
        self.clauses.append(tuple(lits))
        if len(self.clauses) > self.max_clauses:
            raise EncodingCapacityError(f"clause budget {self.max_clauses} exceeded")

    def atom(self, key: tuple) -> int:
        got = self.atoms.get(key)
        if got is None:
            got = self.fresh()
            self.atoms[key] = got
        return got

    def conj(self, lits: Sequence[Optional[int]]) -> Optional[int]:
        """Aux literal implying every conjunct; None when a conjunct is dead.

        Conjuncts equal to the constant-true literal are elided, and a
        one-literal conjunction is returned as that literal itself.
        """
        out = []
        for l in lits:
            if l is None or l == -self.true_lit:
                return None
            if l == self.true_lit:
                continue
            out.append(l)
        if not out:
            return self.true_lit
        if len(out) == 1:
            return out[0]
        c = self.fresh()
        for l in out:
            self.emit([-c, l])
        return c

    # -- parameter atoms

    def gt_lit(self, f: str, g: str) -> Optional[int]:
        if f == g:
            return None  # never strictly above itself
        return self.atom(("gt", f, g))

    def eq_lit(self, f: str, g: str) -> int:
        if f == g:
            return self.true_lit
        a, b = min(f, g), max(f, g)
        return self.atom(("eq", a, b))

    def safe_lit(self, f: str, i: int) -> int:
        return self.atom(("safe", f, i))

    def id_lit(self, f: str) -> int:
        return self.atom(("id", f))

    def col_lit(self, f: str, i: int) -> int:
        return self.atom(("col", f, i))

    def drop_lit(self, f: str, i: int) -> int:
        return self.atom(("drop", f, i))

    def nc_lit(self, sym: Symbol) -> int:
        """Root-not-collapsed literal (constant true for nullary symbols)."""
        if sym.arity == 0:
            return self.true_lit
        return self.atom(("ncol", sym.name))

    def kept_lit(self, sym: Symbol, i: int) -> int:
        """Position i survives a non-collapsing filtering of sym."""
        return -self.drop_lit(sym.name, i)

    # -- global parameter constraints

    def build_parameter_space(self) -> None:
        names = self.names
        for f, g in itertools.combinations(names, 2):
            fg, gf, eq = self.gt_lit(f, g), self.gt_lit(g, f), self.eq_lit(f, g)
            self.emit([fg, gf, eq])
            self.emit([-fg, -gf])
            self.emit([-fg, -eq])
            self.emit([-gf, -eq])
        for a, b, c in itertools.permutations(names, 3):
            gab, gbc, gac = self.gt_lit(a, b), self.gt_lit(b, c), self.gt_lit(a, c)
            eab, ebc, eac = self.eq_lit(a, b), self.eq_lit(b, c), self.eq_lit(a, c)
            self.emit([-gab, -gbc, gac])
            self.emit([-gab, -ebc, gac])
            self.emit([-eab, -gbc, gac])
            self.emit([-eab, -ebc, eac])
        for u in names:
            if u in self.guard:
                continue
            for g in names:
                if g not in self.guard:
                    continue
                self.emit([-self.gt_lit(u, g)])
                self.emit([-self.eq_lit(u, g)])
        for name in names:
            sym = self.syms[name]
            if name not in self.guard:
                for i in range(1, sym.arity + 1):
                    self.emit([self.safe_lit(name, i)])
            else:
                for i in range(1, sym.arity + 1):
                    self.safe_lit(name, i)  # materialize the atom
            if sym.arity == 0:
                continue
            sels = [self.id_lit(name)]
            sels += [self.col_lit(name, i) for i in range(1, sym.arity + 1)]
            sels += [self.drop_lit(name, i) for i in range(1, sym.arity + 1)]
            self.emit(sels)
            for x, y in itertools.combinations(sels, 2):
                self.emit([-x, -y])
            nc = self.nc_lit(sym)
            cols = [self.col_lit(name, i) for i in range(1, sym.arity + 1)]
            for cl in cols:
                self.emit([-nc, -cl])
            self.emit([nc] + cols)
            if self.obls.identity_filtering or (
                self.obls.safe_filtering and sym.kind == "compound"
            ):
                self.emit([self.id_lit(name)])

    # -- judgments

    def jud(self, rel: str, s: Term, t: Term) -> int:
        key = (rel, s, t)
        got = self.atoms.get(key)
        if got is not None:
            return got
        v = self.fresh()
        self.atoms[key] = v
        cases = self._body(rel, s, t)
        self.emit([-v] + [c for c in cases if c is not None])
        return v

    def _body(self, rel: str, s: Term, t: Term) -> list[Optional[int]]:
        cases: list[Optional[int]] = []
        if isinstance(s, App) and rel != "psub":
            f = s.sym
            for i in range(1, f.arity + 1):
                cases.append(
                    self.conj([self.col_lit(f.name, i), self.jud(rel, s.args[i - 1], t)])
                )
        if isinstance(t, App):
            g = t.sym
            for j in range(1, g.arity + 1):
                cases.append(
                    self.conj([self.col_lit(g.name, j), self.jud(rel, s, t.args[j - 1])])
                )
        core = {
            "eqs": self._core_eqs,
            "eqt": self._core_eqt,
            "psub": self._core_psub,
            "gsq": self._core_gsq,
            "gpop": self._core_gpop,
        }[rel]
        cases.extend(core(s, t))
        return cases

    # equivalence up to safe-class-preserving argument permutations
    def _core_eqs(self, s: Term, t: Term) -> list[Optional[int]]:
        if isinstance(s, Var) or isinstance(t, Var):
            if isinstance(s, Var) and isinstance(t, Var) and s == t:
                return [self.true_lit]
            return []
        f, g = s.sym, t.sym
        base = [self.nc_lit(f), self.nc_lit(g), self.eq_lit(f.name, g.name)]
        c = self.fresh()
        for l in base:
            if l != self.true_lit:
                self.emit([-c, l])
        self._bijection_block(c, s, t)
        return [c]

    def _bijection_block(self, c: int, s: App, t: App) -> None:
        f, g = s.sym, t.sym
        n, m = f.arity, g.arity
        B = {
            (i, j): self.fresh()
            for i in range(1, n + 1)
            for j in range(1, m + 1)
        }
        for i in range(1, n + 1):
            self.emit([-c, self.drop_lit(f.name, i)] + [B[i, j] for j in range(1, m + 1)])
        for j in range(1, m + 1):
            self.emit([-c, self.drop_lit(g.name, j)] + [B[i, j] for i in range(1, n + 1)])
        for (i, j), b in B.items():
            self.emit([-b, self.kept_lit(f, i)])
            self.emit([-b, self.kept_lit(g, j)])
            self.emit([-b, self.jud("eqs", s.args[i - 1], t.args[j - 1])])
            self.emit([-b, -self.safe_lit(f.name, i), self.safe_lit(g.name, j)])
            self.emit([-b, self.safe_lit(f.name, i), -self.safe_lit(g.name, j)])
        for i in range(1, n + 1):
            for j1, j2 in itertools.combinations(range(1, m + 1), 2):
                self.emit([-B[i, j1], -B[i, j2]])
        for j in range(1, m + 1):
            for i1, i2 in itertools.combinations(range(1, n + 1), 2):
                self.emit([-B[i1, j], -B[i2, j]])

    # syntactic equality of the filtered images
    def _core_eqt(self, s: Term, t: Term) -> list[Optional[int]]:
        if isinstance(s, Var) or isinstance(t, Var):
            if isinstance(s, Var) and isinstance(t, Var) and s == t:
                return [self.true_lit]
            return []
        f, g = s.sym, t.sym
        if f.name != g.name:
            return []
        n = f.arity
        if n == 0:
            return [self.true_lit]
        cases: list[Optional[int]] = []
        cases.append(
            self.conj(
                [self.id_lit(f.name)]
                + [self.jud("eqt", s.args[i - 1], t.args[i - 1]) for i in range(1, n + 1)]
            )
        )
        for d in range(1, n + 1):
            cases.append(
                self.conj(
                    [self.drop_lit(f.name, d)]
                    + [
                        self.jud("eqt", s.args[i - 1], t.args[i - 1])
                        for i in range(1, n + 1)
                        if i != d
                    ]
                )
            )
        return cases

    # proper-subterm relation between the filtered images
    def _core_psub(self, u: Term, s: Term) -> list[Optional[int]]:
        if not isinstance(s, App):
            return []
        f = s.sym
        cases: list[Optional[int]] = []
        nc = self.nc_lit(f)
        for i in range(1, f.arity + 1):
            kept = self.kept_lit(f, i)
            si = s.args[i - 1]
            cases.append(self.conj([nc, kept, self.jud("eqt", u, si)]))
            cases.append(self.conj([nc, kept, self.jud("psub", u, si)]))
        return cases

    def _core_gsq(self, s: Term, t: Term) -> list[Optional[int]]:
        if not isinstance(s, App):
            return []
        f = s.sym
        guarded = f.name in self.guard
        nc = self.nc_lit(f)
        cases: list[Optional[int]] = []
        for i in range(1, f.arity + 1):
            lits = [nc, self.kept_lit(f, i)]
            if guarded:
                lits.append(-self.safe_lit(f.name, i))
            si = s.args[i - 1]
            cases.append(self.conj(lits + [self.jud("gsq", si, t)]))
            cases.append(self.conj(lits + [self.jud("eqs", si, t)]))
        if guarded and isinstance(t, App) and t.sym.name != f.name:
            g = t.sym
            c = self.fresh()
            for l in (nc, self.nc_lit(g), self.gt_lit(f.name, g.name)):
                if l != self.true_lit:
                    self.emit([-c, l])
            for j in range(1, g.arity + 1):
                self.emit(
                    [-c, self.drop_lit(g.name, j), self.jud("gsq", s, t.args[j - 1])]
                )
            cases.append(c)
        return cases

    def _core_gpop(self, s: Term, t: Term) -> list[Optional[int]]:
        if not isinstance(s, App):
            return []
        f = s.sym
        nc = self.nc_lit(f)
        cases: list[Optional[int]] = [self.jud("gsq", s, t)]
        for i in range(1, f.arity + 1):
            si = s.args[i - 1]
            lits = [nc, self.kept_lit(f, i)]
            cases.append(self.conj(lits + [self.jud("gpop", si, t)]))
            cases.append(self.conj(lits + [self.jud("eqs", si, t)]))
        if isinstance(t, App):
            g = t.sym
            if f.name in self.guard and f.name != g.name:
                cases.extend(self._gpop_push_cases(s, t))
            cases.append(self._gpop_multiset_case(s, t))
        return cases

    def _gpop_push_cases(self, s: App, t: App) -> list[Optional[int]]:
        """One case per landing position on the smaller-root right side."""
        f, g = s.sym, t.sym
        alts: dict[int, Optional[int]] = {}
        for j in range(1, g.arity + 1):
            alts[j] = self.conj(
                [self.safe_lit(g.name, j), self.jud("psub", t.args[j - 1], s)]
            )
        out: list[Optional[int]] = []
        for j0 in range(1, g.arity + 1):
            c = self.fresh()
            base = [
                self.nc_lit(f),
                self.nc_lit(g),
                self.gt_lit(f.name, g.name),
                self.kept_lit(g, j0),
                self.safe_lit(g.name, j0),
                self.jud("gpop", s, t.args[j0 - 1]),
            ]
            for l in base:
                if l != self.true_lit:
                    self.emit([-c, l])
            for j in range(1, g.arity + 1):
                if j == j0:
                    continue
                cl = [-c, self.drop_lit(g.name, j), self.jud("gsq", s, t.args[j - 1])]
                if alts[j] is not None:
                    cl.append(alts[j])
                self.emit(cl)
            out.append(c)
        return out

    def _gpop_multiset_case(self, s: App, t: App) -> Optional[int]:
        f, g = s.sym, t.sym
        eq = self.eq_lit(f.name, g.name)
        c = self.fresh()
        for l in (self.nc_lit(f), self.nc_lit(g), eq):
            if l != self.true_lit:
                self.emit([-c, l])
        self._cover_block(c, s, t, safe_side=False, strict=True)
        self._cover_block(c, s, t, safe_side=True, strict=False)
        return c

    def _cover_block(self, c: int, s: App, t: App, safe_side: bool, strict: bool) -> None:
        """Multiset comparison over one argument class, guarded by case c.

        Every kept right argument of the class must be matched to an
        equivalent kept left argument of the class (injectively) or strictly
        dominated by an unmatched one; strict additionally demands a left
        argument that stays unmatched.
        """
        f, g = s.sym, t.sym
        n, m = f.arity, g.arity

        def cls_s(i: int) -> int:
            v = self.safe_lit(f.name, i)
            return v if safe_side else -v

        def cls_t(j: int) -> int:
            v = self.safe_lit(g.name, j)
            return v if safe_side else -v

        M = {(i, j): self.fresh() for i in range(1, n + 1) for j in range(1, m + 1)}
        MT = {i: self.fresh() for i in range(1, n + 1)}
        D = {(i, j): self.fresh() for i in range(1, n + 1) for j in range(1, m + 1)}
        for (i, j), b in M.items():
            self.emit([-b, self.kept_lit(f, i)])
            self.emit([-b, cls_s(i)])
            self.emit([-b, self.kept_lit(g, j)])
            self.emit([-b, cls_t(j)])
            self.emit([-b, self.jud("eqs", s.args[i - 1], t.args[j - 1])])
            self.emit([-b, MT[i]])
        for (i, j), b in D.items():
            self.emit([-b, self.kept_lit(f, i)])
            self.emit([-b, cls_s(i)])
            self.emit([-b, self.jud("gpop", s.args[i - 1], t.args[j - 1])])
            self.emit([-b, -MT[i]])
        for i in range(1, n + 1):
            for j1, j2 in itertools.combinations(range(1, m + 1), 2):
                self.emit([-M[i, j1], -M[i, j2]])
        for j in range(1, m + 1):
            for i1, i2 in itertools.combinations(range(1, n + 1), 2):
                self.emit([-M[i1, j], -M[i2, j]])
        for j in range(1, m + 1):
            cl = [-c, self.drop_lit(g.name, j), -cls_t(j)]
            cl += [M[i, j] for i in range(1, n + 1)]
            cl += [D[i, j] for i in range(1, n + 1)]
            self.emit(cl)
        if strict:
            UN = {i: self.fresh() for i in range(1, n + 1)}
            for i, u in UN.items():
                self.emit([-u, self.kept_lit(f, i)])
                self.emit([-u, cls_s(i)])
                self.emit([-u, -MT[i]])
            self.emit([-c] + list(UN.values()))

    # -- top level

    def assert_obligations(self) -> None:
        for ob in self.obls.strict:
            self.emit([self.jud("gpop", ob.lhs, ob.rhs)])
        for ob in self.obls.weak:
            self.emit([self.jud("gpop", ob.lhs, ob.rhs), self.jud("eqs", ob.lhs, ob.rhs)])


def encode(
    obls: ObligationSet, max_vars: int = 200_000, max_clauses: int = 2_000_000
) -> EncodingArtifact:
    enc = _Encoder(obls, max_vars, max_clauses)
    enc.build_parameter_space()
    enc.assert_obligations()
    return EncodingArtifact(
        num_vars=enc.nvars,
        clauses=tuple(enc.clauses),
        atoms=dict(enc.atoms),
        obls=obls,
        guard=enc.guard,
        names=enc.names,
        symbols=dict(enc.syms),
    )


# ---------------------------------------------------------------------------
# Solving and decoding


def solve(
    artifact: EncodingArtifact,
    backend: str = "internal",
    solver_path: Optional[str] = None,
    timeout_s: Optional[float] = None,
) -> Optional[list[int]]:
    """Run a backend over the CNF; a full signed model, or None if unsat."""
    if backend == "internal":
        return solve_cnf(artifact.num_vars, artifact.clauses)
    if backend == "external":
        path = solver_path or os.environ.get(ENV_SOLVER)
        if not path:
            raise SolverError(
                f"external backend needs a solver path (flag or ${ENV_SOLVER})"
            )
        return ExternalSolver(path).solve(
            artifact.num_vars, artifact.clauses, timeout_s=timeout_s
        )
    raise ValueError(f"unknown backend {backend!r}")


def decode(artifact: EncodingArtifact, model: Sequence[int]) -> OrderParams:
    """Model to parameters, with a mandatory re-verification pass."""
    tv = {abs(l): l > 0 for l in model}

    def holds(key: tuple) -> bool:
        var = artifact.atoms.get(key)
        return bool(var) and tv.get(var, False)

    names = artifact.names
    parent = {n: n for n in names}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for f, g in itertools.combinations(names, 2):
        if holds(("eq", f, g)):
            parent[find(f)] = find(g)
    for f, g in itertools.permutations(names, 2):
        if holds(("gt", f, g)) and find(f) == find(g):
            raise DecodeError(f"rank atoms order {f} above its own class mate {g}")
    reps = sorted({find(n) for n in names})
    below: dict[str, int] = {}
    for a in reps:
        cnt = 0
        for b in reps:
            if a == b:
                continue
            ab, ba = holds(("gt", a, b)), holds(("gt", b, a))
            if ab == ba:
                raise DecodeError(f"rank atoms leave {a} and {b} unordered")
            if ab:
                cnt += 1
        below[a] = cnt
    if sorted(below.values()) != list(range(len(reps))):
        raise DecodeError("rank atoms do not form a linear class order")
    rank = {n: below[find(n)] for n in names}

    safe: dict[str, tuple[int, ...]] = {}
    pi: dict[str, int | tuple[int, ...]] = {}
    for name in names:
        sym = artifact.symbols[name]
        if sym.arity == 0:
            continue
        safe[name] = tuple(
            i for i in range(1, sym.arity + 1) if holds(("safe", name, i))
        )
        if holds(("id", name)):
            continue
        col = [i for i in range(1, sym.arity + 1) if holds(("col", name, i))]
        drop = [i for i in range(1, sym.arity + 1) if holds(("drop", name, i))]
        if len(col) == 1 and not drop:
            pi[name] = col[0]
        elif len(drop) == 1 and not col:
            pi[name] = tuple(i for i in range(1, sym.arity + 1) if i != drop[0])
        else:
            raise DecodeError(f"filtering selectors for {name} are inconsistent")

    params = OrderParams(
        Precedence(rank), SafeMapping(safe), ArgumentFiltering(pi), artifact.guard
    )
    rep_s = orient(artifact.obls.strict, params, mode="strict")
    rep_w = orient(artifact.obls.weak, params, mode="weak")
    if not (rep_s.ok and rep_w.ok):
        raise DecodeError(
            "decoded parameters fail re-verification on obligations "
            f"{rep_s.failures() + rep_w.failures()}"
        )
    return params


def synthesize(
    obls: ObligationSet,
    backend: str = "internal",
    solver_path: Optional[str] = None,
    timeout_s: Optional[float] = None,
    max_vars: int = 200_000,
    max_clauses: int = 2_000_000,
) -> Optional[OrderParams]:
    """Encode, solve, decode; None when no parameters exist in the space."""
    artifact = encode(obls, max_vars=max_vars, max_clauses=max_clauses)
    model = solve(artifact, backend=backend, solver_path=solver_path, timeout_s=timeout_s)
    if model is None:
        return None
    return decode(artifact, model)


# ---------------------------------------------------------------------------
# Reference search


def _rank_vectors(k: int):
    """Contiguous rank assignments for k items, coarsest first."""
    if k == 0:
        yield ()
        return
    for vec in itertools.product(range(k), repeat=k):
        top = max(vec)
        if set(vec) == set(range(top + 1)):
            yield vec


def _filter_choices(sym: Symbol, safe_filtering: bool, identity_only: bool = False) -> list:
    if identity_only or sym.arity == 0 or (safe_filtering and sym.kind == "compound"):
        return [None]
    out: list = [None]
    out += list(range(1, sym.arity + 1))
    out += [
        tuple(i for i in range(1, sym.arity + 1) if i != d)
        for d in range(1, sym.arity + 1)
    ]
    return out


def _subsets(arity: int) -> list[tuple[int, ...]]:
    return [
        tuple(i for i in range(1, arity + 1) if mask >> (i - 1) & 1)
        for mask in range(1 << arity)
    ]


def search_backtracking(obls: ObligationSet, max_symbols: int = 8) -> Optional[OrderParams]:
    """Exhaustive search over the same restricted parameter space.

    Deterministic enumeration: filterings in per-symbol order (identity,
    collapses, drops), then safe sets smallest-first, then precedences
    coarsest-first with the guard block strictly on top.  First hit wins.
    A filtering dies early when some strict obligation ends up with equal
    or non-application left sides, or a right side whose variables escape
    the left; symbols erased by the filtering are pinned instead of
    enumerated.
    """
    syms = obls.occurring()
    if len(syms) > max_symbols:
        raise SearchSpaceError(
            f"{len(syms)} symbols exceed the search cap of {max_symbols}"
        )
    guard = obls.guard()
    names = sorted(syms)
    choice_lists = [
        _filter_choices(syms[n], obls.safe_filtering, obls.identity_filtering)
        for n in names
    ]
    strict, weak = obls.strict, obls.weak
    vec_cache: dict[int, list[tuple[int, ...]]] = {}
    for combo in itertools.product(*choice_lists):
        pi = {n: entry for n, entry in zip(names, combo) if entry is not None}
        filtering = ArgumentFiltering(pi)
        fs = [
            (apply_filtering(filtering, ob.lhs), apply_filtering(filtering, ob.rhs))
            for ob in strict
        ]
        fw = [
            (apply_filtering(filtering, ob.lhs), apply_filtering(filtering, ob.rhs))
            for ob in weak
        ]
        if any(
            not isinstance(ls, App) or ls == rs or not variables(rs) <= variables(ls)
            for ls, rs in fs
        ):
            continue
        if any(
            not variables(rs) <= variables(ls) or (isinstance(ls, Var) and ls != rs)
            for ls, rs in fw
        ):
            continue
        occ_f: set[str] = set()
        for ls, rs in fs + fw:
            for side in (ls, rs):
                occ_f.update(u.sym.name for u in subterms(side) if isinstance(u, App))
        g_occ = [n for n in names if n in guard and n in occ_f]
        g_gone = [n for n in names if n in guard and n not in occ_f]
        safe_lists = [_subsets(syms[n].arity) for n in g_occ]
        if len(g_occ) not in vec_cache:
            vec_cache[len(g_occ)] = list(_rank_vectors(len(g_occ)))
        rank_vecs = vec_cache[len(g_occ)]
        for safes in itertools.product(*safe_lists):
            safe_map = SafeMapping(
                {**dict(zip(g_occ, safes)), **{n: () for n in g_gone}}
            )
            adapted = OrderParams(
                Precedence({}), safe_map, filtering, guard
            ).adapted_safe()
            for vec in rank_vecs:
                rank = {n: 0 for n in names}
                for n in g_gone:
                    rank[n] = 1
                for n, r in zip(g_occ, vec):
                    rank[n] = 1 + r
                prec = Precedence(rank)
                order = PopOrder(prec, adapted, guard)
                ok = all(order.gpop(ls, rs) for ls, rs in fs) and all(
                    order.gpop(ls, rs) or order.equiv_safe(ls, rs) for ls, rs in fw
                )
                if ok:
                    return OrderParams(prec, safe_map, filtering, guard)
    return None
