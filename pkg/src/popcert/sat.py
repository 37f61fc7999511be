"""A small deterministic propositional satisfiability engine.

Clauses are lists of nonzero signed integers (DIMACS convention).  The
internal solver is a conflict-driven clause learner with two watched
literals, first-implication-point learning, and an activity heuristic with
fixed tie-breaking, so identical inputs always yield identical models.  An
external solver can be bridged over the standard CNF text format; both usual
output dialects are understood.
"""

from __future__ import annotations

import subprocess
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence


class SolverError(RuntimeError):
    pass


class Solver:
    """Deterministic CDCL over integer literals 1..num_vars."""

    def __init__(self, num_vars: int):
        self.n = num_vars
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: list[int] = [0] * (num_vars + 1)  # 0 unset, +1 true, -1 false
        self.level: list[int] = [0] * (num_vars + 1)
        self.reason: list[int] = [-1] * (num_vars + 1)
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.activity: list[float] = [0.0] * (num_vars + 1)
        self.act_inc = 1.0
        self.ok = True

    # -- clause plumbing ----------------------------------------------

    def add_clause(self, lits: Iterable[int]) -> None:
        seen: set[int] = set()
        out: list[int] = []
        for l in lits:
            if -l in seen:
                return  # tautology
            if l not in seen:
                seen.add(l)
                out.append(l)
        if not out:
            self.ok = False
            return
        if len(out) == 1:
            if not self._enqueue(out[0], -1):
                self.ok = False
            return
        ci = len(self.clauses)
        self.clauses.append(out)
        self.watches.setdefault(out[0], []).append(ci)
        self.watches.setdefault(out[1], []).append(ci)

    def _value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def _enqueue(self, lit: int, reason: int) -> bool:
        v = self._value(lit)
        if v == 1:
            return True
        if v == -1:
            return False
        x = abs(lit)
        self.assign[x] = 1 if lit > 0 else -1
        self.level[x] = len(self.trail_lim)
        self.reason[x] = reason
        self.trail.append(lit)
        return True

    def _propagate(self) -> int:
        """Unit propagation; returns a conflicting clause index or -1."""
        i = 0
        while i < len(self.trail):
            lit = self.trail[i]
            i += 1
            falsified = -lit
            watching = self.watches.get(falsified, [])
            kept: list[int] = []
            j = 0
            while j < len(watching):
                ci = watching[j]
                j += 1
                cl = self.clauses[ci]
                if cl[0] == falsified:
                    cl[0], cl[1] = cl[1], cl[0]
                # cl[1] is the falsified watch now
                if self._value(cl[0]) == 1:
                    kept.append(ci)
                    continue
                for k in range(2, len(cl)):
                    if self._value(cl[k]) != -1:
                        cl[1], cl[k] = cl[k], cl[1]
                        self.watches.setdefault(cl[1], []).append(ci)
                        break
                else:
                    kept.append(ci)
                    if not self._enqueue(cl[0], ci):
                        kept.extend(watching[j:])
                        self.watches[falsified] = kept
                        return ci
            self.watches[falsified] = kept
        return -1

    # -- learning ------------------------------------------------------

    def _bump(self, x: int) -> None:
        self.activity[x] += self.act_inc
        if self.activity[x] > 1e100:
            for y in range(1, self.n + 1):
                self.activity[y] *= 1e-100
            self.act_inc *= 1e-100

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = [False] * (self.n + 1)
        learned: list[int] = [0]  # slot for the asserting literal
        counter = 0
        lit = 0
        idx = len(self.trail)
        cur_level = len(self.trail_lim)
        reason_cl = self.clauses[confl]
        while True:
            for q in reason_cl if lit == 0 else reason_cl[1:]:
                x = abs(q)
                if not seen[x] and self.level[x] > 0:
                    seen[x] = True
                    self._bump(x)
                    if self.level[x] >= cur_level:
                        counter += 1
                    else:
                        learned.append(q)
            while True:
                idx -= 1
                lit = self.trail[idx]
                if seen[abs(lit)]:
                    break
            counter -= 1
            if counter == 0:
                break
            r = self.reason[abs(lit)]
            reason_cl = self.clauses[r]
            reason_cl = self._ordered_reason(reason_cl, lit)
        learned[0] = -lit
        back = 0
        if len(learned) > 1:
            back = max(self.level[abs(q)] for q in learned[1:])
            w = max(range(1, len(learned)), key=lambda k: self.level[abs(learned[k])])
            learned[1], learned[w] = learned[w], learned[1]
        return learned, back

    @staticmethod
    def _ordered_reason(cl: list[int], lit: int) -> list[int]:
        if cl[0] == lit:
            return cl
        out = list(cl)
        out.remove(lit)
        return [lit] + out

    def _backjump(self, lvl: int) -> None:
        while len(self.trail_lim) > lvl:
            mark = self.trail_lim.pop()
            for lit in self.trail[mark:]:
                self.assign[abs(lit)] = 0
                self.reason[abs(lit)] = -1
            del self.trail[mark:]

    def _decide(self) -> int:
        best = 0
        best_act = -1.0
        for x in range(1, self.n + 1):
            if self.assign[x] == 0 and self.activity[x] > best_act:
                best, best_act = x, self.activity[x]
        return best

    def solve(self) -> bool:
        if not self.ok:
            return False
        if self._propagate() != -1:
            return False
        conflicts_until_restart = 64
        luby_step = 1
        while True:
            confl = self._propagate()
            if confl != -1:
                if not self.trail_lim:
                    return False
                learned, back = self._analyze(confl)
                self._backjump(back)
                if len(learned) == 1:
                    if not self._enqueue(learned[0], -1):
                        return False
                else:
                    ci = len(self.clauses)
                    self.clauses.append(learned)
                    self.watches.setdefault(learned[0], []).append(ci)
                    self.watches.setdefault(learned[1], []).append(ci)
                    self._enqueue(learned[0], ci)
                self.act_inc /= 0.95
                conflicts_until_restart -= 1
                if conflicts_until_restart <= 0:
                    luby_step += 1
                    conflicts_until_restart = 64 * _luby(luby_step)
                    self._backjump(0)
                continue
            x = self._decide()
            if x == 0:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(-x, -1)  # fixed polarity: try false first

    def model(self) -> list[int]:
        return [x if self.assign[x] == 1 else -x for x in range(1, self.n + 1)]


def _luby(i: int) -> int:
    k = 1
    while (1 << (k + 1)) - 1 <= i:
        k += 1
    while (1 << k) - 1 != i:
        i -= (1 << (k - 1)) - 1 + 1
        k = 1
        while (1 << (k + 1)) - 1 <= i:
            k += 1
    return 1 << (k - 1)


def solve_cnf(num_vars: int, clauses: Iterable[Sequence[int]]) -> Optional[list[int]]:
    """Solve and return the full signed model, or None when unsatisfiable."""
    s = Solver(num_vars)
    for cl in clauses:
        s.add_clause(cl)
    if not s.solve():
        return None
    return s.model()


# ---------------------------------------------------------------------------
# CNF text exchange


def to_dimacs(num_vars: int, clauses: Sequence[Sequence[int]]) -> str:
    lines = [f"p cnf {num_vars} {len(clauses)}"]
    for cl in clauses:
        lines.append(" ".join(str(l) for l in cl) + " 0")
    return "\n".join(lines) + "\n"


def parse_dimacs(text: str) -> tuple[int, list[list[int]]]:
    num_vars = 0
    clauses: list[list[int]] = []
    cur: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise SolverError(f"malformed problem line: {line!r}")
            num_vars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise SolverError(f"bad literal {tok!r} in line {line!r}") from None
            if lit == 0:
                clauses.append(cur)
                cur = []
            else:
                cur.append(lit)
    if cur:
        clauses.append(cur)
    return num_vars, clauses


def parse_solver_output(text: str) -> Optional[list[int]]:
    """Read a solver's verdict; returns literals for SAT, None for UNSAT.

    Understands both the competition dialect ("s SATISFIABLE" with "v" model
    lines) and the bare dialect ("SAT" followed by one literal line).
    """
    verdict: Optional[bool] = None
    lits: list[int] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        head = line.split()[0].upper()
        if head in ("S", "SATISFIABLE", "UNSATISFIABLE", "SAT", "UNSAT"):
            token = line.split()[1].upper() if head == "S" else head
            if token.startswith("UNSAT"):
                verdict = False
            elif token.startswith("SAT"):
                verdict = True
            continue
        if line.startswith("v") or line.startswith("V"):
            lits.extend(int(tok) for tok in line.split()[1:])
            continue
        if verdict and all(
            tok.lstrip("-").isdigit() for tok in line.split()
        ):
            lits.extend(int(tok) for tok in line.split())
    if verdict is None:
        raise SolverError("solver output carried no verdict")
    if not verdict:
        return None
    return [l for l in lits if l != 0]


@dataclass(frozen=True)
class ExternalSolver:
    """Bridge to a solver binary taking a CNF file path as its argument."""

    path: str

    def solve(
        self, num_vars: int, clauses: Sequence[Sequence[int]],
        timeout_s: Optional[float] = None,
    ) -> Optional[list[int]]:
        with tempfile.TemporaryDirectory(prefix="popcert-cnf-") as d:
            problem = Path(d) / "problem.cnf"
            problem.write_text(to_dimacs(num_vars, clauses))
            try:
                proc = subprocess.run(
                    [self.path, str(problem)],
                    capture_output=True, text=True, timeout=timeout_s,
                )
            except FileNotFoundError as e:
                raise SolverError(f"external solver not found: {self.path}") from e
            except subprocess.TimeoutExpired as e:
                raise SolverError(f"external solver timed out after {timeout_s}s") from e
        # exit codes 10/20 are conventional but not universal; trust the text
        lits = parse_solver_output(proc.stdout)
        if lits is None:
            return None
        got = {abs(l) for l in lits}
        model = list(lits)
        for x in range(1, num_vars + 1):
            if x not in got:
                model.append(-x)  # unmentioned variables default to false
        return model
