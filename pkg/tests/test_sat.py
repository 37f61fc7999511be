"""Tests for the propositional satisfiability engine."""

from __future__ import annotations

import itertools
import os
import random
import stat
import sys

import pytest

from popcert.sat import (
    ExternalSolver,
    SolverError,
    parse_dimacs,
    parse_solver_output,
    solve_cnf,
    to_dimacs,
)


def brute_force(num_vars, clauses):
    for bits in itertools.product([False, True], repeat=num_vars):
        if all(any(bits[abs(l) - 1] == (l > 0) for l in c) for c in clauses):
            return bits
    return None


def check_model(model, num_vars, clauses):
    assert model is not None
    assert sorted(abs(l) for l in model) == list(range(1, num_vars + 1))
    tv = {abs(l): l > 0 for l in model}
    for c in clauses:
        assert any(tv[abs(l)] == (l > 0) for l in c)


def pigeonhole(pigeons, holes):
    # Variable p*holes + h + 1 means "pigeon p sits in hole h".
    clauses = []
    for p in range(pigeons):
        clauses.append([p * holes + h + 1 for h in range(holes)])
    for h in range(holes):
        for p1 in range(pigeons):
            for p2 in range(p1 + 1, pigeons):
                clauses.append([-(p1 * holes + h + 1), -(p2 * holes + h + 1)])
    return pigeons * holes, clauses


def test_empty_formula_is_satisfiable():
    assert solve_cnf(0, []) == []
    assert solve_cnf(3, []) is not None


def test_empty_clause_is_unsatisfiable():
    assert solve_cnf(2, [[1], []]) is None


def test_unit_propagation_chain():
    clauses = [[1], [-1, 2], [-2, 3], [-3, 4]]
    model = solve_cnf(4, clauses)
    check_model(model, 4, clauses)
    assert model == [1, 2, 3, 4]


def test_contradictory_units():
    assert solve_cnf(1, [[1], [-1]]) is None


def test_pigeonhole_unsat():
    for pigeons in range(2, 7):
        n, clauses = pigeonhole(pigeons, pigeons - 1)
        assert solve_cnf(n, clauses) is None


def test_pigeonhole_sat_when_holes_suffice():
    n, clauses = pigeonhole(4, 4)
    check_model(solve_cnf(n, clauses), n, clauses)


def test_random_3sat_agrees_with_brute_force():
    rnd = random.Random(90125)
    for _ in range(60):
        num_vars = rnd.randint(3, 9)
        num_clauses = rnd.randint(2, 4 * num_vars)
        clauses = []
        for _ in range(num_clauses):
            width = rnd.randint(1, 3)
            vs = rnd.sample(range(1, num_vars + 1), min(width, num_vars))
            clauses.append([v if rnd.random() < 0.5 else -v for v in vs])
        expect = brute_force(num_vars, clauses)
        got = solve_cnf(num_vars, clauses)
        if expect is None:
            assert got is None
        else:
            check_model(got, num_vars, clauses)


def test_solver_is_deterministic():
    rnd = random.Random(7)
    clauses = [
        [rnd.choice([1, -1]) * rnd.randint(1, 12) for _ in range(3)]
        for _ in range(40)
    ]
    first = solve_cnf(12, clauses)
    second = solve_cnf(12, clauses)
    assert first == second


def test_dimacs_round_trip():
    clauses = [[1, -2], [3], [-1, -3, 2]]
    text = to_dimacs(3, clauses)
    num_vars, parsed = parse_dimacs(text)
    assert num_vars == 3
    assert parsed == [list(c) for c in clauses]


def test_dimacs_rejects_garbage():
    with pytest.raises(SolverError):
        parse_dimacs("not a cnf file\n1 2 0\n")


def test_parse_output_competition_dialect():
    text = "c comment\ns SATISFIABLE\nv 1 -2 3 0\n"
    assert parse_solver_output(text) == [1, -2, 3]
    assert parse_solver_output("s UNSATISFIABLE\n") is None


def test_parse_output_bare_dialect():
    assert parse_solver_output("SAT\n1 -2 3 0\n") == [1, -2, 3]
    assert parse_solver_output("UNSAT\n") is None


def test_parse_output_without_verdict():
    with pytest.raises(SolverError):
        parse_solver_output("c chatter only\n")


FAKE_SOLVER = """#!{python}
import sys
sys.path.insert(0, {src!r})
from popcert.sat import parse_dimacs, solve_cnf
num_vars, clauses = parse_dimacs(open(sys.argv[1]).read())
model = solve_cnf(num_vars, clauses)
if model is None:
    print({unsat_line!r})
else:
    print({sat_line!r})
    print({prefix!r} + " ".join(str(l) for l in model) + " 0")
"""


def write_fake_solver(tmp_path, name, sat_line, unsat_line, prefix):
    src = os.path.join(os.path.dirname(__file__), "..", "src")
    script = tmp_path / name
    script.write_text(
        FAKE_SOLVER.format(
            python=sys.executable,
            src=os.path.abspath(src),
            sat_line=sat_line,
            unsat_line=unsat_line,
            prefix=prefix,
        )
    )
    script.chmod(script.stat().st_mode | stat.S_IEXEC)
    return str(script)


def test_external_solver_competition_dialect(tmp_path):
    path = write_fake_solver(tmp_path, "comp.py", "s SATISFIABLE", "s UNSATISFIABLE", "v ")
    solver = ExternalSolver(path)
    clauses = [[1, 2], [-1, 2], [1, -2]]
    check_model(solver.solve(2, clauses), 2, clauses)
    assert solver.solve(1, [[1], [-1]]) is None


def test_external_solver_bare_dialect(tmp_path):
    path = write_fake_solver(tmp_path, "bare.py", "SAT", "UNSAT", "")
    solver = ExternalSolver(path)
    clauses = [[-3], [1, 3], [-1, 2]]
    check_model(solver.solve(3, clauses), 3, clauses)


def test_external_solver_missing_binary():
    solver = ExternalSolver("/nonexistent/solver-binary")
    with pytest.raises(SolverError):
        solver.solve(1, [[1]])
