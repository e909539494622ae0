#!/usr/bin/env python3
"""
Test della rappresentazione MILP: costruzione, normalizzazione, vista matriciale e formato LP.
"""
import math

import numpy as np

from test_utils import setup_python_path, small_cell_instance

setup_python_path()

from errors import InvalidBounds  # noqa: E402
from formulation import build  # noqa: E402
from milp_ir import (LinearExpr, MilpProblem, Sense, VarDomain, VariableSpec, dump_lp,  # noqa: E402
                     normalize, parse_lp)
from model import HostingPolicy  # noqa: E402


def _toy() -> MilpProblem:
    p = MilpProblem("toy")
    x = p.add_variable(VariableSpec("x", VarDomain.CONTINUOUS, 0.0, 3.0))
    y = p.add_variable(VariableSpec("y", VarDomain.BINARY))
    z = p.add_variable(VariableSpec("z", VarDomain.CONTINUOUS, -1.5, math.inf))
    p.add_constraint([(x, 1.0), (y, 2.0), (x, 0.5)], Sense.LE, 4.0, "mix")
    p.add_constraint([(z, 1.0), (y, -1.0)], Sense.GE, -2.0, "low")
    p.add_constraint([(x, 1.0), (z, 1.0)], Sense.EQ, 0.1, "tie")
    p.set_objective([(x, -1.0), (y, 0.3), (z, 1.0 / 3.0)], 2.5)
    return p


def test_normalize_merges_and_sorts():
    expr = normalize(LinearExpr(((3, 1.0), (1, 2.0), (3, -1.0), (0, 0.5), (1, 1.0))))
    assert expr.terms == ((0, 0.5), (1, 3.0))


def test_binary_bounds_are_clamped():
    p = MilpProblem()
    v = p.add_variable(VariableSpec("b", VarDomain.BINARY, -2.0, 5.0))
    assert (p.variables[v].lower, p.variables[v].upper) == (0.0, 1.0)


def test_invalid_bounds():
    p = MilpProblem()
    for spec in (VariableSpec("a", lower=2.0, upper=1.0),
                 VariableSpec("b", VarDomain.BINARY, lower=1.5)):
        try:
            p.add_variable(spec)
        except InvalidBounds:
            continue
        raise AssertionError(f"{spec} doveva sollevare InvalidBounds")


def test_constraint_checks():
    p = _toy()
    for terms, rhs, name in (([(7, 1.0)], 1.0, "unknown"), ([(0, math.nan)], 1.0, "nan"),
                             ([(0, 1.0)], math.inf, "inf"), ([(0, 1.0)], 1.0, "bad name")):
        try:
            p.add_constraint(terms, Sense.LE, rhs, name)
        except (IndexError, ValueError):
            continue
        raise AssertionError(f"il vincolo {name} doveva essere rifiutato")


def test_frozen_problem_is_read_only():
    p = _toy().freeze()
    try:
        p.add_variable(VariableSpec("w"))
    except RuntimeError:
        return
    raise AssertionError("un problema congelato non deve accettare variabili")


def test_arrays_view():
    arrays = _toy().freeze().arrays()
    assert arrays.A.shape == (3, 3)
    assert np.allclose(arrays.A[0], [1.5, 2.0, 0.0])
    assert list(arrays.senses) == [1, -1, 0]
    assert list(arrays.binary) == [False, True, False]
    assert arrays.c0 == 2.5
    sparse_view = _toy().arrays(as_sparse=True)
    assert np.allclose(sparse_view.A.toarray(), arrays.A)


def test_violation_and_objective():
    p = _toy()
    point = [1.0, 1.0, -0.9]
    assert math.isclose(p.max_violation(point), 0.0, abs_tol=1e-12)
    assert math.isclose(p.objective_value(point), 2.5 - 1.0 + 0.3 - 0.3, abs_tol=1e-12)
    assert p.max_violation([4.0, 1.0, -3.9]) >= 1.0


def test_lp_text_keeps_every_bit():
    original = _toy()
    parsed = parse_lp(dump_lp(original))
    assert parsed.name == "toy"
    assert [(v.name, v.domain, v.lower, v.upper) for v in parsed.variables] == \
           [(v.name, v.domain, v.lower, v.upper) for v in original.variables]
    assert [(c.name, c.expr.terms, c.sense, c.rhs) for c in parsed.constraints] == \
           [(c.name, c.expr.terms, c.sense, c.rhs) for c in original.constraints]
    assert parsed.objective == original.objective
    assert dump_lp(parsed) == dump_lp(original)


def test_lp_text_of_formulation():
    problem, _, _ = build(small_cell_instance(n_uds=2, latency=1.0), HostingPolicy.FRAN)
    text = problem.to_lp_text()
    assert text.startswith("\\ Problem: fran-2req")
    assert " assign[ud00-r0]:" in text
    assert MilpProblem.from_lp_text(text).to_lp_text() == text
