#!/usr/bin/env python3
"""
Test dei risolutori: simplesso a tableau, backend HiGHS e branch-and-bound deterministico.
"""
import math

import numpy as np

from test_utils import random_instance, setup_python_path, small_cell_instance

setup_python_path()

from errors import IterationLimit, SolverError  # noqa: E402
from formulation import build  # noqa: E402
from lp_solver import LpOptions, LpStatus, pick_backend, solve_lp  # noqa: E402
from milp_ir import MilpProblem, Sense, VarDomain, VariableSpec  # noqa: E402
from model import HostingPolicy  # noqa: E402
from services import SolveService  # noqa: E402
from solver import BnbStatus, SolverOptions, _branch_variable, solve_milp  # noqa: E402

BACKENDS = ("tableau", "highs")


def _lp(upper: float = math.inf):
    p = MilpProblem("lp")
    x = p.add_variable(VariableSpec("x", upper=upper))
    return p, x


def _knapsack() -> MilpProblem:
    """min -(5a + 4b + 3c) s.t. 2a + 3b + c <= 4.5; the relaxation is fractional in b"""
    p = MilpProblem("knapsack")
    a, b, c = (p.add_variable(VariableSpec(n, VarDomain.BINARY)) for n in "abc")
    p.add_constraint([(a, 2.0), (b, 3.0), (c, 1.0)], Sense.LE, 4.5, "weight")
    p.set_objective([(a, -5.0), (b, -4.0), (c, -3.0)])
    return p.freeze()


def _random_lp(rng: np.random.Generator, n: int = 6, m: int = 4) -> MilpProblem:
    p = MilpProblem("random")
    idx = [p.add_variable(VariableSpec(f"x{j}", upper=float(rng.uniform(1.0, 5.0)))) for j in range(n)]
    for i in range(m):
        coefs = rng.uniform(0.1, 2.0, size=n)
        p.add_constraint(list(zip(idx, coefs)), Sense.LE, float(rng.uniform(2.0, 8.0)), f"r{i}")
    p.add_constraint([(idx[0], 1.0), (idx[1], 1.0)], Sense.GE, 0.5, "floor")
    p.set_objective(list(zip(idx, rng.uniform(-1.0, 1.0, size=n))))
    return p.freeze()


def test_lp_upper_bound():
    for backend in BACKENDS:
        p, x = _lp()
        p.add_constraint([(x, 1.0)], Sense.LE, 3.0, "cap")
        p.set_objective([(x, -1.0)])
        sol = solve_lp(p, options=LpOptions(backend=backend))
        assert sol.status is LpStatus.OPTIMAL
        assert math.isclose(sol.objective, -3.0, abs_tol=1e-9)
        assert math.isclose(sol.values[0], 3.0, abs_tol=1e-9)


def test_lp_infeasible():
    for backend in BACKENDS:
        p, x = _lp()
        p.add_constraint([(x, 1.0)], Sense.GE, 2.0, "low")
        p.add_constraint([(x, 1.0)], Sense.LE, 1.0, "high")
        assert solve_lp(p, options=LpOptions(backend=backend)).status is LpStatus.INFEASIBLE


def test_lp_unbounded():
    p, x = _lp()
    p.add_constraint([(x, 1.0)], Sense.GE, 1.0, "low")
    p.set_objective([(x, -1.0)])
    assert solve_lp(p, options=LpOptions(backend="tableau")).status is LpStatus.UNBOUNDED


def test_lp_free_and_negative_bounds():
    p = MilpProblem("free")
    u = p.add_variable(VariableSpec("u", lower=-math.inf, upper=math.inf))
    v = p.add_variable(VariableSpec("v", lower=-4.0, upper=-1.0))
    p.add_constraint([(u, 1.0), (v, 1.0)], Sense.EQ, 0.0, "balance")
    p.set_objective([(u, 1.0)])
    sol = solve_lp(p, options=LpOptions(backend="tableau"))
    assert sol.status is LpStatus.OPTIMAL
    assert np.allclose(sol.values, [1.0, -1.0], atol=1e-9)


def test_tableau_agrees_with_highs():
    rng = np.random.default_rng(42)
    for _ in range(25):
        p = _random_lp(rng)
        dense = solve_lp(p, options=LpOptions(backend="tableau"))
        sparse = solve_lp(p, options=LpOptions(backend="highs"))
        assert dense.status is sparse.status
        if dense.status is LpStatus.OPTIMAL:
            assert math.isclose(dense.objective, sparse.objective, rel_tol=1e-6, abs_tol=1e-6)
            assert p.max_violation(dense.values) <= 1e-6


def test_auto_backend_choice():
    small = _knapsack()
    assert pick_backend(small, LpOptions()) == "tableau"
    assert pick_backend(small, LpOptions(dense_limit=1)) == "highs"
    assert pick_backend(small, LpOptions(backend="highs")) == "highs"


def test_milp_rounds_up():
    p = MilpProblem("cover")
    x1 = p.add_variable(VariableSpec("x1", VarDomain.BINARY))
    x2 = p.add_variable(VariableSpec("x2", VarDomain.BINARY))
    p.add_constraint([(x1, 1.0), (x2, 1.0)], Sense.GE, 1.5, "cover")
    p.set_objective([(x1, 1.0), (x2, 1.0)])
    report = solve_milp(p)
    assert report.status is BnbStatus.OPTIMAL
    assert math.isclose(report.objective, 2.0, abs_tol=1e-9)
    assert math.isclose(report.root_bound, 1.5, abs_tol=1e-9)


def test_milp_infeasible():
    p = MilpProblem("impossible")
    x = p.add_variable(VariableSpec("x", VarDomain.BINARY))
    p.add_constraint([(x, 1.0)], Sense.GE, 2.0, "too_much")
    report = solve_milp(p)
    assert report.status is BnbStatus.INFEASIBLE
    assert report.values is None and math.isinf(report.objective)


def test_milp_knapsack_optimum():
    for backend in BACKENDS:
        report = solve_milp(_knapsack(), SolverOptions(lp_backend=backend))
        assert report.is_optimal
        assert math.isclose(report.objective, -8.0, abs_tol=1e-9)
        assert list(np.round(report.values)) == [1.0, 0.0, 1.0]
        assert report.root_bound <= report.objective + 1e-9
        assert report.gap <= 1e-6


def test_node_budget():
    try:
        solve_milp(_knapsack(), SolverOptions(node_budget=1))
    except IterationLimit as e:
        assert e.report is not None
        assert e.report.status is BnbStatus.NODE_LIMIT
        assert e.report.nodes_explored == 1
        return
    raise AssertionError("il budget di nodi doveva esaurirsi")


def test_unbounded_relaxation_is_an_error():
    p = MilpProblem("unbounded")
    b = p.add_variable(VariableSpec("b", VarDomain.BINARY))
    x = p.add_variable(VariableSpec("x"))
    p.set_objective([(b, 1.0), (x, -1.0)])
    try:
        solve_milp(p)
    except SolverError:
        return
    raise AssertionError("rilassamento illimitato non segnalato")


def test_worker_count_does_not_change_the_search():
    problem, _, _ = build(small_cell_instance(n_uds=4, latency=0.8), HostingPolicy.FRAN)
    reports = [solve_milp(problem, SolverOptions(workers=w)) for w in (1, 4)]
    assert reports[0] == reports[1]
    assert np.array_equal(reports[0].values, reports[1].values)


def test_branch_and_bound_on_random_formulations():
    for seed in range(8):
        inst = random_instance(seed)
        problem, _, _ = build(inst, HostingPolicy.FRAN)
        report = solve_milp(problem)
        assert report.is_optimal
        assert problem.max_violation(report.values) <= 1e-6
        assert report.root_bound <= report.objective + 1e-6


def test_milp_rounds_up_on_both_backends():
    for backend in BACKENDS:
        p = MilpProblem("cover")
        x1 = p.add_variable(VariableSpec("x1", VarDomain.BINARY))
        x2 = p.add_variable(VariableSpec("x2", VarDomain.BINARY))
        p.add_constraint([(x1, 1.0), (x2, 1.0)], Sense.GE, 1.5, "cover")
        p.set_objective([(x1, 1.0), (x2, 1.0)])
        report = solve_milp(p, SolverOptions(lp_backend=backend))
        assert report.backend == backend
        assert report.is_optimal
        assert math.isclose(report.objective, 2.0, abs_tol=1e-9)
        assert list(np.round(report.values)) == [1.0, 1.0]


def test_tableau_with_equality_and_lower_rows():
    for backend in BACKENDS:
        p = MilpProblem("mixed")
        x = p.add_variable(VariableSpec("x", upper=5.0))
        y = p.add_variable(VariableSpec("y", upper=5.0))
        p.add_constraint([(x, 1.0), (y, 1.0)], Sense.EQ, 2.0, "sum")
        p.add_constraint([(x, 1.0)], Sense.GE, 0.5, "floor")
        p.add_constraint([(y, 1.0)], Sense.GE, 0.25, "floor_y")
        p.set_objective([(x, 1.0), (y, 2.0)])
        sol = solve_lp(p, options=LpOptions(backend=backend))
        assert sol.status is LpStatus.OPTIMAL, backend
        assert np.allclose(sol.values, [1.75, 0.25], atol=1e-9)
        assert math.isclose(sol.objective, 2.25, abs_tol=1e-9)


def test_single_ud_cell_on_the_tableau():
    inst = small_cell_instance(n_uds=1)
    dense = SolveService(SolverOptions(lp_backend="tableau")).solve(inst, HostingPolicy.FRAN)
    sparse = SolveService(SolverOptions(lp_backend="highs")).solve(inst, HostingPolicy.FRAN)
    assert dense.is_optimal and dense.backend == "tableau"
    assert math.isclose(dense.objective, sparse.objective, rel_tol=1e-9)


def test_branching_follows_priority_classes():
    values = np.array([0.5, 0.3, 0.9, 0.0])
    free = np.array([0, 1, 2, 3])
    assert _branch_variable(values, free, 1e-6) == 0
    assert _branch_variable(values, free, 1e-6, np.array([0, 2, 2, 2])) == 1
    # the top class is integral, so the next class with a fractional value is used
    integral_top = np.array([0.5, 1.0, 0.0, 0.4])
    assert _branch_variable(integral_top, free, 1e-6, np.array([0, 2, 2, 1])) == 3
    assert _branch_variable(np.array([1.0, 0.0, 1.0, 0.0]), free, 1e-6, np.array([0, 2, 2, 1])) is None


def test_priority_reaches_the_arrays():
    p = MilpProblem("classes")
    p.add_variable(VariableSpec("a", VarDomain.BINARY, priority=2))
    p.add_variable(VariableSpec("b", VarDomain.BINARY))
    assert list(p.freeze().arrays().priority) == [2, 0]
