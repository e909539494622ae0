"""
Exact MILP solving by deterministic best-first branch-and-bound over binary variables.

Each node's LP relaxation gives its bound. Nodes are popped from a heap ordered by
(parent bound, creation index) in batches of a fixed size, their LPs are solved (in
parallel when workers > 1) and the results are merged in creation-index order, so the
search tree, node counts and the returned values do not depend on the worker count.
Branching picks the fractional binary closest to 0.5 (lowest index on ties) and the
0-branch is created first. Variables may carry a branching priority; the rule is then
applied within the highest priority class that still has a fractional member.
"""
import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np

from config import (DEFAULT_BATCH_SIZE, DEFAULT_NODE_BUDGET, DEFAULT_WORKERS, FEASIBILITY_TOL,
                    GAP_TOL, INTEGRALITY_TOL, PIVOT_TOL)
from errors import IterationLimit, NumericalBreakdown, SolverError
from lp_solver import LpOptions, LpSolution, LpStatus, pick_backend, solve_arrays
from milp_ir import MilpProblem

logger = logging.getLogger(__name__)


class BnbStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    NODE_LIMIT = "NODE_LIMIT"


@dataclass(frozen=True)
class SolverOptions:
    feasibility_tol: float = FEASIBILITY_TOL
    integrality_tol: float = INTEGRALITY_TOL
    gap_tol: float = GAP_TOL
    pivot_tol: float = PIVOT_TOL
    node_budget: int = DEFAULT_NODE_BUDGET
    workers: int = DEFAULT_WORKERS
    batch_size: int = DEFAULT_BATCH_SIZE
    lp_backend: str = "auto"

    def lp_options(self) -> LpOptions:
        return LpOptions(backend=self.lp_backend, feasibility_tol=self.feasibility_tol,
                         pivot_tol=self.pivot_tol)


@dataclass(frozen=True)
class BnbReport:
    status: BnbStatus
    objective: float
    values: Optional[np.ndarray] = field(compare=False)
    nodes_explored: int
    best_bound: float
    gap: float
    root_bound: float
    lp_iterations: int
    backend: str

    @property
    def is_optimal(self) -> bool:
        return self.status is BnbStatus.OPTIMAL


@dataclass(order=True)
class _Node:
    bound: float
    creation: int
    lower: np.ndarray = field(compare=False)
    upper: np.ndarray = field(compare=False)


def _branch_variable(values: np.ndarray, free_binaries: np.ndarray, tol: float,
                     priority: Optional[np.ndarray] = None) -> Optional[int]:
    """
    Fractional binary nearest 0.5, lowest index on ties; None when integral.
    With priorities, only the highest class holding a fractional binary competes.
    """
    if free_binaries.size == 0:
        return None
    vals = values[free_binaries]
    frac = np.abs(vals - np.round(vals))
    fractional = frac > tol
    if not np.any(fractional):
        return None
    if priority is not None:
        classes = priority[free_binaries]
        fractional &= classes == classes[fractional].max()
    distance = np.where(fractional, np.abs(vals - 0.5), np.inf)
    # argmin returns the first minimum, i.e. the lowest index
    return int(free_binaries[int(np.argmin(distance))])


class BranchAndBound:
    """One solve of one problem; use solve_milp() for the functional entry point"""

    def __init__(self, problem: MilpProblem, options: SolverOptions = SolverOptions()):
        self.problem = problem
        self.options = options
        self.lp_options = options.lp_options()
        self.backend = pick_backend(problem, self.lp_options)
        self.arrays = problem.arrays(as_sparse=(self.backend == "highs"))
        self.binaries = np.flatnonzero(self.arrays.binary)
        self.has_continuous = bool(np.any(~self.arrays.binary))
        self.incumbent: Optional[np.ndarray] = None
        self.incumbent_obj = math.inf
        self.nodes_explored = 0
        self.lp_iterations = 0
        self.root_bound = -math.inf
        self.pruned_bound = math.inf
        self._creation = 0

    def _new_node(self, bound: float, lower: np.ndarray, upper: np.ndarray) -> _Node:
        node = _Node(bound, self._creation, lower, upper)
        self._creation += 1
        return node

    def _solve_node(self, node: _Node) -> LpSolution:
        return solve_arrays(self.arrays, node.lower, node.upper, self.backend, self.lp_options)

    def _round_and_check(self, node: _Node, values: np.ndarray) -> Tuple[np.ndarray, float]:
        """Snap binaries to 0/1, re-derive continuous values and re-validate the point"""
        point = values.copy()
        point[self.binaries] = np.round(point[self.binaries])
        if self.has_continuous:
            lower, upper = node.lower.copy(), node.upper.copy()
            lower[self.binaries] = point[self.binaries]
            upper[self.binaries] = point[self.binaries]
            fixed = solve_arrays(self.arrays, lower, upper, self.backend, self.lp_options)
            self.lp_iterations += fixed.iterations
            if fixed.status is LpStatus.OPTIMAL:
                point = fixed.values
        violation = self.problem.max_violation(point)
        if violation > self.options.feasibility_tol:
            raise NumericalBreakdown(f"integral point violates constraints by {violation:.3e}")
        return point, self.problem.objective_value(point)

    def _report(self, status: BnbStatus, best_bound: float) -> BnbReport:
        objective = self.incumbent_obj if self.incumbent is not None else math.inf
        gap = objective - best_bound if self.incumbent is not None else math.inf
        return BnbReport(
            status=status,
            objective=objective,
            values=None if self.incumbent is None else self.incumbent.copy(),
            nodes_explored=self.nodes_explored,
            best_bound=best_bound,
            gap=max(0.0, gap),
            root_bound=self.root_bound,
            lp_iterations=self.lp_iterations,
            backend=self.backend,
        )

    def _merge(self, node: _Node, solution: LpSolution, heap: List[_Node]):
        self.nodes_explored += 1
        self.lp_iterations += solution.iterations
        if node.creation == 0:
            self.root_bound = solution.objective if solution.status is LpStatus.OPTIMAL else math.inf
        if solution.status is LpStatus.INFEASIBLE:
            return
        if solution.status is LpStatus.UNBOUNDED:
            raise SolverError(f"LP relaxation of '{self.problem.name}' is unbounded")
        if solution.objective >= self.incumbent_obj - self.options.gap_tol:
            self.pruned_bound = min(self.pruned_bound, solution.objective)
            return
        free = self.binaries[node.lower[self.binaries] < node.upper[self.binaries]]
        var = _branch_variable(solution.values, free, self.options.integrality_tol, self.arrays.priority)
        if var is None:
            point, objective = self._round_and_check(node, solution.values)
            if objective < self.incumbent_obj:
                self.incumbent, self.incumbent_obj = point, objective
            return
        zero_upper = node.upper.copy()
        zero_upper[var] = 0.0
        one_lower = node.lower.copy()
        one_lower[var] = 1.0
        heapq.heappush(heap, self._new_node(solution.objective, node.lower, zero_upper))
        heapq.heappush(heap, self._new_node(solution.objective, one_lower, node.upper))

    def solve(self) -> BnbReport:
        opts = self.options
        heap: List[_Node] = [self._new_node(-math.inf, self.arrays.lower.copy(), self.arrays.upper.copy())]
        executor = ThreadPoolExecutor(max_workers=opts.workers) if opts.workers > 1 else None
        try:
            while heap:
                batch: List[_Node] = []
                while heap and len(batch) < opts.batch_size:
                    node = heapq.heappop(heap)
                    if node.bound >= self.incumbent_obj - opts.gap_tol:
                        # every remaining node has an equal or larger bound
                        self.pruned_bound = min(self.pruned_bound, node.bound)
                        heap.clear()
                        break
                    batch.append(node)
                if not batch:
                    break
                if self.nodes_explored + len(batch) > opts.node_budget:
                    best_bound = min([n.bound for n in batch + heap] + [self.incumbent_obj])
                    report = self._report(BnbStatus.NODE_LIMIT, best_bound)
                    raise IterationLimit(f"node budget {opts.node_budget} exhausted, gap {report.gap:.3e}", report)
                if executor is None:
                    solutions = [self._solve_node(n) for n in batch]
                else:
                    solutions = list(executor.map(self._solve_node, batch))
                for node, solution in sorted(zip(batch, solutions), key=lambda pair: pair[0].creation):
                    self._merge(node, solution, heap)
                logger.debug("bnb %s: nodes=%d open=%d incumbent=%.12g", self.problem.name,
                             self.nodes_explored, len(heap), self.incumbent_obj)
        finally:
            if executor is not None:
                executor.shutdown(wait=True)

        if self.incumbent is None:
            logger.info("bnb %s: infeasible after %d nodes", self.problem.name, self.nodes_explored)
            return self._report(BnbStatus.INFEASIBLE, math.inf)
        if self.root_bound > self.incumbent_obj + max(opts.feasibility_tol, 1e-9 * abs(self.incumbent_obj)):
            raise NumericalBreakdown(
                f"root relaxation {self.root_bound:.12g} above incumbent {self.incumbent_obj:.12g}")
        best_bound = min(self.pruned_bound, self.incumbent_obj)
        logger.info("bnb %s: optimal %.12g after %d nodes (%s backend)", self.problem.name,
                    self.incumbent_obj, self.nodes_explored, self.backend)
        return self._report(BnbStatus.OPTIMAL, best_bound)


def solve_milp(problem: MilpProblem, options: SolverOptions = SolverOptions()) -> BnbReport:
    """
    Solve problem to proven optimality.

    Raises:
        IterationLimit: node budget exceeded (the exception carries the partial report)
        NumericalBreakdown: LP pivoting failed or an integral point did not re-validate
    """
    problem.freeze()
    return BranchAndBound(problem, options).solve()
