"""
LP relaxation solver.

Two deterministic backends share one entry point, solve_lp():
- "tableau": dense two-phase primal simplex on a full tableau. Entering variable by
  Dantzig's rule (most negative reduced cost) for the first 3*(m+n) iterations of a
  phase, then Bland's rule, which guarantees termination. Leaving variable by the
  minimum ratio test with ties broken on the lowest basic column index.
- "highs": scipy.optimize.linprog with sparse matrices, for instances whose dense
  tableau would not fit in memory.
"auto" picks the tableau when it has at most DENSE_TABLEAU_LIMIT entries.
Binary variables are relaxed to their [lower, upper] bounds.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.optimize import linprog

from config import DENSE_TABLEAU_LIMIT, FEASIBILITY_TOL, LP_BACKENDS, PIVOT_TOL
from errors import NumericalBreakdown
from milp_ir import LpArrays, MilpProblem

logger = logging.getLogger(__name__)

# reduced costs above -OPT_TOL count as non-negative
OPT_TOL = 1e-9


class LpStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"
    UNBOUNDED = "UNBOUNDED"


@dataclass(frozen=True)
class LpOptions:
    backend: str = "auto"
    feasibility_tol: float = FEASIBILITY_TOL
    pivot_tol: float = PIVOT_TOL
    dense_limit: int = DENSE_TABLEAU_LIMIT

    def __post_init__(self):
        if self.backend not in LP_BACKENDS:
            raise ValueError(f"unknown LP backend '{self.backend}', expected one of {LP_BACKENDS}")


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    values: Optional[np.ndarray]
    objective: float
    iterations: int


# ===== Dense tableau =====

class _Tableau:
    """
    Constraint rows 0..m-1, reduced-cost row m, right-hand side in the last column.
    """

    def __init__(self, table: np.ndarray, basis: np.ndarray, pivot_tol: float):
        self.table = table
        self.basis = basis
        self.pivot_tol = pivot_tol
        self.iterations = 0

    @property
    def m(self) -> int:
        return self.table.shape[0] - 1

    def pivot(self, row: int, col: int):
        t = self.table
        t[row, :] /= t[row, col]
        column = t[:, col].copy()
        column[row] = 0.0
        t -= np.outer(column, t[row, :])
        self.basis[row] = col
        self.iterations += 1

    def _leaving_row(self, col: int) -> Optional[int]:
        """Minimum ratio row for the entering column, or None when no safe pivot exists"""
        t = self.table
        entries = t[:self.m, col]
        eligible = np.flatnonzero(entries > self.pivot_tol)
        if eligible.size == 0:
            return None
        ratios = t[eligible, -1] / entries[eligible]
        best = ratios.min()
        ties = eligible[ratios <= best + 1e-12 * max(1.0, abs(best))]
        # Bland tie-break: lowest basic column index leaves
        return int(ties[np.argmin(self.basis[ties])])

    def run(self, allowed: np.ndarray) -> LpStatus:
        """Primal simplex on the current reduced-cost row; allowed masks enterable columns"""
        t = self.table
        n = t.shape[1] - 1
        switch_after = 3 * (self.m + n)
        phase_iterations = 0
        while True:
            reduced = t[self.m, :n]
            candidates = np.flatnonzero((reduced < -OPT_TOL) & allowed)
            if candidates.size == 0:
                return LpStatus.OPTIMAL
            if phase_iterations < switch_after:
                order = candidates[np.argsort(reduced[candidates], kind="stable")]
            else:
                order = candidates
            pivoted = False
            saw_tiny_only = False
            for col in order:
                row = self._leaving_row(col)
                if row is not None:
                    self.pivot(row, col)
                    pivoted = True
                    break
                if np.any(t[:self.m, col] > 0.0):
                    saw_tiny_only = True
                    continue
                # no positive entry at all: the ray is unbounded
                return LpStatus.UNBOUNDED
            if not pivoted:
                if saw_tiny_only:
                    raise NumericalBreakdown(f"pivot magnitude below {self.pivot_tol} with no alternative pivot")
                return LpStatus.OPTIMAL
            phase_iterations += 1


def _solve_tableau(arrays: LpArrays, lower: np.ndarray, upper: np.ndarray, options: LpOptions) -> LpSolution:
    n = arrays.c.size
    A = np.asarray(arrays.A, dtype=float)
    if np.any(lower > upper + options.feasibility_tol):
        return LpSolution(LpStatus.INFEASIBLE, None, float("nan"), 0)

    # x = offset + transform @ x', with x' >= 0
    columns = []
    offset = np.zeros(n)
    col_upper = []
    for j in range(n):
        lo, hi = lower[j], upper[j]
        if np.isfinite(lo) and np.isfinite(hi) and hi - lo <= 0.0:
            offset[j] = lo
        elif np.isfinite(lo):
            offset[j] = lo
            columns.append((j, 1.0))
            col_upper.append(hi - lo)
        elif np.isfinite(hi):
            offset[j] = hi
            columns.append((j, -1.0))
            col_upper.append(np.inf)
        else:
            columns.append((j, 1.0))
            col_upper.append(np.inf)
            columns.append((j, -1.0))
            col_upper.append(np.inf)
    k = len(columns)
    transform = np.zeros((n, k))
    for pos, (j, sign) in enumerate(columns):
        transform[j, pos] = sign

    A_red = A @ transform
    b_red = arrays.b - A @ offset
    senses = arrays.senses.copy()
    c_red = arrays.c @ transform
    c_const = float(arrays.c @ offset) + arrays.c0

    bounded = [pos for pos, hi in enumerate(col_upper) if np.isfinite(hi)]
    if bounded:
        extra = np.zeros((len(bounded), k))
        extra[np.arange(len(bounded)), bounded] = 1.0
        A_red = np.vstack([A_red, extra])
        b_red = np.concatenate([b_red, [col_upper[p] for p in bounded]])
        senses = np.concatenate([senses, np.ones(len(bounded), dtype=int)])

    # flip rows so every rhs is non-negative
    negative = b_red < 0
    A_red[negative] *= -1.0
    b_red[negative] *= -1.0
    senses[negative] *= -1

    m = A_red.shape[0]
    n_slack = int(np.count_nonzero(senses != 0))
    n_art = int(np.count_nonzero(senses <= 0))
    width = k + n_slack + n_art
    table = np.zeros((m + 1, width + 1))
    table[:m, :k] = A_red
    table[:m, -1] = b_red
    basis = np.zeros(m, dtype=int)
    slack_col, art_col = k, k + n_slack
    artificial = np.zeros(width, dtype=bool)
    for row in range(m):
        if senses[row] != 0:
            table[row, slack_col] = 1.0 if senses[row] > 0 else -1.0
            if senses[row] > 0:
                basis[row] = slack_col
            slack_col += 1
        if senses[row] <= 0:
            table[row, art_col] = 1.0
            basis[row] = art_col
            artificial[art_col] = True
            art_col += 1

    tab = _Tableau(table, basis, options.pivot_tol)

    # phase 1: minimize the sum of artificials
    if n_art:
        table[m, :] = 0.0
        # the mask covers the variable columns only, not the rhs
        table[m, :width][artificial] = 1.0
        for row in range(m):
            if artificial[basis[row]]:
                table[m, :] -= table[row, :]
        tab.run(np.ones(width, dtype=bool))
        infeasibility = -table[m, -1]
        scale = max(1.0, float(np.abs(b_red).max(initial=0.0)))
        if infeasibility > options.feasibility_tol * scale:
            return LpSolution(LpStatus.INFEASIBLE, None, float("nan"), tab.iterations)
        # drive zero-valued artificials out of the basis, dropping redundant rows
        row = 0
        while row < tab.m:
            if artificial[tab.basis[row]]:
                entries = np.abs(tab.table[row, :width]) * ~artificial
                col = int(np.argmax(entries))
                if entries[col] > options.pivot_tol:
                    tab.pivot(row, col)
                else:
                    tab.table = np.delete(tab.table, row, axis=0)
                    tab.basis = np.delete(tab.basis, row)
                    continue
            row += 1
        table = tab.table
        m = tab.m

    # phase 2
    cost = np.zeros(width)
    cost[:k] = c_red
    table[m, :] = 0.0
    table[m, :width] = cost
    for row in range(m):
        coef = cost[tab.basis[row]]
        if coef != 0.0:
            table[m, :] -= coef * table[row, :]
    status = tab.run(~artificial)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, None, float("-inf"), tab.iterations)

    reduced_values = np.zeros(width)
    reduced_values[tab.basis] = tab.table[:m, -1]
    values = offset + transform @ reduced_values[:k]
    objective = float(arrays.c @ values) + arrays.c0
    logger.debug("tableau LP: %d rows, %d cols, %d pivots, obj=%.12g", m, width, tab.iterations, objective)
    return LpSolution(LpStatus.OPTIMAL, values, objective, tab.iterations)


# ===== Sparse backend =====

def _solve_highs(arrays: LpArrays, lower: np.ndarray, upper: np.ndarray, options: LpOptions) -> LpSolution:
    A = arrays.A
    le = arrays.senses > 0
    ge = arrays.senses < 0
    eq = arrays.senses == 0
    ub_rows = np.flatnonzero(le | ge)
    A_ub = A[ub_rows] if ub_rows.size else None
    b_ub = None
    if A_ub is not None:
        sign = np.where(ge[ub_rows], -1.0, 1.0)
        A_ub = A_ub.multiply(sign[:, None]).tocsr() if hasattr(A_ub, "multiply") else A_ub * sign[:, None]
        b_ub = arrays.b[ub_rows] * sign
    eq_rows = np.flatnonzero(eq)
    A_eq = A[eq_rows] if eq_rows.size else None
    b_eq = arrays.b[eq_rows] if eq_rows.size else None
    bounds = np.column_stack([lower, upper])
    result = linprog(arrays.c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq,
                     bounds=bounds, method="highs")
    iterations = int(getattr(result, "nit", 0) or 0)
    if result.status == 0:
        values = np.asarray(result.x, dtype=float)
        return LpSolution(LpStatus.OPTIMAL, values, float(arrays.c @ values) + arrays.c0, iterations)
    if result.status == 2:
        return LpSolution(LpStatus.INFEASIBLE, None, float("nan"), iterations)
    if result.status == 3:
        return LpSolution(LpStatus.UNBOUNDED, None, float("-inf"), iterations)
    raise NumericalBreakdown(f"HiGHS stopped with status {result.status}: {result.message}")


def pick_backend(problem: MilpProblem, options: LpOptions) -> str:
    """Backend for this problem; "auto" compares the dense tableau size to the limit"""
    if options.backend != "auto":
        return options.backend
    n = problem.num_variables
    m = problem.num_constraints
    rows = m + sum(1 for v in problem.variables if np.isfinite(v.upper))
    size = (rows + 1) * (n + 2 * rows + 1)
    return "tableau" if size <= options.dense_limit else "highs"


def solve_arrays(arrays: LpArrays, lower: np.ndarray, upper: np.ndarray,
                 backend: str, options: LpOptions) -> LpSolution:
    """
    Run one backend on a matrix view.

    Raises:
        NumericalBreakdown: pivoting failed, or the backend raised anything else
    """
    solve = _solve_tableau if backend == "tableau" else _solve_highs
    try:
        return solve(arrays, lower, upper, options)
    except NumericalBreakdown:
        raise
    except (ArithmeticError, ValueError, IndexError, np.linalg.LinAlgError, MemoryError) as e:
        raise NumericalBreakdown(f"{backend} backend failed: {type(e).__name__}: {e}") from e


def solve_lp(problem: MilpProblem, lower: Optional[np.ndarray] = None,
             upper: Optional[np.ndarray] = None, options: LpOptions = LpOptions()) -> LpSolution:
    """
    Solve the LP relaxation of problem (binaries relaxed to their bounds).

    Args:
        problem: the MILP whose relaxation is solved
        lower, upper: optional bound overrides (used by branch-and-bound)
        options: backend choice and tolerances

    Returns:
        LpSolution with status OPTIMAL, INFEASIBLE or UNBOUNDED
    """
    backend = pick_backend(problem, options)
    arrays = problem.arrays(as_sparse=(backend == "highs"))
    lo = arrays.lower if lower is None else np.asarray(lower, dtype=float)
    hi = arrays.upper if upper is None else np.asarray(upper, dtype=float)
    return solve_arrays(arrays, lo, hi, backend, options)
