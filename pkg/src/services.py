"""
Solve pipeline for a single (instance, policy) pair.
This module provides the `SolveService` class, which chains the steps every
experiment needs: build the MILP, solve it, extract the placement and recompute the
power breakdown from the placement alone. The result is a `SolveReport`, the record
that sweeps, the CLI and the tests consume.
"""

import logging # Diagnostics stream
import math # Infinity for unsolved rows
from dataclasses import dataclass # Immutable report records
from typing import Optional # Type hints for documentation

from config import FEASIBILITY_TOL # Independent re-check tolerance
from errors import CorruptSolution # Raised when a solution does not survive re-checking
from formulation import (FormulationOptions, FormulationReport, Placement, PowerBreakdown,
                         build, extract_placement, placement_power, placement_violations)
from milp_ir import MilpProblem
from model import HostingPolicy, NetworkInstance
from solver import BnbReport, BnbStatus, SolverOptions, solve_milp

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolveReport:
    """Objective, power breakdown, solver statistics and status of one solve"""
    policy: HostingPolicy
    status: str
    objective: float
    breakdown: Optional[PowerBreakdown]
    placement: Optional[Placement]
    nodes_explored: int
    best_bound: float
    gap: float
    root_bound: float
    lp_iterations: int
    backend: str
    formulation: Optional[FormulationReport] = None

    @property
    def is_optimal(self) -> bool:
        return self.status == BnbStatus.OPTIMAL.value

    def summary(self) -> dict:
        """Machine-readable statistics, safe to dump as JSON"""
        return {
            "policy": self.policy.value,
            "status": self.status,
            "objective": self.objective if math.isfinite(self.objective) else None,
            "nodes_explored": self.nodes_explored,
            "best_bound": self.best_bound if math.isfinite(self.best_bound) else None,
            "gap": self.gap if math.isfinite(self.gap) else None,
            "root_bound": self.root_bound if math.isfinite(self.root_bound) else None,
            "lp_iterations": self.lp_iterations,
            "backend": self.backend,
            "binaries": self.formulation.binaries if self.formulation else None,
            "constraints": sum(self.formulation.constraints.values()) if self.formulation else None,
            "big_m": self.formulation.big_m if self.formulation else None,
        }


class SolveService:
    """Builds, solves and post-checks placement problems"""

    def __init__(self,
                 solver_options: SolverOptions = SolverOptions(),
                 formulation_options: FormulationOptions = FormulationOptions()):
        """Keep the options shared by every solve of one run"""
        self.solver_options = solver_options
        self.formulation_options = formulation_options

    def build(self, instance: NetworkInstance, policy: HostingPolicy):
        """Build the MILP only (used by --dump-lp)"""
        return build(instance, policy, self.formulation_options)

    def solve(self, instance: NetworkInstance, policy: HostingPolicy) -> SolveReport:
        """
        Solve one instance under one policy

        Returns:
            SolveReport with status OPTIMAL or INFEASIBLE

        Raises:
            ModelError from the formulation, SolverError from the solver, from reading the
            solution back or from the independent placement re-check
        """
        problem, varmap, form_report = self.build(instance, policy)
        logger.info("%s: %d binaries, %d constraints", problem.name,
                    problem.num_variables, problem.num_constraints)
        bnb = solve_milp(problem, self.solver_options)
        if not bnb.is_optimal:
            return self._report(policy, bnb, None, None, form_report)

        try:
            placement = extract_placement(varmap, bnb.values)
            breakdown = placement_power(instance, placement, self.formulation_options.response_multiplier)
        except (KeyError, IndexError, ValueError, TypeError) as e:
            raise CorruptSolution(f"{problem.name}: cannot read the solution ({type(e).__name__}: {e})") from e
        self._recheck(instance, policy, problem, bnb, placement, breakdown)
        return self._report(policy, bnb, placement, breakdown, form_report)

    def _recheck(self, instance: NetworkInstance, policy: HostingPolicy, problem: MilpProblem,
                 bnb: BnbReport, placement: Placement, breakdown: PowerBreakdown):
        """Validate the placement without the solver's arrays"""
        problems = placement_violations(instance, placement, policy,
                                        slack=self.formulation_options.latency_slack,
                                        tol=FEASIBILITY_TOL)
        if problems:
            raise CorruptSolution(f"{problem.name}: " + "; ".join(problems))
        scale = max(1.0, abs(bnb.objective))
        if abs(breakdown.total_w - bnb.objective) > 1e-9 * scale:
            raise CorruptSolution(f"{problem.name}: recomputed power {breakdown.total_w:.17g} "
                                  f"differs from objective {bnb.objective:.17g}")

    @staticmethod
    def _report(policy: HostingPolicy, bnb: BnbReport, placement: Optional[Placement],
                breakdown: Optional[PowerBreakdown], form_report: FormulationReport) -> SolveReport:
        return SolveReport(
            policy=policy,
            status=bnb.status.value,
            objective=breakdown.total_w if breakdown is not None else math.inf,
            breakdown=breakdown,
            placement=placement,
            nodes_explored=bnb.nodes_explored,
            best_bound=bnb.best_bound,
            gap=bnb.gap,
            root_bound=bnb.root_bound,
            lp_iterations=bnb.lp_iterations,
            backend=bnb.backend,
            formulation=form_report,
        )
