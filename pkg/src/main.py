"""
Main application for the F-RAN energy toolkit
This application computes energy-minimal VM placement and routing in a GPON-backed fog
radio access network and compares F-RAN hosting against C-RAN hosting.
Manages the complete workflow, from the scenario file to the result files.
Includes functionality for:
- Validating a scenario configuration
- Solving one slot under one hosting policy
- Sweeping the daily load profile, the latency bound and scaled instance factors
- Comparing both sweeps with a savings summary
- Checking the MILP solver against exhaustive enumeration on small cuts

Version: 1.0.0
"""
import argparse
import logging
import math
import os
import sys
from typing import List, Optional

# Add the src path to PYTHONPATH
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import pandas as pd

from config import (DATA_DIR, DEFAULT_CONFIG_FILE, EXIT_CONFIG_ERROR, EXIT_OK, EXIT_SOLVER_FAILURE, FACTOR_SWEEP_CSV,
                    LATENCY_SWEEP_CSV, LOAD_SWEEP_CSV, LOG_FORMAT, LP_DUMP_FILE, ORACLE_CHECK_CSV, OUTPUT_DIR,
                    RESOLVED_CONFIG_FILE, SWEEP_FACTORS, TOOL_VERSION)
from demand import active_uds, generate_requests, slot_requests
from errors import FranError, InfeasibleError, SchemaError
from file_manager import FileManager
from model import HostingPolicy, NetworkInstance
from oracle import downsample, enumerate_optimum
from scenario_config import ScenarioConfig, config_hash, load_config, resolved_dict
from scenarios import SweepResult, auto_latency_grid, run_factor_sweep, run_latency_sweep, run_load_sweep
from services import SolveService
from ui import UserInterface

logger = logging.getLogger(__name__)

ORACLE_TOL = 1e-6


class FranEnergyApp:
    """Runs one CLI command against one scenario configuration"""

    def __init__(self, args: argparse.Namespace):
        """Load nothing yet; keep the parsed arguments and the helpers"""
        self.args = args
        self.ui = UserInterface()
        self.file_manager = FileManager(args.out)
        self.config: Optional[ScenarioConfig] = None

    def run(self) -> int:
        """
        Executes the selected command and returns the process exit code
        Library errors are caught here, reported to the user and mapped to exit codes.
        """
        try:
            self.config = self._load()
            command = getattr(self, "_cmd_" + self.args.command.replace("-", "_"))
            return command()
        except FranError as e:
            self.ui.show_error(f"{type(e).__name__}: {e}")
            return e.exit_code
        except OSError as e:
            self.ui.show_error(f"I/O error: {e}")
            return EXIT_SOLVER_FAILURE
        except KeyboardInterrupt:
            self.ui.show_info("Operation cancelled by user.")
            return EXIT_SOLVER_FAILURE

    # ----- shared steps -----

    def _load(self) -> ScenarioConfig:
        """Load the scenario, apply CLI overrides and echo the resolved config"""
        config = load_config(self.args.config)
        if self.args.seed is not None:
            config = config.with_seed(self.args.seed)
        if self.args.workers is not None:
            config = config.with_workers(self.args.workers)
        self.file_manager.save_json(resolved_dict(config), RESOLVED_CONFIG_FILE)
        return config

    def _service(self) -> SolveService:
        return SolveService(self.config.solver, self.config.formulation)

    def _full_load(self) -> NetworkInstance:
        """Every UD active, generated latency bounds"""
        inst = self.config.instance
        return inst.with_requests(generate_requests(self.config.demand, inst.ud_ids()))

    def _metadata(self) -> dict:
        return {
            "config_name": self.config.name,
            "seed": self.config.demand.seed,
            "config_hash": config_hash(self.config),
        }

    def _dump_lp(self, instance: NetworkInstance, policies: List[HostingPolicy]):
        """Write the built MILP of each policy in LP text format"""
        service = self._service()
        for policy in policies:
            problem, _, _ = service.build(instance, policy)
            stem, ext = os.path.splitext(LP_DUMP_FILE)
            path = self.file_manager.save_text(problem.to_lp_text(), f"{stem}_{policy.value.lower()}{ext}")
            self.ui.show_info(f"LP dump written to {path}")

    def _write_sweep(self, result: SweepResult, filename: str) -> bool:
        """Write the sweep files; True when every row solved"""
        path = self.file_manager.write_results(result, filename, self._metadata(), excel=self.args.excel)
        self.ui.show_success(f"{result.kind} sweep written to {path} ({len(result.rows)} rows)")
        for row in result.failed_rows:
            self.ui.show_error(f"row {row.key}/{row.policy}: {row.status} {row.message}")
        return not result.failed_rows

    def _latency_grid(self, base_service: SolveService):
        sweep = self.config.sweep
        if not sweep.is_auto:
            return list(sweep.latency_grid), {"mode": "explicit"}
        return auto_latency_grid(self.config.instance, self.config.demand, base_service,
                                 sweep.grid_points, sweep.plateau_index)

    # ----- commands -----

    def _cmd_validate(self) -> int:
        inst = self.config.instance
        uds = inst.ud_ids()
        self.ui.show_success(f"'{self.config.name}' is valid")
        self.ui.display_summary({
            "nodes": len(inst.nodes),
            "directed links": len(inst.links),
            "UDs": len(uds),
            "potential requests": len(uds) * self.config.demand.requests_per_ud,
            "profile slots": len(self.config.profile),
            "config hash": config_hash(self.config),
        })
        return EXIT_OK

    def _cmd_solve(self) -> int:
        policy = HostingPolicy.parse(self.args.policy)
        instance = self._full_load()
        if self.args.hour is not None:
            entries = [e for e in self.config.profile if e.hour == self.args.hour]
            if not entries:
                raise SchemaError("hour", f"profile has no slot for hour {self.args.hour}")
            active = active_uds(entries[0], instance.ud_ids())
            instance = instance.with_requests(slot_requests(instance.requests, active))
            self.ui.show_info(f"hour {self.args.hour}: {len(active)} active UDs, {len(instance.requests)} requests")
        if self.args.latency is not None:
            instance = instance.with_latency(self.args.latency)
        if self.args.dump_lp:
            self._dump_lp(instance, [policy])

        report = self._service().solve(instance, policy)
        self.file_manager.save_json({"tool_version": TOOL_VERSION, **self._metadata(), **report.summary()},
                                    f"solve_{policy.value.lower()}.json")
        if not report.is_optimal:
            raise InfeasibleError(f"{policy.value} placement is infeasible")
        self.ui.display_breakdown(f"{policy.value} OPTIMUM", report.breakdown)
        self.ui.display_placement(report.placement)
        self.ui.display_summary({"B&B nodes": report.nodes_explored, "LP backend": report.backend,
                                 "root bound": report.root_bound, "gap": report.gap})
        return EXIT_OK

    def _run_load(self) -> SweepResult:
        return run_load_sweep(self.config.instance, self.config.profile, self.config.demand,
                              self._service(), self.config.solver.workers)

    def _run_latency(self) -> SweepResult:
        service = self._service()
        grid, grid_meta = self._latency_grid(service)
        return run_latency_sweep(self.config.instance, self.config.demand, grid, service,
                                 self.config.solver.workers, grid_meta)

    def _dump_full_load(self):
        if self.args.dump_lp:
            self._dump_lp(self._full_load(), [HostingPolicy.CRAN, HostingPolicy.FRAN])

    def _cmd_sweep_load(self) -> int:
        self._dump_full_load()
        result = self._run_load()
        ok = self._write_sweep(result, LOAD_SWEEP_CSV)
        self.ui.display_summary({"average saving %": result.savings.average_pct})
        return EXIT_OK if ok else EXIT_SOLVER_FAILURE

    def _cmd_sweep_latency(self) -> int:
        self._dump_full_load()
        result = self._run_latency()
        ok = self._write_sweep(result, LATENCY_SWEEP_CSV)
        self.ui.display_summary({"average saving %": result.savings.average_pct})
        return EXIT_OK if ok else EXIT_SOLVER_FAILURE

    def _cmd_compare(self) -> int:
        self._dump_full_load()
        load = self._run_load()
        load_ok = self._write_sweep(load, LOAD_SWEEP_CSV)
        latency = self._run_latency()
        latency_ok = self._write_sweep(latency, LATENCY_SWEEP_CSV)
        tracking = load.metadata.get("load_tracking_spearman", {})
        self.ui.display_summary({
            "load sweep average saving %": load.savings.average_pct,
            "latency sweep average saving %": latency.savings.average_pct,
            "C-RAN load tracking (Spearman)": tracking.get("cran", math.nan),
            "F-RAN load tracking (Spearman)": tracking.get("fran", math.nan),
        })
        return EXIT_OK if load_ok and latency_ok else EXIT_SOLVER_FAILURE

    def _cmd_sweep_factor(self) -> int:
        self._dump_full_load()
        try:
            result = run_factor_sweep(self.config.instance, self.config.demand, self.args.factor,
                                      self.args.values, self._service(), self.config.solver.workers)
        except ValueError as e:
            raise SchemaError("--values", str(e)) from e
        ok = self._write_sweep(result, FACTOR_SWEEP_CSV)
        self.ui.display_summary({"factor": self.args.factor, "average saving %": result.savings.average_pct})
        return EXIT_OK if ok else EXIT_SOLVER_FAILURE

    def _cmd_oracle_check(self) -> int:
        service = self._service()
        records = []
        for sample in range(self.args.samples):
            config = self.config.with_seed((self.config.demand.seed + sample) % (1 << 64))
            inst = config.instance.with_requests(generate_requests(config.demand, config.instance.ud_ids()))
            small = downsample(inst)
            for policy in (HostingPolicy.CRAN, HostingPolicy.FRAN):
                milp = service.solve(small, policy)
                oracle = enumerate_optimum(small, policy, config.formulation.latency_slack,
                                           config.formulation.response_multiplier)
                diff = abs(milp.objective - oracle.objective) if milp.is_optimal and oracle.is_optimal else math.nan
                agree = (milp.status == oracle.status.value) and (math.isnan(diff) or diff <= ORACLE_TOL)
                records.append({"sample": sample, "policy": policy.value.lower(), "milp_status": milp.status,
                                "oracle_status": oracle.status.value, "milp_w": milp.objective,
                                "oracle_w": oracle.objective, "abs_diff": diff,
                                "assignments": oracle.examined, "agree": agree})
        df = pd.DataFrame.from_records(records)
        path = self.file_manager.save_dataframe_csv(df, ORACLE_CHECK_CSV)
        mismatches = int((~df["agree"]).sum()) if not df.empty else 0
        if mismatches:
            self.ui.show_error(f"{mismatches} solver/oracle mismatches, see {path}")
            return EXIT_SOLVER_FAILURE
        self.ui.show_success(f"solver matches the oracle on {len(records)} checks ({path})")
        return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("config", nargs="?", default=os.path.join(DATA_DIR, DEFAULT_CONFIG_FILE),
                        help="scenario JSON file (default: %(default)s)")
    common.add_argument("--seed", type=int, help="override demand.seed")
    common.add_argument("--out", default=OUTPUT_DIR, help="output directory (default: %(default)s)")
    common.add_argument("--workers", type=int, help="worker threads for solves")
    common.add_argument("--dump-lp", action="store_true", help="write the built MILP in LP text format")
    common.add_argument("--excel", action="store_true", help="also write sweep tables as .xlsx")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v info, -vv debug")

    parser = argparse.ArgumentParser(prog="fran-energy",
                                     description="Energy-minimal VM placement in F-RAN vs C-RAN")
    parser.add_argument("--version", action="version", version=f"%(prog)s {TOOL_VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check a scenario file")
    solve = sub.add_parser("solve", parents=[common], help="solve one slot under one policy")
    solve.add_argument("--policy", required=True, choices=["cran", "fran"])
    slot = solve.add_mutually_exclusive_group()
    slot.add_argument("--hour", type=int, help="restrict demand to this profile slot")
    slot.add_argument("--latency", type=float, help="override every request's latency bound")
    sub.add_parser("sweep-load", parents=[common], help="daily load sweep, both policies")
    sub.add_parser("sweep-latency", parents=[common], help="latency-bound sweep, both policies")
    sub.add_parser("compare", parents=[common], help="both sweeps plus a savings summary")
    factor = sub.add_parser("sweep-factor", parents=[common], help="scale one parameter family, both policies")
    factor.add_argument("--factor", required=True, choices=list(SWEEP_FACTORS))
    factor.add_argument("--values", type=float, nargs="+", default=[1.0, 1.5, 2.0, 3.0],
                        help="increasing multipliers (default: %(default)s)")
    oracle = sub.add_parser("oracle-check", parents=[common], help="solver vs exhaustive oracle on small cuts")
    oracle.add_argument("--samples", type=int, default=10, help="seeds to check (default: %(default)s)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main function"""
    args = build_parser().parse_args(argv)
    if args.workers is not None and args.workers < 1:
        UserInterface.show_error("--workers must be >= 1")
        return EXIT_CONFIG_ERROR
    if getattr(args, "latency", None) is not None and not args.latency > 0:
        UserInterface.show_error("--latency must be > 0")
        return EXIT_CONFIG_ERROR
    level = [logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)]
    logging.basicConfig(level=level, format=LOG_FORMAT)
    return FranEnergyApp(args).run()


if __name__ == "__main__":
    sys.exit(main())
