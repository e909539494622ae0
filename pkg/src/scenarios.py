"""
The experiments: a daily load sweep, a latency-bound sweep and a factor sweep over
scaled instance parameters, each solved under C-RAN and F-RAN hosting, plus the
automatic latency grid.

Rows are independent solves and may run on a thread pool; the result is always
assembled in (sweep key, policy) order so outputs do not depend on the worker count.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from analyzer import CRAN, FRAN, SavingsSummary, SweepAnalyzer, saving_pct
from config import GRID_POINTS, PLATEAU_INDEX, SWEEP_FACTORS, TIGHT_BOUND_MARGIN
from demand import DemandConfig, LoadProfile, active_uds, generate_requests, slot_requests
from errors import FranError, IterationLimit, SchemaError
from model import HostingPolicy, NetworkInstance, NodeKind, work_rate
from services import SolveReport, SolveService

__all__ = ["SweepRow", "SweepResult", "run_load_sweep", "run_latency_sweep", "run_factor_sweep",
           "scale_instance", "auto_latency_grid", "saving_pct", "POLICIES"]

logger = logging.getLogger(__name__)

POLICIES = (HostingPolicy.CRAN, HostingPolicy.FRAN)
ERROR_STATUS = "ERROR"


@dataclass(frozen=True)
class SweepRow:
    key: str
    key_value: float
    policy: str
    status: str
    total_w: float = math.nan
    proc_w: float = math.nan
    vm_w: float = math.nan
    traffic_w: float = math.nan
    bnb_nodes: int = 0
    message: str = ""

    @property
    def is_optimal(self) -> bool:
        return self.status == "OPTIMAL"

    def as_record(self) -> dict:
        return {
            "key": self.key, "policy": self.policy, "status": self.status,
            "total_w": self.total_w, "proc_w": self.proc_w, "vm_w": self.vm_w,
            "traffic_w": self.traffic_w, "bnb_nodes": self.bnb_nodes,
        }

    @classmethod
    def from_report(cls, key: str, key_value: float, report: SolveReport) -> "SweepRow":
        b = report.breakdown
        if b is None:
            return cls(key, key_value, report.policy.value.lower(), report.status,
                       bnb_nodes=report.nodes_explored)
        return cls(key, key_value, report.policy.value.lower(), report.status,
                   b.total_w, b.proc_w, b.vm_w, b.traffic_w, report.nodes_explored)


@dataclass(frozen=True)
class SweepResult:
    kind: str
    rows: Tuple[SweepRow, ...]
    savings: SavingsSummary
    metadata: Dict[str, object] = field(default_factory=dict)

    def column(self, policy: str) -> List[float]:
        return [r.total_w for r in self.rows if r.policy == policy]

    @property
    def failed_rows(self) -> List[SweepRow]:
        return [r for r in self.rows if r.status not in ("OPTIMAL", "INFEASIBLE")]


def _key_text(value: float, integral: bool) -> str:
    return str(int(value)) if integral else "%.17g" % value


def _solve_row(service: SolveService, key: str, key_value: float,
               instance: NetworkInstance, policy: HostingPolicy) -> SweepRow:
    """One solve; failures become rows with their status instead of aborting the sweep"""
    try:
        return SweepRow.from_report(key, key_value, service.solve(instance, policy))
    except IterationLimit as e:
        logger.error("row %s/%s: %s", key, policy.value, e)
        nodes = e.report.nodes_explored if e.report is not None else 0
        return SweepRow(key, key_value, policy.value.lower(), "NODE_LIMIT", bnb_nodes=nodes, message=str(e))
    except FranError as e:
        logger.error("row %s/%s: %s", key, policy.value, e)
        return SweepRow(key, key_value, policy.value.lower(), ERROR_STATUS, message=f"{type(e).__name__}: {e}")
    except Exception as e:
        # unexpected failures still produce a row
        logger.exception("row %s/%s: unexpected failure", key, policy.value)
        return SweepRow(key, key_value, policy.value.lower(), ERROR_STATUS, message=f"{type(e).__name__}: {e}")


def _run_rows(service: SolveService, tasks: Sequence[Tuple[str, float, NetworkInstance, HostingPolicy]],
              workers: int) -> List[SweepRow]:
    call: Callable = lambda task: _solve_row(service, *task)
    if workers > 1 and len(tasks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(call, tasks))
    else:
        rows = [call(task) for task in tasks]
    return sorted(rows, key=lambda r: (r.key_value, r.policy))


def run_load_sweep(instance: NetworkInstance, profile: LoadProfile, demand: DemandConfig,
                   service: Optional[SolveService] = None, workers: int = 1) -> SweepResult:
    """
    Solve every profile slot under both policies.

    Each slot keeps only the requests of its active UDs (nested prefix by UD id) and
    keeps their generated latency bounds.
    """
    service = service or SolveService()
    if len(profile) != 24:
        logger.warning("load profile has %d slots, a daily sweep normally has 24", len(profile))
    uds = instance.ud_ids()
    requests = generate_requests(demand, uds)
    tasks = []
    for entry in profile:
        active = active_uds(entry, uds)
        slot = instance.with_requests(slot_requests(requests, active))
        logger.info("hour %d: %d active UDs, %d requests", entry.hour, len(active), len(slot.requests))
        for policy in POLICIES:
            tasks.append((_key_text(entry.hour, True), float(entry.hour), slot, policy))
    rows = _run_rows(service, tasks, workers)
    analyzer = SweepAnalyzer(rows)
    savings = analyzer.savings()
    metadata = {
        "profile": [{"hour": e.hour, "active_fraction": e.active_fraction} for e in profile],
        "load_tracking_spearman": analyzer.load_tracking(profile.fractions),
        "dominance_violations": analyzer.dominance_violations(),
    }
    return SweepResult("load", tuple(rows), savings, metadata)


def _check_grid(grid: Sequence[float]):
    if not grid:
        raise ValueError("latency grid is empty")
    for value in grid:
        if not (value > 0 and math.isfinite(value)):
            raise ValueError(f"latency grid values must be positive and finite, got {value}")
    for a, b in zip(grid, grid[1:]):
        if not b > a:
            raise ValueError(f"latency grid must be strictly increasing ({a} then {b})")


def run_latency_sweep(instance: NetworkInstance, demand: DemandConfig, latency_grid: Sequence[float],
                      service: Optional[SolveService] = None, workers: int = 1,
                      grid_metadata: Optional[dict] = None) -> SweepResult:
    """Solve the full-load instance with every request's bound set to each grid value"""
    _check_grid(latency_grid)
    service = service or SolveService()
    base = instance.with_requests(generate_requests(demand, instance.ud_ids()))
    tasks = []
    for value in latency_grid:
        bounded = base.with_latency(value)
        for policy in POLICIES:
            tasks.append((_key_text(value, False), float(value), bounded, policy))
    rows = _run_rows(service, tasks, workers)
    analyzer = SweepAnalyzer(rows)
    metadata = {
        "latency_grid": list(latency_grid),
        "grid": dict(grid_metadata or {"mode": "explicit"}),
        "dominance_violations": analyzer.dominance_violations(),
    }
    return SweepResult("latency", tuple(rows), analyzer.savings(), metadata)


EDGE_KINDS = (NodeKind.ENODEB, NodeKind.UD)


def scale_instance(instance: NetworkInstance, factor: str, multiplier: float) -> NetworkInstance:
    """
    Copy of the instance with one parameter family multiplied.

    edge_capacity scales capacity_f of eNodeBs and UDs, cpi scales every node's cycles
    per instruction and link_capacity scales every link's capacity_b.

    Raises:
        SchemaError: unknown factor
    """
    if factor == "edge_capacity":
        nodes = [replace(n, capacity_f=n.capacity_f * multiplier) if n.kind in EDGE_KINDS else n
                 for n in instance.nodes]
        return NetworkInstance(nodes, instance.links, instance.requests)
    if factor == "cpi":
        nodes = [replace(n, cpi=n.cpi * multiplier) for n in instance.nodes]
        return NetworkInstance(nodes, instance.links, instance.requests)
    if factor == "link_capacity":
        links = [replace(l, capacity_b=l.capacity_b * multiplier) for l in instance.links]
        return NetworkInstance(instance.nodes, links, instance.requests)
    raise SchemaError("sweep.factor", f"unknown factor '{factor}', expected one of {', '.join(SWEEP_FACTORS)}")


def run_factor_sweep(instance: NetworkInstance, demand: DemandConfig, factor: str,
                     multipliers: Sequence[float], service: Optional[SolveService] = None,
                     workers: int = 1) -> SweepResult:
    """Solve the full-load instance with one parameter family scaled by each multiplier"""
    if factor not in SWEEP_FACTORS:
        raise SchemaError("sweep.factor", f"unknown factor '{factor}', expected one of {', '.join(SWEEP_FACTORS)}")
    if not multipliers:
        raise ValueError("factor sweep needs at least one multiplier")
    for a, b in zip(multipliers, multipliers[1:]):
        if not b > a:
            raise ValueError(f"multipliers must be strictly increasing ({a} then {b})")
    if not all(m > 0 and math.isfinite(m) for m in multipliers):
        raise ValueError(f"multipliers must be positive and finite, got {list(multipliers)}")
    service = service or SolveService()
    base = instance.with_requests(generate_requests(demand, instance.ud_ids()))
    tasks = []
    for value in multipliers:
        scaled = scale_instance(base, factor, value)
        for policy in POLICIES:
            tasks.append((_key_text(value, False), float(value), scaled, policy))
    rows = _run_rows(service, tasks, workers)
    analyzer = SweepAnalyzer(rows)
    metadata = {
        "factor": factor,
        "multipliers": list(multipliers),
        "dominance_violations": analyzer.dominance_violations(),
    }
    return SweepResult("factor", tuple(rows), analyzer.savings(), metadata)


def auto_latency_grid(instance: NetworkInstance, demand: DemandConfig,
                      service: Optional[SolveService] = None,
                      points: int = GRID_POINTS, plateau_index: int = PLATEAU_INDEX) -> Tuple[List[float], dict]:
    """
    Log-spaced latency grid for the full-load instance.

    The first point is just above the tightest bound a GPON node can meet while hosting
    everything; the point at plateau_index is where the unbounded F-RAN optimum first
    becomes feasible, so every later point sits on the F-RAN plateau.

    Raises:
        SchemaError: no GPON node can host the full load, an explicit grid is needed
    """
    if points < 2 or not 1 <= plateau_index < points:
        raise SchemaError("sweep", f"need points >= 2 and 1 <= plateau_index < points, got {points}, {plateau_index}")
    service = service or SolveService()
    base = instance.with_requests(generate_requests(demand, instance.ud_ids()))
    gpon = [instance.node(n) for n in instance.ids_of_kind(NodeKind.OLT, NodeKind.ONU)]
    headroom = max((n.capacity_f - sum(work_rate(r, n) for r in base.requests) for n in gpon), default=0.0)
    if headroom <= 0:
        raise SchemaError("sweep.latency_grid", "no GPON node can host the full load, give an explicit grid")
    l_lo = TIGHT_BOUND_MARGIN / headroom

    unbounded = service.solve(base.with_latency(math.inf), HostingPolicy.FRAN)
    l_plateau = math.nan
    if unbounded.is_optimal:
        load: Dict[str, float] = {}
        requests = {r.id: r for r in base.requests}
        for req_id, host in unbounded.placement.hosts.items():
            load[host] = load.get(host, 0.0) + work_rate(requests[req_id], instance.node(host))
        slack = {h: instance.node(h).capacity_f - lam for h, lam in load.items()}
        if slack and min(slack.values()) > 0:
            # nudge past the boundary so the latency slack does not cut the optimum off
            l_plateau = max(1.0 / s for s in slack.values()) * (1.0 + 1e-6)
    fallback = not (math.isfinite(l_plateau) and l_plateau > l_lo)
    if fallback:
        logger.warning("F-RAN plateau bound %.6g not above %.6g, using a fixed decade", l_plateau, l_lo)
        l_plateau = l_lo * 10.0
    ratio = (l_plateau / l_lo) ** (1.0 / plateau_index)
    grid = [l_lo * ratio ** i for i in range(points)]
    grid[plateau_index] = l_plateau
    metadata = {
        "mode": "auto",
        "gpon_headroom": headroom,
        "l_lo": l_lo,
        "l_plateau": l_plateau,
        "plateau_fallback": fallback,
        "points": points,
        "plateau_index": plateau_index,
    }
    logger.info("auto latency grid: %.6g .. %.6g, plateau at %.6g", grid[0], grid[-1], l_plateau)
    return grid, metadata
