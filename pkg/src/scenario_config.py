"""
Scenario configuration: strict JSON loading, defaults, and the resolved dump.

Every section except "topology" is optional; missing values come from config.py. The
resolved dump spells every value out (directed links, explicit profile), so loading a
resolved dump gives back the same configuration.
"""
import hashlib
import json
import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Sequence, Tuple, Union

from config import (DEFAULT_BATCH_SIZE, DEFAULT_NODE_BUDGET, DEFAULT_WORKERS, FEASIBILITY_TOL, GAP_TOL,
                    GRID_POINTS, INTEGRALITY_TOL, LATENCY_SLACK, LP_BACKENDS, PIVOT_TOL, PLATEAU_INDEX,
                    RESPONSE_MULTIPLIER)
from demand import DemandConfig, LoadProfile, ProfileEntry, Range, default_profile
from errors import ParseError, SchemaError, ValidationError
from formulation import FormulationOptions
from model import LinkKind, LinkSpec, NetworkInstance, NodeKind, NodeSpec, validate
from solver import SolverOptions

logger = logging.getLogger(__name__)

AUTO = "auto"
TOP_KEYS = ("name", "topology", "demand", "profile", "formulation", "solver", "sweep")
NODE_KEYS = ("id", "kind", "capacity_f", "cpi", "vm_overhead_w", "proc_energy")
LINK_KEYS = ("id", "from", "to", "kind", "capacity_b", "tx_energy")
RANGE_FIELDS = ("arrival_a", "instr", "traffic_t", "max_latency_l")


@dataclass(frozen=True)
class SweepConfig:
    latency_grid: Union[str, Tuple[float, ...]] = AUTO
    grid_points: int = GRID_POINTS
    plateau_index: int = PLATEAU_INDEX

    @property
    def is_auto(self) -> bool:
        return self.latency_grid == AUTO


@dataclass(frozen=True)
class ScenarioConfig:
    name: str
    instance: NetworkInstance
    demand: DemandConfig = DemandConfig()
    profile: LoadProfile = field(default_factory=default_profile)
    formulation: FormulationOptions = FormulationOptions()
    solver: SolverOptions = SolverOptions()
    sweep: SweepConfig = SweepConfig()

    def with_seed(self, seed: int) -> "ScenarioConfig":
        return replace(self, demand=replace(self.demand, seed=seed))

    def with_workers(self, workers: int) -> "ScenarioConfig":
        return replace(self, solver=replace(self.solver, workers=workers))


# ===== strict schema helpers =====

def _path(parent: str, key: str) -> str:
    return f"{parent}.{key}" if parent else key


def _object(value: Any, path: str, allowed: Sequence[str], required: Sequence[str] = ()) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise SchemaError(path, "expected an object")
    for key in value:
        if key not in allowed:
            raise SchemaError(_path(path, key), "unknown key")
    for key in required:
        if key not in value:
            raise SchemaError(_path(path, key), "missing required key")
    return value


def _number(obj: Dict[str, Any], key: str, path: str, default: Optional[float] = None,
            minimum: Optional[float] = None, strict: bool = False) -> float:
    where = _path(path, key)
    if key not in obj:
        if default is None:
            raise SchemaError(where, "missing required key")
        return default
    value = obj[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise SchemaError(where, f"expected a finite number, got {value!r}")
    if minimum is not None and (value <= minimum if strict else value < minimum):
        raise SchemaError(where, f"must be {'>' if strict else '>='} {minimum}, got {value}")
    return float(value)


def _integer(obj: Dict[str, Any], key: str, path: str, default: int, minimum: int) -> int:
    where = _path(path, key)
    value = obj.get(key, default)
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(where, f"expected an integer, got {value!r}")
    if value < minimum:
        raise SchemaError(where, f"must be >= {minimum}, got {value}")
    return value


def _string(obj: Dict[str, Any], key: str, path: str, default: Optional[str] = None) -> str:
    where = _path(path, key)
    if key not in obj:
        if default is None:
            raise SchemaError(where, "missing required key")
        return default
    if not isinstance(obj[key], str):
        raise SchemaError(where, f"expected a string, got {obj[key]!r}")
    return obj[key]


def _enum(enum_type, text: str, path: str):
    try:
        return enum_type(text.upper())
    except ValueError:
        choices = ", ".join(e.value.lower() for e in enum_type)
        raise SchemaError(path, f"unknown value {text!r}, expected one of {choices}")


# ===== sections =====

def _parse_topology(value: Any) -> NetworkInstance:
    topo = _object(value, "topology", ("nodes", "links"), ("nodes", "links"))
    for key in ("nodes", "links"):
        if not isinstance(topo[key], list):
            raise SchemaError(f"topology.{key}", "expected a list")
    nodes = []
    for i, raw in enumerate(topo["nodes"]):
        path = f"topology.nodes[{i}]"
        obj = _object(raw, path, NODE_KEYS, NODE_KEYS)
        nodes.append(NodeSpec(
            id=_string(obj, "id", path),
            kind=_enum(NodeKind, _string(obj, "kind", path), _path(path, "kind")),
            capacity_f=_number(obj, "capacity_f", path),
            cpi=_number(obj, "cpi", path),
            vm_overhead_w=_number(obj, "vm_overhead_w", path),
            proc_energy=_number(obj, "proc_energy", path),
        ))
    links = []
    for i, raw in enumerate(topo["links"]):
        path = f"topology.links[{i}]"
        obj = _object(raw, path, LINK_KEYS + ("bidirectional",), LINK_KEYS)
        bidirectional = obj.get("bidirectional", False)
        if not isinstance(bidirectional, bool):
            raise SchemaError(_path(path, "bidirectional"), "expected true or false")
        link_id, src, dst = _string(obj, "id", path), _string(obj, "from", path), _string(obj, "to", path)
        kind = _enum(LinkKind, _string(obj, "kind", path), _path(path, "kind"))
        cap, tx = _number(obj, "capacity_b", path), _number(obj, "tx_energy", path)
        if bidirectional:
            links.append(LinkSpec(f"{link_id}:fwd", src, dst, kind, cap, tx))
            links.append(LinkSpec(f"{link_id}:rev", dst, src, kind, cap, tx))
        else:
            links.append(LinkSpec(link_id, src, dst, kind, cap, tx))
    return NetworkInstance(tuple(nodes), tuple(links), ())


def _parse_demand(value: Any) -> DemandConfig:
    base = DemandConfig()
    obj = _object(value, "demand", ("seed", "requests_per_ud") + RANGE_FIELDS)
    kwargs: Dict[str, Any] = {
        "seed": _integer(obj, "seed", "demand", base.seed, 0),
        "requests_per_ud": _integer(obj, "requests_per_ud", "demand", base.requests_per_ud, 1),
    }
    for name in RANGE_FIELDS:
        default: Range = getattr(base, name)
        if name not in obj:
            kwargs[name] = default
            continue
        path = f"demand.{name}"
        raw = _object(obj[name], path, ("min", "max"), ("min", "max"))
        try:
            kwargs[name] = Range(_number(raw, "min", path), _number(raw, "max", path))
        except ValueError as e:
            raise SchemaError(path, str(e))
    try:
        return DemandConfig(**kwargs)
    except ValueError as e:
        raise SchemaError("demand", str(e))


def _parse_profile(value: Any) -> LoadProfile:
    if value == "default":
        return default_profile()
    if not isinstance(value, list):
        raise SchemaError("profile", "expected \"default\" or a list of {hour, active_fraction}")
    entries = []
    for i, raw in enumerate(value):
        path = f"profile[{i}]"
        obj = _object(raw, path, ("hour", "active_fraction"), ("hour", "active_fraction"))
        try:
            entries.append(ProfileEntry(_integer(obj, "hour", path, 0, 0),
                                        _number(obj, "active_fraction", path, minimum=0.0)))
        except ValueError as e:
            raise SchemaError(path, str(e))
    try:
        return LoadProfile(tuple(entries))
    except ValueError as e:
        raise SchemaError("profile", str(e))


def _flag(obj: dict, key: str, section: str, default: bool) -> bool:
    value = obj.get(key, default)
    if not isinstance(value, bool):
        raise SchemaError(f"{section}.{key}", "expected true or false")
    return value


def _parse_formulation(value: Any) -> FormulationOptions:
    obj = _object(value, "formulation", ("response_multiplier", "latency_slack", "tighten_bounds", "strengthen"))
    return FormulationOptions(
        response_multiplier=_number(obj, "response_multiplier", "formulation", RESPONSE_MULTIPLIER, 0.0),
        latency_slack=_number(obj, "latency_slack", "formulation", LATENCY_SLACK, 0.0),
        tighten_bounds=_flag(obj, "tighten_bounds", "formulation", True),
        strengthen=_flag(obj, "strengthen", "formulation", True),
    )


def _parse_solver(value: Any) -> SolverOptions:
    keys = ("feasibility_tol", "integrality_tol", "gap_tol", "pivot_tol", "node_budget",
            "workers", "batch_size", "lp_backend")
    obj = _object(value, "solver", keys)
    backend = _string(obj, "lp_backend", "solver", "auto")
    if backend not in LP_BACKENDS:
        raise SchemaError("solver.lp_backend", f"unknown backend {backend!r}, expected one of {', '.join(LP_BACKENDS)}")
    return SolverOptions(
        feasibility_tol=_number(obj, "feasibility_tol", "solver", FEASIBILITY_TOL, 0.0, strict=True),
        integrality_tol=_number(obj, "integrality_tol", "solver", INTEGRALITY_TOL, 0.0, strict=True),
        gap_tol=_number(obj, "gap_tol", "solver", GAP_TOL, 0.0),
        pivot_tol=_number(obj, "pivot_tol", "solver", PIVOT_TOL, 0.0, strict=True),
        node_budget=_integer(obj, "node_budget", "solver", DEFAULT_NODE_BUDGET, 1),
        workers=_integer(obj, "workers", "solver", DEFAULT_WORKERS, 1),
        batch_size=_integer(obj, "batch_size", "solver", DEFAULT_BATCH_SIZE, 1),
        lp_backend=backend,
    )


def _parse_sweep(value: Any) -> SweepConfig:
    obj = _object(value, "sweep", ("latency_grid", "grid_points", "plateau_index"))
    grid = obj.get("latency_grid", AUTO)
    if grid != AUTO:
        if not isinstance(grid, list) or not grid:
            raise SchemaError("sweep.latency_grid", "expected \"auto\" or a non-empty list of numbers")
        values = [_number({"v": g}, "v", f"sweep.latency_grid[{i}]", minimum=0.0, strict=True)
                  for i, g in enumerate(grid)]
        if any(b <= a for a, b in zip(values, values[1:])):
            raise SchemaError("sweep.latency_grid", "values must be strictly increasing")
        grid = tuple(values)
    points = _integer(obj, "grid_points", "sweep", GRID_POINTS, 2)
    plateau = _integer(obj, "plateau_index", "sweep", PLATEAU_INDEX, 1)
    if plateau >= points:
        raise SchemaError("sweep.plateau_index", f"must be below grid_points ({points}), got {plateau}")
    return SweepConfig(grid, points, plateau)


def parse_config(data: Any) -> ScenarioConfig:
    """
    Build a ScenarioConfig from already-decoded JSON.

    Raises:
        SchemaError: missing, unknown or mistyped key
        ValidationError: the topology violates model invariants
    """
    obj = _object(data, "", TOP_KEYS, ("topology",))
    instance = _parse_topology(obj["topology"])
    violations = validate(instance)
    if violations:
        raise ValidationError(violations)
    return ScenarioConfig(
        name=_string(obj, "name", "", "scenario"),
        instance=instance,
        demand=_parse_demand(obj.get("demand", {})),
        profile=_parse_profile(obj.get("profile", "default")),
        formulation=_parse_formulation(obj.get("formulation", {})),
        solver=_parse_solver(obj.get("solver", {})),
        sweep=_parse_sweep(obj.get("sweep", {})),
    )


def load_config(path: str) -> ScenarioConfig:
    """Read and validate a UTF-8 JSON scenario file"""
    with open(path, "r", encoding="utf-8") as f:
        text = f.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(e.msg, e.lineno, e.colno)
    config = parse_config(data)
    logger.info("loaded %s: %d nodes, %d links", path, len(config.instance.nodes), len(config.instance.links))
    return config


# ===== resolved dump =====

def resolved_dict(config: ScenarioConfig) -> Dict[str, Any]:
    """Every setting spelled out; parse_config(resolved_dict(c)) == c"""
    inst = config.instance
    demand, form, solver, sweep = config.demand, config.formulation, config.solver, config.sweep
    return {
        "name": config.name,
        "topology": {
            "nodes": [{"id": n.id, "kind": n.kind.value.lower(), "capacity_f": n.capacity_f, "cpi": n.cpi,
                       "vm_overhead_w": n.vm_overhead_w, "proc_energy": n.proc_energy} for n in inst.nodes],
            "links": [{"id": l.id, "from": l.src, "to": l.dst, "kind": l.kind.value.lower(),
                       "capacity_b": l.capacity_b, "tx_energy": l.tx_energy} for l in inst.links],
        },
        "demand": {"seed": demand.seed, "requests_per_ud": demand.requests_per_ud,
                   **{name: r.to_dict() for name, r in demand.ranges()}},
        "profile": [{"hour": e.hour, "active_fraction": e.active_fraction} for e in config.profile],
        "formulation": {"response_multiplier": form.response_multiplier,
                        "latency_slack": form.latency_slack, "tighten_bounds": form.tighten_bounds,
                        "strengthen": form.strengthen},
        "solver": {"feasibility_tol": solver.feasibility_tol, "integrality_tol": solver.integrality_tol,
                   "gap_tol": solver.gap_tol, "pivot_tol": solver.pivot_tol,
                   "node_budget": solver.node_budget, "workers": solver.workers,
                   "batch_size": solver.batch_size, "lp_backend": solver.lp_backend},
        "sweep": {"latency_grid": sweep.latency_grid if sweep.is_auto else list(sweep.latency_grid),
                  "grid_points": sweep.grid_points, "plateau_index": sweep.plateau_index},
    }


def config_hash(config: ScenarioConfig) -> str:
    """sha256 of the canonical resolved config; worker count excluded since it never changes results"""
    resolved = resolved_dict(config)
    resolved["solver"].pop("workers")
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
