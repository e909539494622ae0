"""
Placement-and-routing MILP for one network instance under one hosting policy.

Variables (all binary):
    x[r][n]  request r is served by a VM on node n (n in the policy's hosting set)
    z[r][l]  request r's route uses directed link l
    y[n]     node n hosts at least one VM
Objective: VM overhead + processing energy + transmission energy, in watts.
Each request is served whole by one node over one path; relay nodes pay no compute.
With the strengthen option, capacity/VM coupling rows and same-source cover rows
tighten the LP relaxation without removing any optimal placement.
"""
import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from config import FEASIBILITY_TOL, LATENCY_SLACK, RESPONSE_MULTIPLIER
from errors import CorruptSolution, EmptyHostingSet, UnroutableRequest, ValidationError
from milp_ir import MilpProblem, Sense, VarDomain, VariableSpec
from model import HostingPolicy, NetworkInstance, NodeSpec, Request, hosting_set, validate, work_rate
from queueing import big_m_for, required_headroom

__all__ = [
    "FormulationOptions", "VarMap", "FormulationReport", "Placement", "PowerBreakdown",
    "build", "extract_placement", "placement_power", "placement_violations",
]


@dataclass(frozen=True)
class FormulationOptions:
    response_multiplier: float = RESPONSE_MULTIPLIER
    latency_slack: float = LATENCY_SLACK
    tighten_bounds: bool = True
    # adds the capacity/VM coupling rows and branches on x before y before z
    strengthen: bool = True


# branching classes: assignment first, then VM flags, then routes
X_PRIORITY, Y_PRIORITY, Z_PRIORITY = 2, 1, 0
# dropped circulation edges may carry at most this much power
ZERO_COST_TOL = 1e-12
# same-source groups above this size get no cover rows
MAX_COVER_GROUP = 6


@dataclass(frozen=True)
class VarMap:
    x: Dict[str, Dict[str, int]]
    z: Dict[str, Dict[str, int]]
    y: Dict[str, int]
    sources: Dict[str, str]
    link_ends: Dict[str, Tuple[str, str]]
    # objective coefficient of each z[r][l]
    route_cost: Dict[str, Dict[str, float]] = field(default_factory=dict)


@dataclass(frozen=True)
class FormulationReport:
    variables: Dict[str, int]
    constraints: Dict[str, int]
    big_m: float
    latency_slack: float
    fixed_by_tightening: int

    @property
    def binaries(self) -> int:
        return sum(self.variables.values())


@dataclass(frozen=True)
class Placement:
    hosts: Dict[str, str]
    routes: Dict[str, Tuple[str, ...]]
    vm_on: Dict[str, bool] = field(default_factory=dict)

    def active_nodes(self) -> List[str]:
        return sorted(n for n, on in self.vm_on.items() if on)


@dataclass(frozen=True)
class PowerBreakdown:
    total_w: float
    proc_w: float
    vm_w: float
    traffic_w: float

    @classmethod
    def of(cls, proc_w: float, vm_w: float, traffic_w: float) -> "PowerBreakdown":
        return cls(proc_w + vm_w + traffic_w, proc_w, vm_w, traffic_w)


def build(instance: NetworkInstance, policy: HostingPolicy,
          options: FormulationOptions = FormulationOptions()) -> Tuple[MilpProblem, VarMap, FormulationReport]:
    """
    Emit the MINIMIZE problem for instance under policy.

    Raises:
        ValidationError: the instance violates model invariants
        EmptyHostingSet: the policy admits no node of the instance
        UnroutableRequest: a request's source cannot host and has no outgoing link
    """
    violations = validate(instance)
    if violations:
        raise ValidationError(violations)
    allowed = hosting_set(instance, policy)
    hosts = [n for n in instance.nodes if n.id in allowed]
    if not hosts:
        raise EmptyHostingSet(f"{policy.value} admits no node of this instance")
    for req in instance.requests:
        if req.source not in allowed and not instance.out_links[req.source]:
            raise UnroutableRequest(f"request {req.id}: source {req.source} cannot host and has no outgoing link")

    slack = options.latency_slack
    big_m = big_m_for(instance)
    traffic_scale = 1.0 + options.response_multiplier
    problem = MilpProblem(f"{policy.value.lower()}-{len(instance.requests)}req")
    x: Dict[str, Dict[str, int]] = {}
    z: Dict[str, Dict[str, int]] = {}
    y: Dict[str, int] = {}
    fixed = 0
    priority = (lambda p: p) if options.strengthen else (lambda p: 0)
    # smallest headroom (plus slack) any request hostable at the node would need
    floor: Dict[str, float] = {n.id: math.inf for n in hosts}

    for req in instance.requests:
        headroom = required_headroom(req.max_latency_l)
        need = headroom + slack if req.has_latency_bound else 0.0
        x[req.id] = {}
        for node in hosts:
            work = work_rate(req, node)
            too_big = work > node.capacity_f
            if req.has_latency_bound:
                too_big = too_big or work + headroom + slack > node.capacity_f
            upper = 0.0 if options.tighten_bounds and too_big else 1.0
            fixed += upper == 0.0
            if upper > 0.0:
                floor[node.id] = min(floor[node.id], need)
            x[req.id][node.id] = problem.add_variable(
                VariableSpec(f"x[{req.id}][{node.id}]", VarDomain.BINARY, 0.0, upper, priority(X_PRIORITY)))
    for req in instance.requests:
        z[req.id] = {}
        for link in instance.links:
            z[req.id][link.id] = problem.add_variable(
                VariableSpec(f"z[{req.id}][{link.id}]", VarDomain.BINARY, 0.0, 1.0, priority(Z_PRIORITY)))
    for node in instance.nodes:
        y[node.id] = problem.add_variable(
            VariableSpec(f"y[{node.id}]", VarDomain.BINARY, 0.0, 1.0, priority(Y_PRIORITY)))

    route_cost = {req.id: {link.id: link.tx_energy * req.traffic_t * traffic_scale for link in instance.links}
                  for req in instance.requests}
    objective = [(y[n.id], n.vm_overhead_w) for n in instance.nodes]
    for req in instance.requests:
        for node in hosts:
            objective.append((x[req.id][node.id], node.proc_energy * work_rate(req, node)))
        for link in instance.links:
            objective.append((z[req.id][link.id], route_cost[req.id][link.id]))
    problem.set_objective(objective)

    counts = {"assign": 0, "activate": 0, "capacity": 0, "latency": 0, "flow": 0, "link": 0,
              "coupling": 0, "cover": 0}

    # (A) every request served exactly once
    for req in instance.requests:
        problem.add_constraint([(x[req.id][n.id], 1.0) for n in hosts], Sense.EQ, 1.0, f"assign[{req.id}]")
        counts["assign"] += 1
    # (B) hosting turns the VM on
    for req in instance.requests:
        for node in hosts:
            problem.add_constraint([(x[req.id][node.id], 1.0), (y[node.id], -1.0)], Sense.LE, 0.0,
                                   f"act[{req.id}][{node.id}]")
            counts["activate"] += 1
    # (C) compute capacity
    for node in hosts:
        terms = [(x[req.id][node.id], work_rate(req, node)) for req in instance.requests]
        problem.add_constraint(terms, Sense.LE, node.capacity_f, f"cap[{node.id}]")
        counts["capacity"] += 1
    # (D) M/M/1 headroom, active only where the request is hosted; the request's own
    # headroom is already a large enough M since (C) keeps F - lambda >= 0
    for req in instance.requests:
        if not req.has_latency_bound:
            continue
        headroom = required_headroom(req.max_latency_l)
        m = headroom if options.strengthen else big_m
        for node in hosts:
            terms = [(x[other.id][node.id], work_rate(other, node)) for other in instance.requests]
            terms.append((x[req.id][node.id], m + slack))
            problem.add_constraint(terms, Sense.LE, node.capacity_f - headroom + m,
                                   f"lat[{req.id}][{node.id}]")
            counts["latency"] += 1
    # (E) one unit of flow from the source to the host
    for req in instance.requests:
        for node in instance.nodes:
            terms = [(z[req.id][instance.links[i].id], 1.0) for i in instance.out_links[node.id]]
            terms += [(z[req.id][instance.links[i].id], -1.0) for i in instance.in_links[node.id]]
            if node.id in allowed:
                terms.append((x[req.id][node.id], 1.0))
            supply = 1.0 if node.id == req.source else 0.0
            problem.add_constraint(terms, Sense.EQ, supply, f"flow[{req.id}][{node.id}]")
            counts["flow"] += 1
    # (F) link capacity
    for link in instance.links:
        terms = [(z[req.id][link.id], req.traffic_t) for req in instance.requests]
        problem.add_constraint(terms, Sense.LE, link.capacity_b, f"link[{link.id}]")
        counts["link"] += 1
    # (G) work only on an active VM, with at least the smallest headroom any hostable
    # request needs; holds at every solution that switches on only used VMs
    if options.strengthen:
        for node in hosts:
            usable = node.capacity_f - (floor[node.id] if math.isfinite(floor[node.id]) else 0.0)
            terms = [(x[req.id][node.id], work_rate(req, node)) for req in instance.requests]
            terms.append((y[node.id], -usable))
            problem.add_constraint(terms, Sense.LE, 0.0, f"couple[{node.id}]")
            counts["coupling"] += 1
        # (H) requests sharing a source that cannot all stay on one host
        for node in hosts:
            for k, group in enumerate(_minimal_covers(instance, node, slack)):
                problem.add_constraint([(x[r][node.id], 1.0) for r in group], Sense.LE, len(group) - 1.0,
                                       f"cover[{node.id}][{k}]")
                counts["cover"] += 1

    varmap = VarMap(
        x=x, z=z, y=y,
        sources={r.id: r.source for r in instance.requests},
        link_ends={l.id: (l.src, l.dst) for l in instance.links},
        route_cost=route_cost,
    )
    report = FormulationReport(
        variables={"x": len(instance.requests) * len(hosts),
                   "z": len(instance.requests) * len(instance.links),
                   "y": len(instance.nodes)},
        constraints=counts,
        big_m=big_m,
        latency_slack=slack,
        fixed_by_tightening=int(fixed),
    )
    return problem.freeze(), varmap, report


def _minimal_covers(instance: NetworkInstance, node: NodeSpec, slack: float) -> List[Tuple[str, ...]]:
    """
    Minimal sets of same-source requests that node cannot host together: their work
    plus the largest headroom among them exceeds the capacity.
    """
    def need(r: Request) -> float:
        return required_headroom(r.max_latency_l) + slack if r.has_latency_bound else 0.0

    groups: Dict[str, List[Request]] = {}
    for req in instance.requests:
        # requests that cannot fit alone are left to bound tightening
        if work_rate(req, node) + need(req) <= node.capacity_f:
            groups.setdefault(req.source, []).append(req)
    covers: List[Tuple[str, ...]] = []
    for source in sorted(groups):
        group = groups[source]
        if len(group) < 2 or len(group) > MAX_COVER_GROUP:
            continue
        found: List[frozenset] = []
        for size in range(2, len(group) + 1):
            for subset in itertools.combinations(group, size):
                ids = frozenset(r.id for r in subset)
                if any(smaller <= ids for smaller in found):
                    continue
                load = sum(work_rate(r, node) for r in subset)
                if load + max(need(r) for r in subset) > node.capacity_f + FEASIBILITY_TOL:
                    found.append(ids)
                    covers.append(tuple(r.id for r in subset))
    return covers


def _trace_route(request_id: str, source: str, host: str, used: Sequence[str],
                 link_ends: Dict[str, Tuple[str, str]],
                 costs: Optional[Dict[str, float]] = None) -> Tuple[str, ...]:
    """
    Shortest source-to-host path inside the used links.

    Flow conservation makes whatever the path does not use a union of circulations.
    When those cost nothing (zero traffic or zero-energy links) the solver may switch
    them on; they are dropped here.
    """
    outgoing: Dict[str, List[str]] = {}
    for link_id in used:
        outgoing.setdefault(link_ends[link_id][0], []).append(link_id)
    parent: Dict[str, str] = {}
    queue = deque([source])
    seen = {source}
    while queue and host not in seen:
        node = queue.popleft()
        for link_id in outgoing.get(node, ()):
            nxt = link_ends[link_id][1]
            if nxt not in seen:
                seen.add(nxt)
                parent[nxt] = link_id
                queue.append(nxt)
    if host not in seen:
        raise CorruptSolution(f"request {request_id}: used links do not lead from {source} to {host}")
    route: List[str] = []
    at = host
    while at != source:
        route.append(parent[at])
        at = link_ends[parent[at]][0]
    route.reverse()
    dropped = set(used).difference(route)
    if dropped:
        waste = sum((costs or {}).get(link_id, math.inf) for link_id in dropped)
        if waste > ZERO_COST_TOL:
            raise CorruptSolution(f"request {request_id}: {len(dropped)} route edges off the path "
                                  f"carry {waste:.6g} W")
    return tuple(route)


def extract_placement(varmap: VarMap, solution: Sequence[float]) -> Placement:
    """Read hosts, routes and VM flags out of an integral solution vector"""
    hosts: Dict[str, str] = {}
    routes: Dict[str, Tuple[str, ...]] = {}
    for req_id, row in varmap.x.items():
        chosen = [node_id for node_id, index in row.items() if solution[index] > 0.5]
        if len(chosen) != 1:
            raise CorruptSolution(f"request {req_id}: x row selects {len(chosen)} hosts")
        hosts[req_id] = chosen[0]
        used = [link_id for link_id, index in varmap.z[req_id].items() if solution[index] > 0.5]
        routes[req_id] = _trace_route(req_id, varmap.sources[req_id], chosen[0], used, varmap.link_ends,
                                      varmap.route_cost.get(req_id))
    vm_on = {node_id: solution[index] > 0.5 for node_id, index in varmap.y.items()}
    return Placement(hosts, routes, vm_on)


def placement_power(instance: NetworkInstance, placement: Placement,
                    response_multiplier: float = RESPONSE_MULTIPLIER) -> PowerBreakdown:
    """Recompute the three objective components from a placement"""
    requests = {r.id: r for r in instance.requests}
    nodes = instance.node_by_id
    links = instance.link_by_id
    proc_w = sum(nodes[host].proc_energy * work_rate(requests[req_id], nodes[host])
                 for req_id, host in placement.hosts.items())
    vm_w = sum(nodes[n].vm_overhead_w for n, on in placement.vm_on.items() if on)
    scale = 1.0 + response_multiplier
    traffic_w = sum(links[l].tx_energy * requests[req_id].traffic_t * scale
                    for req_id, route in placement.routes.items() for l in route)
    return PowerBreakdown.of(proc_w, vm_w, traffic_w)


def placement_violations(instance: NetworkInstance, placement: Placement, policy: HostingPolicy,
                         slack: float = 0.0, tol: float = 1e-9) -> List[str]:
    """
    Independent feasibility check: assignment, hosting policy, VM flags, compute capacity,
    latency headroom, route shape and link capacity. Empty list means feasible.
    """
    problems: List[str] = []
    allowed = hosting_set(instance, policy)
    nodes = instance.node_by_id
    links = instance.link_by_id
    load: Dict[str, float] = {}
    need: Dict[str, float] = {}
    carried: Dict[str, float] = {}
    for req in instance.requests:
        host = placement.hosts.get(req.id)
        if host is None:
            problems.append(f"{req.id}: not assigned")
            continue
        if host not in allowed:
            problems.append(f"{req.id}: host {host} outside the {policy.value} hosting set")
            continue
        if not placement.vm_on.get(host, False):
            problems.append(f"{req.id}: host {host} has no active VM flag")
        load[host] = load.get(host, 0.0) + work_rate(req, nodes[host])
        need[host] = max(need.get(host, 0.0), required_headroom(req.max_latency_l))
        at = req.source
        for link_id in placement.routes.get(req.id, ()):
            link = links.get(link_id)
            if link is None or link.src != at:
                problems.append(f"{req.id}: route breaks at {link_id}")
                break
            at = link.dst
            carried[link_id] = carried.get(link_id, 0.0) + req.traffic_t
        else:
            if at != host:
                problems.append(f"{req.id}: route ends at {at}, host is {host}")
    for node_id, lam in load.items():
        cap = nodes[node_id].capacity_f
        if lam > cap + tol:
            problems.append(f"{node_id}: load {lam:.6g} exceeds capacity {cap:.6g}")
        elif need[node_id] > 0 and cap - lam < need[node_id] + slack - tol:
            problems.append(f"{node_id}: headroom {cap - lam:.6g} below required {need[node_id]:.6g}")
    for link_id, flow in carried.items():
        if flow > links[link_id].capacity_b + tol:
            problems.append(f"{link_id}: traffic {flow:.6g} exceeds capacity {links[link_id].capacity_b:.6g}")
    return problems
