"""
Brute-force reference optimizer for tiny instances.

Every host assignment is enumerated; compute capacity and M/M/1 headroom are checked per
node, each request is routed on its minimum-transmission-energy path, and the cheapest
feasible assignment wins (first in lexicographic order on ties). Instances where those
independent paths would overload a link are refused instead of approximated.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Tuple

import networkx as nx

from config import LATENCY_SLACK, RESPONSE_MULTIPLIER
from errors import CapacityCoupling, EmptyHostingSet, TooLarge
from formulation import Placement, PowerBreakdown, placement_power
from model import HostingPolicy, LinkKind, NetworkInstance, NodeKind, hosting_set, work_rate
from queueing import required_headroom

__all__ = ["OracleStatus", "OracleResult", "enumerate_optimum", "downsample", "MAX_ASSIGNMENTS",
           "TooLarge", "CapacityCoupling"]

logger = logging.getLogger(__name__)

MAX_ASSIGNMENTS = 10 ** 6


class OracleStatus(str, Enum):
    OPTIMAL = "OPTIMAL"
    INFEASIBLE = "INFEASIBLE"


@dataclass(frozen=True)
class OracleResult:
    status: OracleStatus
    objective: float
    placement: Optional[Placement]
    examined: int
    breakdown: Optional[PowerBreakdown] = None

    @property
    def is_optimal(self) -> bool:
        return self.status is OracleStatus.OPTIMAL


def _min_energy_graph(instance: NetworkInstance) -> nx.DiGraph:
    """One edge per ordered node pair, keeping the cheapest parallel link"""
    graph = nx.DiGraph()
    graph.add_nodes_from(n.id for n in instance.nodes)
    for link in instance.links:
        current = graph.get_edge_data(link.src, link.dst)
        if current is None or link.tx_energy < current["tx_energy"]:
            graph.add_edge(link.src, link.dst, tx_energy=link.tx_energy, link=link.id)
    return graph


def _route_table(instance: NetworkInstance, hosts: List[str]) -> Dict[Tuple[str, str], Optional[Tuple[str, ...]]]:
    """Link-id path from every request source to every host (None when unreachable)"""
    graph = _min_energy_graph(instance)
    table: Dict[Tuple[str, str], Optional[Tuple[str, ...]]] = {}
    for source in sorted({r.source for r in instance.requests}):
        _, paths = nx.single_source_dijkstra(graph, source, weight="tx_energy")
        for host in hosts:
            path = paths.get(host)
            if path is None:
                table[(source, host)] = None
            else:
                table[(source, host)] = tuple(graph[a][b]["link"] for a, b in zip(path, path[1:]))
    return table


def enumerate_optimum(instance: NetworkInstance, policy: HostingPolicy,
                      latency_slack: float = LATENCY_SLACK,
                      response_multiplier: float = RESPONSE_MULTIPLIER) -> OracleResult:
    """
    Exhaustive optimum of the placement problem.

    Raises:
        TooLarge: more than MAX_ASSIGNMENTS host assignments
        CapacityCoupling: some compute-feasible assignment overloads a link
        EmptyHostingSet: the policy admits no node
    """
    allowed = hosting_set(instance, policy)
    hosts = [n.id for n in instance.nodes if n.id in allowed]
    requests = list(instance.requests)
    if not requests:
        return OracleResult(OracleStatus.OPTIMAL, 0.0, Placement({}, {}, {}), 1, PowerBreakdown.of(0.0, 0.0, 0.0))
    if not hosts:
        raise EmptyHostingSet(f"{policy.value} admits no node of this instance")
    total = len(hosts) ** len(requests)
    if total > MAX_ASSIGNMENTS:
        raise TooLarge(f"{len(hosts)}^{len(requests)} = {total} assignments exceed {MAX_ASSIGNMENTS}")

    nodes = instance.node_by_id
    links = instance.link_by_id
    routes = _route_table(instance, hosts)
    scale = 1.0 + response_multiplier
    work = [[work_rate(r, nodes[h]) for h in hosts] for r in requests]
    proc = [[nodes[h].proc_energy * work[i][j] for j, h in enumerate(hosts)] for i in range(len(requests))]
    headroom = [required_headroom(r.max_latency_l) for r in requests]
    route_energy: List[List[float]] = []
    for r in requests:
        row = []
        for h in hosts:
            path = routes[(r.source, h)]
            row.append(math.inf if path is None else
                       sum(links[l].tx_energy for l in path) * r.traffic_t * scale)
        route_energy.append(row)

    best_cost = math.inf
    best: Optional[Tuple[int, ...]] = None
    examined = 0
    for assignment in itertools.product(range(len(hosts)), repeat=len(requests)):
        examined += 1
        load: Dict[int, float] = {}
        need: Dict[int, float] = {}
        cost = 0.0
        for i, j in enumerate(assignment):
            load[j] = load.get(j, 0.0) + work[i][j]
            need[j] = max(need.get(j, 0.0), headroom[i])
            cost += proc[i][j] + route_energy[i][j]
        if math.isinf(cost):
            continue
        feasible = True
        for j, lam in load.items():
            cap = nodes[hosts[j]].capacity_f
            if lam > cap or (need[j] > 0 and cap - lam < need[j] + latency_slack):
                feasible = False
                break
        if not feasible:
            continue
        carried: Dict[str, float] = {}
        for i, j in enumerate(assignment):
            for l in routes[(requests[i].source, hosts[j])]:
                carried[l] = carried.get(l, 0.0) + requests[i].traffic_t
        for l, flow in carried.items():
            if flow > links[l].capacity_b:
                raise CapacityCoupling(f"independent min-energy routes load {l} to {flow:.6g} "
                                       f"over capacity {links[l].capacity_b:.6g}")
        cost += sum(nodes[hosts[j]].vm_overhead_w for j in load)
        if cost < best_cost:
            best_cost, best = cost, assignment

    if best is None:
        logger.info("oracle %s: infeasible after %d assignments", policy.value, examined)
        return OracleResult(OracleStatus.INFEASIBLE, math.inf, None, examined)
    used = {hosts[j] for j in best}
    placement = Placement(
        hosts={r.id: hosts[j] for r, j in zip(requests, best)},
        routes={r.id: routes[(r.source, hosts[j])] for r, j in zip(requests, best)},
        vm_on={h: h in used for h in hosts},
    )
    breakdown = placement_power(instance, placement, response_multiplier)
    logger.info("oracle %s: optimum %.12g over %d assignments", policy.value, breakdown.total_w, examined)
    return OracleResult(OracleStatus.OPTIMAL, breakdown.total_w, placement, examined, breakdown)


def downsample(instance: NetworkInstance, max_uds: int = 5, max_requests: int = 3) -> NetworkInstance:
    """
    Oracle-sized cut of a full instance: the OLT, the first ONU and its eNodeB, the first
    max_uds UDs served by that eNodeB and the first max_requests of their requests.
    """
    graph = instance.to_graph()
    olts = sorted(instance.ids_of_kind(NodeKind.OLT))
    onus = sorted(instance.ids_of_kind(NodeKind.ONU))
    keep = set(olts)
    if onus:
        onu = onus[0]
        keep.add(onu)
        enbs = sorted(n for n in graph.successors(onu) if instance.node(n).kind is NodeKind.ENODEB)
        if enbs:
            enb = enbs[0]
            keep.add(enb)
            cell = sorted(n for n in graph.successors(enb)
                          if instance.node(n).kind is NodeKind.UD
                          and graph[enb][n]["kind"] is LinkKind.LICENSED)
            keep.update(cell[:max_uds])
    nodes = [n for n in instance.nodes if n.id in keep]
    links = [l for l in instance.links if l.src in keep and l.dst in keep]
    requests = [r for r in instance.requests if r.source in keep][:max_requests]
    return NetworkInstance(tuple(nodes), tuple(links), tuple(requests))
