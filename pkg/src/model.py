"""
Domain types for the fog radio access network: nodes, links, request demands,
hosting policies and the instance validator.
All types are frozen dataclasses, so instances can be shared between threads.
Units: compute in Gcycles/s, traffic in Mbit/s, power in W, latency in s.
"""
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, List, Tuple

import networkx as nx


class NodeKind(str, Enum):
    OLT = "OLT"
    ONU = "ONU"
    ENODEB = "ENODEB"
    UD = "UD"


class LinkKind(str, Enum):
    FIBRE = "FIBRE"
    LICENSED = "LICENSED"
    D2D = "D2D"


GPON_KINDS = frozenset({NodeKind.OLT, NodeKind.ONU})
FIBRE_KINDS = frozenset({NodeKind.OLT, NodeKind.ONU, NodeKind.ENODEB})


class HostingPolicy(str, Enum):
    """Which node kinds may host VMs"""
    CRAN = "CRAN"
    FRAN = "FRAN"

    @property
    def hosting_kinds(self) -> FrozenSet[NodeKind]:
        if self is HostingPolicy.CRAN:
            return GPON_KINDS
        return frozenset(NodeKind)

    @classmethod
    def parse(cls, text: str) -> "HostingPolicy":
        return cls(text.strip().upper())


@dataclass(frozen=True)
class NodeSpec:
    id: str
    kind: NodeKind
    capacity_f: float      # Gcycles/s
    cpi: float             # cycles per instruction
    vm_overhead_w: float   # W while hosting >= 1 VM
    proc_energy: float     # W per Gcycle/s served


@dataclass(frozen=True)
class LinkSpec:
    id: str
    src: str
    dst: str
    kind: LinkKind
    capacity_b: float      # Mbit/s
    tx_energy: float       # W per Mbit/s carried


@dataclass(frozen=True)
class Request:
    id: str
    source: str
    arrival_a: float       # jobs/s
    instr: float           # Ginstructions per job
    traffic_t: float       # Mbit/s from source to host
    max_latency_l: float = math.inf

    @property
    def has_latency_bound(self) -> bool:
        return math.isfinite(self.max_latency_l)


@dataclass(frozen=True)
class Violation:
    code: str
    subject: str
    message: str

    def __str__(self):
        return f"{self.code} [{self.subject}]: {self.message}"


@dataclass(frozen=True)
class NetworkInstance:
    nodes: Tuple[NodeSpec, ...]
    links: Tuple[LinkSpec, ...]
    requests: Tuple[Request, ...] = field(default_factory=tuple)

    def __post_init__(self):
        # accept lists from callers, store tuples
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "links", tuple(self.links))
        object.__setattr__(self, "requests", tuple(self.requests))

    @cached_property
    def node_by_id(self) -> Dict[str, NodeSpec]:
        return {n.id: n for n in self.nodes}

    @cached_property
    def link_by_id(self) -> Dict[str, LinkSpec]:
        return {l.id: l for l in self.links}

    @cached_property
    def out_links(self) -> Dict[str, List[int]]:
        """Link positions leaving each node"""
        out = {n.id: [] for n in self.nodes}
        for i, link in enumerate(self.links):
            out.setdefault(link.src, []).append(i)
        return out

    @cached_property
    def in_links(self) -> Dict[str, List[int]]:
        """Link positions entering each node"""
        inc = {n.id: [] for n in self.nodes}
        for i, link in enumerate(self.links):
            inc.setdefault(link.dst, []).append(i)
        return inc

    def node(self, node_id: str) -> NodeSpec:
        return self.node_by_id[node_id]

    def ids_of_kind(self, *kinds: NodeKind) -> List[str]:
        return [n.id for n in self.nodes if n.kind in kinds]

    def ud_ids(self) -> List[str]:
        return sorted(self.ids_of_kind(NodeKind.UD))

    def with_requests(self, requests: Iterable[Request]) -> "NetworkInstance":
        return NetworkInstance(self.nodes, self.links, tuple(requests))

    def with_latency(self, max_latency_l: float) -> "NetworkInstance":
        """Copy with every request's latency bound replaced"""
        return self.with_requests(replace(r, max_latency_l=max_latency_l) for r in self.requests)

    def to_graph(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(n.id for n in self.nodes)
        for link in self.links:
            graph.add_edge(link.src, link.dst, id=link.id, kind=link.kind)
        return graph


# ===== Operations =====

def job_cycles(req: Request, node: NodeSpec) -> float:
    """Gcycles needed by one job of the request on this node"""
    return req.instr * node.cpi


def work_rate(req: Request, node: NodeSpec) -> float:
    """Gcycles/s the request puts on the node if hosted there"""
    return req.arrival_a * job_cycles(req, node)


def hosting_set(instance: NetworkInstance, policy: HostingPolicy) -> FrozenSet[str]:
    kinds = policy.hosting_kinds
    return frozenset(n.id for n in instance.nodes if n.kind in kinds)


def _is_number(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and not math.isnan(value)


def _check_link_kind(link: LinkSpec, src: NodeSpec, dst: NodeSpec) -> bool:
    if link.kind is LinkKind.FIBRE:
        return src.kind in FIBRE_KINDS and dst.kind in FIBRE_KINDS
    if link.kind is LinkKind.LICENSED:
        return {src.kind, dst.kind} == {NodeKind.ENODEB, NodeKind.UD}
    return src.kind is NodeKind.UD and dst.kind is NodeKind.UD


def validate(instance: NetworkInstance) -> List[Violation]:
    """
    Collect every invariant violation of the instance.

    Returns:
        Sorted list of violations; empty when the instance is valid
    """
    found: List[Violation] = []

    def flag(code: str, subject: str, message: str):
        found.append(Violation(code, subject, message))

    # ids end up in constraint names, which are whitespace-free tokens
    for item in (*instance.nodes, *instance.links, *instance.requests):
        if not isinstance(item.id, str) or not item.id or any(ch.isspace() for ch in item.id):
            flag("bad id", repr(item.id), "ids must be non-empty strings without whitespace")

    seen = set()
    for node in instance.nodes:
        if node.id in seen:
            flag("duplicate id", node.id, "node id used more than once")
        seen.add(node.id)
        if not _is_number(node.capacity_f) or node.capacity_f <= 0 or math.isinf(node.capacity_f):
            flag("node parameter", node.id, f"capacity_f must be finite and > 0, got {node.capacity_f}")
        if not _is_number(node.cpi) or node.cpi < 1:
            flag("node parameter", node.id, f"cpi must be >= 1, got {node.cpi}")
        if not _is_number(node.vm_overhead_w) or node.vm_overhead_w < 0:
            flag("node parameter", node.id, f"vm_overhead_w must be >= 0, got {node.vm_overhead_w}")
        if not _is_number(node.proc_energy) or node.proc_energy < 0:
            flag("node parameter", node.id, f"proc_energy must be >= 0, got {node.proc_energy}")

    olts = [n.id for n in instance.nodes if n.kind is NodeKind.OLT]
    if len(olts) != 1:
        flag("olt count", ",".join(sorted(olts)) or "-", f"exactly one OLT required, found {len(olts)}")

    nodes = instance.node_by_id
    seen_links = set()
    for link in instance.links:
        if link.id in seen_links:
            flag("duplicate id", link.id, "link id used more than once")
        seen_links.add(link.id)
        if link.src not in nodes or link.dst not in nodes:
            flag("missing endpoint", link.id, f"{link.src}->{link.dst} references an unknown node")
            continue
        if link.src == link.dst:
            flag("self loop", link.id, "link starts and ends at the same node")
        if not _check_link_kind(link, nodes[link.src], nodes[link.dst]):
            flag("kind/endpoint mismatch", link.id,
                 f"{link.kind.value} link cannot join {nodes[link.src].kind.value} and {nodes[link.dst].kind.value}")
        if not _is_number(link.capacity_b) or link.capacity_b <= 0:
            flag("link parameter", link.id, f"capacity_b must be > 0, got {link.capacity_b}")
        if not _is_number(link.tx_energy) or link.tx_energy < 0:
            flag("link parameter", link.id, f"tx_energy must be >= 0, got {link.tx_energy}")

    graph = nx.DiGraph()
    graph.add_nodes_from(nodes)
    radio = nx.DiGraph()
    for link in instance.links:
        if link.src in nodes and link.dst in nodes:
            graph.add_edge(link.src, link.dst)
            if link.kind in (LinkKind.LICENSED, LinkKind.D2D):
                radio.add_edge(link.src, link.dst)
    if graph.number_of_nodes() > 0 and not nx.is_weakly_connected(graph):
        parts = sorted(len(c) for c in nx.weakly_connected_components(graph))
        flag("disconnected", "-", f"link graph has {len(parts)} components of sizes {parts}")

    enodebs = {n.id for n in instance.nodes if n.kind is NodeKind.ENODEB}
    for ud in sorted(n.id for n in instance.nodes if n.kind is NodeKind.UD):
        reach = nx.descendants(radio, ud) if ud in radio else set()
        if not reach & enodebs:
            flag("ud unreachable", ud, "no LICENSED/D2D path to an eNodeB")

    seen_requests = set()
    for req in instance.requests:
        if req.id in seen_requests:
            flag("duplicate id", req.id, "request id used more than once")
        seen_requests.add(req.id)
        src = nodes.get(req.source)
        if src is None or src.kind is not NodeKind.UD:
            flag("request source", req.id, f"source {req.source} is not a UD")
        if not _is_number(req.arrival_a) or req.arrival_a <= 0 or math.isinf(req.arrival_a):
            flag("request parameter", req.id, f"arrival_a must be finite and > 0, got {req.arrival_a}")
        if not _is_number(req.instr) or req.instr <= 0 or math.isinf(req.instr):
            flag("request parameter", req.id, f"instr must be finite and > 0, got {req.instr}")
        if not _is_number(req.traffic_t) or req.traffic_t < 0 or math.isinf(req.traffic_t):
            flag("request parameter", req.id, f"traffic_t must be finite and >= 0, got {req.traffic_t}")
        if not _is_number(req.max_latency_l) or req.max_latency_l <= 0:
            flag("request parameter", req.id, f"max_latency_l must be > 0, got {req.max_latency_l}")

    return sorted(found, key=lambda v: (v.code, v.subject, v.message))
