"""
Builder for GPON-backed F-RAN topologies: one OLT, one ONU per cell, one eNodeB per ONU
and a group of UDs per eNodeB, linked by fibre, licensed radio and D2D radio.
"""
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from model import LinkKind, LinkSpec, NetworkInstance, NodeKind, NodeSpec

D2D_PATTERNS = ("chain", "ring", "full", "none")


@dataclass(frozen=True)
class NodeProfile:
    capacity_f: float
    cpi: float
    vm_overhead_w: float
    proc_energy: float


@dataclass(frozen=True)
class LinkProfile:
    capacity_b: float
    tx_energy: float


# Defaults used by data/default.json
OLT_PROFILE = NodeProfile(capacity_f=40.0, cpi=1.0, vm_overhead_w=3.0, proc_energy=1.0)
ONU_PROFILE = NodeProfile(capacity_f=30.0, cpi=1.0, vm_overhead_w=2.0, proc_energy=1.0)
ENODEB_PROFILE = NodeProfile(capacity_f=12.0, cpi=1.5, vm_overhead_w=1.0, proc_energy=1.0)
UD_PROFILE = NodeProfile(capacity_f=6.0, cpi=2.0, vm_overhead_w=0.2, proc_energy=1.2)
FIBRE_PROFILE = LinkProfile(capacity_b=2500.0, tx_energy=0.02)
LICENSED_PROFILE = LinkProfile(capacity_b=100.0, tx_energy=0.2)
D2D_PROFILE = LinkProfile(capacity_b=50.0, tx_energy=0.1)


@dataclass(frozen=True)
class TopologySpec:
    ud_groups: Tuple[int, ...] = (11, 10)
    d2d: str = "chain"
    olt: NodeProfile = OLT_PROFILE
    onu: NodeProfile = ONU_PROFILE
    enodeb: NodeProfile = ENODEB_PROFILE
    ud: NodeProfile = UD_PROFILE
    fibre: LinkProfile = FIBRE_PROFILE
    licensed: LinkProfile = LICENSED_PROFILE
    d2d_link: LinkProfile = D2D_PROFILE
    extra_links: Tuple[LinkSpec, ...] = field(default_factory=tuple)


def _node(node_id: str, kind: NodeKind, profile: NodeProfile) -> NodeSpec:
    return NodeSpec(node_id, kind, profile.capacity_f, profile.cpi,
                    profile.vm_overhead_w, profile.proc_energy)


def _pair(link_id: str, a: str, b: str, kind: LinkKind, profile: LinkProfile) -> List[LinkSpec]:
    """Two directed links for one physical connection"""
    return [
        LinkSpec(f"{link_id}:fwd", a, b, kind, profile.capacity_b, profile.tx_energy),
        LinkSpec(f"{link_id}:rev", b, a, kind, profile.capacity_b, profile.tx_energy),
    ]


def _d2d_pairs(members: Sequence[str], pattern: str) -> List[Tuple[str, str]]:
    if pattern == "none" or len(members) < 2:
        return []
    if pattern == "chain":
        return list(zip(members, members[1:]))
    if pattern == "ring":
        pairs = list(zip(members, members[1:]))
        if len(members) > 2:
            pairs.append((members[-1], members[0]))
        return pairs
    if pattern == "full":
        return [(a, b) for i, a in enumerate(members) for b in members[i + 1:]]
    raise ValueError(f"unknown D2D pattern '{pattern}', expected one of {D2D_PATTERNS}")


def ud_name(index: int) -> str:
    return f"ud{index:02d}"


def build_fran_topology(spec: TopologySpec = TopologySpec()) -> NetworkInstance:
    """
    Build the request-free topology described by spec.

    UD ids are numbered globally (ud00, ud01, ...) so the UDs of the first cell sort
    first; cells are served by onu<k> and enb<k>.
    """
    nodes = [_node("olt0", NodeKind.OLT, spec.olt)]
    links: List[LinkSpec] = []
    ud_index = 0
    for cell, size in enumerate(spec.ud_groups):
        onu, enb = f"onu{cell}", f"enb{cell}"
        nodes.append(_node(onu, NodeKind.ONU, spec.onu))
        nodes.append(_node(enb, NodeKind.ENODEB, spec.enodeb))
        links += _pair(f"olt0-{onu}", "olt0", onu, LinkKind.FIBRE, spec.fibre)
        links += _pair(f"{onu}-{enb}", onu, enb, LinkKind.FIBRE, spec.fibre)
        members = [ud_name(ud_index + i) for i in range(size)]
        ud_index += size
        for ud in members:
            nodes.append(_node(ud, NodeKind.UD, spec.ud))
            links += _pair(f"{enb}-{ud}", enb, ud, LinkKind.LICENSED, spec.licensed)
        for a, b in _d2d_pairs(members, spec.d2d):
            links += _pair(f"{a}-{b}", a, b, LinkKind.D2D, spec.d2d_link)
    links += list(spec.extra_links)
    return NetworkInstance(tuple(nodes), tuple(links), ())
