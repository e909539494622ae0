#!/usr/bin/env python3
"""
Test del modello: tipi di dominio, insiemi di hosting, validazione e costruttore di topologie.
"""
import math
import random
from dataclasses import replace

from test_utils import setup_python_path

setup_python_path()

from model import (HostingPolicy, LinkKind, LinkSpec, NetworkInstance, NodeKind, NodeSpec, Request,  # noqa: E402
                   hosting_set, job_cycles, validate, work_rate)
from topology import TopologySpec, build_fran_topology, ud_name  # noqa: E402


def _codes(instance):
    return {v.code for v in validate(instance)}


def test_default_topology_shape():
    inst = build_fran_topology()
    kinds = [n.kind for n in inst.nodes]
    assert len(inst.nodes) == 26
    assert kinds.count(NodeKind.OLT) == 1
    assert kinds.count(NodeKind.ONU) == 2
    assert kinds.count(NodeKind.ENODEB) == 2
    assert kinds.count(NodeKind.UD) == 21
    assert inst.ud_ids()[0] == "ud00" and inst.ud_ids()[-1] == "ud20"
    # 4 fibre + 21 licensed + 19 chain D2D connections, two directions each
    assert len(inst.links) == 88
    assert validate(inst) == []


def test_hosting_sets():
    inst = build_fran_topology()
    cran = hosting_set(inst, HostingPolicy.CRAN)
    fran = hosting_set(inst, HostingPolicy.FRAN)
    assert cran == {"olt0", "onu0", "onu1"}
    assert fran == {n.id for n in inst.nodes}
    assert cran <= fran


def test_hosting_policy_parse():
    assert HostingPolicy.parse("fran") is HostingPolicy.FRAN
    assert HostingPolicy.parse(" CRAN ") is HostingPolicy.CRAN


def test_job_cycles_and_work_rate():
    node = NodeSpec("u", NodeKind.UD, 6.0, 2.0, 0.2, 1.2)
    req = Request("r", "u", arrival_a=3.0, instr=0.5, traffic_t=1.0)
    assert job_cycles(req, node) == 1.0
    assert work_rate(req, node) == 3.0
    bigger = replace(node, cpi=3.0)
    assert job_cycles(req, bigger) > job_cycles(req, node)
    assert job_cycles(replace(req, instr=0.6), node) > job_cycles(req, node)


def test_request_without_bound():
    req = Request("r", "u", 1.0, 0.1, 1.0)
    assert math.isinf(req.max_latency_l)
    assert not req.has_latency_bound
    assert replace(req, max_latency_l=0.5).has_latency_bound


def test_validate_rejects_missing_endpoint():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    broken = NetworkInstance(inst.nodes, inst.links + (LinkSpec("bad", "ud00", "ghost", LinkKind.D2D, 1.0, 0.1),))
    assert "missing endpoint" in _codes(broken)


def test_validate_rejects_two_olts():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    olt = inst.node("olt0")
    extra = replace(olt, id="olt1")
    link = LinkSpec("olt0-olt1", "olt0", "olt1", LinkKind.FIBRE, 100.0, 0.01)
    assert "olt count" in _codes(NetworkInstance(inst.nodes + (extra,), inst.links + (link,)))


def test_validate_rejects_bad_parameters():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    nodes = tuple(replace(n, cpi=0.5) if n.id == "ud00" else n for n in inst.nodes)
    assert "node parameter" in _codes(NetworkInstance(nodes, inst.links))
    links = tuple(replace(l, capacity_b=0.0) if l.id == "enb0-ud00:fwd" else l for l in inst.links)
    assert "link parameter" in _codes(NetworkInstance(inst.nodes, links))


def test_validate_rejects_kind_mismatch():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    wrong = LinkSpec("olt0-ud00", "olt0", "ud00", LinkKind.FIBRE, 100.0, 0.01)
    assert "kind/endpoint mismatch" in _codes(NetworkInstance(inst.nodes, inst.links + (wrong,)))


def test_validate_rejects_unreachable_ud():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,), d2d="none"))
    # drop the uplink of ud01; the downlink keeps the graph connected
    links = tuple(l for l in inst.links if l.id != "enb0-ud01:rev")
    assert _codes(NetworkInstance(inst.nodes, links)) == {"ud unreachable"}


def test_validate_accepts_d2d_relay():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,), d2d="chain"))
    links = tuple(l for l in inst.links if l.id != "enb0-ud01:rev")
    assert validate(NetworkInstance(inst.nodes, links)) == []


def test_validate_rejects_disconnected():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    links = tuple(l for l in inst.links if not l.id.startswith("olt0-onu0"))
    assert "disconnected" in _codes(NetworkInstance(inst.nodes, links))


def test_validate_rejects_bad_requests():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    reqs = [Request("r0", "enb0", 1.0, 0.1, 1.0), Request("r1", "ud00", -1.0, 0.1, 1.0),
            Request("r 2", "ud00", 1.0, 0.1, 1.0)]
    codes = _codes(inst.with_requests(reqs))
    assert {"request source", "request parameter", "bad id"} <= codes


def test_validate_is_order_insensitive_and_idempotent():
    inst = build_fran_topology(TopologySpec(ud_groups=(3,)))
    nodes = list(inst.nodes) + [replace(inst.nodes[-1], cpi=0.1)]
    links = list(inst.links) + [LinkSpec("x", "ud00", "nowhere", LinkKind.D2D, 1.0, 0.1)]
    first = validate(NetworkInstance(nodes, links))
    assert first == validate(NetworkInstance(nodes, links))
    rng = random.Random(3)
    rng.shuffle(nodes)
    rng.shuffle(links)
    assert validate(NetworkInstance(nodes, links)) == first


def test_with_latency_overrides_every_request():
    inst = build_fran_topology(TopologySpec(ud_groups=(2,)))
    inst = inst.with_requests([Request("a", "ud00", 1.0, 0.1, 1.0, 2.0), Request("b", "ud01", 1.0, 0.1, 1.0)])
    assert all(r.max_latency_l == 0.7 for r in inst.with_latency(0.7).requests)


def test_ud_naming():
    assert ud_name(0) == "ud00" and ud_name(20) == "ud20"


def test_d2d_patterns():
    ring = build_fran_topology(TopologySpec(ud_groups=(4,), d2d="ring"))
    full = build_fran_topology(TopologySpec(ud_groups=(4,), d2d="full"))
    d2d = lambda inst: sum(1 for l in inst.links if l.kind is LinkKind.D2D)
    assert d2d(ring) == 8
    assert d2d(full) == 12
