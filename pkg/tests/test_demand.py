#!/usr/bin/env python3
"""
Test della domanda: generatore deterministico, intervalli, profilo giornaliero e utenti attivi.
"""
import random

from test_utils import setup_python_path

setup_python_path()

from config import DEFAULT_SEED  # noqa: E402
from demand import (DemandConfig, LoadProfile, ProfileEntry, Range, SplitMix64, active_count,  # noqa: E402
                    active_uds, default_profile, generate_requests, request_stream, slot_requests,
                    splitmix64)
from topology import build_fran_topology  # noqa: E402

UDS = build_fran_topology().ud_ids()


def test_splitmix64_reference_values():
    # first outputs of the reference generator seeded with 0
    stream = SplitMix64(0)
    assert stream.next_u64() == 0xE220A8397B1DCDAF
    assert stream.next_u64() == 0x6E789E6AA1B965F4
    assert splitmix64(0) == 0xE220A8397B1DCDAF


def test_uniform_stays_in_range():
    stream = request_stream(DEFAULT_SEED, "ud00", 0)
    for _ in range(1000):
        u = stream.uniform(2.0, 6.0)
        assert 2.0 <= u <= 6.0


def test_generation_is_deterministic():
    config = DemandConfig()
    assert generate_requests(config, UDS) == generate_requests(config, UDS)
    other = generate_requests(DemandConfig(seed=DEFAULT_SEED + 1), UDS)
    assert other != generate_requests(config, UDS)


def test_default_demand_size_and_ranges():
    config = DemandConfig()
    requests = generate_requests(config, UDS)
    assert len(requests) == 63
    assert requests[0].id == "ud00-r0" and requests[-1].id == "ud20-r2"
    for req in requests:
        for name, r in config.ranges():
            assert r.min <= getattr(req, name) <= r.max


def test_degenerate_range_is_constant():
    config = DemandConfig(arrival_a=Range(2.0, 2.0), max_latency_l=Range(1.0, 1.0))
    for req in generate_requests(config, UDS):
        assert req.arrival_a == 2.0
        assert req.max_latency_l == 1.0


def test_ud_order_does_not_matter():
    shuffled = list(UDS)
    random.Random(1).shuffle(shuffled)
    config = DemandConfig(seed=99)
    assert generate_requests(config, shuffled) == generate_requests(config, UDS)
    # a UD's requests do not depend on which other UDs exist
    alone = generate_requests(config, ["ud07"])
    assert alone == [r for r in generate_requests(config, UDS) if r.source == "ud07"]


def test_invalid_ranges():
    for lo, hi in ((0.0, 1.0), (2.0, 1.0), (1.0, float("inf"))):
        try:
            Range(lo, hi)
        except ValueError:
            continue
        raise AssertionError(f"Range({lo}, {hi}) doveva essere rifiutato")


def test_active_users_are_nested_prefixes():
    previous = []
    for fraction in (0.0, 0.1, 0.35, 0.5, 0.8, 1.0):
        active = active_uds(fraction, UDS)
        assert len(active) == active_count(fraction, len(UDS))
        assert active[:len(previous)] == previous
        previous = active
    assert active_uds(1.0, UDS) == sorted(UDS)
    assert active_uds(0.0, UDS) == []


def test_active_count_rounds_up():
    assert active_count(0.1, 21) == 3
    assert active_count(0.1, 10) == 1
    assert active_count(0.5, 21) == 11


def test_slot_requests_drop_inactive_users():
    requests = generate_requests(DemandConfig(), UDS)
    active = active_uds(ProfileEntry(4, 0.1), UDS)
    slot = slot_requests(requests, active)
    assert {r.source for r in slot} == set(active)
    assert len(slot) == 3 * len(active)


def test_default_profile():
    profile = default_profile()
    assert len(profile) == 24
    assert [e.hour for e in profile] == list(range(24))
    fractions = profile.fractions
    assert min(fractions) == fractions[4] == 0.1
    assert max(fractions) == 1.0
    assert all(0.0 <= f <= 1.0 for f in fractions)


def test_profile_validation():
    for pairs in (((3, 0.5), (3, 0.6)), ((5, 0.5), (2, 0.6)), ((24, 0.5),), ((1, 1.5),)):
        try:
            LoadProfile.from_pairs(pairs)
        except ValueError:
            continue
        raise AssertionError(f"profilo {pairs} doveva essere rifiutato")
