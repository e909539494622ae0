"""
Deterministic demand: per-UD request generation and the diurnal active-user profile.

Request parameters come from a counter-based splitmix64 stream keyed by
(seed, UD id, request index), so a request never depends on which other UDs exist
or on the order they are listed in.
"""
import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence, Tuple, Union

import numpy as np

from config import DEFAULT_PROFILE_ANCHORS, DEFAULT_SEED, REQUESTS_PER_UD
from model import Request

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One splitmix64 output for the given 64-bit state (state is advanced by the gamma first)"""
    z = (state + GOLDEN_GAMMA) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Sequential splitmix64 stream"""

    def __init__(self, state: int):
        self.state = state & MASK64

    def next_u64(self) -> int:
        out = splitmix64(self.state)
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        return out

    def uniform(self, lo: float, hi: float) -> float:
        # 53 random bits -> [0, 1)
        u = (self.next_u64() >> 11) * (1.0 / (1 << 53))
        return lo + (hi - lo) * u


def stable_id_hash(text: str) -> int:
    """Process-independent 64-bit hash of an id"""
    return int.from_bytes(hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest(), "little")


def request_stream(seed: int, ud_id: str, index: int) -> SplitMix64:
    key = splitmix64((seed & MASK64) ^ stable_id_hash(ud_id))
    return SplitMix64(splitmix64((key + index) & MASK64))


@dataclass(frozen=True)
class Range:
    min: float
    max: float

    def __post_init__(self):
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ValueError(f"range bounds must be finite, got [{self.min}, {self.max}]")
        if not self.min > 0:
            raise ValueError(f"range minimum must be > 0, got {self.min}")
        if self.min > self.max:
            raise ValueError(f"range minimum {self.min} exceeds maximum {self.max}")

    def to_dict(self) -> dict:
        return {"min": self.min, "max": self.max}


@dataclass(frozen=True)
class DemandConfig:
    seed: int = DEFAULT_SEED
    requests_per_ud: int = REQUESTS_PER_UD
    arrival_a: Range = Range(1.0, 3.0)
    instr: Range = Range(0.1, 0.3)
    traffic_t: Range = Range(2.0, 6.0)
    max_latency_l: Range = Range(0.5, 2.0)

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.requests_per_ud < 1:
            raise ValueError(f"requests_per_ud must be >= 1, got {self.requests_per_ud}")

    def ranges(self) -> List[Tuple[str, Range]]:
        return [("arrival_a", self.arrival_a), ("instr", self.instr),
                ("traffic_t", self.traffic_t), ("max_latency_l", self.max_latency_l)]


@dataclass(frozen=True)
class ProfileEntry:
    hour: int
    active_fraction: float

    def __post_init__(self):
        if not 0 <= self.hour <= 23:
            raise ValueError(f"hour must be within 0..23, got {self.hour}")
        if not 0.0 <= self.active_fraction <= 1.0:
            raise ValueError(f"active_fraction must be within [0, 1], got {self.active_fraction}")


@dataclass(frozen=True)
class LoadProfile:
    entries: Tuple[ProfileEntry, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        hours = [e.hour for e in self.entries]
        if hours != sorted(set(hours)):
            raise ValueError("profile hours must be strictly increasing")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    @property
    def fractions(self) -> List[float]:
        return [e.active_fraction for e in self.entries]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Tuple[int, float]]) -> "LoadProfile":
        return cls(tuple(ProfileEntry(int(h), float(f)) for h, f in pairs))


def default_profile() -> LoadProfile:
    """24 hourly fractions, piecewise-linear between the configured anchors"""
    anchor_hours = [h for h, _ in DEFAULT_PROFILE_ANCHORS]
    anchor_values = [f for _, f in DEFAULT_PROFILE_ANCHORS]
    hours = np.arange(24)
    values = np.interp(hours, anchor_hours, anchor_values)
    return LoadProfile.from_pairs((int(h), round(float(v), 12)) for h, v in zip(hours, values))


def generate_requests(config: DemandConfig, uds: Sequence[str]) -> List[Request]:
    """requests_per_ud requests per UD, listed by UD id then request index"""
    requests = []
    for ud in sorted(uds):
        for index in range(config.requests_per_ud):
            stream = request_stream(config.seed, ud, index)
            values = {name: stream.uniform(r.min, r.max) for name, r in config.ranges()}
            requests.append(Request(id=f"{ud}-r{index}", source=ud, **values))
    return requests


def active_count(fraction: float, total: int) -> int:
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"active fraction must be within [0, 1], got {fraction}")
    # guard against 0.1 * 10 landing a hair above 1
    return min(total, math.ceil(fraction * total - 1e-12))


def active_uds(entry: Union[ProfileEntry, float], uds: Sequence[str]) -> List[str]:
    """First ceil(fraction * |uds|) UDs in id order"""
    fraction = entry.active_fraction if isinstance(entry, ProfileEntry) else float(entry)
    ordered = sorted(uds)
    return ordered[:active_count(fraction, len(ordered))]


def slot_requests(requests: Sequence[Request], active: Iterable[str]) -> List[Request]:
    """Requests of the active UDs; inactive users' requests are removed entirely"""
    keep = set(active)
    return [r for r in requests if r.source in keep]
