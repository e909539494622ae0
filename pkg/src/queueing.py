"""
M/M/1 delay arithmetic and the coefficients of its big-M linearization.
Capacity and arrivals are both measured in Gcycles/s; the delay is in seconds.
Propagation and transmission delays are not modeled.
"""
import math
from dataclasses import dataclass

from errors import Unstable
from model import NetworkInstance

__all__ = ["QueueState", "Unstable", "mm1_delay", "required_headroom", "big_m_for"]


@dataclass(frozen=True)
class QueueState:
    capacity_mu: float
    work_arrival_lambda: float = 0.0

    def __post_init__(self):
        if not self.capacity_mu > 0:
            raise ValueError(f"capacity_mu must be > 0, got {self.capacity_mu}")
        if not self.work_arrival_lambda >= 0:
            raise ValueError(f"work_arrival_lambda must be >= 0, got {self.work_arrival_lambda}")


def mm1_delay(q: QueueState) -> float:
    """Mean sojourn time 1/(mu - lambda); raises Unstable when lambda >= mu"""
    if q.work_arrival_lambda >= q.capacity_mu:
        raise Unstable(f"lambda={q.work_arrival_lambda} >= mu={q.capacity_mu}")
    return 1.0 / (q.capacity_mu - q.work_arrival_lambda)


def required_headroom(max_latency_l: float) -> float:
    """Smallest mu - lambda that keeps the delay within max_latency_l"""
    if not max_latency_l > 0:
        raise ValueError(f"max_latency_l must be > 0, got {max_latency_l}")
    if math.isinf(max_latency_l):
        return 0.0
    return 1.0 / max_latency_l


def big_m_for(instance: NetworkInstance) -> float:
    # requests without a bound contribute 0
    return max((required_headroom(r.max_latency_l) for r in instance.requests), default=0.0)
