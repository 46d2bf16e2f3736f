"""Reinforcement signal trading SLA compliance against VMs held."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .state import SystemState


@dataclass(frozen=True)
class RewardConfig:
    sla_rt: float = 0.6
    cost_weight: float = 0.3
    vm_min: int = 1
    vm_max: int = 5

    def __post_init__(self) -> None:
        if self.sla_rt <= 0:
            raise ValueError(f"sla_rt must be positive, got {self.sla_rt}")
        if not 0 <= self.cost_weight <= 1:
            raise ValueError(f"cost_weight must be in [0, 1], got {self.cost_weight}")
        if self.vm_min < 1 or self.vm_max < self.vm_min:
            raise ValueError(f"need 1 <= vm_min <= vm_max, got {self.vm_min}, {self.vm_max}")

    def to_dict(self) -> dict:
        return asdict(self)


def compute_reward(obs: SystemState, cfg: RewardConfig) -> float:
    """``perf - cost_weight * cost``, with perf in [-1, 1] and cost in [0, 1].

    perf is the relative headroom under the SLA, clipped; cost is the share of
    the elastic VM range in use.
    """
    perf = min(1.0, max(-1.0, (cfg.sla_rt - obs.rt) / cfg.sla_rt))
    span = cfg.vm_max - cfg.vm_min
    vm = min(max(obs.vm, cfg.vm_min), cfg.vm_max)
    cost = (vm - cfg.vm_min) / span if span else 0.0
    return perf - cfg.cost_weight * cost
