"""Shared value types: the observed system state and the scaling action set."""
from __future__ import annotations

import math
from dataclasses import dataclass

#: Candidate consequents of every rule, in q-table column order.
ACTIONS: tuple[int, ...] = (-2, -1, 0, 1, 2)


@dataclass(frozen=True)
class SystemState:
    """One monitoring sample: workload (users/sec), response time (s), active VMs."""

    w: float
    rt: float
    vm: int

    def __post_init__(self) -> None:
        if not (math.isfinite(self.w) and math.isfinite(self.rt)):
            raise ValueError(f"non-finite observation: w={self.w}, rt={self.rt}")
        if self.w < 0 or self.rt < 0:
            raise ValueError(f"negative observation: w={self.w}, rt={self.rt}")
        if self.vm < 1:
            raise ValueError(f"vm must be >= 1, got {self.vm}")
