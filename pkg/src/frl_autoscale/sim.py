"""Deterministic discrete-time simulator of an auto-scaling group behind a load balancer.

Each tick is one control interval. Scale-ups boot for ``boot_delay`` ticks
before serving traffic; load is split evenly (round robin) over active VMs
and each VM is modelled as an M/M/1 server.
"""
from __future__ import annotations

import itertools
from dataclasses import asdict, dataclass, field
from typing import Protocol

from .state import SystemState


class ScalingTarget(Protocol):
    """What a controller needs from the platform; a real cloud driver can implement it."""

    def observe(self) -> SystemState: ...

    def scale(self, delta: int) -> int: ...

    def advance(self, w: float) -> SystemState: ...


@dataclass(frozen=True)
class SimConfig:
    vm_min: int = 1
    vm_max: int = 5
    capacity: float = 30.0
    rt_floor: float = 0.05
    rt_cap: float = 1.2
    boot_delay: int = 2
    initial_vms: int | None = None
    interval_s: float = 10.0

    def __post_init__(self) -> None:
        if self.vm_min < 1 or self.vm_max < self.vm_min:
            raise ValueError(f"need 1 <= vm_min <= vm_max, got {self.vm_min}, {self.vm_max}")
        if self.capacity <= 0 or self.rt_floor < 0:
            raise ValueError("capacity must be positive and rt_floor non-negative")
        if self.rt_cap < self.rt_floor + 1.0 / self.capacity:
            raise ValueError(
                f"rt_cap={self.rt_cap} is below the idle response time "
                f"{self.rt_floor + 1.0 / self.capacity}"
            )
        if self.boot_delay < 0:
            raise ValueError("boot_delay must be >= 0")
        if self.initial_vms is not None and not self.vm_min <= self.initial_vms <= self.vm_max:
            raise ValueError(f"initial_vms={self.initial_vms} outside [{self.vm_min}, {self.vm_max}]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class VmInstance:
    id: int
    boot_remaining: int = 0

    @property
    def active(self) -> bool:
        return self.boot_remaining == 0


def response_time(
    active_vms: int, w: float, capacity: float, rt_floor: float, rt_cap: float
) -> float:
    """Per-VM M/M/1 sojourn time plus a fixed floor, saturating at ``rt_cap``."""
    if active_vms < 1:
        raise ValueError("response time needs at least one active VM")
    lam = w / active_vms
    if lam >= capacity:
        return rt_cap
    return min(rt_cap, rt_floor + 1.0 / (capacity - lam))


@dataclass
class ClusterSim:
    cfg: SimConfig = field(default_factory=SimConfig)
    instances: list[VmInstance] = field(init=False)
    last: SystemState | None = field(init=False, default=None)

    def __post_init__(self) -> None:
        self._ids = itertools.count()
        n = self.cfg.initial_vms if self.cfg.initial_vms is not None else self.cfg.vm_min
        self.instances = [VmInstance(next(self._ids)) for _ in range(n)]

    @property
    def total(self) -> int:
        return len(self.instances)

    @property
    def active(self) -> int:
        return sum(vm.active for vm in self.instances)

    def scale(self, delta: int) -> int:
        """Move the group size by ``delta`` within bounds; return the change actually applied."""
        current = self.total
        target = min(max(current + int(delta), self.cfg.vm_min), self.cfg.vm_max)
        for _ in range(target - current):
            self.instances.append(VmInstance(next(self._ids), self.cfg.boot_delay))
        for _ in range(current - target):
            self.instances.remove(self._victim())
        return target - current

    def _victim(self) -> VmInstance:
        booting = [vm for vm in self.instances if not vm.active]
        pool = booting or self.instances
        return max(pool, key=lambda vm: vm.id)

    def advance(self, w: float) -> SystemState:
        """Elapse one interval under workload ``w`` and return the new observation."""
        for vm in self.instances:
            if vm.boot_remaining > 0:
                vm.boot_remaining -= 1
        active = self.active
        rt = response_time(active, w, self.cfg.capacity, self.cfg.rt_floor, self.cfg.rt_cap)
        self.last = SystemState(float(w), rt, active)
        return self.last

    def observe(self) -> SystemState:
        if self.last is None:
            raise RuntimeError("no observation before the first advance()")
        return self.last


def apply_scale(cluster: ClusterSim, delta: int) -> int:
    return cluster.scale(delta)
