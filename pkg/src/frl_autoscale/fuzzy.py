"""Fuzzy controller: membership functions, rule firing and crisp action output."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .state import ACTIONS, SystemState

PARTITION_TOL = 1e-9


@dataclass(frozen=True)
class MembershipFunction:
    """Triangular ``(a, b, c)`` or trapezoidal ``(a, b, c, d)`` membership function.

    A triangle is evaluated as the trapezoid ``(a, b, b, c)``. Equal
    neighbouring breakpoints give a vertical edge, which is how shoulder
    sets are expressed (e.g. ``trapezoidal(0, 0, 10, 55)``).
    """

    kind: str
    points: tuple[float, ...]

    def __post_init__(self) -> None:
        expected = {"triangular": 3, "trapezoidal": 4}
        if self.kind not in expected:
            raise ValueError(f"unknown membership function kind {self.kind!r}")
        if len(self.points) != expected[self.kind]:
            raise ValueError(
                f"{self.kind} needs {expected[self.kind]} breakpoints, got {len(self.points)}"
            )
        pts = tuple(float(p) for p in self.points)
        if not all(math.isfinite(p) for p in pts):
            raise ValueError(f"breakpoints must be finite: {pts}")
        if any(lo > hi for lo, hi in zip(pts, pts[1:])):
            raise ValueError(f"breakpoints must be non-decreasing: {pts}")
        object.__setattr__(self, "points", pts)

    @classmethod
    def triangular(cls, a: float, b: float, c: float) -> "MembershipFunction":
        return cls("triangular", (a, b, c))

    @classmethod
    def trapezoidal(cls, a: float, b: float, c: float, d: float) -> "MembershipFunction":
        return cls("trapezoidal", (a, b, c, d))

    @property
    def corners(self) -> tuple[float, float, float, float]:
        if self.kind == "triangular":
            a, b, c = self.points
            return a, b, b, c
        a, b, c, d = self.points
        return a, b, c, d

    def __call__(self, x: float) -> float:
        return eval_membership(self, x)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "points": list(self.points)}

    @classmethod
    def from_dict(cls, d: dict) -> "MembershipFunction":
        return cls(d["kind"], tuple(d["points"]))


def eval_membership(mf: MembershipFunction, x: float) -> float:
    """Degree of membership of ``x`` in ``mf``, in [0, 1]."""
    a, b, c, d = mf.corners
    if b <= x <= c:
        return 1.0
    if x < a or x > d:
        return 0.0
    if x < b:
        return (x - a) / (b - a)
    return (d - x) / (d - c)


@dataclass(frozen=True)
class FuzzyPartition:
    """Three ordered fuzzy sets covering ``domain`` with memberships summing to 1."""

    variable: str
    sets: tuple[tuple[str, MembershipFunction], ...]
    domain: tuple[float, float]

    def __post_init__(self) -> None:
        object.__setattr__(self, "sets", tuple((str(n), mf) for n, mf in self.sets))
        lo, hi = (float(v) for v in self.domain)
        object.__setattr__(self, "domain", (lo, hi))
        if not lo < hi:
            raise ValueError(f"{self.variable}: empty domain {self.domain}")
        if len(self.sets) != 3:
            raise ValueError(f"{self.variable}: expected 3 fuzzy sets, got {len(self.sets)}")
        # Memberships are piecewise linear, so their sum is linear between
        # breakpoints: checking at every breakpoint covers the whole domain.
        probes = {lo, hi}
        for _, mf in self.sets:
            probes.update(p for p in mf.points if lo <= p <= hi)
        for x in sorted(probes):
            total = sum(mf(x) for _, mf in self.sets)
            if abs(total - 1.0) > PARTITION_TOL:
                raise ValueError(
                    f"{self.variable}: memberships sum to {total} at x={x}, not 1"
                )

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.sets)

    def clamp(self, x: float) -> float:
        lo, hi = self.domain
        return min(max(x, lo), hi)

    def memberships(self, x: float) -> np.ndarray:
        x = self.clamp(x)
        return np.array([mf(x) for _, mf in self.sets])

    def to_dict(self) -> dict:
        return {
            "variable": self.variable,
            "domain": list(self.domain),
            "sets": [{"label": n, **mf.to_dict()} for n, mf in self.sets],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FuzzyPartition":
        sets = tuple((s["label"], MembershipFunction.from_dict(s)) for s in d["sets"])
        return cls(d["variable"], sets, tuple(d["domain"]))


def default_workload_partition() -> FuzzyPartition:
    """low / medium / high over 0..120 users/sec."""
    return FuzzyPartition(
        "w",
        (
            ("low", MembershipFunction.trapezoidal(0, 0, 10, 55)),
            ("medium", MembershipFunction.triangular(10, 55, 100)),
            ("high", MembershipFunction.trapezoidal(55, 100, 120, 120)),
        ),
        (0.0, 120.0),
    )


def default_rt_partition(sla_rt: float) -> FuzzyPartition:
    """good / ok / bad over 0..2*sla_rt seconds, with ``ok`` peaking at the SLA."""
    s = float(sla_rt)
    return FuzzyPartition(
        "rt",
        (
            ("good", MembershipFunction.trapezoidal(0, 0, 0.2 * s, s)),
            ("ok", MembershipFunction.triangular(0.2 * s, s, 1.5 * s)),
            ("bad", MembershipFunction.trapezoidal(s, 1.5 * s, 2 * s, 2 * s)),
        ),
        (0.0, 2 * s),
    )


@dataclass(frozen=True)
class RuleBase:
    """Full 3x3 cross product of antecedents, w outer and rt inner."""

    rules: tuple[tuple[int, int], ...] = tuple(itertools.product(range(3), range(3)))
    actions: tuple[int, ...] = ACTIONS

    def __post_init__(self) -> None:
        if tuple(self.rules) != tuple(itertools.product(range(3), range(3))):
            raise ValueError("rule base must enumerate the 3x3 antecedent grid in row-major order")
        if tuple(self.actions) != ACTIONS:
            raise ValueError(f"action set must be {ACTIONS}")

    def __len__(self) -> int:
        return len(self.rules)

    def index(self, w_set: int, rt_set: int) -> int:
        return self.rules.index((w_set, rt_set))


@dataclass(frozen=True, eq=False)
class FiringVector:
    strengths: np.ndarray
    state: SystemState | None = field(default=None)

    def __post_init__(self) -> None:
        arr = np.asarray(self.strengths, dtype=float)
        arr.setflags(write=False)
        object.__setattr__(self, "strengths", arr)

    def __len__(self) -> int:
        return len(self.strengths)


def fire_rules(
    rb: RuleBase, pw: FuzzyPartition, prt: FuzzyPartition, s: SystemState
) -> FiringVector:
    """Product-conjunction firing strength of every rule for state ``s``.

    Inputs outside a partition's domain are clamped to its edge.
    """
    mw = pw.memberships(s.w)
    mr = prt.memberships(s.rt)
    return FiringVector(np.array([mw[i] * mr[j] for i, j in rb.rules]), s)


def combine_action(fv: FiringVector, chosen: Sequence[float]) -> float:
    """Weighted average of the per-rule consequents (weights sum to one)."""
    if len(chosen) != len(fv):
        raise ValueError(f"expected {len(fv)} per-rule actions, got {len(chosen)}")
    return float(np.dot(fv.strengths, np.asarray(chosen, dtype=float)))


def discretize_action(a: float) -> int:
    """Round half away from zero and clamp into the action range."""
    n = int(math.floor(abs(a) + 0.5))
    n = int(math.copysign(n, a)) if n else 0
    return max(ACTIONS[0], min(ACTIONS[-1], n))
