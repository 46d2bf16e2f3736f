"""Synthetic workload patterns and CSV trace replay (users/sec per interval)."""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

KINDS = ("predictable_bursting", "variations", "on_off", "constant", "trace")

BURST_PROB = 0.02
BURST_LEN = 3
BURST_GAIN = 0.4


class EndOfTrace(Exception):
    """A replayed trace has no sample for the requested interval."""


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class PatternSpec:
    kind: str = "predictable_bursting"
    u_min: float = 10.0
    u_max: float = 100.0
    period: int = 100
    jitter: float = 5.0
    seed: int = 0
    dwell: int = 50
    value: float | None = None
    path: str | None = None
    scale: str = "linear"

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown pattern kind {self.kind!r}; expected one of {KINDS}")
        if not self.u_min < self.u_max:
            raise ValueError(f"need u_min < u_max, got {self.u_min}, {self.u_max}")
        if self.kind in ("predictable_bursting", "variations") and (
            int(self.period) != self.period or self.period < 2
        ):
            raise ValueError(f"period must be an integer >= 2, got {self.period}")
        if self.kind == "on_off" and (int(self.dwell) != self.dwell or self.dwell < 2):
            raise ValueError(f"dwell must be an integer >= 2, got {self.dwell}")
        if self.jitter < 0:
            raise ValueError("jitter must be non-negative")
        if self.kind == "constant" and self.value is None:
            raise ValueError("constant pattern needs a value")
        if self.kind == "trace" and not self.path:
            raise ValueError("trace pattern needs a path")
        if self.scale not in ("linear", "none"):
            raise ValueError(f"scale mode must be 'linear' or 'none', got {self.scale!r}")

    def to_dict(self) -> dict:
        return asdict(self)


def _sine(spec: PatternSpec, t: int) -> float:
    mid = (spec.u_min + spec.u_max) / 2
    amp = (spec.u_max - spec.u_min) / 2
    # reduce t first so u(t) == u(t + period) holds bit-for-bit
    return mid + amp * math.sin(2 * math.pi * (t % spec.period) / spec.period)


def _draws(seed: int, t: int) -> tuple[float, float]:
    jitter_u, burst_u = np.random.default_rng([seed, t]).random(2)
    return float(jitter_u), float(burst_u)


def generate(spec: PatternSpec, t: int, trace: list[float] | None = None) -> float:
    """Workload at interval ``t``; always within ``[u_min, u_max]``."""
    if t < 0:
        raise ValueError("interval index must be >= 0")
    if spec.kind == "predictable_bursting":
        u = _sine(spec, t)
    elif spec.kind == "variations":
        amp = (spec.u_max - spec.u_min) / 2
        jitter_u, _ = _draws(spec.seed, t)
        u = _sine(spec, t) + spec.jitter * (2 * jitter_u - 1)
        if any(_draws(spec.seed, s)[1] < BURST_PROB for s in range(max(0, t - BURST_LEN + 1), t + 1)):
            u += BURST_GAIN * amp
    elif spec.kind == "on_off":
        u = spec.u_max if (t // spec.dwell) % 2 == 0 else spec.u_min
    elif spec.kind == "constant":
        u = float(spec.value)
    else:
        if trace is None:
            trace = load_trace(spec.path, spec.scale, spec.u_min, spec.u_max)
        if t >= len(trace):
            raise EndOfTrace(f"trace {spec.path} ends after {len(trace)} intervals")
        u = trace[t]
    return min(max(u, spec.u_min), spec.u_max)


class Workload:
    """Caches a loaded trace so per-interval generation stays cheap."""

    def __init__(self, spec: PatternSpec) -> None:
        self.spec = spec
        self.trace = (
            load_trace(spec.path, spec.scale, spec.u_min, spec.u_max)
            if spec.kind == "trace"
            else None
        )

    def __len__(self) -> int:
        if self.trace is None:
            raise TypeError("synthetic workloads are unbounded")
        return len(self.trace)

    def __call__(self, t: int) -> float:
        return generate(self.spec, t, self.trace)


def load_trace(
    path: str | Path, scale: str = "linear", u_min: float = 10.0, u_max: float = 100.0
) -> list[float]:
    """Read a ``t,count`` CSV (header optional) into per-interval users/sec.

    ``linear`` maps the observed [min, max] of the counts onto [u_min, u_max];
    ``none`` keeps raw counts, clamped to the bounds.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = [(n, row) for n, row in enumerate(csv.reader(fh), start=1) if row]
    counts: list[float] = []
    for n, row in rows:
        try:
            if len(row) != 2:
                raise ValueError
            float(row[0])
            count = float(row[1])
            if not math.isfinite(count):
                raise ValueError
        except ValueError:
            if n == rows[0][0] and counts == [] and not _is_number(row[0]):
                continue  # header
            raise TraceError(f"{path}: malformed row {n}: {','.join(row)!r}") from None
        counts.append(count)
    if not counts:
        raise TraceError(f"{path}: trace is empty")
    if scale == "none":
        return [min(max(c, u_min), u_max) for c in counts]
    lo, hi = min(counts), max(counts)
    if len(counts) < 2 or lo == hi:
        raise TraceError(f"{path}: cannot scale a degenerate range ({len(counts)} rows, min=max={lo})")
    return [u_min + (c - lo) * (u_max - u_min) / (hi - lo) for c in counts]


def _is_number(s: str) -> bool:
    try:
        float(s)
    except ValueError:
        return False
    return True
