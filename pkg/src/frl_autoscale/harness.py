"""Experiment driver: the monitor/analyse/plan/execute loop plus metrics and outputs."""
from __future__ import annotations

import csv
import json
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .agent import AgentConfig, FRLAgent, Mode
from .fuzzy import FuzzyPartition, default_rt_partition, default_workload_partition
from .reward import RewardConfig, compute_reward
from .sim import ClusterSim, SimConfig
from .workload import EndOfTrace, PatternSpec, Workload

_FIXED = re.compile(r"^fixed\((\d+)\)$")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    pattern: PatternSpec = field(default_factory=PatternSpec)
    agent: AgentConfig = field(default_factory=AgentConfig)
    reward: RewardConfig = field(default_factory=RewardConfig)
    sim: SimConfig = field(default_factory=SimConfig)
    controller: str = "FQL"
    horizon: int = 1000
    seed: int = 0
    warmup: int = 0
    snapshot_every: int | None = None
    w_partition: FuzzyPartition | None = None
    rt_partition: FuzzyPartition | None = None

    def __post_init__(self) -> None:
        if self.horizon < 1:
            raise ConfigError(f"horizon must be >= 1, got {self.horizon}")
        if not 0 <= self.warmup < self.horizon:
            raise ConfigError(f"warmup must be in [0, horizon), got {self.warmup}")
        if self.snapshot_every is not None and self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be >= 1")
        if (self.sim.vm_min, self.sim.vm_max) != (self.reward.vm_min, self.reward.vm_max):
            raise ConfigError("sim and reward must agree on vm_min/vm_max")
        n = self.fixed_size
        if n is None and self.controller not in ("FSL", "FQL"):
            raise ConfigError(
                f"controller must be FSL, FQL or fixed(n), got {self.controller!r}"
            )
        if n is not None and not self.sim.vm_min <= n <= self.sim.vm_max:
            raise ConfigError(
                f"{self.controller} outside VM bounds [{self.sim.vm_min}, {self.sim.vm_max}]"
            )

    @property
    def fixed_size(self) -> int | None:
        m = _FIXED.match(self.controller)
        return int(m.group(1)) if m else None

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "ExperimentConfig":
        """Build from a JSON-style dict; every key is optional."""
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            reward = RewardConfig(**d.get("reward", {}))
            sim_d = {"vm_min": reward.vm_min, "vm_max": reward.vm_max,
                     "rt_cap": 2 * reward.sla_rt, **d.get("sim", {})}
            kwargs: dict[str, Any] = {
                "pattern": PatternSpec(**d.get("pattern", {})),
                "agent": AgentConfig(**d.get("agent", {})),
                "reward": reward,
                "sim": SimConfig(**sim_d),
            }
            for key in ("w_partition", "rt_partition"):
                if d.get(key) is not None:
                    kwargs[key] = FuzzyPartition.from_dict(d[key])
        except (TypeError, ValueError, KeyError) as exc:
            raise ConfigError(str(exc)) from exc
        for key in ("controller", "horizon", "seed", "warmup", "snapshot_every"):
            if key in d:
                kwargs[key] = d[key]
        return cls(**kwargs)

    def to_dict(self) -> dict[str, Any]:
        d = {
            "pattern": self.pattern.to_dict(),
            "agent": self.agent.to_dict(),
            "reward": self.reward.to_dict(),
            "sim": self.sim.to_dict(),
            "controller": self.controller,
            "horizon": self.horizon,
            "seed": self.seed,
            "warmup": self.warmup,
            "snapshot_every": self.snapshot_every,
        }
        for key in ("w_partition", "rt_partition"):
            part = getattr(self, key)
            d[key] = part.to_dict() if part is not None else None
        return d


@dataclass
class StepRecord:
    t: int
    w: float
    rt: float
    vm_active: int
    vm_total: int
    action_crisp: float
    action_applied: int
    reward: float
    epsilon: float
    q_delta_max: float


STEP_FIELDS = tuple(f.name for f in fields(StepRecord))


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list[StepRecord]
    summary: dict[str, Any]
    snapshots: dict[int, dict] = field(default_factory=dict)
    final_q: dict | None = None
    abs_dq: list[float] = field(default_factory=list)


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run one controller for ``cfg.horizon`` intervals.

    Per interval: advance the simulator under the interval's workload,
    observe, score the previous action, let the controller decide, apply.
    """
    workload = Workload(cfg.pattern)
    fixed = cfg.fixed_size
    sim_cfg = cfg.sim if fixed is None else replace(cfg.sim, initial_vms=fixed)
    cluster = ClusterSim(sim_cfg)
    agent = None
    if fixed is None:
        agent = FRLAgent(
            replace(cfg.agent, mode=Mode(cfg.controller)),
            seed=cfg.seed,
            w_partition=cfg.w_partition or default_workload_partition(),
            rt_partition=cfg.rt_partition or default_rt_partition(cfg.reward.sla_rt),
        )

    records: list[StepRecord] = []
    snapshots: dict[int, dict] = {}
    abs_dq: list[float] = []
    convergence_step: int | None = None
    truncated = False
    for t in range(cfg.horizon):
        try:
            w = workload(t)
        except EndOfTrace:
            truncated = True
            break
        obs = cluster.advance(w)
        total = cluster.total
        r = compute_reward(obs, cfg.reward)
        if agent is None:
            crisp, action, eps, change = 0.0, 0, 0.0, 0.0
        else:
            action = agent.step(obs, r if t > 0 else None)
            crisp, eps, change = agent.last_crisp, agent.epsilon, agent.last_change
            if t > 0:
                abs_dq.append(abs(agent.last_dq))
            if convergence_step is None and agent.converged():
                convergence_step = t
        applied = cluster.scale(action)
        records.append(
            StepRecord(t, obs.w, obs.rt, obs.vm, total, crisp, applied, r, eps, change)
        )
        if agent is not None and cfg.snapshot_every and t > 0 and t % cfg.snapshot_every == 0:
            snapshots[t] = agent.snapshot()

    summary = summarize(records, cfg, convergence_step, abs_dq)
    summary["truncated"] = truncated
    if agent is not None:
        floor_t = next((r.t for r in records if r.epsilon <= cfg.agent.epsilon_min), None)
        tail = [r for r in records if floor_t is not None and r.t >= floor_t]
        summary["exploitation_start"] = floor_t
        summary["exploitation"] = _stats(tail, cfg) if tail else None
    return ExperimentResult(
        cfg, records, summary, snapshots,
        agent.snapshot() if agent is not None else None, abs_dq,
    )


def _stats(records: Sequence[StepRecord], cfg: ExperimentConfig) -> dict[str, Any]:
    rt = np.array([r.rt for r in records])
    vm = np.array([r.vm_active for r in records])
    hist = {str(n): int(np.sum(vm == n)) for n in range(cfg.sim.vm_min, cfg.sim.vm_max + 1)}
    applied = [r.action_applied for r in records]
    return {
        "intervals": len(records),
        "mean_rt_s": float(rt.mean()),
        "p95_rt_s": float(np.percentile(rt, 95)),
        "sla_violation_ratio": float(np.mean(rt > cfg.reward.sla_rt)),
        "mean_vm_pct": float(np.mean(vm / cfg.sim.vm_max) * 100.0),
        "vm_histogram": hist,
        "scale_ups": int(sum(a for a in applied if a > 0)),
        "scale_downs": int(-sum(a for a in applied if a < 0)),
        "cumulative_reward": float(sum(r.reward for r in records)),
    }


def summarize(
    records: Sequence[StepRecord],
    cfg: ExperimentConfig,
    convergence_step: int | None = None,
    abs_dq: Sequence[float] = (),
) -> dict[str, Any]:
    """Summary metrics over the post-warmup records, plus a post-convergence block."""
    kept = [r for r in records if r.t >= cfg.warmup] or list(records)
    out = {"controller": cfg.controller, "seed": cfg.seed, "warmup": cfg.warmup}
    out.update(_stats(kept, cfg))
    out["convergence_step"] = convergence_step
    post = None
    if convergence_step is not None:
        tail = [r for r in records if r.t >= convergence_step]
        if tail:
            post = _stats(tail, cfg)
            # abs_dq[k] is the TD error applied at interval k + 1
            dq_tail = list(abs_dq)[convergence_step:]
            post["mean_abs_dq"] = float(np.mean(dq_tail)) if dq_tail else 0.0
    out["post_convergence"] = post
    return out


_SHARED = ("pattern", "sim", "reward", "horizon", "seed")
_DELTA_METRICS = ("mean_rt_s", "p95_rt_s", "sla_violation_ratio", "mean_vm_pct", "cumulative_reward")


def compare_controllers(
    cfgs: Sequence[ExperimentConfig], jobs: int = 1
) -> tuple[list[dict[str, Any]], list[ExperimentResult]]:
    """Run every config and tabulate summaries, with deltas against fixed baselines.

    Rows keep input order regardless of ``jobs``.
    """
    if not cfgs:
        raise ConfigError("nothing to compare")
    for c in cfgs[1:]:
        for name in _SHARED:
            if getattr(c, name) != getattr(cfgs[0], name):
                raise ConfigError(
                    f"configs differ in shared field {name!r} "
                    f"({c.controller} vs {cfgs[0].controller})"
                )
    if jobs > 1 and len(cfgs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_experiment, cfgs))
    else:
        results = [run_experiment(c) for c in cfgs]

    rows = []
    for res in results:
        s = res.summary
        rows.append({
            "controller": s["controller"],
            **{k: s[k] for k in _DELTA_METRICS},
            "scale_ups": s["scale_ups"],
            "scale_downs": s["scale_downs"],
            "convergence_step": s["convergence_step"],
        })
    baselines = [row for row, c in zip(rows, cfgs) if c.fixed_size is not None]
    if len(rows) > 1:
        for row in rows:
            for base in baselines:
                if base is row:
                    continue
                for k in _DELTA_METRICS:
                    row[f"{k}_vs_{base['controller']}"] = row[k] - base[k]
    return rows, results


def _fmt(v: Any) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def emit_outputs(result: ExperimentResult, out_dir: str | Path) -> list[Path]:
    """Write steps.csv, summary.json, rt.dat and q-table snapshots under ``out_dir``."""
    out = Path(out_dir)
    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        steps = out / "steps.csv"
        with steps.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(STEP_FIELDS)
            for rec in result.records:
                writer.writerow([_fmt(getattr(rec, f)) for f in STEP_FIELDS])
        written.append(steps)

        summary = out / "summary.json"
        summary.write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
        written.append(summary)

        rt = out / "rt.dat"
        with rt.open("w") as fh:
            fh.write("# t rt_s\n")
            for rec in result.records:
                fh.write(f"{rec.t} {rec.rt!r}\n")
        written.append(rt)

        for t, snap in sorted(result.snapshots.items()):
            p = out / f"qtable_t{t:06d}.json"
            p.write_text(json.dumps(snap, indent=2, sort_keys=True) + "\n")
            written.append(p)
        if result.final_q is not None:
            p = out / "qtable.json"
            p.write_text(json.dumps(result.final_q, indent=2, sort_keys=True) + "\n")
            written.append(p)
    except OSError as exc:
        raise OSError(f"cannot write outputs under {out}: {exc}") from exc
    return written


def write_comparison(rows: list[dict[str, Any]], out_dir: str | Path) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    keys: list[str] = []
    for row in rows:
        keys += [k for k in row if k not in keys]
    csv_path = out / "comparison.csv"
    with csv_path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=keys)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _fmt(v) if v is not None else "" for k, v in row.items()})
    json_path = out / "comparison.json"
    json_path.write_text(json.dumps(rows, indent=2, sort_keys=True) + "\n")
    return [csv_path, json_path]


def load_config(path: str | Path | None) -> dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return data
