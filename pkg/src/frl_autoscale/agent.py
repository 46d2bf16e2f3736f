"""Fuzzy SARSA (on-policy) and fuzzy Q-learning (off-policy) agents.

The agent keeps one q-value per (rule, candidate action) pair. Each control
step every rule picks a partial action epsilon-greedily; the crisp scaling
action is the firing-weighted average of those picks, and the TD error is
spread back over the picked cells in proportion to their firing strength.
"""
from __future__ import annotations

import json
import math
from collections import deque
from dataclasses import asdict, dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .fuzzy import (
    FiringVector,
    FuzzyPartition,
    RuleBase,
    combine_action,
    default_rt_partition,
    default_workload_partition,
    discretize_action,
    fire_rules,
)
from .state import ACTIONS, SystemState

N_RULES = 9
N_ACTIONS = len(ACTIONS)

# argmax tie-break: prefer small |delta|, then scale-down over scale-up
_PREFERENCE = sorted(range(N_ACTIONS), key=lambda k: (abs(ACTIONS[k]), ACTIONS[k]))


class Mode(str, Enum):
    FSL = "FSL"
    FQL = "FQL"


class Init(str, Enum):
    NON_EXPERT = "non_expert_zero"
    EXPERT = "expert_table"


class ContractError(RuntimeError):
    """Agent used out of protocol order."""


@dataclass(frozen=True)
class AgentConfig:
    eta: float = 0.1
    gamma: float = 0.8
    epsilon0: float = 1.0
    epsilon_min: float = 0.2
    epsilon_decay_tau: float = 200.0
    mode: Mode = Mode.FQL
    init: Init = Init.NON_EXPERT
    convergence_delta: float = 1e-3
    convergence_window: int = 50

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", Mode(self.mode))
        object.__setattr__(self, "init", Init(self.init))
        if not 0 < self.eta <= 1:
            raise ValueError(f"eta must be in (0, 1], got {self.eta}")
        if not 0 <= self.gamma < 1:
            raise ValueError(f"gamma must be in [0, 1), got {self.gamma}")
        if not 0 <= self.epsilon_min <= self.epsilon0 <= 1:
            raise ValueError(
                f"need 0 <= epsilon_min <= epsilon0 <= 1, got {self.epsilon_min}, {self.epsilon0}"
            )
        if self.epsilon_decay_tau <= 0:
            raise ValueError("epsilon_decay_tau must be positive")
        if self.convergence_delta <= 0 or self.convergence_window < 1:
            raise ValueError("convergence_delta must be > 0 and convergence_window >= 1")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["mode"] = self.mode.value
        d["init"] = self.init.value
        return d


# Designated consequent per (w label, rt label) for the expert prior.
EXPERT_DESIGNATIONS: dict[tuple[str, str], int] = {
    ("high", "bad"): 2,
    ("high", "ok"): 1,
    ("medium", "bad"): 1,
    ("low", "good"): -2,
    ("medium", "good"): 0,
    ("low", "ok"): 1,
    ("low", "bad"): 1,
    ("high", "good"): 0,
    ("medium", "ok"): 1,
}


def init_qtable(
    cfg: AgentConfig,
    w_labels: Sequence[str] = ("low", "medium", "high"),
    rt_labels: Sequence[str] = ("good", "ok", "bad"),
) -> np.ndarray:
    """Initial 9x5 q-table: zeros, or the expert prior (1.0 designated, 0.25 neighbours)."""
    q = np.zeros((N_RULES, N_ACTIONS))
    if cfg.init is Init.NON_EXPERT:
        return q
    for i, (wi, ri) in enumerate(RuleBase().rules):
        k = ACTIONS.index(EXPERT_DESIGNATIONS[(w_labels[wi], rt_labels[ri])])
        q[i, k] = 1.0
        for nb in (k - 1, k + 1):
            if 0 <= nb < N_ACTIONS:
                q[i, nb] = 0.25
    return q


def greedy_index(row: np.ndarray) -> int:
    best = row.max()
    return next(k for k in _PREFERENCE if row[k] == best)


def select_partial_actions(
    q: np.ndarray, fv: FiringVector, eps: float, rng: np.random.Generator
) -> np.ndarray:
    """Independent epsilon-greedy pick of an action index for every rule.

    Always consumes ``N`` uniforms then ``N`` integers from ``rng``, whatever
    ``eps`` is, so the random stream stays aligned across runs.
    """
    n = q.shape[0]
    explore = rng.random(n) < eps
    random_pick = rng.integers(0, q.shape[1], size=n)
    return np.array(
        [int(random_pick[i]) if explore[i] else greedy_index(q[i]) for i in range(n)]
    )


def approx_q(q: np.ndarray, fv: FiringVector, chosen: Sequence[int]) -> float:
    return float(np.dot(fv.strengths, q[np.arange(q.shape[0]), np.asarray(chosen)]))


def state_value(q: np.ndarray, fv_next: FiringVector) -> float:
    return float(np.dot(fv_next.strengths, q.max(axis=1)))


def error_signal(
    mode: Mode | str, r: float, q_sa: float, q_next: float, v_next: float, gamma: float
) -> float:
    """TD error: SARSA bootstraps on Q(s', a'), Q-learning on V(s')."""
    mode = Mode(mode)
    target = q_next if mode is Mode.FSL else v_next
    return r + gamma * target - q_sa


def update_qtable(
    q: np.ndarray, fv: FiringVector, chosen: Sequence[int], dq: float, eta: float
) -> np.ndarray:
    """Return a copy of ``q`` with each fired, chosen cell moved by eta*dq*mu_i."""
    out = q.copy()
    for i, mu in enumerate(fv.strengths):
        if mu > 0:
            out[i, chosen[i]] += eta * dq * mu
    return out


def epsilon_at(step: int, cfg: AgentConfig) -> float:
    return max(cfg.epsilon_min, cfg.epsilon0 * math.exp(-step / cfg.epsilon_decay_tau))


def check_convergence(history: Sequence[np.ndarray], delta: float, window: int) -> bool:
    """True when every one of the last ``window`` table changes is below ``delta``."""
    if len(history) < window + 1:
        return False
    tail = list(history)[-(window + 1):]
    return all(
        float(np.max(np.abs(b - a))) < delta for a, b in zip(tail, tail[1:])
    )


class FRLAgent:
    """Stateful FSL/FQL controller stepped once per control interval."""

    def __init__(
        self,
        cfg: AgentConfig | None = None,
        *,
        seed: int = 0,
        rule_base: RuleBase | None = None,
        w_partition: FuzzyPartition | None = None,
        rt_partition: FuzzyPartition | None = None,
        sla_rt: float = 0.6,
        q: np.ndarray | None = None,
    ) -> None:
        self.cfg = cfg or AgentConfig()
        self.rule_base = rule_base or RuleBase()
        self.w_partition = w_partition or default_workload_partition()
        self.rt_partition = rt_partition or default_rt_partition(sla_rt)
        self.rng = np.random.default_rng(seed)
        if q is None:
            q = init_qtable(self.cfg, self.w_partition.labels, self.rt_partition.labels)
        self.q = np.array(q, dtype=float)
        if self.q.shape != (N_RULES, N_ACTIONS):
            raise ValueError(f"q-table must be {N_RULES}x{N_ACTIONS}, got {self.q.shape}")
        self.steps = 0
        self.epsilon = epsilon_at(0, self.cfg)
        self.last_dq: float | None = None
        self.last_change = 0.0
        self._fv: FiringVector | None = None
        self._chosen: np.ndarray | None = None
        self._history: deque[np.ndarray] = deque(maxlen=self.cfg.convergence_window + 1)
        self._history.append(self.q.copy())

    def fire(self, s: SystemState) -> FiringVector:
        return fire_rules(self.rule_base, self.w_partition, self.rt_partition, s)

    def crisp_action(self, fv: FiringVector, chosen: Sequence[int]) -> float:
        return combine_action(fv, [ACTIONS[k] for k in chosen])

    @property
    def started(self) -> bool:
        return self._fv is not None

    def step(self, obs: SystemState, reward: float | None = None) -> int:
        """Consume the new observation (and reward for the last action); return the next action."""
        fv = self.fire(obs)
        if not self.started:
            if reward is not None:
                raise ContractError("reward supplied before the agent observed any state")
            self._select(fv)
            return discretize_action(self.last_crisp)
        if reward is None:
            raise ContractError("reward required for every step after the first")

        before = self.q
        # Q(s,a) is re-evaluated on the current table; only differs from the
        # value cached at selection time when the previous update hit these cells.
        q_sa = approx_q(self.q, self._fv, self._chosen)
        if self.cfg.mode is Mode.FSL:
            self._advance_epsilon()
            chosen_next = select_partial_actions(self.q, fv, self.epsilon, self.rng)
            q_next = approx_q(self.q, fv, chosen_next)
            dq = error_signal(Mode.FSL, reward, q_sa, q_next, 0.0, self.cfg.gamma)
            self.q = update_qtable(self.q, self._fv, self._chosen, dq, self.cfg.eta)
            self._fv, self._chosen = fv, chosen_next
            self.last_crisp = self.crisp_action(fv, chosen_next)
        else:
            v_next = state_value(self.q, fv)
            dq = error_signal(Mode.FQL, reward, q_sa, 0.0, v_next, self.cfg.gamma)
            self.q = update_qtable(self.q, self._fv, self._chosen, dq, self.cfg.eta)
            self._advance_epsilon()
            self._select(fv)
        self.last_dq = dq
        self.last_change = float(np.max(np.abs(self.q - before)))
        self._history.append(self.q.copy())
        return discretize_action(self.last_crisp)

    def _advance_epsilon(self) -> None:
        self.steps += 1
        self.epsilon = epsilon_at(self.steps, self.cfg)

    def _select(self, fv: FiringVector) -> None:
        self._chosen = select_partial_actions(self.q, fv, self.epsilon, self.rng)
        self._fv = fv
        self.last_crisp = self.crisp_action(fv, self._chosen)

    def converged(self) -> bool:
        return check_convergence(
            self._history, self.cfg.convergence_delta, self.cfg.convergence_window
        )

    def snapshot(self) -> dict:
        return qtable_to_dict(self.q, self.cfg, step=self.steps)


def qtable_to_dict(q: np.ndarray, cfg: AgentConfig, step: int | None = None) -> dict:
    d = {"q": q.tolist(), "actions": list(ACTIONS), "config": cfg.to_dict()}
    if step is not None:
        d["step"] = step
    return d


def qtable_to_json(q: np.ndarray, cfg: AgentConfig, step: int | None = None) -> str:
    return json.dumps(qtable_to_dict(q, cfg, step), indent=2, sort_keys=True)


def qtable_from_json(text: str) -> tuple[np.ndarray, AgentConfig]:
    d = json.loads(text)
    q = np.array(d["q"], dtype=float)
    if q.shape != (N_RULES, N_ACTIONS) or not np.all(np.isfinite(q)):
        raise ValueError(f"bad q-table snapshot of shape {q.shape}")
    return q, AgentConfig(**d["config"])
