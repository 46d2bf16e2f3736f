"""Fuzzy reinforcement-learning auto-scaling: FSL and FQL controllers plus a simulated cluster."""
from .agent import AgentConfig, FRLAgent, Init, Mode
from .fuzzy import FuzzyPartition, MembershipFunction, RuleBase
from .harness import ExperimentConfig, compare_controllers, emit_outputs, run_experiment
from .reward import RewardConfig, compute_reward
from .sim import ClusterSim, SimConfig
from .state import ACTIONS, SystemState
from .workload import PatternSpec

__all__ = [
    "ACTIONS",
    "AgentConfig",
    "ClusterSim",
    "ExperimentConfig",
    "FRLAgent",
    "FuzzyPartition",
    "Init",
    "MembershipFunction",
    "Mode",
    "PatternSpec",
    "RewardConfig",
    "RuleBase",
    "SimConfig",
    "SystemState",
    "compare_controllers",
    "compute_reward",
    "emit_outputs",
    "run_experiment",
]
