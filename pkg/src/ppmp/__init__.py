"""Corrective-feedback deep reinforcement learning with multihead uncertainty."""

__version__ = "0.1.0"

from .nets import Network, AdamState, adam_step, soft_update, gradients
from .envs import Pendulum, MountainCar, make_env, StepResult
from .replay import Transition, ReplayBuffer, dump_buffer, load_buffer
from .selector import head_covariance, gain, correct, CorrectionConfig
from .predictor import GateState, predict, q_filter, train_predictor
from .oracle import OracleConfig, reference_action, feedback
from .agent import AgentConfig, Agent, OUProcess
from .harness import ExperimentConfig, run_experiment, summarize, load_run_csv

__all__ = [
    "Network", "AdamState", "adam_step", "soft_update", "gradients",
    "Pendulum", "MountainCar", "make_env", "StepResult",
    "Transition", "ReplayBuffer", "dump_buffer", "load_buffer",
    "head_covariance", "gain", "correct", "CorrectionConfig",
    "GateState", "predict", "q_filter", "train_predictor",
    "OracleConfig", "reference_action", "feedback",
    "AgentConfig", "Agent", "OUProcess",
    "ExperimentConfig", "run_experiment", "summarize", "load_run_csv",
]
