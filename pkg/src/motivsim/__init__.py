"""Homeostatic drive-reduction agents on a grid world, trained by linear Q-learning."""

from .env import (
    DEFAULT_LAYOUT, METABOLISMS, Action, AgentState, ConfigError, GridConfig, Layout,
    MetabolismProfile, StationSpec, StepOutcome, load_layout, nearest_station, reset, step,
)
from .experiments import (
    EXPERIMENTS, EpisodeLog, ExperimentConfig, TestInit, build_config, reachable_starts,
    run_test, run_training,
)
from .features import encode, feature_size
from .learner import (
    DivergenceError, Hyperparameters, epsilon_at, init_weights, q_value, select_action, td_update,
)
from .motivation import NeedConfig, RewardModel, drive, reward_m1, reward_m2

__version__ = "0.1.0"
