"""Experiment configuration, seeded execution and reporting."""
from .config import ConfigError, ExperimentConfig, load_config, parse_config
from .runner import RunRecord, derive_seed, run_bandit, run_experiment, run_mcts, write_records

__all__ = ["ConfigError", "ExperimentConfig", "load_config", "parse_config", "RunRecord",
           "derive_seed", "run_bandit", "run_experiment", "run_mcts", "write_records"]
