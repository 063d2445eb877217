"""Ordinal bandits and Monte Carlo tree search driven by Borda scores."""
from ._jit import NUMBA_ENABLED
from .bandits import MultiSbm, OhUcb, OUcb, Ucb1, make_policy
from .envs import BanditEnv, ChainEnv, GapPlatformer, MedicineBandit, SkewBandit
from .mcts import SearchParams, search, search_with_stats
from .mdp import BudgetMeter, GameStatus, Observation
from .ordinal import (BordaTable, EmpiricalDistribution, Hierarchy, OrdinalScale,
                      mann_whitney_z, prob_beats)

__version__ = "0.1.0"

__all__ = ["NUMBA_ENABLED", "MultiSbm", "OhUcb", "OUcb", "Ucb1", "make_policy", "BanditEnv",
           "ChainEnv", "GapPlatformer", "MedicineBandit", "SkewBandit", "SearchParams", "search",
           "search_with_stats", "BudgetMeter", "GameStatus", "Observation", "BordaTable",
           "EmpiricalDistribution", "Hierarchy", "OrdinalScale", "mann_whitney_z", "prob_beats"]
