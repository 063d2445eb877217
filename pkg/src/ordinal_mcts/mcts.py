"""Budgeted Monte Carlo tree search with average, MixMax and Borda tree policies.

The tree is open-loop: each node is reached by an action sequence, and the
path is re-simulated every iteration, so stochastic transitions draw fresh
successors and cost budget like any other forward-model call.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels as K
from .mdp import BudgetExhausted, BudgetMeter, Observation, ordinalize, r_mcts, simulate
from .ordinal import BordaTable

UCT, MIXMAX, BORDA = "uct", "mixmax", "borda"
VARIANTS = (UCT, MIXMAX, BORDA)


class SearchError(ValueError):
    pass


@dataclass(frozen=True)
class SearchParams:
    c: float = 1.0 / math.sqrt(2.0)
    rl: int = 10
    variant: str = UCT
    mixmax_q: float = 0.25

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise SearchError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.rl < 1:
            raise SearchError("rollout length must be >= 1")
        if self.c < 0:
            raise SearchError("exploration constant must be >= 0")
        if not 0.0 <= self.mixmax_q <= 1.0:
            raise SearchError("MixMax q must lie in [0, 1]")


class SearchNode:
    __slots__ = ("actions", "untried", "children", "counts", "sums", "means",
                 "maxes", "table", "visits", "valid")

    def __init__(self, actions, n_ranks: int | None = None):
        k = len(actions)
        self.actions = tuple(actions)
        self.untried = list(range(k))
        self.children = [None] * k
        self.counts = np.zeros(k, dtype=np.int64)
        self.sums = np.zeros(k)
        self.means = np.zeros(k)
        self.maxes = np.full(k, -np.inf)
        self.visits = 0
        self.valid = np.ones(k, dtype=np.bool_)
        # Borda tables need two columns; a padded column is never updated
        self.table = BordaTable(max(k, 2), n_ranks) if n_ranks is not None else None


@dataclass
class SearchStats:
    iterations: int = 0
    expansions: int = 0
    selection_steps: int = 0
    rollout_steps: int = 0
    aborted: int = 0

    @property
    def forward_calls(self) -> int:
        return self.expansions + self.selection_steps + self.rollout_steps


class RolloutResult(NamedTuple):
    status: object
    score: int
    steps: int
    complete: bool


def _require_visited(node: SearchNode):
    if not node.counts.all():
        raise SearchError("tree policy called on a node with unvisited actions")


def select_child_uct(node: SearchNode, c: float) -> int:
    _require_visited(node)
    return K.ucb_argmax(node.means, node.counts, node.visits, 2.0 * c, node.valid)


def select_child_mixmax(node: SearchNode, c: float, q: float) -> int:
    _require_visited(node)
    exploit = q * node.maxes + (1.0 - q) * node.means
    return K.ucb_argmax(exploit, node.counts, node.visits, 2.0 * c, node.valid)


def select_child_borda(node: SearchNode, c: float) -> int:
    _require_visited(node)
    if len(node.actions) == 1:
        return 0
    borda = node.table.borda[: len(node.actions)]
    return K.ucb_argmax(borda, node.counts, node.visits, 2.0 * c, node.valid)


def _select(node: SearchNode, params: SearchParams) -> int:
    if params.variant == BORDA:
        return select_child_borda(node, params.c)
    if params.variant == MIXMAX:
        return select_child_mixmax(node, params.c, params.mixmax_q)
    return select_child_uct(node, params.c)


def _new_node(obs: Observation, env, params: SearchParams) -> SearchNode:
    n_ranks = env.scale.size if params.variant == BORDA else None
    return SearchNode(obs.actions, n_ranks)


def expand(node: SearchNode, state, env, meter: BudgetMeter, rng, params=None):
    """Try the lowest-index untried action once and attach its child."""
    if not node.untried:
        raise SearchError("node is fully expanded")
    i = node.untried[0]
    obs = simulate(env, state, node.actions[i], meter, rng)
    node.untried.pop(0)
    if not obs.terminal:
        node.children[i] = _new_node(obs, env, params or SearchParams())
    return i, node.children[i], obs


def rollout(obs: Observation, env, rl: int, meter: BudgetMeter, rng) -> RolloutResult:
    """Random play until terminal, ``rl`` moves, or budget exhaustion."""
    if rl < 1:
        raise SearchError("rollout length must be >= 1")
    steps = 0
    while not obs.terminal and steps < rl:
        acts = obs.actions
        a = acts[int(rng.random() * len(acts))]
        try:
            obs = simulate(env, obs.state, a, meter, rng)
        except BudgetExhausted:
            return RolloutResult(obs.status, obs.score, steps, False)
        steps += 1
    return RolloutResult(obs.status, obs.score, steps, True)


def backpropagate(path, status, score, variant: str, env):
    """Credit the outcome to every (node, action index) on ``path``."""
    if variant == BORDA:
        rank = ordinalize(score, status, env.bounds, env.scale)
        for node, i in path:
            node.table.update(i, rank)
            node.counts[i] += 1
            node.visits += 1
        return
    r = r_mcts(score, status, env.bounds)
    for node, i in path:
        node.counts[i] += 1
        node.visits += 1
        node.sums[i] += r
        node.means[i] = node.sums[i] / node.counts[i]
        if r > node.maxes[i]:
            node.maxes[i] = r


def _iterate(root_obs, tree, env, params, meter, rng, stats):
    node, obs, path = tree, root_obs, []
    while not obs.terminal:
        if node.untried:
            i, _, obs = expand(node, obs.state, env, meter, rng, params)
            stats.expansions += 1
            path.append((node, i))
            break
        i = _select(node, params)
        obs = simulate(env, obs.state, node.actions[i], meter, rng)
        stats.selection_steps += 1
        path.append((node, i))
        if obs.terminal:
            break
        if node.children[i] is None:
            node.children[i] = _new_node(obs, env, params)
        node = node.children[i]
    if not obs.terminal:
        res = rollout(obs, env, params.rl, meter, rng)
        stats.rollout_steps += res.steps
        if not res.complete:
            raise BudgetExhausted("budget ran out during rollout")
        status, score = res.status, res.score
    else:
        status, score = obs.status, obs.score
    backpropagate(path, status, score, params.variant, env)


def search_with_stats(root_obs: Observation, env, params: SearchParams,
                      meter: BudgetMeter, rng):
    if root_obs.terminal:
        raise SearchError("cannot search from a terminal state")
    tree = _new_node(root_obs, env, params)
    stats = SearchStats()
    while meter.remaining > 0:
        try:
            _iterate(root_obs, tree, env, params, meter, rng, stats)
        except BudgetExhausted:
            stats.aborted += 1
            break
        stats.iterations += 1
    # robust child: most visits, lowest index on ties
    best = int(np.argmax(tree.counts))
    return tree.actions[best], stats, tree


def search(root_obs: Observation, env, params: SearchParams, meter: BudgetMeter, rng):
    """Spend the meter's remaining budget and return the most-visited root action."""
    action, _, _ = search_with_stats(root_obs, env, params, meter, rng)
    return action
