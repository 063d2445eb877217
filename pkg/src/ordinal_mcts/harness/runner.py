"""Seeded execution of bandit and tree-search experiments."""
from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..bandits import make_policy
from ..mcts import SearchParams, search_with_stats
from ..mdp import BudgetMeter, GameStatus, ordinalize, r_mcts
from .config import ConfigError, ExperimentConfig, resolve_hierarchy

_MASK = (1 << 64) - 1

VARIANT_OF = {"mcts": "uct", "mixmax": "mixmax", "o-mcts": "borda"}


class RunRecord(NamedTuple):
    run_id: int
    seed: int
    experiment: str
    environment: str
    algorithm: str
    c: float
    rl: int | None
    q: float | None
    z_critical: float | None
    hierarchy: str
    budget: int
    step: int
    action: int
    rank: int
    reward: float
    status: str
    score: int | None
    deaths: int
    mean_value: float
    budget_used: int


FIELDS = RunRecord._fields


def splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & _MASK
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK
    return x ^ (x >> 31)


def derive_seed(base_seed: int, run_id: int) -> int:
    """Reproducible, well-mixed 64-bit seed for one run."""
    return splitmix64(splitmix64(base_seed & _MASK) ^ run_id)


def streams(seed: int):
    """Independent environment and agent generators for one run."""
    env_ss, agent_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(env_ss), np.random.default_rng(agent_ss)


def _hierarchy_text(levels) -> str:
    return "|".join(" ".join(str(r) for r in lvl) for lvl in levels) if levels else ""


class Cell(NamedTuple):
    run_id: int
    algo_index: int
    params: dict
    repetition: int


def cells(cfg: ExperimentConfig):
    """All (algorithm, parameter tuple, repetition) cells in canonical order."""
    out = []
    for ai, spec in enumerate(cfg.algorithms):
        for params in spec.grid():
            for rep in range(cfg.repetitions):
                out.append(Cell(len(out), ai, params, rep))
    return out


def run_bandit_cell(cfg: ExperimentConfig, cell: Cell, final_only: bool = False) -> list[RunRecord]:
    spec = cfg.algorithms[cell.algo_index]
    env = cfg.make_env()
    seed = derive_seed(cfg.seed, cell.run_id)
    env_rng, agent_rng = streams(seed)
    levels = resolve_hierarchy(spec.hierarchy, env.scale) if spec.hierarchy else None
    p = cell.params
    policy = make_policy(spec.kind, env.n_arms, env.n_ranks, p["c"], values=env.values,
                         hierarchy=levels, z_critical=p["z_critical"] or 0.65, rng=agent_rng)
    head = (cell.run_id, seed, cfg.experiment, cfg.env_id, spec.kind, p["c"], p["rl"], p["q"],
            p["z_critical"], _hierarchy_text(levels), cfg.budget)
    values = env.values
    records = []
    deaths = 0
    total = 0.0
    for step in range(1, cfg.budget + 1):
        arm = policy.select()
        rank = env.pull(arm, env_rng)
        policy.update(arm, rank)
        value = float(values[rank])
        deaths += rank == 0
        total += value
        if not final_only or step == cfg.budget:
            records.append(RunRecord(*head, step, int(arm), int(rank), value, "", None,
                                     int(deaths), total / step, step))
    return records


class Move(NamedTuple):
    before: object
    action: int
    after: object
    budget_used: int


def play_episode(env, params: SearchParams, budget: int, seed: int) -> list[Move]:
    """Play one game, choosing every real move with a fresh budgeted search."""
    env_rng, agent_rng = streams(seed)
    obs = env.reset()
    moves = []
    while not obs.terminal:
        meter = BudgetMeter(budget)
        action, stats, _ = search_with_stats(obs, env, params, meter, agent_rng)
        if stats.forward_calls != meter.used:
            raise RuntimeError(f"forward-model audit failed: counted {stats.forward_calls}, "
                               f"meter says {meter.used}")
        nxt = env.step(obs.state, action, env_rng)
        moves.append(Move(obs, action, nxt, meter.used))
        obs = nxt
    return moves


def run_mcts_cell(cfg: ExperimentConfig, cell: Cell, final_only: bool = False) -> list[RunRecord]:
    spec = cfg.algorithms[cell.algo_index]
    env = cfg.make_env()
    seed = derive_seed(cfg.seed, cell.run_id)
    p = cell.params
    params = SearchParams(c=p["c"], rl=p["rl"], variant=VARIANT_OF[spec.kind],
                          mixmax_q=p["q"] if p["q"] is not None else 0.25)
    head = (cell.run_id, seed, cfg.experiment, cfg.env_id, spec.kind, p["c"], p["rl"], p["q"],
            None, "", cfg.budget)
    records = []
    deaths = 0
    total = 0.0
    for step, mv in enumerate(play_episode(env, params, cfg.budget, seed), start=1):
        o = mv.after
        rank = ordinalize(o.score, o.status, env.bounds, env.scale)
        reward = r_mcts(o.score, o.status, env.bounds)
        deaths += o.status == GameStatus.LOST
        total += reward
        records.append(RunRecord(*head, step, int(mv.action), rank, reward,
                                 GameStatus(o.status).label, int(o.score), int(deaths),
                                 total / step, mv.budget_used))
    return records[-1:] if final_only else records


def run_cell(cfg: ExperimentConfig, cell: Cell, final_only: bool = False) -> list[RunRecord]:
    if cfg.is_bandit:
        return run_bandit_cell(cfg, cell, final_only)
    return run_mcts_cell(cfg, cell, final_only)


def _run_cell_star(args):
    return run_cell(*args)


def run_experiment(cfg: ExperimentConfig, threads: int = 1,
                   final_only: bool = False) -> list[RunRecord]:
    """Run every cell; output order is canonical regardless of ``threads``.

    ``final_only`` keeps just the last record of each run, for large sweeps.
    """
    todo = cells(cfg)
    if threads is None or threads < 1:
        raise ConfigError("threads must be >= 1")
    if threads == 1 or len(todo) == 1:
        chunks = [run_cell(cfg, c, final_only) for c in todo]
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(_run_cell_star, [(cfg, c, final_only) for c in todo],
                                   chunksize=max(1, len(todo) // (4 * threads))))
    return [r for chunk in chunks for r in chunk]


def run_bandit(cfg: ExperimentConfig, threads: int = 1, final_only: bool = False):
    if not cfg.is_bandit:
        raise ConfigError(f"environment.id: {cfg.env_id!r} is not a bandit environment")
    return run_experiment(cfg, threads, final_only)


def run_mcts(cfg: ExperimentConfig, threads: int = 1, final_only: bool = False):
    if cfg.is_bandit:
        raise ConfigError(f"environment.id: {cfg.env_id!r} is not an MDP environment")
    return run_experiment(cfg, threads, final_only)


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def records_to_csv(records) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(FIELDS)
    for r in records:
        w.writerow([_fmt(v) for v in r])
    return buf.getvalue()


def write_records(records, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(records_to_csv(records), encoding="utf-8")
    return path
