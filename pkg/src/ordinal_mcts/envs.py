"""Built-in benchmark environments."""
from __future__ import annotations

import bisect
from typing import NamedTuple

import numpy as np

from .mdp import GameStatus, IllegalAction, Observation, ScoreBounds, outcome_scale
from .ordinal import OrdinalScale, borda_from_pmfs


class BanditEnv:
    """Fixed arms with known outcome distributions over an ordinal scale."""

    id = "bandit"

    def __init__(self, labels, values, pmfs):
        self.scale = OrdinalScale(tuple(labels))
        self.values = np.asarray(values, dtype=np.float64)
        self.pmfs = np.asarray(pmfs, dtype=np.float64)
        if self.pmfs.shape[1] != self.scale.size or self.values.shape[0] != self.scale.size:
            raise ValueError("pmfs and values must cover every rank of the scale")
        if not np.allclose(self.pmfs.sum(axis=1), 1.0):
            raise ValueError("each arm's outcome probabilities must sum to 1")
        if np.any(np.diff(self.values) <= 0):
            raise ValueError("numeric values must increase strictly with rank")
        self._cdf = [list(np.cumsum(p)[:-1]) for p in self.pmfs]

    @property
    def n_arms(self) -> int:
        return self.pmfs.shape[0]

    @property
    def n_ranks(self) -> int:
        return self.scale.size

    def pull(self, arm: int, rng) -> int:
        if not 0 <= arm < self.n_arms:
            raise IndexError(f"arm {arm} outside 0..{self.n_arms - 1}")
        return bisect.bisect_right(self._cdf[arm], rng.random())

    def true_borda(self) -> np.ndarray:
        return borda_from_pmfs(self.pmfs)

    def expected_values(self) -> np.ndarray:
        return self.pmfs @ self.values


class MedicineBandit(BanditEnv):
    """Four treatments; rank 0 is a dead patient."""

    id = "medicine"

    def __init__(self):
        super().__init__(
            labels=("dead", "alive-0.6", "alive-0.7", "alive-1.0"),
            values=(0.0, 0.6, 0.7, 1.0),
            pmfs=[
                [0.2, 0.0, 0.0, 0.8],
                [0.8, 0.0, 0.0, 0.2],
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
            ],
        )


def medicine_pull(arm: int, rng) -> int:
    return _MEDICINE.pull(arm, rng)


def true_borda_medicine() -> np.ndarray:
    return _MEDICINE.true_borda()


class SkewBandit(BanditEnv):
    """Arm A is risky (worst or best outcome), arm B always gives the middle one."""

    id = "skew"

    def __init__(self, p: float = 0.7, values=(0.0, 0.6, 0.8)):
        if not 0.0 < p < 1.0:
            raise ValueError("p must lie strictly between 0 and 1")
        self.p = p
        super().__init__(
            labels=("low", "mid", "high"),
            values=values,
            pmfs=[[1.0 - p, 0.0, p], [0.0, 1.0, 0.0]],
        )


_MEDICINE = MedicineBandit()


# --------------------------------------------------------------------------
# MDPs


class PlatformerState(NamedTuple):
    pos: int
    t: int
    status: GameStatus
    done: bool


class GapPlatformer:
    """A track of cells with deadly gaps; the goal is the last cell.

    Actions: 0 walk right, 1 jump two cells, 2 stand still. Jumping across a
    gap succeeds with probability ``p_jump``; walking into a gap or landing in
    one is fatal. Hitting the step limit ends the episode while still playing.
    ``score_map`` assigns the reported score to each cell; it must increase
    strictly, and the default is the cell index.
    """

    id = "platformer"
    WALK, JUMP, STAND = 0, 1, 2
    ACTIONS = (WALK, JUMP, STAND)

    def __init__(self, length: int = 12, gaps=(4, 8), p_jump: float = 0.7,
                 step_limit: int = 60, score_map=None):
        if length < 2:
            raise ValueError("track length must be >= 2")
        self.length = int(length)
        self.gaps = frozenset(int(g) for g in gaps)
        if any(not 0 < g < self.length for g in self.gaps):
            raise ValueError("gaps must lie strictly inside the track")
        if not 0.0 <= p_jump <= 1.0:
            raise ValueError("p_jump must be a probability")
        self.p_jump = float(p_jump)
        self.step_limit = int(step_limit)
        if score_map is None:
            score_map = range(self.length + 1)
        self.score_map = tuple(int(s) for s in score_map)
        if len(self.score_map) != self.length + 1 or any(
                b <= a for a, b in zip(self.score_map, self.score_map[1:])):
            raise ValueError("score_map needs length+1 strictly increasing scores")
        self.scores = self.score_map
        self.bounds = ScoreBounds(self.score_map[0], self.score_map[-1])
        self.scale = outcome_scale(self.scores)

    def _observe(self, s: PlatformerState) -> Observation:
        score = self.score_map[0] if s.status == GameStatus.LOST else self.score_map[s.pos]
        return Observation(s, s.status, score, () if s.done else self.ACTIONS, s.done)

    def reset(self) -> Observation:
        return self._observe(PlatformerState(0, 0, GameStatus.PLAYING, False))

    def gap_adjacent(self, state: PlatformerState) -> bool:
        return not state.done and (state.pos + 1) in self.gaps

    def step(self, state: PlatformerState, action: int, rng) -> Observation:
        if state.done or action not in self.ACTIONS:
            raise IllegalAction(f"action {action} not available in {state}")
        pos, t = state.pos, state.t + 1
        dead = False
        if action == self.WALK:
            pos += 1
            dead = pos in self.gaps
        elif action == self.JUMP:
            pos += 2
            if pos in self.gaps:
                dead = True
            elif (state.pos + 1) in self.gaps:
                dead = rng.random() >= self.p_jump
        pos = min(pos, self.length)
        if dead:
            nxt = PlatformerState(pos, t, GameStatus.LOST, True)
        elif pos >= self.length:
            nxt = PlatformerState(pos, t, GameStatus.WON, True)
        else:
            nxt = PlatformerState(pos, t, GameStatus.PLAYING, t >= self.step_limit)
        return self._observe(nxt)


def platformer_step(env: GapPlatformer, state, action, rng) -> Observation:
    return env.step(state, action, rng)


class ChainState(NamedTuple):
    depth: int
    status: GameStatus
    done: bool


class ChainEnv:
    """Deterministic chain: action 0 moves one step deeper, action 1 loses.

    Reaching ``depth`` wins; the score is the depth reached (0 once lost).
    """

    id = "chain"
    ACTIONS = (0, 1)

    def __init__(self, depth: int = 2, score_map=None):
        if depth < 1:
            raise ValueError("chain depth must be >= 1")
        self.depth = int(depth)
        if score_map is None:
            score_map = range(self.depth + 1)
        self.score_map = tuple(int(s) for s in score_map)
        if len(self.score_map) != self.depth + 1 or any(
                b <= a for a, b in zip(self.score_map, self.score_map[1:])):
            raise ValueError("score_map needs depth+1 strictly increasing scores")
        self.scores = self.score_map
        self.bounds = ScoreBounds(self.score_map[0], self.score_map[-1])
        self.scale = outcome_scale(self.scores)

    def _observe(self, s: ChainState) -> Observation:
        score = self.score_map[0] if s.status == GameStatus.LOST else self.score_map[s.depth]
        return Observation(s, s.status, score, () if s.done else self.ACTIONS, s.done)

    def reset(self) -> Observation:
        return self._observe(ChainState(0, GameStatus.PLAYING, False))

    def step(self, state: ChainState, action: int, rng) -> Observation:
        if state.done or action not in self.ACTIONS:
            raise IllegalAction(f"action {action} not available in {state}")
        if action == 1:
            return self._observe(ChainState(state.depth, GameStatus.LOST, True))
        d = state.depth + 1
        if d >= self.depth:
            return self._observe(ChainState(d, GameStatus.WON, True))
        return self._observe(ChainState(d, GameStatus.PLAYING, False))


BANDIT_ENVS = {"medicine": MedicineBandit, "skew": SkewBandit}
MDP_ENVS = {"platformer": GapPlatformer, "chain": ChainEnv}
