"""Environment contract, forward-model budget and reward mappings."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Protocol, Sequence

from .ordinal import OrdinalScale


class GameStatus(enum.IntEnum):
    LOST = 0
    PLAYING = 1
    WON = 2

    @property
    def label(self) -> str:
        return self.name.lower()


@dataclass(frozen=True)
class Observation:
    """Result of one forward-model call.

    ``terminal`` is separate from ``status`` because a step-limit expiry ends
    an episode while it is still ``PLAYING``.
    """

    state: Any
    status: GameStatus
    score: int
    actions: tuple
    terminal: bool


class BudgetExhausted(Exception):
    """Raised when a search asks for more forward-model calls than allowed."""


class IllegalAction(ValueError):
    pass


@dataclass
class BudgetMeter:
    limit: int
    used: int = 0

    @property
    def remaining(self) -> int:
        return self.limit - self.used

    def charge(self):
        if self.used >= self.limit:
            raise BudgetExhausted(f"forward-model budget of {self.limit} calls used up")
        self.used += 1


@dataclass(frozen=True)
class ScoreBounds:
    r_min: int
    r_max: int

    def __post_init__(self):
        if not self.r_min < self.r_max:
            raise ValueError(f"score bounds need r_min < r_max, got {self.r_min}, {self.r_max}")


class Environment(Protocol):
    bounds: ScoreBounds
    scale: OrdinalScale
    scores: Sequence[int]

    def reset(self) -> Observation: ...

    def step(self, state, action: int, rng) -> Observation: ...


def simulate(env: Environment, state, action: int, meter: BudgetMeter, rng) -> Observation:
    """One metered forward-model call; the input state is never mutated."""
    meter.charge()
    return env.step(state, action, rng)


def normalize_score(score, bounds: ScoreBounds) -> float:
    if not bounds.r_min <= score <= bounds.r_max:
        raise ValueError(f"score {score} outside [{bounds.r_min}, {bounds.r_max}]")
    return (score - bounds.r_min) / (bounds.r_max - bounds.r_min)


_BAND = {GameStatus.LOST: 0.0, GameStatus.PLAYING: 1.0 / 3.0, GameStatus.WON: 2.0 / 3.0}


def map_reward(r_norm: float, status: GameStatus) -> float:
    """Squash (normalized score, status) into [0, 1] with lost < playing < won."""
    return r_norm / 3.0 + _BAND[GameStatus(status)]


def r_mcts(score, status, bounds: ScoreBounds) -> float:
    return map_reward(normalize_score(score, bounds), status)


def outcome_label(status: GameStatus, score: int) -> str:
    return f"{GameStatus(status).label}:{score}"


def outcome_scale(scores: Sequence[int]) -> OrdinalScale:
    """All (status, score) pairs ordered by status band, then score."""
    scores = sorted(set(int(s) for s in scores))
    return OrdinalScale(tuple(outcome_label(st, s) for st in GameStatus for s in scores))


def ordinalize(score, status, bounds: ScoreBounds, scale: OrdinalScale) -> int:
    if not bounds.r_min <= score <= bounds.r_max:
        raise ValueError(f"score {score} outside [{bounds.r_min}, {bounds.r_max}]")
    return scale.rank(outcome_label(status, score))
