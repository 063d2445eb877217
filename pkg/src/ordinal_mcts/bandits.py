"""Arm-selection policies: UCB1, O-UCB, OH-UCB and MultiSBM.

All policies share ``select() -> arm`` and ``update(arm, rank)``. The
exploration bonus is ``c * sqrt(2 ln n / n_j)`` for every policy, so one ``c``
grid is comparable across them; ``c = 1`` is plain UCB1.
"""
from __future__ import annotations

import numpy as np

from . import _kernels as K
from .ordinal import BordaTable, Hierarchy, OrdinalError, borda_from_pmfs

KINDS = ("ucb1", "o-ucb", "oh-ucb", "multisbm")

# significance is only tested for samples this large
MIN_ARM_PULLS = 3
MIN_PAIR_PULLS = 20


class PolicyError(ValueError):
    pass


def _check_arms(n_arms):
    if n_arms < 1:
        raise PolicyError("a bandit needs at least one arm")


class Ucb1:
    """Numeric UCB on rewards in [0, 1]."""

    kind = "ucb1"

    def __init__(self, n_arms: int, c: float, values=None):
        _check_arms(n_arms)
        self.c = float(c)
        self.values = None if values is None else np.asarray(values, dtype=np.float64)
        self.counts = np.zeros(n_arms, dtype=np.int64)
        self.sums = np.zeros(n_arms)
        self.means = np.zeros(n_arms)
        self.n = 0
        self._valid = np.ones(n_arms, dtype=np.bool_)
        self._last = None

    @property
    def n_arms(self):
        return self.counts.shape[0]

    def select(self) -> int:
        self._last = K.ucb_argmax(self.means, self.counts, self.n, self.c, self._valid)
        return self._last

    def update_value(self, arm: int, reward: float):
        self.counts[arm] += 1
        self.sums[arm] += reward
        self.means[arm] = self.sums[arm] / self.counts[arm]
        self.n += 1

    def update(self, arm: int, rank: int):
        if self.values is None:
            raise PolicyError("UCB1 needs numeric values per rank to learn from ranks")
        self.update_value(arm, self.values[rank])


class OUcb:
    """Borda score as exploitation term."""

    kind = "o-ucb"

    def __init__(self, n_arms: int, n_ranks: int, c: float):
        _check_arms(n_arms)
        self.c = float(c)
        self.n_arms = n_arms
        self.table = BordaTable(max(n_arms, 2), n_ranks)
        self.n = 0
        self._valid = np.ones(self.table.n_arms, dtype=np.bool_)
        self._valid[n_arms:] = False

    @property
    def counts(self):
        return self.table.totals

    def select(self) -> int:
        if self.n_arms == 1:
            return 0
        return K.ucb_argmax(self.table.borda, self.table.totals, self.n, self.c, self._valid)

    def update(self, arm: int, rank: int):
        self.table.update(arm, rank)
        self.n += 1


class OhUcb:
    """One O-UCB agent per hierarchy level, filtering arms coarse-to-fine."""

    kind = "oh-ucb"

    def __init__(self, n_arms: int, hierarchy: Hierarchy, c: float):
        _check_arms(n_arms)
        self.hierarchy = hierarchy
        self.c = float(c)
        self.n_arms = n_arms
        self.agents = [OUcb(n_arms, hierarchy.size, c) for _ in hierarchy.levels]
        self._proj = [hierarchy.projection_table(i) for i in range(hierarchy.depth)]

    @property
    def n(self):
        return self.agents[0].n

    @property
    def counts(self):
        return self.agents[0].counts

    def select(self) -> int:
        """Filter arms level by level, then play the last level's UCB choice.

        At each level the agent's UCB pick is compared with every other valid
        arm; arms it beats significantly are dropped, and so are arms whose
        samples are still too small to test against it.
        """
        counts = self.agents[0].table.totals
        fresh = np.flatnonzero(counts[: self.n_arms] == 0)
        if fresh.size:
            return int(fresh[0])
        if self.n_arms == 1:
            return 0
        n = self.n
        valid = np.zeros(self.agents[0].table.n_arms, dtype=np.bool_)
        valid[: self.n_arms] = True
        z_crit = self.hierarchy.z_critical
        best = 0
        for agent in self.agents:
            table = agent.table
            best = K.ucb_argmax(table.borda, counts, n, self.c, valid)
            nb = counts[best]
            for other in np.flatnonzero(valid):
                if other == best:
                    continue
                no = counts[other]
                if nb <= MIN_ARM_PULLS or no <= MIN_ARM_PULLS or nb + no <= MIN_PAIR_PULLS:
                    valid[other] = False
                elif table.z(best, other) >= z_crit:
                    valid[other] = False
            if valid.sum() == 1:
                return best
        return best

    def update(self, arm: int, rank: int):
        for agent, proj in zip(self.agents, self._proj):
            agent.update(arm, int(proj[rank]))


class MultiSbm:
    """One numeric UCB per arm, indexed by the previously played arm.

    The inner bandit gets 1 when the new outcome beats the previous one,
    0 when it loses and ``tie_feedback`` on a tie.
    """

    kind = "multisbm"

    def __init__(self, n_arms: int, c: float, rng: np.random.Generator,
                 tie_feedback: float = 0.0):
        _check_arms(n_arms)
        self.c = float(c)
        self.tie_feedback = float(tie_feedback)
        self.rng = rng
        self.inner = [Ucb1(n_arms, c) for _ in range(n_arms)]
        self.last_arm = None
        self.last_rank = None
        self.n = 0

    @property
    def n_arms(self):
        return len(self.inner)

    def select(self) -> int:
        if self.last_arm is None:
            return int(self.rng.integers(self.n_arms))
        return self.inner[self.last_arm].select()

    def update(self, arm: int, rank: int):
        if self.last_arm is not None:
            if rank > self.last_rank:
                fb = 1.0
            elif rank < self.last_rank:
                fb = 0.0
            else:
                fb = self.tie_feedback
            self.inner[self.last_arm].update_value(arm, fb)
        self.last_arm = arm
        self.last_rank = rank
        self.n += 1


def multisbm_step(state: MultiSbm, observe):
    """Play one round: choose an arm, observe its rank, learn from it."""
    arm = state.select()
    state.update(arm, observe(arm))
    return arm, state


def make_policy(kind: str, n_arms: int, n_ranks: int, c: float, *, values=None,
                hierarchy=None, z_critical=0.65, rng=None, tie_feedback=0.0):
    kind = kind.lower()
    if kind == "ucb1":
        return Ucb1(n_arms, c, values)
    if kind == "o-ucb":
        return OUcb(n_arms, n_ranks, c)
    if kind == "oh-ucb":
        levels = hierarchy if hierarchy is not None else [[0], list(range(n_ranks))]
        try:
            h = Hierarchy(tuple(levels), float(z_critical), n_ranks)
        except OrdinalError as exc:
            raise PolicyError(str(exc)) from exc
        return OhUcb(n_arms, h, c)
    if kind == "multisbm":
        if rng is None:
            raise PolicyError("MultiSBM needs a random stream for its first pull")
        return MultiSbm(n_arms, c, rng, tie_feedback)
    raise PolicyError(f"unknown bandit kind {kind!r}; expected one of {KINDS}")


def borda_regret(true_pmfs, arm: int) -> float:
    """Borda shortfall of ``arm`` against the Borda winner."""
    b = borda_from_pmfs(true_pmfs)
    return float(max(b.max() - b[arm], 0.0))


def regret_vector(true_pmfs) -> np.ndarray:
    b = borda_from_pmfs(true_pmfs)
    return np.maximum(b.max() - b, 0.0)
