"""Ordinal outcome scales, empirical distributions and Borda statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels as K


class OrdinalError(ValueError):
    pass


@dataclass(frozen=True)
class OrdinalScale:
    """Totally ordered outcome labels; index 0 is the worst outcome."""

    labels: tuple[str, ...]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        labels = tuple(self.labels)
        if not labels:
            raise OrdinalError("an ordinal scale needs at least one label")
        if len(set(labels)) != len(labels):
            raise OrdinalError(f"duplicate labels in scale: {labels}")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "_index", {lab: i for i, lab in enumerate(labels)})

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def rank(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise OrdinalError(f"label {label!r} not in scale") from None

    def __contains__(self, label) -> bool:
        return label in self._index


def scale_new(labels: Iterable[str]) -> OrdinalScale:
    return OrdinalScale(tuple(labels))


class EmpiricalDistribution:
    """Counts per rank plus running cumulative counts.

    ``counts`` and ``cumulative`` may be views into a larger table, which is
    how :class:`BordaTable` exposes its per-arm rows.
    """

    __slots__ = ("counts", "cumulative")

    def __init__(self, size: int | None = None, *, counts=None, cumulative=None):
        if counts is None:
            if size is None or size < 1:
                raise OrdinalError("distribution size must be >= 1")
            counts = np.zeros(size, dtype=np.int64)
            cumulative = np.zeros(size, dtype=np.int64)
        elif cumulative is None:
            counts = np.asarray(counts, dtype=np.int64).copy()
            if counts.ndim != 1 or counts.size == 0 or (counts < 0).any():
                raise OrdinalError("counts must be a nonempty 1-d array of tallies >= 0")
            cumulative = np.cumsum(counts)
        self.counts = counts
        self.cumulative = cumulative

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "EmpiricalDistribution":
        return cls(counts=counts)

    @property
    def size(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.cumulative[-1])

    def update(self, rank: int) -> "EmpiricalDistribution":
        if not 0 <= rank < self.size:
            raise OrdinalError(f"rank {rank} outside 0..{self.size - 1}")
        self.counts[rank] += 1
        self.cumulative[rank:] += 1
        return self

    def pmf(self) -> np.ndarray:
        """Empirical density; undefined (error) while empty."""
        self._require_nonempty()
        return self.counts / self.total

    def cdf(self) -> np.ndarray:
        self._require_nonempty()
        return self.cumulative / self.total

    def _require_nonempty(self):
        if self.total == 0:
            raise OrdinalError("empty distribution has no empirical estimate")

    def __repr__(self):
        return f"EmpiricalDistribution(counts={self.counts.tolist()})"


def dist_update(dist: EmpiricalDistribution, rank: int) -> EmpiricalDistribution:
    return dist.update(rank)


def _check_pair(a: EmpiricalDistribution, b: EmpiricalDistribution):
    if a.size != b.size:
        raise OrdinalError("distributions live on different scales")
    if a.total == 0 or b.total == 0:
        raise OrdinalError("cannot compare an empty distribution")


def prob_beats(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Estimated Pr(X_a > X_b) + Pr(X_a == X_b) / 2."""
    _check_pair(a, b)
    w2 = K.pair_w2(a.counts, b.cumulative, b.counts)
    return w2 / float(2 * a.total * b.total)


def mann_whitney_z(a: EmpiricalDistribution, b: EmpiricalDistribution) -> float:
    """Normal approximation of the Mann-Whitney U statistic of ``a`` vs ``b``.

    Positive values mean ``a`` tends to produce better outcomes.
    """
    _check_pair(a, b)
    n, m = a.total, b.total
    u = K.pair_w2(a.counts, b.cumulative, b.counts) / 2.0
    return (u - n * m / 2.0) / math.sqrt(n * m * (n + m + 1) / 12.0)


def hierarchy_project(level, rank: int, size: int) -> int:
    """Map ``rank`` to the smallest selected rank >= it, else the top rank."""
    if len(level) == 0:
        raise OrdinalError("hierarchy level selects no outcome")
    if not 0 <= rank < size:
        raise OrdinalError(f"rank {rank} outside 0..{size - 1}")
    above = [r for r in level if r >= rank]
    return min(above) if above else size - 1


@dataclass(frozen=True)
class Hierarchy:
    levels: tuple[frozenset, ...]
    z_critical: float
    size: int

    def __post_init__(self):
        if not self.levels:
            raise OrdinalError("a hierarchy needs at least one level")
        if not self.z_critical > 0:
            raise OrdinalError("z_critical must be positive")
        levels = tuple(frozenset(int(r) for r in lvl) for lvl in self.levels)
        for lvl in levels:
            if not lvl:
                raise OrdinalError("hierarchy levels must be nonempty")
            if min(lvl) < 0 or max(lvl) >= self.size:
                raise OrdinalError(f"level {sorted(lvl)} has ranks outside the scale")
        object.__setattr__(self, "levels", levels)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def projection_table(self, i: int) -> np.ndarray:
        """Lookup array: rank -> projected rank under level ``i``."""
        lvl = sorted(self.levels[i])
        return np.array([hierarchy_project(lvl, r, self.size) for r in range(self.size)],
                        dtype=np.int64)


class BordaTable:
    """Per-arm distributions with pairwise beat probabilities and Borda scores.

    ``beat[a, b]`` is NaN while either arm is unobserved and the diagonal is
    held at 0. ``borda[a]`` is NaN until every arm has been observed.
    """

    def __init__(self, n_arms: int, n_ranks: int):
        if n_arms < 2:
            raise OrdinalError("a Borda table needs at least two arms")
        if n_ranks < 1:
            raise OrdinalError("scale size must be >= 1")
        self.counts = np.zeros((n_arms, n_ranks), dtype=np.int64)
        self.cum = np.zeros((n_arms, n_ranks), dtype=np.int64)
        self.w2 = np.zeros((n_arms, n_arms), dtype=np.int64)
        self.beat = np.full((n_arms, n_arms), np.nan)
        np.fill_diagonal(self.beat, 0.0)
        self.borda = np.full(n_arms, np.nan)

    @classmethod
    def from_counts(cls, counts) -> "BordaTable":
        counts = np.asarray(counts, dtype=np.int64)
        table = cls(counts.shape[0], counts.shape[1])
        table.counts[:] = counts
        table.cum[:] = np.cumsum(counts, axis=1)
        return table.recompute()

    @property
    def n_arms(self) -> int:
        return self.counts.shape[0]

    @property
    def n_ranks(self) -> int:
        return self.counts.shape[1]

    @property
    def totals(self) -> np.ndarray:
        return self.cum[:, -1]

    def dist(self, arm: int) -> EmpiricalDistribution:
        return EmpiricalDistribution(counts=self.counts[arm], cumulative=self.cum[arm])

    @property
    def dists(self) -> list[EmpiricalDistribution]:
        return [self.dist(a) for a in range(self.n_arms)]

    def recompute(self) -> "BordaTable":
        """Rebuild beat and Borda from scratch; every arm must be observed."""
        if (self.totals == 0).any():
            raise OrdinalError("Borda recompute needs every arm observed")
        self.w2[:] = K.w2_matrix(self.counts, self.cum)
        K.refresh_all(self.w2, self.cum, self.beat, self.borda)
        return self

    def update(self, arm: int, rank: int) -> "BordaTable":
        """Record one outcome for ``arm`` and refresh the affected entries."""
        if not 0 <= rank < self.n_ranks:
            raise OrdinalError(f"rank {rank} outside 0..{self.n_ranks - 1}")
        if not 0 <= arm < self.n_arms:
            raise OrdinalError(f"arm {arm} outside 0..{self.n_arms - 1}")
        K.table_add(self.counts, self.cum, self.w2, arm, rank)
        K.refresh_arm(self.w2, self.cum, self.beat, self.borda, arm)
        return self

    def z(self, a: int, b: int) -> float:
        n, m = int(self.cum[a, -1]), int(self.cum[b, -1])
        u = self.w2[a, b] / 2.0
        return (u - n * m / 2.0) / math.sqrt(n * m * (n + m + 1) / 12.0)

    def copy(self) -> "BordaTable":
        new = BordaTable.__new__(BordaTable)
        for name in ("counts", "cum", "w2", "beat", "borda"):
            setattr(new, name, getattr(self, name).copy())
        return new


def borda_recompute(table: BordaTable) -> BordaTable:
    return table.recompute()


def borda_update_incremental(table: BordaTable, arm: int, rank: int) -> BordaTable:
    return table.update(arm, rank)


def pairwise_from_pmfs(pmfs) -> np.ndarray:
    """Exact Pr(a > b) + Pr(a == b)/2 from known outcome probabilities."""
    p = np.asarray(pmfs, dtype=np.float64)
    below = np.zeros_like(p)
    below[:, 1:] = np.cumsum(p, axis=1)[:, :-1]
    out = p @ (below + 0.5 * p).T
    np.fill_diagonal(out, 0.0)
    return out


def borda_from_pmfs(pmfs) -> np.ndarray:
    pw = pairwise_from_pmfs(pmfs)
    return pw.sum(axis=1) / (pw.shape[0] - 1)
