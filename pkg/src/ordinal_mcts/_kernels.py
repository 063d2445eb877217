"""Hot loops for Borda bookkeeping and UCB-style selection.

Every kernel has a loop version compiled by numba and a vectorised numpy
version. ``_jit.pick`` chooses one at import time; both are exported with a
``_nb``/``_np`` suffix so tests and the benchmark can compare them.

Pairwise statistics are kept as integers ``w2[a, b] = 2 * #(a > b) + #(a == b)``
over all observation pairs, so ``Pr(a > b) + Pr(a == b) / 2`` is
``w2[a, b] / (2 * n_a * n_b)`` without rounding drift.
"""
import math

import numpy as np

from ._jit import optional_njit, pick


# --------------------------------------------------------------------------
# pairwise half-win count


@optional_njit
def pair_w2_nb(counts_a, cum_b, counts_b):
    s = 0
    for i in range(counts_a.shape[0]):
        below = cum_b[i - 1] if i > 0 else 0
        s += counts_a[i] * (2 * below + counts_b[i])
    return s


def pair_w2_np(counts_a, cum_b, counts_b):
    return int(2 * np.dot(counts_a[1:], cum_b[:-1]) + np.dot(counts_a, counts_b))


# --------------------------------------------------------------------------
# full recompute of the w2 matrix


@optional_njit
def w2_matrix_nb(counts, cum):
    k = counts.shape[0]
    out = np.zeros((k, k), dtype=np.int64)
    for a in range(k):
        for b in range(k):
            if a != b:
                out[a, b] = pair_w2_nb(counts[a], cum[b], counts[b])
    return out


def w2_matrix_np(counts, cum):
    below = np.zeros_like(cum)
    below[:, 1:] = cum[:, :-1]
    out = 2 * counts @ below.T + counts @ counts.T
    np.fill_diagonal(out, 0)
    return out


# --------------------------------------------------------------------------
# add one observation to an arm, keeping counts, cumulative and w2 in sync


@optional_njit
def table_add_nb(counts, cum, w2, arm, rank):
    k, s = counts.shape
    for b in range(k):
        if b == arm:
            continue
        below = cum[b, rank - 1] if rank > 0 else 0
        equal = counts[b, rank]
        above = cum[b, s - 1] - cum[b, rank]
        w2[arm, b] += 2 * below + equal
        w2[b, arm] += 2 * above + equal
    counts[arm, rank] += 1
    for j in range(rank, s):
        cum[arm, j] += 1


def table_add_np(counts, cum, w2, arm, rank):
    below = cum[:, rank - 1] if rank > 0 else np.zeros(cum.shape[0], dtype=np.int64)
    equal = counts[:, rank]
    above = cum[:, -1] - cum[:, rank]
    row = 2 * below + equal
    col = 2 * above + equal
    row[arm] = 0
    col[arm] = 0
    w2[arm, :] += row
    w2[:, arm] += col
    counts[arm, rank] += 1
    cum[arm, rank:] += 1


# --------------------------------------------------------------------------
# probabilities and Borda scores from w2


@optional_njit
def _borda_rows_nb(beat, borda):
    k = beat.shape[0]
    for a in range(k):
        s = 0.0
        for b in range(k):
            if b != a:
                s += beat[a, b]
        borda[a] = s / (k - 1)


@optional_njit
def refresh_arm_nb(w2, cum, beat, borda, arm):
    k, s = cum.shape
    na = cum[arm, s - 1]
    for b in range(k):
        if b == arm:
            continue
        nb = cum[b, s - 1]
        if na > 0 and nb > 0:
            d = float(2 * na * nb)
            beat[arm, b] = w2[arm, b] / d
            beat[b, arm] = w2[b, arm] / d
        else:
            beat[arm, b] = np.nan
            beat[b, arm] = np.nan
    _borda_rows_nb(beat, borda)


@optional_njit
def refresh_all_nb(w2, cum, beat, borda):
    k, s = cum.shape
    for a in range(k):
        na = cum[a, s - 1]
        for b in range(k):
            if a == b:
                beat[a, b] = 0.0
                continue
            nb = cum[b, s - 1]
            if na > 0 and nb > 0:
                beat[a, b] = w2[a, b] / float(2 * na * nb)
            else:
                beat[a, b] = np.nan
    _borda_rows_nb(beat, borda)


def _borda_rows_np(beat, borda):
    # diagonal holds 0.0, so a plain row sum skips self-comparison
    borda[:] = beat.sum(axis=1) / (beat.shape[0] - 1)


def refresh_arm_np(w2, cum, beat, borda, arm):
    tot = cum[:, -1]
    na = tot[arm]
    d = (2 * na * tot).astype(np.float64)
    ok = (tot > 0) & (na > 0)
    with np.errstate(divide="ignore", invalid="ignore"):
        row = np.where(ok, w2[arm, :] / d, np.nan)
        col = np.where(ok, w2[:, arm] / d, np.nan)
    row[arm] = 0.0
    col[arm] = 0.0
    beat[arm, :] = row
    beat[:, arm] = col
    _borda_rows_np(beat, borda)


def refresh_all_np(w2, cum, beat, borda):
    tot = cum[:, -1]
    d = (2 * np.outer(tot, tot)).astype(np.float64)
    with np.errstate(divide="ignore", invalid="ignore"):
        beat[:] = np.where(d > 0, w2 / d, np.nan)
    np.fill_diagonal(beat, 0.0)
    _borda_rows_np(beat, borda)


# --------------------------------------------------------------------------
# UCB-style argmax with first-visit rule: exploit + mult * sqrt(2 ln n / n_a)


@optional_njit
def ucb_argmax_nb(exploit, counts, n_total, mult, valid):
    k = exploit.shape[0]
    for a in range(k):
        if valid[a] and counts[a] == 0:
            return a
    best = -1
    best_score = -np.inf
    log_n = math.log(n_total) if n_total > 0 else 0.0
    for a in range(k):
        if not valid[a]:
            continue
        score = exploit[a] + mult * math.sqrt(2.0 * log_n / counts[a])
        if best < 0 or score > best_score:
            best = a
            best_score = score
    return best


def ucb_argmax_np(exploit, counts, n_total, mult, valid):
    fresh = np.flatnonzero(valid & (counts == 0))
    if fresh.size:
        return int(fresh[0])
    log_n = math.log(n_total) if n_total > 0 else 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        score = exploit + mult * np.sqrt(2.0 * log_n / counts)
    score = np.where(valid, score, -np.inf)
    return int(np.argmax(score))


pair_w2 = pick(pair_w2_nb, pair_w2_np)
w2_matrix = pick(w2_matrix_nb, w2_matrix_np)
table_add = pick(table_add_nb, table_add_np)
refresh_arm = pick(refresh_arm_nb, refresh_arm_np)
refresh_all = pick(refresh_all_nb, refresh_all_np)
ucb_argmax = pick(ucb_argmax_nb, ucb_argmax_np)
