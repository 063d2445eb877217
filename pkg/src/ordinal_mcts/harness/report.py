"""Summaries, per-problem ranks, learning curves and Borda audits from run records."""
from __future__ import annotations

import numpy as np
import pandas as pd

from ..ordinal import BordaTable
from .config import ConfigError
from .runner import FIELDS

CONFIG_KEYS = ["experiment", "environment", "algorithm", "c", "rl", "q", "z_critical",
               "hierarchy", "budget"]
PROBLEM_KEYS = ["environment", "budget"]
NUMERIC = ["run_id", "seed", "c", "rl", "q", "z_critical", "budget", "step", "action", "rank",
           "reward", "score", "deaths", "mean_value", "budget_used"]


def parse_filters(items) -> dict:
    out = {}
    for item in items or ():
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--filter expects key=value, got {item!r}")
        if key not in FIELDS:
            raise ConfigError(f"--filter: unknown column {key!r}")
        out.setdefault(key, []).append(value)
    return out


def _same_number(text: str, wanted: str) -> bool:
    try:
        return float(text) == float(wanted)
    except ValueError:
        return text == wanted


def load_records(path, filters: dict | None = None) -> pd.DataFrame:
    """Read a records CSV, keep rows matching every filter, then type the columns.

    Filters compare as numbers when both sides parse, so ``c=0.4`` matches ``0.40``.
    """
    df = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    missing = [f for f in FIELDS if f not in df.columns]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    for key, values in (filters or {}).items():
        col = df[key]
        mask = np.zeros(len(df), dtype=bool)
        for v in values:
            mask |= col.map(lambda t, v=v: _same_number(t, v)).to_numpy(dtype=bool)
        df = df[mask]
    df = df.copy()
    for col in NUMERIC:
        df[col] = pd.to_numeric(df[col].mask(df[col] == ""))
    return df.reset_index(drop=True)


def final_rows(df: pd.DataFrame) -> pd.DataFrame:
    """Last record of every run."""
    return df.sort_values(["run_id", "step"], kind="stable").groupby("run_id").tail(1)


def _is_mdp(df: pd.DataFrame) -> pd.Series:
    return df["status"] != ""


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """One row per configuration with its mean outcome over runs."""
    if df.empty:
        raise ValueError("no records to summarize")
    fin = final_rows(df).copy()
    fin["won"] = (fin["status"] == "won").astype(float)
    fin["is_mdp"] = _is_mdp(fin)
    g = fin.groupby(CONFIG_KEYS, dropna=False, sort=True)
    out = g.agg(runs=("run_id", "nunique"), mean_value=("mean_value", "mean"),
                mean_deaths=("deaths", "mean"), win_rate=("won", "mean"),
                mean_score=("score", "mean"), is_mdp=("is_mdp", "first")).reset_index()
    out.loc[~out["is_mdp"], ["win_rate", "mean_score"]] = np.nan
    return out


def _lex_rank(frame: pd.DataFrame, cols, ascending) -> pd.Series:
    """Average ranks (1 = best) under a lexicographic order; exact ties share a rank."""
    keys = list(zip(*(frame[c] if asc else -frame[c] for c, asc in zip(cols, ascending))))
    order = sorted(set(keys))
    pos = {k: i for i, k in enumerate(order)}
    firsts = np.zeros(len(order))
    sizes = np.zeros(len(order))
    for k in keys:
        sizes[pos[k]] += 1
    firsts[1:] = np.cumsum(sizes)[:-1]
    avg = firsts + (sizes + 1) / 2
    return pd.Series([avg[pos[k]] for k in keys], index=frame.index)


def _criteria(is_mdp: bool):
    if is_mdp:
        return ["win_rate", "mean_score"], [False, False]
    return ["mean_deaths", "mean_value"], [True, False]


def rank_configs(summary: pd.DataFrame) -> pd.DataFrame:
    """Rank configurations within each problem and flag the best per algorithm."""
    parts = []
    for _, grp in summary.groupby(PROBLEM_KEYS, sort=True):
        grp = grp.copy()
        cols, asc = _criteria(bool(grp["is_mdp"].iloc[0]))
        grp["rank"] = _lex_rank(grp, cols, asc)
        # first minimum in canonical order wins ties
        best_idx = grp.groupby("algorithm", sort=False)["rank"].idxmin()
        grp["best"] = grp.index.isin(best_idx.values)
        parts.append(grp)
    return pd.concat(parts).sort_index()


def rank_algorithms(ranked: pd.DataFrame) -> pd.DataFrame:
    """Rank each algorithm's best configuration per problem; average across problems."""
    best = ranked[ranked["best"]].copy()
    rows = []
    for problem, grp in best.groupby(PROBLEM_KEYS, sort=True):
        cols, asc = _criteria(bool(grp["is_mdp"].iloc[0]))
        r = _lex_rank(grp, cols, asc)
        for (_, row), rk in zip(grp.iterrows(), r):
            rows.append({"environment": problem[0], "budget": problem[1],
                         "algorithm": row["algorithm"], "algorithm_rank": rk})
    per = pd.DataFrame(rows)
    avg = per.groupby("algorithm", sort=True)["algorithm_rank"].mean().rename("average_rank")
    return per.merge(avg, on="algorithm").sort_values(PROBLEM_KEYS + ["algorithm_rank", "algorithm"])


def report(df: pd.DataFrame) -> tuple[pd.DataFrame, pd.DataFrame]:
    ranked = rank_configs(summarize(df))
    return ranked.drop(columns=["is_mdp"]), rank_algorithms(ranked)


def curves(df: pd.DataFrame) -> pd.DataFrame:
    """Mean cumulative deaths and mean value per step, averaged over runs.

    A step-0 row with zero deaths anchors each curve at the origin.
    """
    if df.empty:
        raise ValueError("no records to plot")
    g = df.groupby(CONFIG_KEYS + ["step"], dropna=False, sort=True)
    out = g.agg(runs=("run_id", "nunique"), mean_deaths=("deaths", "mean"),
                mean_value=("mean_value", "mean")).reset_index()
    origin = out.drop_duplicates(CONFIG_KEYS).copy()
    origin["step"] = 0
    origin["mean_deaths"] = 0.0
    origin["mean_value"] = np.nan
    out = pd.concat([origin, out], ignore_index=True)
    return out.sort_values(CONFIG_KEYS + ["step"], kind="stable").reset_index(drop=True)


def brute_force_borda(samples: dict) -> dict:
    """Borda scores straight from raw observation lists, all pairs compared."""
    arms = sorted(samples)
    obs = {a: np.asarray(samples[a]) for a in arms}
    out = {}
    for a in arms:
        total = 0.0
        for b in arms:
            if b == a:
                continue
            diff = np.sign(obs[a][:, None] - obs[b][None, :])
            total += ((diff > 0).sum() + 0.5 * (diff == 0).sum()) / diff.size
        out[a] = total / (len(arms) - 1)
    return out


def oracle(df: pd.DataFrame, tol: float = 1e-12) -> tuple[pd.DataFrame, bool]:
    """Rebuild the Borda table from (action, rank) rows and check it against brute force."""
    if df.empty:
        raise ValueError("no records to audit")
    arms = sorted(int(a) for a in df["action"].unique())
    if len(arms) < 2:
        raise ValueError("auditing Borda scores needs at least two played actions")
    n_ranks = int(df["rank"].max()) + 1
    counts = np.zeros((len(arms), n_ranks), dtype=np.int64)
    idx = {a: i for i, a in enumerate(arms)}
    samples = {a: [] for a in arms}
    for a, r in zip(df["action"].astype(int), df["rank"].astype(int)):
        counts[idx[a], r] += 1
        samples[a].append(r)
    table = BordaTable.from_counts(counts)
    slow = brute_force_borda(samples)
    out = pd.DataFrame({
        "action": arms,
        "pulls": counts.sum(axis=1),
        "borda": table.borda,
        "borda_bruteforce": [slow[a] for a in arms],
    })
    out["abs_diff"] = (out["borda"] - out["borda_bruteforce"]).abs()
    return out, bool((out["abs_diff"] <= tol).all())


def write_csv(frame: pd.DataFrame, path):
    frame.to_csv(path, index=False, encoding="utf-8", sep=",", decimal=".", lineterminator="\n")
