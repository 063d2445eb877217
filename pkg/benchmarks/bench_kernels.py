"""Compare numba and numpy kernels, then time an end-to-end bandit run per backend.

    python benchmarks/bench_kernels.py [--repeat N]

Kernel timings call the ``_nb`` and ``_np`` functions side by side. The
end-to-end timing runs O-UCB on the medicine bandit twice in subprocesses,
once normally and once with ``ORDINAL_MCTS_NO_NUMBA=1``.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from ordinal_mcts import _kernels as k

END_TO_END = """
import time
from ordinal_mcts.harness.config import parse_config
from ordinal_mcts.harness.runner import run_bandit
from ordinal_mcts._jit import NUMBA_ENABLED
cfg = parse_config({"experiment": "bench", "environment": {"id": "medicine"},
                    "algorithms": [{"kind": "o-ucb", "c": 0.4}],
                    "budget": 500, "repetitions": 3, "seed": 1})
run_bandit(cfg, final_only=True)  # warm-up, includes compilation
cfg = parse_config({"experiment": "bench", "environment": {"id": "medicine"},
                    "algorithms": [{"kind": "o-ucb", "c": 0.4}],
                    "budget": 500, "repetitions": 50, "seed": 1})
t = time.perf_counter()
run_bandit(cfg, final_only=True)
print(NUMBA_ENABLED, time.perf_counter() - t)
"""


def table(n_arms, n_ranks, pulls, seed=0):
    rng = np.random.default_rng(seed)
    counts = np.zeros((n_arms, n_ranks), dtype=np.int64)
    cum = np.zeros_like(counts)
    w2 = np.zeros((n_arms, n_arms), dtype=np.int64)
    for _ in range(pulls):
        k.table_add_np(counts, cum, w2, int(rng.integers(n_arms)), int(rng.integers(n_ranks)))
    return counts, cum, w2


def per_call(fn, repeat):
    fn()  # compile / warm caches
    return min(timeit.repeat(fn, number=200, repeat=repeat)) / 200 * 1e6


def kernel_rows(repeat):
    rows = []
    for n_arms in (4, 16, 64):
        counts, cum, w2 = table(n_arms, 10, 50 * n_arms)
        beat = np.zeros((n_arms, n_arms))
        borda = np.zeros(n_arms)
        exploit = np.random.default_rng(1).random(n_arms)
        pulls = counts.sum(axis=1).astype(np.float64)
        valid = np.ones(n_arms, dtype=np.bool_)
        cases = {
            "table_add": lambda f: f(counts.copy(), cum.copy(), w2.copy(), 1, 3),
            "refresh_arm": lambda f: f(w2, cum, beat, borda, 1),
            "refresh_all": lambda f: f(w2, cum, beat, borda),
            "w2_matrix": lambda f: f(counts, cum),
            "ucb_argmax": lambda f: f(exploit, pulls, float(pulls.sum()), 0.4, valid),
        }
        for name, call in cases.items():
            nb = getattr(k, f"{name}_nb")
            np_ = getattr(k, f"{name}_np")
            t_nb = per_call(lambda: call(nb), repeat)
            t_np = per_call(lambda: call(np_), repeat)
            rows.append((name, n_arms, t_nb, t_np))
    return rows


def end_to_end(no_numba):
    env = dict(os.environ, ORDINAL_MCTS_NO_NUMBA="1" if no_numba else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, check=True,
                         capture_output=True, text=True).stdout.split()
    return out[0] == "True", float(out[1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    print(f"{'kernel':<12} {'arms':>4} {'numba us':>10} {'numpy us':>10} {'speedup':>8}")
    for name, n_arms, t_nb, t_np in kernel_rows(args.repeat):
        print(f"{name:<12} {n_arms:>4} {t_nb:>10.2f} {t_np:>10.2f} {t_np / t_nb:>8.1f}")

    print()
    print("O-UCB, medicine bandit, 50 runs x 500 pulls")
    for no_numba in (False, True):
        enabled, seconds = end_to_end(no_numba)
        print(f"  backend {'numba' if enabled else 'numpy':<6} {seconds:7.2f} s")


if __name__ == "__main__":
    main()
