import csv
import json
import subprocess
import sys
from collections import defaultdict

import numpy as np
import pandas as pd
import pytest

from ordinal_mcts.cli import main
from ordinal_mcts.harness.config import ConfigError, grid_size, load_config, parse_config
from ordinal_mcts.harness.report import (curves, load_records, oracle, parse_filters,
                                         rank_algorithms, rank_configs, report, summarize)
from ordinal_mcts.harness.runner import (FIELDS, cells, derive_seed, records_to_csv, run_bandit,
                                         run_experiment, run_mcts, write_records)

C_GRID = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0]


def bandit_doc(**over):
    doc = {
        "experiment": "t",
        "environment": {"id": "medicine"},
        "algorithms": [{"kind": "o-ucb", "c": [0.2, 0.4]}, {"kind": "ucb1", "c": 0.4}],
        "budget": 50,
        "repetitions": 2,
        "seed": 3,
    }
    doc.update(over)
    return doc


def mcts_doc(**over):
    doc = {
        "experiment": "m",
        "environment": {"id": "chain", "params": {"depth": 2}},
        "algorithms": [{"kind": "mcts", "c": 0.7, "rl": 5}, {"kind": "o-mcts", "c": 0.7, "rl": 5},
                       {"kind": "mixmax", "c": 0.7, "rl": 5, "q": 0.25}],
        "budget": 40,
        "repetitions": 2,
        "seed": 5,
    }
    doc.update(over)
    return doc


# --- configuration ----------------------------------------------------------

@pytest.mark.parametrize("mutate, key", [
    (lambda d: d.update(colour="red"), "colour"),
    (lambda d: d["environment"].update(extra=1), "extra"),
    (lambda d: d["environment"].update(params={"p": 0.3}), "p"),
    (lambda d: d["algorithms"][0].update(rl=5), "rl"),
    (lambda d: d["algorithms"][0].update(kind="mcts"), "kind"),
    (lambda d: d["algorithms"][0].pop("c"), "c"),
    (lambda d: d.update(repetitions=0), "repetitions"),
    (lambda d: d.update(budget=-1), "budget"),
    (lambda d: d.update(seed="x"), "seed"),
    (lambda d: d.pop("seed"), "seed"),
    (lambda d: d["environment"].update(id="pong"), "environment.id"),
    (lambda d: d["algorithms"].append({"kind": "oh-ucb", "c": 0.2, "z_critical": 0}),
     "z_critical"),
    (lambda d: d["algorithms"].append({"kind": "oh-ucb", "c": 0.2, "hierarchy": [["zombie"]]}),
     "zombie"),
])
def test_config_errors_name_the_key(mutate, key):
    doc = bandit_doc()
    mutate(doc)
    with pytest.raises(ConfigError, match=key):
        parse_config(doc)


def test_mcts_config_rules():
    with pytest.raises(ConfigError, match="rl"):
        parse_config(mcts_doc(algorithms=[{"kind": "mcts", "c": 1.0}]))
    with pytest.raises(ConfigError, match="q"):
        parse_config(mcts_doc(algorithms=[{"kind": "mcts", "c": 1.0, "rl": 3, "q": 0.5}]))
    cfg = parse_config(mcts_doc(algorithms=[{"kind": "mixmax", "c": [0.5, 1.0], "rl": [3, 6]}]))
    assert grid_size(cfg) == 4
    assert cfg.algorithms[0].q == (0.25,)


def test_hierarchy_labels_and_defaults():
    cfg = parse_config(bandit_doc(algorithms=[
        {"kind": "oh-ucb", "c": 0.2, "hierarchy": [["dead"], "full"]},
        {"kind": "oh-ucb", "c": 0.2}]))
    assert cfg.algorithms[0].hierarchy == (("dead",), "full")
    assert cfg.algorithms[1].hierarchy == ((0,), "full")
    assert cfg.algorithms[1].z_critical == (0.65,)


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(bad)


# --- seeding and runs -------------------------------------------------------

def test_derived_seeds_distinct_and_stable():
    seeds = [derive_seed(42, i) for i in range(1000)]
    assert len(set(seeds)) == 1000
    assert seeds == [derive_seed(42, i) for i in range(1000)]
    assert all(0 <= s < 2 ** 64 for s in seeds)
    assert derive_seed(43, 0) != seeds[0]


def test_bandit_run_is_byte_identical():
    cfg = parse_config(bandit_doc())
    assert records_to_csv(run_bandit(cfg)) == records_to_csv(run_bandit(cfg))


def test_threads_keep_canonical_order():
    cfg = parse_config(bandit_doc(repetitions=3))
    assert records_to_csv(run_experiment(cfg, threads=2)) == records_to_csv(run_experiment(cfg))


def test_seed_changes_output():
    a = run_bandit(parse_config(bandit_doc(seed=1)))
    b = run_bandit(parse_config(bandit_doc(seed=2)))
    assert [r.action for r in a] != [r.action for r in b]


def test_full_grid_record_count():
    doc = bandit_doc(algorithms=[{"kind": k, "c": C_GRID}
                                 for k in ("ucb1", "o-ucb", "oh-ucb", "multisbm")],
                     budget=500, repetitions=20)
    cfg = parse_config(doc)
    assert len(cells(cfg)) == 880
    records = run_bandit(cfg)
    assert len(records) == 440_000
    assert [r.step for r in records[:500]] == list(range(1, 501))


def test_bandit_records_are_consistent():
    records = run_bandit(parse_config(bandit_doc()))
    by_run = defaultdict(list)
    for r in records:
        by_run[r.run_id].append(r)
    for rows in by_run.values():
        deaths = np.cumsum([r.rank == 0 for r in rows])
        assert [r.deaths for r in rows] == deaths.tolist()
        assert rows[-1].mean_value == pytest.approx(np.mean([r.reward for r in rows]))
        assert [r.budget_used for r in rows] == [r.step for r in rows]


def test_mcts_run_on_platformer_forty_episodes():
    doc = mcts_doc(environment={"id": "platformer"}, budget=250, repetitions=40,
                   algorithms=[{"kind": "o-mcts", "c": 0.7, "rl": 10}])
    records = run_mcts(parse_config(doc))
    finals = {}
    for r in records:
        finals[r.run_id] = r
        assert r.budget_used == 250
    assert len(finals) == 40
    assert all(r.status in ("won", "lost", "playing") for r in finals.values())


def test_large_budget_plays_chain_optimally():
    records = run_mcts(parse_config(mcts_doc(budget=2000)))
    assert all(r.action == 0 for r in records)
    assert {r.status for r in records if r.step == 2} == {"won"}


def test_wrong_runner_for_environment():
    with pytest.raises(ConfigError):
        run_mcts(parse_config(bandit_doc()))
    with pytest.raises(ConfigError):
        run_bandit(parse_config(mcts_doc()))


# --- reporting --------------------------------------------------------------

@pytest.fixture
def bandit_csv(tmp_path):
    path = write_records(run_bandit(parse_config(bandit_doc(repetitions=4))),
                         tmp_path / "records.csv")
    return path


def test_csv_format(bandit_csv):
    raw = bandit_csv.read_bytes()
    raw.decode("utf-8")
    header = raw.split(b"\n", 1)[0].decode()
    assert header == ",".join(FIELDS)
    assert b";" not in raw


def test_summary_matches_streaming_aggregate(bandit_csv):
    finals = {}
    with open(bandit_csv, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            finals[row["run_id"]] = row
    sums = defaultdict(lambda: [0, 0.0, 0.0])
    for row in finals.values():
        acc = sums[(row["algorithm"], float(row["c"]))]
        acc[0] += 1
        acc[1] += float(row["mean_value"])
        acc[2] += int(row["deaths"])
    summary = summarize(load_records(bandit_csv))
    assert len(summary) == len(sums)
    for _, row in summary.iterrows():
        n, value, deaths = sums[(row["algorithm"], row["c"])]
        assert row["runs"] == n
        assert abs(row["mean_value"] - value / n) <= 1e-9
        assert abs(row["mean_deaths"] - deaths / n) <= 1e-9


def test_single_run_summary_equals_raw(tmp_path):
    records = run_bandit(parse_config(bandit_doc(repetitions=1,
                                                 algorithms=[{"kind": "o-ucb", "c": 0.4}])))
    path = write_records(records, tmp_path / "r.csv")
    row = summarize(load_records(path)).iloc[0]
    assert row["mean_value"] == records[-1].mean_value
    assert row["mean_deaths"] == records[-1].deaths


def test_rank_aggregation_known_order():
    summary = pd.DataFrame({
        "experiment": "x", "environment": ["e1"] * 3 + ["e2"] * 3, "budget": 10,
        "algorithm": ["a", "b", "c"] * 2, "c": 0.1, "rl": np.nan, "q": np.nan,
        "z_critical": np.nan, "hierarchy": "", "runs": 1,
        "mean_deaths": [1, 5, 9, 0, 2, 2], "mean_value": [0.5, 0.9, 0.9, 0.1, 0.8, 0.2],
        "win_rate": np.nan, "mean_score": np.nan, "is_mdp": False})
    ranked = rank_configs(summary)
    assert ranked["rank"].tolist() == [1, 2, 3, 1, 2, 3]
    algos = rank_algorithms(ranked)
    avg = algos.drop_duplicates("algorithm").set_index("algorithm")["average_rank"]
    assert avg.to_dict() == {"a": 1.0, "b": 2.0, "c": 3.0}


def test_mdp_ranking_uses_win_rate(tmp_path):
    path = write_records(run_mcts(parse_config(mcts_doc())), tmp_path / "m.csv")
    ranked, _ = report(load_records(path))
    assert set(ranked["win_rate"]) <= {0.0, 0.5, 1.0}
    assert ranked["mean_deaths"].notna().all()


def test_curves_start_at_origin(bandit_csv):
    frame = curves(load_records(bandit_csv))
    first = frame.groupby(["algorithm", "c"]).head(1)
    assert (first["step"] == 0).all() and (first["mean_deaths"] == 0).all()
    assert frame.groupby(["algorithm", "c"]).size().eq(51).all()


def test_filters(bandit_csv):
    df = load_records(bandit_csv, parse_filters(["algorithm=o-ucb", "c=0.40"]))
    assert set(df["algorithm"]) == {"o-ucb"} and set(df["c"]) == {0.4}
    with pytest.raises(ConfigError):
        parse_filters(["nonsense"])
    with pytest.raises(ConfigError):
        parse_filters(["colour=red"])


def test_oracle_matches(bandit_csv):
    frame, ok = oracle(load_records(bandit_csv))
    assert ok and frame["abs_diff"].max() <= 1e-12


# --- command line -----------------------------------------------------------

def write_config(tmp_path, doc):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(doc))
    return path


def test_cli_round_trip(tmp_path, capsys):
    cfg = write_config(tmp_path, bandit_doc())
    out = tmp_path / "out"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    assert (out / "records.csv").exists() and (out / "summary.csv").exists()
    assert main(["report", "--out", str(out)]) == 0
    assert main(["curves", "--out", str(out), "--filter", "algorithm=ucb1"]) == 0
    assert (out / "curves.csv").exists()
    capsys.readouterr()
    assert main(["oracle", "--out", str(out), "--filter", "run_id=0"]) == 0
    assert "match" in capsys.readouterr().out


def test_cli_seed_override_and_threads(tmp_path):
    cfg = write_config(tmp_path, bandit_doc())
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "a"), "--seed", "9"])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "b"), "--seed", "9",
          "--threads", "2"])
    main(["run", "--config", str(cfg), "--out", str(tmp_path / "c")])
    a = (tmp_path / "a" / "records.csv").read_bytes()
    assert a == (tmp_path / "b" / "records.csv").read_bytes()
    assert a != (tmp_path / "c" / "records.csv").read_bytes()


def test_cli_exit_codes(tmp_path):
    bad = write_config(tmp_path, bandit_doc(flavour=1))
    assert main(["run", "--config", str(bad)]) == 2
    assert main(["report", "--out", str(tmp_path / "nowhere")]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["run", "--config", str(write_config(tmp_path, bandit_doc())),
                 "--threads", "0"]) == 2
    broken = tmp_path / "broken"
    broken.mkdir()
    (broken / "records.csv").write_text("run_id,step\n1,2\n")
    assert main(["report", "--out", str(broken)]) == 3


def test_cli_oracle_mismatch_exits_3(tmp_path, monkeypatch):
    import ordinal_mcts.harness.report as rep
    cfg = write_config(tmp_path, bandit_doc())
    main(["run", "--config", str(cfg), "--out", str(tmp_path)])
    monkeypatch.setattr(rep, "brute_force_borda", lambda s: {a: -1.0 for a in s})
    assert main(["oracle", "--out", str(tmp_path)]) == 3


def test_console_entry_point(tmp_path):
    cfg = write_config(tmp_path, bandit_doc(budget=10))
    proc = subprocess.run([sys.executable, "-m", "ordinal_mcts", "run", "--config", str(cfg),
                           "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    proc = subprocess.run([sys.executable, "-m", "ordinal_mcts", "run", "--config",
                           str(tmp_path / "none.json")], capture_output=True, text=True)
    assert proc.returncode == 2
