"""Experiment configuration: a single JSON document, unknown keys rejected."""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

from ..envs import BANDIT_ENVS, MDP_ENVS

BANDIT_KINDS = ("ucb1", "o-ucb", "oh-ucb", "multisbm")
MCTS_KINDS = ("mcts", "mixmax", "o-mcts")

TOP_KEYS = {"experiment", "environment", "algorithms", "budget", "repetitions", "seed", "output"}
ENV_KEYS = {"id", "params"}
ALGO_KEYS = {"kind", "c", "rl", "q", "z_critical", "hierarchy"}

ENV_PARAMS = {
    "medicine": set(),
    "skew": {"p", "values"},
    "platformer": {"length", "gaps", "p_jump", "step_limit", "score_map"},
    "chain": {"depth", "score_map"},
}


class ConfigError(ValueError):
    """Invalid experiment configuration; the message names the offending key."""


@dataclass(frozen=True)
class AlgorithmSpec:
    kind: str
    c: tuple
    rl: tuple = (None,)
    q: tuple = (None,)
    z_critical: tuple = (None,)
    hierarchy: tuple | None = None

    def grid(self):
        """Every parameter tuple as a dict, in canonical order."""
        for c, rl, q, z in itertools.product(self.c, self.rl, self.q, self.z_critical):
            yield {"c": c, "rl": rl, "q": q, "z_critical": z}


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    env_id: str
    env_params: dict
    algorithms: tuple
    budget: int
    repetitions: int
    seed: int
    output: str | None = None
    raw: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def is_bandit(self) -> bool:
        return self.env_id in BANDIT_ENVS

    def make_env(self):
        table = BANDIT_ENVS if self.is_bandit else MDP_ENVS
        try:
            return table[self.env_id](**self.env_params)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"environment.params: {exc}") from exc


def _unknown(obj: dict, allowed: set, where: str):
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(f"unknown key {where}{extra[0]!r}")


def _number_grid(value, key, *, integer=False, lo=None):
    values = value if isinstance(value, list) else [value]
    if not values:
        raise ConfigError(f"{key}: grid must not be empty")
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise ConfigError(f"{key}: expected a number, got {v!r}")
        if integer and int(v) != v:
            raise ConfigError(f"{key}: expected an integer, got {v!r}")
        if lo is not None and v < lo:
            raise ConfigError(f"{key}: value {v} below minimum {lo}")
        out.append(int(v) if integer else float(v))
    return tuple(out)


def _hierarchy(value, key):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{key}: expected a nonempty list of levels")
    levels = []
    for j, lvl in enumerate(value):
        if lvl == "full":
            levels.append("full")
            continue
        if not isinstance(lvl, list) or not lvl:
            raise ConfigError(f"{key}[{j}]: a level is a nonempty list of ranks or labels, or \"full\"")
        levels.append(tuple(lvl))
    return tuple(levels)


def resolve_hierarchy(levels, scale):
    """Turn config levels (ranks, labels or "full") into rank lists."""
    out = []
    for lvl in levels:
        if lvl == "full":
            out.append(list(range(scale.size)))
            continue
        ranks = []
        for item in lvl:
            if isinstance(item, str):
                if item not in scale:
                    raise ConfigError(f"hierarchy label {item!r} not in the outcome scale")
                ranks.append(scale.rank(item))
            elif isinstance(item, int) and 0 <= item < scale.size:
                ranks.append(item)
            else:
                raise ConfigError(f"hierarchy rank {item!r} outside the outcome scale")
        out.append(ranks)
    return out


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _unknown(doc, TOP_KEYS, "")
    for key in ("experiment", "environment", "algorithms", "budget", "repetitions", "seed"):
        if key not in doc:
            raise ConfigError(f"missing key {key!r}")

    env = doc["environment"]
    if not isinstance(env, dict):
        raise ConfigError("environment: expected an object")
    _unknown(env, ENV_KEYS, "environment.")
    env_id = env.get("id")
    if env_id not in ENV_PARAMS:
        raise ConfigError(f"environment.id: unknown environment {env_id!r}")
    params = env.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("environment.params: expected an object")
    _unknown(params, ENV_PARAMS[env_id], "environment.params.")
    is_bandit = env_id in BANDIT_ENVS

    algos = doc["algorithms"]
    if not isinstance(algos, list) or not algos:
        raise ConfigError("algorithms: expected a nonempty list")
    specs = []
    for i, a in enumerate(algos):
        where = f"algorithms[{i}]."
        if not isinstance(a, dict):
            raise ConfigError(f"algorithms[{i}]: expected an object")
        _unknown(a, ALGO_KEYS, where)
        kind = str(a.get("kind", "")).lower()
        valid_kinds = BANDIT_KINDS if is_bandit else MCTS_KINDS
        if kind not in valid_kinds:
            raise ConfigError(f"{where}kind: {kind!r} is not valid for {env_id}; "
                              f"expected one of {valid_kinds}")
        if "c" not in a:
            raise ConfigError(f"{where}c: missing")
        c = _number_grid(a["c"], where + "c", lo=0)
        rl = q = z = (None,)
        hierarchy = None
        if is_bandit:
            for key in ("rl", "q"):
                if key in a:
                    raise ConfigError(f"{where}{key}: not used by bandit algorithms")
            if kind == "oh-ucb":
                z = _number_grid(a.get("z_critical", 0.65), where + "z_critical")
                if any(not v > 0 for v in z):
                    raise ConfigError(f"{where}z_critical: must be > 0")
                hierarchy = _hierarchy(a.get("hierarchy", [[0], "full"]), where + "hierarchy")
            else:
                for key in ("z_critical", "hierarchy"):
                    if key in a:
                        raise ConfigError(f"{where}{key}: only used by oh-ucb")
        else:
            for key in ("z_critical", "hierarchy"):
                if key in a:
                    raise ConfigError(f"{where}{key}: not used by tree search")
            if "rl" not in a:
                raise ConfigError(f"{where}rl: missing")
            rl = _number_grid(a["rl"], where + "rl", integer=True, lo=1)
            if kind == "mixmax":
                q = _number_grid(a.get("q", 0.25), where + "q", lo=0)
                if any(v > 1 for v in q):
                    raise ConfigError(f"{where}q: must lie in [0, 1]")
            elif "q" in a:
                raise ConfigError(f"{where}q: only used by mixmax")
        specs.append(AlgorithmSpec(kind, c, rl, q, z, hierarchy))

    budget = doc["budget"]
    if isinstance(budget, bool) or not isinstance(budget, int) or budget < 1:
        raise ConfigError("budget: expected a positive integer")
    reps = doc["repetitions"]
    if isinstance(reps, bool) or not isinstance(reps, int) or reps < 1:
        raise ConfigError("repetitions: expected an integer >= 1")
    seed = doc["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigError("seed: expected a nonnegative integer")
    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigError("output: expected a directory path string")
    name = doc["experiment"]
    if not isinstance(name, str) or not name:
        raise ConfigError("experiment: expected a nonempty name")

    cfg = ExperimentConfig(name, env_id, dict(params), tuple(specs), budget, reps, seed,
                           output, raw=doc)
    env_obj = cfg.make_env()
    for spec in specs:
        if spec.hierarchy is not None:
            resolve_hierarchy(spec.hierarchy, env_obj.scale)
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file {path} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    return parse_config(doc)


def grid_size(cfg: ExperimentConfig) -> int:
    return sum(math.prod(len(x) for x in (s.c, s.rl, s.q, s.z_critical)) for s in cfg.algorithms)
