import itertools

import numpy as np
import pytest

from ordinal_mcts.envs import (ChainEnv, GapPlatformer, MedicineBandit, SkewBandit,
                               medicine_pull, platformer_step, true_borda_medicine)
from ordinal_mcts.mdp import (BudgetExhausted, BudgetMeter, GameStatus, IllegalAction,
                              ScoreBounds, map_reward, normalize_score, ordinalize,
                              outcome_scale, r_mcts, simulate)
from ordinal_mcts.ordinal import OrdinalError


# --- budget and forward model -----------------------------------------------

def test_simulate_is_reproducible():
    env = GapPlatformer()
    s = env.reset().state
    a = simulate(env, s, env.JUMP, BudgetMeter(5), np.random.default_rng(4))
    b = simulate(env, s, env.JUMP, BudgetMeter(5), np.random.default_rng(4))
    assert a == b


def test_exhausted_meter_leaves_state_alone():
    env = ChainEnv()
    meter = BudgetMeter(1)
    s = env.reset().state
    simulate(env, s, 0, meter, None)
    with pytest.raises(BudgetExhausted):
        simulate(env, s, 0, meter, None)
    assert meter.used == 1 and meter.remaining == 0
    assert env.reset().state == s


def test_jump_over_gap_death_rate():
    env = GapPlatformer(length=12, gaps=(4,), p_jump=0.7)
    s = env.reset().state._replace(pos=3)
    rng = np.random.default_rng(123)
    meter = BudgetMeter(10_000)
    deaths = sum(simulate(env, s, env.JUMP, meter, rng).status == GameStatus.LOST
                 for _ in range(10_000))
    assert abs(deaths / 10_000 - 0.30) <= 0.02


# --- reward mapping ---------------------------------------------------------

def test_normalize_examples():
    b = ScoreBounds(-1000, 10000)
    assert normalize_score(-1000, b) == 0.0
    assert normalize_score(10000, b) == 1.0
    assert normalize_score(0, b) == pytest.approx(1000 / 11000)
    with pytest.raises(ValueError):
        normalize_score(10001, b)
    with pytest.raises(ValueError):
        ScoreBounds(3, 3)


def test_map_reward_examples():
    assert map_reward(0.0, GameStatus.LOST) == 0.0
    assert map_reward(1.0, GameStatus.WON) == 1.0
    assert map_reward(0.5, GameStatus.PLAYING) == pytest.approx(0.5)


def test_ordinalize_bands():
    scale = outcome_scale([0, 5, 10])
    b = ScoreBounds(0, 10)
    assert ordinalize(10, GameStatus.LOST, b, scale) < ordinalize(0, GameStatus.PLAYING, b, scale)
    assert ordinalize(5, GameStatus.WON, b, scale) < ordinalize(10, GameStatus.WON, b, scale)
    with pytest.raises(OrdinalError):
        ordinalize(3, GameStatus.WON, b, scale)


def test_ordinal_ranks_sort_like_rewards():
    scores = [0, 4, 9]
    scale = outcome_scale(scores)
    b = ScoreBounds(0, 9)
    pairs = list(itertools.product(GameStatus, scores))
    by_reward = sorted(pairs, key=lambda p: r_mcts(p[1], p[0], b))
    assert [ordinalize(s, st, b, scale) for st, s in by_reward] == list(range(9))


# --- bandit environments ----------------------------------------------------

def test_medicine_deterministic_arms():
    rng = np.random.default_rng(0)
    assert {medicine_pull(2, rng) for _ in range(100)} == {1}
    assert {medicine_pull(3, rng) for _ in range(100)} == {2}


def test_medicine_death_rate():
    rng = np.random.default_rng(9)
    deaths = sum(medicine_pull(0, rng) == 0 for _ in range(100_000))
    assert abs(deaths / 100_000 - 0.2) <= 0.01


def test_medicine_exact_values():
    env = MedicineBandit()
    assert np.allclose(env.expected_values(), [0.8, 0.2, 0.6, 0.7])
    b = true_borda_medicine()
    assert int(np.argmax(b)) == int(np.argmax(env.expected_values())) == 0


def test_skew_bandit_disagreement():
    env = SkewBandit(0.7, (0.0, 0.6, 0.8))
    assert np.allclose(env.expected_values(), [0.56, 0.6])
    assert np.allclose(env.true_borda(), [0.7, 0.3])


def test_bandit_validation():
    with pytest.raises(ValueError):
        SkewBandit(p=1.0)
    with pytest.raises(ValueError):
        SkewBandit(values=(0.0, 0.9, 0.8))
    with pytest.raises(IndexError):
        MedicineBandit().pull(4, np.random.default_rng())


# --- platformer -------------------------------------------------------------

def test_platformer_moves():
    env = GapPlatformer(length=6, gaps=(3,), p_jump=1.0, step_limit=20)
    rng = np.random.default_rng(0)
    o = env.reset()
    o = platformer_step(env, o.state, env.WALK, rng)
    assert o.state.pos == 1 and o.score == 1
    o = env.step(o.state, env.STAND, rng)
    assert o.state.pos == 1 and o.state.t == 2
    o = env.step(o.state, env.JUMP, rng)  # lands in the gap
    assert o.status == GameStatus.LOST and o.terminal and o.score == 0 and o.actions == ()


def test_platformer_walk_into_gap():
    env = GapPlatformer(length=6, gaps=(1,))
    o = env.step(env.reset().state, env.WALK, None)
    assert o.status == GameStatus.LOST


def test_platformer_sure_jumps_win():
    env = GapPlatformer(p_jump=1.0)
    rng = np.random.default_rng(1)
    o = env.reset()
    while not o.terminal:
        o = env.step(o.state, env.JUMP if env.gap_adjacent(o.state) else env.WALK, rng)
    assert o.status == GameStatus.WON and o.score == env.length


def test_platformer_standing_never_scores():
    env = GapPlatformer(step_limit=15)
    o = env.reset()
    scores = []
    while not o.terminal:
        o = env.step(o.state, env.STAND, None)
        scores.append(o.score)
    assert set(scores) == {0}
    assert o.status == GameStatus.PLAYING and o.state.t == 15


def test_platformer_illegal_moves():
    env = GapPlatformer()
    with pytest.raises(IllegalAction):
        env.step(env.reset().state, 7, None)
    done = env.reset().state._replace(done=True)
    with pytest.raises(IllegalAction):
        env.step(done, env.WALK, None)


def test_platformer_score_map_and_scale():
    env = GapPlatformer(length=3, gaps=(), score_map=[0, 10, 20, 50])
    assert env.bounds == ScoreBounds(0, 50)
    assert env.scale.size == 12
    with pytest.raises(ValueError):
        GapPlatformer(length=3, score_map=[0, 10, 10, 50])


def test_chain_env():
    env = ChainEnv(depth=2)
    o = env.step(env.reset().state, 0, None)
    assert not o.terminal
    assert env.step(o.state, 0, None).status == GameStatus.WON
    assert env.step(o.state, 1, None).status == GameStatus.LOST
