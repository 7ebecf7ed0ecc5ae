import logging
from math import comb

import numpy as np
import pytest

from freegames import constructions
from freegames import game as fg
from freegames import solvers
from freegames.experiments import eight_patterns
from freegames.experiments import four_subsets
from freegames.utils import BudgetExceededError
from freegames.utils import PromiseViolationError


def test_kappa_formulas():
    assert solvers.kappa_estimate(0.3, 2, 2, 1000) == 36
    assert solvers.kappa_gap(0.5, 2, 2, 100) == 4
    assert solvers.kappa_delta(0.5, 2**10, 2**10, 10**6) == 22
    # clamped to the number of questions
    assert solvers.kappa_estimate(0.1, 2, 2, 5) == 5
    assert solvers.kappa_gap(0.999, 1, 1, 10) == 1


@pytest.mark.parametrize("value", [0.0, 1.0, -0.1])
def test_kappa_rejects_bad_epsilon(value):
    with pytest.raises(ValueError):
        solvers.kappa_estimate(value, 2, 2, 10)
    with pytest.raises(ValueError):
        solvers.kappa_delta(value, 2, 2, 10)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("epsilon", [0.15, 0.3])
def test_est_deterministic_within_epsilon(seed, epsilon):
    game = constructions.random_free_game(3, 3, 2, 2, seed=seed)
    omega = fg.exact_value(game).value
    report = solvers.est_deterministic(game, epsilon)
    assert report.kappa == 3
    assert np.isclose(report.lower_bound, omega)
    assert omega - 1e-12 <= report.estimate <= omega + epsilon + 1e-12
    assert report.mode == solvers.DETERMINISTIC


@pytest.mark.parametrize("seed", range(5))
def test_est_small_kappa_is_a_lower_bound(seed):
    game = constructions.random_free_game(5, 3, 2, 3, seed=seed)
    omega = fg.exact_value(game).value
    report = solvers.est_deterministic(game, 0.3, kappa=1)
    assert report.kappa == 1
    assert report.sampled_sets == 5
    assert report.lower_bound <= omega + 1e-12
    assert np.isclose(fg.strategy_value(game, report.witness), report.lower_bound)


def test_est_deterministic_thread_independent():
    game = constructions.random_free_game(6, 3, 2, 2, seed=2)
    single = solvers.est_deterministic(game, 0.3, kappa=2, threads=1)
    multi = solvers.est_deterministic(game, 0.3, kappa=2, threads=2)
    assert single.lower_bound == multi.lower_bound
    assert single.best_subset == multi.best_subset
    assert single.witness == multi.witness


def test_est_randomized_reproducible():
    game = constructions.random_free_game(6, 3, 2, 2, seed=4)
    a = solvers.est_randomized(game, 0.3, seed=7, kappa=2)
    b = solvers.est_randomized(game, 0.3, seed=7, kappa=2)
    assert a.lower_bound == b.lower_bound
    assert a.sampled_sets == b.sampled_sets
    assert len(a.sampled_sets) == 1
    assert a.mode == solvers.RANDOMIZED
    assert a.lower_bound <= fg.exact_value(game).value + 1e-12


def test_est_budget():
    game = constructions.random_free_game(10, 4, 3, 3, seed=0)
    with pytest.raises(BudgetExceededError):
        solvers.est_deterministic(game, 0.05, budget=1000)


def test_decide_perfect_game():
    game = fg.FreeGame.from_table(np.ones((3, 2, 2, 2)))
    report = solvers.decide_one_vs_gap(game, 0.2)
    assert report.verdict == solvers.VALUE_ONE
    assert np.isclose(fg.strategy_value(game, report.certificate), 1.0)
    assert report.trace == []


def test_decide_satisfiable_clause_variable_game():
    game = constructions.clause_variable_game(four_subsets())
    report = solvers.decide_one_vs_gap(game, 1 / 24)
    assert report.verdict == solvers.VALUE_ONE
    assert np.isclose(fg.strategy_value(game, report.certificate), 1.0)


def test_decide_unsatisfiable_clause_variable_game():
    game = constructions.clause_variable_game(eight_patterns())
    report = solvers.decide_one_vs_gap(game, 1 / 24)
    assert report.verdict == solvers.BELOW_GAP
    assert report.kappa == 8
    assert report.certificate is None
    assert len(report.trace) == 1
    assert report.trace[0]["x"] >= 0
    assert set(report.trace[0]) == {"subset", "alpha", "value", "x", "y", "a", "b"}
    assert report.pruned > 0


def test_decide_accepts_above_gap_without_perfect_profile(caplog):
    table = np.array([1.0, 0.0]).reshape(2, 1, 1, 1)
    game = fg.FreeGame.from_table(table)
    with caplog.at_level(logging.WARNING, logger="freegames.solvers"):
        report = solvers.decide_one_vs_gap(game, 0.6, kappa=1)
    assert report.verdict == solvers.VALUE_ONE
    assert np.isclose(report.best_value, 0.5)
    assert np.isclose(fg.strategy_value(game, report.certificate), 0.5)
    assert "violates the promise" in caplog.text

    # half of the questions lost is less than the promised 0.6 share
    with pytest.raises(PromiseViolationError) as info:
        solvers.decide_one_vs_gap(game, 0.6, kappa=1, strict=True)
    assert np.isclose(info.value.value, 0.5)

    report = solvers.decide_one_vs_delta(game, 0.9, kappa=1)
    assert report.verdict == solvers.BELOW_GAP
    assert np.isclose(report.best_value, 0.5)
    # a value of exactly delta is accepted and loses on a 1 - delta share
    report = solvers.decide_one_vs_delta(game, 0.5, kappa=1, strict=True)
    assert report.verdict == solvers.VALUE_ONE


def test_decide_xor_game_below_gap():
    report = solvers.decide_one_vs_gap(constructions.xor_game(), 0.25)
    assert report.verdict == solvers.BELOW_GAP
    assert report.best_value <= 0.75 + 1e-12


def test_decide_thread_independent():
    game = constructions.clause_variable_game(four_subsets())
    single = solvers.decide_one_vs_gap(game, 0.3, kappa=2, threads=1)
    multi = solvers.decide_one_vs_gap(game, 0.3, kappa=2, threads=2)
    assert single.verdict == multi.verdict == solvers.VALUE_ONE
    assert single.certificate == multi.certificate


def test_decide_heuristic_mode():
    game = fg.FreeGame.from_table(np.ones((4, 2, 2, 2)))
    report = solvers.decide_one_vs_delta(game, 0.5, seed=1, kappa=2)
    assert report.mode == solvers.HEURISTIC
    assert report.verdict == solvers.VALUE_ONE
    assert len(report.sampled_sets) == 1


@pytest.mark.parametrize("seed", range(3))
def test_est_k_two_players(seed):
    game = constructions.random_kfree_game((3, 3), (2, 2), seed=seed)
    report = solvers.est_k(game, 0.5)
    assert report.kappa == [3]
    assert np.isclose(report.lower_bound, fg.exact_value_k(game).value)


def test_est_k_three_players():
    game = constructions.random_kfree_game((2, 2, 2), (2, 2, 2), seed=5)
    omega = fg.exact_value_k(game).value
    report = solvers.est_k(game, 0.5)
    assert len(report.kappa) == 2
    assert np.isclose(report.lower_bound, omega)
    assert report.estimate <= omega + 0.5 + 1e-12


def test_est_k_sampled_is_lower_bound():
    game = constructions.random_kfree_game((4, 4), (2, 2), seed=1)
    report = solvers.est_k(game, 0.5, seed=3)
    assert report.mode == solvers.HEURISTIC
    assert report.lower_bound <= fg.exact_value_k(game).value + 1e-12


def test_est_k_accepts_two_player_game():
    game = constructions.random_free_game(3, 2, 2, 2, seed=0)
    report = solvers.est_k(game, 0.5)
    assert np.isclose(report.lower_bound, fg.exact_value(game).value)


def test_est_k_perfect():
    assert solvers.est_k_perfect(fg.KFreeGame.from_table(np.ones((2, 2, 2, 2)), k=2), 0.5).verdict == solvers.VALUE_ONE
    table = np.zeros((2, 2, 2, 2))
    for y1, y2, b1, b2 in np.ndindex(2, 2, 2, 2):
        table[y1, y2, b1, b2] = float(b1 == y2)
    report = solvers.est_k_perfect(fg.KFreeGame.from_table(table, k=2), 0.5)
    assert report.verdict == solvers.BELOW_GAP
    assert np.isclose(report.best_value, 0.5)


def test_subsample_kappa_and_implied_epsilon():
    assert solvers.subsample_kappa(0.5, 1.0, [2, 2]) == 3
    assert np.isclose(solvers.implied_epsilon(3, 1.0, [2, 2]), np.log(4) / 3)
    kappa = solvers.subsample_kappa(0.4, 2.0, [3, 2])
    assert solvers.implied_epsilon(kappa, 2.0, [3, 2]) <= 0.4
    assert solvers.implied_epsilon(5, 3.0, [1]) == 0.0
    with pytest.raises(ValueError):
        solvers.subsample_kappa(0.5, 0.0, [2])


def test_subsample_full_kappa_is_value():
    game = constructions.random_free_game(3, 3, 2, 2, seed=8)
    report = solvers.subsample_estimate(game, kappa=3)
    assert report.n_subsets == 1
    assert np.isclose(report.mean, fg.exact_value(game).value)


@pytest.mark.parametrize("seed", range(4))
def test_subsample_mean_at_least_value(seed):
    game = constructions.random_free_game(3, 3, 2, 2, seed=seed)
    report = solvers.subsample_estimate(game, kappa=2)
    assert report.kappa == (2, 2)
    assert report.n_subsets == 9
    assert report.mean >= fg.exact_value(game).value - 1e-12


def test_subsample_single_player():
    game = constructions.random_free_game(3, 3, 2, 2, seed=1)
    report = solvers.subsample_estimate(game, kappa=2, players=[0])
    assert report.kappa == (2, 3)
    assert report.n_subsets == 3
    with pytest.raises(ValueError):
        solvers.subsample_estimate(game, kappa=2, players=[2])


def test_subsample_monte_carlo():
    game = constructions.random_kfree_game((4, 4, 3), (2, 2, 2), seed=2)
    a = solvers.subsample_estimate(game, kappa=2, mode="monte-carlo", trials=12, seed=5)
    b = solvers.subsample_estimate(game, kappa=2, mode="monte-carlo", trials=12, seed=5)
    assert a.mean == b.mean
    assert a.n_subsets == 12
    assert a.stderr is not None
    with pytest.raises(ValueError):
        solvers.subsample_estimate(game, kappa=2, mode="sometimes")


def test_subsample_thread_independent():
    game = constructions.random_free_game(4, 4, 2, 2, seed=3)
    single = solvers.subsample_estimate(game, kappa=2, threads=1)
    multi = solvers.subsample_estimate(game, kappa=2, threads=2)
    assert single.mean == multi.mean


@pytest.mark.parametrize("seed", range(25))
def test_est_k_within_epsilon_on_three_player_games(seed):
    game = constructions.random_kfree_game((2, 2, 2), (2, 2, 2), seed=100 + seed)
    omega = fg.exact_value_k(game).value
    report = solvers.est_k(game, 0.3)
    assert abs(report.estimate - omega) <= 0.3 + 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_est_randomized_default_kappa_within_epsilon(seed):
    game = constructions.random_free_game(4, 4, 2, 2, seed=seed)
    omega = fg.exact_value(game).value
    report = solvers.est_randomized(game, 0.3, seed=seed)
    assert abs(report.estimate - omega) <= 0.3 + 1e-12


def needle_game(n=20):
    # value one only through the answer n, which never collides with x
    table = np.zeros((n, 1, 1, n + 1))
    for x in range(n):
        for b in range(n + 1):
            table[x, 0, 0, b] = float(b == n or b != x)
    return fg.FreeGame.from_table(table)


def planted_game(x, y, a, b, seed):
    rng = np.random.default_rng(seed)
    f = rng.integers(a, size=x)
    g = rng.integers(b, size=y)
    table = np.zeros((x, y, a, b))
    for i in range(x):
        for j in range(y):
            table[i, j, f[i], g[j]] = 1.0
    return fg.FreeGame.from_table(table), f, g


@pytest.mark.parametrize(
    "decide, threshold, kappa",
    [
        (solvers.decide_one_vs_gap, 0.5, None),
        (solvers.decide_one_vs_delta, 0.5, None),
        (solvers.decide_one_vs_gap, 0.02, 6),
    ],
)
def test_decide_needle_game_has_value_one(decide, threshold, kappa):
    game = needle_game()
    report = decide(game, threshold, kappa=kappa, strict=True)
    assert report.kappa == 6
    assert report.verdict == solvers.VALUE_ONE
    assert report.best_value == 1.0
    assert list(report.certificate[1]) == [20]
    assert np.isclose(fg.strategy_value(game, report.certificate), 1.0)


@pytest.mark.parametrize("seed", range(4))
def test_decide_planted_game_with_small_kappa(seed):
    game, f, g = planted_game(6, 4, 3, 3, seed)
    report = solvers.decide_one_vs_gap(game, 0.3, kappa=2)
    assert report.kappa == 2
    assert report.verdict == solvers.VALUE_ONE
    assert np.array_equal(report.certificate[0], f)
    assert np.array_equal(report.certificate[1], g)


def test_decide_zero_game_traces_every_subset():
    game = fg.FreeGame.from_table(np.zeros((6, 3, 2, 2)))
    report = solvers.decide_one_vs_gap(game, 0.5, kappa=2)
    assert report.verdict == solvers.BELOW_GAP
    assert report.best_value == 0.0
    assert report.candidates == 0
    assert report.pruned == 30
    assert len(report.trace) == 15
    assert all(t["alpha"] is None and t["value"] is None for t in report.trace)
    assert [t["x"] for t in report.trace] == [t["subset"][0] for t in report.trace]
    assert len(solvers.decide_one_vs_gap(game, 0.5, kappa=2, trace_limit=4).trace) == 4


def test_est_k_perfect_needle_game():
    table = np.zeros((1, 20, 21, 1))
    for y2 in range(20):
        for b1 in range(21):
            table[0, y2, b1, 0] = float(b1 == 20 or b1 != y2)
    game = fg.KFreeGame.from_table(table, k=2)
    report = solvers.est_k_perfect(game, 0.5, kappas=[2])
    assert report.kappa == [2]
    assert report.verdict == solvers.VALUE_ONE
    assert report.best_value == 1.0
    assert list(report.certificate[0]) == [20]
    # without the best-response round the answer 20 is never found
    assert solvers.est_k(game, 0.5, kappas=[2]).lower_bound < 1.0


def test_est_k_perfect_strict_promise():
    table = np.array([1.0, 0.0]).reshape(2, 1, 1, 1)
    game = fg.KFreeGame.from_table(table, k=2)
    report = solvers.est_k_perfect(game, 0.6)
    assert report.verdict == solvers.VALUE_ONE
    assert np.isclose(report.best_value, 0.5)
    with pytest.raises(PromiseViolationError):
        solvers.est_k_perfect(game, 0.6, strict=True)


def test_resolve_kappas():
    assert solvers._resolve_kappas(None, (3, 4, 5), [7, 8]) == [7, 8]
    assert solvers._resolve_kappas([2, 9], (3, 4, 5), [7, 8]) == [2, 5]
    with pytest.raises(ValueError):
        solvers._resolve_kappas([2], (3, 4, 5), [7, 8])
    with pytest.raises(ValueError):
        solvers._resolve_kappas([0, 1], (3, 4, 5), [7, 8])


@pytest.mark.parametrize("epsilon", [0.15, 0.3])
def test_est_deterministic_within_epsilon_on_many_games(epsilon):
    for seed in range(200):
        rng = np.random.default_rng(1000 + seed)
        x, y = rng.integers(2, 6, size=2)
        a, b = rng.integers(2, 4, size=2)
        game = constructions.random_free_game(x, y, a, b, seed=seed)
        omega = fg.exact_value(game).value
        report = solvers.est_deterministic(game, epsilon)
        assert report.lower_bound <= omega + 1e-12
        assert abs(report.estimate - omega) <= epsilon + 1e-12


def test_est_randomized_success_rate():
    game = constructions.random_free_game(5, 5, 2, 2, seed=11)
    omega = fg.exact_value(game).value
    hits = sum(
        abs(solvers.est_randomized(game, 0.2, seed=seed).estimate - omega) <= 0.2 + 1e-12
        for seed in range(300)
    )
    assert hits / 300 >= 2 / 3 - 0.05


@pytest.mark.parametrize("seed", range(5))
def test_small_kappa_bounds(seed):
    game = constructions.random_free_game(6, 3, 2, 2, seed=seed)
    omega = fg.exact_value(game).value
    full = solvers.est_deterministic(game, 0.3, kappa=6)
    assert np.isclose(full.lower_bound, omega)
    for kappa in range(1, 6):
        det = solvers.est_deterministic(game, 0.3, kappa=kappa)
        assert det.lower_bound <= omega + 1e-12
        for s in range(5):
            rand = solvers.est_randomized(game, 0.3, seed=s, kappa=kappa)
            # the random subset is one of the subsets swept above
            assert rand.lower_bound <= det.lower_bound + 1e-9


def test_est_k_agrees_with_two_player_estimator_on_promise_games():
    games = [constructions.random_free_game(3, 3, 2, 2, seed=s, boolean=True) for s in range(30)]
    games.append(planted_game(3, 3, 2, 2, 0)[0])
    games.append(fg.FreeGame.from_table(np.zeros((3, 3, 2, 2))))
    checked = 0
    for game in games:
        omega = fg.exact_value(game).value
        if 0.8 < omega < 1.0 - 1e-9:
            continue
        two = solvers.est_deterministic(game, 0.2).lower_bound > 0.8 + 1e-9
        many = solvers.est_k(game, 0.2).lower_bound > 0.8 + 1e-9
        assert two == many == (omega >= 1.0 - 1e-9)
        checked += 1
    assert checked >= 2


@pytest.mark.parametrize("kappa", [1, 2, 3])
def test_subsample_mean_at_least_value_six_questions(kappa):
    game = constructions.random_free_game(6, 6, 2, 2, seed=kappa)
    omega = fg.exact_value(game).value
    report = solvers.subsample_estimate(game, kappa=kappa)
    assert report.n_subsets == comb(6, kappa) ** 2
    assert report.mean >= omega - 1e-12
