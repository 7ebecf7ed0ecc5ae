from itertools import combinations
from math import comb

import numpy as np
import pytest

import freegames
from freegames import utils


def square(x):
    return x * x


def test_rank_of_colex_subsets_is_position():
    subsets = utils.colex_subsets(6, 3)
    assert len(subsets) == comb(6, 3)
    for i, s in enumerate(subsets):
        assert utils.rank_subset(s) == i
        assert utils.unrank_subset(i, 3) == s


def test_rank_ignores_order():
    assert utils.rank_subset((4, 0, 2)) == utils.rank_subset((0, 2, 4))


def test_rank_examples():
    assert utils.rank_subset(()) == 0
    assert utils.rank_subset((0, 1)) == 0
    assert utils.rank_subset((0, 2)) == 1
    assert utils.rank_subset((1, 2)) == 2
    assert utils.rank_subset((0, 3)) == 3


@pytest.mark.parametrize("subset", [(1, 1), (-1, 2)])
def test_rank_rejects_bad_subsets(subset):
    with pytest.raises(ValueError):
        utils.rank_subset(subset)


def test_unrank_large_rank():
    rank = utils.rank_subset((3, 17, 40, 99))
    assert utils.unrank_subset(rank, 4) == (3, 17, 40, 99)


def test_check_budget_raises_with_cost_report():
    with pytest.raises(utils.BudgetExceededError) as info:
        utils.check_budget(11, 10, what="test", breakdown={"level_2": 11})
    assert info.value.cost == 11
    assert info.value.budget == 10
    assert info.value.breakdown == {"level_2": 11}
    assert "level_2=11" in str(info.value)
    assert utils.check_budget(10, 10) == 10


def test_default_budget_from_environment(monkeypatch):
    monkeypatch.delenv(utils.BUDGET_ENV, raising=False)
    assert utils.default_budget() == utils.DEFAULT_BUDGET
    monkeypatch.setenv(utils.BUDGET_ENV, "5")
    assert utils.default_budget() == 5
    with pytest.raises(utils.BudgetExceededError):
        utils.check_budget(6)
    monkeypatch.setenv(utils.BUDGET_ENV, "many")
    with pytest.raises(ValueError):
        utils.default_budget()


def test_chunk_ranges_cover_total():
    chunks = utils.chunk_ranges(10, 3)
    assert chunks[0][0] == 0
    assert chunks[-1][1] == 10
    assert all(a < b for a, b in chunks)
    assert all(chunks[i][1] == chunks[i + 1][0] for i in range(len(chunks) - 1))
    assert utils.chunk_ranges(2, 8) == [(0, 1), (1, 2)]
    assert utils.chunk_ranges(0, 4) == []


@pytest.mark.parametrize("threads", [1, 2])
def test_parallel_map_keeps_order(threads):
    assert utils.parallel_map(square, list(range(7)), threads) == [
        x * x for x in range(7)
    ]


def test_parallel_map_rejects_zero_threads():
    with pytest.raises(ValueError):
        utils.parallel_map(square, [1], 0)


def test_spawn_generators_reproducible():
    a = [g.random() for g in utils.spawn_generators(3, 4)]
    b = [g.random() for g in utils.spawn_generators(3, 4)]
    assert a == b
    assert len(set(a)) == 4


def test_exceptions_subclass_builtins():
    assert issubclass(utils.DimensionMismatchError, ValueError)
    assert issubclass(utils.DimacsParseError, ValueError)
    assert issubclass(utils.PromiseViolationError, RuntimeError)
    assert issubclass(freegames.BudgetExceededError, RuntimeError)
    assert utils.DimensionMismatchError(2, "bad").player == 2


def test_random_subset_is_a_sorted_subset():
    (rng,) = utils.spawn_generators(0, 1)
    seen = set()
    for _ in range(200):
        subset = utils.random_subset(rng, 5, 2)
        assert subset == tuple(sorted(set(subset)))
        assert len(subset) == 2 and 0 <= subset[0] and subset[-1] < 5
        seen.add(subset)
    # all ten 2-subsets show up
    assert len(seen) == 10


def test_random_subset_reproducible_and_large():
    a = [utils.random_subset(g, 100, 50) for g in utils.spawn_generators(9, 3)]
    b = [utils.random_subset(g, 100, 50) for g in utils.spawn_generators(9, 3)]
    assert a == b
    assert all(len(set(s)) == 50 for s in a)
    assert utils.random_subset(np.random.default_rng(0), 4, 4) == (0, 1, 2, 3)


def test_colex_matches_combinations_set():
    assert set(utils.colex_subsets(5, 2)) == set(combinations(range(5), 2))
