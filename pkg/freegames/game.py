import logging
from collections import namedtuple
from dataclasses import dataclass
from functools import cached_property
from typing import Callable
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from . import kernels
from .utils import check_budget
from .utils import chunk_ranges
from .utils import DimensionMismatchError
from .utils import GameFormatError
from .utils import parallel_map

logger = logging.getLogger(__name__)

GameValue = namedtuple("GameValue", "value, witness, exact")
BestResponse = namedtuple("BestResponse", "strategy, value, empty_questions")
Subgame = namedtuple("Subgame", "game, subsets")

WEIGHT_TOL = 1e-12


def _check_unit_interval(values: np.ndarray, what: str = "Verifier") -> None:
    if values.size == 0:
        return
    if not np.all(np.isfinite(values)):
        raise GameFormatError(f"{what} values must be finite")
    lo, hi = float(values.min()), float(values.max())
    if lo < 0.0 or hi > 1.0:
        raise GameFormatError(f"{what} values must lie in [0, 1], got [{lo}, {hi}]")


@dataclass(frozen=True, eq=False)
class DenseTable:
    """Verifier stored as a full row-major table"""

    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        _check_unit_interval(values)
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.values.shape

    cost = 1

    def evaluate(self, *index: int) -> float:
        return float(self.values[index])

    def table(self, budget: Optional[int] = None) -> np.ndarray:
        return self.values


@dataclass(frozen=True, eq=False)
class RuleOracle:
    """Verifier given by a deterministic rule over index tuples.

    ``cost`` is the number of elementary evaluations one call stands for
    and is used when the rule is enumerated into a table.
    """

    rule: Callable[..., float]
    shape: Tuple[int, ...]
    cost: int = 1

    def evaluate(self, *index: int) -> float:
        if len(index) != len(self.shape):
            raise ValueError(f"Expected {len(self.shape)} indices, got {len(index)}")
        value = float(self.rule(*index))
        if not 0.0 <= value <= 1.0:
            raise GameFormatError(f"Rule returned {value} at {index}")
        return value

    def table(self, budget: Optional[int] = None) -> np.ndarray:
        size = int(np.prod(self.shape))
        check_budget(size * self.cost, budget, what="rule enumeration")
        values = np.empty(self.shape, dtype=np.float64)
        for index in np.ndindex(*self.shape):
            values[index] = self.evaluate(*index)
        return values


VerificationOracle = Union[DenseTable, RuleOracle]


@dataclass(frozen=True, eq=False)
class Distribution:
    """
    Question distribution of a two-prover game.

    kind is one of ``uniform_product`` (free games), ``uniform_support``
    (uniform over the pairs marked in ``support``) or ``weighted``.
    """

    kind: str = "uniform_product"
    support: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind == "uniform_product":
            return
        if self.kind == "uniform_support":
            if self.support is None:
                raise GameFormatError("uniform_support needs a support mask")
            support = np.array(self.support, dtype=bool)
            if support.ndim != 2:
                raise GameFormatError("support must be a 2D mask over X x Y")
            if not support.any():
                raise GameFormatError("support must be nonempty")
            support.setflags(write=False)
            object.__setattr__(self, "support", support)
        elif self.kind == "weighted":
            if self.weights is None:
                raise GameFormatError("weighted distribution needs weights")
            weights = np.array(self.weights, dtype=np.float64)
            if weights.ndim != 2:
                raise GameFormatError("weights must be a 2D array over X x Y")
            if (weights < 0).any():
                raise GameFormatError("weights must be nonnegative")
            total = float(weights.sum())
            if abs(total - 1.0) > WEIGHT_TOL:
                raise GameFormatError(f"weights must sum to 1, got {total!r}")
            weights.setflags(write=False)
            object.__setattr__(self, "weights", weights)
        else:
            raise GameFormatError(f"Unknown distribution kind {self.kind!r}")

    @classmethod
    def uniform_product(cls) -> "Distribution":
        return cls("uniform_product")

    @classmethod
    def uniform_support(cls, support) -> "Distribution":
        return cls("uniform_support", support=support)

    @classmethod
    def weighted(cls, weights) -> "Distribution":
        return cls("weighted", weights=weights)

    def matrix(self, x_count: int, y_count: int) -> np.ndarray:
        """Probability of every question pair as an (X, Y) array"""
        if self.kind == "uniform_product":
            return np.full((x_count, y_count), 1.0 / (x_count * y_count))
        if self.kind == "uniform_support":
            mask = self.support_mask(x_count, y_count)
            return mask / float(mask.sum())
        assert self.weights is not None
        return np.array(self.weights)

    def support_mask(self, x_count: int, y_count: int) -> np.ndarray:
        if self.kind == "uniform_product":
            return np.ones((x_count, y_count), dtype=bool)
        if self.kind == "uniform_support":
            assert self.support is not None
            return np.array(self.support)
        assert self.weights is not None
        return np.asarray(self.weights) > 0


@dataclass(frozen=True, eq=False)
class TwoProverGame:
    x_count: int
    y_count: int
    a_count: int
    b_count: int
    distribution: Distribution
    verifier: VerificationOracle

    def __post_init__(self):
        for name in ("x_count", "y_count", "a_count", "b_count"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise GameFormatError(f"{name} must be a positive integer, got {value}")
        shape = (self.x_count, self.y_count, self.a_count, self.b_count)
        if tuple(self.verifier.shape) != shape:
            raise GameFormatError(
                f"Verifier shape {tuple(self.verifier.shape)} does not match {shape}",
            )
        dist = self.distribution
        if dist.kind != "uniform_product":
            array = dist.support if dist.kind == "uniform_support" else dist.weights
            assert array is not None
            if array.shape != (self.x_count, self.y_count):
                raise GameFormatError(
                    f"Distribution shape {array.shape} does not match "
                    f"{(self.x_count, self.y_count)}",
                )

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.x_count, self.y_count, self.a_count, self.b_count)

    @cached_property
    def table(self) -> np.ndarray:
        values = np.asarray(self.verifier.table(), dtype=np.float64)
        _check_unit_interval(values)
        values.setflags(write=False)
        return values

    @cached_property
    def weights(self) -> np.ndarray:
        values = self.distribution.matrix(self.x_count, self.y_count)
        values.setflags(write=False)
        return values

    @property
    def support(self) -> np.ndarray:
        return self.distribution.support_mask(self.x_count, self.y_count)

    @property
    def is_free(self) -> bool:
        return self.distribution.kind == "uniform_product"

    @property
    def is_boolean(self) -> bool:
        table = self.table
        return bool(np.all((table == 0.0) | (table == 1.0)))

    @classmethod
    def from_table(cls, table, distribution: Optional[Distribution] = None):
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 4:
            raise GameFormatError(f"Expected a 4D table, got {table.ndim}D")
        if distribution is None:
            distribution = Distribution.uniform_product()
        return cls(*table.shape, distribution, DenseTable(table))


@dataclass(frozen=True, eq=False)
class FreeGame(TwoProverGame):
    def __post_init__(self):
        if self.distribution.kind != "uniform_product":
            raise GameFormatError(
                f"FreeGame needs a uniform product distribution, "
                f"got {self.distribution.kind}",
            )
        super().__post_init__()

    @classmethod
    def from_table(cls, table, distribution: Optional[Distribution] = None):
        table = np.asarray(table, dtype=np.float64)
        if table.ndim != 4:
            raise GameFormatError(f"Expected a 4D table, got {table.ndim}D")
        return cls(*table.shape, Distribution.uniform_product(), DenseTable(table))


@dataclass(frozen=True, eq=False)
class KFreeGame:
    """k-player free game. The verifier is indexed by (y_1..y_k, b_1..b_k)"""

    question_counts: Tuple[int, ...]
    answer_counts: Tuple[int, ...]
    verifier: VerificationOracle

    def __post_init__(self):
        q = tuple(int(v) for v in self.question_counts)
        a = tuple(int(v) for v in self.answer_counts)
        if len(q) < 1 or len(q) != len(a):
            raise GameFormatError(
                f"Need k >= 1 matching question/answer counts, got {q} and {a}",
            )
        if min(q + a) < 1:
            raise GameFormatError("All question and answer counts must be positive")
        object.__setattr__(self, "question_counts", q)
        object.__setattr__(self, "answer_counts", a)
        if tuple(self.verifier.shape) != q + a:
            raise GameFormatError(
                f"Verifier shape {tuple(self.verifier.shape)} does not match {q + a}",
            )

    @property
    def k(self) -> int:
        return len(self.question_counts)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.question_counts + self.answer_counts

    @cached_property
    def table(self) -> np.ndarray:
        values = np.asarray(self.verifier.table(), dtype=np.float64)
        _check_unit_interval(values)
        values.setflags(write=False)
        return values

    @classmethod
    def from_table(cls, table, k: Optional[int] = None) -> "KFreeGame":
        table = np.asarray(table, dtype=np.float64)
        if k is None:
            if table.ndim % 2:
                raise GameFormatError("Cannot infer k from an odd-dimensional table")
            k = table.ndim // 2
        if table.ndim != 2 * k:
            raise GameFormatError(f"Expected a {2 * k}D table, got {table.ndim}D")
        return cls(table.shape[:k], table.shape[k:], DenseTable(table))

    def as_free(self) -> FreeGame:
        if self.k != 2:
            raise ValueError(f"Only 2-player games convert to FreeGame, k = {self.k}")
        return FreeGame.from_table(self.table)


def as_kfree(game: Union[TwoProverGame, KFreeGame]) -> KFreeGame:
    if isinstance(game, KFreeGame):
        return game
    if not game.is_free:
        raise TypeError("Only free games have a k-player form")
    return KFreeGame.from_table(game.table, k=2)


@dataclass(frozen=True, eq=False)
class StrategyProfile:
    """One answer array per player, indexed by question"""

    strategies: Tuple[np.ndarray, ...]

    def __post_init__(self):
        arrays = []
        for s in self.strategies:
            arr = np.array(s, dtype=np.int64).reshape(-1)
            arr.setflags(write=False)
            arrays.append(arr)
        object.__setattr__(self, "strategies", tuple(arrays))

    @classmethod
    def of(cls, *strategies) -> "StrategyProfile":
        return cls(tuple(strategies))

    def __getitem__(self, player: int) -> np.ndarray:
        return self.strategies[player]

    def __len__(self) -> int:
        return len(self.strategies)

    def __iter__(self):
        return iter(self.strategies)

    def __eq__(self, other) -> bool:
        if not isinstance(other, StrategyProfile) or len(other) != len(self):
            return False
        return all(np.array_equal(s, o) for s, o in zip(self, other))

    def to_lists(self):
        return [s.tolist() for s in self.strategies]


def dense_game(game, limit: Optional[int] = None):
    """
    Materialize implicit games (such as birthday games) into tables of at
    most ``limit`` entries
    """
    materialize = getattr(game, "materialize", None)
    if materialize is not None:
        return materialize(limit=limit)
    return game


def _check_profile(
    question_counts: Sequence[int],
    answer_counts: Sequence[int],
    profile: StrategyProfile,
) -> None:
    if len(profile) != len(question_counts):
        raise DimensionMismatchError(
            len(profile),
            f"profile has {len(profile)} strategies for a "
            f"{len(question_counts)}-player game",
        )
    for i, (s, q, a) in enumerate(zip(profile, question_counts, answer_counts)):
        if len(s) != q:
            raise DimensionMismatchError(
                i + 1,
                f"strategy covers {len(s)} questions, game has {q}",
            )
        if len(s) and (s.min() < 0 or s.max() >= a):
            raise DimensionMismatchError(
                i + 1,
                f"answer index out of range [0, {a})",
            )


def profile_payoffs(table: np.ndarray, k: int, strategies: Sequence[np.ndarray]):
    """Verifier value on every question tuple under the given strategies"""
    index = []
    answers = []
    for i, s in enumerate(strategies):
        shape = [1] * k
        shape[i] = len(s)
        index.append(np.arange(len(s)).reshape(shape))
        answers.append(np.asarray(s).reshape(shape))
    return table[tuple(index + answers)]


def strategy_value(
    game: Union[TwoProverGame, KFreeGame],
    profile: StrategyProfile,
) -> float:
    """
    Expected verifier value of a deterministic strategy profile.

    Arguments
    ---------
    game : TwoProverGame | KFreeGame
        The game to evaluate.
    profile : StrategyProfile
        One strategy per player.

    Returns
    -------
    float
        Value in [0, 1].
    """
    game = dense_game(game)
    if isinstance(game, KFreeGame):
        _check_profile(game.question_counts, game.answer_counts, profile)
        value = float(profile_payoffs(game.table, game.k, profile.strategies).mean())
    else:
        _check_profile(
            (game.x_count, game.y_count),
            (game.a_count, game.b_count),
            profile,
        )
        payoffs = profile_payoffs(game.table, 2, profile.strategies)
        value = float((game.weights * payoffs).sum())
    return min(max(value, 0.0), 1.0)


def _oriented(game: TwoProverGame, fixed_player: int):
    """Table and weights with the fixed player's axes first"""
    if fixed_player == 1:
        return game.table, game.weights
    if fixed_player == 2:
        return game.table.transpose(1, 0, 3, 2), game.weights.T
    raise ValueError(f"fixed_player must be 1 or 2, got {fixed_player}")


def best_response(
    game: TwoProverGame,
    fixed_player: int,
    fixed_strategy,
    subset: Optional[Sequence[int]] = None,
) -> BestResponse:
    """
    Best response of the other player against a fixed strategy.

    Each question of the responding player gets the answer maximizing the
    conditional expectation of the verifier given that question, with ties
    broken towards the lowest answer. When ``subset`` is given the fixed
    player's questions are restricted to it and ``fixed_strategy`` lists the
    answers for the subset in order.

    Questions with no probability mass against the (restricted) fixed player
    get answer 0, are reported in ``empty_questions`` and count as accepted.
    """
    game = dense_game(game)
    table, weights = _oriented(game, fixed_player)
    n_fixed = table.shape[0]
    strategy = np.asarray(fixed_strategy, dtype=np.int64).reshape(-1)
    if subset is None:
        rows = np.arange(n_fixed)
    else:
        rows = np.asarray(subset, dtype=np.int64).reshape(-1)
        if len(rows) == 0:
            raise ValueError("subset must be nonempty")
        if rows.min() < 0 or rows.max() >= n_fixed:
            raise DimensionMismatchError(fixed_player, "subset index out of range")
        if len(np.unique(rows)) != len(rows):
            raise ValueError("subset must be duplicate-free")
    if len(strategy) != len(rows):
        raise DimensionMismatchError(
            fixed_player,
            f"strategy covers {len(strategy)} questions, expected {len(rows)}",
        )
    if strategy.min() < 0 or strategy.max() >= table.shape[2]:
        raise DimensionMismatchError(fixed_player, "answer index out of range")

    w = weights[rows]
    # scores[r, b] = sum_q w[q, r] * V(q, r, s(q), b)
    scores = np.einsum("qr,qrb->rb", w, table[rows, :, strategy, :])
    mass = w.sum(axis=0)
    response = np.argmax(scores, axis=1)
    empty = np.flatnonzero(mass <= 0.0)
    response[empty] = 0

    conditional = np.ones(len(mass))
    live = mass > 0.0
    conditional[live] = scores[live, response[live]] / mass[live]
    marginal = weights.sum(axis=0)
    value = float(np.clip((marginal * conditional).sum(), 0.0, 1.0))
    if len(empty):
        logger.debug("%d responder questions have no support", len(empty))
    return BestResponse(response, value, tuple(int(r) for r in empty))


def _pruned_answers(table: np.ndarray, support: np.ndarray):
    """
    Candidate answers per question after removing answers that are
    duplicates of, or dominated by, another answer on the support.
    """
    n_q, _, n_a, _ = table.shape
    candidates = []
    for q in range(n_q):
        rows = table[q][support[q]]  # (R', A, B)
        if rows.shape[0] == 0:
            candidates.append([0])
            continue
        keep = []
        for a in range(n_a):
            removed = False
            for other in range(n_a):
                if other == a:
                    continue
                dominates = np.all(rows[:, other, :] >= rows[:, a, :])
                if not dominates:
                    continue
                reverse = np.all(rows[:, a, :] >= rows[:, other, :])
                if not reverse or other < a:
                    removed = True
                    break
            if not removed:
                keep.append(a)
        candidates.append(keep)
    return candidates


def _exact_chunk(args):
    weighted, choices, counts, start, stop = args
    return kernels.best_strategy_range(weighted, choices, counts, start, stop)


def _enumerate_side(table, weights, support, budget, threads):
    candidates = _pruned_answers(table, support)
    counts = np.array([len(c) for c in candidates], dtype=np.int64)
    choices = np.zeros((len(candidates), int(counts.max())), dtype=np.int64)
    for q, c in enumerate(candidates):
        choices[q, : len(c)] = c
    n_strategies = int(np.prod(counts.astype(object)))
    cost = n_strategies * table.shape[1] * table.shape[3]
    check_budget(cost, budget, what="exact value enumeration")
    weighted = np.ascontiguousarray(table * weights[:, :, None, None])
    n_chunks = 1 if threads == 1 else 4 * threads
    tasks = [
        (weighted, choices, counts, start, stop)
        for start, stop in chunk_ranges(n_strategies, n_chunks)
    ]
    best, best_code = -1.0, 0
    for value, code in parallel_map(_exact_chunk, tasks, threads):
        if value > best:
            best, best_code = value, code
    digits = np.zeros(len(counts), dtype=np.int64)
    kernels.decode(best_code, counts, digits)
    strategy = choices[np.arange(len(counts)), digits]
    return strategy, n_strategies


def exact_value(
    game: TwoProverGame,
    budget: Optional[int] = None,
    threads: int = 1,
) -> GameValue:
    """
    Exact value of a two-prover game.

    One player's strategies are enumerated (the side with fewer strategies
    after dropping dominated answers) and the other player best responds
    per question.

    Arguments
    ---------
    game : TwoProverGame
        The game. Implicit games are materialized first.
    budget : int, optional
        Maximal number of verifier evaluations, by default
        :func:`freegames.utils.default_budget`.
    threads : int
        Number of worker processes. The result does not depend on it.
    """
    if isinstance(game, KFreeGame):
        return exact_value_k(game, budget=budget, threads=threads)
    game = dense_game(game)
    table = game.table
    weights = game.weights
    support = game.support & (weights > 0)

    side_1 = _pruned_answers(table, support)
    side_2 = _pruned_answers(table.transpose(1, 0, 3, 2), support.T)
    size_1 = int(np.prod([len(c) for c in side_1], dtype=object))
    size_2 = int(np.prod([len(c) for c in side_2], dtype=object))
    enumerated = 1 if size_1 <= size_2 else 2
    logger.info(
        "Exact value: enumerating player %d (%d strategies)",
        enumerated,
        min(size_1, size_2),
    )
    if enumerated == 1:
        strategy, _ = _enumerate_side(table, weights, support, budget, threads)
        response = best_response(game, 1, strategy)
        profile = StrategyProfile.of(strategy, response.strategy)
    else:
        strategy, _ = _enumerate_side(
            table.transpose(1, 0, 3, 2),
            weights.T,
            support.T,
            budget,
            threads,
        )
        response = best_response(game, 2, strategy)
        profile = StrategyProfile.of(response.strategy, strategy)
    return GameValue(strategy_value(game, profile), profile, True)


def fix_player(
    table: np.ndarray,
    k: int,
    player: int,
    strategy: np.ndarray,
    subset: Optional[Sequence[int]] = None,
) -> np.ndarray:
    """
    Average a k-player table over one player's questions with that player
    answering according to ``strategy``. The result is the table of the
    (k-1)-player game of the remaining players.

    When ``subset`` is given, only those questions are averaged over and
    ``strategy`` lists the answers for the subset in order.
    """
    moved = np.moveaxis(table, (player, k + player), (0, 1))
    if subset is None:
        rows = np.arange(moved.shape[0])
    else:
        rows = np.asarray(subset, dtype=np.int64)
    strategy = np.asarray(strategy, dtype=np.int64)
    return moved[rows, strategy].mean(axis=0)


def _exact_value_k_table(table, question_counts, answer_counts, budget, threads):
    k = len(question_counts)
    if k == 1:
        strategy = np.argmax(table, axis=1)
        return (strategy,)
    if k == 2:
        result = exact_value(FreeGame.from_table(table), budget=budget, threads=threads)
        return tuple(result.witness.strategies)

    best = -1.0
    best_strategies = None
    for code in range(int(answer_counts[0]) ** int(question_counts[0])):
        strategy = np.array(
            np.unravel_index(code, (answer_counts[0],) * question_counts[0]),
            dtype=np.int64,
        ).reshape(-1)
        reduced = fix_player(table, k, 0, strategy)
        rest = _exact_value_k_table(
            reduced,
            question_counts[1:],
            answer_counts[1:],
            budget,
            threads,
        )
        strategies = (strategy,) + tuple(rest)
        value = float(profile_payoffs(table, k, strategies).mean())
        if value > best:
            best = value
            best_strategies = strategies
    assert best_strategies is not None
    return best_strategies


def exact_value_k(
    game: KFreeGame,
    budget: Optional[int] = None,
    threads: int = 1,
) -> GameValue:
    """
    Exact value of a k-player free game: the strategies of players
    1..k-1 are enumerated and the last player answers each question
    optimally.
    """
    if not isinstance(game, KFreeGame):
        game = as_kfree(game)
    q, a = game.question_counts, game.answer_counts
    cost = q[-1] * a[-1]
    for i in range(game.k - 1):
        cost *= a[i] ** q[i]
    check_budget(cost, budget, what="k-player exact value enumeration")
    strategies = _exact_value_k_table(game.table, q, a, budget, threads)
    profile = StrategyProfile(tuple(strategies))
    return GameValue(strategy_value(game, profile), profile, True)


def _check_subset(subset, size: int, player: int) -> Tuple[int, ...]:
    items = [int(v) for v in subset]
    if not items:
        raise ValueError(f"Subset for player {player} is empty")
    if len(set(items)) != len(items):
        raise ValueError(f"Subset for player {player} has duplicates: {items}")
    if min(items) < 0 or max(items) >= size:
        raise DimensionMismatchError(player, f"subset {items} out of range [0, {size})")
    return tuple(sorted(items))


def restrict_subgame(
    game: Union[TwoProverGame, KFreeGame],
    subsets: Sequence[Sequence[int]],
) -> Subgame:
    """
    Restrict every player's questions to the given subsets.

    The verifier is unchanged on the surviving tuples. The returned
    ``subsets`` are sorted and map subgame question indices back to the
    original game.
    """
    game = dense_game(game)
    if isinstance(game, KFreeGame):
        if len(subsets) != game.k:
            raise DimensionMismatchError(len(subsets), f"expected {game.k} subsets")
        clean = tuple(
            _check_subset(s, n, i + 1)
            for i, (s, n) in enumerate(zip(subsets, game.question_counts))
        )
        table = game.table[np.ix_(*clean)]
        return Subgame(KFreeGame.from_table(table, k=game.k), clean)

    if len(subsets) != 2:
        raise DimensionMismatchError(len(subsets), "expected 2 subsets")
    rows = _check_subset(subsets[0], game.x_count, 1)
    cols = _check_subset(subsets[1], game.y_count, 2)
    table = game.table[np.ix_(rows, cols)]
    dist = game.distribution
    if dist.kind == "uniform_product":
        return Subgame(FreeGame.from_table(table), (rows, cols))
    if dist.kind == "uniform_support":
        mask = game.support[np.ix_(rows, cols)]
        if not mask.any():
            raise ValueError("Restricted game has an empty support")
        new = Distribution.uniform_support(mask)
    else:
        w = game.weights[np.ix_(rows, cols)]
        total = w.sum()
        if total <= 0:
            raise ValueError("Restricted game has zero probability mass")
        new = Distribution.weighted(w / total)
    return Subgame(TwoProverGame.from_table(table, distribution=new), (rows, cols))


def lift_profile(
    profile: StrategyProfile,
    subsets: Sequence[Sequence[int]],
    full_counts: Sequence[int],
    fill: int = 0,
) -> StrategyProfile:
    """Extend a subgame profile to the full game, answering ``fill`` elsewhere"""
    strategies = []
    for s, subset, n in zip(profile, subsets, full_counts):
        full = np.full(n, fill, dtype=np.int64)
        full[np.asarray(subset, dtype=np.int64)] = s
        strategies.append(full)
    return StrategyProfile(tuple(strategies))
