import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from itertools import combinations
from itertools import permutations
from itertools import product
from math import ceil
from math import comb
from math import factorial
from math import lcm
from typing import List
from typing import Optional
from typing import Tuple
from typing import Union

import numpy as np

from .csp import CnfFormula
from .csp import Constraint
from .csp import DenseCsp
from .game import DenseTable
from .game import Distribution
from .game import FreeGame
from .game import KFreeGame
from .game import RuleOracle
from .game import TwoProverGame
from .utils import check_budget
from .utils import colex_subsets
from .utils import DENSE_TABLE_LIMIT
from .utils import unrank_subset

logger = logging.getLogger(__name__)

MAX_KCSP_PLAYERS = 5


def _literal_bits(clause: Tuple[int, int, int]) -> np.ndarray:
    """(8,) mask of the 3-bit answers that satisfy the clause"""
    symbols = np.arange(8)
    satisfied = np.zeros(8, dtype=bool)
    for t, lit in enumerate(clause):
        bit = (symbols >> t) & 1
        satisfied |= bit == (1 if lit > 0 else 0)
    return satisfied


def clause_variable_game(formula: CnfFormula) -> TwoProverGame:
    """
    Clause/variable game of a 3-CNF formula.

    Merlin_1 receives a clause and answers with an assignment to its three
    variables (bit t of the answer is the value of the t-th literal's
    variable). Merlin_2 receives a variable and answers with a bit. The
    question pair is uniform over the pairs (clause, variable in clause) and
    the verifier accepts iff the clause is satisfied and both Merlins agree
    on the shared variable.
    """
    counts = formula.occurrences()
    missing = np.flatnonzero(counts == 0)
    if len(missing):
        raise ValueError(
            f"Variables {(missing + 1).tolist()} do not occur in any clause",
        )
    m, n = formula.n_clauses, formula.n_vars
    table = np.zeros((m, n, 8, 2))
    symbols = np.arange(8)
    for i, clause in enumerate(formula.clauses):
        satisfied = _literal_bits(clause)
        for t, lit in enumerate(clause):
            j = abs(lit) - 1
            bit = (symbols >> t) & 1
            for b in range(2):
                table[i, j, :, b] = satisfied & (bit == b)
    support = formula.incidence() > 0
    return TwoProverGame.from_table(table, Distribution.uniform_support(support))


def _digits(count: int, base: int, length: int) -> np.ndarray:
    """(count, length) digits of 0..count-1, least significant first"""
    codes = np.arange(count)
    return np.stack([(codes // base**t) % base for t in range(length)], axis=1)


@dataclass(frozen=True, eq=False)
class BirthdayGame:
    """
    Free game in which Arthur sends a k-subset of X to Merlin_1 and an
    l-subset of Y to Merlin_2 and accepts iff the base verifier accepts on
    every pair of the two subsets that lies in the base support.

    Subset questions are numbered by colex rank, and answer ``a`` for a
    k-subset carries the answer for its t-th smallest element in digit t
    (base |A|, least significant first).
    """

    base: TwoProverGame
    k: int
    l: int  # noqa: E741

    def __post_init__(self):
        base = self.base
        if base.distribution.kind == "weighted":
            raise ValueError(
                "Birthday repetition needs a uniform distribution over a support",
            )
        if not base.is_boolean:
            raise ValueError("Birthday repetition needs a {0, 1}-valued verifier")
        if not 1 <= self.k <= base.x_count:
            raise ValueError(f"k must be in [1, {base.x_count}], got {self.k}")
        if not 1 <= self.l <= base.y_count:
            raise ValueError(f"l must be in [1, {base.y_count}], got {self.l}")

    @cached_property
    def left_subsets(self) -> List[Tuple[int, ...]]:
        return colex_subsets(self.base.x_count, self.k)

    @cached_property
    def right_subsets(self) -> List[Tuple[int, ...]]:
        return colex_subsets(self.base.y_count, self.l)

    @property
    def x_count(self) -> int:
        return comb(self.base.x_count, self.k)

    @property
    def y_count(self) -> int:
        return comb(self.base.y_count, self.l)

    @property
    def a_count(self) -> int:
        return self.base.a_count**self.k

    @property
    def b_count(self) -> int:
        return self.base.b_count**self.l

    @property
    def shape(self) -> Tuple[int, int, int, int]:
        return (self.x_count, self.y_count, self.a_count, self.b_count)

    @property
    def table_size(self) -> int:
        return self.x_count * self.y_count * self.a_count * self.b_count

    def question_subsets(self, i: int, j: int) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
        """Base questions behind the subset questions ``i`` and ``j``"""
        if not (0 <= i < self.x_count and 0 <= j < self.y_count):
            raise IndexError(f"Question pair ({i}, {j}) out of range for shape {self.shape}")
        return unrank_subset(i, self.k), unrank_subset(j, self.l)

    def evaluate(self, i: int, j: int, a: int, b: int) -> float:
        left, right = self.question_subsets(i, j)
        base = self.base
        support = base.support
        for s, x in enumerate(left):
            a_x = (a // base.a_count**s) % base.a_count
            for t, y in enumerate(right):
                if not support[x, y]:
                    continue
                b_y = (b // base.b_count**t) % base.b_count
                if base.table[x, y, a_x, b_y] < 1.0:
                    return 0.0
        return 1.0

    @property
    def verifier(self) -> RuleOracle:
        return RuleOracle(self.evaluate, self.shape, cost=self.k * self.l)

    def materialize(self, limit: Optional[int] = None) -> FreeGame:
        """
        Dense free game. ``limit`` caps the number of table entries, by default
        ``DENSE_TABLE_LIMIT``. It is independent of the evaluation budget.
        """
        limit = DENSE_TABLE_LIMIT if limit is None else limit
        check_budget(self.table_size, limit, what="birthday game materialization")
        base = self.base
        left = np.array(self.left_subsets, dtype=np.int64)
        right = np.array(self.right_subsets, dtype=np.int64)
        da = _digits(self.a_count, base.a_count, self.k)
        db = _digits(self.b_count, base.b_count, self.l)
        accept = base.table >= 1.0
        support = base.support
        result = np.ones(self.shape, dtype=bool)
        for s in range(self.k):
            xs = left[:, s]
            for t in range(self.l):
                yt = right[:, t]
                hit = accept[
                    xs[:, None, None, None],
                    yt[None, :, None, None],
                    da[None, None, :, s, None],
                    db[None, None, None, :, t],
                ]
                outside = ~support[np.ix_(xs, yt)]
                result &= hit | outside[:, :, None, None]
        return FreeGame.from_table(result.astype(np.float64))


def birthday_repetition(base: TwoProverGame, k: int, l: int) -> BirthdayGame:  # noqa: E741
    """Birthday repetition of a {0, 1}-valued game, kept implicit"""
    return BirthdayGame(base, k, l)


def _combine(left: np.ndarray, right: np.ndarray, op) -> np.ndarray:
    """Combine two (X, Y, A, B) tables coordinate-wise into a product game"""
    outer = op.outer(left, right)
    x1, y1, a1, b1 = left.shape
    x2, y2, a2, b2 = right.shape
    return outer.transpose(0, 4, 1, 5, 2, 6, 3, 7).reshape(
        x1 * x2,
        y1 * y2,
        a1 * a2,
        b1 * b2,
    )


def _repeated_distribution(base: TwoProverGame, m: int) -> Distribution:
    kind = base.distribution.kind
    if kind == "uniform_product":
        return Distribution.uniform_product()
    if kind == "uniform_support":
        mask = base.support
        result = mask
        for _ in range(m - 1):
            result = np.logical_and.outer(result, mask).transpose(0, 2, 1, 3)
            result = result.reshape(result.shape[0] * result.shape[1], -1)
        return Distribution.uniform_support(result)
    weights = base.weights
    result = weights
    for _ in range(m - 1):
        result = np.multiply.outer(result, weights).transpose(0, 2, 1, 3)
        result = result.reshape(result.shape[0] * result.shape[1], -1)
    return Distribution.weighted(result / result.sum())


def _repeated_size(base: TwoProverGame, m: int) -> int:
    return int(np.prod([v**m for v in base.shape], dtype=object))


def parallel_repetition(
    base: TwoProverGame,
    m: int,
    budget: Optional[int] = None,
) -> TwoProverGame:
    """
    m-fold parallel repetition. Question and answer tuples are numbered in
    row-major order with the first coordinate most significant.
    """
    if m < 1:
        raise ValueError(f"m must be at least 1, got {m}")
    check_budget(_repeated_size(base, m), budget, what="parallel repetition table")
    table = base.table
    for _ in range(m - 1):
        table = _combine(table, base.table, np.multiply)
    if base.is_free:
        return FreeGame.from_table(table)
    return TwoProverGame.from_table(table, _repeated_distribution(base, m))


def _as_fraction(threshold: Union[Fraction, float, int, str]) -> Fraction:
    if isinstance(threshold, float):
        return Fraction(threshold).limit_denominator(10**6)
    return Fraction(threshold)


def threshold_repetition(
    base: TwoProverGame,
    N: int,
    threshold: Union[Fraction, float, int, str],
    budget: Optional[int] = None,
) -> TwoProverGame:
    """
    N parallel copies of a {0, 1}-valued game where the Merlins win iff they
    win at least ``ceil(threshold * N)`` of the copies.
    """
    if N < 1:
        raise ValueError(f"N must be at least 1, got {N}")
    fraction = _as_fraction(threshold)
    if not 0 <= fraction <= 1:
        raise ValueError(f"threshold must be in [0, 1], got {threshold}")
    if not base.is_boolean:
        raise ValueError("Threshold repetition needs a {0, 1}-valued verifier")
    check_budget(_repeated_size(base, N), budget, what="threshold repetition table")
    need = ceil(fraction * N)
    wins = base.table.astype(np.int64)
    counts = wins
    for _ in range(N - 1):
        counts = _combine(counts, wins, np.add)
    table = (counts >= need).astype(np.float64)
    distribution = _repeated_distribution(base, N)
    if base.is_free:
        return FreeGame.from_table(table)
    return TwoProverGame.from_table(table, distribution)


def free_to_2csp(game: TwoProverGame, budget: Optional[int] = None) -> DenseCsp:
    """
    2-CSP encoding of a free game.

    Each question of Merlin_1 is duplicated ``lcm(|X|, |Y|) / |X|`` times and
    each question of Merlin_2 ``lcm / |Y|`` times so both sides have the same
    number of variables. Variables ``0..L-1`` are Merlin_1's and ``L..2L-1``
    Merlin_2's. Symbols ``0..|A|-1`` are Merlin_1 answers and
    ``|A|..|A|+|B|-1`` Merlin_2 answers; a constraint joins every pair of
    opposite variables and pays nothing on mistyped symbols.
    """
    if not game.is_free:
        raise TypeError("free_to_2csp needs a free game")
    X, Y, A, B = game.shape
    L = lcm(X, Y)
    r1, r2 = L // X, L // Y
    sigma = A + B
    check_budget(L * L * sigma * sigma, budget, what="2-CSP encoding")
    table = game.table
    payoffs = {}
    for x in range(X):
        for y in range(Y):
            payoff = np.zeros((sigma, sigma))
            payoff[:A, A:] = table[x, y]
            payoffs[x, y] = payoff
    constraints = []
    for x in range(X):
        for p in range(r1):
            for y in range(Y):
                for q in range(r2):
                    constraints.append(
                        Constraint((x * r1 + p, L + y * r2 + q), 1.0, payoffs[x, y]),
                    )
    return DenseCsp(2 * L, sigma, 2, tuple(constraints))


def kfree_to_kcsp(
    game: KFreeGame,
    sampling: str = "distinct",
    budget: Optional[int] = None,
) -> DenseCsp:
    """
    k-CSP encoding of a k-player free game.

    There is one variable per question tuple, numbered in row-major order,
    whose symbol encodes one answer per player (row-major over the answer
    counts).

    With ``sampling="distinct"`` there is one constraint per set of k
    distinct tuples, ordered by rank, paying the verifier along the diagonal
    averaged over all k! orderings. With ``sampling="independent"`` there is
    one constraint per ordered k-tuple of tuples with repetitions allowed;
    repeated tuples are padded with ``k - 1`` extra variables that the payoff
    ignores.
    """
    if not isinstance(game, KFreeGame):
        raise TypeError("kfree_to_kcsp needs a KFreeGame")
    k = game.k
    if k < 2:
        raise ValueError("kfree_to_kcsp needs at least 2 players")
    if k > MAX_KCSP_PLAYERS:
        raise ValueError(f"kfree_to_kcsp supports at most {MAX_KCSP_PLAYERS} players")
    if sampling not in ("distinct", "independent"):
        raise ValueError(f"Unknown sampling {sampling!r}")

    tuples = list(np.ndindex(*game.question_counts))
    n_tuples = len(tuples)
    sigma = int(np.prod(game.answer_counts))
    if sampling == "distinct":
        if n_tuples < k:
            raise ValueError(f"Need at least {k} question tuples, got {n_tuples}")
        n_constraints = comb(n_tuples, k)
        per_constraint = factorial(k) * sigma**k
    else:
        n_constraints = n_tuples**k
        per_constraint = sigma**k
    check_budget(n_constraints * per_constraint, budget, what="k-CSP encoding")

    table = game.table
    answers = np.array(np.unravel_index(np.arange(sigma), game.answer_counts))
    symbols = np.indices((sigma,) * k)

    def diagonal(chosen, positions):
        # verifier when player i sees chosen[i] and reads the symbol at positions[i]
        questions = tuple(tuples[chosen[i]][i] for i in range(k))
        replies = tuple(answers[i][symbols[positions[i]]] for i in range(k))
        return table[questions + replies]

    constraints = []
    if sampling == "distinct":
        orderings = list(permutations(range(k)))
        for group in combinations(range(n_tuples), k):
            payoff = np.zeros((sigma,) * k)
            for sigma_order in orderings:
                chosen = [group[sigma_order[i]] for i in range(k)]
                payoff += diagonal(chosen, sigma_order)
            payoff /= len(orderings)
            constraints.append(Constraint(tuple(group), 1.0, payoff))
        n_vars = n_tuples
    else:
        padding = list(range(n_tuples, n_tuples + k - 1))
        for chosen in product(range(n_tuples), repeat=k):
            scope: List[int] = []
            for t in chosen:
                if t not in scope:
                    scope.append(t)
            positions = [scope.index(t) for t in chosen]
            scope += padding[: k - len(scope)]
            constraints.append(Constraint(tuple(scope), 1.0, diagonal(chosen, positions)))
        n_vars = n_tuples + k - 1
    logger.info("k-CSP encoding: %d variables, %d constraints", n_vars, len(constraints))
    return DenseCsp(n_vars, sigma, k, tuple(constraints))


def counterexample_game(n: int) -> FreeGame:
    """Free game on [n]^4 that the Merlins lose iff Merlin_1 gets question 0"""
    if n < 2:
        raise ValueError(f"n must be at least 2, got {n}")
    table = np.ones((n, n, n, n))
    table[0] = 0.0
    return FreeGame.from_table(table)


def xor_game() -> FreeGame:
    """Win iff a xor b equals x and y; value 3/4"""
    table = np.zeros((2, 2, 2, 2))
    for x, y, a, b in np.ndindex(2, 2, 2, 2):
        table[x, y, a, b] = float((a ^ b) == (x & y))
    return FreeGame.from_table(table)


def question_guessing_game(n: int) -> FreeGame:
    """Each Merlin must name the other Merlin's question"""
    if n < 1:
        raise ValueError(f"n must be positive, got {n}")
    table = np.zeros((n, n, n, n))
    for x in range(n):
        for y in range(n):
            table[x, y, y, x] = 1.0
    return FreeGame.from_table(table)


def support_form(game: TwoProverGame) -> TwoProverGame:
    """The same game with the uniform distribution written as a full support"""
    if not game.is_free:
        return game
    support = np.ones((game.x_count, game.y_count), dtype=bool)
    return TwoProverGame(
        *game.shape,
        Distribution.uniform_support(support),
        DenseTable(game.table),
    )


def guessing_bound(game: TwoProverGame, k: int, l: int) -> float:  # noqa: E741
    """max(|A|^-k, |B|^-l)"""
    return max(float(game.a_count) ** -k, float(game.b_count) ** -l)


def random_free_game(
    x: int,
    y: int,
    a: int,
    b: int,
    seed: Optional[int] = None,
    boolean: bool = False,
) -> FreeGame:
    rng = np.random.default_rng(seed)
    if boolean:
        table = rng.integers(0, 2, size=(x, y, a, b)).astype(np.float64)
    else:
        table = rng.random((x, y, a, b))
    return FreeGame.from_table(table)


def random_kfree_game(
    question_counts,
    answer_counts,
    seed: Optional[int] = None,
    boolean: bool = False,
) -> KFreeGame:
    rng = np.random.default_rng(seed)
    shape = tuple(question_counts) + tuple(answer_counts)
    if boolean:
        table = rng.integers(0, 2, size=shape).astype(np.float64)
    else:
        table = rng.random(shape)
    return KFreeGame.from_table(table, k=len(question_counts))


def random_formula(
    n_vars: int,
    n_clauses: int,
    seed: Optional[int] = None,
) -> CnfFormula:
    """Random 3-CNF formula in which every variable occurs"""
    if n_vars < 3:
        raise ValueError("Need at least 3 variables")
    if 3 * n_clauses < n_vars:
        raise ValueError("Too few clauses for every variable to occur")
    rng = np.random.default_rng(seed)
    while True:
        clauses = []
        for _ in range(n_clauses):
            variables = rng.choice(n_vars, size=3, replace=False) + 1
            signs = rng.choice([-1, 1], size=3)
            clauses.append(tuple(int(v) for v in variables * signs))
        formula = CnfFormula(n_vars, tuple(clauses))  # type: ignore
        if np.all(formula.occurrences() > 0):
            return formula

