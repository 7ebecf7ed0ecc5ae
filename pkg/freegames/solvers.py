import logging
from collections import namedtuple
from itertools import combinations
from itertools import product
from math import ceil
from math import comb
from math import floor
from math import log
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Union

import numpy as np

from . import kernels
from .game import as_kfree
from .game import dense_game
from .game import exact_value_k
from .game import fix_player
from .game import KFreeGame
from .game import profile_payoffs
from .game import restrict_subgame
from .game import strategy_value
from .game import StrategyProfile
from .game import TwoProverGame
from .utils import check_budget
from .utils import chunk_ranges
from .utils import parallel_map
from .utils import PromiseViolationError
from .utils import random_subset
from .utils import spawn_generators

logger = logging.getLogger(__name__)

EstimateReport = namedtuple(
    "EstimateReport",
    "lower_bound, estimate, epsilon, witness, kappa, sampled_sets, mode, seed, best_subset",
)
DecisionReport = namedtuple(
    "DecisionReport",
    "verdict, certificate, trace, kappa, candidates, pruned, best_value, "
    "sampled_sets, mode, seed",
)
SubsampleReport = namedtuple(
    "SubsampleReport",
    "mean, kappa, n_subsets, stderr, mode, seed",
)

VALUE_ONE = "value-one"
BELOW_GAP = "value-below-gap"
DETERMINISTIC = "deterministic"
RANDOMIZED = "randomized"
HEURISTIC = "randomized-heuristic"

# slack for rounding in the promise checks
PROMISE_TOL = 1e-9


def _check_unit(name: str, value: float) -> None:
    if not 0.0 < value < 1.0:
        raise ValueError(f"{name} must be in (0, 1), got {value}")


def _clamp(kappa: int, size: int) -> int:
    return max(1, min(int(kappa), int(size)))


def kappa_estimate(epsilon: float, y_count: int, b_count: int, x_count: int) -> int:
    """``ceil(ln(6|Y||B|) / eps^2)`` clamped to ``[1, |X|]``"""
    _check_unit("epsilon", epsilon)
    return _clamp(ceil(log(6 * y_count * b_count) / epsilon**2), x_count)


def kappa_gap(epsilon: float, y_count: int, b_count: int, x_count: int) -> int:
    """Smallest kappa with ``(1 - eps)^kappa < 1 / (3|Y||B|)``, clamped to |X|"""
    _check_unit("epsilon", epsilon)
    return _clamp(floor(log(3 * y_count * b_count) / -log(1 - epsilon)) + 1, x_count)


def kappa_delta(delta: float, y_count: int, b_count: int, x_count: int) -> int:
    """Smallest kappa with ``delta^kappa < 1 / (3|Y||B|)``, clamped to |X|"""
    _check_unit("delta", delta)
    return _clamp(floor(log(3 * y_count * b_count) / log(1 / delta)) + 1, x_count)


def _digits(code: int, base: int, length: int) -> np.ndarray:
    """Digits of ``code``, most significant first"""
    digits = np.zeros(length, dtype=np.int64)
    kernels.decode(code, np.full(length, base, dtype=np.int64), digits)
    return digits


def _sweep_task(args):
    table, weights, subsets = args
    out = []
    for subset in subsets:
        best, code, perfect = kernels.sweep_subset(
            table,
            weights,
            np.asarray(subset, dtype=np.int64),
        )
        out.append((float(best), int(code), int(perfect)))
    return out


def _induced_profile(game: TwoProverGame, subset, alpha) -> StrategyProfile:
    """
    Profile induced by answers ``alpha`` on ``subset``: Merlin_2 best responds
    on the subset and Merlin_1 best responds to that. Sums are accumulated in
    the same order as the enumeration kernels so ties resolve identically.
    """
    table, weights = game.table, game.weights
    scores = np.zeros((game.y_count, game.b_count))
    for x, a in zip(subset, alpha):
        scores = scores + weights[x][:, None] * table[x, :, a, :]
    second = np.argmax(scores, axis=1)
    totals = np.zeros((game.x_count, game.a_count))
    for y in range(game.y_count):
        totals = totals + weights[:, y, None] * table[:, y, :, second[y]]
    first = np.argmax(totals, axis=1)
    return StrategyProfile.of(first, second)


def _lifted_profile(game: TwoProverGame, subset, alpha) -> StrategyProfile:
    """
    Profile scored by the perfect-profile search for answers ``alpha`` on
    ``subset``. Mirrors the leaf step of :func:`kernels.search_perfect`.
    """
    table, weights = game.table, game.weights
    allowed = np.ones((game.y_count, game.b_count), dtype=bool)
    for x, a in zip(subset, alpha):
        allowed &= (weights[x][:, None] == 0) | (table[x, :, a, :] >= 1.0)
    response = np.argmax(allowed, axis=1)
    totals = np.zeros((game.x_count, game.a_count))
    for y in range(game.y_count):
        totals = totals + weights[:, y, None] * table[:, y, :, response[y]]
    first = np.argmax(totals, axis=1)
    scores = np.zeros((game.y_count, game.b_count))
    for x in range(game.x_count):
        scores = scores + weights[x][:, None] * table[x, :, first[x], :]
    second = np.argmax(scores, axis=1)
    return StrategyProfile.of(first, second)


def _choose_subsets(x_count: int, kappa: int, seed: Optional[int]):
    if seed is None:
        return list(combinations(range(x_count), kappa))
    (rng,) = spawn_generators(seed, 1)
    return [random_subset(rng, x_count, kappa)]


def _short_questions(hits: np.ndarray, weights: np.ndarray, threshold: float) -> List[int]:
    """
    Questions (columns) on which the profile loses, but on less than a
    ``threshold`` share of the weight
    """
    mass = weights.sum(axis=0)
    lost = np.where(hits, 0.0, weights).sum(axis=0)
    share = np.divide(lost, mass, out=np.zeros_like(lost), where=mass > 0)
    return np.flatnonzero((share > 0) & (share < threshold - PROMISE_TOL)).tolist()


def _check_promise(value: float, short: List[int], promise: str, strict: bool) -> None:
    if not short:
        return
    msg = (
        f"Accepted a profile of value {value:.6g} that loses on too few "
        f"questions for {short[:8]}, which violates the promise {promise}"
    )
    if strict:
        raise PromiseViolationError(value, msg)
    logger.warning(msg)


def _estimate(
    game: TwoProverGame,
    epsilon: float,
    seed: Optional[int],
    kappa: Optional[int],
    budget: Optional[int],
    threads: int,
) -> EstimateReport:
    game = dense_game(game)
    X, Y, A, B = game.shape
    if not game.is_free:
        logger.warning("Estimator guarantees only hold for free games")
    if kappa is None:
        kappa = kappa_estimate(epsilon, Y, B, X)
    else:
        _check_unit("epsilon", epsilon)
        kappa = _clamp(kappa, X)
    n_subsets = comb(X, kappa) if seed is None else 1
    cost = n_subsets * A**kappa * (kappa * Y * B + X * A * Y)
    check_budget(cost, budget, what="free game estimator")
    logger.info("Estimator: kappa = %d over %d subsets", kappa, n_subsets)

    subsets = _choose_subsets(X, kappa, seed)
    table = np.ascontiguousarray(game.table)
    weights = np.ascontiguousarray(game.weights)
    tasks = [(table, weights, subsets[a:b]) for a, b in chunk_ranges(len(subsets), 4 * threads)]
    results = [r for chunk in parallel_map(_sweep_task, tasks, threads) for r in chunk]

    best, best_index, best_code = -1.0, 0, 0
    for index, (value, code, _) in enumerate(results):
        if value > best:
            best, best_index, best_code = value, index, code
    subset = subsets[best_index]
    alpha = _digits(best_code, A, kappa)
    witness = _induced_profile(game, subset, alpha)
    lower = strategy_value(game, witness)
    return EstimateReport(
        lower_bound=lower,
        estimate=min(lower + epsilon, 1.0),
        epsilon=epsilon,
        witness=witness,
        kappa=kappa,
        sampled_sets=n_subsets if seed is None else [list(s) for s in subsets],
        mode=DETERMINISTIC if seed is None else RANDOMIZED,
        seed=seed,
        best_subset=list(subset),
    )


def est_deterministic(
    game: TwoProverGame,
    epsilon: float,
    kappa: Optional[int] = None,
    budget: Optional[int] = None,
    threads: int = 1,
) -> EstimateReport:
    """
    Estimate the value of a free game within ``epsilon``.

    Every kappa-subset S of Merlin_1's questions and every assignment of
    answers on S is tried. Merlin_2 best responds to the assignment on S,
    Merlin_1 best responds to that on all questions, and the best induced
    profile gives the lower bound W. The estimate is ``min(W + epsilon, 1)``.

    Arguments
    ---------
    game : TwoProverGame
        A free game.
    epsilon : float
        Additive error in (0, 1).
    kappa : int, optional
        Subset size. By default ``ceil(ln(6|Y||B|) / epsilon^2)`` clamped
        to |X|.
    budget : int, optional
        Evaluation budget.
    threads : int
        Worker processes, the result does not depend on it.
    """
    return _estimate(game, epsilon, None, kappa, budget, threads)


def est_randomized(
    game: TwoProverGame,
    epsilon: float,
    seed: int = 0,
    kappa: Optional[int] = None,
    budget: Optional[int] = None,
    threads: int = 1,
) -> EstimateReport:
    """Same as :func:`est_deterministic` on a single random subset"""
    if seed is None:
        raise ValueError("est_randomized needs a seed")
    return _estimate(game, epsilon, seed, kappa, budget, threads)


def _search_task(args):
    table, weights, subsets = args
    out = []
    for subset in subsets:
        result = kernels.search_perfect(table, weights, np.asarray(subset, dtype=np.int64))
        out.append(tuple(int(v) if i != 1 else float(v) for i, v in enumerate(result)))
        if result[0] >= 0:
            break
    return out


def _decide(
    game: TwoProverGame,
    kappa: int,
    accepts: Callable[[float], bool],
    lost_share: float,
    promise: str,
    seed: Optional[int],
    budget: Optional[int],
    threads: int,
    trace_limit: int,
    strict: bool,
) -> DecisionReport:
    X, Y, A, B = game.shape
    n_subsets = comb(X, kappa) if seed is None else 1
    check_budget(n_subsets * A**kappa, budget, what="value-one decider")
    if seed is not None:
        logger.warning("Single-subset decider is a heuristic without a guarantee")
    logger.info("Decider: kappa = %d over %d subsets", kappa, n_subsets)

    subsets = _choose_subsets(X, kappa, seed)
    table = np.ascontiguousarray(game.table)
    weights = np.ascontiguousarray(game.weights)
    if threads == 1:
        results = _search_task((table, weights, subsets))
    else:
        tasks = [
            (table, weights, subsets[a:b])
            for a, b in chunk_ranges(len(subsets), 4 * threads)
        ]
        results = []
        for chunk in parallel_map(_search_task, tasks, threads):
            results.extend(chunk)
            if chunk and chunk[-1][0] >= 0:
                break

    candidates = sum(r[3] for r in results)
    pruned = sum(r[4] for r in results)
    mode = DETERMINISTIC if seed is None else HEURISTIC
    sampled = n_subsets if seed is None else [list(s) for s in subsets]

    last = results[-1]
    if last[0] >= 0:
        subset = subsets[len(results) - 1]
        alpha = _digits(last[0], A, kappa)
        profile = _lifted_profile(game, subset, alpha)
        return DecisionReport(
            VALUE_ONE,
            profile,
            [],
            kappa,
            candidates,
            pruned,
            1.0,
            sampled,
            mode,
            seed,
        )

    best, best_index = 0.0, -1
    for index, r in enumerate(results):
        if r[2] >= 0 and (best_index < 0 or r[1] > results[best_index][1]):
            best_index = index
    if best_index >= 0:
        _, _, code, *_ = results[best_index]
        profile = _lifted_profile(game, subsets[best_index], _digits(code, A, kappa))
        best = strategy_value(game, profile)
        if accepts(best):
            # any profile above the gap means omega = 1 under the promise
            hits = game.table[
                np.arange(X)[:, None],
                np.arange(Y)[None, :],
                profile[0][:, None],
                profile[1][None, :],
            ] >= 1.0
            _check_promise(best, _short_questions(hits, game.weights, lost_share), promise, strict)
            return DecisionReport(
                VALUE_ONE,
                profile,
                [],
                kappa,
                candidates,
                pruned,
                best,
                sampled,
                mode,
                seed,
            )

    trace = []
    for subset, r in zip(subsets, results):
        if len(trace) >= trace_limit:
            break
        _, value, code, _, _, fx, fy, fa, fb = r
        # best leaf on this subset, if the search reached one
        alpha = None if code < 0 else _digits(code, A, kappa).tolist()
        trace.append(
            {
                "subset": list(subset),
                "alpha": alpha,
                "value": None if code < 0 else value,
                "x": fx,
                "y": fy,
                "a": fa,
                "b": None if fb < 0 else fb,
            },
        )
    return DecisionReport(
        BELOW_GAP,
        None,
        trace,
        kappa,
        candidates,
        pruned,
        best,
        sampled,
        mode,
        seed,
    )


def decide_one_vs_gap(
    game: TwoProverGame,
    epsilon: float,
    seed: Optional[int] = None,
    kappa: Optional[int] = None,
    budget: Optional[int] = None,
    threads: int = 1,
    trace_limit: int = 64,
    strict: bool = False,
) -> DecisionReport:
    """
    Decide between value 1 and value at most ``1 - epsilon``.

    All kappa-subsets are searched for an assignment whose lifted profile is
    perfect. Without one, the best lifted profile is still accepted when its
    value is above ``1 - epsilon``, since under the promise that forces
    value 1. Passing ``seed`` searches one random subset instead, which is a
    heuristic.

    An accepted profile that loses on some second-player question, but on
    less than an ``epsilon`` share of it, contradicts the promise. With
    ``strict`` this raises :class:`PromiseViolationError`, otherwise it is
    logged.
    """
    game = dense_game(game)
    X, Y, A, B = game.shape
    if kappa is None:
        kappa = kappa_gap(epsilon, Y, B, X)
    else:
        _check_unit("epsilon", epsilon)
        kappa = _clamp(kappa, X)
    return _decide(
        game,
        kappa,
        lambda w: w > 1 - epsilon + PROMISE_TOL,
        epsilon,
        f"omega = 1 or omega <= {1 - epsilon:.6g}",
        seed,
        budget,
        threads,
        trace_limit,
        strict,
    )


def decide_one_vs_delta(
    game: TwoProverGame,
    delta: float,
    seed: Optional[int] = None,
    kappa: Optional[int] = None,
    budget: Optional[int] = None,
    threads: int = 1,
    trace_limit: int = 64,
    strict: bool = False,
) -> DecisionReport:
    """Decide between value 1 and value below ``delta``, accepting at ``delta``"""
    game = dense_game(game)
    X, Y, A, B = game.shape
    if kappa is None:
        kappa = kappa_delta(delta, Y, B, X)
    else:
        _check_unit("delta", delta)
        kappa = _clamp(kappa, X)
    return _decide(
        game,
        kappa,
        lambda w: w >= delta - PROMISE_TOL,
        1 - delta,
        f"omega = 1 or omega < {delta:.6g}",
        seed,
        budget,
        threads,
        trace_limit,
        strict,
    )


def _level_kappas(
    question_counts: Sequence[int],
    answer_counts: Sequence[int],
    step: float,
    constant: float,
    squared: bool,
) -> List[int]:
    """kappa for the player peeled off when ``l`` players remain, l = 2..k"""
    kappas = []
    for level in range(2, len(question_counts) + 1):
        logs = constant + sum(
            log(question_counts[i] * answer_counts[i]) for i in range(level - 1)
        )
        scale = step**-2 if squared else 1 / step
        kappas.append(_clamp(ceil(scale * logs), question_counts[level - 1]))
    return kappas


def _level_sizes(question_counts, answer_counts, kappas, randomized: bool) -> Dict[str, int]:
    sizes = {}
    for level in range(len(question_counts), 1, -1):
        kappa = kappas[level - 2]
        n_sets = 1 if randomized else comb(question_counts[level - 1], kappa)
        sizes[f"level_{level}"] = n_sets * answer_counts[level - 1] ** kappa
    return sizes


def _resolve_kappas(kappas, question_counts, default: List[int]) -> List[int]:
    if kappas is None:
        return default
    kappas = [int(v) for v in kappas]
    if len(kappas) != len(question_counts) - 1:
        raise ValueError(
            f"Expected {len(question_counts) - 1} kappas, one per peeled player, "
            f"got {len(kappas)}",
        )
    if min(kappas, default=1) < 1:
        raise ValueError(f"kappas must be positive, got {kappas}")
    return [_clamp(v, question_counts[i]) for i, v in enumerate(kappas, start=1)]


def _best_response_k(table: np.ndarray, k: int, strategies, player: int) -> np.ndarray:
    """Best answers of ``player`` against the other entries of ``strategies``"""
    reduced = table
    remaining = k
    for i, s in enumerate(strategies):
        if i == player:
            continue
        reduced = fix_player(reduced, remaining, 0 if i < player else 1, s)
        remaining -= 1
    return np.argmax(reduced, axis=1)


def _peel(table, question_counts, answer_counts, kappas, streams, refine=False):
    """
    Returns ``(strategies, value, candidates)`` for the game in ``table``.
    The last player is peeled off over every (subset, assignment) pair, or
    over one subset per call drawn from ``streams[level]`` when sampling.
    With ``refine`` every candidate profile gets one round of best responses.
    """
    k = len(question_counts)
    if k == 1:
        strategy = np.argmax(table, axis=1)
        return (strategy,), float(table.max(axis=1).mean()), 1

    kappa = kappas[k - 2]
    n_last = question_counts[-1]
    b_last = answer_counts[-1]
    if streams is None:
        subsets = combinations(range(n_last), kappa)
    else:
        subsets = [random_subset(streams[k - 2], n_last, kappa)]

    best = -1.0
    best_strategies = None
    candidates = 0
    for subset in subsets:
        for alpha in product(range(b_last), repeat=kappa):
            reduced = fix_player(table, k, k - 1, np.array(alpha), subset=subset)
            rest, _, inner = _peel(
                reduced,
                question_counts[:-1],
                answer_counts[:-1],
                kappas,
                streams,
                refine,
            )
            candidates += inner
            strategies = list(rest) + [None]
            strategies[-1] = _best_response_k(table, k, strategies, k - 1)
            if refine:
                for player in range(k):
                    strategies[player] = _best_response_k(table, k, strategies, player)
            strategies = tuple(strategies)
            payoffs = profile_payoffs(table, k, strategies)
            value = float(payoffs.mean())
            if value > best:
                best, best_strategies = value, strategies
            if payoffs.min() >= 1.0:
                return strategies, 1.0, candidates
    assert best_strategies is not None
    return best_strategies, best, candidates


def _prepare_k(game, epsilon):
    game = as_kfree(dense_game(game))
    _check_unit("epsilon", epsilon)
    return game


def _level_streams(seed: Optional[int], k: int):
    return None if seed is None else spawn_generators(seed, k - 1)


def est_k(
    game: Union[KFreeGame, TwoProverGame],
    epsilon: float,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
    kappas: Optional[Sequence[int]] = None,
) -> EstimateReport:
    """
    Estimate the value of a k-player free game within ``epsilon`` by peeling
    off the players one at a time.

    For the last player every subset S of size kappa and every assignment on
    S is tried; the verifier averaged over S gives a game with one player
    less, which is solved recursively. The last player then best responds on
    all questions. With one player left the optimum is taken per question.

    The error budget is ``epsilon / k`` per level, and kappa for the player
    peeled off with l players left is
    ``ceil((ln 6 + sum_{i<l} ln(|Y_i||B_i|)) / (epsilon / k)^2)``. ``kappas``
    overrides these, listed for l = 2..k. Passing ``seed`` samples a single
    subset per level, which is a heuristic.
    """
    game = _prepare_k(game, epsilon)
    q, a = game.question_counts, game.answer_counts
    step = epsilon / game.k
    kappas = _resolve_kappas(kappas, q, _level_kappas(q, a, step, log(6), squared=True))
    sizes = _level_sizes(q, a, kappas, seed is not None)
    cost = int(np.prod(list(sizes.values()), dtype=object) or 1) * game.table.size
    check_budget(cost, budget, what="k-player estimator", breakdown=sizes)
    for name, size in sizes.items():
        logger.debug("est_k %s: %d candidates", name, size)
    if seed is not None:
        logger.warning("Sampled k-player estimator is a heuristic without a guarantee")

    strategies, _, candidates = _peel(game.table, q, a, kappas, _level_streams(seed, game.k))
    witness = StrategyProfile(tuple(strategies))
    lower = strategy_value(game, witness)
    return EstimateReport(
        lower_bound=lower,
        estimate=min(lower + epsilon, 1.0),
        epsilon=epsilon,
        witness=witness,
        kappa=kappas,
        sampled_sets=candidates,
        mode=DETERMINISTIC if seed is None else HEURISTIC,
        seed=seed,
        best_subset=None,
    )


def est_k_perfect(
    game: Union[KFreeGame, TwoProverGame],
    epsilon: float,
    seed: Optional[int] = None,
    budget: Optional[int] = None,
    kappas: Optional[Sequence[int]] = None,
    strict: bool = False,
) -> DecisionReport:
    """
    Decide between value 1 and value at most ``1 - epsilon`` for a k-player
    free game. Uses the peeling recursion with
    ``kappa = ceil((ln 3 + sum_{i<l} ln(|Y_i||B_i|)) / (epsilon / k^2))``
    and a round of best responses on every candidate.

    The best profile is accepted when it is perfect or its value is above
    ``1 - epsilon``. ``strict`` works as in :func:`decide_one_vs_gap`, with
    the share of lost question tuples taken per question of the last player.
    """
    game = _prepare_k(game, epsilon)
    q, a = game.question_counts, game.answer_counts
    step = epsilon / game.k**2
    kappas = _resolve_kappas(kappas, q, _level_kappas(q, a, step, log(3), squared=False))
    sizes = _level_sizes(q, a, kappas, seed is not None)
    cost = int(np.prod(list(sizes.values()), dtype=object) or 1) * game.table.size
    check_budget(cost, budget, what="k-player decider", breakdown=sizes)

    strategies, _, candidates = _peel(
        game.table,
        q,
        a,
        kappas,
        _level_streams(seed, game.k),
        refine=True,
    )
    witness = StrategyProfile(tuple(strategies))
    payoffs = profile_payoffs(game.table, game.k, witness.strategies)
    mode = DETERMINISTIC if seed is None else HEURISTIC
    if payoffs.min() >= 1.0:
        return DecisionReport(VALUE_ONE, witness, [], kappas, candidates, 0, 1.0, candidates, mode, seed)
    value = float(payoffs.mean())
    if value > 1 - epsilon + PROMISE_TOL:
        hits = (payoffs >= 1.0).reshape(-1, q[-1])
        _check_promise(
            value,
            _short_questions(hits, np.ones(hits.shape), epsilon),
            f"omega = 1 or omega <= {1 - epsilon:.6g}",
            strict,
        )
        return DecisionReport(VALUE_ONE, witness, [], kappas, candidates, 0, value, candidates, mode, seed)
    return DecisionReport(BELOW_GAP, None, [], kappas, candidates, 0, value, candidates, mode, seed)


def subsample_kappa(epsilon: float, lam: float, answer_counts: Sequence[int]) -> int:
    """``ceil(epsilon^-lam * ln(prod |B_i|))``, at least 1"""
    _check_unit("epsilon", epsilon)
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    logs = sum(log(b) for b in answer_counts)
    return max(1, ceil(epsilon**-lam * logs))


def _subgame_values(args):
    game, groups, budget = args
    return [exact_value_k(restrict_subgame(game, g).game, budget=budget).value for g in groups]


def subsample_estimate(
    game: Union[KFreeGame, TwoProverGame],
    epsilon: float = 0.1,
    lam: float = 3.0,
    mode: str = "exact",
    trials: int = 100,
    seed: Optional[int] = None,
    kappa: Optional[int] = None,
    players: Optional[Sequence[int]] = None,
    budget: Optional[int] = None,
    threads: int = 1,
) -> SubsampleReport:
    """
    Mean exact value of the subgames on random product subsets of size kappa.

    Arguments
    ---------
    game : KFreeGame | TwoProverGame
        A free game with any number of players.
    epsilon : float
        Target error, used for ``kappa = ceil(epsilon^-lam ln prod |B_i|)``.
    lam : float
        Exponent of the kappa formula.
    mode : str
        ``"exact"`` averages over every product subset, ``"monte-carlo"``
        over ``trials`` random ones drawn with ``seed``.
    kappa : int, optional
        Overrides the formula. Clamped per player to the question count.
    players : Sequence[int], optional
        0-based players whose questions are subsampled, by default all.
        The others keep their full question sets.
    """
    game = as_kfree(dense_game(game))
    if kappa is None:
        kappa = subsample_kappa(epsilon, lam, game.answer_counts)
    if kappa < 1:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if players is None:
        players = range(game.k)
    chosen = set(int(p) for p in players)
    if not chosen or min(chosen) < 0 or max(chosen) >= game.k:
        raise ValueError(f"players must be a nonempty subset of range({game.k})")
    sizes = tuple(
        min(kappa, n) if i in chosen else n for i, n in enumerate(game.question_counts)
    )

    if mode == "exact":
        per_player = [list(combinations(range(n), s)) for n, s in zip(game.question_counts, sizes)]
        n_subsets = int(np.prod([len(p) for p in per_player], dtype=object))
        per_game = 1
        for i in range(game.k - 1):
            per_game *= game.answer_counts[i] ** sizes[i]
        check_budget(
            n_subsets * per_game * sizes[-1] * game.answer_counts[-1],
            budget,
            what="exact subsampling",
        )
        groups = list(product(*per_player))
    elif mode == "monte-carlo":
        if trials < 1:
            raise ValueError(f"trials must be positive, got {trials}")
        # one stream per trial
        groups = [
            tuple(random_subset(rng, n, s) for n, s in zip(game.question_counts, sizes))
            for rng in spawn_generators(seed, trials)
        ]
    else:
        raise ValueError(f"Unknown mode {mode!r}")

    tasks = [(game, groups[a:b], budget) for a, b in chunk_ranges(len(groups), 4 * threads)]
    values = np.array([v for chunk in parallel_map(_subgame_values, tasks, threads) for v in chunk])
    stderr = None
    if mode == "monte-carlo":
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return SubsampleReport(
        mean=float(values.mean()),
        kappa=sizes,
        n_subsets=len(groups),
        stderr=stderr,
        mode=mode,
        seed=seed,
    )


def implied_epsilon(kappa: int, lam: float, answer_counts: Sequence[int]) -> float:
    """Error for which the subsampling kappa formula gives ``kappa``"""
    logs = sum(log(b) for b in answer_counts)
    if logs == 0:
        return 0.0
    return float((logs / kappa) ** (1 / lam))

