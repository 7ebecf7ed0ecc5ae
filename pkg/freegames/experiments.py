import logging
from collections import namedtuple
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import ceil
from math import comb
from math import sqrt
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from .constructions import birthday_repetition
from .constructions import clause_variable_game
from .constructions import guessing_bound
from .constructions import random_formula
from .constructions import random_free_game
from .constructions import threshold_repetition
from .constructions import xor_game
from .csp import CnfFormula
from .csp import sat_value_cnf
from .game import as_kfree
from .game import dense_game
from .game import exact_value
from .game import exact_value_k
from .game import KFreeGame
from .game import TwoProverGame
from .solvers import implied_epsilon
from .solvers import subsample_estimate
from .utils import check_budget
from .utils import rank_subset

logger = logging.getLogger(__name__)

# Tolerance for comparing float game values against exact bounds
VALUE_TOL = 1e-9

VariationDistance = namedtuple(
    "VariationDistance",
    "distance, bound_rhs, pair, process_matches",
)
CollisionRecord = namedtuple(
    "CollisionRecord",
    "probability, bound, holds, M, N, c, d, k, l",
)
BirthdayGapRecord = namedtuple(
    "BirthdayGapRecord",
    "omega, omega_birthday, gap, distance, sharp_holds, chain_bound, chain_holds, "
    "guessing_bound, loss_ratio, k, l",
)


@dataclass(frozen=True)
class DistributionPair:
    """
    Uniform distribution U and edge-weighted distribution D over pairs of
    (k-subset of clauses, l-subset of variables), both as exact rationals.
    """

    support: List[Tuple[int, int]]
    u_prob: List[Fraction]
    d_prob: List[Fraction]
    s_ij: List[int]
    M: int
    N: int
    k: int
    l: int  # noqa: E741
    row_degree: int
    col_degree: int

    def distance(self) -> Fraction:
        return sum((abs(d - u) for d, u in zip(self.d_prob, self.u_prob)), Fraction(0)) / 2

    def check(self) -> List[str]:
        """Failed identities, empty when the pair is consistent"""
        problems = []
        if sum(self.u_prob, Fraction(0)) != 1:
            problems.append("U does not sum to 1")
        if sum(self.d_prob, Fraction(0)) != 1:
            problems.append("D does not sum to 1")
        mean = sum((s * u for s, u in zip(self.s_ij, self.u_prob)), Fraction(0))
        expected = Fraction(self.row_degree * self.k * self.l, self.N)
        if mean != expected:
            problems.append(f"E_U[S_IJ] = {mean}, expected {expected}")
        return problems


def _report(ok: bool, msg: str, strict: bool) -> bool:
    if not ok:
        if strict:
            raise RuntimeError(msg)
        logger.warning(msg)
    return ok


def _edge_counts(incidence: np.ndarray, k: int, l: int):  # noqa: E741
    M, N = incidence.shape
    left = list(combinations(range(M), k))
    right = list(combinations(range(N), l))
    counts = {}
    for I in left:  # noqa: E741
        rows = incidence[list(I)].sum(axis=0)
        for J in right:
            counts[rank_subset(I), rank_subset(J)] = int(rows[list(J)].sum())
    return counts


def _process_distribution(incidence: np.ndarray, k: int, l: int):  # noqa: E741
    """
    Distribution of (I, J) obtained by drawing an edge (i, j) uniformly and
    completing i and j to uniformly random subsets, by exact enumeration.
    """
    M, N = incidence.shape
    edges = list(zip(*np.nonzero(incidence)))
    weight = Fraction(1, len(edges) * comb(M - 1, k - 1) * comb(N - 1, l - 1))
    probs: Dict[Tuple[int, int], Fraction] = {}
    for i, j in edges:
        others_i = [v for v in range(M) if v != i]
        others_j = [v for v in range(N) if v != j]
        for rest_i in combinations(others_i, k - 1):
            I = rank_subset((int(i),) + rest_i)  # noqa: E741
            for rest_j in combinations(others_j, l - 1):
                J = rank_subset((int(j),) + rest_j)
                probs[I, J] = probs.get((I, J), Fraction(0)) + weight
    return probs


def variation_distance(
    formula: CnfFormula,
    k: int,
    l: int,  # noqa: E741
    budget: Optional[int] = None,
    strict: bool = False,
) -> VariationDistance:
    """
    Exact total variation distance between the edge-weighted distribution D
    and the uniform distribution U over (clause subset, variable subset)
    pairs of a balanced formula.

    D is built in closed form, ``Pr_D = Pr_U * S_IJ / (3kl/N)``, and checked
    element-wise against the sampling process it describes.
    """
    balance = formula.balance
    if balance is None:
        raise ValueError("variation_distance needs a balanced formula")
    M, N = formula.n_clauses, formula.n_vars
    if not 1 <= k <= M or not 1 <= l <= N:
        raise ValueError(f"Need 1 <= k <= {M} and 1 <= l <= {N}, got k={k}, l={l}")
    n_pairs = comb(M, k) * comb(N, l)
    process_cost = 3 * M * comb(M - 1, k - 1) * comb(N - 1, l - 1)
    check_budget(n_pairs * k * l + process_cost, budget, what="variation distance")

    incidence = formula.incidence()
    counts = _edge_counts(incidence, k, l)
    support = sorted(counts)
    u = Fraction(1, n_pairs)
    mean_edges = Fraction(3 * k * l, N)
    s_ij = [counts[p] for p in support]
    d_prob = [u * s / mean_edges for s in s_ij]
    pair = DistributionPair(
        support=support,
        u_prob=[u] * len(support),
        d_prob=d_prob,
        s_ij=s_ij,
        M=M,
        N=N,
        k=k,
        l=l,
        row_degree=3,
        col_degree=balance.clause_degree_d,
    )
    for problem in pair.check():
        _report(False, f"Distribution identity failed: {problem}", strict)

    process = _process_distribution(incidence, k, l)
    matches = all(process.get(p, Fraction(0)) == d for p, d in zip(support, d_prob))
    matches = matches and set(process) <= set(support)
    _report(matches, "Closed-form D differs from the sampling process", strict)

    return VariationDistance(
        distance=pair.distance(),
        bound_rhs=sqrt(N / (k * l)),
        pair=pair,
        process_matches=matches,
    )


def collision_probability(
    incidence,
    k: int,
    l: int,  # noqa: E741
    budget: Optional[int] = None,
    strict: bool = False,
) -> CollisionRecord:
    """
    Exact probability that a random k-subset of the left vertices and a
    random l-subset of the right vertices of a biregular bipartite graph
    span at least one edge, next to the lower bound
    ``(ckl/N)(1 - c^2 k^2/N - ckl/N)``.
    """
    incidence = np.asarray(incidence) != 0
    if incidence.ndim != 2:
        raise ValueError("incidence must be a 2D matrix")
    M, N = incidence.shape
    if k < 1 or l < 1:
        raise ValueError(f"k and l must be positive, got k={k}, l={l}")
    if k > M or l > N:
        raise ValueError(f"Need k <= {M} and l <= {N}")
    rows = incidence.sum(axis=1)
    cols = incidence.sum(axis=0)
    if not (np.all(rows == rows[0]) and np.all(cols == cols[0])):
        raise ValueError("collision_probability needs a biregular graph")
    c, d = int(rows[0]), int(cols[0])
    check_budget(comb(M, k) * N, budget, what="collision enumeration")

    total_right = comb(N, l)
    hits = 0
    for I in combinations(range(M), k):  # noqa: E741
        neighbours = int(incidence[list(I)].any(axis=0).sum())
        hits += total_right - comb(N - neighbours, l)
    probability = Fraction(hits, comb(M, k) * total_right)
    bound = Fraction(c * k * l, N) * (
        1 - Fraction(c * c * k * k, N) - Fraction(c * k * l, N)
    )
    holds = bound <= 0 or probability >= bound
    _report(holds, f"Collision probability {probability} is below {bound}", strict)
    return CollisionRecord(probability, bound, holds, M, N, c, d, k, l)


def birthday_gap(
    formula: CnfFormula,
    k: int,
    l: int,  # noqa: E741
    budget: Optional[int] = None,
    threads: int = 1,
    strict: bool = False,
) -> BirthdayGapRecord:
    """
    Exact values of the clause/variable game and its birthday repetition.

    Checks that ``omega(G^{kxl}) - omega(G) <= ||D - U||`` (when the formula
    is balanced) and that
    ``omega(G^{kxl}) <= Pr_U[S_IJ = 0] + (3kl/N) omega(G)``.
    """
    base = clause_variable_game(formula)
    omega = exact_value(base, budget=budget, threads=threads).value
    repeated = birthday_repetition(base, k, l)
    omega_bd = exact_value(repeated.materialize(), budget=budget, threads=threads).value

    distance = None
    sharp = None
    if formula.balance is not None:
        distance = variation_distance(formula, k, l, budget=budget, strict=strict).distance
        sharp = omega_bd - omega <= float(distance) + VALUE_TOL
        _report(
            sharp,
            f"Birthday gap {omega_bd - omega} exceeds ||D - U|| = {float(distance)}",
            strict,
        )

    counts = _edge_counts(formula.incidence(), k, l)
    empty = Fraction(sum(1 for s in counts.values() if s == 0), len(counts))
    chain = float(empty) + 3 * k * l / formula.n_vars * omega
    chain_holds = omega_bd <= chain + VALUE_TOL
    _report(chain_holds, f"omega(G^kxl) = {omega_bd} exceeds {chain}", strict)

    return BirthdayGapRecord(
        omega=omega,
        omega_birthday=omega_bd,
        gap=omega_bd - omega,
        distance=distance,
        sharp_holds=sharp,
        chain_bound=chain,
        chain_holds=chain_holds,
        guessing_bound=guessing_bound(base, k, l),
        loss_ratio=(1 - omega_bd) * formula.n_vars / (k * l),
        k=k,
        l=l,
    )


def subsample_gap_curve(
    game: Union[TwoProverGame, KFreeGame],
    kappas: Sequence[int],
    restrict: str = "all",
    lam: float = 3.0,
    budget: Optional[int] = None,
    threads: int = 1,
    strict: bool = False,
) -> List[Dict[str, object]]:
    """
    Exact mean subgame value for each kappa.

    ``restrict`` is ``"all"`` (every player's questions are subsampled) or
    ``"first"`` (only the first player's). Rows hold ``kappa, mean, omega,
    upper_gap, eps_implied, n_subsets``; ``mean >= omega`` is checked.
    """
    game = as_kfree(dense_game(game))
    if restrict not in ("all", "first"):
        raise ValueError(f"restrict must be 'all' or 'first', got {restrict!r}")
    players = None if restrict == "all" else [0]
    omega = exact_value_k(game, budget=budget, threads=threads).value
    rows = []
    for kappa in kappas:
        report = subsample_estimate(
            game,
            kappa=int(kappa),
            players=players,
            mode="exact",
            budget=budget,
            threads=threads,
        )
        ok = report.mean >= omega - VALUE_TOL
        _report(ok, f"Subsample mean {report.mean} is below omega {omega}", strict)
        rows.append(
            {
                "kappa": int(kappa),
                "mean": report.mean,
                "omega": omega,
                "upper_gap": report.mean - omega,
                "eps_implied": implied_epsilon(int(kappa), lam, game.answer_counts),
                "n_subsets": report.n_subsets,
            },
        )
    gaps = [r["upper_gap"] for r in rows]
    if any(b > a + VALUE_TOL for a, b in zip(gaps, gaps[1:])):
        logger.info("Upper gap is not monotone in kappa: %s", gaps)
    return rows


def binomial_tail(n: int, p: float, need: int) -> float:
    """P[Bin(n, p) >= need]"""
    return float(sum(comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(max(need, 0), n + 1)))


def amplification_curve(
    game: TwoProverGame,
    n_values: Sequence[int],
    threshold: Union[Fraction, float, str] = Fraction(1, 2),
    budget: Optional[int] = None,
    threads: int = 1,
    strict: bool = False,
) -> List[Dict[str, object]]:
    """
    Exact values of threshold repetitions of ``game``.

    Rows hold ``N, value, binomial_lower`` where ``binomial_lower`` is the
    value reached by playing an optimal strategy on every copy independently;
    the value is checked to be at least that.
    """
    threshold = Fraction(threshold).limit_denominator(10**6)
    omega = exact_value(game, budget=budget, threads=threads).value
    rows = []
    for n in n_values:
        repeated = threshold_repetition(game, int(n), threshold, budget=budget)
        value = exact_value(repeated, budget=budget, threads=threads).value
        lower = binomial_tail(int(n), omega, ceil(threshold * int(n)))
        ok = value >= lower - VALUE_TOL
        _report(ok, f"N={n}: value {value} below independent play {lower}", strict)
        rows.append({"N": int(n), "value": value, "binomial_lower": lower})
    values = [r["value"] for r in rows]
    if omega > threshold and any(b < a - VALUE_TOL for a, b in zip(values, values[1:])):
        logger.info("Threshold curve is not non-decreasing: %s", values)
    if omega < threshold and any(b > a + VALUE_TOL for a, b in zip(values, values[1:])):
        logger.info("Threshold curve is not non-increasing: %s", values)
    return rows


def eight_patterns() -> CnfFormula:
    """All eight sign patterns over three variables; SAT = 7/8"""
    clauses = []
    for signs in range(8):
        clauses.append(tuple((v + 1) * (-1 if (signs >> v) & 1 else 1) for v in range(3)))
    return CnfFormula(3, tuple(clauses))  # type: ignore


def two_clause() -> CnfFormula:
    return CnfFormula(3, ((1, 2, 3), (-1, -2, -3)))


def four_subsets() -> CnfFormula:
    """Every 3-subset of four variables as a positive clause"""
    return CnfFormula(4, tuple(combinations(range(1, 5), 3)))  # type: ignore


def formula_corpus() -> Dict[str, CnfFormula]:
    corpus = {
        "eight_patterns": eight_patterns(),
        "two_clause": two_clause(),
        "four_subsets": four_subsets(),
    }
    for seed in range(8):
        n_vars = 3 + seed % 2
        corpus[f"random_{seed}"] = random_formula(n_vars, 2 + seed % 4, seed=seed)
    return corpus


def graph_corpus() -> Dict[str, np.ndarray]:
    cycle = np.zeros((3, 3), dtype=np.int64)
    for i in range(3):
        cycle[i, i] = 1
        cycle[i, (i + 1) % 3] = 1
    return {
        "k22": np.ones((2, 2), dtype=np.int64),
        "cycle6": cycle,
        "eight_patterns": eight_patterns().incidence(),
        "four_subsets": four_subsets().incidence(),
        "two_clause": two_clause().incidence(),
    }


def game_corpus(n: int = 20) -> Dict[str, TwoProverGame]:
    return {f"random_{seed}": random_free_game(2, 2, 2, 2, seed=seed) for seed in range(n)}


def _check_line(name: str, ok: Optional[bool], detail: str) -> str:
    status = "n/a" if ok is None else ("pass" if ok else "FAIL")
    return f"| {name} | {status} | {detail} |"


def run_report(budget: Optional[int] = None, threads: int = 1) -> str:
    """Run every experiment on the pinned corpus and summarize it in markdown"""
    lines = ["# Experiment report", "", "| check | status | detail |", "|---|---|---|"]
    n_failed = 0

    def add(name, ok, detail):
        nonlocal n_failed
        n_failed += ok is False
        lines.append(_check_line(name, ok, detail))

    for name, formula in formula_corpus().items():
        if formula.balance is None:
            continue
        for k in (1, 2):
            for l in (1, 2):  # noqa: E741
                if k > formula.n_clauses or l > formula.n_vars:
                    continue
                result = variation_distance(formula, k, l, budget=budget)
                add(
                    f"vardist {name} k={k} l={l}",
                    result.process_matches,
                    f"||D-U|| = {result.distance} ({float(result.distance):.4f}), "
                    f"sqrt(N/kl) = {result.bound_rhs:.4f}",
                )

    for name, graph in graph_corpus().items():
        M, N = graph.shape
        for k in (1, 2):
            for l in (1, 2):  # noqa: E741
                if k > M or l > N:
                    continue
                record = collision_probability(graph, k, l, budget=budget)
                add(
                    f"collision {name} k={k} l={l}",
                    record.holds,
                    f"exact {float(record.probability):.4f} >= bound {float(record.bound):.4f}",
                )

    for name, k, l in (  # noqa: E741
        ("eight_patterns", 1, 1),
        ("eight_patterns", 2, 2),
        ("two_clause", 1, 1),
        ("two_clause", 2, 2),
        ("four_subsets", 1, 1),
        ("four_subsets", 2, 2),
    ):
        formula = formula_corpus()[name]
        record = birthday_gap(formula, k, l, budget=budget, threads=threads)
        add(
            f"birthday-gap {name} k={k} l={l}",
            record.sharp_holds and record.chain_holds,
            f"omega = {record.omega:.4f}, omega_bd = {record.omega_birthday:.4f}, "
            f"||D-U|| = {float(record.distance):.4f}, ratio = {record.loss_ratio:.4f}",
        )

    for name, formula in formula_corpus().items():
        sat = sat_value_cnf(formula, budget=budget).value
        omega = exact_value(clause_variable_game(formula), budget=budget, threads=threads).value
        ok = omega <= 1 - (1 - sat) / 3 + VALUE_TOL and (sat < 1 or omega >= 1 - VALUE_TOL)
        add(f"clause/variable {name}", ok, f"SAT = {sat:.4f}, omega = {omega:.4f}")

    curve = subsample_gap_curve(
        random_free_game(4, 4, 2, 2, seed=0),
        range(1, 5),
        budget=budget,
        threads=threads,
    )
    for row in curve:
        add(
            f"subsample kappa={row['kappa']}",
            row["mean"] >= row["omega"] - VALUE_TOL,
            f"mean = {row['mean']:.4f}, omega = {row['omega']:.4f}",
        )

    for row in amplification_curve(xor_game(), (1, 2), budget=budget, threads=threads):
        add(
            f"amplify xor N={row['N']}",
            row["value"] >= row["binomial_lower"] - VALUE_TOL,
            f"value = {row['value']:.4f}, independent = {row['binomial_lower']:.4f}",
        )

    lines += ["", f"{n_failed} failed checks"]
    return "\n".join(lines) + "\n"
