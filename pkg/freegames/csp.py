import logging
from collections import namedtuple
from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple
from typing import Union

import numpy as np

from .utils import check_budget
from .utils import chunk_ranges
from .utils import DimacsParseError
from .utils import EmptyCspError
from .utils import GameFormatError
from .utils import parallel_map
from .utils import random_subset
from .utils import spawn_generators

logger = logging.getLogger(__name__)

Balance = namedtuple("Balance", "clause_degree_d")
SatValue = namedtuple("SatValue", "value, witness, vacuous")
SubsampleMean = namedtuple("SubsampleMean", "mean, n_samples, stderr, n_vacuous")

CHUNK_ROWS = 1 << 15


@dataclass(frozen=True, eq=False)
class CnfFormula:
    """3-CNF formula with variables numbered from 1 as in DIMACS"""

    n_vars: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        if int(self.n_vars) != self.n_vars or self.n_vars < 1:
            raise ValueError(f"n_vars must be a positive integer, got {self.n_vars}")
        clauses = tuple(tuple(int(v) for v in c) for c in self.clauses)
        for i, clause in enumerate(clauses):
            if len(clause) != 3:
                raise ValueError(f"Clause {i} has {len(clause)} literals, expected 3")
            variables = [abs(v) for v in clause]
            if 0 in variables or max(variables) > self.n_vars:
                raise ValueError(f"Clause {i} has a literal out of range: {clause}")
            if len(set(variables)) != 3:
                raise ValueError(f"Clause {i} repeats a variable: {clause}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def n_clauses(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> np.ndarray:
        """Number of clauses each variable appears in"""
        counts = np.zeros(self.n_vars, dtype=np.int64)
        for clause in self.clauses:
            for lit in clause:
                counts[abs(lit) - 1] += 1
        return counts

    @property
    def balance(self) -> Optional[Balance]:
        counts = self.occurrences()
        if len(self.clauses) == 0 or not np.all(counts == counts[0]):
            return None
        return Balance(int(counts[0]))

    def incidence(self) -> np.ndarray:
        """(m, n) matrix with a one where variable j appears in clause i"""
        matrix = np.zeros((self.n_clauses, self.n_vars), dtype=np.int64)
        for i, clause in enumerate(self.clauses):
            for lit in clause:
                matrix[i, abs(lit) - 1] = 1
        return matrix

    def satisfied(self, assignment: Sequence[int]) -> np.ndarray:
        """Which clauses a 0/1 assignment (indexed from 0) satisfies"""
        assignment = np.asarray(assignment)
        result = np.zeros(self.n_clauses, dtype=bool)
        for i, clause in enumerate(self.clauses):
            result[i] = any(
                (assignment[abs(lit) - 1] == 1) == (lit > 0) for lit in clause
            )
        return result

    def to_dimacs(self) -> str:
        lines = [f"p cnf {self.n_vars} {self.n_clauses}"]
        lines += [" ".join(str(v) for v in c) + " 0" for c in self.clauses]
        return "\n".join(lines) + "\n"


def parse_dimacs(text: Union[bytes, str]) -> CnfFormula:
    """
    Parse a DIMACS CNF instance whose clauses all have three distinct
    variables.

    Comment lines start with ``c``, a ``%`` line ends the clause list and
    clauses may span several lines. Errors carry the offending line number.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as ex:
            line = text[: ex.start].count(b"\n") + 1
            raise DimacsParseError(line, f"invalid UTF-8 byte {text[ex.start:ex.start + 1]!r}") from ex

    header: Optional[Tuple[int, int]] = None
    clauses: List[Tuple[int, ...]] = []
    pending: List[int] = []
    pending_line = 0
    line_no = 0
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsParseError(line_no, "duplicate problem line")
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsParseError(line_no, f"malformed header {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError:
                raise DimacsParseError(line_no, f"malformed header {line!r}")
            if header[0] < 1 or header[1] < 0:
                raise DimacsParseError(line_no, f"malformed header {line!r}")
            continue
        if header is None:
            raise DimacsParseError(line_no, "clause before the problem line")
        for token in line.split():
            try:
                lit = int(token)
            except ValueError:
                raise DimacsParseError(line_no, f"invalid literal {token!r}")
            if not pending:
                pending_line = line_no
            if lit != 0:
                if abs(lit) > header[0]:
                    raise DimacsParseError(
                        line_no,
                        f"literal {lit} out of range for {header[0]} variables",
                    )
                pending.append(lit)
                continue
            if len(pending) != 3:
                raise DimacsParseError(
                    line_no,
                    f"clause has {len(pending)} literals, expected 3",
                )
            if len({abs(v) for v in pending}) != 3:
                raise DimacsParseError(
                    line_no,
                    f"clause {pending} repeats a variable",
                )
            clauses.append(tuple(pending))
            pending = []

    if header is None:
        raise DimacsParseError(max(line_no, 1), "missing problem line")
    if pending:
        raise DimacsParseError(pending_line, "clause is not terminated by 0")
    if len(clauses) != header[1]:
        raise DimacsParseError(
            line_no,
            f"header declares {header[1]} clauses, found {len(clauses)}",
        )
    return CnfFormula(header[0], tuple(clauses))  # type: ignore


@dataclass(frozen=True, eq=False)
class Constraint:
    scope: Tuple[int, ...]
    weight: float
    payoff: np.ndarray


@dataclass(frozen=True, eq=False)
class DenseCsp:
    """
    Weighted constraint satisfaction problem over a finite alphabet.

    Every constraint has ``arity`` distinct variables in its scope and a
    payoff table of shape ``(alphabet_size,) * arity`` with values in [0, 1].
    A CSP with no constraints is allowed and marks a vacuous restriction.
    """

    n_vars: int
    alphabet_size: int
    arity: int
    constraints: Tuple[Constraint, ...]

    def __post_init__(self):
        if self.n_vars < 1 or self.alphabet_size < 1:
            raise GameFormatError("n_vars and alphabet_size must be positive")
        if self.arity < 2:
            raise GameFormatError(f"arity must be at least 2, got {self.arity}")
        cleaned = []
        shape = (self.alphabet_size,) * self.arity
        for i, c in enumerate(self.constraints):
            scope = tuple(int(v) for v in c.scope)
            if len(scope) != self.arity or len(set(scope)) != self.arity:
                raise GameFormatError(f"Constraint {i} needs {self.arity} distinct variables")
            if min(scope) < 0 or max(scope) >= self.n_vars:
                raise GameFormatError(f"Constraint {i} scope {scope} out of range")
            if not c.weight > 0:
                raise GameFormatError(f"Constraint {i} has non-positive weight")
            payoff = np.array(c.payoff, dtype=np.float64)
            if payoff.shape != shape:
                raise GameFormatError(
                    f"Constraint {i} payoff has shape {payoff.shape}, expected {shape}",
                )
            if payoff.min() < 0 or payoff.max() > 1:
                raise GameFormatError(f"Constraint {i} payoff outside [0, 1]")
            payoff.setflags(write=False)
            cleaned.append(Constraint(scope, float(c.weight), payoff))
        object.__setattr__(self, "constraints", tuple(cleaned))

    @property
    def is_vacuous(self) -> bool:
        return len(self.constraints) == 0

    def total_weight(self) -> float:
        return float(sum(c.weight for c in self.constraints))

    def evaluate(self, assignment: Sequence[int]) -> float:
        """Weighted average payoff of a full assignment"""
        if self.is_vacuous:
            return 1.0
        assignment = np.asarray(assignment, dtype=np.int64)
        total = 0.0
        for c in self.constraints:
            total += c.weight * c.payoff[tuple(assignment[list(c.scope)])]
        return total / self.total_weight()

    def degrees(self) -> np.ndarray:
        counts = np.zeros(self.n_vars, dtype=np.int64)
        for c in self.constraints:
            for v in c.scope:
                counts[v] += 1
        return counts


def cnf_to_csp(formula: CnfFormula) -> DenseCsp:
    """Binary-alphabet 3-CSP with one unit-weight constraint per clause"""
    constraints = []
    for clause in formula.clauses:
        payoff = np.zeros((2, 2, 2))
        for bits in np.ndindex(2, 2, 2):
            payoff[bits] = float(
                any((b == 1) == (lit > 0) for b, lit in zip(bits, clause)),
            )
        scope = tuple(abs(lit) - 1 for lit in clause)
        constraints.append(Constraint(scope, 1.0, payoff))
    return DenseCsp(formula.n_vars, 2, 3, tuple(constraints))


def _free_variables(csp: DenseCsp) -> List[int]:
    """
    Greedy set of variables no two of which share a constraint. Once the
    other variables are fixed each of them can be optimized on its own.
    """
    degrees = csp.degrees()
    order = sorted(range(csp.n_vars), key=lambda v: (degrees[v], v))
    touching: Dict[int, List[int]] = {v: [] for v in range(csp.n_vars)}
    for i, c in enumerate(csp.constraints):
        for v in c.scope:
            touching[v].append(i)
    taken = np.zeros(len(csp.constraints), dtype=bool)
    free = []
    for v in order:
        if any(taken[i] for i in touching[v]):
            continue
        free.append(v)
        for i in touching[v]:
            taken[i] = True
    return sorted(free)


def _sat_chunk(args):
    csp, bound, free, start, stop = args
    sigma = csp.alphabet_size
    n_rows = stop - start
    codes = np.arange(start, stop, dtype=np.int64)
    # most significant digit first
    values = np.zeros((n_rows, len(bound)), dtype=np.int64)
    rest = codes.copy()
    for p in range(len(bound) - 1, -1, -1):
        values[:, p] = rest % sigma
        rest //= sigma
    position = {v: p for p, v in enumerate(bound)}
    free_position = {v: p for p, v in enumerate(free)}

    const = np.zeros(n_rows)
    gains = np.zeros((n_rows, len(free), sigma))
    for c in csp.constraints:
        free_in_scope = [v for v in c.scope if v in free_position]
        if not free_in_scope:
            index = tuple(values[:, position[v]] for v in c.scope)
            const += c.weight * c.payoff[index]
            continue
        f = free_in_scope[0]
        symbols = np.arange(sigma)
        index = tuple(
            symbols[None, :] if v == f else values[:, position[v]][:, None]
            for v in c.scope
        )
        gains[:, free_position[f], :] += c.weight * c.payoff[index]
    if free:
        totals = const + gains.max(axis=2).sum(axis=1)
    else:
        totals = const
    row = int(np.argmax(totals))
    best_free = np.argmax(gains[row], axis=1) if free else np.zeros(0, dtype=np.int64)
    return float(totals[row]), values[row], best_free


def csp_sat_value(
    csp: DenseCsp,
    budget: Optional[int] = None,
    threads: int = 1,
    vacuous_ok: bool = False,
) -> SatValue:
    """
    Exact maximum weighted fraction of satisfied constraints.

    The variables are split into a greedy independent set, whose members
    are optimized one at a time, and the remaining variables, which are
    enumerated. Weights are normalized here.

    Arguments
    ---------
    csp : DenseCsp
        The instance.
    budget : int, optional
        Maximal number of constraint evaluations.
    threads : int
        Number of worker processes.
    vacuous_ok : bool
        Return a flagged value of 1 for an instance without constraints
        instead of raising :class:`EmptyCspError`.
    """
    if csp.is_vacuous:
        if vacuous_ok:
            return SatValue(1.0, np.zeros(csp.n_vars, dtype=np.int64), True)
        raise EmptyCspError("SAT value of a CSP without constraints is undefined")

    free = _free_variables(csp)
    free_set = set(free)
    bound = [v for v in range(csp.n_vars) if v not in free_set]
    n_rows = csp.alphabet_size ** len(bound)
    check_budget(
        n_rows * len(csp.constraints) * csp.alphabet_size,
        budget,
        what="CSP assignment enumeration",
    )
    logger.debug(
        "SAT value: %d enumerated and %d independent variables",
        len(bound),
        len(free),
    )
    n_chunks = max(-(-n_rows // CHUNK_ROWS), threads)
    tasks = [
        (csp, bound, free, start, stop) for start, stop in chunk_ranges(n_rows, n_chunks)
    ]
    best = -1.0
    witness = np.zeros(csp.n_vars, dtype=np.int64)
    for total, values, best_free in parallel_map(_sat_chunk, tasks, threads):
        if total > best:
            best = total
            witness[bound] = values
            witness[free] = best_free
    value = csp.evaluate(witness)
    return SatValue(min(max(value, 0.0), 1.0), witness, False)


def sat_value_cnf(formula: CnfFormula, budget: Optional[int] = None) -> SatValue:
    """Maximum fraction of satisfied clauses; 1 (flagged) for no clauses"""
    if formula.n_clauses == 0:
        return SatValue(1.0, np.zeros(formula.n_vars, dtype=np.int64), True)
    return csp_sat_value(cnf_to_csp(formula), budget=budget)


def csp_restrict(csp: DenseCsp, variables: Sequence[int]) -> DenseCsp:
    """
    Keep the constraints whose scope lies inside ``variables`` and renumber
    the variables by their position in the sorted subset.
    """
    items = sorted({int(v) for v in variables})
    if not items:
        raise ValueError("Variable subset must be nonempty")
    if items[0] < 0 or items[-1] >= csp.n_vars:
        raise ValueError(f"Variable subset {items} out of range")
    index = {v: i for i, v in enumerate(items)}
    kept = tuple(
        Constraint(tuple(index[v] for v in c.scope), c.weight, c.payoff)
        for c in csp.constraints
        if all(v in index for v in c.scope)
    )
    return DenseCsp(len(items), csp.alphabet_size, csp.arity, kept)


def _subset_values(args):
    csp, subsets, budget = args
    return [
        csp_sat_value(csp_restrict(csp, s), budget=budget, vacuous_ok=True)
        for s in subsets
    ]


def csp_subsample_mean(
    csp: DenseCsp,
    t: int,
    mode: str = "exact",
    trials: int = 100,
    seed: Optional[int] = None,
    exclude_vacuous: bool = False,
    budget: Optional[int] = None,
    threads: int = 1,
) -> SubsampleMean:
    """
    Mean SAT value of the restriction to a uniformly random t-subset of the
    variables.

    ``mode`` is ``"exact"`` (all subsets) or ``"monte-carlo"`` (``trials``
    subsets drawn with ``seed``). The standard error is only reported for
    Monte-Carlo estimates.
    """
    if not 1 <= t <= csp.n_vars:
        raise ValueError(f"t must be in [1, {csp.n_vars}], got {t}")
    if mode == "exact":
        check_budget(
            comb(csp.n_vars, t) * csp.alphabet_size**t * max(len(csp.constraints), 1),
            budget,
            what="exact subsample enumeration",
        )
        subsets = list(combinations(range(csp.n_vars), t))
    elif mode == "monte-carlo":
        if trials < 1:
            raise ValueError(f"trials must be positive, got {trials}")
        subsets = [random_subset(rng, csp.n_vars, t) for rng in spawn_generators(seed, trials)]
    else:
        raise ValueError(f"Unknown mode {mode!r}")

    tasks = [
        (csp, subsets[a:b], budget) for a, b in chunk_ranges(len(subsets), threads)
    ]
    results = [r for chunk in parallel_map(_subset_values, tasks, threads) for r in chunk]
    n_vacuous = sum(r.vacuous for r in results)
    values = np.array(
        [r.value for r in results if not (exclude_vacuous and r.vacuous)],
    )
    if n_vacuous:
        logger.warning(
            "%d of %d restricted instances have no constraints%s",
            n_vacuous,
            len(results),
            " and are excluded" if exclude_vacuous else "",
        )
    if len(values) == 0:
        raise EmptyCspError("Every sampled restriction is vacuous")
    stderr = None
    if mode == "monte-carlo":
        stderr = float(values.std(ddof=1) / np.sqrt(len(values))) if len(values) > 1 else 0.0
    return SubsampleMean(float(values.mean()), len(values), stderr, int(n_vacuous))


def subsample_curve(
    csp: DenseCsp,
    sizes: Sequence[int],
    mode: str = "exact",
    trials: int = 100,
    seed: Optional[int] = None,
    exclude_vacuous: bool = False,
    budget: Optional[int] = None,
    threads: int = 1,
) -> List[Dict[str, object]]:
    """Rows ``t, mean, stderr, n_samples`` for every subset size"""
    rows = []
    for t in sizes:
        result = csp_subsample_mean(
            csp,
            t,
            mode=mode,
            trials=trials,
            seed=seed,
            exclude_vacuous=exclude_vacuous,
            budget=budget,
            threads=threads,
        )
        rows.append(
            {
                "t": int(t),
                "mean": result.mean,
                "stderr": result.stderr,
                "n_samples": result.n_samples,
            },
        )
    return rows


def csp_density(csp: DenseCsp) -> float:
    """
    Smallest fraction, over all collections of ``arity - 1`` variables, of the
    remaining variables that complete the collection to the scope of some
    constraint.
    """
    k = csp.arity
    if csp.n_vars <= k - 1:
        return 0.0
    scopes = {frozenset(c.scope) for c in csp.constraints}
    density = 1.0
    for base in combinations(range(csp.n_vars), k - 1):
        base_set = set(base)
        hits = sum(
            1
            for z in range(csp.n_vars)
            if z not in base_set and frozenset(base_set | {z}) in scopes
        )
        density = min(density, hits / (csp.n_vars - k + 1))
    return density
