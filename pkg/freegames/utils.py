import logging
import os
from itertools import combinations
from math import comb
from multiprocessing import Pool
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

logger = logging.getLogger(__name__)

DEFAULT_BUDGET = 10**8
DENSE_TABLE_LIMIT = 10**7
BUDGET_ENV = "FREEGAMES_BUDGET"


class BudgetExceededError(RuntimeError):
    """Raised when an enumeration would exceed the evaluation budget"""

    def __init__(
        self,
        cost: int,
        budget: int,
        what: str = "enumeration",
        breakdown: Optional[Dict[str, int]] = None,
    ) -> None:
        self.cost = int(cost)
        self.budget = int(budget)
        self.what = what
        self.breakdown = breakdown or {}
        msg = f"{what} needs {self.cost} evaluations, budget is {self.budget}"
        if self.breakdown:
            parts = ", ".join(f"{k}={v}" for k, v in self.breakdown.items())
            msg += f" ({parts})"
        super().__init__(msg)


class DimensionMismatchError(ValueError):
    def __init__(self, player: int, msg: str) -> None:
        self.player = player
        super().__init__(f"Player {player}: {msg}")


class GameFormatError(ValueError):
    pass


class DimacsParseError(ValueError):
    def __init__(self, line: int, msg: str) -> None:
        self.line = line
        super().__init__(f"line {line}: {msg}")


class PromiseViolationError(RuntimeError):
    def __init__(self, value: float, msg: str) -> None:
        self.value = value
        super().__init__(msg)


class EmptyCspError(ValueError):
    pass


class UsageError(ValueError):
    pass


def default_budget() -> int:
    """
    Return the evaluation budget used when a caller passes ``budget=None``.

    The environment variable ``FREEGAMES_BUDGET`` overrides the built-in
    ceiling of ``10**8``.
    """
    value = os.environ.get(BUDGET_ENV)
    if value is None or value.strip() == "":
        return DEFAULT_BUDGET
    try:
        budget = int(value)
    except ValueError:
        raise ValueError(f"{BUDGET_ENV} must be an integer, got {value!r}")
    if budget <= 0:
        raise ValueError(f"{BUDGET_ENV} must be positive, got {budget}")
    return budget


def check_budget(
    cost: int,
    budget: Optional[int] = None,
    what: str = "enumeration",
    breakdown: Optional[Dict[str, int]] = None,
) -> int:
    """Raise :class:`BudgetExceededError` if ``cost`` is above the budget.

    Returns the cost so it can be logged by the caller.
    """
    if budget is None:
        budget = default_budget()
    if cost > budget:
        raise BudgetExceededError(cost, budget, what=what, breakdown=breakdown)
    return int(cost)


def colex_subsets(m: int, k: int) -> List[Tuple[int, ...]]:
    """All ``k``-subsets of ``range(m)`` ordered by their colex rank"""
    return sorted(combinations(range(m), k), key=lambda s: s[::-1])


def rank_subset(subset: Sequence[int]) -> int:
    """
    Rank of a subset in the combinatorial number system.

    Arguments
    ---------
    subset : Sequence[int]
        Distinct non-negative integers, in any order.

    Returns
    -------
    int
        ``sum(comb(c_i, i + 1))`` over the sorted elements ``c_i``.
    """
    elements = sorted(subset)
    if len(set(elements)) != len(elements):
        raise ValueError(f"Subset {tuple(subset)} has repeated elements")
    if elements and elements[0] < 0:
        raise ValueError(f"Subset {tuple(subset)} has negative elements")
    return sum(comb(c, i + 1) for i, c in enumerate(elements))


def unrank_subset(rank: int, k: int) -> Tuple[int, ...]:
    """Inverse of :func:`rank_subset` for subsets of size ``k``"""
    if rank < 0:
        raise ValueError(f"Rank must be non-negative, got {rank}")
    elements = []
    remaining = rank
    for i in range(k, 0, -1):
        c = i - 1
        while comb(c + 1, i) <= remaining:
            c += 1
        elements.append(c)
        remaining -= comb(c, i)
    return tuple(reversed(elements))


def random_subset(rng: np.random.Generator, m: int, k: int) -> Tuple[int, ...]:
    """Uniform ``k``-subset of ``range(m)``, drawn as a colex rank"""
    total = comb(m, k)
    if total < 2**63:
        return unrank_subset(int(rng.integers(total)), k)
    return tuple(sorted(rng.choice(m, size=k, replace=False).tolist()))


def chunk_ranges(total: int, n_chunks: int) -> List[Tuple[int, int]]:
    n_chunks = max(1, min(int(n_chunks), int(total)))
    bounds = np.linspace(0, total, n_chunks + 1).astype(np.int64)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def parallel_map(
    func: Callable[[Any], Any],
    tasks: Sequence[Any],
    threads: int = 1,
) -> List[Any]:
    """Ordered map over ``tasks``, optionally on a process pool.

    The output order follows ``tasks`` so reductions over the result are
    independent of the number of workers.
    """
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")
    if threads == 1 or len(tasks) <= 1:
        return [func(t) for t in tasks]
    with Pool(processes=min(threads, len(tasks))) as pool:
        return pool.map(func, tasks)


def spawn_generators(seed: Optional[int], n: int) -> List[np.random.Generator]:
    """Independent random streams derived from a single root seed"""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.default_rng(s) for s in children]
