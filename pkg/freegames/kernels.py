import numba
import numpy as np


@numba.njit(cache=True)
def decode(code: int, counts: np.ndarray, digits: np.ndarray) -> None:
    """
    Write the mixed-radix digits of ``code`` into ``digits``.
    The first digit is the most significant.
    """
    for p in range(len(counts) - 1, -1, -1):
        digits[p] = code % counts[p]
        code //= counts[p]


@numba.njit(cache=True)
def increment(digits: np.ndarray, counts: np.ndarray) -> int:
    """
    Advance ``digits`` by one and return the most significant
    position that changed
    """
    p = len(digits) - 1
    while p > 0 and digits[p] + 1 == counts[p]:
        digits[p] = 0
        p -= 1
    digits[p] += 1
    return p


@numba.njit(cache=True)
def fill_partial(
    weighted: np.ndarray,
    questions: np.ndarray,
    choices: np.ndarray,
    digits: np.ndarray,
    partial: np.ndarray,
    start: int,
) -> None:
    # partial[p + 1] = partial[p] + weighted[q_p, :, answer_p, :]
    for p in range(start, len(digits)):
        q = questions[p]
        a = choices[p, digits[p]]
        for r in range(partial.shape[1]):
            for b in range(partial.shape[2]):
                partial[p + 1, r, b] = partial[p, r, b] + weighted[q, r, a, b]


@numba.njit(cache=True)
def best_strategy_range(
    weighted: np.ndarray,
    choices: np.ndarray,
    counts: np.ndarray,
    start: int,
    stop: int,
):
    """
    Enumerate the strategies with codes in ``[start, stop)`` and return the
    best value together with the first code attaining it.

    Arguments
    ---------
    weighted : np.ndarray
        Verifier table of shape (Q, R, A, B) already multiplied by the
        probability of each question pair. Q are the questions of the
        enumerated player, R the questions of the responding player.
    choices : np.ndarray
        Candidate answers per enumerated question, shape (Q, max_count).
    counts : np.ndarray
        Number of candidate answers per enumerated question.
    start : int
        First strategy code.
    stop : int
        One past the last strategy code.
    """
    n_q = weighted.shape[0]
    n_r = weighted.shape[1]
    n_b = weighted.shape[3]
    questions = np.arange(n_q)
    digits = np.zeros(n_q, dtype=np.int64)
    partial = np.zeros((n_q + 1, n_r, n_b))
    decode(start, counts, digits)
    fill_partial(weighted, questions, choices, digits, partial, 0)

    best = -1.0
    best_code = start
    code = start
    while code < stop:
        total = 0.0
        for r in range(n_r):
            m = partial[n_q, r, 0]
            for b in range(1, n_b):
                if partial[n_q, r, b] > m:
                    m = partial[n_q, r, b]
            total += m
        if total > best:
            best = total
            best_code = code
        code += 1
        if code < stop:
            p = increment(digits, counts)
            fill_partial(weighted, questions, choices, digits, partial, p)
    return best, best_code


@numba.njit(cache=True)
def sweep_subset(table: np.ndarray, weights: np.ndarray, subset: np.ndarray):
    """
    Loop over every assignment of answers to the questions in ``subset``,
    let the second player best respond to it on the subset, let the first
    player best respond on all questions, and keep the best induced profile.

    Returns the best value, the code of the first assignment attaining it
    and the code of the first assignment inducing a perfect profile
    (or -1 if there is none).
    """
    n_x = table.shape[0]
    n_y = table.shape[1]
    n_a = table.shape[2]
    n_b = table.shape[3]
    kappa = len(subset)

    weighted = np.zeros((kappa, n_y, n_a, n_b))
    for p in range(kappa):
        for y in range(n_y):
            for a in range(n_a):
                for b in range(n_b):
                    weighted[p, y, a, b] = (
                        weights[subset[p], y] * table[subset[p], y, a, b]
                    )

    counts = np.full(kappa, n_a, dtype=np.int64)
    choices = np.zeros((kappa, n_a), dtype=np.int64)
    for p in range(kappa):
        for a in range(n_a):
            choices[p, a] = a
    questions = np.arange(kappa)
    digits = np.zeros(kappa, dtype=np.int64)
    partial = np.zeros((kappa + 1, n_y, n_b))
    fill_partial(weighted, questions, choices, digits, partial, 0)

    response = np.zeros(n_y, dtype=np.int64)
    total_codes = n_a**kappa
    best = -1.0
    best_code = 0
    perfect_code = -1
    for code in range(total_codes):
        for y in range(n_y):
            bb = 0
            m = partial[kappa, y, 0]
            for b in range(1, n_b):
                if partial[kappa, y, b] > m:
                    m = partial[kappa, y, b]
                    bb = b
            response[y] = bb

        value = 0.0
        perfect = True
        for x in range(n_x):
            best_a = 0
            best_s = -1.0
            for a in range(n_a):
                s = 0.0
                for y in range(n_y):
                    s += weights[x, y] * table[x, y, a, response[y]]
                if s > best_s:
                    best_s = s
                    best_a = a
            value += best_s
            if perfect:
                for y in range(n_y):
                    if weights[x, y] > 0 and table[x, y, best_a, response[y]] < 1.0:
                        perfect = False
                        break
        if value > best:
            best = value
            best_code = code
        if perfect and perfect_code < 0:
            perfect_code = code
        if code + 1 < total_codes:
            p = increment(digits, counts)
            fill_partial(weighted, questions, choices, digits, partial, p)
    return best, best_code, perfect_code


@numba.njit(cache=True)
def search_perfect(table: np.ndarray, weights: np.ndarray, subset: np.ndarray):
    """
    Depth-first search over assignments to ``subset`` keeping, for every
    second-player question, the answers that accept against all assigned
    questions. Branches where some question loses all its answers are cut.

    At a leaf the second player takes its first surviving answer, the first
    player best responds on every question and the second player best
    responds to that. This lifted profile is the one that is scored.

    Returns ``(perfect_code, best_value, best_code, leaves, dead_ends,
    fail_x, fail_y, fail_a, fail_b)``. The failure fields describe the first
    rejection met during the search.
    """
    n_x = table.shape[0]
    n_y = table.shape[1]
    n_a = table.shape[2]
    n_b = table.shape[3]
    kappa = len(subset)

    compat = np.ones((kappa + 1, n_y, n_b), dtype=np.bool_)
    digits = np.zeros(kappa, dtype=np.int64)
    response = np.zeros(n_y, dtype=np.int64)
    first = np.zeros(n_x, dtype=np.int64)
    second = np.zeros(n_y, dtype=np.int64)

    best = -1.0
    best_code = -1
    perfect_code = -1
    leaves = 0
    dead_ends = 0
    fail_x = -1
    fail_y = -1
    fail_a = -1
    fail_b = -1

    depth = 0
    digits[0] = 0
    while depth >= 0:
        if digits[depth] >= n_a:
            # exhausted this level
            digits[depth] = 0
            depth -= 1
            if depth >= 0:
                digits[depth] += 1
            continue

        x = subset[depth]
        a = digits[depth]
        alive = True
        for y in range(n_y):
            any_b = False
            for b in range(n_b):
                ok = compat[depth, y, b] and (
                    weights[x, y] == 0 or table[x, y, a, b] >= 1.0
                )
                compat[depth + 1, y, b] = ok
                any_b = any_b or ok
            if not any_b:
                alive = False
                if fail_x < 0:
                    fail_x = x
                    fail_y = y
                    fail_a = a
                break
        if not alive:
            dead_ends += 1
            digits[depth] += 1
            continue
        if depth + 1 < kappa:
            depth += 1
            digits[depth] = 0
            continue

        # leaf: every second-player question keeps at least one answer
        leaves += 1
        code = 0
        for p in range(kappa):
            code = code * n_a + digits[p]
        for y in range(n_y):
            response[y] = 0
            for b in range(n_b):
                if compat[kappa, y, b]:
                    response[y] = b
                    break
        for xx in range(n_x):
            best_a = 0
            best_s = -1.0
            for aa in range(n_a):
                s = 0.0
                for y in range(n_y):
                    s += weights[xx, y] * table[xx, y, aa, response[y]]
                if s > best_s:
                    best_s = s
                    best_a = aa
            first[xx] = best_a
        value = 0.0
        for y in range(n_y):
            best_b = 0
            best_s = -1.0
            for b in range(n_b):
                s = 0.0
                for xx in range(n_x):
                    s += weights[xx, y] * table[xx, y, first[xx], b]
                if s > best_s:
                    best_s = s
                    best_b = b
            second[y] = best_b
            value += best_s
        perfect = True
        for xx in range(n_x):
            if not perfect:
                break
            for y in range(n_y):
                if weights[xx, y] > 0 and table[xx, y, first[xx], second[y]] < 1.0:
                    perfect = False
                    if fail_x < 0:
                        fail_x = xx
                        fail_y = y
                        fail_a = first[xx]
                        fail_b = second[y]
                    break
        if value > best:
            best = value
            best_code = code
        if perfect:
            perfect_code = code
            break
        digits[depth] += 1

    return (
        perfect_code,
        best,
        best_code,
        leaves,
        dead_ends,
        fail_x,
        fail_y,
        fail_a,
        fail_b,
    )
