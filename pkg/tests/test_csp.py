from itertools import combinations
from itertools import product

import numpy as np
import pytest

from freegames import csp
from freegames.experiments import eight_patterns
from freegames.utils import BudgetExceededError
from freegames.utils import DimacsParseError
from freegames.utils import EmptyCspError
from freegames.utils import GameFormatError


def random_csp(n_vars, alphabet, arity, n_constraints, seed):
    rng = np.random.default_rng(seed)
    constraints = []
    for _ in range(n_constraints):
        scope = tuple(rng.choice(n_vars, size=arity, replace=False).tolist())
        payoff = rng.random((alphabet,) * arity)
        constraints.append(csp.Constraint(scope, float(rng.integers(1, 4)), payoff))
    return csp.DenseCsp(n_vars, alphabet, arity, tuple(constraints))


def brute_force_sat(instance):
    return max(
        instance.evaluate(assignment)
        for assignment in product(range(instance.alphabet_size), repeat=instance.n_vars)
    )


def test_parse_single_clause():
    formula = csp.parse_dimacs(b"p cnf 3 1\n1 2 3 0\n")
    assert formula.n_vars == 3
    assert formula.clauses == ((1, 2, 3),)


def test_parse_comments_multiline_and_percent():
    text = "c a comment\np cnf 4 2\n1 -2\n 3 0 -1 2 4 0\n%\n0\n"
    formula = csp.parse_dimacs(text)
    assert formula.clauses == ((1, -2, 3), (-1, 2, 4))


@pytest.mark.parametrize(
    "text, line",
    [
        (b"p cnf 3 1\n1 1 2 0\n", 2),
        (b"p cnf 3 1\n1 2 0\n", 2),
        (b"p cnf 3 1\n1 2 3 -1 0\n", 2),
        (b"p cnf 3 1\n1 2 4 0\n", 2),
        (b"p cnf x 1\n", 1),
        (b"1 2 3 0\n", 1),
        (b"p cnf 3 2\n1 2 3 0\n", 2),
        (b"p cnf 3 1\np cnf 3 1\n", 2),
        (b"p cnf 3 1\n1 2 a 0\n", 2),
        (b"p cnf 3 1\n1 2 3\n", 2),
        (b"c header\np cnf 3 1\n1 2 \xff 0\n", 3),
        (b"\xc3\x28\n", 1),
    ],
)
def test_parse_errors_have_line_numbers(text, line):
    with pytest.raises(DimacsParseError) as info:
        csp.parse_dimacs(text)
    assert info.value.line == line


def test_eight_patterns_balance_and_sat():
    formula = eight_patterns()
    assert formula.balance.clause_degree_d == 8
    assert formula.occurrences().tolist() == [8, 8, 8]
    result = csp.sat_value_cnf(formula)
    assert np.isclose(result.value, 7 / 8)
    assert np.isclose(formula.satisfied(result.witness).mean(), 7 / 8)


def test_unbalanced_formula():
    formula = csp.CnfFormula(4, ((1, 2, 3), (1, 2, 4)))
    assert formula.balance is None


def test_dimacs_round_trip():
    formula = eight_patterns()
    assert csp.parse_dimacs(formula.to_dimacs()).clauses == formula.clauses


def test_sat_single_clause_and_empty():
    assert csp.sat_value_cnf(csp.CnfFormula(3, ((1, -2, 3),))).value == 1.0
    empty = csp.sat_value_cnf(csp.CnfFormula(3, ()))
    assert empty.value == 1.0
    assert empty.vacuous


def test_sat_invariant_under_permutation():
    rng = np.random.default_rng(4)
    formula = csp.CnfFormula(5, ((1, -2, 3), (-1, 4, 5), (2, -3, -5), (-4, -5, 1), (3, 4, -2)))
    value = csp.sat_value_cnf(formula).value
    rename = rng.permutation(5) + 1
    clauses = [
        tuple(int(np.sign(v) * rename[abs(v) - 1]) for v in c)
        for c in formula.clauses[::-1]
    ]
    assert np.isclose(csp.sat_value_cnf(csp.CnfFormula(5, tuple(clauses))).value, value)


def test_complementary_constraints():
    eq = np.eye(2)
    neq = 1 - np.eye(2)
    instance = csp.DenseCsp(2, 2, 2, (csp.Constraint((0, 1), 1.0, eq), csp.Constraint((0, 1), 1.0, neq)))
    assert np.isclose(csp.csp_sat_value(instance).value, 0.5)


def test_single_constraint_all_ones():
    instance = csp.DenseCsp(2, 3, 2, (csp.Constraint((0, 1), 2.0, np.ones((3, 3))),))
    assert csp.csp_sat_value(instance).value == 1.0


@pytest.mark.parametrize("seed", range(5))
def test_csp_sat_matches_brute_force(seed):
    instance = random_csp(4, 3, 2, 6, seed)
    result = csp.csp_sat_value(instance)
    assert np.isclose(result.value, brute_force_sat(instance), atol=1e-12)
    assert np.isclose(instance.evaluate(result.witness), result.value, atol=1e-12)


def test_csp_sat_order_independent():
    instance = random_csp(4, 3, 2, 6, 7)
    shuffled = csp.DenseCsp(4, 3, 2, instance.constraints[::-1])
    assert np.isclose(csp.csp_sat_value(instance).value, csp.csp_sat_value(shuffled).value)


def test_csp_sat_three_ary_threads():
    instance = random_csp(6, 2, 3, 8, 1)
    single = csp.csp_sat_value(instance, threads=1)
    multi = csp.csp_sat_value(instance, threads=2)
    assert single.value == multi.value
    assert np.isclose(single.value, brute_force_sat(instance))


def test_csp_empty_raises():
    instance = csp.DenseCsp(3, 2, 2, ())
    with pytest.raises(EmptyCspError):
        csp.csp_sat_value(instance)
    assert csp.csp_sat_value(instance, vacuous_ok=True).vacuous


def test_csp_budget():
    instance = random_csp(10, 3, 2, 30, 0)
    with pytest.raises(BudgetExceededError):
        csp.csp_sat_value(instance, budget=100)


def test_dense_csp_validation():
    with pytest.raises(GameFormatError):
        csp.DenseCsp(3, 2, 2, (csp.Constraint((0, 0), 1.0, np.ones((2, 2))),))
    with pytest.raises(GameFormatError):
        csp.DenseCsp(3, 2, 2, (csp.Constraint((0, 1), 0.0, np.ones((2, 2))),))
    with pytest.raises(GameFormatError):
        csp.DenseCsp(3, 2, 2, (csp.Constraint((0, 1), 1.0, np.full((2, 2), 2.0)),))
    with pytest.raises(GameFormatError):
        csp.DenseCsp(3, 2, 1, ())


def test_restrict_keeps_inside_constraints():
    instance = random_csp(5, 2, 2, 8, 3)
    subset = (0, 2, 4)
    restricted = csp.csp_restrict(instance, subset)
    expected = [c for c in instance.constraints if set(c.scope) <= set(subset)]
    assert len(restricted.constraints) == len(expected)
    for new, old in zip(restricted.constraints, expected):
        assert tuple(subset[v] for v in new.scope) == old.scope
    assert restricted.n_vars == 3


def test_restrict_all_and_too_small():
    instance = random_csp(4, 2, 3, 4, 0)
    full = csp.csp_restrict(instance, range(4))
    assert len(full.constraints) == 4
    assert csp.csp_restrict(instance, [1, 2]).is_vacuous


def test_subsample_full_size_equals_sat():
    instance = random_csp(5, 2, 2, 7, 2)
    result = csp.csp_subsample_mean(instance, 5)
    assert np.isclose(result.mean, csp.csp_sat_value(instance).value)
    assert result.stderr is None


def test_subsample_matches_brute_force():
    instance = random_csp(6, 2, 2, 9, 5)
    values = []
    for subset in combinations(range(6), 3):
        restricted = csp.csp_restrict(instance, subset)
        values.append(1.0 if restricted.is_vacuous else brute_force_sat(restricted))
    result = csp.csp_subsample_mean(instance, 3)
    assert np.isclose(result.mean, np.mean(values))
    assert result.n_samples == 20


@pytest.mark.parametrize("t", [2, 3, 4, 5, 6])
def test_subsample_mean_at_least_sat(t):
    instance = random_csp(6, 2, 2, 10, 8)
    sat = csp.csp_sat_value(instance).value
    assert csp.csp_subsample_mean(instance, t).mean >= sat - 1e-12


def test_subsample_exclude_vacuous():
    instance = csp.DenseCsp(4, 2, 2, (csp.Constraint((0, 1), 1.0, np.eye(2) * 0.5),))
    included = csp.csp_subsample_mean(instance, 2)
    excluded = csp.csp_subsample_mean(instance, 2, exclude_vacuous=True)
    assert included.n_vacuous == 5
    assert np.isclose(included.mean, (5 + 0.5) / 6)
    assert excluded.n_samples == 1
    assert np.isclose(excluded.mean, 0.5)


def test_subsample_monte_carlo_reproducible():
    instance = random_csp(6, 2, 2, 10, 1)
    a = csp.csp_subsample_mean(instance, 3, mode="monte-carlo", trials=20, seed=4)
    b = csp.csp_subsample_mean(instance, 3, mode="monte-carlo", trials=20, seed=4)
    assert a == b
    assert a.stderr is not None


def test_subsample_curve_rows():
    instance = random_csp(4, 2, 2, 5, 0)
    rows = csp.subsample_curve(instance, [2, 4])
    assert [r["t"] for r in rows] == [2, 4]
    assert set(rows[0]) == {"t", "mean", "stderr", "n_samples"}


def test_cnf_to_csp_agrees():
    formula = eight_patterns()
    assert np.isclose(
        csp.csp_sat_value(csp.cnf_to_csp(formula)).value,
        csp.sat_value_cnf(formula).value,
    )


def test_density():
    complete = csp.DenseCsp(
        3,
        2,
        2,
        tuple(csp.Constraint(s, 1.0, np.ones((2, 2))) for s in combinations(range(3), 2)),
    )
    assert csp.csp_density(complete) == 1.0
    single = csp.DenseCsp(3, 2, 2, (csp.Constraint((0, 1), 1.0, np.ones((2, 2))),))
    assert csp.csp_density(single) == 0.0
