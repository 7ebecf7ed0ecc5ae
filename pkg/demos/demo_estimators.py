# # Estimating the value of a free game
#
# The estimators enumerate every subset of $\kappa$ questions of Merlin 1
# together with every assignment of answers on it. Merlin 2 best responds to
# the partial assignment, Merlin 1 best responds to that and the best
# induced profile is a lower bound on the value.

import logging

import freegames
from freegames import constructions
from freegames import solvers

logging.basicConfig(level=logging.INFO)

game = constructions.random_free_game(8, 4, 2, 2, seed=1)
omega = freegames.exact_value(game).value
print("exact value", omega)

# The subset size needed for an additive error $\epsilon$ grows like
# $\log(|Y||B|) / \epsilon^2$; on a small game it is clamped to $|X|$.
# Here we pass a smaller one directly.

for kappa in (1, 2, 3):
    report = solvers.est_deterministic(game, 0.3, kappa=kappa)
    print(kappa, report.lower_bound, report.estimate, report.sampled_sets)

# A single random subset gives the randomized estimator

report = solvers.est_randomized(game, 0.3, seed=5, kappa=3)
print(report.mode, report.lower_bound, report.sampled_sets)

# ## Value one
#
# The deciders search for a partial assignment that induces a perfect
# profile. On the clause/variable game of an unsatisfiable formula every
# branch dies and the trace tells where.

formula = freegames.experiments.eight_patterns()
report = solvers.decide_one_vs_gap(freegames.clause_variable_game(formula), 1 / 24)
print(report.verdict, report.kappa, report.trace[:2])

formula = freegames.experiments.four_subsets()
report = solvers.decide_one_vs_gap(freegames.clause_variable_game(formula), 1 / 24)
print(report.verdict, report.certificate)

# ## More than two players
#
# With k players the estimator peels off one player at a time

kgame = constructions.random_kfree_game((3, 3, 3), (2, 2, 2), seed=0)
print("exact", freegames.exact_value_k(kgame).value)
print("est_k", solvers.est_k(kgame, 0.6).lower_bound)

# and the subsampling estimate averages the exact values of random subgames

for kappa in (1, 2, 3):
    print(kappa, solvers.subsample_estimate(kgame, kappa=kappa).mean)
