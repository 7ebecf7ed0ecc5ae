# # Exact experiments on small instances
#
# Birthday repetition replaces the uniform distribution over pairs of
# question blocks by one that is close to it. Here the two distributions,
# the collision probability and the value gap are computed exactly.

import freegames
from freegames import experiments

formula = experiments.eight_patterns()
distance = experiments.variation_distance(formula, 2, 2)
print("||D - U|| =", distance.distance, float(distance.distance))
print("sampling process matches:", distance.process_matches)

# Probability that random blocks of a biregular graph share an edge

for name, graph in experiments.graph_corpus().items():
    record = experiments.collision_probability(graph, 1, 1)
    print(name, record.probability, record.bound, record.holds)

# The value of the repetition against the value of the base game

for name in ("eight_patterns", "two_clause", "four_subsets"):
    record = experiments.birthday_gap(experiments.formula_corpus()[name], 2, 2)
    print(name, record.omega, record.omega_birthday, record.chain_bound)

# Mean subgame value as a function of the subset size

game = freegames.constructions.random_free_game(4, 4, 2, 2, seed=0)
for row in experiments.subsample_gap_curve(game, [1, 2, 3, 4]):
    print(row)

# Threshold repetition of a game with value 1/2 is not monotone in N

base = freegames.counterexample_game(2)
for row in experiments.amplification_curve(base, [1, 2, 3]):
    print(row)

# Everything at once, as a markdown table

print(experiments.run_report())
