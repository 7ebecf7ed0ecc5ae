# # Birthday repetition of a small free game
#
# In this demo we build the game on $[n]^4$ that the Merlins lose exactly
# when Merlin 1 is asked question 0, and look at its birthday repetitions.
# The value of the base game is $1 - 1/n$ and the value of the repetition
# with blocks of $k$ questions for Merlin 1 is $1 - k/n$.

import numpy as np

import freegames
from freegames import constructions

# The base game and its exact value

n = 4
base = freegames.counterexample_game(n)
print(freegames.exact_value(base))

# Birthday repetitions are kept implicit. The verifier is evaluated on the
# fly and the dense table is only built on request, behind a size gate.

for k in range(1, n):
    repeated = freegames.birthday_repetition(base, k, 1)
    value = freegames.exact_value(repeated.materialize()).value
    print(
        f"k = {k}: shape {repeated.shape}, value {value:.4f}, "
        f"guessing bound {constructions.guessing_bound(base, k, 1):.4f}",
    )

# The same construction applied to the clause/variable game of a 3-CNF
# formula. Every clause holds every variable, so each block pair shares an
# edge and repetition cannot make the game easier.

formula = freegames.experiments.eight_patterns()
game = freegames.clause_variable_game(formula)
print("SAT =", freegames.csp.sat_value_cnf(formula).value)
print("omega =", freegames.exact_value(game).value)

repeated = freegames.birthday_repetition(game, 2, 2)
print("omega (2 x 2) =", freegames.exact_value(repeated.materialize()).value)

# Birthday games can be written to JSON as a small descriptor

print(freegames.save.dumps(freegames.save.game_to_dict(repeated))[:200])

# Parallel and threshold repetition for comparison

xor = freegames.xor_game()
print("xor:", freegames.exact_value(xor).value)
print("xor^2:", freegames.exact_value(freegames.parallel_repetition(xor, 2)).value)
values = [
    freegames.exact_value(freegames.threshold_repetition(base, m, "1/2")).value
    for m in (1, 2)
]
print("threshold 1/2:", np.round(values, 4))
