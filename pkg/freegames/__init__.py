from . import constructions
from . import csp
from . import experiments
from . import game
from . import save
from . import solvers
from . import utils
from .constructions import birthday_repetition
from .constructions import BirthdayGame
from .constructions import clause_variable_game
from .constructions import counterexample_game
from .constructions import free_to_2csp
from .constructions import kfree_to_kcsp
from .constructions import parallel_repetition
from .constructions import threshold_repetition
from .constructions import xor_game
from .csp import CnfFormula
from .csp import csp_restrict
from .csp import csp_sat_value
from .csp import csp_subsample_mean
from .csp import DenseCsp
from .csp import parse_dimacs
from .experiments import amplification_curve
from .experiments import birthday_gap
from .experiments import collision_probability
from .experiments import subsample_gap_curve
from .experiments import variation_distance
from .game import best_response
from .game import Distribution
from .game import exact_value
from .game import exact_value_k
from .game import FreeGame
from .game import KFreeGame
from .game import restrict_subgame
from .game import strategy_value
from .game import StrategyProfile
from .game import TwoProverGame
from .solvers import decide_one_vs_delta
from .solvers import decide_one_vs_gap
from .solvers import est_deterministic
from .solvers import est_k
from .solvers import est_k_perfect
from .solvers import est_randomized
from .solvers import subsample_estimate
from .utils import BudgetExceededError
from .utils import PromiseViolationError

__version__ = "2026.10.0"

__all__ = [
    "constructions",
    "csp",
    "experiments",
    "game",
    "save",
    "solvers",
    "utils",
    "TwoProverGame",
    "FreeGame",
    "KFreeGame",
    "Distribution",
    "StrategyProfile",
    "strategy_value",
    "best_response",
    "exact_value",
    "exact_value_k",
    "restrict_subgame",
    "CnfFormula",
    "DenseCsp",
    "parse_dimacs",
    "csp_sat_value",
    "csp_restrict",
    "csp_subsample_mean",
    "clause_variable_game",
    "BirthdayGame",
    "birthday_repetition",
    "parallel_repetition",
    "threshold_repetition",
    "free_to_2csp",
    "kfree_to_kcsp",
    "counterexample_game",
    "xor_game",
    "est_deterministic",
    "est_randomized",
    "decide_one_vs_gap",
    "decide_one_vs_delta",
    "est_k",
    "est_k_perfect",
    "subsample_estimate",
    "variation_distance",
    "collision_probability",
    "birthday_gap",
    "subsample_gap_curve",
    "amplification_curve",
    "BudgetExceededError",
    "PromiseViolationError",
]
