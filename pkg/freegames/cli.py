import argparse
import logging
import sys
from dataclasses import asdict
from dataclasses import dataclass
from dataclasses import field
from fractions import Fraction
from typing import Any
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence

from . import constructions
from . import experiments
from . import save
from . import solvers
from .csp import cnf_to_csp
from .csp import csp_sat_value
from .csp import csp_subsample_mean
from .csp import DenseCsp
from .csp import parse_dimacs
from .game import as_kfree
from .game import dense_game
from .game import exact_value
from .game import exact_value_k
from .game import KFreeGame
from .game import TwoProverGame
from .utils import BudgetExceededError
from .utils import GameFormatError
from .utils import PromiseViolationError
from .utils import UsageError

logger = logging.getLogger(__name__)

TOOL = "freegames"

EXIT_OK = 0
EXIT_BELOW_GAP = 1
EXIT_ERROR = 2
EXIT_USAGE = 64
EXIT_BUDGET = 65

GEN_KINDS = ("counterexample", "cvgame", "birthday", "parrep", "threshold", "random", "xor", "guessing")
SOLVE_METHODS = ("exact", "est", "rest", "decide_gap", "decide_delta", "est_k", "subsample")
CONVERT_SOURCES = ("dimacs", "game-json", "csp-json", "game-h5")
CONVERT_TARGETS = ("cvgame", "2csp", "kcsp", "game-json", "csp-json", "game-h5")
EXPERIMENTS = ("vardist", "collision", "birthday-gap", "subsample", "amplify", "report")

# Fields that do not change the content of an output
NOT_ECHOED = ("input", "output", "threads", "log_level", "h5group")


def _version() -> str:
    from . import __version__

    return __version__


@dataclass
class RunConfig:
    command: str
    target: Optional[str] = None
    input: str = "-"
    output: Optional[str] = None
    source: Optional[str] = None
    h5group: str = "game"
    epsilon: Optional[float] = None
    delta: Optional[float] = None
    lam: float = 3.0
    kappa: Optional[int] = None
    kappas: List[int] = field(default_factory=list)
    seed: Optional[int] = None
    budget: Optional[int] = None
    table_limit: Optional[int] = None
    threads: int = 1
    n: Optional[int] = None
    k: Optional[int] = None
    l: Optional[int] = None  # noqa: E741
    m: Optional[int] = None
    N: List[int] = field(default_factory=list)
    threshold: str = "1/2"
    trials: int = 100
    mode: str = "exact"
    sampling: str = "distinct"
    restrict: str = "all"
    questions: List[int] = field(default_factory=list)
    answers: List[int] = field(default_factory=list)
    boolean: bool = False
    dense: bool = False
    strict: bool = False
    format: str = "json"
    log_level: str = "WARNING"

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunConfig":
        names = set(cls.__dataclass_fields__)
        return cls(**{k: v for k, v in vars(args).items() if k in names and v is not None})

    def echo(self) -> Dict[str, Any]:
        return {k: v for k, v in asdict(self).items() if k not in NOT_ECHOED}

    def validate(self) -> "RunConfig":
        """Reject every out-of-range parameter before any work starts"""

        def unit(name, value, closed=False):
            if value is None:
                return
            ok = 0 <= value <= 1 if closed else 0 < value < 1
            if not ok:
                interval = "[0, 1]" if closed else "(0, 1)"
                raise UsageError(f"--{name} must lie in {interval}, got {value}")

        def positive(name, value, minimum=1):
            if value is None:
                return
            if value < minimum:
                raise UsageError(f"--{name} must be at least {minimum}, got {value}")

        unit("eps", self.epsilon)
        unit("delta", self.delta)
        if self.lam <= 0:
            raise UsageError(f"--lambda must be positive, got {self.lam}")
        for name in ("kappa", "budget", "table_limit", "threads", "k", "l", "m", "trials"):
            positive(name, getattr(self, name))
        for value in self.kappas + self.N + self.questions + self.answers:
            positive("kappas/N/questions/answers", value)
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise UsageError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")
        try:
            threshold = Fraction(self.threshold)
        except (ValueError, ZeroDivisionError) as ex:
            raise UsageError(f"--threshold {self.threshold!r} is not a number") from ex
        unit("threshold", threshold, closed=True)
        if self.mode not in ("exact", "monte-carlo"):
            raise UsageError(f"--mode must be 'exact' or 'monte-carlo', got {self.mode!r}")
        if self.format not in ("json", "csv", "human"):
            raise UsageError(f"--format must be json, csv or human, got {self.format!r}")

        needs = {
            ("gen", "counterexample"): ("n",),
            ("gen", "guessing"): ("n",),
            ("gen", "birthday"): ("k", "l"),
            ("gen", "parrep"): ("m",),
            ("gen", "threshold"): ("N",),
            ("solve", "est"): ("epsilon",),
            ("solve", "rest"): ("epsilon",),
            ("solve", "decide_gap"): ("epsilon",),
            ("solve", "decide_delta"): ("delta",),
            ("solve", "est_k"): ("epsilon",),
            ("experiment", "vardist"): ("k", "l"),
            ("experiment", "collision"): ("k", "l"),
            ("experiment", "birthday-gap"): ("k", "l"),
            ("experiment", "subsample"): ("kappas",),
            ("experiment", "amplify"): ("N",),
        }
        for name in needs.get((self.command, self.target or ""), ()):
            if getattr(self, name) in (None, []):
                raise UsageError(f"{self.command} {self.target} needs --{name}")
        if self.command == "gen":
            positive("n", self.n, minimum=2 if self.target == "counterexample" else 1)
            if self.target == "threshold" and len(self.N) != 1:
                raise UsageError("gen threshold takes a single --N")
            if self.target == "random":
                if not self.questions or len(self.questions) != len(self.answers):
                    raise UsageError("gen random needs matching --questions and --answers")
        if self.command == "convert":
            if self.source not in CONVERT_SOURCES:
                raise UsageError(f"--from must be one of {CONVERT_SOURCES}")
            if self.target not in CONVERT_TARGETS:
                raise UsageError(f"--to must be one of {CONVERT_TARGETS}")
            if self.target == "game-h5" and self.output is None:
                raise UsageError("--to game-h5 needs --json-out/--output path")
            if self.source == "game-h5" and self.input == "-":
                raise UsageError("--from game-h5 needs an input path")
        if self.command == "solve" and self.target == "subsample" and self.kappa is None:
            unit("eps", self.epsilon if self.epsilon is not None else 0.1)
        return self


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("input", nargs="?", default="-", help="Input file, '-' for stdin")
    parser.add_argument("--budget", type=int, help="Evaluation budget (default $FREEGAMES_BUDGET or 1e8)")
    parser.add_argument(
        "--table-limit",
        dest="table_limit",
        type=int,
        help="Largest dense table built from an implicit game (default 1e7 entries)",
    )
    parser.add_argument("--threads", type=int, default=1, help="Worker processes")
    parser.add_argument("--seed", type=int, help="Random seed")
    parser.add_argument("--json-out", "--output", dest="output", help="Write the output here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog=TOOL, description="Build, transform and solve free games.")
    parser.add_argument(
        "--version",
        action="version",
        version=f"{TOOL} {_version()} (schema {save.SCHEMA_VERSION})",
    )
    parser.add_argument("--log-level", default="WARNING", help="Logging level on stderr")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    gen = sub.add_parser("gen", help="Generate a game")
    gen.add_argument("target", choices=GEN_KINDS)
    _common(gen)
    gen.add_argument("--n", type=int)
    gen.add_argument("--k", type=int)
    gen.add_argument("--l", type=int)
    gen.add_argument("--m", type=int)
    gen.add_argument("--N", type=int, nargs="+")
    gen.add_argument("--threshold", default="1/2")
    gen.add_argument("--questions", type=int, nargs="+")
    gen.add_argument("--answers", type=int, nargs="+")
    gen.add_argument("--boolean", action="store_true")
    gen.add_argument("--dense", action="store_true", help="Materialize birthday games")

    solve = sub.add_parser("solve", help="Solve or estimate a game")
    _common(solve)
    methods = solve.add_mutually_exclusive_group(required=True)
    for name in SOLVE_METHODS:
        methods.add_argument(
            "--" + name.replace("_", "-"),
            dest="target",
            action="store_const",
            const=name,
        )
    solve.add_argument("--eps", dest="epsilon", type=float)
    solve.add_argument("--delta", type=float)
    solve.add_argument("--lambda", dest="lam", type=float, default=3.0)
    solve.add_argument("--kappa", type=int)
    solve.add_argument("--mode", default="exact")
    solve.add_argument("--trials", type=int, default=100)
    solve.add_argument(
        "--strict",
        action="store_true",
        help="Deciders raise on profiles that contradict the promise instead of warning",
    )

    convert = sub.add_parser("convert", help="Convert between formats and encodings")
    _common(convert)
    convert.add_argument("--from", dest="source", required=True, choices=CONVERT_SOURCES)
    convert.add_argument("--to", dest="target", required=True, choices=CONVERT_TARGETS)
    convert.add_argument("--sampling", default="distinct", choices=("distinct", "independent"))
    convert.add_argument("--h5group", default="game")

    experiment = sub.add_parser("experiment", help="Run an exact experiment")
    experiment.add_argument("target", choices=EXPERIMENTS)
    _common(experiment)
    experiment.add_argument("--k", type=int)
    experiment.add_argument("--l", type=int)
    experiment.add_argument("--kappas", type=int, nargs="+")
    experiment.add_argument("--N", type=int, nargs="+")
    experiment.add_argument("--threshold", default="1/2")
    experiment.add_argument("--restrict", default="all", choices=("all", "first"))
    experiment.add_argument("--lambda", dest="lam", type=float, default=3.0)
    experiment.add_argument("--format", default="json")
    return parser


def _read(path: str, binary: bool = False):
    if path == "-":
        return sys.stdin.buffer.read() if binary else sys.stdin.read()
    with open(path, "rb" if binary else "r") as f:
        return f.read()


def _write(text: str, path: Optional[str]) -> None:
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(path, "w") as f:
            f.write(text)


def _load_formula(config: RunConfig):
    return parse_dimacs(_read(config.input, binary=True))


def _load_any(config: RunConfig):
    text = _read(config.input, binary=True)
    if text.lstrip()[:1] != b"{":
        return constructions.clause_variable_game(parse_dimacs(text))
    data = save.load_json(text)
    if data.get("kind") == "csp":
        return save.csp_from_dict(data)
    return save.game_from_dict(data)


def _load_game(config: RunConfig):
    obj = _load_any(config)
    if isinstance(obj, DenseCsp):
        raise UsageError("Expected a game, got a CSP")
    return obj


def _meta(config: RunConfig) -> Dict[str, Any]:
    return {
        "tool": TOOL,
        "version": _version(),
        "schema_version": save.SCHEMA_VERSION,
        "config": config.echo(),
        "seed": config.seed,
    }


def _envelope(config: RunConfig, result) -> str:
    return save.dumps({**_meta(config), "result": result})


def _with_meta(config: RunConfig, descriptor: Dict[str, Any]) -> str:
    return save.dumps({**descriptor, "meta": _meta(config)})


def run_gen(config: RunConfig) -> int:
    target = config.target
    if target == "counterexample":
        game = constructions.counterexample_game(config.n)
    elif target == "guessing":
        game = constructions.question_guessing_game(config.n)
    elif target == "xor":
        game = constructions.xor_game()
    elif target == "cvgame":
        game = constructions.clause_variable_game(_load_formula(config))
    elif target == "random":
        if len(config.questions) == 2:
            game = constructions.random_free_game(
                *config.questions,
                *config.answers,
                seed=config.seed,
                boolean=config.boolean,
            )
        else:
            game = constructions.random_kfree_game(
                config.questions,
                config.answers,
                seed=config.seed,
                boolean=config.boolean,
            )
    else:
        base = _load_game(config)
        if not isinstance(base, TwoProverGame):
            raise UsageError(f"gen {target} needs a two-player game")
        if target == "birthday":
            game = constructions.birthday_repetition(base, config.k, config.l)
            if config.dense:
                game = game.materialize(config.table_limit)
        elif target == "parrep":
            game = constructions.parallel_repetition(base, config.m, budget=config.budget)
        else:
            game = constructions.threshold_repetition(
                base,
                config.N[0],
                config.threshold,
                budget=config.budget,
            )
    _write(_with_meta(config, save.game_to_dict(game)), config.output)
    return EXIT_OK


def _solve_csp(config: RunConfig, csp: DenseCsp) -> int:
    if config.target == "exact":
        result = csp_sat_value(csp, budget=config.budget, threads=config.threads)
    elif config.target == "subsample":
        if config.kappa is None:
            raise UsageError("solve --subsample on a CSP needs --kappa (subset size)")
        result = csp_subsample_mean(
            csp,
            config.kappa,
            mode=config.mode,
            trials=config.trials,
            seed=config.seed,
            budget=config.budget,
            threads=config.threads,
        )
    else:
        raise UsageError(f"solve --{config.target} does not apply to a CSP")
    _write(_envelope(config, result), config.output)
    return EXIT_OK


def run_solve(config: RunConfig) -> int:
    obj = _load_any(config)
    if isinstance(obj, DenseCsp):
        return _solve_csp(config, obj)
    target = config.target
    budget, threads = config.budget, config.threads
    if target == "exact":
        game = dense_game(obj, limit=config.table_limit)
        if isinstance(game, KFreeGame):
            result = exact_value_k(game, budget=budget, threads=threads)
        else:
            result = exact_value(game, budget=budget, threads=threads)
    elif target in ("est", "rest"):
        kwargs = dict(kappa=config.kappa, budget=budget, threads=threads)
        game = _two_player(obj, config.table_limit)
        if target == "est":
            result = solvers.est_deterministic(game, config.epsilon, **kwargs)
        else:
            seed = 0 if config.seed is None else config.seed
            result = solvers.est_randomized(game, config.epsilon, seed=seed, **kwargs)
    elif target in ("decide_gap", "decide_delta"):
        game = _two_player(obj, config.table_limit)
        kwargs = dict(
            seed=config.seed,
            kappa=config.kappa,
            budget=budget,
            threads=threads,
            strict=config.strict,
        )
        if target == "decide_gap":
            result = solvers.decide_one_vs_gap(game, config.epsilon, **kwargs)
        else:
            result = solvers.decide_one_vs_delta(game, config.delta, **kwargs)
        _write(_envelope(config, result), config.output)
        return EXIT_OK if result.verdict == solvers.VALUE_ONE else EXIT_BELOW_GAP
    elif target == "est_k":
        result = solvers.est_k(obj, config.epsilon, seed=config.seed, budget=budget)
    else:
        result = solvers.subsample_estimate(
            as_kfree(dense_game(obj, limit=config.table_limit)),
            epsilon=config.epsilon if config.epsilon is not None else 0.1,
            lam=config.lam,
            mode=config.mode,
            trials=config.trials,
            seed=config.seed,
            kappa=config.kappa,
            budget=budget,
            threads=threads,
        )
    _write(_envelope(config, result), config.output)
    return EXIT_OK


def _two_player(obj, limit: Optional[int] = None) -> TwoProverGame:
    game = dense_game(obj, limit=limit)
    if isinstance(game, KFreeGame):
        if game.k != 2:
            raise UsageError(f"This method needs a two-player game, got k = {game.k}")
        return game.as_free()
    return game


def run_convert(config: RunConfig) -> int:
    source, target = config.source, config.target
    if source == "dimacs":
        formula = _load_formula(config)
        if target == "cvgame":
            obj: Any = constructions.clause_variable_game(formula)
        elif target == "csp-json":
            obj = cnf_to_csp(formula)
        else:
            raise UsageError(f"Cannot convert dimacs to {target}")
    elif source == "csp-json":
        if target != "csp-json":
            raise UsageError(f"Cannot convert csp-json to {target}")
        obj = save.csp_from_dict(save.load_json(_read(config.input, binary=True)))
    else:
        if source == "game-h5":
            game: Any = save.load_game_h5(config.input, config.h5group)
        else:
            game = save.game_from_dict(save.load_json(_read(config.input, binary=True)))
        if target == "2csp":
            obj = constructions.free_to_2csp(_two_player(game, config.table_limit), budget=config.budget)
        elif target == "kcsp":
            obj = constructions.kfree_to_kcsp(
                as_kfree(dense_game(game, limit=config.table_limit)),
                sampling=config.sampling,
                budget=config.budget,
            )
        elif target == "game-json":
            obj = game
        elif target == "game-h5":
            save.save_game_h5(
                dense_game(game, limit=config.table_limit),
                config.output,
                config.h5group,
                meta=_meta(config),
            )
            return EXIT_OK
        else:
            raise UsageError(f"Cannot convert {source} to {target}")

    if isinstance(obj, DenseCsp):
        descriptor = save.csp_to_dict(obj)
    else:
        descriptor = save.game_to_dict(obj)
    _write(_with_meta(config, descriptor), config.output)
    return EXIT_OK


def _emit_rows(config: RunConfig, rows: Sequence[Dict[str, Any]]) -> None:
    if config.format == "csv":
        _write(save.write_csv(rows, meta=_meta(config)), config.output)
    elif config.format == "human":
        lines = ["  ".join(f"{k}={v}" for k, v in save.to_builtin(r).items()) for r in rows]
        _write(save.meta_line(_meta(config)) + "\n".join(lines) + "\n", config.output)
    else:
        _write(_envelope(config, list(rows)), config.output)


def _record_row(record) -> Dict[str, Any]:
    row = {}
    for key, value in record._asdict().items():
        if key == "pair":
            continue
        row[key] = str(value) if isinstance(value, Fraction) else value
    return row


def run_experiment(config: RunConfig) -> int:
    target = config.target
    budget, threads = config.budget, config.threads
    if target == "report":
        report = experiments.run_report(budget=budget, threads=threads)
        meta = save.meta_line(_meta(config)).rstrip("\n")
        _write(f"<!-- {meta} -->\n" + report, config.output)
        return EXIT_OK
    if target == "vardist":
        record = experiments.variation_distance(_load_formula(config), config.k, config.l, budget=budget)
        rows = [_record_row(record)]
    elif target == "collision":
        incidence = _load_formula(config).incidence()
        rows = [_record_row(experiments.collision_probability(incidence, config.k, config.l, budget=budget))]
    elif target == "birthday-gap":
        record = experiments.birthday_gap(
            _load_formula(config),
            config.k,
            config.l,
            budget=budget,
            threads=threads,
        )
        rows = [_record_row(record)]
    elif target == "subsample":
        rows = experiments.subsample_gap_curve(
            dense_game(_load_game(config), limit=config.table_limit),
            config.kappas,
            restrict=config.restrict,
            lam=config.lam,
            budget=budget,
            threads=threads,
        )
    else:
        rows = experiments.amplification_curve(
            _two_player(_load_game(config), config.table_limit),
            config.N,
            threshold=config.threshold,
            budget=budget,
            threads=threads,
        )
    _emit_rows(config, rows)
    return EXIT_OK


COMMANDS = {
    "gen": run_gen,
    "solve": run_solve,
    "convert": run_convert,
    "experiment": run_experiment,
}


def run(config: RunConfig) -> int:
    """Validate ``config``, dispatch it and map failures to exit codes"""
    try:
        config.validate()
        return COMMANDS[config.command](config)
    except (UsageError, GameFormatError) as ex:
        print(f"{TOOL}: usage error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    except BudgetExceededError as ex:
        report = {"error": "budget exceeded", "what": ex.what, "cost": ex.cost, "budget": ex.budget}
        if ex.breakdown:
            report["breakdown"] = ex.breakdown
        sys.stderr.write(save.dumps(report))
        return EXIT_BUDGET
    except PromiseViolationError as ex:
        print(f"{TOOL}: promise violated: {ex}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, TypeError, OSError) as ex:
        print(f"{TOOL}: error: {ex}", file=sys.stderr)
        return EXIT_ERROR


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as ex:
        print(f"{TOOL}: usage error: {ex}", file=sys.stderr)
        return EXIT_USAGE
    level = getattr(logging, str(args.log_level).upper(), None)
    if not isinstance(level, int):
        print(f"{TOOL}: usage error: unknown log level {args.log_level!r}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    return run(RunConfig.from_args(args))
