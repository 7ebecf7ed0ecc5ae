import csv
import io
import json
import logging
import os
from typing import Any
from typing import Dict
from typing import Iterable
from typing import Mapping
from typing import Optional
from typing import Union

import h5py
import numpy as np

from .constructions import BirthdayGame
from .csp import Constraint
from .csp import DenseCsp
from .game import Distribution
from .game import FreeGame
from .game import KFreeGame
from .game import StrategyProfile
from .game import TwoProverGame
from .utils import GameFormatError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1

AnyGame = Union[TwoProverGame, KFreeGame, BirthdayGame]


def dumps(obj: Mapping[str, Any]) -> str:
    """Canonical JSON text: sorted keys, fixed indent, trailing newline"""
    return json.dumps(to_builtin(obj), sort_keys=True, indent=2) + "\n"


def meta_line(meta: Mapping[str, Any]) -> str:
    """Provenance as a single ``# meta: {...}`` comment line"""
    return "# meta: " + json.dumps(to_builtin(meta), sort_keys=True, separators=(",", ":")) + "\n"


def to_builtin(obj):
    """Convert numpy scalars/arrays, namedtuples and profiles to JSON types"""
    if isinstance(obj, StrategyProfile):
        return obj.to_lists()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple) and hasattr(obj, "_asdict"):
        return {k: to_builtin(v) for k, v in obj._asdict().items()}
    if isinstance(obj, Mapping):
        return {str(k): to_builtin(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(v) for v in obj]
    if isinstance(obj, (set, frozenset)):
        return [to_builtin(v) for v in sorted(obj)]
    return obj


def _distribution_dict(dist: Distribution) -> Dict[str, Any]:
    if dist.kind == "uniform_product":
        return {"type": "uniform_product"}
    if dist.kind == "uniform_support":
        return {
            "type": "uniform_support",
            "support": np.asarray(dist.support, dtype=np.int64).reshape(-1).tolist(),
        }
    return {"type": "weighted", "weights": np.asarray(dist.weights).reshape(-1).tolist()}


def game_to_dict(game: AnyGame) -> Dict[str, Any]:
    """
    JSON descriptor of a game.

    Dense two-player games are written as ``free2`` or ``general2``,
    k-player games as ``freek`` and birthday games as a ``birthday``
    descriptor holding the base game and ``k``, ``l``.
    """
    if isinstance(game, BirthdayGame):
        return {
            "kind": "birthday",
            "base": game_to_dict(game.base),
            "k": game.k,
            "l": game.l,
        }
    if isinstance(game, KFreeGame):
        return {
            "kind": "freek",
            "questions": list(game.question_counts),
            "answers": list(game.answer_counts),
            "table": game.table.reshape(-1).tolist(),
        }
    if isinstance(game, TwoProverGame):
        data: Dict[str, Any] = {
            "kind": "free2" if game.is_free else "general2",
            "x": game.x_count,
            "y": game.y_count,
            "a": game.a_count,
            "b": game.b_count,
            "table": game.table.reshape(-1).tolist(),
        }
        if not game.is_free:
            data["distribution"] = _distribution_dict(game.distribution)
        return data
    raise TypeError(f"Cannot serialize {type(game)}")


def _require(data: Mapping[str, Any], key: str):
    if key not in data:
        raise GameFormatError(f"Missing field {key!r}")
    return data[key]


def _positive_int(data: Mapping[str, Any], key: str) -> int:
    value = _require(data, key)
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise GameFormatError(f"Field {key!r} must be a positive integer, got {value!r}")
    return value


def _float_array(values, shape, what: str) -> np.ndarray:
    try:
        array = np.array(values, dtype=np.float64)
    except (TypeError, ValueError) as ex:
        raise GameFormatError(f"{what} must be a list of numbers") from ex
    size = int(np.prod(shape))
    if array.ndim != 1 or array.size != size:
        raise GameFormatError(f"{what} must have {size} entries, got {array.size}")
    return array.reshape(shape)


def _distribution_from_dict(data: Mapping[str, Any], x: int, y: int) -> Distribution:
    kind = _require(data, "type")
    if kind == "uniform_product":
        return Distribution.uniform_product()
    if kind == "uniform_support":
        mask = _float_array(_require(data, "support"), (x, y), "support")
        if not np.all((mask == 0) | (mask == 1)):
            raise GameFormatError("support entries must be 0 or 1")
        return Distribution.uniform_support(mask > 0)
    if kind == "weighted":
        return Distribution.weighted(_float_array(_require(data, "weights"), (x, y), "weights"))
    raise GameFormatError(f"Unknown distribution type {kind!r}")


def game_from_dict(data: Mapping[str, Any]) -> AnyGame:
    if not isinstance(data, Mapping):
        raise GameFormatError("A game descriptor must be a JSON object")
    kind = _require(data, "kind")
    if kind == "birthday":
        base = game_from_dict(_require(data, "base"))
        if not isinstance(base, TwoProverGame):
            raise GameFormatError("Birthday base must be a two-player game")
        try:
            return BirthdayGame(base, _positive_int(data, "k"), _positive_int(data, "l"))
        except ValueError as ex:
            raise GameFormatError(str(ex)) from ex
    if kind == "freek":
        questions = _require(data, "questions")
        answers = _require(data, "answers")
        if not isinstance(questions, list) or not isinstance(answers, list):
            raise GameFormatError("questions and answers must be lists")
        if any(not isinstance(v, int) or isinstance(v, bool) or v < 1 for v in questions + answers):
            raise GameFormatError("questions and answers must be positive integers")
        shape = tuple(questions) + tuple(answers)
        table = _float_array(_require(data, "table"), shape, "table")
        return KFreeGame.from_table(table, k=len(questions))
    if kind in ("free2", "general2"):
        x, y = _positive_int(data, "x"), _positive_int(data, "y")
        a, b = _positive_int(data, "a"), _positive_int(data, "b")
        table = _float_array(_require(data, "table"), (x, y, a, b), "table")
        if kind == "free2":
            dist_data = data.get("distribution", {"type": "uniform_product"})
            if not isinstance(dist_data, Mapping) or dist_data.get("type") != "uniform_product":
                raise GameFormatError("free2 games have a uniform product distribution")
            return FreeGame.from_table(table)
        dist = _distribution_from_dict(_require(data, "distribution"), x, y)
        return TwoProverGame.from_table(table, dist)
    raise GameFormatError(f"Unknown game kind {kind!r}")


def csp_to_dict(csp: DenseCsp) -> Dict[str, Any]:
    return {
        "kind": "csp",
        "n_vars": csp.n_vars,
        "alphabet": csp.alphabet_size,
        "arity": csp.arity,
        "constraints": [
            {
                "scope": list(c.scope),
                "weight": float(c.weight),
                "payoff": np.asarray(c.payoff).reshape(-1).tolist(),
            }
            for c in csp.constraints
        ],
    }


def csp_from_dict(data: Mapping[str, Any]) -> DenseCsp:
    if not isinstance(data, Mapping) or data.get("kind") != "csp":
        raise GameFormatError("A CSP descriptor must be a JSON object of kind 'csp'")
    n_vars = _positive_int(data, "n_vars")
    alphabet = _positive_int(data, "alphabet")
    arity = _positive_int(data, "arity")
    constraints = []
    try:
        for i, item in enumerate(_require(data, "constraints")):
            scope = tuple(int(v) for v in _require(item, "scope"))
            shape = (alphabet,) * arity
            payoff = _float_array(_require(item, "payoff"), shape, f"payoff {i}")
            constraints.append(Constraint(scope, float(item.get("weight", 1.0)), payoff))
        return DenseCsp(n_vars, alphabet, arity, tuple(constraints))
    except GameFormatError:
        raise
    except (TypeError, ValueError, AttributeError) as ex:
        raise GameFormatError(str(ex)) from ex


def load_json(text: Union[str, bytes]) -> Dict[str, Any]:
    try:
        data = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as ex:
        raise GameFormatError(f"Invalid JSON: {ex}") from ex
    if not isinstance(data, dict):
        raise GameFormatError("Expected a JSON object")
    return data


def save_game_h5(
    game: Union[TwoProverGame, KFreeGame],
    h5name: str,
    h5group: str = "game",
    meta: Optional[Mapping[str, Any]] = None,
):
    """
    Save a dense game to an HDF5 file.

    The table goes to ``<h5group>/table``; a non-uniform distribution to
    ``<h5group>/support`` or ``<h5group>/weights``. Existing groups of the
    same name are replaced.

    The group attributes hold ``schema_version``, the package ``version``
    and, as JSON text, the ``config`` and ``seed`` of ``meta``.
    """
    from . import __version__

    meta = dict(meta or {})
    file_mode = "a" if os.path.isfile(h5name) else "w"
    logger.info("Save game to %s:%s", h5name, h5group)
    with h5py.File(h5name, file_mode) as h5file:
        if h5group in h5file:
            del h5file[h5group]
        group = h5file.create_group(h5group)
        group.create_dataset("table", data=game.table)
        if isinstance(game, KFreeGame):
            group.attrs["kind"] = "freek"
            group.attrs["k"] = game.k
        else:
            group.attrs["kind"] = "free2" if game.is_free else "general2"
            dist = game.distribution
            if dist.kind == "uniform_support":
                group.create_dataset("support", data=np.asarray(dist.support, dtype=np.int8))
            elif dist.kind == "weighted":
                group.create_dataset("weights", data=dist.weights)
        group.attrs["schema_version"] = SCHEMA_VERSION
        group.attrs["version"] = str(meta.get("version", __version__))
        group.attrs["config"] = json.dumps(to_builtin(meta.get("config", {})), sort_keys=True)
        group.attrs["seed"] = json.dumps(to_builtin(meta.get("seed")))


def load_dict_from_h5(fname: str, h5group: str = "") -> Dict[str, Any]:
    """
    Load the given h5file into
    a dictionary
    """
    if not os.path.isfile(fname):
        raise FileNotFoundError(f"File {fname} does not exist")

    with h5py.File(fname, "r") as h5file:

        def h52dict(hdf):
            if isinstance(hdf, h5py.Group):
                t = {str(key): h52dict(hdf[key]) for key in hdf.keys()}
                for key, value in hdf.attrs.items():
                    t[f"@{key}"] = value.item() if isinstance(value, np.generic) else value
                return t
            return np.array(hdf)

        if h5group != "" and h5group in h5file:
            return h52dict(h5file[h5group])
        return h52dict(h5file)


def load_game_h5(fname: str, h5group: str = "game") -> Union[TwoProverGame, KFreeGame]:
    data = load_dict_from_h5(fname, h5group)
    if "table" not in data:
        raise GameFormatError(f"No game table in {fname}:{h5group}")
    table = data["table"]
    kind = data.get("@kind")
    if isinstance(kind, bytes):
        kind = kind.decode()
    if kind == "freek":
        return KFreeGame.from_table(table, k=int(data["@k"]))
    if "support" in data:
        return TwoProverGame.from_table(table, Distribution.uniform_support(data["support"] > 0))
    if "weights" in data:
        return TwoProverGame.from_table(table, Distribution.weighted(data["weights"]))
    return FreeGame.from_table(table)


def write_csv(
    rows: Iterable[Mapping[str, Any]],
    fieldnames=None,
    path: Optional[str] = None,
    meta: Optional[Mapping[str, Any]] = None,
) -> str:
    """
    Write rows as CSV (``\\n`` line endings) and return the text. ``meta`` is
    written first as a ``# meta:`` comment line.
    """
    rows = [to_builtin(r) for r in rows]
    if fieldnames is None:
        fieldnames = list(rows[0]) if rows else []
    buffer = io.StringIO()
    if meta is not None:
        buffer.write(meta_line(meta))
    writer = csv.DictWriter(buffer, fieldnames=fieldnames, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: _csv_cell(row.get(k)) for k in fieldnames})
    text = buffer.getvalue()
    if path is not None:
        with open(path, "w") as f:
            f.write(text)
    return text


def _csv_cell(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return value
