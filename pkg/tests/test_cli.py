import json

import numpy as np
import pytest

import freegames
from freegames import cli
from freegames import constructions
from freegames import save
from freegames.experiments import eight_patterns


def run_cli(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    captured = capsys.readouterr()
    return code, captured.out, captured.err


@pytest.fixture
def workdir(tmp_path):
    return tmp_path


@pytest.fixture
def eight_cnf(workdir):
    path = workdir.joinpath("eight.cnf")
    path.write_text(eight_patterns().to_dimacs())
    return path


@pytest.fixture
def perfect_game(workdir):
    path = workdir.joinpath("ones.json")
    path.write_text(
        save.dumps({"kind": "free2", "x": 3, "y": 2, "a": 2, "b": 2, "table": [1.0] * 24}),
    )
    return path


@pytest.fixture
def random_game(workdir):
    path = workdir.joinpath("random.json")
    path.write_text(save.dumps(save.game_to_dict(constructions.random_free_game(5, 3, 2, 2, seed=1))))
    return path


def test_gen_then_solve_counterexample(capsys, workdir):
    path = workdir.joinpath("cex.json")
    code, out, _ = run_cli(capsys, "gen", "counterexample", "--n", 4, "--output", path)
    assert code == 0
    assert out == ""
    descriptor = json.loads(path.read_text())
    assert descriptor["meta"]["tool"] == "freegames"
    assert descriptor["meta"]["config"]["n"] == 4

    code, out, _ = run_cli(capsys, "solve", "--exact", path)
    assert code == 0
    envelope = json.loads(out)
    assert np.isclose(envelope["result"]["value"], 0.75)
    assert envelope["version"] == freegames.__version__
    assert envelope["schema_version"] == save.SCHEMA_VERSION


def test_solve_perfect_game(capsys, perfect_game):
    code, out, _ = run_cli(capsys, "solve", "--exact", perfect_game)
    assert code == 0
    assert json.loads(out)["result"]["value"] == pytest.approx(1.0)

    code, out, _ = run_cli(capsys, "solve", "--decide-gap", "--eps", 0.1, perfect_game)
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "value-one"


def test_decide_gap_below_gap_exits_one(capsys, eight_cnf):
    code, out, _ = run_cli(capsys, "solve", "--decide-gap", "--eps", repr(1 / 24), eight_cnf)
    assert code == 1
    result = json.loads(out)["result"]
    assert result["verdict"] == "value-below-gap"
    assert result["trace"]


def test_solve_dimacs_exact(capsys, eight_cnf):
    code, out, _ = run_cli(capsys, "solve", "--exact", eight_cnf)
    assert code == 0
    assert json.loads(out)["result"]["value"] <= 1 - 1 / 24 + 1e-12


@pytest.mark.parametrize(
    "argv",
    [
        ["solve", "--eps", "0.1"],
        ["solve", "--est", "--exact"],
        ["solve", "--est", "--eps", "1.5"],
        ["solve", "--est"],
        ["gen", "counterexample"],
        ["gen", "counterexample", "--n", "1"],
        ["gen", "random", "--questions", "2", "2", "--answers", "2"],
        ["gen", "threshold", "--N", "2", "--threshold", "3/2"],
        ["experiment", "vardist", "--k", "1"],
        ["convert", "--from", "dimacs"],
        ["convert", "--from", "game-json", "--to", "game-h5"],
        ["solve", "--exact", "--threads", "0"],
        ["--log-level", "chatty", "gen", "xor"],
        ["dance"],
    ],
)
def test_usage_errors(capsys, argv):
    code, out, err = run_cli(capsys, *argv)
    assert code == cli.EXIT_USAGE
    assert out == ""
    assert "usage error" in err


def test_malformed_game_is_a_usage_error(capsys, workdir):
    path = workdir.joinpath("bad.json")
    path.write_text(json.dumps({"kind": "free2", "x": 1, "y": 1, "a": 1, "b": 1, "table": [2.0]}))
    code, _, err = run_cli(capsys, "solve", "--exact", path)
    assert code == cli.EXIT_USAGE
    assert "usage error" in err


def test_malformed_dimacs_is_an_error(capsys, workdir):
    path = workdir.joinpath("bad.cnf")
    path.write_text("p cnf 3 1\n1 2 4 0\n")
    code, _, err = run_cli(capsys, "convert", "--from", "dimacs", "--to", "cvgame", path)
    assert code == cli.EXIT_ERROR
    assert "line 2" in err


def test_invalid_utf8_dimacs_reports_line(capsys, workdir):
    path = workdir.joinpath("latin1.cnf")
    path.write_bytes(b"p cnf 3 1\n1 2 \xe9 0\n")
    code, out, err = run_cli(capsys, "convert", "--from", "dimacs", "--to", "cvgame", path)
    assert code == cli.EXIT_ERROR
    assert out == ""
    assert "line 2" in err


def test_budget_exceeded(capsys, random_game):
    code, out, err = run_cli(capsys, "solve", "--exact", random_game, "--budget", 1)
    assert code == cli.EXIT_BUDGET
    assert out == ""
    report = json.loads(err)
    assert report["error"] == "budget exceeded"
    assert report["budget"] == 1
    assert report["cost"] > 1


def test_version(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["--version"])
    assert info.value.code == 0
    out = capsys.readouterr().out
    assert f"freegames {freegames.__version__}" in out


def test_threads_do_not_change_output(capsys, random_game):
    outputs = []
    for threads in (1, 2):
        code, out, _ = run_cli(capsys, "solve", "--est", "--eps", 0.3, "--kappa", 2, "--threads", threads, random_game)
        assert code == 0
        outputs.append(out)
    assert outputs[0] == outputs[1]


def test_gen_random_is_reproducible(capsys):
    argv = ["gen", "random", "--questions", 2, 3, "--answers", 2, 2, "--seed", 5]
    _, first, _ = run_cli(capsys, *argv)
    _, second, _ = run_cli(capsys, *argv)
    assert first == second
    assert json.loads(first)["kind"] == "free2"
    _, third, _ = run_cli(capsys, "gen", "random", "--questions", 2, 2, 2, "--answers", 2, 2, 2, "--seed", 5)
    assert json.loads(third)["kind"] == "freek"


def test_gen_from_base_game(capsys, workdir):
    base = workdir.joinpath("base.json")
    run_cli(capsys, "gen", "counterexample", "--n", 3, "--output", base)

    code, out, _ = run_cli(capsys, "gen", "birthday", "--k", 2, "--l", 1, base)
    assert code == 0
    assert json.loads(out)["kind"] == "birthday"

    dense = workdir.joinpath("dense.json")
    run_cli(capsys, "gen", "birthday", "--k", 2, "--l", 1, "--dense", base, "--output", dense)
    _, out, _ = run_cli(capsys, "solve", "--exact", dense)
    assert np.isclose(json.loads(out)["result"]["value"], 1 / 3)

    code, out, _ = run_cli(capsys, "gen", "parrep", "--m", 2, base)
    assert code == 0
    assert json.loads(out)["x"] == 9


def test_convert_round_trip(capsys, workdir):
    source = workdir.joinpath("xor.json")
    run_cli(capsys, "gen", "xor", "--output", source)
    code, out, _ = run_cli(capsys, "convert", "--from", "game-json", "--to", "game-json", source)
    assert code == 0
    original = json.loads(source.read_text())
    converted = json.loads(out)
    original.pop("meta")
    converted.pop("meta")
    assert converted == original

    h5 = workdir.joinpath("xor.h5")
    code, _, _ = run_cli(capsys, "convert", "--from", "game-json", "--to", "game-h5", source, "--output", h5)
    assert code == 0
    _, out, _ = run_cli(capsys, "convert", "--from", "game-h5", "--to", "game-json", h5)
    converted = json.loads(out)
    converted.pop("meta")
    assert converted == original


def test_convert_to_csp_and_solve(capsys, workdir, eight_cnf):
    source = workdir.joinpath("xor.json")
    run_cli(capsys, "gen", "xor", "--output", source)
    target = workdir.joinpath("xor_csp.json")
    code, _, _ = run_cli(capsys, "convert", "--from", "game-json", "--to", "2csp", source, "--output", target)
    assert code == 0
    assert json.loads(target.read_text())["kind"] == "csp"
    code, out, _ = run_cli(capsys, "solve", "--exact", target)
    assert code == 0
    assert np.isclose(json.loads(out)["result"]["value"], 0.75)

    code, out, _ = run_cli(capsys, "convert", "--from", "dimacs", "--to", "csp-json", eight_cnf)
    assert code == 0
    assert len(json.loads(out)["constraints"]) == 8


def test_experiment_collision_csv(capsys, eight_cnf):
    code, out, _ = run_cli(capsys, "experiment", "collision", "--k", 1, "--l", 1, "--format", "csv", "--seed", 3, eight_cnf)
    assert code == 0
    meta, header, row = out.strip().split("\n")
    assert meta.startswith("# meta: ")
    meta = json.loads(meta[len("# meta: "):])
    assert meta["version"] == freegames.__version__
    assert meta["seed"] == 3
    assert meta["config"]["k"] == 1
    assert header.split(",")[:3] == ["probability", "bound", "holds"]
    assert row.startswith("1,")


def test_experiment_collision_human(capsys, eight_cnf):
    code, out, _ = run_cli(capsys, "experiment", "collision", "--k", 1, "--l", 1, "--format", "human", eight_cnf)
    assert code == 0
    meta, row = out.strip().split("\n")
    assert json.loads(meta[len("# meta: "):])["version"] == freegames.__version__
    assert row.startswith("probability=1")


def test_experiment_report_carries_meta(capsys, monkeypatch):
    monkeypatch.setattr(cli.experiments, "run_report", lambda budget=None, threads=1: "# Experiment report\n")
    code, out, _ = run_cli(capsys, "experiment", "report", "--seed", 4)
    assert code == 0
    first, rest = out.split("\n", 1)
    assert first.startswith("<!-- # meta: ") and first.endswith(" -->")
    meta = json.loads(first[len("<!-- # meta: "):-len(" -->")])
    assert meta["seed"] == 4
    assert meta["version"] == freegames.__version__
    assert rest.startswith("# Experiment report")


def test_convert_to_h5_carries_meta(capsys, workdir):
    source = workdir.joinpath("xor.json")
    run_cli(capsys, "gen", "xor", "--output", source)
    h5 = workdir.joinpath("xor.h5")
    code, _, _ = run_cli(
        capsys, "convert", "--from", "game-json", "--to", "game-h5", source, "--output", h5, "--seed", 8
    )
    assert code == 0
    group = save.load_dict_from_h5(str(h5), "game")
    assert str(group["@version"]) == freegames.__version__
    assert json.loads(group["@seed"]) == 8
    assert json.loads(group["@config"])["command"] == "convert"


def test_table_limit_is_separate_from_budget(capsys, workdir):
    base = workdir.joinpath("base.json")
    run_cli(capsys, "gen", "counterexample", "--n", 3, "--output", base)
    lazy = workdir.joinpath("lazy.json")
    run_cli(capsys, "gen", "birthday", "--k", 2, "--l", 1, base, "--output", lazy)

    code, out, _ = run_cli(capsys, "solve", "--exact", lazy)
    assert code == 0
    assert np.isclose(json.loads(out)["result"]["value"], 1 / 3)

    code, out, err = run_cli(capsys, "solve", "--exact", lazy, "--table-limit", 1)
    assert code == cli.EXIT_BUDGET
    assert out == ""
    report = json.loads(err)
    assert report["what"] == "birthday game materialization"
    assert report["budget"] == 1


def test_strict_promise_check(capsys, workdir):
    path = workdir.joinpath("half.json")
    path.write_text(save.dumps({"kind": "free2", "x": 2, "y": 1, "a": 1, "b": 1, "table": [1.0, 0.0]}))
    argv = ["solve", "--decide-gap", "--eps", 0.6, "--kappa", 1, path]
    code, out, _ = run_cli(capsys, *argv)
    assert code == 0
    assert json.loads(out)["result"]["verdict"] == "value-one"

    code, out, err = run_cli(capsys, *argv, "--strict")
    assert code == cli.EXIT_ERROR
    assert out == ""
    assert "promise violated" in err


def test_experiment_amplify(capsys, workdir):
    source = workdir.joinpath("cex.json")
    run_cli(capsys, "gen", "counterexample", "--n", 2, "--output", source)
    code, out, _ = run_cli(capsys, "experiment", "amplify", "--N", 1, 2, source)
    assert code == 0
    rows = json.loads(out)["result"]
    assert np.allclose([r["value"] for r in rows], [0.5, 0.75])
