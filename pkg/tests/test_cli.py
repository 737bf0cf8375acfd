import json
import subprocess
import sys

import pytest

from randbasis.cli import build_parser, main


def run(args, env=None):
    return subprocess.run([sys.executable, "-m", "randbasis", *args], capture_output=True, text=True, env=env)


def write_config(path, **over):
    cfg = {"scenario": "cycle_trace", "scenario_params": {}, "n": 8, "replicates": 40, "seed": 3,
           "coefficient": {"family": "diagonal_alpha", "alpha": 0.25}, "output_dir": None}
    cfg.update(over)
    path.write_text(json.dumps(cfg))
    return path


def test_simulate_prints_summary(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", output_dir=str(tmp_path / "out"))
    assert main(["simulate", "--config", str(cfg)]) == 0
    out = capsys.readouterr()
    doc = json.loads(out.out)
    assert doc["scenario"] == "cycle_trace" and "elapsed_seconds" not in doc
    assert "elapsed" in out.err
    assert (tmp_path / "out" / "samples.csv").exists()


def test_simulate_missing_file(tmp_path, capsys):
    missing = tmp_path / "nope.json"
    assert main(["simulate", "--config", str(missing)]) == 1
    assert str(missing) in capsys.readouterr().err


def test_simulate_weingarten_precondition(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json", scenario="moment_check", n=3, coefficient=None,
                       scenario_params={"rows": [1] * 8, "cols": [1] * 8})
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert "n >= 8" in capsys.readouterr().err


def test_simulate_bad_config_exit_1(tmp_path):
    cfg = write_config(tmp_path / "c.json", scenario="bogus")
    assert main(["simulate", "--config", str(cfg)]) == 1


def test_simulate_unwritable_output_exit_2(tmp_path, capsys):
    blocker = tmp_path / "f"
    blocker.write_text("")
    cfg = write_config(tmp_path / "c.json", output_dir=str(blocker / "x"))
    assert main(["simulate", "--config", str(cfg)]) == 2
    assert str(blocker) in capsys.readouterr().err


def test_simulate_overrides(tmp_path, capsys):
    cfg = write_config(tmp_path / "c.json")
    assert main(["simulate", "--config", str(cfg), "--n", "10", "--seed", "9", "--replicates", "5",
                 "--out", str(tmp_path / "o")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert (doc["n"], doc["seed"], doc["replicates"]) == (10, 9, 5)
    assert (tmp_path / "o" / "summary.json").exists()


def test_simulate_stdout_independent_of_threads(tmp_path):
    cfg = write_config(tmp_path / "c.json", scenario="uniform_perm_trace")
    outs = {run(["simulate", "--config", str(cfg), "--threads", t]).stdout for t in ("1", "8")}
    assert len(outs) == 1


def test_moment_examples(capsys):
    assert main(["moment", "--rows", "1,1", "--cols", "1,1", "--n", "10"]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "1/10"
    assert main(["moment", "--rows", "1,2,1,2", "--cols", "1,2,2,1", "--n", "10"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "-1/1080"
    assert lines[2] == "order -3"


@pytest.mark.parametrize(
    "args",
    [
        ["--rows", "1,1,1", "--cols", "1,1,1", "--n", "10"],
        ["--rows", "1,1", "--cols", "1", "--n", "10"],
        ["--rows", "1,x", "--cols", "1,1", "--n", "10"],
        ["--rows", ",".join(["1"] * 10), "--cols", ",".join(["1"] * 10), "--n", "20"],
        ["--rows", "1,1", "--cols", "1,1"],
    ],
)
def test_moment_usage_errors(args):
    with pytest.raises(SystemExit) as exc:
        code = main(["moment", *args])
        raise SystemExit(code)
    assert exc.value.code == 1


def test_moment_small_n_exit_2():
    assert main(["moment", "--rows", "1,1,1,1", "--cols", "1,1,1,1", "--n", "3"]) == 2


def test_limit_cdf_examples(capsys):
    assert main(["limit-cdf", "--s", "0", "--x", "0"]) == 0
    assert capsys.readouterr().out.splitlines() == ["x,cdf", "0,0.5"]
    assert main(["limit-cdf", "--s", "1", "--x", "0.5"]) == 0
    row = capsys.readouterr().out.splitlines()[1]
    assert row.startswith("0.5,0.367879441")
    assert main(["limit-cdf", "--s", "0.5", "--range=-1,1,5"]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 6


@pytest.mark.parametrize("args", [["--s", "2", "--x", "0"], ["--s", "0.5"], ["--s", "0.5", "--range", "0,1"]])
def test_limit_cdf_errors(args):
    assert main(["limit-cdf", *args]) == 1


def test_ks_matches_summary(tmp_path, capsys):
    for scenario, params in (("cycle_trace", {}), ("goncharov", {})):
        out = tmp_path / scenario
        coef = None if scenario == "goncharov" else {"family": "diagonal_alpha", "alpha": 0.25}
        cfg = write_config(tmp_path / "c.json", scenario=scenario, n=16, replicates=200, coefficient=coef,
                           output_dir=str(out))
        assert main(["simulate", "--config", str(cfg)]) == 0
        summary = json.loads(capsys.readouterr().out)
        assert main(["ks", "--samples", str(out / "samples.csv"), "--summary", str(out / "summary.json")]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "ks,N"
        ks, count = lines[1].split(",")
        assert abs(float(ks) - summary["ks"]) <= 1e-12 and int(count) == 200


def test_ks_with_law_flags(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("replicate,value\n0,0\n")
    assert main(["ks", "--samples", str(p), "--law", "gaussian"]) == 0
    assert capsys.readouterr().out.splitlines()[1] == "0.5,1"
    assert main(["ks", "--samples", str(p), "--law", "shifted_gaussian"]) == 1
    assert main(["ks", "--samples", str(p)]) == 1


def test_ks_bad_csv(tmp_path, capsys):
    p = tmp_path / "s.csv"
    p.write_text("")
    assert main(["ks", "--samples", str(p), "--law", "gaussian"]) == 1
    p.write_text("a,b\n0,1\n")
    assert main(["ks", "--samples", str(p), "--law", "gaussian"]) == 1
    assert "replicate,value" in capsys.readouterr().err


def test_ks_summary_without_law(tmp_path, capsys):
    out = tmp_path / "v"
    cfg = write_config(tmp_path / "c.json", scenario="variance_check", coefficient="identity", output_dir=str(out))
    assert main(["simulate", "--config", str(cfg)]) == 0
    assert main(["ks", "--samples", str(out / "samples.csv"), "--summary", str(out / "summary.json")]) == 1


def test_haar_sample(tmp_path, capsys):
    import numpy as np

    assert main(["haar-sample", "--n", "4", "--seed", "5"]) == 0
    text = capsys.readouterr().out
    m = np.array([[float(x) for x in line.split(",")] for line in text.splitlines()])
    assert m.shape == (4, 4) and np.allclose(m.T @ m, np.eye(4), atol=1e-12)
    target = tmp_path / "m.csv"
    assert main(["haar-sample", "--n", "4", "--seed", "5", "--out", str(target)]) == 0
    assert target.read_text() == text
    assert main(["haar-sample", "--n", "0"]) == 1


def test_perm_sample(capsys):
    assert main(["perm-sample", "--n", "6", "--seed", "1", "--replicates", "3"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 3
    for line in lines:
        assert sorted(int(x) for x in line.split(",")) == list(range(1, 7))
    assert main(["perm-sample", "--n", "6", "--replicates", "0"]) == 1


def test_seeded_output_repeatable():
    a = run(["perm-sample", "--n", "20", "--seed", "4", "--replicates", "4"])
    b = run(["perm-sample", "--n", "20", "--seed", "4", "--replicates", "4"], env=None)
    assert a.returncode == 0 and a.stdout == b.stdout


SUBCOMMANDS = {
    "simulate": ["--config", "--out", "--n", "--seed", "--replicates"],
    "moment": ["--rows", "--cols", "--n"],
    "limit-cdf": ["--s", "--x", "--range"],
    "ks": ["--samples", "--summary", "--law"],
    "haar-sample": ["--n", "--seed", "--out"],
    "perm-sample": ["--n", "--seed", "--replicates"],
}


@pytest.mark.parametrize("sub", sorted(SUBCOMMANDS))
def test_help_exits_zero(sub, capsys):
    with pytest.raises(SystemExit) as exc:
        build_parser().parse_args([sub, "--help"])
    assert exc.value.code == 0
    text = capsys.readouterr().out
    for flag in SUBCOMMANDS[sub]:
        assert flag in text


def test_unknown_flag_and_command_exit_1():
    for argv in (["moment", "--bogus"], ["frobnicate"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 1


def test_console_entry_point():
    r = run(["moment", "--rows", "1,1", "--cols", "1,1", "--n", "4"])
    assert r.returncode == 0 and r.stdout.startswith("1/4\n")
