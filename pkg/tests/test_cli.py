import json

import pytest

import oracles
from dirichlet_atlas.cli import _join_negative_values, main


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def _value(out):
    line = next(x for x in out.splitlines() if x.startswith("value"))
    parts = line.split()
    re_, sign, im = float(parts[1]), parts[2], float(parts[3].rstrip("i"))
    return complex(re_, im if sign == "+" else -im)


def test_eval_zeta_two(capsys):
    code, out, _ = _run(capsys, "eval", "--spec", "zeta", "--s", "2,0")
    assert code == 0
    assert abs(_value(out) - oracles.ZETA_2) < 1e-12
    assert "error_bound" in out


def test_eval_derivative(capsys):
    code, out, _ = _run(capsys, "eval", "--spec", "zeta", "--s", "2,0", "--order", "1")
    assert code == 0 and abs(_value(out) - oracles.ZETA_PRIME_2) < 1e-10


def test_eval_pole_exit_code(capsys):
    code, _, err = _run(capsys, "eval", "--spec", "zeta", "--s", "1,0")
    assert code != 0 and "EvaluationAtPole" in err


def test_eval_far_right(capsys):
    code, out, _ = _run(capsys, "eval", "--spec", "L:5:2", "--s", "30,7")
    assert code == 0 and abs(_value(out) - 1) <= 2 * 2.0**-30


def test_eval_negative_argument(capsys):
    code, out, _ = _run(capsys, "eval", "--spec", "zeta", "--s", "-4,30", "--tol", "1e-5")
    assert code == 0 and abs(_value(out) - oracles.ZETA_M4_30I) < 1e-5


def test_join_negative_values():
    assert _join_negative_values(["--window", "-4,4,0,1", "--s", "2,0"]) == ["--window=-4,4,0,1", "--s", "2,0"]


def test_zeros_command(capsys, tmp_path):
    out_path = tmp_path / "z.json"
    code, out, _ = _run(capsys, "zeros", "--spec", "zeta", "--window", "0,1,0,30", "--out", str(out_path),
                        "--cache-dir", str(tmp_path / "cache"))
    assert code == 0 and "3 zero(s)" in out
    doc = json.loads(out_path.read_text())
    assert len(doc["zeros"]) == 3 and doc["provenance"]["command"] == "zeros f"


def test_cache_dir_from_environment(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ATLAS_CACHE_DIR", str(tmp_path / "envcache"))
    code, _, _ = _run(capsys, "zeros", "--spec", "zeta", "--window", "0,1,13,15", "--out", str(tmp_path / "z.json"))
    assert code == 0
    assert list((tmp_path / "envcache").glob("*.json"))


def test_config_file_layering(capsys, tmp_path):
    cfg = tmp_path / "atlas.ini"
    cfg.write_text("[atlas]\nwindow = 0,1,13,15\n")
    code, out, _ = _run(capsys, "zeros", "--config", str(cfg), "--out", str(tmp_path / "a.json"))
    assert code == 0 and "1 zero(s)" in out
    # flags override the file
    code, out, _ = _run(capsys, "zeros", "--config", str(cfg), "--window", "0,1,13,22",
                        "--out", str(tmp_path / "b.json"))
    assert code == 0 and "2 zero(s)" in out


def test_verify_then_report_and_render(capsys, tmp_path):
    doc = tmp_path / "v.json"
    code, out, _ = _run(capsys, "verify", "--spec", "zeta", "--window", "-4,4,0,30", "--radii", "1",
                        "--out", str(doc))
    assert code == 0
    assert out.count("PASS") == 7
    code, out, _ = _run(capsys, "report", str(doc))
    assert code == 0 and "strip" in out
    svg = tmp_path / "v.svg"
    code, _, _ = _run(capsys, "render", str(doc), "--layers", "real,zeros", "--out", str(svg))
    assert code == 0 and svg.read_text().startswith("<svg")
    code, _, err = _run(capsys, "render", str(doc), "--layers", "domains", "--out", str(svg))
    assert code == 2 and "MissingLayer" in err


def test_partition_command(capsys, tmp_path):
    code, out, _ = _run(capsys, "partition", "--spec", "zeta", "--strip", "2", "--samples", "100",
                        "--out", str(tmp_path / "p.json"), "--svg", str(tmp_path / "p.svg"))
    assert code == 0
    assert "strip 2: 2 domain(s)" in out
    assert (tmp_path / "p.svg").exists()


def test_involution_command(capsys, tmp_path):
    code, out, _ = _run(capsys, "involution", "--spec", "dh", "--window", "0,1,85,86.5", "--samples", "50",
                        "--out", str(tmp_path / "i.json"))
    assert code == 0 and "PASS" in out


def test_unknown_spec(capsys):
    code, _, err = _run(capsys, "eval", "--spec", "nothing-here", "--s", "2,0")
    assert code == 2 and "InvalidSpec" in err


def test_missing_subcommand():
    with pytest.raises(SystemExit):
        main([])
