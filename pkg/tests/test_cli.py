import csv
import io
import json
from pathlib import Path

import pytest

from uniformizer import cli
from uniformizer.cli import COMMANDS, load_schema, main

QUICK = sorted(set(COMMANDS) - {"asymptotic-sweep"})
DOCS_SCHEMA = Path(__file__).resolve().parents[1] / "docs" / "config.schema.json"


def _run(tmp_path, command, config, *extra):
    tmp_path.mkdir(parents=True, exist_ok=True)
    cfg = tmp_path / "config.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "out"
    code = main([command, str(cfg), "--out", str(out), *extra])
    return code, out


def test_schema_shipped_in_docs():
    assert json.loads(DOCS_SCHEMA.read_text()) == load_schema()


@pytest.mark.parametrize("command", QUICK)
def test_every_quick_command_runs(tmp_path, command):
    code, out = _run(tmp_path, command, {})
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == command and report["version"]
    assert "conventions" in report and "seconds" in report["timing"]
    # defaults are echoed
    assert report["inputs"]["max_word_length"] == 8
    rows = list(csv.reader(io.StringIO((out / "data.csv").read_bytes().decode())))
    assert rows[0][-2:] == ["lambda_convention", "length_curvature"]
    assert all(len(r) == len(rows[0]) for r in rows)


def test_kernel_mass_report(tmp_path):
    code, out = _run(tmp_path, "kernel-mass", {"s": 2, "w": [0]})
    assert code == 0
    mass = json.loads((out / "report.json").read_text())["results"]["masses"][0]
    assert mass["value"] == pytest.approx(3, rel=1e-2)
    assert mass["error"] >= 0


def test_dimension_report(tmp_path):
    code, out = _run(tmp_path, "dimension", {"surface": [1, 1], "s": 2})
    assert code == 0
    assert json.loads((out / "report.json").read_text())["results"]["dimension"] == 1


@pytest.mark.parametrize("config", [{"s": -1}, {"max_word_length": 99}, {"bogus": 1},
                                    {"command": "gram"}, {"group": {"x": 1}}])
def test_invalid_config_exit_2(tmp_path, config):
    code, out = _run(tmp_path, "kernel-mass", config)
    assert code == 2
    assert not out.exists()


def test_unreadable_config_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["dimension", str(bad), "--out", str(tmp_path / "out")]) == 2
    assert not (tmp_path / "out").exists()


def test_computation_error_exit_3(tmp_path):
    code, out = _run(tmp_path, "dimension", {"surface": [0, 2], "s": 2})
    assert code == 3
    assert not out.exists()


def test_csv_deterministic(tmp_path):
    config = {"points": [0, [0.2, 0.1]], "seeds": [[1], [0, [0, 1]]]}
    _, a = _run(tmp_path / "a", "theta-eval", config)
    _, b = _run(tmp_path / "b", "theta-eval", config)
    assert (a / "data.csv").read_bytes() == (b / "data.csv").read_bytes()
    assert b"\r\n" in (a / "data.csv").read_bytes()


def test_svg_view_box(tmp_path):
    code, out = _run(tmp_path, "limit-set", {})
    assert code == 0
    (svg,) = list(out.glob("*.svg"))
    text = svg.read_text()
    assert 'viewBox="-1.05 -1.05 2.1 2.1"' in text
    assert '<circle cx="0" cy="0" r="1"' in text


def test_monte_carlo_seed_echo(tmp_path):
    config = {"w": [0], "quadrature": {"mode": "monte-carlo", "samples": 4000}}
    code, out = _run(tmp_path, "kernel-mass", config, "--seed", "17")
    assert code == 0
    assert json.loads((out / "report.json").read_text())["seed"] == 17
    code, out = _run(tmp_path / "d", "kernel-mass", {"w": [0]}, "--seed", "17")
    assert "seed" not in json.loads((out / "report.json").read_text())


def test_config_from_stdin(tmp_path, monkeypatch):
    monkeypatch.setattr("sys.stdin", io.StringIO(json.dumps({"surface": [2, 0], "s": 2})))
    assert main(["dimension", "--out", str(tmp_path), "-"]) == 0
    assert json.loads((tmp_path / "report.json").read_text())["results"]["dimension"] == 3


def test_run_returns_report_without_writing():
    report, text, svgs = cli.run("dimension", {"surface": [1, 1], "s": 3})
    assert report["results"]["dimension"] == 2 and svgs == {}
    assert text.startswith("g,n,s,dimension")
