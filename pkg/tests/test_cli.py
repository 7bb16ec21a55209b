# tests/test_cli.py
import json
import re

import pytest
from click.testing import CliRunner

from app.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


REPORT_LINE = re.compile(r"^[a-z_][a-z_0-9]*=")


def _lines(output: str) -> list:
    """Linhas de relatório; logs (que começam pela data) ficam de fora"""
    return [line for line in output.splitlines() if REPORT_LINE.match(line)]


def _report(output: str) -> dict:
    return dict(line.split("=", 1) for line in _lines(output))


def test_retrieve_petersen(runner):
    result = runner.invoke(cli, ["retrieve", "--graph", "petersen", "--q", "5", "--f", "4", "--phi", "7", "--seed", "1"])
    assert result.exit_code == 0, result.output
    report = _report(result.output)
    assert report["rate"] == "1/10"
    assert report["correct"] == "true"
    assert report["download"] == "40"


def test_retrieve_coded_example(runner, tmp_path):
    output = tmp_path / "coded.json"
    result = runner.invoke(
        cli,
        ["retrieve", "--graph", "example2", "--protocol", "coded", "--code", "parity",
         "--N", "3", "--K", "2", "--phi", "1", "--output", str(output)],
    )
    assert result.exit_code == 0, result.output
    assert _report(result.output)["rate"] == "1/12"
    assert json.loads(output.read_text(encoding="utf-8"))["storage_overhead"] == 1.5


def test_invalid_file_index_is_a_usage_error(runner):
    result = runner.invoke(cli, ["retrieve", "--graph", "petersen", "--phi", "99"])
    assert result.exit_code == 2
    assert _lines(result.output) == []


def test_invalid_config_is_a_usage_error(runner):
    result = runner.invoke(cli, ["retrieve", "--graph", "petersen", "--q", "2", "--phi", "1"])
    assert result.exit_code == 2


def test_analyze(runner):
    result = runner.invoke(cli, ["analyze", "--graph", "petersen", "--colluders", "1-4", "--phi", "1"])
    assert result.exit_code == 0, result.output
    assert _report(result.output)["verdict"] == "acyclic: perfect privacy"

    result = runner.invoke(cli, ["analyze", "--graph", "bowtie", "--q", "3", "--colluders", "1-5", "--phi", "1"])
    report = _report(result.output)
    assert report["verdict"] == "cyclic: 1 bits leaked"
    assert report["candidates"] == "1,2,3"


def test_bound(runner):
    result = runner.invoke(cli, ["bound", "--graph", "petersen"])
    assert result.exit_code == 0, result.output
    report = _report(result.output)
    assert report["delta_over_n"] == "1/5"
    assert report["lp_optimum"] == "5"
    assert report["achieved"] == "1/10"
    assert report["gap"] == "2"


def test_verify_triangle(runner):
    result = runner.invoke(cli, ["verify", "--graph", "complete(3)", "--samples", "5"])
    assert result.exit_code == 0, result.output
    report = _report(result.output)
    assert report["passed"] == "true"
    assert report["theorem1"] == "true"


def test_verify_refuses_over_budget(runner):
    result = runner.invoke(cli, ["verify", "--graph", "petersen", "--budget", "1000", "--samples", "1"])
    assert result.exit_code == 2


def test_table1(runner, tmp_path):
    csv_path = tmp_path / "table1.csv"
    result = runner.invoke(cli, ["table1", "--csv", str(csv_path)])
    assert result.exit_code == 0, result.output
    lines = _lines(result.output)
    assert lines[0] == "graph=petersen n=15 s=10 t=4 d=3 rate=1/10"
    assert lines[1] == "graph=complete_bipartite(4,4) n=16 s=8 t=3 d=4 rate=1/8"
    assert csv_path.exists()
