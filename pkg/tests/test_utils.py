# tests/test_utils.py
import json
import math
from fractions import Fraction

import numpy as np
import pytest

from app.exceptions import DatasetError, GraphError
from app.models.storage import random_dataset
from app.utils.file_utils import (
    parse_vertex_set,
    read_dataset,
    read_endpoints,
    read_graph,
    write_dataset,
    write_endpoints,
    write_graph,
)
from app.utils.json_utils import safe_json_dump, sanitize_for_json, to_key_value_lines


def test_graph_file_with_comments(tmp_path):
    path = tmp_path / "bowtie.txt"
    path.write_text("# bowtie\n5 6\n1 2\n1 3  # aresta 2\n\n2 3\n3 4\n3 5\n4 5\n", encoding="utf-8")
    g = read_graph(str(path))
    assert (g.s, g.n) == (5, 6)
    assert g.edge(2) == frozenset({1, 3})


def test_graph_file_written_back(tmp_path, petersen_graph):
    path = str(tmp_path / "petersen.txt")
    write_graph(petersen_graph, path)
    assert read_graph(path).edges == petersen_graph.edges


@pytest.mark.parametrize(
    "content",
    ["", "3\n1 2\n", "3 2\n1 2\n", "3 1\n1 x\n"],
)
def test_malformed_graph_files(tmp_path, content):
    path = tmp_path / "bad.txt"
    path.write_text(content, encoding="utf-8")
    with pytest.raises(GraphError):
        read_graph(str(path))


def test_dataset_files(tmp_path, f5, rng):
    X = random_dataset(6, 3, f5, rng)
    path = str(tmp_path / "data.txt")
    write_dataset(X, path)
    loaded = read_dataset(path)
    assert loaded.field.q == 5
    assert np.array_equal(loaded.rows.astype(np.int64), X.rows.astype(np.int64))

    bad = tmp_path / "bad.txt"
    bad.write_text("1 2 5\n1 7\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_dataset(str(bad))
    bad.write_text("2 2 5\n1 2\n", encoding="utf-8")
    with pytest.raises(DatasetError):
        read_dataset(str(bad))


def test_endpoint_files(tmp_path):
    path = str(tmp_path / "servers.txt")
    write_endpoints([("127.0.0.1", 9101), ("localhost", 9102)], path)
    assert read_endpoints(path) == [("127.0.0.1", 9101), ("localhost", 9102)]
    with open(path, "a", encoding="utf-8") as f:
        f.write("sem-porta\n")
    with pytest.raises(GraphError):
        read_endpoints(path)


def test_parse_vertex_set():
    assert parse_vertex_set("1,2,5-7") == [1, 2, 5, 6, 7]
    assert parse_vertex_set(" 3 4 ") == [3, 4]
    with pytest.raises(ValueError):
        parse_vertex_set("1,a")


def test_sanitize_for_json():
    report = {
        "rate": Fraction(1, 10),
        "girth": math.inf,
        "files": np.array([[1, 2], [3, 4]]),
        "count": np.int64(7),
        "candidates": frozenset({3, 1, 2}),
        "missing": float("nan"),
    }
    assert sanitize_for_json(report) == {
        "rate": "1/10",
        "girth": "inf",
        "files": [[1, 2], [3, 4]],
        "count": 7,
        "candidates": [1, 2, 3],
        "missing": None,
    }


def test_key_value_lines_and_dump(tmp_path):
    report = {"rate": Fraction(1, 12), "correct": True, "phis": [1, 2], "lp_optimum": None, "overhead": 1.5}
    assert to_key_value_lines(report) == ["rate=1/12", "correct=true", "phis=1,2", "lp_optimum=", "overhead=1.5"]
    path = tmp_path / "report.json"
    assert safe_json_dump(report, str(path))
    assert json.loads(path.read_text(encoding="utf-8"))["rate"] == "1/12"
    assert not safe_json_dump(report, str(tmp_path / "missing" / "report.json"))
