# tests/test_storage.py
import numpy as np
import pytest

from app.exceptions import DatasetError, ProtocolError
from app.models.graph import from_edge_list
from app.models.storage import Dataset, disperse, random_dataset, storage_overhead, total_symbols
from app.protocols.replication import answer


def test_dispersion_follows_incidence(edge, triangle, petersen_graph, f5, rng):
    X = random_dataset(1, 3, f5, rng)
    both = disperse(edge, X)
    assert [c.files for c in both] == [[1], [1]]
    assert all(len(c.files) == 2 for c in disperse(triangle, random_dataset(3, 2, f5, rng)))
    contents = disperse(petersen_graph, random_dataset(15, 4, f5, rng))
    assert all(len(c.files) == 3 for c in contents)
    assert total_symbols(contents) == 2 * 15 * 4
    assert storage_overhead(contents, random_dataset(15, 4, f5, rng)) == 2.0


def test_dispersion_requires_matching_sizes(triangle, f3, rng):
    with pytest.raises(DatasetError):
        disperse(triangle, random_dataset(2, 1, f3, rng))


def test_random_dataset_is_deterministic(f3, f5):
    one = random_dataset(1, 1, f3, np.random.default_rng(0))
    assert one.rows.shape == (1, 1)
    assert np.array_equal(one.rows, random_dataset(1, 1, f3, np.random.default_rng(0)).rows)
    X = random_dataset(15, 4, f5, np.random.default_rng(7))
    assert X.rows.shape == (15, 4)
    assert np.array_equal(X.rows, random_dataset(15, 4, f5, np.random.default_rng(7)).rows)
    with pytest.raises(DatasetError):
        random_dataset(0, 4, f5, np.random.default_rng(7))


def test_answers_are_linear_combinations(triangle, f3):
    X = Dataset(field=f3, rows=np.array([[1, 2], [2, 2], [0, 1]]))
    server1 = disperse(triangle, X)[0]
    assert server1.files == [1, 2]
    assert answer(server1, {}).tolist() == [0, 0]
    assert answer(server1, {1: 2}).tolist() == [2, 1]
    assert answer(server1, {1: 1, 2: 1}).tolist() == [0, 1]


def test_answer_rejects_unheld_file(triangle, f3, rng):
    server1 = disperse(triangle, random_dataset(3, 2, f3, rng))[0]
    with pytest.raises(ProtocolError):
        server1.answer({3: 1})


def test_dataset_file_bounds(f3):
    X = Dataset(field=f3, rows=np.array([[4, 5]]))
    assert X.file(1).tolist() == [1, 2]
    with pytest.raises(DatasetError):
        X.file(2)


def test_server_without_files_answers_zeros(f3, rng):
    g = from_edge_list(3, [{1, 2}])
    isolated = disperse(g, random_dataset(1, 4, f3, rng))[2]
    assert isolated.files == []
    assert isolated.symbol_length == 4
    assert answer(isolated, {}).tolist() == [0, 0, 0, 0]
