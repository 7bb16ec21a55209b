# tests/test_additive.py
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest

from app.exceptions import PrivacyPreconditionError, ProtocolError
from app.models.field import make_field
from app.models.graph import from_edge_list
from app.models.storage import Dataset, disperse, random_dataset
from app.protocols.additive import AdditiveProtocol, disperse_shares, gen_shares, reconstruct_r, retrieve_r
from app.services.analysis_service import share_distribution, verify_share_privacy


def test_shares_of_a_single_file(f3):
    seen = Counter()
    for seed in range(300):
        V = gen_shares(2, 1, 1, f3, np.random.default_rng(seed))
        assert V.column_sums().tolist() == [1]
        seen[tuple(int(v) for v in V.matrix[:, 0])] += 1
    assert set(seen) == {(0, 1), (1, 0), (2, 2)}


def test_rows_sum_to_indicator(f5, rng):
    for r, n, phi in [(2, 4, 3), (3, 5, 1), (4, 2, 2)]:
        V = gen_shares(r, n, phi, f5, rng)
        expected = [0] * n
        expected[phi - 1] = 1
        assert V.column_sums().tolist() == expected


def test_share_matrices_are_uniform(f3):
    g = from_edge_list(4, [{1, 2, 3}, {2, 3, 4}])
    distribution = share_distribution(g, [1, 2, 3, 4], 1, f3)
    assert len(distribution.counts) == 81
    assert distribution.is_uniform


def test_dispersion_places_each_share_once(f3, rng):
    single = from_edge_list(3, [{1, 2, 3}])
    V = gen_shares(3, 1, 1, f3, rng)
    queries = disperse_shares(single, V)
    assert [queries[k][1] for k in (1, 2, 3)] == [int(v) for v in V.matrix[:, 0]]

    g = from_edge_list(4, [{1, 2, 3}, {2, 3, 4}])
    queries = disperse_shares(g, gen_shares(3, 2, 2, f3, rng))
    assert sum(len(row) for row in queries.values()) == 6
    assert {server: len(row) for server, row in queries.items()} == g.degrees()


def test_dispersion_requires_matching_uniformity(f3, rng):
    g = from_edge_list(4, [{1, 2, 3}, {2, 3, 4}])
    with pytest.raises(ProtocolError):
        disperse_shares(g, gen_shares(2, 2, 1, f3, rng))


def test_single_edge_system(f5, rng):
    single = from_edge_list(3, [{1, 2, 3}])
    X = random_dataset(1, 3, f5, rng)
    assert retrieve_r(single, disperse(single, X), 1, f5, rng).files[0].tolist() == X.file(1).tolist()


def test_zero_dataset(f3, rng):
    g = from_edge_list(4, [{1, 2, 3}, {2, 3, 4}])
    X = Dataset(field=f3, rows=np.zeros((2, 3), dtype=np.int64))
    assert retrieve_r(g, disperse(g, X), 2, f3, rng).files[0].tolist() == [0, 0, 0]


def test_random_three_uniform_round_trip():
    field = make_field(7)
    for seed in range(50):
        rng = np.random.default_rng(seed)
        s = int(rng.integers(3, 8))
        n = int(rng.integers(1, 7))
        edges = [set(int(v) for v in rng.choice(np.arange(1, s + 1), size=3, replace=False)) for _ in range(n)]
        g = from_edge_list(s, edges)
        X = random_dataset(n, 4, field, rng)
        protocol = AdditiveProtocol(g, field)
        phi = int(rng.integers(1, n + 1))
        result = protocol.retrieve(disperse(g, X), [phi], rng)
        assert np.array_equal(result.files[0], X.file(phi))
        assert result.transcript.download == g.s * 4
        assert result.rate == Fraction(1, g.s)


def test_reconstruct_needs_answers(f3):
    with pytest.raises(ProtocolError):
        reconstruct_r({}, f3)


def test_two_servers_learn_nothing(f3):
    g = from_edge_list(4, [{1, 2, 3}, {2, 3, 4}])
    for S in ([1, 2], [2, 3], [1, 4], [3, 4]):
        assert verify_share_privacy(g, S, f3)
    with pytest.raises(PrivacyPreconditionError):
        verify_share_privacy(g, [1, 2, 3], f3)
