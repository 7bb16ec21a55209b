# tests/test_replication.py
import itertools
from fractions import Fraction

import numpy as np
import pytest

from app.data.reference_systems import bowtie, complete, complete_bipartite, cycle_graph, path_graph, petersen
from app.exceptions import ProtocolError
from app.models.field import make_field
from app.models.graph import from_edge_list, incidence
from app.models.storage import disperse, random_dataset
from app.protocols.replication import (
    ReplicationProtocol,
    UserSecret,
    gen_queries,
    reconstruct,
    retrieve,
    signed_incidence,
)


def test_single_edge_fixed_secret(edge, f3, rng):
    secret = UserSecret(alpha=(1,), gamma=(1, 1), h=2, phi=1)
    Q, _ = gen_queries(edge, 1, f3, rng, secret=secret)
    assert Q.matrix.tolist() == [[2], [2]]
    assert Q.rows() == {1: {1: 2}, 2: {1: 2}}


def test_signed_incidence_layout(triangle, f5):
    matrix = signed_incidence(triangle, 3, 3, f5)
    # coluna 3 = {2, 3}: h no extremo menor, -1 no maior
    assert matrix[:, 2].tolist() == [0, 3, 4]
    assert matrix[:, 0].tolist() == [1, 4, 0]


def test_query_support_matches_incidence(petersen_graph, f5, rng):
    for phi in (1, 7, 15):
        Q, _ = gen_queries(petersen_graph, phi, f5, rng)
        assert np.array_equal(Q.support(), incidence(petersen_graph) != 0)


def test_triangle_secret_space(triangle, f3):
    secrets = set()
    for alpha in itertools.product([1, 2], repeat=3):
        for gamma in itertools.product([1, 2], repeat=3):
            secrets.add(UserSecret(alpha=alpha, gamma=gamma, h=2, phi=1))
    assert len(secrets) == 64


def test_invalid_secret_rejected(edge, f3, rng):
    with pytest.raises(ProtocolError):
        gen_queries(edge, 1, f3, rng, secret=UserSecret(alpha=(0,), gamma=(1, 1), h=2, phi=1))
    with pytest.raises(ProtocolError):
        gen_queries(edge, 1, f3, rng, secret=UserSecret(alpha=(1,), gamma=(1, 1), h=1, phi=1))
    with pytest.raises(ProtocolError):
        gen_queries(edge, 2, f3, rng)


def test_protocol_requires_two_uniform_graph(f3):
    with pytest.raises(ProtocolError):
        ReplicationProtocol(from_edge_list(3, [{1, 2, 3}]), f3)


def test_path_recovers_the_only_file(edge, f3):
    for seed in range(10):
        rng = np.random.default_rng(seed)
        X = random_dataset(1, 4, f3, rng)
        result = retrieve(edge, disperse(edge, X), 1, f3, rng)
        assert result.files[0].tolist() == X.file(1).tolist()


def test_petersen_round_trip_and_rate(petersen_graph, f5):
    rng = np.random.default_rng(2024)
    X = random_dataset(15, 4, f5, rng)
    contents = disperse(petersen_graph, X)
    protocol = ReplicationProtocol(petersen_graph, f5)
    for _ in range(100):
        phi = int(rng.integers(1, 16))
        result = protocol.retrieve(contents, [phi], rng)
        assert np.array_equal(result.files[0], X.file(phi))
    assert str(result.rate) == "1/10"
    assert result.transcript.download == 10 * 4
    assert result.transcript.upload == 2 * 15


def test_isolated_server_still_answers_f_symbols(f5):
    g = from_edge_list(3, [{1, 2}])
    rng = np.random.default_rng(8)
    X = random_dataset(1, 4, f5, rng)
    result = ReplicationProtocol(g, f5).retrieve(disperse(g, X), [1], rng)
    assert np.array_equal(result.files[0], X.file(1))
    assert result.transcript.answers[0][3].tolist() == [0, 0, 0, 0]
    assert result.transcript.download == 3 * 4
    assert result.rate == Fraction(1, 3)


def test_round_trip_grid():
    graphs = [path_graph(3), cycle_graph(4), cycle_graph(5), cycle_graph(6), complete(3), bowtie(), petersen(),
              complete_bipartite(3, 3)]
    for q in (3, 5, 7):
        field = make_field(q)
        for g in graphs:
            for f in (1, 4):
                for seed in range(20):
                    rng = np.random.default_rng(seed)
                    X = random_dataset(g.n, f, field, rng)
                    contents = disperse(g, X)
                    protocol = ReplicationProtocol(g, field)
                    for phi in range(1, g.n + 1):
                        assert np.array_equal(protocol.retrieve(contents, [phi], rng).files[0], X.file(phi))


def test_reconstruct_accepts_answer_lists(triangle, f5, rng):
    X = random_dataset(3, 2, f5, rng)
    contents = disperse(triangle, X)
    Q, secret = gen_queries(triangle, 2, f5, rng)
    answers = [c.answer(Q.row(c.server)) for c in contents]
    assert reconstruct(answers, secret, f5).tolist() == X.file(2).tolist()
    with pytest.raises(ProtocolError):
        reconstruct(answers[:2], secret, f5)
