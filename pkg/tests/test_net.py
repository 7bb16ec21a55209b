# tests/test_net.py
import asyncio
import socket

import numpy as np
import pytest

from app.exceptions import RetrievalError, WireError
from app.models.graph import from_edge_list
from app.models.storage import disperse, random_dataset
from app.net.client import fetch_answers, retrieve_over_network
from app.net.server import PirServer, handle_query
from app.net.wire import (
    HEADER,
    AnswerMessage,
    ErrorMessage,
    QueryMessage,
    decode_message,
    encode_message,
    query_from_row,
    read_message,
    write_message,
)
from app.protocols.coded import CodedProtocol, build_coded_system, parity_code, partition_from_spec
from app.protocols.replication import ReplicationProtocol


def test_frame_layout():
    frame = encode_message(QueryMessage(q=5, coefficients=((1, 2), (7, 4))))
    (length,) = HEADER.unpack_from(frame, 0)
    assert length == len(frame) - 4
    assert frame[4] == 1
    assert decode_message(frame) == QueryMessage(q=5, coefficients=((1, 2), (7, 4)))
    assert decode_message(encode_message(ErrorMessage(text="não há arquivo"))).text == "não há arquivo"


def test_malformed_frames():
    good = encode_message(AnswerMessage(values=(1, 2, 3)))
    with pytest.raises(WireError):
        decode_message(good[:-1])
    with pytest.raises(WireError):
        decode_message(HEADER.pack(1) + b"\x09")
    with pytest.raises(WireError):
        decode_message(b"\x00\x00")
    with pytest.raises(WireError):
        encode_message(QueryMessage(q=5, coefficients=((1, 5),)))
    tampered = bytearray(encode_message(QueryMessage(q=5, coefficients=((1, 4),))))
    tampered[-8] = 9
    with pytest.raises(WireError):
        decode_message(bytes(tampered))


def test_handle_query(petersen_graph, f5, rng):
    X = random_dataset(petersen_graph.n, 4, f5, rng)
    contents = disperse(petersen_graph, X)[0]
    zero = handle_query(contents, QueryMessage(q=5, coefficients=()))
    assert zero == AnswerMessage(values=(0, 0, 0, 0))
    unheld = next(i for i in range(1, 16) if i not in contents.files)
    assert isinstance(handle_query(contents, query_from_row(5, {unheld: 1})), ErrorMessage)
    assert isinstance(handle_query(contents, QueryMessage(q=7, coefficients=())), ErrorMessage)
    held = contents.files[0]
    reply = handle_query(contents, query_from_row(5, {held: 2}))
    assert list(reply.values) == [int(v) for v in f5.scale(X.file(held), 2)]


async def _loopback(protocol, contents, phis, seed):
    servers = [PirServer(c, port=0) for c in contents]
    for server in servers:
        await server.start()
    try:
        endpoints = [(s.host, s.port) for s in servers]
        return await retrieve_over_network(protocol, endpoints, phis, np.random.default_rng(seed))
    finally:
        for server in servers:
            await server.close()


def test_network_matches_in_process(petersen_graph, f5):
    X = random_dataset(petersen_graph.n, 4, f5, np.random.default_rng(3))
    contents = disperse(petersen_graph, X)
    protocol = ReplicationProtocol(petersen_graph, f5)
    for seed in range(20):
        phi = seed % 15 + 1
        remote = asyncio.run(_loopback(protocol, contents, [phi], seed))
        local = protocol.retrieve(contents, [phi], np.random.default_rng(seed))
        assert np.array_equal(remote.files[0], local.files[0])
        assert np.array_equal(remote.files[0], X.file(phi))
        assert remote.transcript.download == local.transcript.download == 40


def test_coded_over_network(f3):
    g = from_edge_list(6, [{1, 3, 5}, {1, 4, 6}, {2, 3, 6}, {2, 4, 5}])
    X = random_dataset(g.n, 4, f3, np.random.default_rng(1))
    system = build_coded_system(g, partition_from_spec("1,2;3,4;5,6", 6), X, parity_code(f3))
    protocol = CodedProtocol(system)
    result = asyncio.run(_loopback(protocol, system.contents, [2], 9))
    assert np.array_equal(result.files[0], X.file(2))


def _unused_port() -> int:
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def test_unreachable_server(f5):
    with pytest.raises(RetrievalError) as excinfo:
        asyncio.run(fetch_answers([("127.0.0.1", _unused_port())], {1: {1: 1}}, f5, timeout=2))
    assert excinfo.value.server == 1
    with pytest.raises(RetrievalError):
        asyncio.run(fetch_answers([], {1: {}}, f5))


def test_repeated_file_index_is_refused(petersen_graph, f5, rng):
    contents = disperse(petersen_graph, random_dataset(petersen_graph.n, 4, f5, rng))[0]
    held = contents.files[0]
    reply = handle_query(contents, QueryMessage(q=5, coefficients=((held, 1), (held, 2))))
    assert isinstance(reply, ErrorMessage)
    assert str(held) in reply.text


def test_server_without_files_answers_f_zeros(f5, rng):
    g = from_edge_list(3, [{1, 2}])
    isolated = disperse(g, random_dataset(1, 4, f5, rng))[2]
    assert handle_query(isolated, QueryMessage(q=5, coefficients=())) == AnswerMessage(values=(0, 0, 0, 0))


async def _fetch_from_misbehaving_server(values, field):
    async def reply(reader, writer):
        await read_message(reader)
        await write_message(writer, AnswerMessage(values=values))
        writer.close()

    server = await asyncio.start_server(reply, "127.0.0.1", 0)
    port = server.sockets[0].getsockname()[1]
    try:
        return await fetch_answers([("127.0.0.1", port)], {1: {1: 1}}, field, timeout=5)
    finally:
        server.close()
        await server.wait_closed()


def test_answer_symbols_must_be_below_q(f5):
    with pytest.raises(RetrievalError) as excinfo:
        asyncio.run(_fetch_from_misbehaving_server((1, 7, 0, 0), f5))
    assert excinfo.value.server == 1
    answers = asyncio.run(_fetch_from_misbehaving_server((1, 4, 0, 0), f5))
    assert answers[1].tolist() == [1, 4, 0, 0]
