# app/net/client.py
import asyncio
import logging
from typing import List, Sequence, Tuple

import numpy as np

from app.config import NET_TIMEOUT_SECONDS
from app.exceptions import RetrievalError, WireError
from app.models.field import Field
from app.models.graph import StorageGraph
from app.net.wire import AnswerMessage, ErrorMessage, query_from_row, read_message, write_message
from app.protocols.base import BaseProtocol, RetrievalResult, RoundAnswers, RoundQueries
from app.protocols.replication import ReplicationProtocol
from app.utils.file_utils import read_endpoints

logger = logging.getLogger(__name__)

Endpoint = Tuple[str, int]


def load_endpoints(path: str) -> List[Endpoint]:
    return read_endpoints(path)


async def fetch_answer(
    server: int,
    endpoint: Endpoint,
    row: dict,
    field: Field,
    timeout: float = NET_TIMEOUT_SECONDS,
) -> np.ndarray:
    """
    Envia a linha de consulta de um servidor e aguarda a resposta

    Raises:
        RetrievalError: Servidor inacessível, resposta de erro ou quadro inválido
    """
    host, port = endpoint
    try:
        reader, writer = await asyncio.wait_for(asyncio.open_connection(host, port), timeout)
    except (OSError, asyncio.TimeoutError) as e:
        raise RetrievalError(f"Servidor {server} inacessível em {host}:{port}: {e}", server=server)
    try:
        await write_message(writer, query_from_row(field.q, row))
        reply = await asyncio.wait_for(read_message(reader), timeout)
    except (OSError, asyncio.TimeoutError, asyncio.IncompleteReadError, WireError) as e:
        raise RetrievalError(f"Falha na comunicação com o servidor {server}: {e}", server=server)
    finally:
        writer.close()
        try:
            await writer.wait_closed()
        except OSError:
            pass
    if isinstance(reply, ErrorMessage):
        raise RetrievalError(f"Servidor {server} respondeu com erro: {reply.text}", server=server)
    if not isinstance(reply, AnswerMessage):
        raise RetrievalError(f"Servidor {server} enviou mensagem inesperada", server=server)
    if any(v >= field.q for v in reply.values):
        raise RetrievalError(f"Servidor {server} enviou símbolo fora de [0, {field.q})", server=server)
    return field.array(list(reply.values))


async def fetch_answers(
    endpoints: Sequence[Endpoint],
    queries: RoundQueries,
    field: Field,
    timeout: float = NET_TIMEOUT_SECONDS,
) -> RoundAnswers:
    """Consulta todos os servidores de uma rodada em paralelo; a reconstrução espera por todos"""
    servers = sorted(queries)
    missing = [j for j in servers if j > len(endpoints)]
    if missing:
        raise RetrievalError(f"Sem endpoint para os servidores {missing}", server=missing[0])
    answers = await asyncio.gather(
        *(fetch_answer(j, endpoints[j - 1], queries[j], field, timeout) for j in servers)
    )
    return dict(zip(servers, answers))


async def retrieve_over_network(
    protocol: BaseProtocol,
    endpoints: Sequence[Endpoint],
    phis: Sequence[int],
    rng: np.random.Generator,
    timeout: float = NET_TIMEOUT_SECONDS,
) -> RetrievalResult:
    """Executa qualquer protocolo com as respostas obtidas pela rede"""
    plan = protocol.plan_queries(phis, rng)
    answers = []
    for round_index, queries in enumerate(plan.rounds, start=1):
        answers.append(await fetch_answers(endpoints, queries, protocol.field, timeout))
        logger.debug(f"Rodada {round_index}: {len(queries)} servidores responderam")
    return protocol.assemble_result(plan, answers)


def client_retrieve(
    endpoints: Sequence[Endpoint],
    g: StorageGraph,
    phi: int,
    field: Field,
    rng: np.random.Generator,
) -> np.ndarray:
    """Recupera x_φ pelo esquema de 2-replicação com servidores remotos"""
    protocol = ReplicationProtocol(g, field)
    result = asyncio.run(retrieve_over_network(protocol, endpoints, [phi], rng))
    return result.files[0]
