# app/protocols/replication.py
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from app.exceptions import ProtocolError
from app.models.field import Field
from app.models.graph import StorageGraph, incidence
from app.models.storage import ServerContents
from app.protocols.base import BaseProtocol, QueryPlan, RoundAnswers, RoundQueries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UserSecret:
    """Aleatoriedade do usuário: α ∈ (F_q*)^n, γ ∈ (F_q*)^s, h ∈ F_q \\ {0,1} e o arquivo φ"""

    alpha: Tuple[int, ...]
    gamma: Tuple[int, ...]
    h: int
    phi: int

    def validate(self, field: Field) -> None:
        if any(a % field.q == 0 for a in self.alpha) or any(g % field.q == 0 for g in self.gamma):
            raise ProtocolError("α e γ devem ter todas as entradas não nulas")
        if self.h % field.q in (0, 1):
            raise ProtocolError(f"h={self.h} deve estar fora de {{0, 1}}")


@dataclass(frozen=True)
class QueryMatrix:
    """Q = diag(γ)·I_φ·diag(α), matriz s×n"""

    matrix: np.ndarray
    graph: StorageGraph

    def row(self, server: int) -> Dict[int, int]:
        """Linha esparsa q_j: apenas os coeficientes dos arquivos guardados pelo servidor"""
        return {
            label: int(self.matrix[server - 1, label - 1])
            for label in self.graph.gamma(server)
        }

    def rows(self) -> RoundQueries:
        return {server: self.row(server) for server in range(1, self.graph.s + 1)}

    def support(self) -> np.ndarray:
        return self.matrix != 0


def _require_protocol_graph(g: StorageGraph) -> None:
    if not g.is_two_uniform:
        raise ProtocolError("O protocolo de 2-replicação exige hiperarestas com exatamente dois servidores")
    if tuple(g.edge_ids) != tuple(range(1, g.n + 1)) or tuple(g.vertex_ids) != tuple(range(1, g.s + 1)):
        raise ProtocolError("O protocolo opera sobre o grafo completo do sistema, não sobre subgrafos")
    if g.shares_pair:
        logger.warning("Grafo com arestas paralelas: a recuperação é correta, mas os pares formam 2-ciclos")


def signed_incidence(g: StorageGraph, phi: int, h: int, field: Field) -> np.ndarray:
    """
    I_φ: a entrada 1 do extremo de maior índice vira -1 em cada coluna, e a entrada
    restante da coluna φ (extremo de menor índice) vira h
    """
    matrix = field.array(incidence(g))
    for label in g.edge_ids:
        low, high = g.endpoints(label)
        matrix[high - 1, label - 1] = field.neg(1)
    low, _ = g.endpoints(phi)
    matrix[low - 1, phi - 1] = h % field.q
    return matrix


def build_query_matrix(g: StorageGraph, secret: UserSecret, field: Field) -> QueryMatrix:
    secret.validate(field)
    signed = signed_incidence(g, secret.phi, secret.h, field)
    alpha = field.array(secret.alpha)
    gamma = field.array(secret.gamma)
    matrix = (gamma.reshape(-1, 1) * signed % field.q) * alpha.reshape(1, -1) % field.q
    return QueryMatrix(matrix=matrix.astype(field.dtype), graph=g)


def sample_secret(g: StorageGraph, phi: int, field: Field, rng: np.random.Generator) -> UserSecret:
    alpha = field.random_nonzero_vector(rng, g.n)
    gamma = field.random_nonzero_vector(rng, g.s)
    h = field.sample_h(rng)
    return UserSecret(
        alpha=tuple(int(a) for a in alpha),
        gamma=tuple(int(x) for x in gamma),
        h=int(h),
        phi=int(phi),
    )


def gen_queries(
    g: StorageGraph,
    phi: int,
    field: Field,
    rng: np.random.Generator,
    secret: Optional[UserSecret] = None,
) -> Tuple[QueryMatrix, UserSecret]:
    """
    Gera a matriz de consultas do esquema de 2-replicação

    Args:
        g: Grafo 2-uniforme do sistema
        phi: Arquivo desejado (1..n)
        field: Corpo com q >= 3
        rng: Gerador aleatório com semente
        secret: Segredo fixo (opcional; ignora rng)

    Returns:
        Tuple[QueryMatrix, UserSecret]: Matriz Q e o segredo do usuário
    """
    _require_protocol_graph(g)
    if not 1 <= phi <= g.n:
        raise ProtocolError(f"Arquivo {phi} fora de [1, {g.n}]")
    if secret is None:
        secret = sample_secret(g, phi, field, rng)
    elif secret.phi != phi:
        raise ProtocolError(f"Segredo gerado para φ={secret.phi}, não para φ={phi}")
    return build_query_matrix(g, secret, field), secret


def answer(contents: ServerContents, q_row: Mapping[int, int]) -> np.ndarray:
    """a_j = q_j · X sobre os arquivos guardados pelo servidor"""
    return contents.answer(q_row)


def reconstruct(
    answers: Union[Mapping[int, np.ndarray], Sequence[np.ndarray]],
    secret: UserSecret,
    field: Field,
) -> np.ndarray:
    """
    Calcula 𝟙·diag(γ)⁻¹·A = (h-1)·α_φ·x_φ e divide por (h-1)·α_φ

    Args:
        answers: Uma resposta por servidor (mapa servidor -> vetor, ou lista na ordem 1..s)
        secret: Segredo usado na geração das consultas
        field: Corpo do protocolo

    Returns:
        np.ndarray: O arquivo x_φ
    """
    by_server = dict(answers) if isinstance(answers, Mapping) else dict(enumerate(answers, start=1))
    if len(by_server) != len(secret.gamma):
        raise ProtocolError(f"Esperadas {len(secret.gamma)} respostas, recebidas {len(by_server)}")
    lengths = {len(a) for a in by_server.values()}
    if len(lengths) > 1:
        raise ProtocolError(f"Respostas com comprimentos distintos: {sorted(lengths)}")
    length = lengths.pop() if lengths else 0
    total = field.zeros(length)
    for server, vector in by_server.items():
        total = (total + field.scale(vector, field.inv(secret.gamma[server - 1]))) % field.q
    scale = field.mul(field.sub(secret.h, 1), secret.alpha[secret.phi - 1])
    assert scale != 0, "Segredo corrompido: (h-1)·α_φ = 0"
    return field.scale(total, field.inv(scale))


class ReplicationProtocol(BaseProtocol):
    """Esquema de 2-replicação: privacidade perfeita contra conjuntos acíclicos"""

    name = "rep2"

    def __init__(self, graph: StorageGraph, field: Field):
        super().__init__(graph, field)
        _require_protocol_graph(graph)

    def plan_queries(self, phis: Sequence[int], rng: np.random.Generator) -> QueryPlan:
        phis = self.validate_phis(phis)
        query_matrix, secret = gen_queries(self.graph, phis[0], self.field, rng)
        return QueryPlan(phis=phis, rounds=[query_matrix.rows()], secrets=[secret])

    def reconstruct(self, plan: QueryPlan, answers: List[RoundAnswers]) -> List[np.ndarray]:
        return [reconstruct(answers[0], plan.secrets[0], self.field)]


def retrieve(g: StorageGraph, contents: Sequence[ServerContents], phi: int, field: Field, rng: np.random.Generator):
    """Atalho: executa o esquema de 2-replicação em processo e devolve o RetrievalResult"""
    return ReplicationProtocol(g, field).retrieve(contents, [phi], rng)
