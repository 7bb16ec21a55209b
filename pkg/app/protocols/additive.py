# app/protocols/additive.py
import logging
from dataclasses import dataclass
from typing import List, Mapping, Sequence, Union

import numpy as np

from app.exceptions import ProtocolError
from app.models.field import Field
from app.models.graph import StorageGraph
from app.protocols.base import BaseProtocol, QueryPlan, RoundAnswers, RoundQueries

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ShareMatrix:
    """Matriz V (r×n) cujas linhas somam e_φ"""

    matrix: np.ndarray
    phi: int
    field: Field

    @property
    def r(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    def column_sums(self) -> np.ndarray:
        return self.matrix.astype(object).sum(axis=0) % self.field.q


def gen_shares(r: int, n: int, phi: int, field: Field, rng: np.random.Generator) -> ShareMatrix:
    """
    Compartilhamento aditivo do vetor indicador e_φ

    As r-1 primeiras linhas são uniformes; a última é e_φ menos a soma das demais.
    """
    if r < 2:
        raise ProtocolError(f"O compartilhamento aditivo exige r >= 2 (recebido {r})")
    if not 1 <= phi <= n:
        raise ProtocolError(f"Arquivo {phi} fora de [1, {n}]")
    free = field.random_vector(rng, (r - 1, n))
    indicator = field.zeros(n)
    indicator[phi - 1] = 1
    last = (indicator - free.astype(object).sum(axis=0)) % field.q
    matrix = np.vstack([free, field.array(last).reshape(1, n)]).astype(field.dtype)
    return ShareMatrix(matrix=matrix, phi=phi, field=field)


def disperse_shares(g: StorageGraph, V: ShareMatrix) -> RoundQueries:
    """
    Distribui a coluna j de V entre os servidores da hiperaresta j, em ordem crescente

    Returns:
        RoundQueries: Linhas de consulta esparsas por servidor
    """
    if V.n != g.n:
        raise ProtocolError(f"V tem {V.n} colunas, mas o grafo tem {g.n} arquivos")
    if g.uniformity != V.r:
        raise ProtocolError(f"O grafo deve ser {V.r}-uniforme para distribuir {V.r} partes")
    queries: RoundQueries = {server: {} for server in range(1, g.s + 1)}
    for column, (label, e) in enumerate(zip(g.edge_ids, g.edges)):
        for row, server in enumerate(sorted(e)):
            queries[server][label] = int(V.matrix[row, column])
    return queries


def reconstruct_r(
    answers: Union[Mapping[int, np.ndarray], Sequence[np.ndarray]],
    field: Field,
) -> np.ndarray:
    """Σ a_i = e_φ·X = x_φ"""
    vectors = list(answers.values()) if isinstance(answers, Mapping) else list(answers)
    vectors = [v for v in vectors if len(v)]
    if not vectors:
        raise ProtocolError("Nenhuma resposta não vazia para reconstruir")
    return (np.sum(np.stack(vectors).astype(object), axis=0) % field.q).astype(field.dtype)


class AdditiveProtocol(BaseProtocol):
    """Esquema (r-1)-privado para sistemas de r-replicação"""

    name = "repR"

    def __init__(self, graph: StorageGraph, field: Field):
        super().__init__(graph, field)
        r = graph.uniformity
        if r is None or r < 2:
            raise ProtocolError("O esquema aditivo exige um hipergrafo r-uniforme com r >= 2")
        self.r = r

    def plan_queries(self, phis: Sequence[int], rng: np.random.Generator) -> QueryPlan:
        phis = self.validate_phis(phis)
        shares = gen_shares(self.r, self.graph.n, phis[0], self.field, rng)
        return QueryPlan(phis=phis, rounds=[disperse_shares(self.graph, shares)], secrets=[shares])

    def reconstruct(self, plan: QueryPlan, answers: List[RoundAnswers]) -> List[np.ndarray]:
        return [reconstruct_r(answers[0], self.field)]


def retrieve_r(g: StorageGraph, contents, phi: int, field: Field, rng: np.random.Generator):
    return AdditiveProtocol(g, field).retrieve(contents, [phi], rng)
