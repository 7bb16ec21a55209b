# app/services/analysis_service.py
import itertools
import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from app.config import ENUMERATION_BUDGET
from app.exceptions import EnumerationBudgetExceeded, PrivacyPreconditionError, ProtocolError
from app.models.field import Field
from app.models.graph import (
    Cycle,
    StorageGraph,
    cycles,
    edges_on_cycles,
    induced,
    is_acyclic,
    polychromatic_cycle_exists,
    to_colored,
)
from app.protocols.coded import CodedSystem, plan_rounds
from app.protocols.replication import gen_queries
from app.utils.linalg import rank_mod

logger = logging.getLogger(__name__)

# Tuplas de aleatoriedade processadas por bloco vetorizado
CHUNK_SIZE = 200_000


# Tipos de resultado


@dataclass(frozen=True)
class CycleVerdict:
    edges: Tuple[int, ...]
    rank: int

    @property
    def full_rank(self) -> bool:
        return self.rank == len(self.edges)


@dataclass
class CollusionReport:
    """Resultado do ataque por posto de um conjunto conivente S"""

    colluders: Tuple[int, ...]
    n: int
    candidates: FrozenSet[int]
    verdicts: List[CycleVerdict] = field(default_factory=list)
    phi: Optional[int] = None

    @property
    def acyclic(self) -> bool:
        return not self.verdicts

    @property
    def leakage_bits(self) -> float:
        return math.log2(self.n) - math.log2(len(self.candidates))

    def to_dict(self) -> Dict:
        return {
            "colluders": list(self.colluders),
            "acyclic": self.acyclic,
            "cycles": len(self.verdicts),
            "cycle_ranks": [f"{'-'.join(map(str, v.edges))}:{v.rank}/{len(v.edges)}" for v in self.verdicts],
            "candidates": sorted(self.candidates),
            "candidate_count": len(self.candidates),
            "leakage_bits": round(self.leakage_bits, 6),
            "phi": self.phi,
        }


@dataclass
class QueryDistribution:
    """
    Distribuição exata da submatriz observada

    As chaves listam as entradas não nulas coluna a coluna, na ordem de `layout`
    (pares (servidor, arquivo)).
    """

    layout: Tuple[Tuple[int, int], ...]
    counts: Dict[Tuple[int, ...], int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def probabilities(self) -> Dict[Tuple[int, ...], Fraction]:
        total = self.total
        return {key: Fraction(count, total) for key, count in self.counts.items()}

    @property
    def support(self) -> FrozenSet[Tuple[int, ...]]:
        return frozenset(self.counts)

    @property
    def is_uniform(self) -> bool:
        return len(set(self.counts.values())) <= 1

    def same_as(self, other: "QueryDistribution") -> bool:
        return self.layout == other.layout and self.probabilities == other.probabilities

    def to_matrix(self, key: Sequence[int], rows: Sequence[int], columns: Sequence[int]) -> np.ndarray:
        matrix = np.zeros((len(rows), len(columns)), dtype=np.int64)
        for (server, label), value in zip(self.layout, key):
            matrix[list(rows).index(server), list(columns).index(label)] = value
        return matrix


# Enumeração vetorizada


def _require_budget(required: int, budget: Optional[int]) -> None:
    budget = ENUMERATION_BUDGET if budget is None else budget
    if required > budget:
        logger.warning(f"Enumeração recusada: {required} tuplas excedem o orçamento de {budget}")
        raise EnumerationBudgetExceeded(required, budget)
    logger.debug(f"Enumerando {required} tuplas")


def _iter_tuples(radices: Sequence[int]) -> Iterator[np.ndarray]:
    """Todas as tuplas com dígitos em [0, radix), em blocos (linhas = tuplas)"""
    total = math.prod(radices)
    if not radices:
        yield np.zeros((1, 0), dtype=np.int64)
        return
    for start in range(0, total, CHUNK_SIZE):
        index = np.arange(start, min(start + CHUNK_SIZE, total), dtype=np.int64)
        yield np.stack(np.unravel_index(index, tuple(radices)), axis=1).astype(np.int64)


def _count_rows(counter: Counter, rows: np.ndarray) -> None:
    if rows.shape[1] == 0:
        counter[()] += len(rows)
        return
    unique, counts = np.unique(rows, axis=0, return_counts=True)
    for row, count in zip(unique, counts):
        counter[tuple(int(v) for v in row)] += int(count)


def _layout(T: StorageGraph) -> Tuple[Tuple[int, int], ...]:
    layout = []
    for label in sorted(T.edge_ids):
        low, high = T.endpoints(label)
        layout.extend([(low, label), (high, label)])
    return tuple(layout)


def enumerate_distribution(
    g: StorageGraph,
    T: StorageGraph,
    phi: int,
    field: Field,
    budget: Optional[int] = None,
) -> QueryDistribution:
    """
    Distribuição exata de Q^T | φ iterando todas as escolhas relevantes de (α, γ, h)

    Apenas α nas arestas de T, γ nos vértices que as tocam e h (se φ ∈ E(T))
    afetam a submatriz; as demais variáveis multiplicam todas as contagens
    pelo mesmo fator e são omitidas.

    Args:
        g: Grafo completo do sistema
        T: Subgrafo observado (rótulos originais)
        phi: Arquivo desejado
        field: Corpo do protocolo
        budget: Máximo de tuplas (padrão ENUMERATION_BUDGET)

    Returns:
        QueryDistribution: Contagens exatas por submatriz
    """
    if not 1 <= phi <= g.n:
        raise ProtocolError(f"Arquivo {phi} fora de [1, {g.n}]")
    q = field.q
    labels = sorted(T.edge_ids)
    vertices = sorted({v for e in T.edges for v in e})
    uses_h = phi in labels
    radices = [q - 1] * (len(labels) + len(vertices)) + ([q - 2] if uses_h else [])
    _require_budget(math.prod(radices), budget)

    edge_col = {label: k for k, label in enumerate(labels)}
    vertex_col = {v: len(labels) + k for k, v in enumerate(vertices)}
    layout = _layout(T)
    counter: Counter = Counter()
    for digits in _iter_tuples(radices):
        values = digits + 1
        h = digits[:, -1] + 2 if uses_h else None
        columns = []
        for server, label in layout:
            entry = values[:, vertex_col[server]] * values[:, edge_col[label]] % q
            low, _ = T.endpoints(label)
            if server == low:
                if label == phi:
                    entry = entry * h % q
            else:
                entry = (q - entry) % q
            columns.append(entry)
        rows = np.stack(columns, axis=1) if columns else np.zeros((len(digits), 0), dtype=np.int64)
        _count_rows(counter, rows)
    return QueryDistribution(layout=layout, counts=dict(counter))


def lemma5_probability(T: StorageGraph, phi: int, field: Field) -> Fraction:
    """
    Probabilidade de cada matriz do suporte: (q-1)^-(u-k), dividida por (q-2)
    quando e_φ está em um ciclo de T

    u = incidências aresta-vértice em T; k = arestas de retorno de uma BFS.
    """
    u = 2 * T.n
    k = T.cyclomatic_number()
    probability = Fraction(1, (field.q - 1) ** (u - k))
    if phi in edges_on_cycles(T):
        probability /= field.q - 2
    return probability


@dataclass
class CompatibleMatrices:
    """Todas as matrizes com o suporte de I(T) e o veredito de posto de cada ciclo"""

    layout: Tuple[Tuple[int, int], ...]
    entries: np.ndarray
    cycles: List[Cycle]
    full_rank: np.ndarray


def _cycle_matrix(layout, entries: np.ndarray, cycle: Cycle) -> np.ndarray:
    rows = list(cycle.vertices)
    columns = list(cycle.edges)
    matrix = np.zeros((len(rows), len(columns)), dtype=object)
    for (server, label), value in zip(layout, entries):
        if server in rows and label in columns:
            matrix[rows.index(server), columns.index(label)] = int(value)
    return matrix


def compatible_matrices(T: StorageGraph, field: Field, budget: Optional[int] = None) -> CompatibleMatrices:
    """Enumera as (q-1)^u matrizes T-compatíveis e calcula o posto de cada ciclo uma vez"""
    layout = _layout(T)
    radices = [field.q - 1] * len(layout)
    _require_budget(math.prod(radices), budget)
    entries = np.concatenate(list(_iter_tuples(radices))) + 1
    cycle_list = cycles(T)
    full_rank = np.zeros((len(entries), len(cycle_list)), dtype=bool)
    for row, values in enumerate(entries):
        for col, cycle in enumerate(cycle_list):
            matrix = _cycle_matrix(layout, values, cycle)
            full_rank[row, col] = rank_mod(matrix, field.q) == cycle.length
    return CompatibleMatrices(layout=layout, entries=entries, cycles=cycle_list, full_rank=full_rank)


def verify_theorem1(
    g: StorageGraph,
    T: StorageGraph,
    phi: int,
    field: Field,
    budget: Optional[int] = None,
    compatible: Optional[CompatibleMatrices] = None,
) -> bool:
    """
    Confere que o suporte de Q^T|φ é exatamente o conjunto das matrizes compatíveis
    que satisfazem a condição de posto dos ciclos, e que a distribuição é uniforme

    Args:
        compatible: Enumeração já calculada para T (reaproveitada entre vários φ)
    """
    distribution = enumerate_distribution(g, T, phi, field, budget)
    if compatible is None:
        compatible = compatible_matrices(T, field, budget)
    expected = np.array([phi in cycle.edge_set for cycle in compatible.cycles], dtype=bool)
    admissible = np.all(compatible.full_rank == expected, axis=1) if compatible.cycles else np.ones(
        len(compatible.entries), dtype=bool
    )
    expected_support = {tuple(int(v) for v in row) for row in compatible.entries[admissible]}
    same_support = distribution.support == frozenset(expected_support)
    uniform = distribution.is_uniform
    if not (same_support and uniform):
        logger.warning(
            f"Caracterização do suporte falhou para φ={phi}: suporte igual={same_support}, uniforme={uniform} "
            f"({len(distribution.support)} vs {len(expected_support)} matrizes)"
        )
    return same_support and uniform


# Ataque por posto


def _cycle_verdicts(Qsub: np.ndarray, rows: Sequence[int], columns: Sequence[int], G_S: StorageGraph, q: int):
    verdicts = []
    for cycle in cycles(G_S):
        sub = Qsub[np.ix_([rows.index(v) for v in cycle.vertices], [columns.index(e) for e in cycle.edges])]
        verdicts.append(CycleVerdict(edges=tuple(sorted(cycle.edges)), rank=rank_mod(sub, q)))
    return verdicts


def _candidates_from(verdict_sets: Sequence[Tuple[FrozenSet[int], bool]], n: int) -> FrozenSet[int]:
    """T = (∩ arestas dos ciclos de posto cheio) \\ (∪ arestas dos ciclos deficientes)"""
    result = set(range(1, n + 1))
    for edges, contains in verdict_sets:
        if contains:
            result &= edges
    for edges, contains in verdict_sets:
        if not contains:
            result -= edges
    return frozenset(result)


def rank_attack(Qsub: np.ndarray, g: StorageGraph, S: Sequence[int], field: Field) -> CollusionReport:
    """
    Estreita φ a partir da submatriz observada por S

    Args:
        Qsub: Linhas de S (ordem crescente) e colunas das arestas de G_S (ordem crescente)
        g: Grafo do sistema
        S: Servidores coniventes
        field: Corpo do protocolo

    Returns:
        CollusionReport: Conjunto candidato T(S, φ), vereditos por ciclo e vazamento
    """
    colluders = tuple(sorted(set(S)))
    G_S = induced(g, colluders)
    columns = sorted(G_S.edge_ids)
    Qsub = np.asarray(Qsub)
    if Qsub.shape != (len(colluders), len(columns)):
        raise ProtocolError(f"Submatriz {Qsub.shape} incompatível com G_S ({len(colluders)}×{len(columns)})")
    verdicts = _cycle_verdicts(Qsub, list(colluders), columns, G_S, field.q)
    candidates = _candidates_from([(frozenset(v.edges), v.full_rank) for v in verdicts], g.n)
    report = CollusionReport(colluders=colluders, n=g.n, candidates=candidates, verdicts=verdicts)
    logger.info(f"Ataque de S={list(colluders)}: |T|={len(candidates)}, vazamento={report.leakage_bits:.3f} bits")
    return report


def candidate_set(g: StorageGraph, S: Sequence[int], phi: int) -> FrozenSet[int]:
    """T(S, φ) calculado apenas pela estrutura do grafo"""
    G_S = induced(g, S)
    return _candidates_from([(c.edge_set, phi in c.edge_set) for c in cycles(G_S)], g.n)


def observed_submatrix(Q: np.ndarray, g: StorageGraph, S: Sequence[int]) -> np.ndarray:
    colluders = sorted(set(S))
    columns = sorted(induced(g, colluders).edge_ids)
    return np.asarray(Q)[np.ix_([v - 1 for v in colluders], [e - 1 for e in columns])]


def simulate_attack(g: StorageGraph, S: Sequence[int], phi: int, field: Field, rng: np.random.Generator) -> CollusionReport:
    """Gera consultas reais para φ e executa o ataque de S sobre elas"""
    query_matrix, _ = gen_queries(g, phi, field, rng)
    report = rank_attack(observed_submatrix(query_matrix.matrix, g, S), g, S, field)
    report.phi = phi
    return report


def check_cycle_ranks(Q: np.ndarray, g: StorageGraph, phi: int, field: Field) -> bool:
    """Q^C tem posto cheio se e somente se e_φ ∈ C, para todo ciclo C de g"""
    for cycle in cycles(g):
        sub = np.asarray(Q)[np.ix_([v - 1 for v in cycle.vertices], [e - 1 for e in cycle.edges])]
        if (rank_mod(sub, field.q) == cycle.length) != (phi in cycle.edge_set):
            logger.warning(f"Posto do ciclo {cycle.edges} contradiz φ={phi}")
            return False
    return True


# Verificações de privacidade


def verify_acyclic_privacy(g: StorageGraph, S: Sequence[int], field: Field, budget: Optional[int] = None) -> bool:
    """Q^{G_S}|φ tem a mesma distribuição para todo φ quando G_S é acíclico"""
    G_S = induced(g, S)
    if not is_acyclic(G_S):
        raise PrivacyPreconditionError(f"G_S contém ciclo para S={sorted(set(S))}")
    outside = next((phi for phi in range(1, g.n + 1) if phi not in G_S.edge_ids), None)
    reference = enumerate_distribution(g, G_S, outside or 1, field, budget)
    for phi in G_S.edge_ids:
        if not enumerate_distribution(g, G_S, phi, field, budget).same_as(reference):
            logger.warning(f"Distribuição depende de φ={phi} para S={sorted(set(S))}")
            return False
    return True


def verify_corollary2(
    g: StorageGraph,
    S: Sequence[int],
    phi1: int,
    phi2: int,
    field: Field,
    budget: Optional[int] = None,
) -> bool:
    """Distribuições de Q^{G_S} sob φ1 e φ2 coincidem"""
    if phi2 not in candidate_set(g, S, phi1):
        logger.warning(f"φ2={phi2} fora de T(S, φ1={phi1}): espera-se distinção")
    G_S = induced(g, S)
    first = enumerate_distribution(g, G_S, phi1, field, budget)
    second = enumerate_distribution(g, G_S, phi2, field, budget)
    return first.same_as(second)


def share_distribution(
    g: StorageGraph,
    S: Sequence[int],
    phi: int,
    field: Field,
    budget: Optional[int] = None,
) -> QueryDistribution:
    """Distribuição conjunta dos coeficientes recebidos por S no esquema aditivo"""
    r = g.uniformity
    if r is None or r < 2:
        raise ProtocolError("O esquema aditivo exige um hipergrafo r-uniforme com r >= 2")
    q = field.q
    colluders = sorted(set(S))
    layout = tuple(
        (server, label) for server in colluders for label in g.gamma(server)
    )
    radices = [q] * ((r - 1) * g.n)
    _require_budget(math.prod(radices), budget)
    counter: Counter = Counter()
    for digits in _iter_tuples(radices):
        free = digits.reshape(len(digits), r - 1, g.n)
        last = (-free.sum(axis=1)) % q
        last[:, phi - 1] = (last[:, phi - 1] + 1) % q
        columns = []
        for server, label in layout:
            row = sorted(g.edge(label)).index(server)
            column = g.edge_ids.index(label)
            columns.append(free[:, row, column] if row < r - 1 else last[:, column])
        rows = np.stack(columns, axis=1) if columns else np.zeros((len(digits), 0), dtype=np.int64)
        _count_rows(counter, rows)
    return QueryDistribution(layout=layout, counts=dict(counter))


def verify_share_privacy(g: StorageGraph, S: Sequence[int], field: Field, budget: Optional[int] = None) -> bool:
    """(r-1)-privacidade do esquema aditivo: a visão de S não depende de φ"""
    r = g.uniformity
    if r is None or len(set(S)) > r - 1:
        raise PrivacyPreconditionError("O esquema aditivo só garante privacidade para até r-1 servidores")
    reference = share_distribution(g, S, 1, field, budget)
    return all(share_distribution(g, S, phi, field, budget).same_as(reference) for phi in range(2, g.n + 1))


def coded_query_distribution(
    system: CodedSystem,
    S: Sequence[int],
    phis: Sequence[int],
    round_index: int = 1,
    budget: Optional[int] = None,
) -> QueryDistribution:
    """Distribuição conjunta dos coeficientes recebidos por S em uma rodada do esquema codificado"""
    plan = plan_rounds(system.code.N, system.code.K)
    q = system.field.q
    colluders = sorted(set(S))
    by_server = {c.server: c for c in system.contents}
    layout = tuple((server, t) for server in colluders for t in by_server[server].files)
    files = sorted({t for _, t in layout})
    h_entries = []
    for server, t in layout:
        m = system.partition.part_of(server)
        h_entries.append(
            any(t == phi and m in plan.positions(round_index, slot) for slot, phi in enumerate(phis, start=1))
        )
    uses_h = any(h_entries)
    radices = [q - 1] * (len(files) + len(colluders)) + ([q - 2] if uses_h else [])
    _require_budget(math.prod(radices), budget)
    file_col = {t: k for k, t in enumerate(files)}
    server_col = {v: len(files) + k for k, v in enumerate(colluders)}
    counter: Counter = Counter()
    for digits in _iter_tuples(radices):
        values = digits + 1
        columns = []
        for (server, t), with_h in zip(layout, h_entries):
            entry = values[:, server_col[server]] * values[:, file_col[t]] % q
            if with_h:
                entry = entry * (digits[:, -1] + 2) % q
            columns.append(entry)
        rows = np.stack(columns, axis=1) if columns else np.zeros((len(digits), 0), dtype=np.int64)
        _count_rows(counter, rows)
    return QueryDistribution(layout=layout, counts=dict(counter))


def verify_coded_privacy(system: CodedSystem, S: Sequence[int], budget: Optional[int] = None) -> bool:
    """
    A visão de S em cada rodada é independente de (φ_1, ..., φ_b)

    Exige que o multigrafo colorido induzido por S não tenha ciclo policromático.
    """
    if polychromatic_cycle_exists(to_colored(system.graph), S):
        raise PrivacyPreconditionError(f"S={sorted(set(S))} contém um ciclo policromático")
    plan = plan_rounds(system.code.N, system.code.K)
    choices = list(itertools.permutations(range(1, system.graph.n + 1), plan.b))
    for round_index in range(1, plan.r + 1):
        reference = coded_query_distribution(system, S, choices[0], round_index, budget)
        for phis in choices[1:]:
            if not coded_query_distribution(system, S, phis, round_index, budget).same_as(reference):
                logger.warning(f"Rodada {round_index}: visão de S depende de φ={list(phis)}")
                return False
    return True
