# app/protocols/coded.py
import itertools
import logging
import math
from dataclasses import dataclass, field as dataclass_field
from typing import Dict, FrozenSet, List, Mapping, Sequence, Tuple

import numpy as np

from app.exceptions import GraphError, ProtocolError
from app.models.field import Field
from app.models.graph import StorageGraph
from app.models.storage import Dataset, ServerContents
from app.protocols.base import BaseProtocol, QueryPlan, RetrievalResult, RoundAnswers, RoundQueries
from app.utils.file_utils import parse_vertex_set
from app.utils.linalg import rank_mod, solve_mod

logger = logging.getLogger(__name__)

# Acima disso a verificação de todos os menores K×K fica cara demais
MDS_CHECK_MAX_N = 12

# (arquivo i, posição m) -> servidor que guarda y_{i,m}
Assignment = Dict[Tuple[int, int], int]


# Códigos MDS


@dataclass(frozen=True)
class MdsCode:
    """Código [N, K]_q com matriz geradora K×N"""

    N: int
    K: int
    generator: np.ndarray
    field: Field

    def __post_init__(self):
        if not 1 <= self.K < self.N:
            raise ProtocolError(f"Parâmetros inválidos: exige 1 <= K < N (N={self.N}, K={self.K})")
        generator = self.field.array(self.generator)
        if generator.shape != (self.K, self.N):
            raise ProtocolError(f"Geradora deve ser {self.K}×{self.N}, recebida {generator.shape}")
        object.__setattr__(self, "generator", generator)

    @classmethod
    def from_generator(cls, generator, field: Field) -> "MdsCode":
        matrix = np.asarray(generator)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1)
        code = cls(N=matrix.shape[1], K=matrix.shape[0], generator=matrix, field=field)
        if code.N <= MDS_CHECK_MAX_N and not code.is_mds():
            raise ProtocolError("A matriz geradora não define um código MDS")
        return code

    def is_mds(self) -> bool:
        """Todo menor K×K da geradora é invertível"""
        return all(
            rank_mod(self.generator[:, list(columns)], self.field.q) == self.K
            for columns in itertools.combinations(range(self.N), self.K)
        )

    def encode(self, x: np.ndarray) -> np.ndarray:
        """
        Codifica um arquivo de comprimento f em N símbolos de comprimento f/K

        O arquivo é dividido em K blocos consecutivos; o bloco k é a coluna k da
        matriz (f/K)×K, e cada linha dessa matriz é uma mensagem do código.
        """
        x = self.field.array(x)
        if len(x) % self.K:
            raise ProtocolError(f"K={self.K} não divide f={len(x)}")
        chunks = x.reshape(self.K, len(x) // self.K)
        return self.field.matmul(self.generator.T, chunks)

    def interpolate(self, positions: Sequence[int], values: np.ndarray) -> np.ndarray:
        """Recupera as N coordenadas de cada palavra-código a partir de K posições (base 1)"""
        columns = [p - 1 for p in positions]
        if len(columns) != self.K:
            raise ProtocolError(f"Interpolação exige exatamente {self.K} posições, recebidas {len(columns)}")
        messages = solve_mod(self.generator[:, columns], np.asarray(values).T, self.field.q)
        return self.field.matmul(self.generator.T, self.field.array(messages).T)

    def decode(self, positions: Sequence[int], symbols: np.ndarray) -> np.ndarray:
        """Reconstrói o arquivo a partir de K símbolos nas posições dadas"""
        columns = [p - 1 for p in positions]
        if len(columns) != self.K:
            raise ProtocolError(f"Decodificação exige {self.K} símbolos, recebidos {len(columns)}")
        messages = solve_mod(self.generator[:, columns], np.asarray(symbols).T, self.field.q)
        return self.field.array(np.asarray(messages).T.reshape(-1))


def rs_code(N: int, K: int, field: Field) -> MdsCode:
    """Reed-Solomon: G[k][j] = a_j^k com pontos a_j = 0..N-1 (0^0 = 1)"""
    if field.q < N:
        raise ProtocolError(f"Reed-Solomon de comprimento {N} exige q >= N (q={field.q})")
    generator = [[pow(point, k, field.q) for point in range(N)] for k in range(K)]
    return MdsCode.from_generator(generator, field)


def repetition_code(field: Field) -> MdsCode:
    """{(x, -x)}: com N=2 e K=1 o esquema coincide com a 2-replicação"""
    return MdsCode.from_generator([[1, field.neg(1)]], field)


def parity_code(field: Field) -> MdsCode:
    """{(x, y, x+y)}"""
    return MdsCode.from_generator([[1, 0, 1], [0, 1, 1]], field)


# Partição e atribuição


@dataclass(frozen=True)
class Partition:
    s: int
    parts: Tuple[Tuple[int, ...], ...]

    def __post_init__(self):
        parts = tuple(tuple(sorted(int(v) for v in part)) for part in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(not part for part in parts):
            raise ProtocolError("Todas as partes devem ser não vazias")
        members = [v for part in parts for v in part]
        if len(members) != len(set(members)):
            raise ProtocolError("As partes devem ser disjuntas")
        if sorted(members) != list(range(1, self.s + 1)):
            raise ProtocolError(f"A união das partes deve ser [1, {self.s}]")

    @property
    def N(self) -> int:
        return len(self.parts)

    def part_of(self, server: int) -> int:
        for m, part in enumerate(self.parts, start=1):
            if server in part:
                return m
        raise ProtocolError(f"Servidor {server} fora da partição")


def partition_from_spec(spec: str, s: int) -> Partition:
    """Ex.: "1-4;5-8;9-12" ou "1,2;3,4;5,6" """
    try:
        parts = [parse_vertex_set(chunk) for chunk in spec.split(";") if chunk.strip()]
    except ValueError as e:
        raise ProtocolError(f"Partição malformada {spec!r}: {e}")
    return Partition(s=s, parts=tuple(tuple(p) for p in parts))


def assignment_from_hypergraph(g: StorageGraph, partition: Partition) -> Assignment:
    """Cada hiperaresta deve ter exatamente um servidor em cada parte L_m"""
    assignment: Assignment = {}
    for label, e in zip(g.edge_ids, g.edges):
        for m, part in enumerate(partition.parts, start=1):
            inside = sorted(e & frozenset(part))
            if len(inside) != 1:
                raise GraphError(f"A hiperaresta {label} tem {len(inside)} servidores na parte L_{m}")
            assignment[(label, m)] = inside[0]
    return assignment


@dataclass
class CodedSystem:
    code: MdsCode
    partition: Partition
    assignment: Assignment
    graph: StorageGraph
    contents: List[ServerContents]
    f: int

    @property
    def field(self) -> Field:
        return self.code.field

    @property
    def symbol_length(self) -> int:
        return self.f // self.code.K


def encode_and_disperse(
    X: Dataset,
    code: MdsCode,
    partition: Partition,
    assignment: Assignment,
) -> CodedSystem:
    """
    Codifica cada arquivo e guarda y_{i,m} no servidor atribuído dentro de L_m

    Returns:
        CodedSystem: Conteúdo dos servidores e o hipergrafo N-partido induzido
    """
    if X.f % code.K:
        raise ProtocolError(f"K={code.K} não divide f={X.f}")
    if partition.N != code.N:
        raise ProtocolError(f"A partição tem {partition.N} partes, mas o código tem N={code.N}")
    holdings: Dict[int, Dict[int, np.ndarray]] = {server: {} for server in range(1, partition.s + 1)}
    edges = []
    for i in range(1, X.n + 1):
        symbols = code.encode(X.file(i))
        edge = set()
        for m in range(1, code.N + 1):
            server = assignment.get((i, m))
            if server is None or server not in partition.parts[m - 1]:
                raise ProtocolError(f"O símbolo ({i}, {m}) deve ser atribuído a um servidor de L_{m}")
            holdings[server][i] = symbols[m - 1].copy()
            edge.add(server)
        edges.append(edge)
    graph = StorageGraph(s=partition.s, edges=tuple(frozenset(e) for e in edges))
    contents = [
        ServerContents(server=j, holdings=h, field=code.field, length=X.f // code.K)
        for j, h in sorted(holdings.items())
    ]
    logger.info(f"Sistema codificado [{code.N},{code.K}] com s={partition.s} e n={X.n}")
    return CodedSystem(code=code, partition=partition, assignment=assignment, graph=graph, contents=contents, f=X.f)


def build_coded_system(g: StorageGraph, partition: Partition, X: Dataset, code: MdsCode) -> CodedSystem:
    return encode_and_disperse(X, code, partition, assignment_from_hypergraph(g, partition))


# Plano de rodadas


@dataclass(frozen=True)
class RoundPlan:
    N: int
    K: int
    r: int
    b: int
    J: Mapping[Tuple[int, int], FrozenSet[int]] = dataclass_field(default_factory=dict)

    def positions(self, round_index: int, slot: int) -> FrozenSet[int]:
        return self.J.get((round_index, slot), frozenset())

    def round_positions(self, round_index: int) -> FrozenSet[int]:
        return frozenset().union(*(self.positions(round_index, j) for j in range(1, self.b + 1)))

    def slot_positions(self, slot: int) -> FrozenSet[int]:
        return frozenset().union(*(self.positions(i, slot) for i in range(1, self.r + 1)))

    def validate(self) -> None:
        if self.K * self.b != self.r * (self.N - self.K):
            raise ProtocolError("Plano inconsistente: Kb != r(N-K)")
        for i in range(1, self.r + 1):
            sizes = sum(len(self.positions(i, j)) for j in range(1, self.b + 1))
            if sizes != self.N - self.K or len(self.round_positions(i)) != sizes:
                raise ProtocolError(f"Rodada {i}: conjuntos J não disjuntos ou |J| != N-K")
        for j in range(1, self.b + 1):
            if len(self.slot_positions(j)) != self.K:
                raise ProtocolError(f"Arquivo {j} do lote não recebe K símbolos distintos")


def plan_rounds(N: int, K: int) -> RoundPlan:
    """
    Distribui as posições em ordem, rodada a rodada, com contador cíclico

    O c-ésimo símbolo corrompido (c = 0..r(N-K)-1) pertence à rodada c // (N-K),
    ao arquivo c // K do lote e à posição (c mod max(K, N-K)) + 1.
    """
    if not 1 <= K < N:
        raise ProtocolError(f"Parâmetros inválidos: exige 1 <= K < N (N={N}, K={K})")
    corrupted = N - K
    lcm = math.lcm(K, corrupted)
    r, b = lcm // corrupted, lcm // K
    width = max(K, corrupted)
    J: Dict[Tuple[int, int], set] = {}
    for c in range(lcm):
        key = (c // corrupted + 1, c // K + 1)
        J.setdefault(key, set()).add(c % width + 1)
    plan = RoundPlan(N=N, K=K, r=r, b=b, J={key: frozenset(v) for key, v in J.items()})
    plan.validate()
    return plan


# Consultas e reconstrução


@dataclass(frozen=True)
class CodedSecret:
    alpha: Tuple[int, ...]
    gamma: Tuple[int, ...]
    h: int
    phis: Tuple[int, ...]

    def delta(self, round_index: int, t: int, m: int, plan: RoundPlan) -> int:
        """δ(t, m) = 1 se t = φ_j e m ∈ J^(i,j) para algum j"""
        for slot, phi in enumerate(self.phis, start=1):
            if t == phi and m in plan.positions(round_index, slot):
                return 1
        return 0


def sample_coded_secret(system: CodedSystem, phis: Sequence[int], rng: np.random.Generator) -> CodedSecret:
    field = system.field
    alpha = field.random_nonzero_vector(rng, system.graph.n)
    gamma = field.random_nonzero_vector(rng, system.graph.s)
    h = field.sample_h(rng)
    return CodedSecret(
        alpha=tuple(int(a) for a in alpha),
        gamma=tuple(int(g) for g in gamma),
        h=int(h),
        phis=tuple(int(p) for p in phis),
    )


def coded_queries(round_index: int, secret: CodedSecret, system: CodedSystem, plan: RoundPlan) -> RoundQueries:
    """(q_j)_t = γ_j·α_t·h^δ(t,m) para o servidor j ∈ L_m e cada arquivo t de que guarda um símbolo"""
    if len(set(secret.phis)) != len(secret.phis):
        raise ProtocolError(f"Índices de arquivo repetidos: {list(secret.phis)}")
    field = system.field
    queries: RoundQueries = {}
    for contents in system.contents:
        server = contents.server
        m = system.partition.part_of(server)
        row = {}
        for t in contents.files:
            coefficient = field.mul(secret.gamma[server - 1], secret.alpha[t - 1])
            if secret.delta(round_index, t, m, plan):
                coefficient = field.mul(coefficient, secret.h)
            row[t] = coefficient
        queries[server] = row
    return queries


def coded_round(
    round_index: int,
    secret: CodedSecret,
    system: CodedSystem,
    plan: RoundPlan,
) -> Tuple[RoundQueries, RoundAnswers]:
    """Consultas de uma rodada e as respostas Σ_ℓ (q_j)_ℓ·y_{ℓ,m} calculadas em processo"""
    queries = coded_queries(round_index, secret, system, plan)
    return queries, BaseProtocol.answer_round(system.contents, queries)


def _aggregate(answers: RoundAnswers, secret: CodedSecret, system: CodedSystem) -> np.ndarray:
    """Linha m: Σ_{j ∈ L_m} γ_j⁻¹·a_j"""
    field = system.field
    observed = field.zeros((system.code.N, system.symbol_length))
    for server, vector in answers.items():
        if len(vector) != system.symbol_length:
            raise ProtocolError(
                f"Servidor {server} respondeu {len(vector)} símbolos, esperados {system.symbol_length}"
            )
        m = system.partition.part_of(server)
        observed[m - 1] = (observed[m - 1] + field.scale(vector, field.inv(secret.gamma[server - 1]))) % field.q
    return observed


def coded_reconstruct(
    answers: Sequence[RoundAnswers],
    secrets: Sequence[CodedSecret],
    plan: RoundPlan,
    system: CodedSystem,
) -> List[np.ndarray]:
    """
    Decodificação por apagamento de cada rodada seguida da decodificação dos arquivos

    Args:
        answers: Respostas de cada uma das r rodadas
        secrets: Segredo usado em cada rodada
        plan: Plano de rodadas
        system: Sistema codificado

    Returns:
        List[np.ndarray]: Os b arquivos, na ordem de secrets[0].phis
    """
    if len(answers) != plan.r or len(secrets) != plan.r:
        raise ProtocolError(f"Transcrição incompleta: esperadas {plan.r} rodadas, recebidas {len(answers)}")
    field, code = system.field, system.code
    phis = secrets[0].phis
    recovered: Dict[int, Dict[int, np.ndarray]] = {slot: {} for slot in range(1, plan.b + 1)}

    for round_index, (round_answers, secret) in enumerate(zip(answers, secrets), start=1):
        observed = _aggregate(round_answers, secret, system)
        intact = sorted(set(range(1, code.N + 1)) - plan.round_positions(round_index))
        codewords = code.interpolate(intact, observed[[p - 1 for p in intact]])
        noise = (observed.astype(object) - codewords.astype(object)) % field.q
        for slot, phi in enumerate(phis, start=1):
            scale = field.inv(field.mul(secret.alpha[phi - 1], field.sub(secret.h, 1)))
            for m in plan.positions(round_index, slot):
                recovered[slot][m] = field.scale(noise[m - 1], scale)

    files = []
    for slot in range(1, plan.b + 1):
        positions = sorted(recovered[slot])
        if len(positions) != code.K:
            raise ProtocolError(f"Arquivo {phis[slot - 1]}: {len(positions)} símbolos recuperados, esperados {code.K}")
        symbols = np.stack([recovered[slot][m] for m in positions])
        files.append(code.decode(positions, symbols))
    return files


class CodedProtocol(BaseProtocol):
    """Esquema codificado em r rodadas; recupera b arquivos por execução com taxa (N-K)/s"""

    name = "coded"

    def __init__(self, system: CodedSystem, reuse_randomness: bool = False):
        super().__init__(system.graph, system.field)
        self.system = system
        self.plan = plan_rounds(system.code.N, system.code.K)
        self.reuse_randomness = reuse_randomness
        if reuse_randomness:
            logger.warning("Reutilizando (α, γ, h) entre rodadas: privacidade não garantida")

    @property
    def files_per_run(self) -> int:
        return self.plan.b

    def plan_queries(self, phis: Sequence[int], rng: np.random.Generator) -> QueryPlan:
        phis = self.validate_phis(phis)
        secrets: List[CodedSecret] = []
        for _ in range(self.plan.r):
            if self.reuse_randomness and secrets:
                secrets.append(secrets[0])
            else:
                secrets.append(sample_coded_secret(self.system, phis, rng))
        rounds = [
            coded_queries(i, secret, self.system, self.plan)
            for i, secret in enumerate(secrets, start=1)
        ]
        return QueryPlan(phis=phis, rounds=rounds, secrets=secrets)

    def reconstruct(self, plan: QueryPlan, answers: List[RoundAnswers]) -> List[np.ndarray]:
        return coded_reconstruct(answers, plan.secrets, self.plan, self.system)


def coded_retrieve(
    system: CodedSystem,
    phis: Sequence[int],
    rng: np.random.Generator,
    reuse_randomness: bool = False,
    fetch=None,
) -> RetrievalResult:
    return CodedProtocol(system, reuse_randomness).retrieve(system.contents, phis, rng, fetch=fetch)
