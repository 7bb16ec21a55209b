# app/protocols/base.py
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from app.exceptions import ProtocolError
from app.models.field import Field
from app.models.graph import StorageGraph
from app.models.storage import ServerContents

logger = logging.getLogger(__name__)

# Consulta esparsa de uma rodada: servidor -> {arquivo: coeficiente}
RoundQueries = Dict[int, Dict[int, int]]
RoundAnswers = Dict[int, np.ndarray]
AnswerFetcher = Callable[[RoundQueries], RoundAnswers]


@dataclass
class QueryPlan:
    """Consultas de todas as rodadas e os segredos do usuário necessários à reconstrução"""

    phis: List[int]
    rounds: List[RoundQueries]
    secrets: List[Any]


@dataclass
class Transcript:
    """Consultas enviadas e respostas recebidas, com a contabilidade de símbolos"""

    rounds: List[RoundQueries] = field(default_factory=list)
    answers: List[RoundAnswers] = field(default_factory=list)

    @property
    def upload(self) -> int:
        return sum(len(query) for queries in self.rounds for query in queries.values())

    @property
    def download(self) -> int:
        return sum(len(answer) for answers in self.answers for answer in answers.values())


@dataclass
class RetrievalResult:
    protocol: str
    phis: List[int]
    files: List[np.ndarray]
    transcript: Transcript

    @property
    def rate(self) -> Fraction:
        retrieved = sum(len(f) for f in self.files)
        return Fraction(retrieved, self.transcript.download)


class BaseProtocol(ABC):
    """Classe base abstrata para todos os protocolos de PIR"""

    name: str = "base"

    def __init__(self, graph: StorageGraph, field: Field):
        self.graph = graph
        self.field = field

    @property
    def files_per_run(self) -> int:
        """Quantidade de arquivos recuperados por execução (b)"""
        return 1

    @abstractmethod
    def plan_queries(self, phis: Sequence[int], rng: np.random.Generator) -> QueryPlan:
        """
        Gera as consultas de todas as rodadas

        Args:
            phis: Índices dos arquivos desejados
            rng: Gerador aleatório com semente

        Returns:
            QueryPlan: Consultas por rodada e segredos do usuário
        """
        pass

    @abstractmethod
    def reconstruct(self, plan: QueryPlan, answers: List[RoundAnswers]) -> List[np.ndarray]:
        """
        Reconstrói os arquivos a partir das respostas de todas as rodadas

        Args:
            plan: Plano gerado por plan_queries
            answers: Respostas por rodada

        Returns:
            List[np.ndarray]: Arquivos recuperados, na ordem de phis
        """
        pass

    def validate_phis(self, phis: Sequence[int]) -> List[int]:
        phis = [int(p) for p in phis]
        if len(phis) != self.files_per_run:
            raise ProtocolError(f"{self.name} recupera {self.files_per_run} arquivo(s) por execução, recebeu {len(phis)}")
        if len(set(phis)) != len(phis):
            raise ProtocolError(f"Índices de arquivo repetidos: {phis}")
        for phi in phis:
            if not 1 <= phi <= self.graph.n:
                raise ProtocolError(f"Arquivo {phi} fora de [1, {self.graph.n}]")
        return phis

    @staticmethod
    def answer_round(contents: Sequence[ServerContents], queries: RoundQueries) -> RoundAnswers:
        """Respostas em processo: cada servidor calcula sua combinação linear"""
        by_server = {c.server: c for c in contents}
        return {server: by_server[server].answer(query) for server, query in sorted(queries.items())}

    def retrieve(
        self,
        contents: Sequence[ServerContents],
        phis: Sequence[int],
        rng: np.random.Generator,
        fetch: Optional[AnswerFetcher] = None,
    ) -> RetrievalResult:
        """
        Executa o protocolo de ponta a ponta

        Args:
            contents: Conteúdo dos servidores (usado quando fetch é None)
            phis: Arquivos desejados
            rng: Gerador aleatório com semente
            fetch: Função alternativa para obter respostas (ex.: rede)

        Returns:
            RetrievalResult: Arquivos, transcrição e taxa
        """
        plan = self.plan_queries(phis, rng)
        answers = []
        for round_index, queries in enumerate(plan.rounds, start=1):
            answers.append(fetch(queries) if fetch else self.answer_round(contents, queries))
            logger.debug(f"{self.name}: rodada {round_index} com {len(answers[-1])} respostas")
        return self.assemble_result(plan, answers)

    def assemble_result(self, plan: QueryPlan, answers: List[RoundAnswers]) -> RetrievalResult:
        """Reconstrói os arquivos e monta a transcrição a partir das respostas de todas as rodadas"""
        transcript = Transcript(rounds=plan.rounds, answers=list(answers))
        files = self.reconstruct(plan, transcript.answers)
        result = RetrievalResult(protocol=self.name, phis=list(plan.phis), files=files, transcript=transcript)
        logger.info(
            f"{self.name}: arquivos {result.phis} recuperados "
            f"(upload={transcript.upload}, download={transcript.download}, taxa={result.rate})"
        )
        return result
