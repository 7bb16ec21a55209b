# app/services/experiment_service.py
import asyncio
import itertools
import logging
import os
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from app.config import RESULTS_DIR
from app.data.reference_systems import family, reference_partition
from app.exceptions import GraphError, ProtocolError
from app.models.field import Field, make_field
from app.models.graph import StorageGraph, girth, induced, is_acyclic, to_colored, INFINITE_GIRTH
from app.models.schemas import ExperimentConfig, RetrievalReport, VerifyRequest
from app.models.storage import Dataset, ServerContents, disperse, random_dataset, storage_overhead
from app.net.client import fetch_answers
from app.protocols.additive import AdditiveProtocol
from app.protocols.base import BaseProtocol, RetrievalResult
from app.protocols.coded import (
    MdsCode,
    build_coded_system,
    parity_code,
    partition_from_spec,
    repetition_code,
    rs_code,
    CodedProtocol,
)
from app.protocols.reduction import ReducedProtocol, find_choice_no_short_cycles, random_choice
from app.protocols.replication import ReplicationProtocol, gen_queries
from app.services import analysis_service, bounds_service
from app.services.job_service import JobService
from app.utils.file_utils import ensure_dir, read_dataset, read_graph

logger = logging.getLogger(__name__)

TABLE1_GRAPHS = ["petersen", "complete_bipartite(4,4)"]


def load_graph(source: str) -> StorageGraph:
    """Família pelo nome ou, se o caminho existir, arquivo de grafo"""
    if os.path.isfile(source):
        return read_graph(source)
    return family(source)


def build_code(config: ExperimentConfig, field: Field) -> MdsCode:
    if config.code == "parity":
        return parity_code(field)
    if config.code == "repetition":
        return repetition_code(field)
    return rs_code(config.N, config.K, field)


class ExperimentService:
    """Orquestra experimentos: recuperação, ataques, limitantes, Tabela 1 e verificações"""

    def __init__(self, job_service: Optional[JobService] = None):
        self.job_service = job_service or JobService()

    # Recuperação

    def _dataset(self, config: ExperimentConfig, g: StorageGraph, field: Field, rng: np.random.Generator) -> Dataset:
        if config.dataset:
            X = read_dataset(config.dataset)
            if X.field.q != field.q:
                raise ProtocolError(f"O arquivo de dados usa q={X.field.q}, a configuração pede q={field.q}")
            return X
        return random_dataset(g.n, config.f, field, rng)

    def build_protocol(
        self,
        config: ExperimentConfig,
        g: StorageGraph,
        X: Dataset,
        rng: np.random.Generator,
    ) -> Tuple[BaseProtocol, List[ServerContents]]:
        """
        Instancia o protocolo escolhido e o conteúdo dos servidores

        Returns:
            Tuple[BaseProtocol, List[ServerContents]]: Protocolo e servidores
        """
        field = X.field
        if config.protocol == "rep2":
            return ReplicationProtocol(g, field), disperse(g, X)
        if config.protocol == "repR":
            return AdditiveProtocol(g, field), disperse(g, X)
        if config.protocol == "reduced":
            colored = to_colored(g)
            if config.girth is None:
                choice = random_choice(colored, rng)
            else:
                choice = find_choice_no_short_cycles(colored, config.girth)
                if choice is None:
                    raise ProtocolError(f"Não existe escolha sem ciclos de comprimento <= {config.girth}")
            return ReducedProtocol(g, choice, field), disperse(g, X)
        code = build_code(config, field)
        if config.partition:
            partition = partition_from_spec(config.partition, g.s)
        else:
            partition = partition_from_spec(
                ";".join(",".join(map(str, part)) for part in reference_partition(config.graph)), g.s
            )
        system = build_coded_system(g, partition, X, code)
        return CodedProtocol(system, config.reuse_randomness), system.contents

    def prepare(self, config: ExperimentConfig) -> Tuple[BaseProtocol, List[ServerContents], Dataset, np.random.Generator]:
        """Grafo, dados e protocolo determinísticos para a semente da configuração"""
        rng = np.random.default_rng(config.seed)
        field = make_field(config.q)
        g = load_graph(config.graph)
        X = self._dataset(config, g, field, rng)
        protocol, contents = self.build_protocol(config, g, X, rng)
        return protocol, contents, X, rng

    def run_retrieval(
        self,
        config: ExperimentConfig,
        phis: Sequence[int],
        endpoints: Optional[Sequence[Tuple[str, int]]] = None,
    ) -> Tuple[RetrievalReport, RetrievalResult]:
        """
        Executa o protocolo e confere os arquivos recuperados

        Args:
            config: Configuração do experimento
            phis: Arquivos desejados
            endpoints: Servidores remotos (linha j = servidor j); se ausente, executa em processo
        """
        protocol, contents, X, rng = self.prepare(config)
        g, field = protocol.graph, X.field
        fetch = None
        if endpoints:
            fetch = lambda queries: asyncio.run(fetch_answers(endpoints, queries, field))
        result = protocol.retrieve(contents, phis, rng, fetch=fetch)
        correct = all(np.array_equal(np.asarray(x, dtype=object), X.file(phi).astype(object)) for phi, x in zip(result.phis, result.files))
        if not correct:
            logger.error(f"Recuperação incorreta para φ={result.phis} em {config.graph}")
        report = RetrievalReport(
            protocol=protocol.name,
            graph=config.graph,
            s=g.s,
            n=g.n,
            q=field.q,
            f=X.f,
            phis=result.phis,
            files=[[int(v) for v in x] for x in result.files],
            correct=correct,
            upload=result.transcript.upload,
            download=result.transcript.download,
            rate=str(result.rate),
            storage_overhead=storage_overhead(contents, X),
        )
        return report, result

    # Análise

    def run_analysis(self, config: ExperimentConfig, colluders: Sequence[int], phi: int):
        g = load_graph(config.graph)
        invalid = [v for v in colluders if not 1 <= v <= g.s]
        if invalid:
            raise GraphError(f"Servidores coniventes fora de [1, {g.s}]: {invalid}")
        rng = np.random.default_rng(config.seed)
        return analysis_service.simulate_attack(g, colluders, phi, make_field(config.q), rng)

    def bound(self, source: str) -> bounds_service.RateReport:
        return bounds_service.rate_report(load_graph(source), name=source)

    # Tabela 1

    def certify_privacy(self, g: StorageGraph, t: int, field: Field, budget: Optional[int] = None) -> bool:
        """Todo conjunto de t servidores induz subgrafo acíclico e não vaza informação"""
        subsets = list(itertools.combinations(range(1, g.s + 1), t))
        for S in tqdm(subsets, desc=f"t={t}", unit="conjunto", leave=False):
            if not is_acyclic(induced(g, S)):
                logger.warning(f"Conjunto {S} induz um ciclo")
                return False
            if not analysis_service.verify_acyclic_privacy(g, S, field, budget):
                return False
        return True

    def table1(self, certify: bool = False, q: int = 3, budget: Optional[int] = None) -> pd.DataFrame:
        """
        Reproduz as linhas de Petersen e do bipartido completo a partir da estrutura dos grafos

        t = cintura - 1, d = grau máximo e a taxa vem da contabilidade do protocolo.
        """
        field = make_field(q)
        rows = []
        for name in TABLE1_GRAPHS:
            g = family(name)
            X = random_dataset(g.n, 1, field, np.random.default_rng(0))
            result = ReplicationProtocol(g, field).retrieve(disperse(g, X), [1], np.random.default_rng(0))
            g_girth = girth(g)
            t = g.s if g_girth == INFINITE_GIRTH else int(g_girth) - 1
            row = {"graph": name, "n": g.n, "s": g.s, "t": t, "d": g.max_degree, "rate": str(result.rate)}
            if certify:
                row["certified"] = self.certify_privacy(g, t, field, budget)
            rows.append(row)
        return pd.DataFrame(rows)

    def export_table1(self, df: pd.DataFrame, csv_path: Optional[str] = None, xlsx_path: Optional[str] = None) -> List[str]:
        written = []
        if csv_path:
            df.to_csv(csv_path, index=False)
            written.append(csv_path)
        if xlsx_path:
            df.to_excel(xlsx_path, index=False)
            written.append(xlsx_path)
        for path in written:
            logger.info(f"Tabela exportada: {path}")
        return written

    def table1_excel(self) -> str:
        path = os.path.join(ensure_dir(RESULTS_DIR), "table1.xlsx")
        if not os.path.exists(path):
            self.export_table1(self.table1(), xlsx_path=path)
        return path

    # Verificação

    def run_verification(
        self,
        request: VerifyRequest,
        progress: Optional[Callable[[float], None]] = None,
    ) -> Dict[str, Any]:
        """
        Bateria de verificações exatas sobre um grafo pequeno

        Raises:
            EnumerationBudgetExceeded: Quando alguma enumeração exata excede o orçamento
        """
        g = load_graph(request.graph)
        field = make_field(request.q)
        rng = np.random.default_rng(request.seed)
        checks: Dict[str, bool] = {}
        steps = 5

        def step(k: int) -> None:
            if progress:
                progress(k / steps)

        # Posto dos ciclos em consultas geradas
        cycle_ok, truth_ok = True, True
        for _ in range(request.samples):
            phi = int(rng.integers(1, g.n + 1))
            Q, _ = gen_queries(g, phi, field, rng)
            cycle_ok &= analysis_service.check_cycle_ranks(Q.matrix, g, phi, field)
            everyone = list(range(1, g.s + 1))
            report = analysis_service.rank_attack(
                analysis_service.observed_submatrix(Q.matrix, g, everyone), g, everyone, field
            )
            truth_ok &= phi in report.candidates
        checks["cycle_ranks"] = cycle_ok
        checks["attack_keeps_phi"] = truth_ok
        step(1)

        compatible = analysis_service.compatible_matrices(g, field, request.budget)
        checks["theorem1"] = all(
            analysis_service.verify_theorem1(g, g, phi, field, request.budget, compatible)
            for phi in range(1, g.n + 1)
        )
        step(2)

        checks["lemma5"] = all(
            set(analysis_service.enumerate_distribution(g, g, phi, field, request.budget).probabilities.values())
            == {analysis_service.lemma5_probability(g, phi, field)}
            for phi in range(1, g.n + 1)
        )
        step(3)

        everyone = list(range(1, g.s + 1))
        corollary = True
        for phi1 in range(1, g.n + 1):
            for phi2 in analysis_service.candidate_set(g, everyone, phi1):
                corollary &= analysis_service.verify_corollary2(g, everyone, phi1, phi2, field, request.budget)
        checks["corollary2"] = corollary
        step(4)

        g_girth = girth(g)
        largest = g.s if g_girth == INFINITE_GIRTH else min(g.s, int(g_girth) - 1)
        acyclic_ok = True
        for _ in range(request.samples):
            size = int(rng.integers(1, largest + 1))
            S = sorted(int(v) for v in rng.choice(np.arange(1, g.s + 1), size=size, replace=False))
            acyclic_ok &= analysis_service.verify_acyclic_privacy(g, S, field, request.budget)
        checks["acyclic_privacy"] = acyclic_ok
        step(5)

        passed = all(checks.values())
        logger.info(f"Verificação de {request.graph} (q={field.q}): {'ok' if passed else 'FALHOU'}")
        return {"graph": request.graph, "q": field.q, "checks": checks, "passed": passed}

    async def start_verification(self, request: VerifyRequest) -> str:
        """Cria o job e executa a verificação em segundo plano"""
        job_id = self.job_service.create_job("verify", request.model_dump())
        asyncio.create_task(self._verification_task(job_id, request))
        return job_id

    async def _verification_task(self, job_id: str, request: VerifyRequest) -> None:
        try:
            result = await asyncio.to_thread(
                self.run_verification, request, lambda p: self.job_service.update_progress(job_id, p)
            )
            self.job_service.complete_job(job_id, result)
        except Exception as e:
            logger.exception(f"Erro na verificação do job {job_id}")
            self.job_service.fail_job(job_id, str(e))
