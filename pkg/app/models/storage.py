# app/models/storage.py
import logging
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional

import numpy as np

from app.exceptions import DatasetError, ProtocolError
from app.models.field import Field
from app.models.graph import StorageGraph

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Dataset:
    """Matriz X (n×f) sobre F_q; a linha i é o arquivo x_i"""

    field: Field
    rows: np.ndarray

    def __post_init__(self):
        rows = np.asarray(self.rows)
        if rows.ndim != 2 or rows.shape[0] < 1 or rows.shape[1] < 1:
            raise DatasetError(f"Conjunto de dados deve ser n×f com n, f >= 1 (formato {rows.shape})")
        object.__setattr__(self, "rows", self.field.array(rows))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def f(self) -> int:
        return self.rows.shape[1]

    def file(self, index: int) -> np.ndarray:
        """Arquivo x_i (base 1)"""
        if not 1 <= index <= self.n:
            raise DatasetError(f"Arquivo {index} fora de [1, {self.n}]")
        return self.rows[index - 1]


@dataclass(frozen=True)
class ServerContents:
    """Conteúdo de um servidor: arquivo (ou símbolo de palavra-código) por índice de arquivo"""

    server: int
    holdings: Mapping[int, np.ndarray]
    field: Field
    length: int = 0

    @property
    def files(self) -> List[int]:
        return sorted(self.holdings)

    @property
    def symbol_length(self) -> int:
        """Comprimento das respostas; servidores sem arquivos usam o comprimento do conjunto de dados"""
        if not self.holdings:
            return self.length
        return len(next(iter(self.holdings.values())))

    def answer(self, query: Mapping[int, int], length: Optional[int] = None) -> np.ndarray:
        """
        Responde a_j = Σ_i (q_j)_i · x_i sobre os arquivos armazenados

        Args:
            query: Coeficientes esparsos {arquivo: coeficiente}
            length: Comprimento da resposta quando o servidor não guarda nada e não o conhece

        Returns:
            np.ndarray: Combinação linear dos itens armazenados
        """
        unheld = [i for i in query if i not in self.holdings]
        if unheld:
            raise ProtocolError(f"Servidor {self.server} recebeu coeficiente para arquivo não armazenado: {unheld}")
        size = self.symbol_length or (length or 0)
        result = self.field.zeros(size)
        for file_index, coefficient in query.items():
            result = (result + self.field.scale(self.holdings[file_index], coefficient)) % self.field.q
        return result


def disperse(g: StorageGraph, X: Dataset) -> List[ServerContents]:
    """O servidor j guarda x_i se e somente se j pertence à hiperaresta i"""
    if X.n != g.n:
        raise DatasetError(f"O conjunto de dados tem {X.n} arquivos, mas o grafo tem {g.n} arestas")
    contents = []
    for server in range(1, g.s + 1):
        holdings: Dict[int, np.ndarray] = {
            label: X.file(label).copy() for label, e in zip(g.edge_ids, g.edges) if server in e
        }
        contents.append(ServerContents(server=server, holdings=holdings, field=X.field, length=X.f))
    logger.debug(f"Dispersão concluída: {total_symbols(contents)} símbolos em {g.s} servidores")
    return contents


def random_dataset(n: int, f: int, field: Field, rng: np.random.Generator) -> Dataset:
    """Conjunto de dados uniforme e determinístico para uma semente fixa"""
    if n < 1 or f < 1:
        raise DatasetError(f"n e f devem ser >= 1 (n={n}, f={f})")
    return Dataset(field=field, rows=field.random_vector(rng, (n, f)))


def total_symbols(contents: List[ServerContents]) -> int:
    return sum(len(vector) for server in contents for vector in server.holdings.values())


def storage_overhead(contents: List[ServerContents], X: Dataset) -> float:
    """Símbolos armazenados divididos pelo tamanho do conjunto de dados (r na replicação, N/K no código)"""
    return total_symbols(contents) / (X.n * X.f)
