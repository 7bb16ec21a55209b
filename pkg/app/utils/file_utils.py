# app/utils/file_utils.py
import os
import re
import logging
from typing import Iterator, List, Tuple

import numpy as np

from app.exceptions import DatasetError, GraphError
from app.models.field import make_field
from app.models.graph import StorageGraph, from_edge_list
from app.models.storage import Dataset

logger = logging.getLogger(__name__)


def _content_lines(path: str) -> Iterator[Tuple[int, List[str]]]:
    """Linhas não vazias sem comentários (#), com o número da linha original"""
    with open(path, "r", encoding="utf-8") as f:
        for number, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if line:
                yield number, line.split()


def ensure_dir(path: str) -> str:
    os.makedirs(path, exist_ok=True)
    return path


def parse_vertex_set(text: str) -> List[int]:
    """Ex.: "1,2,5-7" -> [1, 2, 5, 6, 7]. Levanta ValueError se algum item não for inteiro"""
    members = []
    for token in re.split(r"[,\s]+", text.strip()):
        if not token:
            continue
        if "-" in token:
            low, high = (int(x) for x in token.split("-", 1))
            members.extend(range(low, high + 1))
        else:
            members.append(int(token))
    return members


def read_graph(path: str) -> StorageGraph:
    """
    Lê um grafo no formato texto: cabeçalho `s n`, depois n linhas com os
    vértices (base 1) de cada hiperaresta

    Args:
        path: Caminho do arquivo

    Returns:
        StorageGraph: Grafo validado
    """
    lines = list(_content_lines(path))
    if not lines:
        raise GraphError(f"Arquivo de grafo vazio: {path}")
    try:
        _, header = lines[0]
        s, n = (int(x) for x in header)
        edges = [[int(v) for v in tokens] for _, tokens in lines[1:]]
    except ValueError as e:
        raise GraphError(f"Arquivo de grafo malformado ({path}): {e}")
    if len(edges) != n:
        raise GraphError(f"Cabeçalho declara {n} hiperarestas, arquivo contém {len(edges)}")
    graph = from_edge_list(s, edges)
    logger.info(f"Grafo lido de {path}: s={graph.s}, n={graph.n}")
    return graph


def write_graph(g: StorageGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{g.s} {g.n}\n")
        for e in g.edges:
            f.write(" ".join(str(v) for v in sorted(e)) + "\n")


def read_dataset(path: str) -> Dataset:
    """Formato: cabeçalho `n f q`, depois n linhas de f inteiros"""
    lines = list(_content_lines(path))
    if not lines:
        raise DatasetError(f"Arquivo de dados vazio: {path}")
    try:
        _, header = lines[0]
        n, f, q = (int(x) for x in header)
        rows = [[int(v) for v in tokens] for _, tokens in lines[1:]]
    except ValueError as e:
        raise DatasetError(f"Arquivo de dados malformado ({path}): {e}")
    if len(rows) != n or any(len(row) != f for row in rows):
        raise DatasetError(f"O arquivo {path} não contém {n} linhas de {f} símbolos")
    field = make_field(q)
    if any(not 0 <= v < q for row in rows for v in row):
        raise DatasetError(f"Símbolos fora de [0, {q}) em {path}")
    return Dataset(field=field, rows=np.array(rows, dtype=object))


def write_dataset(X: Dataset, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"{X.n} {X.f} {X.field.q}\n")
        for row in X.rows:
            f.write(" ".join(str(int(v)) for v in row) + "\n")


def read_endpoints(path: str) -> List[Tuple[str, int]]:
    """Uma linha `host:port` por servidor; a linha j é o servidor j"""
    endpoints = []
    for number, tokens in _content_lines(path):
        host, sep, port = tokens[0].rpartition(":")
        if not sep or not host or not port.isdigit():
            raise GraphError(f"Endpoint inválido na linha {number} de {path}: {tokens[0]!r}")
        endpoints.append((host, int(port)))
    return endpoints


def write_endpoints(endpoints: List[Tuple[str, int]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for host, port in endpoints:
            f.write(f"{host}:{port}\n")
