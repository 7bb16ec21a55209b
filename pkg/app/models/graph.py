# app/models/graph.py
import itertools
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from app.config import MAX_CYCLE_VERTICES
from app.exceptions import GraphError

logger = logging.getLogger(__name__)

INFINITE_GIRTH = float("inf")


@dataclass(frozen=True)
class Cycle:
    """Ciclo simples: vértices v_0..v_{t-1} e as arestas {v_i, v_{i+1 mod t}}"""

    vertices: Tuple[int, ...]
    edges: Tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def edge_set(self) -> FrozenSet[int]:
        return frozenset(self.edges)


@dataclass(frozen=True)
class StorageGraph:
    """
    Hipergrafo do sistema: servidores são vértices (1..s) e arquivos são hiperarestas

    Subgrafos mantêm a numeração original: `vertex_ids` lista os vértices
    presentes e `edge_ids` o índice original (1..n) de cada hiperaresta.
    """

    s: int
    edges: Tuple[FrozenSet[int], ...]
    vertex_ids: Tuple[int, ...] = ()
    edge_ids: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.s < 1:
            raise GraphError(f"Número de servidores inválido: {self.s}")
        edges = tuple(frozenset(int(v) for v in e) for e in self.edges)
        object.__setattr__(self, "edges", edges)
        if not self.vertex_ids:
            object.__setattr__(self, "vertex_ids", tuple(range(1, self.s + 1)))
        if not self.edge_ids:
            object.__setattr__(self, "edge_ids", tuple(range(1, len(edges) + 1)))
        if len(self.edge_ids) != len(edges):
            raise GraphError("edge_ids e edges com tamanhos diferentes")
        present = set(self.vertex_ids)
        for label, edge in zip(self.edge_ids, edges):
            if len(edge) < 2:
                raise GraphError(f"Hiperaresta {label} tem menos de dois vértices distintos")
            for v in edge:
                if not 1 <= v <= self.s:
                    raise GraphError(f"Vértice {v} da hiperaresta {label} fora de [1, {self.s}]")
                if v not in present:
                    raise GraphError(f"Vértice {v} da hiperaresta {label} fora do subgrafo")

    # Propriedades básicas

    @property
    def n(self) -> int:
        return len(self.edges)

    @property
    def uniformity(self) -> Optional[int]:
        sizes = {len(e) for e in self.edges}
        return sizes.pop() if len(sizes) == 1 else None

    @property
    def is_two_uniform(self) -> bool:
        return all(len(e) == 2 for e in self.edges)

    @property
    def shares_pair(self) -> bool:
        """Verdadeiro se dois servidores armazenam mais de um arquivo em comum"""
        for a, b in itertools.combinations(self.edges, 2):
            if len(a & b) >= 2:
                return True
        return False

    def edge(self, file_index: int) -> FrozenSet[int]:
        return self.edges[self.edge_ids.index(file_index)]

    def gamma(self, vertex: int) -> List[int]:
        """Γ(v): índices dos arquivos incidentes ao vértice"""
        return [label for label, e in zip(self.edge_ids, self.edges) if vertex in e]

    def degrees(self) -> Dict[int, int]:
        return {v: len(self.gamma(v)) for v in self.vertex_ids}

    @property
    def max_degree(self) -> int:
        degrees = self.degrees()
        return max(degrees.values()) if degrees else 0

    @property
    def is_regular(self) -> bool:
        return len(set(self.degrees().values())) <= 1

    def endpoints(self, file_index: int) -> Tuple[int, int]:
        e = self.edge(file_index)
        if len(e) != 2:
            raise GraphError(f"Arquivo {file_index} não está em exatamente dois servidores")
        a, b = sorted(e)
        return a, b

    # Estrutura

    def to_networkx(self) -> nx.MultiGraph:
        """Multigrafo networkx (somente 2-uniforme); chaves das arestas = índices dos arquivos"""
        self._require_two_uniform()
        graph = nx.MultiGraph()
        graph.add_nodes_from(self.vertex_ids)
        for label, e in zip(self.edge_ids, self.edges):
            a, b = sorted(e)
            graph.add_edge(a, b, key=label)
        return graph

    def components(self) -> int:
        hyper = nx.Graph()
        hyper.add_nodes_from(self.vertex_ids)
        for e in self.edges:
            ordered = sorted(e)
            hyper.add_edges_from(zip(ordered, ordered[1:]))
        return nx.number_connected_components(hyper)

    @property
    def is_connected(self) -> bool:
        return self.components() == 1

    def cyclomatic_number(self) -> int:
        """Número de arestas de retorno em qualquer BFS: |E| - |V| + componentes"""
        self._require_two_uniform()
        return self.n - len(self.vertex_ids) + self.components()

    def _require_two_uniform(self):
        if not self.is_two_uniform:
            raise GraphError("Operação definida apenas para grafos 2-uniformes")


def from_edge_list(s: int, edges: Iterable[Iterable[int]]) -> StorageGraph:
    """
    Constrói e valida um grafo de armazenamento

    Args:
        s: Número de servidores
        edges: Hiperarestas como coleções de índices de servidores (base 1)

    Returns:
        StorageGraph: Grafo validado
    """
    graph = StorageGraph(s=s, edges=tuple(frozenset(e) for e in edges))
    if graph.shares_pair:
        logger.warning("Dois servidores compartilham mais de um arquivo; conluio entre eles forma um ciclo")
    return graph


def incidence(g: StorageGraph) -> np.ndarray:
    """Matriz de incidência I(G): linhas na ordem de vertex_ids, colunas na ordem das arestas"""
    row = {v: i for i, v in enumerate(g.vertex_ids)}
    matrix = np.zeros((len(g.vertex_ids), g.n), dtype=np.int64)
    for j, e in enumerate(g.edges):
        for v in e:
            matrix[row[v], j] = 1
    return matrix


def induced(g: StorageGraph, vertices: Iterable[int]) -> StorageGraph:
    """Subgrafo induzido por S: mantém as arestas com todos os extremos em S"""
    subset = frozenset(int(v) for v in vertices)
    unknown = subset - set(g.vertex_ids)
    if unknown:
        raise GraphError(f"Vértices fora do grafo: {sorted(unknown)}")
    kept = [(label, e) for label, e in zip(g.edge_ids, g.edges) if e <= subset]
    return StorageGraph(
        s=g.s,
        edges=tuple(e for _, e in kept),
        vertex_ids=tuple(sorted(subset)),
        edge_ids=tuple(label for label, _ in kept),
    )


def edge_subgraph(g: StorageGraph, file_indices: Iterable[int]) -> StorageGraph:
    """Subgrafo formado pelas arestas indicadas e seus extremos"""
    wanted = set(file_indices)
    kept = [(label, e) for label, e in zip(g.edge_ids, g.edges) if label in wanted]
    vertices = sorted(set().union(*[e for _, e in kept])) if kept else []
    return StorageGraph(
        s=g.s,
        edges=tuple(e for _, e in kept),
        vertex_ids=tuple(vertices),
        edge_ids=tuple(label for label, _ in kept),
    )


def _adjacency(g: StorageGraph) -> Dict[int, List[Tuple[int, int]]]:
    adjacency: Dict[int, List[Tuple[int, int]]] = {v: [] for v in g.vertex_ids}
    for label, e in zip(g.edge_ids, g.edges):
        a, b = sorted(e)
        adjacency[a].append((b, label))
        adjacency[b].append((a, label))
    return adjacency


def cycles(g: StorageGraph, max_len: Optional[int] = None) -> List[Cycle]:
    """
    Enumera todos os ciclos simples de comprimento <= max_len (DFS exaustiva)

    Cada ciclo é reportado uma vez, a menos de rotação e reflexão; arestas
    paralelas formam ciclos de comprimento 2.

    Args:
        g: Grafo 2-uniforme (multigrafos permitidos)
        max_len: Comprimento máximo; None enumera todos

    Returns:
        List[Cycle]: Ciclos ordenados por comprimento
    """
    g._require_two_uniform()
    if len(g.vertex_ids) > MAX_CYCLE_VERTICES:
        logger.warning(
            f"Enumeração de ciclos em {len(g.vertex_ids)} vértices (limite indicado: {MAX_CYCLE_VERTICES})"
        )
    limit = max_len if max_len is not None else len(g.vertex_ids)
    adjacency = _adjacency(g)
    found: Dict[FrozenSet[int], Cycle] = {}

    for start in g.vertex_ids:
        # DFS apenas por vértices maiores que o início, para reduzir duplicatas
        stack = [(start, (start,), ())]
        while stack:
            vertex, path, used = stack.pop()
            for neighbour, label in adjacency[vertex]:
                if label in used:
                    continue
                if neighbour == start and len(used) + 1 >= 2:
                    key = frozenset(used + (label,))
                    if key not in found:
                        found[key] = Cycle(vertices=path, edges=used + (label,))
                    continue
                if neighbour <= start or neighbour in path:
                    continue
                if len(used) + 1 < limit:
                    stack.append((neighbour, path + (neighbour,), used + (label,)))
    result = sorted(found.values(), key=lambda c: (c.length, sorted(c.edges)))
    logger.debug(f"{len(result)} ciclos encontrados (max_len={limit})")
    return result


def _shortest_path_avoiding(adjacency, source: int, target: int, skip_edge: int) -> Optional[int]:
    distance = {source: 0}
    queue = deque([source])
    while queue:
        vertex = queue.popleft()
        for neighbour, label in adjacency[vertex]:
            if label == skip_edge or neighbour in distance:
                continue
            distance[neighbour] = distance[vertex] + 1
            if neighbour == target:
                return distance[neighbour]
            queue.append(neighbour)
    return None


def girth(g: StorageGraph):
    """Comprimento do menor ciclo (2 para arestas paralelas) ou infinito"""
    g._require_two_uniform()
    adjacency = _adjacency(g)
    best = INFINITE_GIRTH
    for label, e in zip(g.edge_ids, g.edges):
        a, b = sorted(e)
        path = _shortest_path_avoiding(adjacency, a, b, label)
        if path is not None:
            best = min(best, path + 1)
    return best


def is_acyclic(g: StorageGraph) -> bool:
    return g.cyclomatic_number() == 0


def edges_on_cycles(g: StorageGraph) -> FrozenSet[int]:
    """Arestas que pertencem a algum ciclo (isto é, que não são pontes)"""
    g._require_two_uniform()
    adjacency = _adjacency(g)
    on_cycle = set()
    for label, e in zip(g.edge_ids, g.edges):
        a, b = sorted(e)
        if _shortest_path_avoiding(adjacency, a, b, label) is not None:
            on_cycle.add(label)
    return frozenset(on_cycle)


# Multigrafo colorido


@dataclass(frozen=True)
class ColoredMultigraph:
    """Ĝ: cada hiperaresta i vira um clique de arestas com a cor i"""

    s: int
    colored_edges: Tuple[Tuple[FrozenSet[int], int], ...]
    colors: Tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.colors:
            object.__setattr__(self, "colors", tuple(sorted({c for _, c in self.colored_edges})))

    @property
    def n(self) -> int:
        return len(self.colors)

    def candidates(self, color: int) -> List[FrozenSet[int]]:
        return [pair for pair, c in self.colored_edges if c == color]

    def as_graph(self) -> StorageGraph:
        """Multigrafo 2-uniforme em que a aresta k é a k-ésima aresta colorida"""
        return StorageGraph(s=self.s, edges=tuple(pair for pair, _ in self.colored_edges))

    def color_of(self, position: int) -> int:
        return self.colored_edges[position - 1][1]


def to_colored(g: StorageGraph) -> ColoredMultigraph:
    """Substitui cada hiperaresta de tamanho k por k(k-1)/2 arestas da sua cor"""
    colored = []
    for label, e in zip(g.edge_ids, g.edges):
        for a, b in itertools.combinations(sorted(e), 2):
            colored.append((frozenset((a, b)), label))
    return ColoredMultigraph(s=g.s, colored_edges=tuple(colored), colors=tuple(g.edge_ids))


def polychromatic_cycle_exists(cm: ColoredMultigraph, vertices: Sequence[int]) -> bool:
    """
    Verifica se o multigrafo colorido induzido por S contém um ciclo com duas ou mais cores

    Arestas paralelas de cores distintas contam como ciclo de comprimento 2.
    """
    subset = frozenset(vertices)
    inside = [(pair, color) for pair, color in cm.colored_edges if pair <= subset]
    if not inside:
        return False
    sub = StorageGraph(
        s=cm.s,
        edges=tuple(pair for pair, _ in inside),
        vertex_ids=tuple(sorted(subset)),
    )
    for cycle in cycles(sub):
        if len({inside[label - 1][1] for label in cycle.edges}) >= 2:
            return True
    return False
