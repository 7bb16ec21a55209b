# app/protocols/reduction.py
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterator, List, Optional, Sequence

import networkx as nx
import numpy as np

from app.exceptions import ProtocolError
from app.models.field import Field
from app.models.graph import ColoredMultigraph, StorageGraph, girth, to_colored
from app.models.storage import Dataset, disperse
from app.protocols.base import BaseProtocol, QueryPlan, RoundAnswers
from app.protocols.replication import ReplicationProtocol

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ChoiceFunction:
    """c: cor i -> uma aresta {a, b} de cor i em Ĝ"""

    mapping: Dict[int, FrozenSet[int]]

    def __getitem__(self, color: int) -> FrozenSet[int]:
        return self.mapping[color]

    @property
    def colors(self) -> List[int]:
        return sorted(self.mapping)

    def validate(self, cm: ColoredMultigraph) -> None:
        if sorted(self.mapping) != sorted(cm.colors):
            raise ProtocolError("A função de escolha deve cobrir exatamente as cores de Ĝ")
        for color, pair in self.mapping.items():
            if pair not in cm.candidates(color):
                raise ProtocolError(f"A aresta {sorted(pair)} não tem a cor {color}")


def pruned_graph(cm: ColoredMultigraph, c: ChoiceFunction) -> StorageGraph:
    """Ĝ_c: mantém apenas as arestas c(i), rotuladas pela cor i"""
    c.validate(cm)
    colors = c.colors
    return StorageGraph(s=cm.s, edges=tuple(c[color] for color in colors), edge_ids=tuple(colors))


def random_choice(cm: ColoredMultigraph, rng: np.random.Generator) -> ChoiceFunction:
    mapping = {}
    for color in cm.colors:
        options = cm.candidates(color)
        if not options:
            raise ProtocolError(f"A cor {color} não tem arestas")
        mapping[color] = options[int(rng.integers(len(options)))]
    return ChoiceFunction(mapping)


def enumerate_choices(cm: ColoredMultigraph) -> Iterator[ChoiceFunction]:
    """Todas as funções de escolha, em ordem lexicográfica das candidatas"""
    colors = list(cm.colors)
    for picks in itertools.product(*(cm.candidates(color) for color in colors)):
        yield ChoiceFunction(dict(zip(colors, picks)))


def _within_distance(adjacency: Dict[int, Dict[int, int]], source: int, target: int, limit: int) -> bool:
    """Verdadeiro se existe caminho de source a target com no máximo limit arestas"""
    if limit < 1:
        return False
    distance = {source: 0}
    queue = deque([source])
    while queue:
        vertex = queue.popleft()
        if distance[vertex] == limit:
            continue
        for neighbour in adjacency.get(vertex, {}):
            if neighbour == target:
                return True
            if neighbour not in distance:
                distance[neighbour] = distance[vertex] + 1
                queue.append(neighbour)
    return False


def find_choice_no_short_cycles(cm: ColoredMultigraph, g: int) -> Optional[ChoiceFunction]:
    """
    Busca exaustiva (backtracking) por c tal que Ĝ_c não tem ciclo de comprimento <= g

    Adicionar {a, b} fecha um ciclo de comprimento d+1, onde d é a distância atual
    entre a e b; a aresta é rejeitada quando d <= g-1.

    Args:
        cm: Multigrafo colorido
        g: Comprimento máximo de ciclo proibido

    Returns:
        Optional[ChoiceFunction]: Uma escolha viável, ou None se não existir
    """
    options = {color: list(dict.fromkeys(cm.candidates(color))) for color in cm.colors}
    if any(not pairs for pairs in options.values()):
        return None
    order = sorted(options, key=lambda color: (len(options[color]), color))
    adjacency: Dict[int, Dict[int, int]] = {}
    chosen: Dict[int, FrozenSet[int]] = {}
    explored = 0

    def link(a: int, b: int, delta: int) -> None:
        for x, y in ((a, b), (b, a)):
            row = adjacency.setdefault(x, {})
            row[y] = row.get(y, 0) + delta
            if row[y] == 0:
                del row[y]

    def search(depth: int) -> bool:
        nonlocal explored
        if depth == len(order):
            return True
        color = order[depth]
        for pair in options[color]:
            explored += 1
            a, b = sorted(pair)
            if _within_distance(adjacency, a, b, g - 1):
                continue
            link(a, b, 1)
            chosen[color] = pair
            if search(depth + 1):
                return True
            link(a, b, -1)
            del chosen[color]
        return False

    feasible = search(0)
    logger.debug(f"Backtracking (g={g}): {explored} tentativas, viável={feasible}")
    return ChoiceFunction(dict(chosen)) if feasible else None


def brute_force_choice(cm: ColoredMultigraph, g: int) -> Optional[ChoiceFunction]:
    """Oráculo: primeira escolha em enumerate_choices cujo Ĝ_c tem cintura > g"""
    for choice in enumerate_choices(cm):
        if girth(pruned_graph(cm, choice)) > g:
            return choice
    return None


def matching_choice_g2(cm: ColoredMultigraph) -> Optional[ChoiceFunction]:
    """
    Caso g=2: emparelhamento máximo entre cores e pares distintos de vértices

    A escolha existe se e somente se o emparelhamento satura todas as cores.
    """
    bipartite = nx.Graph()
    color_nodes = [("cor", color) for color in cm.colors]
    bipartite.add_nodes_from(color_nodes, bipartite=0)
    for pair, color in cm.colored_edges:
        bipartite.add_node(("par", pair), bipartite=1)
        bipartite.add_edge(("cor", color), ("par", pair))
    matching = nx.bipartite.hopcroft_karp_matching(bipartite, top_nodes=color_nodes)
    if any(node not in matching for node in color_nodes):
        logger.debug("Emparelhamento não satura todas as cores: inviável")
        return None
    return ChoiceFunction({color: matching[("cor", color)][1] for _, color in color_nodes})


class ReducedProtocol(BaseProtocol):
    """Redução da r-replicação arbitrária ao esquema de 2-replicação sobre Ĝ_c"""

    name = "reduced"

    def __init__(self, graph: StorageGraph, choice: ChoiceFunction, field: Field):
        super().__init__(graph, field)
        self.colored = to_colored(graph)
        self.choice = choice
        self.pruned = pruned_graph(self.colored, choice)
        self.inner = ReplicationProtocol(self.pruned, field)

    def plan_queries(self, phis: Sequence[int], rng: np.random.Generator) -> QueryPlan:
        phis = self.validate_phis(phis)
        return self.inner.plan_queries(phis, rng)

    def reconstruct(self, plan: QueryPlan, answers: List[RoundAnswers]) -> List[np.ndarray]:
        return self.inner.reconstruct(plan, answers)


def reduce_and_retrieve(
    g: StorageGraph,
    c: ChoiceFunction,
    X: Dataset,
    phi: int,
    field: Field,
    rng: np.random.Generator,
) -> np.ndarray:
    """Servidores fora de c(i) não recebem coeficiente para x_i"""
    contents = disperse(g, X)
    return ReducedProtocol(g, c, field).retrieve(contents, [phi], rng).files[0]
