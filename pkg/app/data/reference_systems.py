# app/data/reference_systems.py
import itertools
import logging
import re
from typing import List, Tuple

from app.exceptions import GraphError
from app.models.graph import StorageGraph, from_edge_list

logger = logging.getLogger(__name__)

# Hipergrafo 3-uniforme com 8 servidores e 4 arquivos (3^4 = 81 funções de escolha)
TRIPLE_SYSTEM_HYPEREDGES = [
    {2, 3, 6},
    {3, 4, 7},
    {1, 4, 8},
    {1, 2, 5},
]

# Sistema codificado com o código de paridade: s=12, partes L_1, L_2, L_3
EXAMPLE2_PARTITION = [
    [1, 2, 3, 4],
    [5, 6, 7, 8],
    [9, 10, 11, 12],
]

EXAMPLE2_HYPEREDGES = [
    {1, 5, 9}, {2, 5, 10}, {3, 5, 11}, {4, 5, 12},
    {1, 6, 10}, {2, 6, 11}, {3, 6, 12}, {4, 6, 9},
    {1, 7, 11}, {2, 7, 12}, {3, 7, 9}, {4, 7, 10},
    {1, 8, 12}, {2, 8, 9}, {3, 8, 10}, {4, 8, 11},
]

FAMILY_NAMES = [
    "petersen", "complete_bipartite(a,b)", "complete(k)", "cycle(c)", "path(c)",
    "star(k)", "bowtie", "fig1", "example2", "example3(s)",
]

_FAMILY_PATTERN = re.compile(r"^\s*([a-z_0-9]+)\s*(?:[(:]\s*([0-9,\s]*)\)?)?\s*$")


def petersen() -> StorageGraph:
    """Grafo de Petersen: ciclo externo 1..5, pentagrama interno 6..10 e raios i–(i+5)"""
    outer = [{i, i % 5 + 1} for i in range(1, 6)]
    spokes = [{i, i + 5} for i in range(1, 6)]
    inner = [{6 + i, 6 + (i + 2) % 5} for i in range(5)]
    return from_edge_list(10, outer + spokes + inner)


def complete_bipartite(a: int, b: int) -> StorageGraph:
    if a < 1 or b < 1:
        raise GraphError(f"Lados inválidos para o bipartido completo: ({a}, {b})")
    return from_edge_list(a + b, [{i, a + j} for i in range(1, a + 1) for j in range(1, b + 1)])


def complete(k: int) -> StorageGraph:
    if k < 2:
        raise GraphError(f"Grafo completo requer k >= 2 (recebido {k})")
    return from_edge_list(k, [set(p) for p in itertools.combinations(range(1, k + 1), 2)])


def cycle_graph(c: int) -> StorageGraph:
    if c < 3:
        raise GraphError(f"Ciclo requer c >= 3 (recebido {c})")
    return from_edge_list(c, [{i, i % c + 1} for i in range(1, c + 1)])


def path_graph(c: int) -> StorageGraph:
    """Caminho com c vértices e c-1 arestas"""
    if c < 2:
        raise GraphError(f"Caminho requer c >= 2 vértices (recebido {c})")
    return from_edge_list(c, [{i, i + 1} for i in range(1, c)])


def star(k: int) -> StorageGraph:
    """Estrela com centro 1 e k folhas"""
    if k < 1:
        raise GraphError(f"Estrela requer k >= 1 folhas (recebido {k})")
    return from_edge_list(k + 1, [{1, i} for i in range(2, k + 2)])


def bowtie() -> StorageGraph:
    """Dois triângulos, {1,2,3} e {3,4,5}, que compartilham o vértice 3"""
    return from_edge_list(5, [{1, 2}, {1, 3}, {2, 3}, {3, 4}, {3, 5}, {4, 5}])


def triple_system() -> StorageGraph:
    return from_edge_list(8, TRIPLE_SYSTEM_HYPEREDGES)


def example2() -> StorageGraph:
    return from_edge_list(12, EXAMPLE2_HYPEREDGES)


def example3_partition(s: int) -> List[List[int]]:
    if s < 3 or s % 3:
        raise GraphError(f"s deve ser múltiplo de 3 (recebido {s})")
    m = s // 3
    return [list(range(1, m + 1)), list(range(m + 1, 2 * m + 1)), list(range(2 * m + 1, s + 1))]


def example3(s: int) -> StorageGraph:
    """
    Sistema codificado com n = s²/9 arquivos a partir de emparelhamentos perfeitos disjuntos

    O emparelhamento M_k entre L_2 e L_3 liga o i-ésimo vértice de L_2 ao
    (i+k mod m)-ésimo de L_3; a hiperaresta é {k-ésimo vértice de L_1} ∪ aresta.
    """
    left, middle, right = example3_partition(s)
    m = len(left)
    edges = []
    for k in range(m):
        for i in range(m):
            edges.append({left[k], middle[i], right[(i + k) % m]})
    return from_edge_list(s, edges)


_BUILDERS = {
    "petersen": (petersen, 0),
    "complete_bipartite": (complete_bipartite, 2),
    "complete": (complete, 1),
    "cycle": (cycle_graph, 1),
    "path": (path_graph, 1),
    "star": (star, 1),
    "bowtie": (bowtie, 0),
    "fig1": (triple_system, 0),
    "example2": (example2, 0),
    "example3": (example3, 1),
}


def parse_family(name: str) -> Tuple[str, List[int]]:
    match = _FAMILY_PATTERN.match(str(name).lower())
    if not match:
        raise GraphError(f"Família de grafos não reconhecida: {name!r}")
    key, raw_args = match.group(1), match.group(2)
    args = [int(a) for a in re.split(r"[,\s]+", raw_args.strip())] if raw_args and raw_args.strip() else []
    return key, args


def family(name: str) -> StorageGraph:
    """
    Constrói uma família de grafos pelo nome

    Args:
        name: Ex.: "petersen", "complete_bipartite(4,4)", "cycle:5", "bowtie"

    Returns:
        StorageGraph: Grafo com numeração canônica dos vértices
    """
    key, args = parse_family(name)
    if key not in _BUILDERS:
        raise GraphError(f"Família desconhecida: {key!r}. Disponíveis: {', '.join(FAMILY_NAMES)}")
    builder, arity = _BUILDERS[key]
    if len(args) != arity:
        raise GraphError(f"Família {key!r} espera {arity} parâmetro(s), recebeu {len(args)}")
    graph = builder(*args)
    logger.debug(f"Família {name} construída: s={graph.s}, n={graph.n}")
    return graph


def reference_partition(name: str) -> List[List[int]]:
    """Partição L_1..L_N associada a um layout codificado de referência"""
    key, args = parse_family(name)
    if key == "example2":
        return [list(part) for part in EXAMPLE2_PARTITION]
    if key == "example3" and len(args) == 1:
        return example3_partition(args[0])
    raise GraphError(f"Layout {name!r} não tem partição de referência")
