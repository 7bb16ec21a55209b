# app/services/bounds_service.py
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional

import numpy as np

from app.config import LP_MAX_SERVERS
from app.exceptions import EnumerationBudgetExceeded, GraphError
from app.models.graph import StorageGraph

logger = logging.getLogger(__name__)


@dataclass
class RateBound:
    """Limitante δ/n para sistemas 2-privados de 2-replicação"""

    delta: int
    n: int
    s: int
    bound: Fraction
    regular_bound: Optional[Fraction] = None
    lp_optimum: Optional[Fraction] = None


@dataclass
class DualCertificate:
    eta: List[Fraction]
    objective: Fraction
    lp_optimum: Optional[Fraction] = None


@dataclass
class RateReport:
    graph: str
    s: int
    n: int
    delta: int
    degree_bound: Fraction
    regular_bound: Optional[Fraction]
    lp_optimum: Optional[Fraction]
    lp_bound: Optional[Fraction]
    dual_objective: Fraction
    achieved: Fraction

    @property
    def gap(self) -> Fraction:
        """Razão entre o melhor limitante disponível e a taxa obtida"""
        best = self.lp_bound if self.lp_bound is not None else self.degree_bound
        return best / self.achieved

    def to_dict(self) -> Dict:
        return {
            "graph": self.graph,
            "s": self.s,
            "n": self.n,
            "delta": self.delta,
            "delta_over_n": self.degree_bound,
            "two_over_s": self.regular_bound,
            "lp_optimum": self.lp_optimum,
            "lp_bound": self.lp_bound,
            "dual_objective": self.dual_objective,
            "achieved": self.achieved,
            "gap": self.gap,
        }


def _require_bound_graph(g: StorageGraph) -> None:
    if not g.is_two_uniform:
        raise GraphError("O limitante de taxa vale apenas para sistemas de 2-replicação")
    isolated = [v for v, d in g.degrees().items() if d == 0]
    if isolated:
        raise GraphError(f"Vértices isolados não são permitidos no limitante: {isolated}")


def degree_bound(g: StorageGraph) -> RateBound:
    """
    Taxa de PIR <= δ/n; para grafos regulares o mesmo valor é 2/s

    Args:
        g: Grafo 2-uniforme sem vértices isolados

    Returns:
        RateBound: Limitante exato (Fraction)
    """
    _require_bound_graph(g)
    delta = g.max_degree
    bound = Fraction(delta, g.n)
    regular = Fraction(2, g.s) if g.is_regular else None
    return RateBound(delta=delta, n=g.n, s=g.s, bound=bound, regular_bound=regular)


def lp_optimum(g: StorageGraph) -> Fraction:
    """
    Ótimo exato de min 𝟙·μ sujeito a μ_a + μ_b >= 1 para cada aresta {a, b}

    A cobertura fracionária de vértices admite ótimo semi-inteiro, então basta
    percorrer μ ∈ {0, ½, 1}^s (em escala 2μ ∈ {0, 1, 2}).
    """
    g._require_two_uniform()
    if g.s > LP_MAX_SERVERS:
        raise EnumerationBudgetExceeded(3 ** g.s, 3 ** LP_MAX_SERVERS)
    if g.n == 0:
        return Fraction(0)
    index = np.arange(3 ** g.s, dtype=np.int64)
    scaled = np.stack(np.unravel_index(index, (3,) * g.s), axis=1)
    feasible = np.ones(len(scaled), dtype=bool)
    for e in g.edges:
        a, b = sorted(e)
        feasible &= scaled[:, a - 1] + scaled[:, b - 1] >= 2
    optimum = Fraction(int(scaled[feasible].sum(axis=1).min()), 2)
    logger.debug(f"Ótimo da PL para s={g.s}: {optimum}")
    return optimum


def dual_certificate(g: StorageGraph) -> DualCertificate:
    """η = (1/δ)·𝟙_n é viável para o dual; pela dualidade fraca n/δ <= ótimo da PL"""
    _require_bound_graph(g)
    delta = g.max_degree
    eta = [Fraction(1, delta)] * g.n
    for v, degree in g.degrees().items():
        if Fraction(degree, delta) > 1:
            raise AssertionError(f"Certificado dual inviável no vértice {v}")
    objective = Fraction(g.n, delta)
    optimum = None
    if g.s <= LP_MAX_SERVERS:
        optimum = lp_optimum(g)
        assert objective <= optimum, f"Dualidade fraca violada: {objective} > {optimum}"
    return DualCertificate(eta=eta, objective=objective, lp_optimum=optimum)


def rate_report(g: StorageGraph, name: str = "") -> RateReport:
    bound = degree_bound(g)
    certificate = dual_certificate(g)
    optimum = certificate.lp_optimum
    lp_bound = 1 / optimum if optimum else None
    report = RateReport(
        graph=name,
        s=g.s,
        n=g.n,
        delta=bound.delta,
        degree_bound=bound.bound,
        regular_bound=bound.regular_bound,
        lp_optimum=optimum,
        lp_bound=lp_bound,
        dual_objective=certificate.objective,
        achieved=Fraction(1, g.s),
    )
    logger.info(f"Limitantes de {name or 'grafo'}: δ/n={report.degree_bound}, PL={lp_bound}, obtida={report.achieved}")
    return report
