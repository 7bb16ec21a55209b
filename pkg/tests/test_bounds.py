# tests/test_bounds.py
from fractions import Fraction

import pytest

from app.data.reference_systems import complete, complete_bipartite, cycle_graph, path_graph, petersen, star
from app.exceptions import EnumerationBudgetExceeded, GraphError
from app.models.graph import from_edge_list
from app.services.bounds_service import degree_bound, dual_certificate, lp_optimum, rate_report


def test_petersen_report(petersen_graph):
    report = rate_report(petersen_graph, name="petersen")
    assert report.degree_bound == Fraction(1, 5)
    assert report.regular_bound == Fraction(1, 5)
    assert report.lp_optimum == 5
    assert report.lp_bound == Fraction(1, 5)
    assert report.achieved == Fraction(1, 10)
    assert report.gap == 2
    assert report.to_dict()["delta"] == 3


def test_small_graphs(triangle, edge):
    assert degree_bound(triangle).bound == Fraction(2, 3)
    assert lp_optimum(triangle) == Fraction(3, 2)
    assert degree_bound(complete_bipartite(4, 4)).bound == Fraction(1, 4)
    assert lp_optimum(complete_bipartite(4, 4)) == 4
    assert degree_bound(edge).bound == 1
    assert lp_optimum(edge) == 1


def test_star_is_tight():
    g = star(3)
    certificate = dual_certificate(g)
    assert certificate.objective == 1
    assert certificate.lp_optimum == 1
    assert degree_bound(g).bound == 1
    assert degree_bound(g).regular_bound is None
    assert certificate.eta == [Fraction(1, 3)] * 3


@pytest.mark.parametrize(
    "g",
    [cycle_graph(c) for c in range(3, 11)] + [petersen(), complete(4), complete_bipartite(3, 3), complete_bipartite(4, 4)],
)
def test_regular_graphs_have_half_cover(g):
    assert g.is_regular
    assert lp_optimum(g) == Fraction(g.s, 2)
    assert degree_bound(g).bound == degree_bound(g).regular_bound == Fraction(2, g.s)


def test_weak_duality_on_paths():
    for c in range(2, 9):
        certificate = dual_certificate(path_graph(c))
        assert certificate.objective <= certificate.lp_optimum


def test_rejects_isolated_vertices_and_hyperedges():
    with pytest.raises(GraphError):
        degree_bound(from_edge_list(3, [{1, 2}]))
    with pytest.raises(GraphError):
        degree_bound(from_edge_list(3, [{1, 2, 3}]))


def test_lp_refuses_large_graphs():
    with pytest.raises(EnumerationBudgetExceeded):
        lp_optimum(cycle_graph(13))
    report = rate_report(cycle_graph(13))
    assert report.lp_optimum is None and report.lp_bound is None
    assert report.gap == Fraction(2, 13) / Fraction(1, 13)
