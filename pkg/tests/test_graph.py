import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glx.errors import InputError, InvalidGraph
from glx.graph import (Graph, complete_graph, connected_components, cycle_graph, energy,
                       energy_form, glue, graph_from_json, graph_to_json, is_connected,
                       is_regular, line_graph, normalized_laplacian, path_graph, petersen_graph,
                       random_connected_graph, star_components, star_graph, subdivision,
                       subdivision_embedding, validate)
from glx.hilbert import eigvalsh


def _spectrum(G):
    return np.sort(eigvalsh(normalized_laplacian(G)))


def test_degrees_and_handshake():
    G = star_graph(3)
    assert G.degree("c") == 3
    assert sorted(G.degrees().tolist()) == [1, 1, 1, 3]
    rep = validate(G)
    assert rep["sum_deg"] == rep["two_E"] == 6


def test_invalid_graphs():
    with pytest.raises(InvalidGraph):
        Graph(["a"], [("e", "a", "a")])
    with pytest.raises(InvalidGraph):
        Graph(["a", "b"], [("e", "a", "c")])
    with pytest.raises(InvalidGraph):
        Graph(["a", "a"], [])
    with pytest.raises(InvalidGraph):
        Graph(["a", "b"], [("e", "a", "b"), ("e", "b", "a")])


def test_multi_edges_are_allowed():
    G = Graph(["a", "b"], [("e", "a", "b"), ("f", "a", "b")])
    assert G.degree("a") == 2
    np.testing.assert_allclose(_spectrum(G), [0.0, 2.0], atol=1e-14)


def test_laplacian_examples():
    np.testing.assert_allclose(normalized_laplacian(complete_graph(2)).coeffs,
                               [[1, -1], [-1, 1]], atol=1e-15)
    np.testing.assert_allclose(_spectrum(cycle_graph(4)), [0, 1, 1, 2], atol=1e-14)
    np.testing.assert_allclose(_spectrum(path_graph(3)), [0, 1, 2], atol=1e-14)


def test_cycle_spectrum_oracle():
    for n in (3, 5, 8):
        want = np.sort(1 - np.cos(2 * np.pi * np.arange(n) / n))
        np.testing.assert_allclose(_spectrum(cycle_graph(n)), want, atol=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 15), st.integers(0, 10), st.integers(0, 2**32 - 1))
def test_random_graph_invariants(n, extra, seed):
    rng = np.random.default_rng(seed)
    G = random_connected_graph(rng, n, extra)
    ev = _spectrum(G)
    assert ev[0] >= -1e-12 and ev[-1] <= 2 + 1e-12
    assert abs(ev[0]) < 1e-12 and ev[1] > 1e-10      # connected: 0 is simple
    L = normalized_laplacian(G)
    np.testing.assert_allclose(L(np.ones(n)), 0, atol=1e-13)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    h = energy(G, f)
    assert energy_form(G)(f).real == pytest.approx(h, rel=1e-12, abs=1e-12)
    assert L.domain.inner(L(f), f).real == pytest.approx(h, rel=1e-12, abs=1e-12)
    SG = subdivision(G)
    assert SG.n_vertices == G.n_vertices + G.n_edges
    assert SG.n_edges == 2 * G.n_edges


def test_disconnected_graph_has_double_zero():
    G = Graph(["a", "b", "c", "d"], [("e", "a", "b"), ("f", "c", "d")])
    assert not is_connected(G)
    assert len(connected_components(G)) == 2
    assert np.sum(np.abs(_spectrum(G)) < 1e-12) == 2


def test_subdivision_energy_halves():
    rng = np.random.default_rng(2)
    for G in (complete_graph(2), cycle_graph(5), petersen_graph()):
        f = rng.standard_normal(G.n_vertices) + 1j * rng.standard_normal(G.n_vertices)
        # each edge contributes 2 |d/2|^2 = |d|^2 / 2 after inserting the midpoint average
        assert energy(G, f) == pytest.approx(2 * energy(subdivision(G), subdivision_embedding(G, f)),
                                             rel=1e-12)


def test_line_graph_of_cycle_is_cycle():
    for n in (3, 4, 6):
        LG = line_graph(cycle_graph(n))
        assert is_regular(LG) == 2
        np.testing.assert_allclose(_spectrum(LG), _spectrum(cycle_graph(n)), atol=1e-13)


def test_line_graph_degrees():
    LG = line_graph(complete_graph(4))
    assert is_regular(LG) == 4
    assert LG.n_vertices == 6


def test_star_components_glue_to_subdivision():
    for G in (complete_graph(2), cycle_graph(3), star_graph(3)):
        stars = star_components(G)
        assert len(stars) == G.n_vertices
        glued = glue(sc.graph for sc in stars)
        SG = subdivision(G)
        assert sorted(glued.degrees().tolist()) == sorted(SG.degrees().tolist())
        np.testing.assert_allclose(_spectrum(glued), _spectrum(SG), atol=1e-13)
    K2 = star_components(complete_graph(2))
    assert all(sc.graph.n_edges == 1 and len(sc.boundary) == 1 for sc in K2)
    S3 = star_components(star_graph(3))
    assert sorted(sc.graph.n_edges for sc in S3) == [1, 1, 1, 3]


def test_json_round_trip():
    G = cycle_graph(4)
    H, b = graph_from_json(graph_to_json(G, ["0", "2"]))
    assert H.vertices == G.vertices and H.edges == G.edges
    assert b == ["0", "2"]


def test_json_errors_name_the_field():
    with pytest.raises(InputError, match="vertices"):
        graph_from_json({"edges": []})
    with pytest.raises(InputError, match="dst"):
        graph_from_json({"vertices": ["a", "b"], "edges": [{"id": "e", "src": "a"}]})
    with pytest.raises(InputError, match="boundary"):
        graph_from_json({"vertices": ["a"], "edges": [], "boundary": ["z"]})
