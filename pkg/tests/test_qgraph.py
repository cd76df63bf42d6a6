import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from glx.errors import DirichletPole, InputError, MeshTooCoarse
from glx.graph import complete_graph, cycle_graph, path_graph, star_graph
from glx.qgraph import (QuantumGraph, averaged_dtn, cfun, dirichlet_spectrum, dispersion,
                        edge_dtn, equilateral_dtn, equilateral_spectrum, fd_oracle,
                        fd_vertex_residual, interval_dtn, interval_dtn_sqrt, iota_dtn,
                        neumann_spectrum, qgraph_from_json, qgraph_to_json, sfun)


@settings(max_examples=100, deadline=None)
@given(st.floats(-50, 50), st.floats(-50, 50))
def test_entire_functions_match_cos_and_sinc(x, y):
    w = complex(x, y)
    r = np.sqrt(w)
    assert abs(cfun(w) - np.cos(r)) <= 1e-12 * max(1.0, abs(np.cos(r)))
    if abs(r) > 1e-3:
        assert abs(sfun(w) - np.sin(r) / r) <= 1e-12 * max(1.0, abs(np.sin(r) / r))


def test_entire_functions_at_zero():
    assert cfun(0.0) == 1.0
    assert sfun(0.0) == 1.0
    assert abs(sfun(1e-8) - (1 - 1e-8 / 6)) < 1e-16


@pytest.mark.parametrize("z", [-3.0, 0.5, 2.0 + 1.0j, 30.0, -0.001 + 0.0j])
@pytest.mark.parametrize("length", [0.5, 1.0, 2.3])
def test_interval_dtn_against_square_root_route(length, z):
    np.testing.assert_allclose(interval_dtn(length, z), interval_dtn_sqrt(length, z), rtol=1e-10)


def test_interval_dtn_at_zero_is_graph_laplacian_over_length():
    np.testing.assert_allclose(interval_dtn(2.0, 0.0), [[0.5, -0.5], [-0.5, 0.5]], atol=1e-15)


def test_dirichlet_pole():
    with pytest.raises(DirichletPole) as err:
        interval_dtn(1.0, np.pi**2)
    assert err.value.n == 1
    with pytest.raises(DirichletPole):
        edge_dtn(1.0, np.diag([0.0, 9.0]), np.pi**2 + 9)


def test_edge_dtn_diagonal_fibre_decouples():
    z = 2.0
    L = edge_dtn(1.0, np.diag([0.0, 3.0]), z)
    np.testing.assert_allclose(L[np.ix_([0, 2], [0, 2])], interval_dtn(1.0, z), atol=1e-14)
    np.testing.assert_allclose(L[np.ix_([1, 3], [1, 3])], interval_dtn(1.0, z - 3.0), atol=1e-14)


def test_single_edge_spectrum():
    rep = neumann_spectrum(QuantumGraph(path_graph(2)), (-1.0, 45.0), 0.05)
    np.testing.assert_allclose(rep.values(), [0.0, np.pi**2, 4 * np.pi**2], atol=1e-6)


def test_star_spectrum_outside_windows():
    # equal-length star with k legs: cos(sqrt(lam)) = 0 or sin(sqrt(lam)) = 0 on the legs
    qg = QuantumGraph(star_graph(3))
    rep = neumann_spectrum(qg, (-0.5, 30.0), 0.05)
    want = np.array([0.0, (np.pi / 2) ** 2, (3 * np.pi / 2) ** 2])
    got = rep.outside_windows()
    np.testing.assert_allclose(np.unique(np.round(got, 8)), want, atol=1e-8)


def test_averaged_and_iota_routes_agree():
    qg = QuantumGraph(complete_graph(4), lengths={"e0_1": 0.7, "e1_3": 1.3})
    for z in (-2.0, 0.5, 3.0 + 0.5j):
        np.testing.assert_allclose(averaged_dtn(qg, z), iota_dtn(qg, z), atol=1e-12)


def test_equilateral_dtn_matches_averaged():
    G = cycle_graph(4)
    K = np.array([[1.0, 0.5], [0.5, 2.0]])
    qg = QuantumGraph(G, fibres={e.id: K for e in G.edges})
    for z in (-1.0, 2.0 + 0.3j):
        np.testing.assert_allclose(equilateral_dtn(G, K, z), averaged_dtn(qg, z), atol=1e-12)


def test_equilateral_c4_closed_form():
    rep = equilateral_spectrum(cycle_graph(4), np.zeros((1, 1)), (-0.5, 25.0), 0.05)
    got = rep.outside_windows()
    np.testing.assert_allclose(got, [0.0, np.pi**2 / 4, np.pi**2 / 4, 9 * np.pi**2 / 4,
                                     9 * np.pi**2 / 4], atol=1e-8)


def test_dirichlet_spectrum_listing():
    qg = QuantumGraph(path_graph(3), lengths={"e0": 1.0, "e1": 0.5})
    np.testing.assert_allclose(dirichlet_spectrum(qg, 45.0), [np.pi**2, 4 * np.pi**2, 4 * np.pi**2])


def test_fd_oracle_converges():
    qg = QuantumGraph(cycle_graph(3))
    exact = (2 * np.pi / 3) ** 2      # cos k = 1 - 3/2 on C3
    errs = [abs(fd_oracle(qg, h, 3).values()[1] - exact) for h in (1 / 50, 1 / 100)]
    assert errs[1] < errs[0] / 3.5
    assert fd_vertex_residual(qg, 1 / 50) > fd_vertex_residual(qg, 1 / 100)


def test_fd_mesh_too_coarse():
    qg = QuantumGraph(path_graph(2), lengths={"e0": 0.5})
    with pytest.raises(MeshTooCoarse):
        fd_oracle(qg, 0.1, 2)


def test_dispersion_rows():
    qg = QuantumGraph(cycle_graph(4))
    rows = dispersion(qg, (0.0, 10.0), 0.5)
    lams = sorted({r[0] for r in rows})
    branches = {r[1] for r in rows}
    assert len(lams) == 21 and branches == {0, 1, 2, 3}
    assert len(rows) == 21 * 4
    # pi^2 is not on the grid, so every value is finite
    assert all(np.isfinite(r[2]) for r in rows)
    pole_rows = dispersion(QuantumGraph(path_graph(2)), (np.pi**2, np.pi**2 + 1), 1.0)
    assert np.isnan(pole_rows[0][2])


def test_qgraph_json_round_trip():
    G = cycle_graph(3)
    K = np.array([[0.0, 1j], [-1j, 2.0]])
    qg = QuantumGraph(G, lengths={"e0": 0.5}, fibres={e.id: K for e in G.edges})
    back = qgraph_from_json(qgraph_to_json(qg))
    assert back.lengths == qg.lengths
    for e in G.edges:
        np.testing.assert_allclose(back.fibres[e.id].K, K)
    np.testing.assert_allclose(averaged_dtn(back, -1.0), averaged_dtn(qg, -1.0))


def test_qgraph_json_errors():
    with pytest.raises(InputError, match="graph"):
        qgraph_from_json({})
    g = {"vertices": ["a", "b"], "edges": [{"id": "e", "src": "a", "dst": "b"}]}
    with pytest.raises(InputError, match="length"):
        qgraph_from_json({"graph": g, "edges": [{"id": "e", "length": "x"}]})
    with pytest.raises(InputError):
        qgraph_from_json({"graph": g, "edges": [{"id": "e", "length": -1.0}]})


def test_standard_vertices_need_equal_fibres():
    G = path_graph(3)
    with pytest.raises(InputError):
        QuantumGraph(G, fibres={"e0": np.zeros((1, 1)), "e1": np.zeros((2, 2))})
