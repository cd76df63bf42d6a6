import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from glx.abvp import Abvp, gamma_norm, graph_abvp
from glx.coupling import star_blueprint, vertex_couple
from glx.errors import BdMapEstimateFails, InputError, ZeroNotSimple
from glx.graph import Graph, complete_graph, cycle_graph, path_graph
from glx.hilbert import GramForm, LinOp, WeightedSpace
from glx.quasi_iso import (IdentificationSet, closeness_report, closeness_sweep,
                           coupled_closeness, delta_bdmaps, delta_forms, identity_ids,
                           quasi_unitary_parts, sampled_defects, smoothing_from_solutions,
                           trivial_limit_ids)


def _with_form(P, M):
    return Abvp(P.space, P.boundary, P.gamma, GramForm(P.space, M), split=P.split)


def _inv_sqrt(G):
    return np.real_if_close(scipy.linalg.fractional_matrix_power(G, -0.5))


def test_identical_problems_have_zero_defects():
    P = graph_abvp(cycle_graph(5), ["0", "2"])
    rep = closeness_report(P, P, identity_ids(P, P))
    assert rep.delta_total < 1e-14


def test_rank_one_form_perturbation():
    P = graph_abvp(cycle_graph(4), ["0"])
    rng = np.random.default_rng(3)
    v = rng.standard_normal(4)
    eps = 1e-3
    Pt = _with_form(P, P.M + eps * np.outer(v, v))
    got = delta_forms(P, Pt, identity_ids(P, Pt))
    # sup |u^H X f| / (|f|_G |u|_Gt) = || Gt^{-1/2} X G^{-1/2} ||_2
    G, Gt = P.form_gram().coeffs.real, Pt.form_gram().coeffs.real
    want = np.linalg.norm(_inv_sqrt(Gt) @ (eps * np.outer(v, v)) @ _inv_sqrt(G), 2)
    assert got == pytest.approx(want, rel=1e-9)


def test_scaled_boundary_map():
    P = graph_abvp(path_graph(3), ["0"])
    eps = 0.01
    Pt = Abvp(P.space, P.boundary, (1 + eps) * P.gamma, P.form, split=None)
    fwd, bwd = delta_bdmaps(P, Pt, identity_ids(P, Pt))
    assert fwd == pytest.approx(eps * gamma_norm(P), rel=1e-10)
    assert bwd == pytest.approx(eps * gamma_norm(Pt) / (1 + eps), rel=1e-10)


def test_scaled_identification():
    P = graph_abvp(path_graph(3), ["0"])
    ids = identity_ids(P, P)
    eps = 0.05
    J = (1 + eps) * ids.J
    scaled = IdentificationSet(J, ids.Jp, J, ids.Jp1, ids.I, ids.Ip)
    parts = quasi_unitary_parts(P, P, scaled)
    assert parts["duality"] == pytest.approx(eps)
    # 1 - Jp J = -eps from the form norm, whose Gram dominates the plain one
    lam_min = scipy.linalg.eigh(P.form_gram().coeffs.real, np.diag(P.W), eigvals_only=True)[0]
    assert parts["1-JpJ"] == pytest.approx(eps / np.sqrt(lam_min), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_sampled_ratios_never_exceed_exact_defects(seed):
    rng = np.random.default_rng(seed)
    P = graph_abvp(cycle_graph(4), ["0", "1"])
    Pt = graph_abvp(path_graph(5), ["0", "4"])

    def op(dom, cod):
        return LinOp(dom, cod, rng.standard_normal((cod.dim, dom.dim)))
    ids = IdentificationSet(op(P.space, Pt.space), op(Pt.space, P.space), op(P.space, Pt.space),
                            op(Pt.space, P.space), op(P.boundary, Pt.boundary),
                            op(Pt.boundary, P.boundary))
    rep = closeness_report(P, Pt, ids)
    exact = dict(rep.qu_parts, forms=rep.delta_forms, bdmap_fwd=rep.delta_bdmap_fwd,
                 bdmap_bwd=rep.delta_bdmap_bwd, bdiso_fwd=rep.delta_bdiso_fwd,
                 bdiso_bwd=rep.delta_bdiso_bwd)
    got = sampled_defects(P, Pt, ids, rng, 50)
    for key, val in got.items():
        assert val <= exact[key] * (1 + 1e-10), key


def test_path_trivial_limit_constants():
    T = trivial_limit_ids(graph_abvp(path_graph(3, ["a", "m", "b"]), ["a"]), a=1.0)
    assert T.lambda1 == pytest.approx(1.0)
    assert T.gamma == pytest.approx(4.0)
    assert np.isinf(T.mu1)
    assert T.delta == pytest.approx(2 * np.sqrt(3))
    ids, delta = T
    assert delta == T.delta and ids is T.ids
    assert T.report.delta_total <= T.delta
    np.testing.assert_allclose(np.sum(T.target.W * np.abs(T.phi0) ** 2), 1.0)


def test_trivial_limit_default_a():
    T = trivial_limit_ids(graph_abvp(cycle_graph(4), ["0"]))
    assert T.a == 1.0
    assert T.delta == pytest.approx(2 * np.sqrt(3))


def test_trivial_limit_errors():
    G = Graph(["a", "b", "c", "d"], [("e", "a", "b"), ("f", "c", "d")])
    with pytest.raises(ZeroNotSimple):
        trivial_limit_ids(graph_abvp(G, ["a"]))
    point = WeightedSpace.unweighted(1)
    P = Abvp(point, point, LinOp.identity(point), GramForm(point, np.zeros((1, 1))))
    with pytest.raises(ZeroNotSimple):
        trivial_limit_ids(P)
    with pytest.raises(InputError):
        trivial_limit_ids(graph_abvp(path_graph(3), ["0"]), a=1.5)
    # a heavy boundary weight breaks |gamma u|^2 <= a h(u) + (2/a) |u|^2
    sp, bd = WeightedSpace.unweighted(2), WeightedSpace([100.0])
    heavy = Abvp(sp, bd, LinOp(sp, bd, [[1.0, 0.0]]), GramForm(sp, [[1.0, -1.0], [-1.0, 1.0]]))
    with pytest.raises(BdMapEstimateFails):
        trivial_limit_ids(heavy)


def test_smoothing_on_k2_and_c3(rng):
    for G in (complete_graph(2), cycle_graph(3)):
        S = smoothing_from_solutions(star_blueprint(G))
        assert S.certified_residual < 1e-12
        n = S.coupled.decoupled.space.dim
        f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        assert S.constraint_residual(f) < 1e-12
        assert S.C > 0
    # coupled vectors are left alone
    P = vertex_couple(star_blueprint(cycle_graph(3)))
    S = smoothing_from_solutions(star_blueprint(cycle_graph(3)), P)
    f = P.embedding(rng.standard_normal(P.space.dim))
    np.testing.assert_allclose(S.B(f), 0, atol=1e-12)


def test_coupled_closeness_of_identical_blueprints():
    bp = star_blueprint(cycle_graph(3))
    res = coupled_closeness(bp, bp)
    assert res.measured < 1e-12
    assert res.holds
    assert set(res.to_json()) >= {"deltaForms", "deltaQU", "bound", "measured", "perVertex"}


def test_closeness_sweep_is_linear_in_eps():
    rows = closeness_sweep(cycle_graph(3), epsilons=(1e-2, 1e-3))
    (e1, m1, b1), (e2, m2, b2) = rows
    assert m1 <= b1 and m2 <= b2
    assert m1 / m2 == pytest.approx(e1 / e2, rel=0.05)
    # the bound is linear in eps as well
    assert b1 / b2 == pytest.approx(e1 / e2, rel=0.05)
