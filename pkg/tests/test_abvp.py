import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings, strategies as st

from glx.abvp import (Abvp, abvp_from_json, abvp_to_json, dirichlet, dirichlet_spectrum, dtn,
                      dtn_crosscheck, dtn_gram, gamma_prime, graph_abvp, green_residual,
                      krein_residual, neumann, neumann_spectrum, regularity_constant,
                      secular_zeros, solution_operator, spectral_relation_check, trivial_abvp)
from glx.errors import DirichletSpectrumHit, InputError, NotSplit
from glx.graph import cycle_graph, normalized_laplacian, path_graph, star_graph
from glx.hilbert import GramForm, LinOp, WeightedSpace, eigvalsh
from glx.verify import random_graph_abvp


def _k2():
    return graph_abvp(path_graph(2, ["a", "b"]), ["a"])


def _path(boundary):
    return graph_abvp(path_graph(3, ["a", "m", "b"]), boundary)


def _trivial(rng, n=3):
    A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return trivial_abvp(WeightedSpace.unweighted(n), A.conj().T @ A)


def test_k2_neumann_and_dirichlet():
    P = _k2()
    np.testing.assert_allclose(neumann(P).coeffs, [[1, -1], [-1, 1]], atol=1e-15)
    np.testing.assert_allclose(dirichlet(P).op.coeffs, [[1.0]])
    np.testing.assert_allclose(dirichlet_spectrum(_path(["a", "b"])), [1.0])


def test_k2_solution_operator_at_zero_is_constant_extension():
    np.testing.assert_allclose(solution_operator(_k2(), 0.0)([2.0]), [2.0, 2.0], atol=1e-15)


@pytest.mark.parametrize("z", [0.0, -1.0, 0.3 + 0.7j, 2.5])
def test_k2_dtn_closed_form(z):
    # Schur complement of [[1, -1], [-1, 1]] by hand
    want = (1 - z) - 1 / (1 - z)
    for method in ("form", "schur"):
        assert dtn(_k2(), z, method).coeffs[0, 0] == pytest.approx(want, abs=1e-13)


def test_star_dtn_at_zero():
    P = graph_abvp(star_graph(3), ["l0", "l1", "l2"])
    L = dtn(P, 0.0).coeffs
    np.testing.assert_allclose(L, np.eye(3) - np.ones((3, 3)) / 3, atol=1e-14)
    np.testing.assert_allclose(eigvalsh(dtn(P, 0.0)), [0, 1, 1], atol=1e-14)


def test_gamma_prime_examples():
    f = np.array([3.0, 1.0])
    np.testing.assert_allclose(gamma_prime(_k2())(f), [2.0])
    f = np.array([3.0, 1.0, 4.0])
    np.testing.assert_allclose(gamma_prime(_path(["a", "b"]))(f), [2.0, 3.0])


def test_trivial_problem_collapses(rng):
    P = _trivial(rng)
    H = neumann(P).coeffs
    np.testing.assert_allclose(H, P.M, atol=1e-14)
    assert dirichlet_spectrum(P).size == 0
    np.testing.assert_allclose(solution_operator(P, 0.4 + 1j).coeffs, np.eye(3))
    np.testing.assert_allclose(dtn(P, 0.4 + 1j).coeffs, H - (0.4 + 1j) * np.eye(3), atol=1e-14)
    np.testing.assert_allclose(gamma_prime(P).coeffs, H, atol=1e-14)
    assert regularity_constant(P) == pytest.approx(1.0)
    z = -0.5 + 0.5j
    assert krein_residual(P, z) < 1e-14


def test_zero_form_has_zero_neumann_operator():
    P = trivial_abvp(WeightedSpace.unweighted(2))
    np.testing.assert_allclose(neumann(P).coeffs, 0)


def test_green_formula(rng):
    P = _path(["a", "b"])
    for _ in range(20):
        f, g = rng.standard_normal(3) + 1j * rng.standard_normal(3), rng.standard_normal(3)
        assert green_residual(P, f, g) < 1e-12
    T = _trivial(rng)
    f, g = rng.standard_normal(3), rng.standard_normal(3)
    assert green_residual(T, f, g) < 1e-12


def test_krein_on_path():
    assert krein_residual(_path(["a", "b"]), -1.0) < 1e-12


def test_spectral_relation_fixtures():
    assert spectral_relation_check(_k2(), 0.0) == (True, True)
    assert spectral_relation_check(_k2(), 0.5) == (False, False)
    assert dtn(_k2(), 0.5).coeffs[0, 0] == pytest.approx(-1.5)


def test_dirichlet_spectrum_hit_raises():
    with pytest.raises(DirichletSpectrumHit):
        solution_operator(_path(["a", "b"]), 1.0)


def test_regularity_constant_values():
    # S(-1) phi = (phi, phi / 2) on K2: (1 + 1) f(b) = f(a)
    assert regularity_constant(_k2()) == pytest.approx(np.sqrt(5) / 2, rel=1e-12)
    P = graph_abvp(cycle_graph(4), list(cycle_graph(4).vertices))
    assert regularity_constant(P) == pytest.approx(1.0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_regularity_constant_at_least_one(seed):
    assert regularity_constant(random_graph_abvp(np.random.default_rng(seed), 15)) >= 1 - 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_solution_operator_is_a_right_inverse(seed):
    rng = np.random.default_rng(seed)
    P = random_graph_abvp(rng, 20)
    for z in (-1.0, -2.0, 3 + 1j):
        S = solution_operator(P, z).coeffs
        np.testing.assert_allclose(P.gamma.coeffs @ S, np.eye(P.boundary.dim), atol=1e-12)
        # interior rows of (H - z) S vanish
        _, i = P.split
        R = (neumann(P).coeffs - z * np.eye(P.space.dim)) @ S
        np.testing.assert_allclose(R[i], 0, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_dtn_symmetry_and_routes_agree(seed):
    rng = np.random.default_rng(seed)
    P = random_graph_abvp(rng, 20)
    z = complex(rng.uniform(-3, -0.1), rng.uniform(-2, 2))
    L, Lc = dtn(P, z), dtn(P, np.conj(z))
    np.testing.assert_allclose(L.adjoint().coeffs, Lc.coeffs, atol=1e-12 * max(1, np.abs(L.coeffs).max()))
    assert dtn_crosscheck(P, z) < 1e-12
    assert np.all(np.linalg.eigvalsh(dtn_gram(P).coeffs) > 0)


def test_dtn_branches_decrease():
    P = _path(["a"])
    pole = 1 - 1 / np.sqrt(2)      # lowest Dirichlet eigenvalue
    np.testing.assert_allclose(dirichlet_spectrum(P)[0], pole)
    xs = np.linspace(-0.9, pole - 1e-3, 50)
    vals = np.array([eigvalsh(dtn(P, x)) for x in xs])
    assert np.all(np.diff(vals, axis=0) < 0)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_secular_zeros_match_neumann_spectrum(seed):
    P = random_graph_abvp(np.random.default_rng(seed), 15)
    ev = scipy.linalg.eigh(P.M.real, np.diag(P.W), eigvals_only=True)
    ds = dirichlet_spectrum(P)
    zeros = np.array([r for r, m in secular_zeros(P) for _ in range(m)])
    for r in zeros:
        assert np.min(np.abs(ev - r)) < 1e-8
    off = [lam for lam in ev if not (ds.size and np.min(np.abs(ds - lam)) <= 1e-6)]
    for lam in off:
        assert np.min(np.abs(zeros - lam)) < 1e-8


def test_secular_zeros_k2():
    zeros = secular_zeros(_k2())
    np.testing.assert_allclose([r for r, _ in zeros], [0.0, 2.0], atol=1e-12)


def test_not_split_errors():
    sp = WeightedSpace.unweighted(2)
    gamma = LinOp(sp, WeightedSpace.unweighted(1), [[1.0, 1.0]])
    P = Abvp(sp, gamma.codomain, gamma, GramForm(sp, np.eye(2)))
    with pytest.raises(NotSplit):
        gamma_prime(P)
    with pytest.raises(NotSplit):
        secular_zeros(P)
    # the form route works without a split
    assert np.isfinite(dtn(P, -1.0).coeffs).all()


def test_json_round_trip_and_errors():
    P = graph_abvp(cycle_graph(4), ["0", "2"])
    Q = abvp_from_json(abvp_to_json(P))
    np.testing.assert_allclose(Q.M, P.M)
    np.testing.assert_allclose(Q.gamma.coeffs, P.gamma.coeffs)
    np.testing.assert_allclose(neumann_spectrum(Q), neumann_spectrum(P), atol=1e-14)
    with pytest.raises(InputError):
        abvp_from_json({"weights": [1.0]})


def test_neumann_matches_laplacian():
    G = cycle_graph(5)
    np.testing.assert_allclose(neumann(graph_abvp(G, ["0"])).coeffs,
                               normalized_laplacian(G).coeffs, atol=1e-14)
