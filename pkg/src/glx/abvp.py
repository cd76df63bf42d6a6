"""Finite-dimensional boundary value problems and their derived operators.

An :class:`Abvp` bundles a Hilbert space ``H`` (which is also the form
domain at finite dimension), a boundary space ``G``, a surjective boundary
map ``gamma: H -> G`` and a non-negative energy form ``h`` on ``H``.

From these we build the Neumann operator (the representative of ``h``), the
Dirichlet operator (``h`` restricted to ``ker gamma``), the Dirichlet
solution operator ``S(z)`` and the Dirichlet-to-Neumann operator
``Lambda(z)``.  When ``gamma`` is a plain coordinate restriction the problem
is *split* and block (Schur complement) formulas are available as well.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DirichletSpectrumHit, InputError, NotSplit, SingularDtN,
                     SpectrumHit)
from .graph import Graph, energy_form, vertex_space
from .hilbert import (GramForm, LinOp, WeightedSpace, adjoint, eigh,
                      orthonormal_null_space, opnorm, plain_gram)

DIRICHLET_GAP = 1e-8


@dataclass(frozen=True)
class DirichletOperator:
    op: LinOp                 # h restricted to ker gamma, as an operator on ker gamma
    embedding: LinOp          # isometric inclusion ker gamma -> H
    spectrum: np.ndarray


class Abvp:
    """Boundary value problem ``(gamma, G, h, H, H)`` at finite dimension.

    ``split`` is an optional pair ``(boundary_idx, interior_idx)`` of
    coordinate index arrays; it is only accepted when ``gamma`` selects the
    boundary coordinates exactly.  ``embedding`` optionally records an
    isometric inclusion of ``H`` into a larger ambient space (used by coupled
    problems, whose form domain is a constraint subspace of a direct sum).
    """

    def __init__(self, space: WeightedSpace, boundary: WeightedSpace, gamma: LinOp,
                 form: GramForm, split=None, label: str = "",
                 embedding: LinOp | None = None):
        if not (gamma.domain.compatible(space) and gamma.codomain.compatible(boundary)):
            raise InputError("boundary map does not act between the given spaces")
        if not form.space.compatible(space):
            raise InputError("energy form lives on a different space")
        if boundary.dim:
            rank = np.linalg.matrix_rank(gamma.coeffs, tol=1e-12 * max(1.0, np.abs(gamma.coeffs).max()))
            if rank < boundary.dim:
                raise InputError("boundary map is not surjective")
        self.space = space
        self.boundary = boundary
        self.gamma = gamma
        self.form = form
        self.label = label
        self.embedding = embedding
        self.split = None
        if split is not None:
            b = np.asarray(split[0], dtype=int)
            i = np.asarray(split[1], dtype=int)
            if sorted(np.concatenate([b, i]).tolist()) != list(range(space.dim)):
                raise InputError("split indices must partition the coordinates")
            sel = np.zeros((boundary.dim, space.dim))
            sel[np.arange(b.size), b] = 1.0
            if b.size != boundary.dim or np.max(np.abs(gamma.coeffs - sel), initial=0.0) > 1e-14:
                raise InputError("split requires gamma to be a coordinate restriction")
            self.split = (b, i)
        self._cache: dict = {}

    # ---- basic matrices
    @property
    def M(self) -> np.ndarray:
        return self.form.coeffs

    @property
    def W(self) -> np.ndarray:
        return self.space.weights

    @property
    def is_split(self) -> bool:
        return self.split is not None

    def form_gram(self) -> GramForm:
        """Gram of the form-domain norm ``h(f) + ||f||^2``."""
        return GramForm(self.space, self.M + np.diag(self.W))

    def form_norm(self, f) -> float:
        f = np.asarray(f)
        return float(np.sqrt(max(self.form_gram()(f).real, 0.0)))

    def _cached(self, key, fn):
        if key not in self._cache:
            self._cache[key] = fn()
        return self._cache[key]

    def __repr__(self) -> str:
        return (f"Abvp({self.label!r}, dim H={self.space.dim}, dim G={self.boundary.dim}, "
                f"split={self.is_split})")


# ------------------------------------------------------------ constructors

def graph_abvp(G: Graph, boundary) -> Abvp:
    """Discrete-graph problem on l2(V, deg) with gamma the restriction to ``boundary``."""
    boundary = list(boundary)
    if not boundary:
        raise InputError("boundary vertex set must be non-empty")
    H = vertex_space(G)
    bidx = np.array([G.vindex[v] for v in boundary], dtype=int)
    bset = set(boundary)
    iidx = np.array([G.vindex[v] for v in G.vertices if v not in bset], dtype=int)
    Gs = WeightedSpace(H.weights[bidx], "boundary vertices")
    sel = np.zeros((len(bidx), H.dim))
    sel[np.arange(len(bidx)), bidx] = 1.0
    return Abvp(H, Gs, LinOp(H, Gs, sel), energy_form(G), split=(bidx, iidx),
                label="graph")


def trivial_abvp(space: WeightedSpace, form_coeffs=None, label: str = "trivial") -> Abvp:
    """Problem with ``gamma = id``; the form defaults to zero."""
    M = np.zeros((space.dim, space.dim)) if form_coeffs is None else form_coeffs
    return Abvp(space, space, LinOp.identity(space), GramForm(space, M),
                split=(np.arange(space.dim), np.zeros(0, int)), label=label)


# ------------------------------------------------------------ derived objects

def neumann(P: Abvp) -> LinOp:
    """Representative ``T`` of ``h``: ``<T f, g> = h(f, g)``."""
    return P._cached("neumann", lambda: LinOp(P.space, P.space, P.M / P.W[:, None]))


def neumann_spectrum(P: Abvp) -> np.ndarray:
    return P._cached("neumann_spec", lambda: eigh(neumann(P))[0])


def kernel_embedding(P: Abvp) -> LinOp:
    """Isometric inclusion of ``ker gamma`` into ``H``.

    For split problems the kernel keeps the interior coordinates and
    weights; otherwise an orthonormal basis is used.
    """
    def build():
        if P.is_split:
            _, iidx = P.split
            K = WeightedSpace(P.W[iidx], "ker gamma")
            E = np.zeros((P.space.dim, iidx.size))
            E[iidx, np.arange(iidx.size)] = 1.0
            return LinOp(K, P.space, E)
        Q = orthonormal_null_space(P.gamma.coeffs, P.W)
        return LinOp(WeightedSpace.unweighted(Q.shape[1], "ker gamma"), P.space, Q)
    return P._cached("kernel", build)


def dirichlet(P: Abvp) -> DirichletOperator:
    """Operator of ``h`` restricted to ``ker gamma`` (empty when the kernel is trivial)."""
    def build():
        E = kernel_embedding(P)
        K = E.domain
        restricted = E.coeffs.conj().T @ P.M @ E.coeffs
        op = LinOp(K, K, restricted / K.weights[:, None])
        spec = eigh(op)[0] if K.dim else np.zeros(0)
        return DirichletOperator(op, E, spec)
    return P._cached("dirichlet", build)


def dirichlet_spectrum(P: Abvp) -> np.ndarray:
    return dirichlet(P).spectrum


def _check_off_dirichlet(P: Abvp, z) -> None:
    spec = dirichlet_spectrum(P)
    if spec.size and np.min(np.abs(spec - z)) <= DIRICHLET_GAP:
        raise DirichletSpectrumHit(f"z = {z} is within {DIRICHLET_GAP} of the Dirichlet spectrum")


def _right_inverse(P: Abvp) -> np.ndarray:
    """Minimal-norm right inverse of gamma (in H coordinates)."""
    def build():
        G = P.gamma.coeffs
        Winv = 1.0 / P.W
        return (Winv[:, None] * G.conj().T) @ np.linalg.inv((G * Winv[None, :]) @ G.conj().T)
    return P._cached("rinv", build)


def solution_operator(P: Abvp, z) -> LinOp:
    """Dirichlet solution operator: ``gamma S(z) phi = phi`` and ``S(z) phi`` is z-harmonic."""
    _check_off_dirichlet(P, z)
    M, W = P.M, P.W
    n, m = P.space.dim, P.boundary.dim
    if P.is_split:
        b, i = P.split
        S = np.zeros((n, m), dtype=complex)
        S[b, np.arange(m)] = 1.0
        if i.size:
            Dz = M[np.ix_(i, i)] - z * np.diag(W[i])
            S[i, :] = -np.linalg.solve(Dz, M[np.ix_(i, b)])
        return LinOp(P.boundary, P.space, S)
    R = _right_inverse(P)
    K = kernel_embedding(P).coeffs
    A = M - z * np.diag(W)
    S = R.astype(complex)
    if K.shape[1]:
        c = -np.linalg.solve(K.conj().T @ A @ K, K.conj().T @ A @ R)
        S = R + K @ c
    return LinOp(P.boundary, P.space, S)


def dtn_form_matrix(P: Abvp, z) -> np.ndarray:
    """Coefficient matrix of the sesquilinear form ``l_z(phi, psi) = (h - z)(S(z) phi, S(-1) psi)``."""
    Sz = solution_operator(P, z).coeffs
    S1 = P._cached("S-1", lambda: solution_operator(P, -1.0).coeffs)
    return S1.conj().T @ (P.M - z * np.diag(P.W)) @ Sz


def dtn_schur(P: Abvp, z) -> LinOp:
    """Schur complement ``(A - z) - B (D - z)^{-1} B*`` of the Neumann operator's blocks."""
    if not P.is_split:
        raise NotSplit("Schur complement formula needs a split problem")
    _check_off_dirichlet(P, z)
    b, i = P.split
    H = neumann(P).coeffs
    Gb = WeightedSpace(P.W[b], "boundary coordinates")
    K = WeightedSpace(P.W[i], "ker gamma")
    A = H[np.ix_(b, b)]
    schur = A - z * np.eye(b.size)
    if i.size:
        B = LinOp(K, Gb, H[np.ix_(b, i)])
        D = H[np.ix_(i, i)]
        schur = schur - B.coeffs @ np.linalg.solve(D - z * np.eye(i.size), adjoint(B).coeffs)
    # transfer from the weights of the boundary coordinates to the weights of G
    ratio = P.W[b] / P.boundary.weights
    return LinOp(P.boundary, P.boundary, ratio[:, None] * schur)


def dtn(P: Abvp, z, method: str = "form") -> LinOp:
    """Dirichlet-to-Neumann operator ``Lambda(z)`` on ``G``.

    ``method="form"`` represents the form ``l_z``; ``method="schur"`` uses
    the block formula (split problems only).
    """
    if method == "schur":
        return dtn_schur(P, z)
    if method != "form":
        raise ValueError(f"unknown method {method!r}")
    L = dtn_form_matrix(P, z)
    return LinOp(P.boundary, P.boundary, L / P.boundary.weights[:, None])


def dtn_crosscheck(P: Abvp, z) -> float:
    """Relative difference between the form and Schur realizations of ``Lambda(z)``."""
    a = dtn(P, z, "form").coeffs
    b = dtn_schur(P, z).coeffs
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1.0))


def dtn_gram(P: Abvp) -> GramForm:
    """Gram of ``||phi||^2 = l_{-1}(phi)``, the norm of the boundary form domain."""
    return P._cached("l-1", lambda: GramForm(P.boundary, dtn_form_matrix(P, -1.0)))


def gamma_prime(P: Abvp) -> LinOp:
    """Second boundary map: the boundary row block ``(A B)`` of the Neumann operator."""
    if not P.is_split:
        raise NotSplit("second boundary map needs a split problem")
    b, _ = P.split
    H = neumann(P).coeffs
    ratio = P.W[b] / P.boundary.weights
    return LinOp(P.space, P.boundary, ratio[:, None] * H[b, :])


def interior_part(P: Abvp) -> LinOp:
    """Interior row block of the Neumann operator, zero on boundary coordinates."""
    if not P.is_split:
        raise NotSplit("interior block needs a split problem")
    _, i = P.split
    H = neumann(P).coeffs
    out = np.zeros_like(H)
    out[i, :] = H[i, :]
    return LinOp(P.space, P.space, out)


def green_residual(P: Abvp, f, g) -> float:
    """``|h(f,g) - <H^ f, g> - <gamma' f, gamma g>|`` for the abstract Green formula."""
    f, g = np.asarray(f), np.asarray(g)
    lhs = P.form(f, g)
    interior = P.space.inner(interior_part(P)(f), g)
    bterm = P.boundary.inner(gamma_prime(P)(f), P.gamma(g))
    return float(abs(lhs - interior - bterm))


def krein_sides(P: Abvp, z):
    """Both sides of the resolvent formula as matrices on ``H``."""
    if not P.is_split:
        raise NotSplit("resolvent formula check needs a split problem")
    spec = np.concatenate([dirichlet_spectrum(P), neumann_spectrum(P)])
    if spec.size and np.min(np.abs(spec - z)) <= DIRICHLET_GAP:
        raise SpectrumHit(f"z = {z} is within {DIRICHLET_GAP} of the Dirichlet or Neumann spectrum")
    n = P.space.dim
    lhs = np.linalg.inv(neumann(P).coeffs - z * np.eye(n))
    D = dirichlet(P)
    E = D.embedding
    rhs = np.zeros((n, n), dtype=complex)
    if E.domain.dim:
        Rd = np.linalg.inv(D.op.coeffs - z * np.eye(E.domain.dim))
        rhs += E.coeffs @ Rd @ adjoint(E).coeffs
    Lz = dtn(P, z).coeffs
    if np.linalg.cond(Lz) > 1e12:
        raise SingularDtN(f"Lambda({z}) is numerically singular")
    Sz = solution_operator(P, z)
    Szb_adj = adjoint(solution_operator(P, np.conj(z)))
    rhs += Sz.coeffs @ np.linalg.solve(Lz, Szb_adj.coeffs)
    return lhs, rhs


def krein_residual(P: Abvp, z) -> float:
    """Operator-norm difference of the two sides of the resolvent formula, relative to ``||(H-z)^{-1}||``."""
    lhs, rhs = krein_sides(P, z)
    H = P.space
    diff = opnorm(LinOp(H, H, lhs - rhs))
    return diff / opnorm(LinOp(H, H, lhs))


def spectral_relation_check(P: Abvp, lam: float, tol: float = 1e-8) -> tuple[bool, bool]:
    """``(lam in spec H^Neu, 0 in spec Lambda(lam))``, each decided within ``tol``."""
    _check_off_dirichlet(P, lam)
    in_neumann = bool(np.min(np.abs(neumann_spectrum(P) - lam)) < tol)
    ev = eigh(dtn(P, lam))[0]
    in_dtn = bool(np.min(np.abs(ev)) < tol) if ev.size else False
    return in_neumann, in_dtn


def _dtn_pole_expansion(P: Abvp):
    """``(A, C, d)`` with the symmetrized DtN ``A - lam - C diag(1/(d - lam)) C^H``.

    The symmetrized matrix is congruent to the DtN form matrix, so both are
    singular at the same ``lam``; its eigenvalues decrease in ``lam``.
    """
    if not P.is_split:
        raise NotSplit("pole expansion needs a split problem")

    def build():
        b, i = P.split
        sw = np.sqrt(P.W)
        S = P.M / sw[:, None] / sw[None, :]
        S = 0.5 * (S + S.conj().T)
        d, U = np.linalg.eigh(S[np.ix_(i, i)]) if i.size else (np.zeros(0), np.zeros((0, 0)))
        return S[np.ix_(b, b)], S[np.ix_(b, i)] @ U, d
    return P._cached("poles", build)


def secular_zeros(P: Abvp, lo: float | None = None, hi: float | None = None,
                  gap: float = 1e-7) -> list[tuple[float, int]]:
    """Real zeros of ``det Lambda(lam)`` in ``[lo, hi]`` with multiplicities.

    Between consecutive Dirichlet eigenvalues every sorted eigenvalue branch
    of the symmetrized DtN is continuous and decreasing, so each branch has
    at most one sign change there; it is bracketed and refined by ``brentq``.
    Zeros closer than ``gap`` (relative) to a Dirichlet eigenvalue are not
    searched for.
    """
    from scipy.optimize import brentq

    A, C, d = _dtn_pole_expansion(P)
    m = A.shape[0]
    if m == 0:
        return []
    lo = -1.0 if lo is None else lo
    hi = np.linalg.norm(P.M / P.W[:, None]) + 1.0 if hi is None else hi

    def branches(lam):
        return np.linalg.eigvalsh(A - lam * np.eye(m) - (C / (d - lam)[None, :]) @ C.conj().T)

    # numerically coincident Dirichlet eigenvalues form one excluded cluster
    spans = []
    for x in np.sort(d):
        pad = gap * max(1.0, abs(x))
        if spans and x - pad <= spans[-1][1]:
            spans[-1][1] = x + pad
        else:
            spans.append([x - pad, x + pad])
    edges = [lo] + [t for s in spans if s[1] > lo and s[0] < hi for t in s] + [hi]
    roots = []
    for a, b in zip(edges[0::2], edges[1::2]):
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        fa, fb = branches(a), branches(b)
        for j in range(m):
            if fa[j] == 0.0:
                roots.append(a)
            elif fa[j] > 0.0 > fb[j]:
                roots.append(brentq(lambda t: branches(t)[j], a, b, xtol=1e-14, rtol=1e-15))
        if b == hi:
            roots.extend([b] * int(np.sum(fb == 0.0)))
    roots.sort()
    out: list[tuple[float, int]] = []
    for r in roots:
        if out and abs(r - out[-1][0]) <= 1e-10 * max(1.0, abs(r)):
            out[-1] = (out[-1][0], out[-1][1] + 1)
        else:
            out.append((float(r), 1))
    return out


def regularity_constant(P: Abvp) -> float:
    """Norm of ``S(-1)`` from the plain boundary norm to the plain Hilbert norm."""
    return opnorm(solution_operator(P, -1.0))


def gamma_norm(P: Abvp) -> float:
    """Norm of gamma from the form-domain norm to the boundary norm."""
    return opnorm(P.gamma, P.form_gram(), plain_gram(P.boundary))


# ------------------------------------------------------------ serialization

def _cmat(a) -> dict:
    a = np.asarray(a, dtype=complex)
    return {"re": a.real.tolist(), "im": a.imag.tolist()}


def _from_cmat(obj, field: str) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        return re + 1j * im
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"ABVP JSON: invalid matrix in field '{field}'") from exc


def abvp_to_json(P: Abvp) -> dict:
    out = {"space_weights": P.space.weights.tolist(),
           "boundary_weights": P.boundary.weights.tolist(),
           "gamma": _cmat(P.gamma.coeffs),
           "form": _cmat(P.M)}
    if P.is_split:
        out["split"] = {"boundary": P.split[0].tolist(), "interior": P.split[1].tolist()}
    return out


def abvp_from_json(obj) -> Abvp:
    for key in ("space_weights", "boundary_weights", "gamma", "form"):
        if key not in obj:
            raise InputError(f"ABVP JSON: missing field '{key}'")
    H = WeightedSpace(obj["space_weights"], "H")
    G = WeightedSpace(obj["boundary_weights"], "G")
    split = None
    if "split" in obj:
        split = (obj["split"]["boundary"], obj["split"]["interior"])
    return Abvp(H, G, LinOp(H, G, _from_cmat(obj["gamma"], "gamma")),
                GramForm(H, _from_cmat(obj["form"], "form")), split=split)
