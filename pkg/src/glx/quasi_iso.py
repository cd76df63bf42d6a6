"""Distances between boundary value problems acting in different spaces.

Two problems ``P`` and ``Pt`` are compared through identification
operators ``J, J', J1, J'1`` between their Hilbert spaces and ``I, I'``
between their boundary spaces.  Every defect below is computed as the
smallest admissible constant, i.e. an operator norm between the relevant
Grams, so it can be plugged back into the defining inequality with
equality.

The module also builds the identifications of a problem against the
one-dimensional trivial problem, smoothing operators for vertex-coupled
problems, and the global identifications of two vertex-coupled problems
built from close vertex pieces.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import block_diag

from .abvp import (Abvp, dtn, dtn_gram, neumann, solution_operator,
                   trivial_abvp)
from .coupling import (CoupledAbvp, VertexCouplingBlueprint, star_blueprint,
                       vertex_couple, vertex_trace_rows)
from .errors import (BdMapEstimateFails, HypothesisFails, InputError, SmallnessFails,
                     ZeroNotSimple)
from .graph import Graph
from .hilbert import (GramForm, LinOp, WeightedSpace, adjoint, eigh, eigvalsh,
                      opnorm, opnorm_matrix, plain_gram)

ZERO_GAP = 1e-10
DEFAULT_A = (1.0, 0.5, 0.1)


@dataclass(frozen=True)
class IdentificationSet:
    """``J: H -> Ht``, ``Jp: Ht -> H``, form-level ``J1``, ``Jp1`` and boundary ``I``, ``Ip``."""
    J: LinOp
    Jp: LinOp
    J1: LinOp
    Jp1: LinOp
    I: LinOp
    Ip: LinOp

    def check(self, P: Abvp, Pt: Abvp) -> None:
        pairs = [("J", self.J, P.space, Pt.space), ("Jp", self.Jp, Pt.space, P.space),
                 ("J1", self.J1, P.space, Pt.space), ("Jp1", self.Jp1, Pt.space, P.space),
                 ("I", self.I, P.boundary, Pt.boundary), ("Ip", self.Ip, Pt.boundary, P.boundary)]
        for name, op, dom, cod in pairs:
            if not (op.domain.compatible(dom) and op.codomain.compatible(cod)):
                raise InputError(f"identification operator {name} acts between the wrong spaces")


def identity_ids(P: Abvp, Pt: Abvp) -> IdentificationSet:
    """All identifications equal to the identity; both problems must share their spaces."""
    if not (P.space.compatible(Pt.space) and P.boundary.compatible(Pt.boundary)):
        raise InputError("identity identifications need equal spaces")
    J = LinOp(P.space, Pt.space, np.eye(P.space.dim))
    Jp = LinOp(Pt.space, P.space, np.eye(P.space.dim))
    I = LinOp(P.boundary, Pt.boundary, np.eye(P.boundary.dim))
    Ip = LinOp(Pt.boundary, P.boundary, np.eye(P.boundary.dim))
    return IdentificationSet(J, Jp, J, Jp, I, Ip)


@dataclass
class ClosenessReport:
    delta_forms: float
    delta_bdmap_fwd: float
    delta_bdmap_bwd: float
    delta_qu: float
    delta_bdiso_fwd: float
    delta_bdiso_bwd: float
    qu_parts: dict = field(default_factory=dict)

    @property
    def delta_total(self) -> float:
        return max(self.delta_forms, self.delta_bdmap_fwd, self.delta_bdmap_bwd,
                   self.delta_qu, self.delta_bdiso_fwd, self.delta_bdiso_bwd)

    @property
    def delta_without_bdiso(self) -> float:
        """Largest defect among forms, boundary maps and the quasi-unitary ones."""
        return max(self.delta_forms, self.delta_bdmap_fwd, self.delta_bdmap_bwd, self.delta_qu)

    def to_json(self) -> dict:
        return {
            "deltaForms": self.delta_forms,
            "deltaBdMapFwd": self.delta_bdmap_fwd,
            "deltaBdMapBwd": self.delta_bdmap_bwd,
            "deltaQU": self.delta_qu,
            "deltaBdIsoFwd": self.delta_bdiso_fwd,
            "deltaBdIsoBwd": self.delta_bdiso_bwd,
            "deltaTotal": self.delta_total,
            "quParts": dict(self.qu_parts),
        }


# ------------------------------------------------------------ single defects

def delta_forms(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> float:
    """Smallest ``d`` with ``|ht(J1 f, u) - h(f, Jp1 u)| <= d ||u||_1 ||f||_1``.

    The pairing is ``u^H X f`` with ``X = Mt J1 - Jp1^H M``; its norm equals
    the operator norm of ``Gt^{-1} X`` between the two form-norm Grams.
    """
    X = Pt.M @ ids.J1.coeffs - ids.Jp1.coeffs.conj().T @ P.M
    G, Gt = P.form_gram().coeffs, Pt.form_gram().coeffs
    return opnorm_matrix(np.linalg.solve(Gt, X), G, Gt)


def delta_bdmaps(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> tuple[float, float]:
    """Norms of ``I gamma - gammat J1`` and ``Ip gammat - gamma Jp1`` from form norms."""
    fwd = ids.I @ P.gamma - Pt.gamma @ ids.J1
    bwd = ids.Ip @ Pt.gamma - P.gamma @ ids.Jp1
    return (opnorm(fwd, P.form_gram(), plain_gram(Pt.boundary)),
            opnorm(bwd, Pt.form_gram(), plain_gram(P.boundary)))


def quasi_unitary_parts(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> dict:
    """The five quasi-unitarity defects, keyed by a short name."""
    H, Ht = P.space, Pt.space
    G, Gt = P.form_gram(), Pt.form_gram()
    return {
        "duality": opnorm(ids.J - adjoint(ids.Jp)),
        "1-JpJ": opnorm(LinOp.identity(H) - ids.Jp @ ids.J, G, plain_gram(H)),
        "1-JJp": opnorm(LinOp.identity(Ht) - ids.J @ ids.Jp, Gt, plain_gram(Ht)),
        "J1-J": opnorm(ids.J1 - ids.J, G, plain_gram(Ht)),
        "Jp1-Jp": opnorm(ids.Jp1 - ids.Jp, Gt, plain_gram(H)),
    }


def delta_quasi_unitary(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> float:
    return max(quasi_unitary_parts(P, Pt, ids).values())


def delta_boundary_iso(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> tuple[float, float]:
    """Norms of ``1 - Ip I`` and ``1 - I Ip`` from the ``l_{-1}`` norms to the plain ones."""
    G, Gt = P.boundary, Pt.boundary
    fwd = LinOp.identity(G) - ids.Ip @ ids.I
    bwd = LinOp.identity(Gt) - ids.I @ ids.Ip
    return (opnorm(fwd, dtn_gram(P), plain_gram(G)),
            opnorm(bwd, dtn_gram(Pt), plain_gram(Gt)))


def closeness_report(P: Abvp, Pt: Abvp, ids: IdentificationSet) -> ClosenessReport:
    ids.check(P, Pt)
    parts = quasi_unitary_parts(P, Pt, ids)
    fwd, bwd = delta_bdmaps(P, Pt, ids)
    ifwd, ibwd = delta_boundary_iso(P, Pt, ids)
    return ClosenessReport(delta_forms(P, Pt, ids), fwd, bwd, max(parts.values()),
                           ifwd, ibwd, parts)


def _crandn(rng, *shape) -> np.ndarray:
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def sampled_defects(P: Abvp, Pt: Abvp, ids: IdentificationSet, rng, count: int = 200) -> dict:
    """Largest observed ratio ``lhs / rhs`` of every defining inequality on random vectors.

    Each ratio is a lower bound for the matching exact defect, so the
    results must never exceed the values of :func:`closeness_report`.
    """
    G, Gt = P.form_gram(), Pt.form_gram()
    L, Lt = dtn_gram(P), dtn_gram(Pt)
    H, Ht, B, Bt = P.space, Pt.space, P.boundary, Pt.boundary
    out = {k: 0.0 for k in ("forms", "bdmap_fwd", "bdmap_bwd", "duality", "1-JpJ",
                            "1-JJp", "J1-J", "Jp1-Jp", "bdiso_fwd", "bdiso_bwd")}

    def ratio(num, den):
        return float(num / den) if den > 0 else (0.0 if num <= 1e-14 else np.inf)

    def upd(key, val):
        out[key] = max(out[key], val)

    for _ in range(count):
        f, u = _crandn(rng, H.dim), _crandn(rng, Ht.dim)
        nf, nu = np.sqrt(G(f).real), np.sqrt(Gt(u).real)
        lhs = Pt.form(ids.J1(f), u) - P.form(f, ids.Jp1(u))
        upd("forms", ratio(abs(lhs), nf * nu))
        upd("bdmap_fwd", ratio(Bt.norm(ids.I(P.gamma(f)) - Pt.gamma(ids.J1(f))), nf))
        upd("bdmap_bwd", ratio(B.norm(ids.Ip(Pt.gamma(u)) - P.gamma(ids.Jp1(u))), nu))
        upd("duality", ratio(abs(Ht.inner(ids.J(f), u) - H.inner(f, ids.Jp(u))),
                             H.norm(f) * Ht.norm(u)))
        upd("1-JpJ", ratio(H.norm(f - ids.Jp(ids.J(f))), nf))
        upd("1-JJp", ratio(Ht.norm(u - ids.J(ids.Jp(u))), nu))
        upd("J1-J", ratio(Ht.norm(ids.J1(f) - ids.J(f)), nf))
        upd("Jp1-Jp", ratio(H.norm(ids.Jp1(u) - ids.Jp(u)), nu))
        if B.dim:
            phi = _crandn(rng, B.dim)
            upd("bdiso_fwd", ratio(B.norm(phi - ids.Ip(ids.I(phi))), np.sqrt(L(phi).real)))
        if Bt.dim:
            psi = _crandn(rng, Bt.dim)
            upd("bdiso_bwd", ratio(Bt.norm(psi - ids.I(ids.Ip(psi))), np.sqrt(Lt(psi).real)))
    return out


# ------------------------------------------------------------ trivial limit

def point_abvp() -> Abvp:
    """The trivial problem ``(id, C, 0, C, C)``."""
    return trivial_abvp(WeightedSpace.unweighted(1, "point"), label="point")


def bd_map_estimate_holds(Pt: Abvp, a: float) -> bool:
    """``||gamma u||^2 <= a h(u) + (2/a) ||u||^2`` for all ``u``, as a semidefiniteness test."""
    Gm = Pt.gamma.coeffs
    Q = a * Pt.M + (2.0 / a) * np.diag(Pt.W) - Gm.conj().T @ (Pt.boundary.weights[:, None] * Gm)
    Q = 0.5 * (Q + Q.conj().T)
    scale = max(np.abs(Q).max(), 1.0)
    return bool(np.linalg.eigvalsh(Q)[0] >= -1e-12 * scale)


@dataclass
class TrivialLimit:
    ids: IdentificationSet
    delta: float
    point: Abvp
    target: Abvp
    a: float
    lambda1: float
    mu1: float
    gamma: float
    phi0: np.ndarray
    report: ClosenessReport

    def __iter__(self):
        return iter((self.ids, self.delta))

    def constants(self) -> dict:
        return {"a": self.a, "lambda1": self.lambda1, "mu1": self.mu1,
                "gamma": self.gamma, "delta": self.delta}


def trivial_limit_ids(Pt: Abvp, a: float | None = None) -> TrivialLimit:
    """Identify ``Pt`` with the trivial problem through its ground state.

    ``Pt`` needs ``0`` as a simple isolated Neumann eigenvalue.  The
    returned ``delta`` is the explicit bound built from the spectral gap
    ``lambda1``, the DtN gap ``mu1`` at ``0`` and ``gamma = ||gamma Phi0||^{-2}``.
    """
    vals, V = eigh(neumann(Pt))
    scale = max(1.0, float(np.abs(vals).max()))
    if abs(vals[0]) > ZERO_GAP * scale:
        raise ZeroNotSimple(f"0 is not a Neumann eigenvalue (lowest is {vals[0]:.3e})")
    if vals.size < 2 or vals[1] <= ZERO_GAP * scale:
        raise ZeroNotSimple("0 is not a simple isolated Neumann eigenvalue (no spectral gap)")
    lambda1 = float(vals[1])
    phi0 = V[:, 0]
    k = np.argmax(np.abs(phi0))
    phi0 = phi0 * (abs(phi0[k]) / phi0[k])
    psi0 = Pt.gamma(phi0)
    npsi = Pt.boundary.norm(psi0)
    if npsi <= ZERO_GAP:
        raise ZeroNotSimple("the ground state has vanishing boundary values")
    gamma = 1.0 / npsi**2

    if a is None:
        a = next((c for c in DEFAULT_A if bd_map_estimate_holds(Pt, c)), None)
        if a is None:
            raise BdMapEstimateFails(f"no a in {DEFAULT_A} satisfies the boundary map estimate",
                                     DEFAULT_A[-1])
    else:
        if not 0 < a <= 1:
            raise InputError(f"a must lie in (0, 1], got {a}")
        if not bd_map_estimate_holds(Pt, a):
            raise BdMapEstimateFails(f"boundary map estimate fails for a = {a}", a)

    mus = eigvalsh(dtn(Pt, 0.0))
    mus = np.delete(mus, np.argmin(np.abs(mus)))
    mu1 = float(np.min(np.abs(mus))) if mus.size else np.inf

    delta = max(0.0 if np.isinf(mu1) else 1.0 / np.sqrt(mu1),
                np.sqrt(gamma) * np.sqrt(a + 2.0 / (a * lambda1)),
                1.0 / np.sqrt(lambda1))

    P = point_abvp()
    J = LinOp(P.space, Pt.space, phi0[:, None])
    I = LinOp(P.boundary, Pt.boundary, psi0[:, None])
    ids = IdentificationSet(J, adjoint(J), J, adjoint(J), I, adjoint(I) * gamma)
    report = closeness_report(P, Pt, ids)
    slack = delta * (1 + 1e-9)
    if report.delta_total > slack:
        raise HypothesisFails(f"measured defect {report.delta_total:.6g} exceeds "
                              f"the explicit bound {delta:.6g}")
    return TrivialLimit(ids, float(delta), P, Pt, float(a), lambda1, mu1, gamma, phi0, report)


# ------------------------------------------------------------ smoothing

@dataclass
class SmoothingOp:
    """``B`` on the decoupled space with ``f - B f`` always satisfying the coupling."""
    B: LinOp
    chi: dict
    C: float
    coupled: CoupledAbvp
    certified_residual: float

    def constraint_residual(self, f) -> float:
        f = np.asarray(f)
        dec = self.coupled.decoupled
        nf = dec.form_norm(f)
        r = np.linalg.norm(self.coupled.constraint @ (f - self.B(f)))
        return float(r / nf) if nf > 0 else float(r)


def smoothing_from_solutions(bp: VertexCouplingBlueprint, P: CoupledAbvp | None = None,
                             rng=None, samples: int = 50) -> SmoothingOp:
    """Smoothing operator with lifts ``chi_{e,v} = S_v(-1) pi_{v,e}^*``.

    The lifts only work when each ``pi_{v,e} pi_{v,e'}^*`` is the identity
    for ``e = e'`` and zero otherwise, which is checked first.
    """
    P = vertex_couple(bp) if P is None else P
    G = bp.graph
    dec = P.decoupled
    rows = vertex_trace_rows(bp, dec)
    n = dec.space.dim
    offs = np.concatenate([[0], np.cumsum([bp.vertex_abvps[v].space.dim for v in G.vertices])])
    chi, sup_sq = {}, 0.0
    Bm = np.zeros((n, n), dtype=complex)
    for k, v in enumerate(G.vertices):
        Pv = bp.vertex_abvps[v]
        inc = [G.edges[j].id for j in G.incident(v)]
        if not inc:
            continue
        S = solution_operator(Pv, -1.0)
        for eid in inc:
            chi[(eid, v)] = S @ adjoint(bp.traces[(v, eid)])
        for eid in inc:
            trace = bp.traces[(v, eid)] @ Pv.gamma
            for eid2 in inc:
                got = (trace @ chi[(eid2, v)]).coeffs
                want = np.eye(got.shape[0]) if eid2 == eid else np.zeros_like(got)
                err = np.max(np.abs(got - want), initial=0.0)
                if err > 1e-10:
                    name = "Gamma_{v,e} chi_{e,v} = id" if eid2 == eid else "Gamma_{v,e} chi_{e',v} = 0"
                    raise HypothesisFails(f"{name} violated at vertex {v!r}, edges "
                                          f"({eid!r}, {eid2!r}): error {err:.2e}")
        total = 0.0
        for j in G.incident(v):
            e = G.edges[j]
            w = G.other_end(j, v)
            c = chi[(e.id, v)]
            Bm[offs[k]:offs[k + 1], :] += 0.5 * c.coeffs @ (rows[(v, e.id)] - rows[(w, e.id)])
            total += opnorm(c, plain_gram(c.domain), Pv.form_gram()) ** 2
        sup_sq = max(sup_sq, total)
    B = LinOp(dec.space, dec.space, Bm)
    op = SmoothingOp(B, chi, float(np.sqrt(sup_sq)), P, 0.0)

    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(samples):
        worst = max(worst, op.constraint_residual(_crandn(rng, n)))
    if worst > 1e-10:
        raise HypothesisFails(f"f - Bf violates the coupling constraints (residual {worst:.2e})")
    op.certified_residual = worst
    return op


# ------------------------------------------------------------ coupled closeness

def _blockdiag(ops) -> np.ndarray:
    mats = [op.coeffs for op in ops]
    rows = sum(m.shape[0] for m in mats)
    cols = sum(m.shape[1] for m in mats)
    return np.asarray(block_diag(*mats), dtype=complex).reshape(rows, cols) if mats else \
        np.zeros((0, 0), dtype=complex)


def _coupled_adjoint(P: CoupledAbvp) -> np.ndarray:
    """``E^*`` from decoupled to coupled coordinates (``E`` is the isometric embedding)."""
    E = P.embedding.coeffs
    return (E.conj().T * P.decoupled.W[None, :]) / P.W[:, None]


@dataclass
class CoupledCloseness:
    report: ClosenessReport
    delta: float
    bound: float
    smallness: tuple
    per_vertex: dict
    ids: IdentificationSet
    coupled: tuple

    @property
    def measured(self) -> float:
        """Global defect covered by the bound (boundary-iso defects are only reported)."""
        return self.report.delta_without_bdiso

    @property
    def holds(self) -> bool:
        return self.measured <= self.bound * (1 + 1e-9) + 1e-12

    def to_json(self) -> dict:
        out = self.report.to_json()
        out.update({"delta": self.delta, "bound": self.bound, "measured": self.measured,
                    "smallness": list(self.smallness),
                    "perVertex": {v: r.to_json() for v, r in self.per_vertex.items()}})
        return out


def coupled_closeness(bp: VertexCouplingBlueprint, bpt: VertexCouplingBlueprint,
                      vertex_ids: dict | None = None, B: SmoothingOp | None = None,
                      Bt: SmoothingOp | None = None) -> CoupledCloseness:
    """Glue per-vertex identifications into identifications of the coupled problems.

    ``J`` and ``J'`` are compressions of the block-diagonal maps to the
    coupled spaces; ``J1 = (1 - Bt) J1_dec`` and ``Jp1 = (1 - B) Jp1_dec``.
    Raises :class:`SmallnessFails` when ``Bt J1_dec`` or ``B Jp1_dec`` is not
    bounded by the per-vertex ``delta`` on coupled vectors.
    """
    G = bp.graph
    if [v for v in G.vertices] != list(bpt.graph.vertices) or \
            [e.id for e in G.edges] != [e.id for e in bpt.graph.edges]:
        raise InputError("both blueprints must use the same graph")
    P = B.coupled if B is not None else vertex_couple(bp)
    Pt = Bt.coupled if Bt is not None else vertex_couple(bpt)
    B = smoothing_from_solutions(bp, P) if B is None else B
    Bt = smoothing_from_solutions(bpt, Pt) if Bt is None else Bt
    if vertex_ids is None:
        vertex_ids = {v: identity_ids(bp.vertex_abvps[v], bpt.vertex_abvps[v])
                      for v in G.vertices}

    per_vertex = {v: closeness_report(bp.vertex_abvps[v], bpt.vertex_abvps[v], vertex_ids[v])
                  for v in G.vertices}
    delta = max(r.delta_total for r in per_vertex.values())

    dec, dect = P.decoupled, Pt.decoupled
    E, Et = P.embedding.coeffs, Pt.embedding.coeffs
    Es, Ets = _coupled_adjoint(P), _coupled_adjoint(Pt)
    Jd = _blockdiag([vertex_ids[v].J for v in G.vertices])
    Jpd = _blockdiag([vertex_ids[v].Jp for v in G.vertices])
    J1d = _blockdiag([vertex_ids[v].J1 for v in G.vertices])
    Jp1d = _blockdiag([vertex_ids[v].Jp1 for v in G.vertices])

    small_t = opnorm_matrix(Bt.B.coeffs @ J1d @ E, P.form_gram().coeffs,
                            dect.form_gram().coeffs)
    small = opnorm_matrix(B.B.coeffs @ Jp1d @ Et, Pt.form_gram().coeffs,
                          dec.form_gram().coeffs)
    if max(small_t, small) > delta * (1 + 1e-9) + 1e-12:
        raise SmallnessFails(f"smoothing is not small: {small_t:.3e}, {small:.3e} > "
                             f"delta = {delta:.3e}", (small_t, small))

    X1 = (np.eye(dect.space.dim) - Bt.B.coeffs) @ J1d @ E
    Xp1 = (np.eye(dec.space.dim) - B.B.coeffs) @ Jp1d @ Et
    J = LinOp(P.space, Pt.space, Ets @ Jd @ E)
    Jp = LinOp(Pt.space, P.space, Es @ Jpd @ Et)
    J1 = LinOp(P.space, Pt.space, Ets @ X1)
    Jp1 = LinOp(Pt.space, P.space, Es @ Xp1)

    I = np.zeros((Pt.boundary.dim, P.boundary.dim), dtype=complex)
    Ip = np.zeros((P.boundary.dim, Pt.boundary.dim), dtype=complex)
    eo = np.concatenate([[0], np.cumsum([bp.edge_spaces[e.id].dim for e in G.edges])])
    eot = np.concatenate([[0], np.cumsum([bpt.edge_spaces[e.id].dim for e in G.edges])])
    for j, e in enumerate(G.edges):
        for v in (e.src, e.dst):
            pi, pit = bp.traces[(v, e.id)], bpt.traces[(v, e.id)]
            ids_v = vertex_ids[v]
            I[eot[j]:eot[j + 1], eo[j]:eo[j + 1]] += 0.5 * (pit @ ids_v.I @ adjoint(pi)).coeffs
            Ip[eo[j]:eo[j + 1], eot[j]:eot[j + 1]] += 0.5 * (pi @ ids_v.Ip @ adjoint(pit)).coeffs
    ids = IdentificationSet(J, Jp, J1, Jp1, LinOp(P.boundary, Pt.boundary, I),
                            LinOp(Pt.boundary, P.boundary, Ip))
    report = closeness_report(P, Pt, ids)
    factor = max(3.0, P.report["sup_gamma_norm"] + 1.0, Pt.report["sup_gamma_norm"] + 1.0)
    return CoupledCloseness(report, float(delta), float(delta * factor), (small_t, small),
                            per_vertex, ids, (P, Pt))


def scaled_vertex_form(bp: VertexCouplingBlueprint, vertex: str, factor: float) -> VertexCouplingBlueprint:
    """Copy of ``bp`` with the energy form at ``vertex`` multiplied by ``factor``."""
    P = bp.vertex_abvps[vertex]
    Q = Abvp(P.space, P.boundary, P.gamma, GramForm(P.space, factor * P.M),
             split=P.split, label=P.label)
    abvps = dict(bp.vertex_abvps)
    abvps[vertex] = Q
    return VertexCouplingBlueprint(bp.graph, abvps, bp.edge_spaces, bp.traces)


def closeness_sweep(G: Graph, epsilons=(1e-1, 1e-2, 1e-3, 1e-4), vertex: str | None = None):
    """Rows ``(eps, measured, bound)`` for star components of ``G`` with one form scaled by ``1 + eps``."""
    bp = star_blueprint(G)
    vertex = G.vertices[0] if vertex is None else vertex
    B = smoothing_from_solutions(bp)
    rows = []
    for eps in epsilons:
        bpt = scaled_vertex_form(bp, vertex, 1.0 + eps)
        res = coupled_closeness(bp, bpt, B=B)
        rows.append((float(eps), res.measured, res.bound))
    return rows
