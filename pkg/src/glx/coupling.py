"""Direct sums and couplings of boundary value problems along a graph.

Couplings are realized as constraint subspaces of a direct sum.  The
constraint subspace gets an explicit basis and the coupled problem is
re-expressed in that basis as an ordinary :class:`~glx.abvp.Abvp`.  When
the minimal-norm lifts of the boundary coordinates are mutually orthogonal
(the usual case for coordinate traces) the basis is chosen so that the
coupled problem is split, with gamma a coordinate restriction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag, null_space, orth
from scipy.optimize import brentq

from .abvp import Abvp, dirichlet_spectrum, dtn, graph_abvp, gamma_norm, trivial_abvp
from .errors import BlueprintInvalid, FibreMismatch, NotRegular
from .graph import (Graph, is_regular, line_graph, normalized_laplacian, star_components,
                    subdivision)
from .hilbert import (GramForm, LinOp, WeightedSpace, adjoint, direct_sum_spaces,
                      eigvalsh, orthonormal_null_space)

CONSTRAINT_TOL = 1e-12


# ------------------------------------------------------------ direct sums

def _offsets(sizes) -> np.ndarray:
    return np.concatenate([[0], np.cumsum(sizes)]).astype(int)


def direct_sum(family, label: str = "direct sum") -> Abvp:
    """Decoupled problem: all data block-diagonal.  A singleton family is returned as is."""
    family = list(family)
    if len(family) == 1:
        return family[0]
    H = direct_sum_spaces([P.space for P in family], label)
    G = direct_sum_spaces([P.boundary for P in family], label + " boundary")
    gamma = block_diag(*[P.gamma.coeffs for P in family]) if family else np.zeros((0, 0))
    M = block_diag(*[P.M for P in family]) if family else np.zeros((0, 0))
    gamma = np.asarray(gamma).reshape(G.dim, H.dim)
    M = np.asarray(M).reshape(H.dim, H.dim)
    split = None
    if all(P.is_split for P in family):
        ho = _offsets([P.space.dim for P in family])
        b = np.concatenate([P.split[0] + ho[k] for k, P in enumerate(family)] + [np.zeros(0, int)])
        i = np.concatenate([P.split[1] + ho[k] for k, P in enumerate(family)] + [np.zeros(0, int)])
        # gamma rows follow component order, so boundary indices already line up
        split = (b, i)
    return Abvp(H, G, LinOp(H, G, gamma), GramForm(H, M, check_psd=False), split=split,
                label=label)


# ------------------------------------------------------------ constrained problems

class CoupledAbvp(Abvp):
    """Problem living on a constraint subspace of a decoupled direct sum.

    ``embedding`` maps coupled coordinates into the decoupled space and is
    isometric; ``iota`` maps the coupled boundary space into the decoupled
    boundary space so that ``Lambda = iota* Lambda_dec iota``.
    """

    def __init__(self, *args, decoupled: Abvp, components, iota: LinOp, **kw):
        super().__init__(*args, **kw)
        self.decoupled = decoupled
        self.components = list(components)
        self.iota = iota


def constrained_abvp(dec: Abvp, constraint: np.ndarray, gamma_rows: np.ndarray,
                     boundary: WeightedSpace, components, iota: LinOp,
                     label: str = "coupled") -> CoupledAbvp:
    """Restrict ``dec`` to ``ker constraint`` with boundary map ``gamma_rows``."""
    Q = orthonormal_null_space(constraint, dec.W, CONSTRAINT_TOL)
    GQ = np.asarray(gamma_rows, dtype=complex) @ Q
    m = boundary.dim
    if m:
        sv = np.linalg.svd(GQ, compute_uv=False)
        if sv.size < m or sv[m - 1] <= CONSTRAINT_TOL * max(sv[0], 1.0):
            raise BlueprintInvalid("boundary map of the coupled problem is not surjective "
                                   "(trace ranges do not match)")
    K = null_space(GQ, rcond=CONSTRAINT_TOL) if m else np.eye(Q.shape[1])
    if m:
        N = orth(GQ.conj().T, rcond=CONSTRAINT_TOL)
        R = N @ np.linalg.inv(GQ @ N)
        RR = R.conj().T @ R
        off = RR - np.diag(np.diag(RR))
        diagonal = np.max(np.abs(off), initial=0.0) <= 1e-12 * np.max(np.abs(np.diag(RR)))
    else:
        R = np.zeros((Q.shape[1], 0))
        RR = np.zeros((0, 0))
        diagonal = True
    if diagonal:
        basis = np.hstack([Q @ R, Q @ K])
        weights = np.concatenate([np.diag(RR).real, np.ones(K.shape[1])])
        space = WeightedSpace(weights, label)
        gamma = np.hstack([np.eye(m), np.zeros((m, K.shape[1]))])
        split = (np.arange(m), np.arange(m, m + K.shape[1]))
    else:
        basis = Q
        space = WeightedSpace.unweighted(Q.shape[1], label)
        gamma = GQ
        split = None
    M = basis.conj().T @ dec.M @ basis
    emb = LinOp(space, dec.space, basis)
    return CoupledAbvp(space, boundary, LinOp(space, boundary, gamma),
                       GramForm(space, 0.5 * (M + M.conj().T), check_psd=False),
                       split=split, label=label, embedding=emb,
                       decoupled=dec, components=components, iota=iota)


def decoupled_dtn(P: CoupledAbvp, z) -> np.ndarray:
    """Block-diagonal ``Lambda_dec(z)`` assembled from the component problems."""
    blocks = [dtn(C, z).coeffs for C in P.components]
    n = sum(C.boundary.dim for C in P.components)
    return np.asarray(block_diag(*blocks)).reshape(n, n) if blocks else np.zeros((0, 0))


def coupled_dtn(P: CoupledAbvp, z) -> LinOp:
    """``iota* Lambda_dec(z) iota`` on the coupled boundary space."""
    Ld = LinOp(P.iota.codomain, P.iota.codomain, decoupled_dtn(P, z))
    return adjoint(P.iota) @ Ld @ P.iota


def kernel_decoupling_residual(P: CoupledAbvp) -> float:
    """Distance between ``ker gamma`` of the coupled problem and the sum of component kernels.

    Both subspaces live in the decoupled space; the residual is the
    spectral norm of the difference of their orthogonal projectors.
    """
    from .abvp import kernel_embedding

    dec = P.decoupled
    W = dec.W
    E = P.embedding.coeffs @ kernel_embedding(P).coeffs
    Kd = orthonormal_null_space(dec.gamma.coeffs, W)
    sw = np.sqrt(W)[:, None]

    def proj(X):
        if X.shape[1] == 0:
            return np.zeros((len(W), len(W)))
        U = np.linalg.qr(sw * X)[0]
        return U @ U.conj().T

    return float(np.linalg.norm(proj(E) - proj(Kd), 2))


def dirichlet_union_residual(P: CoupledAbvp) -> float:
    """Largest gap between the coupled Dirichlet spectrum and the union of component ones."""
    a = np.sort(dirichlet_spectrum(P))
    b = np.sort(np.concatenate([dirichlet_spectrum(C) for C in P.components] + [np.zeros(0)]))
    if a.size != b.size:
        return np.inf
    return float(np.max(np.abs(a - b), initial=0.0))


# ------------------------------------------------------------ vertex coupling

@dataclass(frozen=True)
class VertexCouplingBlueprint:
    graph: Graph
    vertex_abvps: dict
    edge_spaces: dict
    traces: dict            # (v, e) -> LinOp pi_{v,e}: G_v -> G_e


def _iota_v(bp: VertexCouplingBlueprint, v: str) -> np.ndarray:
    G = bp.graph
    rows = [bp.traces[(v, G.edges[k].id)].coeffs for k in G.incident(v)]
    n = bp.vertex_abvps[v].boundary.dim
    return np.vstack(rows) if rows else np.zeros((0, n))


def _range_projector(A: np.ndarray, w: np.ndarray) -> np.ndarray:
    sw = np.sqrt(w)
    U = orth(sw[:, None] * A, rcond=1e-10) if A.size else np.zeros((len(w), 0))
    return U @ U.conj().T


def validate_vertex_blueprint(bp: VertexCouplingBlueprint) -> dict:
    """Check the coupling assumptions; returns ``{"sup_gamma_norm": ...}``."""
    G = bp.graph
    for v in G.vertices:
        if v not in bp.vertex_abvps:
            raise BlueprintInvalid(f"no vertex problem for vertex {v!r}")
    for e in G.edges:
        if e.id not in bp.edge_spaces:
            raise BlueprintInvalid(f"no boundary space for edge {e.id!r}")
    for v in G.vertices:
        P = bp.vertex_abvps[v]
        for k in G.incident(v):
            eid = G.edges[k].id
            pi = bp.traces.get((v, eid))
            if pi is None:
                raise BlueprintInvalid(f"missing trace map for ({v!r}, {eid!r})")
            if not (pi.domain.compatible(P.boundary) and pi.codomain.compatible(bp.edge_spaces[eid])):
                raise BlueprintInvalid(f"trace map ({v!r}, {eid!r}) has wrong spaces")
        if G.degree(v):
            gv = P.boundary
            gmax = direct_sum_spaces([bp.edge_spaces[G.edges[k].id] for k in G.incident(v)])
            iota = LinOp(gv, gmax, _iota_v(bp, v))
            defect = np.max(np.abs((adjoint(iota) @ iota).coeffs - np.eye(gv.dim)), initial=0.0)
            if defect > 1e-12:
                raise BlueprintInvalid(f"iota_v is not isometric at vertex {v!r} (defect {defect:.2e})")
        elif P.boundary.dim:
            raise BlueprintInvalid(f"vertex {v!r} has boundary data but no edges")
    for e in G.edges:
        w = bp.edge_spaces[e.id].weights
        projs = []
        for v in (e.src, e.dst):
            P = bp.vertex_abvps[v]
            projs.append(_range_projector(bp.traces[(v, e.id)].coeffs @ P.gamma.coeffs, w))
        if np.linalg.norm(projs[0] - projs[1], 2) > 1e-10:
            raise BlueprintInvalid(f"trace ranges differ on edge {e.id!r}")
    sup = max((gamma_norm(bp.vertex_abvps[v]) for v in G.vertices
               if bp.vertex_abvps[v].boundary.dim), default=0.0)
    return {"sup_gamma_norm": sup}


def vertex_trace_rows(bp: VertexCouplingBlueprint, dec: Abvp | None = None) -> dict:
    """``(v, e) -> pi_{v,e} gamma_v`` written as rows on the decoupled space."""
    G = bp.graph
    comps = [bp.vertex_abvps[v] for v in G.vertices]
    n = sum(P.space.dim for P in comps) if dec is None else dec.space.dim
    ho = _offsets([P.space.dim for P in comps])
    rows = {}
    for k, v in enumerate(G.vertices):
        P = bp.vertex_abvps[v]
        for j in G.incident(v):
            eid = G.edges[j].id
            out = np.zeros((bp.edge_spaces[eid].dim, n), dtype=complex)
            out[:, ho[k]:ho[k + 1]] = bp.traces[(v, eid)].coeffs @ P.gamma.coeffs
            rows[(v, eid)] = out
    return rows


def vertex_couple(bp: VertexCouplingBlueprint) -> CoupledAbvp:
    """Couple vertex problems by matching their edge traces."""
    rep = validate_vertex_blueprint(bp)
    G = bp.graph
    comps = [bp.vertex_abvps[v] for v in G.vertices]
    dec = direct_sum(comps, "vertex problems")
    go = _offsets([P.boundary.dim for P in comps])
    vpos = {v: k for k, v in enumerate(G.vertices)}
    edge_sp = [bp.edge_spaces[e.id] for e in G.edges]
    eo = _offsets([s.dim for s in edge_sp])
    boundary = direct_sum_spaces(edge_sp, "edges")
    rows = vertex_trace_rows(bp, dec)

    cons, grows = [], []
    iota = np.zeros((dec.boundary.dim, boundary.dim), dtype=complex)
    for j, e in enumerate(G.edges):
        cons.append(rows[(e.src, e.id)] - rows[(e.dst, e.id)])
        grows.append(rows[(e.src, e.id)])
        for v in (e.src, e.dst):
            k = vpos[v]
            pi = bp.traces[(v, e.id)]
            iota[go[k]:go[k + 1], eo[j]:eo[j + 1]] = adjoint(pi).coeffs
    n = dec.space.dim
    constraint = np.vstack(cons) if cons else np.zeros((0, n))
    gamma_rows = np.vstack(grows) if grows else np.zeros((0, n))
    P = constrained_abvp(dec, constraint, gamma_rows, boundary, comps,
                         LinOp(boundary, dec.boundary, iota), label="vertex coupled")
    P.report = rep
    P.constraint = constraint
    return P


def coordinate_trace(gv: WeightedSpace, index: int) -> LinOp:
    """Trace onto one coordinate of ``gv``, as a map into C with the same weight."""
    c = np.zeros((1, gv.dim))
    c[0, index] = 1.0
    return LinOp(gv, WeightedSpace([gv.weights[index]], "edge"), c)


def star_blueprint(G: Graph) -> VertexCouplingBlueprint:
    """Star components of ``G`` as graph problems, coupled through their leaves."""
    abvps, traces = {}, {}
    for sc in star_components(G):
        P = graph_abvp(sc.graph, sc.boundary)
        abvps[sc.center] = P
        for j, k in enumerate(sc.edge_indices):
            traces[(sc.center, G.edges[k].id)] = coordinate_trace(P.boundary, j)
    spaces = {e.id: WeightedSpace([1.0], "edge") for e in G.edges}
    return VertexCouplingBlueprint(G, abvps, spaces, traces)


def star_dtn(d: int, z) -> np.ndarray:
    """Closed form of the star DtN: ``(1 - z) Id - 1/(d (1 - z)) * ones``."""
    return (1 - z) * np.eye(d) - np.ones((d, d)) / (d * (1 - z))


def gamma_bound_check(P: CoupledAbvp) -> tuple[float, float]:
    """``(||gamma||^2, sup_v ||gamma_v||^2 / 2)`` for a vertex-coupled problem."""
    lhs = gamma_norm(P) ** 2
    return lhs, 0.5 * P.report["sup_gamma_norm"] ** 2


# ------------------------------------------------------------ line graph relation

@dataclass
class LineGraphReport:
    r: int
    z: complex
    alpha_fit: complex
    beta_fit: complex
    fit_residual: float
    alpha_closed: complex       # 2(1-z) - 2/(r(1-z))
    beta_closed: complex        # -(2r-2)/(r(1-z))
    alpha_uncorrected: complex  # 2(1-z)
    closed_form_error: float
    uncorrected_alpha_error: float
    subdivision_spectrum: np.ndarray
    predicted_spectrum: np.ndarray
    uncorrected_map_spectrum: np.ndarray
    spectrum_error: float
    uncorrected_map_error: float

    @property
    def closed_form_supported(self) -> bool:
        return self.closed_form_error < 1e-10

    @property
    def uncorrected_constant_supported(self) -> bool:
        return self.uncorrected_alpha_error < 1e-10


def fit_line_graph_relation(P: CoupledAbvp, lap_lg: np.ndarray, z):
    """Least-squares fit ``Lambda(z) = alpha Id + beta (Id - Lap_LG)``; returns (alpha, beta, residual)."""
    L = coupled_dtn(P, z).coeffs
    n = L.shape[0]
    A = np.stack([np.eye(n).ravel(), (np.eye(n) - lap_lg).ravel()], axis=1)
    coef, *_ = np.linalg.lstsq(A, L.ravel(), rcond=None)
    res = np.linalg.norm(A @ coef - L.ravel()) / max(np.linalg.norm(L), 1.0)
    return complex(coef[0]), complex(coef[1]), float(res)


def _match_error(a: np.ndarray, b: np.ndarray) -> float:
    if a.size != b.size:
        return np.inf
    return float(np.max(np.abs(np.sort(a) - np.sort(b)), initial=0.0))


def line_graph_dtn_check(G: Graph, z=-1.0) -> LineGraphReport:
    """Compare the coupled star DtN with an affine function of the line graph Laplacian.

    The DtN is computed as ``iota* Lambda_dec iota`` and fitted at ``z``.
    The induced spectral relation is then tested against brute-force
    spectra: for each line-graph eigenvalue ``mu`` we solve
    ``alpha(lam) + beta(lam)(1 - mu) = 0`` numerically using fitted values
    on each side of the Dirichlet point ``lam = 1`` and compare the roots
    with the subdivision-graph spectrum away from 1.
    """
    r = is_regular(G)
    if r is None or r < 2:
        raise NotRegular("line graph relation needs a regular graph of degree >= 2")
    if abs(z - 1) < 1e-8:
        raise BlueprintInvalid("z = 1 is the Dirichlet point of every star")
    P = vertex_couple(star_blueprint(G))
    LG = line_graph(G)
    lap = normalized_laplacian(LG).coeffs.real
    a, b, res = fit_line_graph_relation(P, lap, z)
    a_cl = 2 * (1 - z) - 2 / (r * (1 - z))
    b_cl = -(2 * r - 2) / (r * (1 - z))
    a_pr = 2 * (1 - z)
    cf_err = max(abs(a - a_cl), abs(b - b_cl))
    pr_err = abs(a - a_pr)

    mus = eigvalsh(normalized_laplacian(LG))

    def g(lam, mu):
        al, be, _ = fit_line_graph_relation(P, lap, lam)
        return ((1 - lam) * (al + be * (1 - mu))).real

    predicted = []
    for mu in mus:
        for lo, hi in ((-1e-9, 1 - 1e-7), (1 + 1e-7, 2 + 1e-9)):
            flo, fhi = g(lo, mu), g(hi, mu)
            if abs(flo) < 1e-12:
                predicted.append(lo)
            elif flo * fhi < 0:
                predicted.append(brentq(g, lo, hi, args=(mu,), xtol=1e-14, rtol=1e-14))
            elif abs(fhi) < 1e-12:
                predicted.append(hi)
    predicted = np.clip(predicted, 0.0, 2.0)
    predicted = np.sort(predicted[np.abs(predicted - 1) > 1e-6])
    sg = eigvalsh(normalized_laplacian(subdivision(G)))
    sg_off = np.sort(sg[np.abs(sg - 1) > 1e-6])
    # relation without the correction term: mu = 1 - r/(r-1) (1-lam)^2
    uncorrected = []
    for mu in mus:
        t = (1 - mu) * (r - 1) / r
        if t >= 0:
            uncorrected.extend([1 - np.sqrt(t), 1 + np.sqrt(t)])
    uncorrected = np.sort([x for x in uncorrected if abs(x - 1) > 1e-6])
    return LineGraphReport(r, z, a, b, res, a_cl, b_cl, a_pr, float(cf_err), float(pr_err),
                           sg_off, predicted, uncorrected,
                           _match_error(predicted, sg_off), _match_error(uncorrected, sg_off))


def subdivision_map(mu, r: int) -> np.ndarray:
    """Subdivision eigenvalues ``1 +- sqrt(1 - mu (r-1)/r)`` attached to a line-graph eigenvalue."""
    s = np.sqrt(max(1 - mu * (r - 1) / r, 0.0))
    return np.array([1 - s, 1 + s])


# ------------------------------------------------------------ edge coupling

@dataclass(frozen=True)
class VertexSubspace:
    """Subspace of the maximal vertex space given by an isometric embedding.

    ``embed`` has columns in the coordinates of ``G_v^max`` (blocks ordered
    by the incident edges) and satisfies ``embed^H W_max embed = diag(weights)``.
    """

    embed: np.ndarray
    weights: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.embed.shape[1])


@dataclass(frozen=True)
class EdgeCouplingBlueprint:
    graph: Graph
    edge_abvps: dict           # e -> Abvp
    end_blocks: dict           # e -> (src indices, dst indices) into G_e coordinates
    vertex_subspaces: dict     # v -> VertexSubspace


def _fibre_blocks(bp: EdgeCouplingBlueprint, v: str):
    """List of (edge index, coordinate indices in G_e) for the blocks of ``G_v^max``."""
    G = bp.graph
    out = []
    for k in G.incident(v):
        e = G.edges[k]
        src, dst = bp.end_blocks[e.id]
        out.append((k, np.asarray(src if e.src == v else dst, dtype=int)))
    return out


def max_vertex_space(bp: EdgeCouplingBlueprint, v: str) -> WeightedSpace:
    ws = [bp.edge_abvps[bp.graph.edges[k].id].boundary.weights[idx] for k, idx in _fibre_blocks(bp, v)]
    return WeightedSpace(np.concatenate(ws) if ws else np.zeros(0), "max vertex space")


def validate_edge_blueprint(bp: EdgeCouplingBlueprint) -> None:
    G = bp.graph
    for e in G.edges:
        if e.id not in bp.edge_abvps or e.id not in bp.end_blocks:
            raise BlueprintInvalid(f"edge {e.id!r} lacks a problem or end blocks")
        src, dst = (np.asarray(x, int) for x in bp.end_blocks[e.id])
        dim = bp.edge_abvps[e.id].boundary.dim
        if sorted(np.concatenate([src, dst]).tolist()) != list(range(dim)):
            raise BlueprintInvalid(f"end blocks of edge {e.id!r} do not partition its boundary space")
    for v in G.vertices:
        if v not in bp.vertex_subspaces:
            raise BlueprintInvalid(f"no vertex subspace for {v!r}")
        S = bp.vertex_subspaces[v]
        wmax = max_vertex_space(bp, v).weights
        if S.embed.shape[0] != wmax.size:
            raise BlueprintInvalid(f"vertex subspace at {v!r} has wrong ambient dimension")
        gram = S.embed.conj().T @ (wmax[:, None] * S.embed)
        if np.max(np.abs(gram - np.diag(S.weights)), initial=0.0) > 1e-12 * max(1.0, np.max(S.weights, initial=1.0)):
            raise BlueprintInvalid(f"vertex subspace basis at {v!r} is not isometric")


def standard_vertex_subspace(fibres, mode: str = "orthonormal") -> VertexSubspace:
    """Diagonal ``{(eta, ..., eta)}`` of equal fibres.

    ``mode="orthonormal"`` uses the normalized basis ``ones/sqrt(d)``; with
    ``mode="values"`` the coordinate is the common value ``eta`` and the
    weights are ``deg * w``, which yields the averaged DtN formula.
    """
    fibres = list(fibres)
    if not fibres:
        return VertexSubspace(np.zeros((0, 0)), np.zeros(0))
    w0 = fibres[0].weights
    for f in fibres[1:]:
        if not f.compatible(fibres[0]):
            raise FibreMismatch("fibres at a standard vertex differ in dimension or weights")
    d, k = len(fibres), w0.size
    embed = np.kron(np.ones((d, 1)), np.eye(k))
    if mode == "orthonormal":
        return VertexSubspace(embed / np.sqrt(d), w0.copy())
    if mode == "values":
        return VertexSubspace(embed, d * w0)
    raise ValueError(f"unknown mode {mode!r}")


def standard_subspaces(G: Graph, edge_abvps: dict, end_blocks: dict, mode: str = "orthonormal") -> dict:
    out = {}
    for v in G.vertices:
        fibres = []
        for k in G.incident(v):
            e = G.edges[k]
            src, dst = end_blocks[e.id]
            idx = np.asarray(src if e.src == v else dst, int)
            fibres.append(WeightedSpace(edge_abvps[e.id].boundary.weights[idx]))
        out[v] = standard_vertex_subspace(fibres, mode)
    return out


def _edge_layout(bp: EdgeCouplingBlueprint):
    comps = [bp.edge_abvps[e.id] for e in bp.graph.edges]
    dec = direct_sum(comps, "edge problems")
    go = _offsets([P.boundary.dim for P in comps])
    return comps, dec, go


def _gamma_max_rows(bp, dec, go, v) -> np.ndarray:
    """Rows of ``Gamma_v^max`` in decoupled coordinates."""
    rows = [dec.gamma.coeffs[go[k] + idx, :] for k, idx in _fibre_blocks(bp, v)]
    return np.vstack(rows) if rows else np.zeros((0, dec.space.dim))


def _max_positions(bp, go, v) -> np.ndarray:
    """Positions of the ``G_v^max`` coordinates inside the decoupled boundary space."""
    pos = [go[k] + idx for k, idx in _fibre_blocks(bp, v)]
    return np.concatenate(pos) if pos else np.zeros(0, int)


def edge_couple(bp: EdgeCouplingBlueprint) -> CoupledAbvp:
    """Restrict the decoupled edge problems to boundary values in the vertex subspaces."""
    validate_edge_blueprint(bp)
    G = bp.graph
    comps, dec, go = _edge_layout(bp)
    sub_spaces = [WeightedSpace(bp.vertex_subspaces[v].weights, "vertex") for v in G.vertices]
    boundary = direct_sum_spaces(sub_spaces, "vertex subspaces")
    vo = _offsets([s.dim for s in sub_spaces])
    cons, grows = [], []
    iota = np.zeros((dec.boundary.dim, boundary.dim), dtype=complex)
    for j, v in enumerate(G.vertices):
        S = bp.vertex_subspaces[v]
        wmax = max_vertex_space(bp, v).weights
        Gm = _gamma_max_rows(bp, dec, go, v)
        coord = (S.embed.conj().T * wmax[None, :]) / S.weights[:, None]   # G_v^max -> G_v
        proj = S.embed @ coord
        cons.append((np.eye(wmax.size) - proj) @ Gm)
        grows.append(coord @ Gm)
        iota[np.ix_(_max_positions(bp, go, v), np.arange(vo[j], vo[j + 1]))] = S.embed
    n = dec.space.dim
    constraint = np.vstack(cons) if cons else np.zeros((0, n))
    gamma_rows = np.vstack(grows) if grows else np.zeros((0, n))
    return constrained_abvp(dec, constraint, gamma_rows, boundary, comps,
                            LinOp(boundary, dec.boundary, iota), label="edge coupled")


def trivial_edge_abvp() -> Abvp:
    """``(id, C^2, h_e, C^2, C^2)`` with ``h_e(f) = |f_2 - f_1|^2``."""
    sp = WeightedSpace.unweighted(2, "edge ends")
    return trivial_abvp(sp, np.array([[1.0, -1.0], [-1.0, 1.0]]), label="trivial edge")


def trivial_edge_blueprint(G: Graph, mode: str = "values") -> EdgeCouplingBlueprint:
    """Trivial edge problems on every edge with standard vertex subspaces."""
    abvps = {e.id: trivial_edge_abvp() for e in G.edges}
    blocks = {e.id: ([0], [1]) for e in G.edges}
    return EdgeCouplingBlueprint(G, abvps, blocks, standard_subspaces(G, abvps, blocks, mode))


# ------------------------------------------------------------ trivial vertices

@dataclass
class TrivialVertexReduction:
    """Vertex-edge coupling with trivial vertex problems and its link to the edge coupling."""

    extended: CoupledAbvp      # problem on sum_e H_e + sum_v G_v
    edge_coupled: CoupledAbvp
    U1: LinOp                  # edge-coupled coordinates -> extended coordinates
    T: LinOp                   # boundary identification (identity)
    subspace_residual: float   # how far U1 lands outside the extended constraint subspace

    def intertwining_residual(self, f) -> float:
        lhs = self.T(self.edge_coupled.gamma(f))
        rhs = self.extended.gamma(self.U1(f))
        return float(np.linalg.norm(lhs - rhs))

    def form_residual(self, f) -> float:
        return float(abs(self.extended.form(self.U1(f)) - self.edge_coupled.form(f)))


def trivial_vertex_couple(bp: EdgeCouplingBlueprint) -> TrivialVertexReduction:
    """Couple edge problems with trivial vertex problems ``(id, G_v, 0, G_v, G_v)``."""
    validate_edge_blueprint(bp)
    G = bp.graph
    comps, dec_e, go = _edge_layout(bp)
    vprobs = [trivial_abvp(WeightedSpace(bp.vertex_subspaces[v].weights, "vertex"), label="trivial vertex")
              for v in G.vertices]
    dec = direct_sum(comps + vprobs, "edge and vertex problems")
    ne = dec_e.space.dim
    vo = ne + _offsets([P.space.dim for P in vprobs])
    boundary = direct_sum_spaces([P.boundary for P in vprobs], "vertex subspaces")
    cons, grows = [], []
    for j, v in enumerate(G.vertices):
        S = bp.vertex_subspaces[v]
        rows = np.zeros((S.embed.shape[0], dec.space.dim), dtype=complex)
        rows[:, :ne] = _gamma_max_rows(bp, dec_e, go, v)
        rows[:, vo[j]:vo[j + 1]] = -S.embed
        cons.append(rows)
        sel = np.zeros((S.dim, dec.space.dim))
        sel[:, vo[j]:vo[j + 1]] = np.eye(S.dim)
        grows.append(sel)
    n = dec.space.dim
    constraint = np.vstack(cons) if cons else np.zeros((0, n))
    gamma_rows = np.vstack(grows) if grows else np.zeros((0, n))
    iota = np.zeros((dec.boundary.dim, boundary.dim))
    nb_e = dec_e.boundary.dim
    iota[nb_e:, :] = np.eye(boundary.dim)
    ext = constrained_abvp(dec, constraint, gamma_rows, boundary, comps + vprobs,
                           LinOp(boundary, dec.boundary, iota), label="vertex-edge coupled")
    edge = edge_couple(bp)
    # U1 c = (E c, Gamma c) in decoupled coordinates, then into extended coordinates
    amb = np.vstack([edge.embedding.coeffs, edge.gamma.coeffs])
    B = ext.embedding.coeffs
    to_ext = (B.conj().T * dec.W[None, :]) / ext.space.weights[:, None]
    U1 = to_ext @ amb
    resid = np.linalg.norm(B @ U1 - amb) / max(np.linalg.norm(amb), 1.0)
    T = LinOp.identity(boundary)
    return TrivialVertexReduction(ext, edge, LinOp(edge.space, ext.space, U1), T, float(resid))
