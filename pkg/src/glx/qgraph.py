"""Vector-valued quantum graphs: DtN matrices, secular spectra and a finite-difference oracle.

Every edge ``e`` is an interval of length ``l_e`` carrying a fibre ``C^d_e``
with a Hermitian fibre operator ``K_e``; the edge operator is
``-f'' + K_e f``.  Vertices carry subspaces ``G_v`` of the maximal vertex
space (the direct sum of the incident fibres).  ``"standard"`` vertex
spaces are the diagonals ``{(eta, ..., eta)}``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import orth
from scipy.optimize import brentq, linear_sum_assignment
from scipy.sparse.linalg import eigs

from .errors import DirichletPole, InputError, MeshTooCoarse, MuOutOfRange
from .graph import Graph, graph_from_json, graph_to_json, is_connected, normalized_laplacian
from .hilbert import eigvalsh

SERIES_RADIUS = 0.25
POLE_TOL = 1e-12


# ------------------------------------------------------------ entire functions

_C_COEF = np.array([(-1.0) ** k / math.factorial(2 * k) for k in range(16)])
_S_COEF = np.array([(-1.0) ** k / math.factorial(2 * k + 1) for k in range(16)])


def _series(coef, w):
    out = np.zeros_like(w)
    for a in coef[::-1]:
        out = out * w + a
    return out


def cfun(w):
    """``cos(sqrt w)``, an entire function of ``w``."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < SERIES_RADIUS
    with np.errstate(all="ignore"):
        out = np.cos(np.sqrt(w))
    if np.any(small):
        out = np.where(small, _series(np.array(_C_COEF), w), out)
    return out


def sfun(w):
    """``sin(sqrt w) / sqrt w``, an entire function of ``w``."""
    w = np.asarray(w, dtype=complex)
    small = np.abs(w) < SERIES_RADIUS
    with np.errstate(all="ignore"):
        r = np.sqrt(w)
        out = np.sin(r) / r
    if np.any(small):
        out = np.where(small, _series(np.array(_S_COEF), w), out)
    return out


def _check_pole(length, w, kappa=None):
    s = sfun(length ** 2 * np.asarray(w))
    bad = np.abs(s) <= POLE_TOL
    if np.any(bad):
        wb = complex(np.asarray(w).reshape(-1)[np.argmax(bad.reshape(-1))])
        n = int(round(length * np.sqrt(abs(wb.real)) / np.pi))
        raise DirichletPole(f"Dirichlet pole of the interval (n={n}, kappa={kappa})", n=n, kappa=kappa)
    return s


def interval_dtn(length: float, z) -> np.ndarray:
    """Scalar interval DtN ``(1/(l s(l^2 z))) [[c, -1], [-1, c]]`` with ``c = c(l^2 z)``."""
    w = complex(z)
    s = _check_pole(length, w)
    c = cfun(length ** 2 * w)
    return np.array([[c, -1.0], [-1.0, c]], dtype=complex) / (length * s)


def interval_dtn_sqrt(length: float, z) -> np.ndarray:
    """The same matrix through ``sqrt(z)`` on the plane cut along the positive axis."""
    z = complex(z)
    r = np.sqrt(z)
    if r.imag < 0 or (r.imag == 0 and z.real > 0 and z.imag < 0):
        r = -r
    x = length * r
    return (r / np.sin(x)) * np.array([[np.cos(x), -1.0], [-1.0, np.cos(x)]])


@dataclass(frozen=True)
class FibreData:
    """Eigen-decomposition of a Hermitian fibre operator, computed once."""

    K: np.ndarray
    kappa: np.ndarray
    U: np.ndarray

    @classmethod
    def from_matrix(cls, K) -> "FibreData":
        K = np.atleast_2d(np.asarray(K, dtype=complex))
        if K.shape[0] != K.shape[1]:
            raise InputError("fibre operator must be square")
        if np.max(np.abs(K - K.conj().T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(K), initial=0.0)):
            raise InputError("fibre operator is not Hermitian")
        kappa, U = np.linalg.eigh(0.5 * (K + K.conj().T))
        return cls(K, kappa, U)

    @property
    def dim(self) -> int:
        return int(self.kappa.size)


def _edge_blocks(length: float, fib: FibreData, z):
    """``(C, S)`` with ``C = sqrt(z-K) cot(l sqrt(z-K))`` and ``S = sqrt(z-K) / sin(l sqrt(z-K))``."""
    w = complex(z) - fib.kappa
    s = sfun(length ** 2 * w)
    bad = np.abs(s) <= POLE_TOL
    if np.any(bad):
        k = int(np.argmax(bad))
        n = int(round(length * np.sqrt(abs(w[k].real)) / np.pi))
        raise DirichletPole(f"Dirichlet pole (n={n}, kappa={fib.kappa[k]:.6g})", n=n,
                            kappa=float(fib.kappa[k]))
    c = cfun(length ** 2 * w)
    U = fib.U
    C = (U * (c / (length * s))[None, :]) @ U.conj().T
    S = (U * (1.0 / (length * s))[None, :]) @ U.conj().T
    return C, S


def edge_dtn(length: float, K, z) -> np.ndarray:
    """DtN of the edge problem on ``C^d + C^d`` (start point first), ``Lambda_0(z - K)``."""
    fib = K if isinstance(K, FibreData) else FibreData.from_matrix(K)
    C, S = _edge_blocks(length, fib, z)
    return np.block([[C, -S], [-S, C]])


# ------------------------------------------------------------ quantum graph

class QuantumGraph:
    """Metric graph with fibres and vertex spaces.

    ``vertex_spaces`` is ``"standard"`` or a map ``v -> basis`` whose columns
    span ``G_v`` inside the maximal vertex space (blocks ordered as the
    incident edges ``G.incident(v)``).
    """

    def __init__(self, graph: Graph, lengths=None, fibres=None, vertex_spaces="standard"):
        self.graph = graph
        lengths = {} if lengths is None else dict(lengths)
        fibres = {} if fibres is None else dict(fibres)
        self.lengths = {e.id: float(lengths.get(e.id, 1.0)) for e in graph.edges}
        if any(not (l > 0 and np.isfinite(l)) for l in self.lengths.values()):
            raise InputError("edge lengths must be positive and finite")
        self.fibres = {e.id: (f if isinstance(f, FibreData) else FibreData.from_matrix(f))
                       for e in graph.edges for f in [fibres.get(e.id, np.zeros((1, 1)))]}
        self.standard = isinstance(vertex_spaces, str)
        if self.standard:
            if vertex_spaces != "standard":
                raise InputError(f"unknown vertex space tag {vertex_spaces!r}")
            for v in graph.vertices:
                Ks = [self.fibres[graph.edges[k].id].K for k in graph.incident(v)]
                if any(K.shape != Ks[0].shape or np.max(np.abs(K - Ks[0])) > 1e-12 for K in Ks[1:]):
                    raise InputError(f"standard vertex {v!r} needs identical fibres on incident edges")
            self.bases = None
        else:
            self.bases = {}
            for v in graph.vertices:
                dmax = self.max_dim(v)
                B = np.asarray(vertex_spaces.get(v, np.zeros((dmax, 0))), dtype=complex).reshape(dmax, -1)
                self.bases[v] = orth(B) if B.size else np.zeros((dmax, 0), dtype=complex)
        self._cache: dict = {}

    @property
    def min_length(self) -> float:
        return min(self.lengths.values())

    def max_dim(self, v: str) -> int:
        return sum(self.fibres[self.graph.edges[k].id].dim for k in self.graph.incident(v))

    def vertex_dims(self) -> list[int]:
        G = self.graph
        if self.standard:
            return [self.fibres[G.edges[G.incident(v)[0]].id].dim if G.degree(v) else 0
                    for v in G.vertices]
        return [self.bases[v].shape[1] for v in G.vertices]

    def boundary_weights(self) -> np.ndarray:
        """Weights of the vertex boundary space: ``deg v`` (standard) or 1 (orthonormal bases)."""
        G = self.graph
        dims = self.vertex_dims()
        if self.standard:
            return np.concatenate([np.full(d, float(G.degree(v))) for v, d in zip(G.vertices, dims)]
                                  + [np.zeros(0)])
        return np.ones(sum(dims))

    def iota(self) -> np.ndarray:
        """Embedding of the vertex boundary space into the sum of edge boundary spaces."""
        if "iota" in self._cache:
            return self._cache["iota"]
        G = self.graph
        eoff = np.concatenate([[0], np.cumsum([2 * self.fibres[e.id].dim for e in G.edges])]).astype(int)
        dims = self.vertex_dims()
        voff = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        out = np.zeros((eoff[-1], voff[-1]), dtype=complex)
        for j, v in enumerate(G.vertices):
            rows = []
            for k in G.incident(v):
                e = G.edges[k]
                d = self.fibres[e.id].dim
                start = eoff[k] + (0 if e.src == v else d)
                rows.extend(range(start, start + d))
            if self.standard:
                d = dims[j]
                block = np.kron(np.ones((G.degree(v), 1)), np.eye(d))
            else:
                block = self.bases[v]
            out[np.ix_(rows, range(voff[j], voff[j + 1]))] = block
        self._cache["iota"] = out
        return out

    def dirichlet_points(self, lam_max: float, lam_min: float = -np.inf):
        """Triples ``(value, edge index, fibre eigen-index, n)`` with ``value <= lam_max``."""
        out = []
        for k, e in enumerate(self.graph.edges):
            l, fib = self.lengths[e.id], self.fibres[e.id]
            for j, kap in enumerate(fib.kappa):
                n = 1
                while True:
                    val = (n * np.pi / l) ** 2 + kap
                    if val > lam_max:
                        break
                    if val >= lam_min:
                        out.append((float(val), k, j, n))
                    n += 1
        out.sort()
        return out


def dirichlet_spectrum(qg: QuantumGraph, lam_max: float) -> np.ndarray:
    """All ``(n pi / l_e)^2 + kappa <= lam_max`` with multiplicity."""
    return np.array([p[0] for p in qg.dirichlet_points(lam_max)])


def decoupled_dtn(qg: QuantumGraph, z) -> np.ndarray:
    blocks = [edge_dtn(qg.lengths[e.id], qg.fibres[e.id], z) for e in qg.graph.edges]
    n = sum(b.shape[0] for b in blocks)
    out = np.zeros((n, n), dtype=complex)
    o = 0
    for b in blocks:
        m = b.shape[0]
        out[o:o + m, o:o + m] = b
        o += m
    return out


def averaged_dtn(qg: QuantumGraph, z) -> np.ndarray:
    """Standard vertex spaces: ``(1/deg v) sum_e (C_e phi(v) - S_e phi(v_e))``."""
    if not qg.standard:
        raise InputError("averaged DtN formula needs standard vertex spaces")
    G = qg.graph
    dims = qg.vertex_dims()
    off = np.concatenate([[0], np.cumsum(dims)]).astype(int)
    out = np.zeros((off[-1], off[-1]), dtype=complex)
    vpos = G.vindex
    for e in G.edges:
        C, S = _edge_blocks(qg.lengths[e.id], qg.fibres[e.id], z)
        for v, w in ((e.src, e.dst), (e.dst, e.src)):
            a, b = vpos[v], vpos[w]
            dv = G.degree(v)
            out[off[a]:off[a + 1], off[a]:off[a + 1]] += C / dv
            out[off[a]:off[a + 1], off[b]:off[b + 1]] -= S / dv
    return out


def iota_dtn(qg: QuantumGraph, z) -> np.ndarray:
    """``iota* Lambda_dec(z) iota`` with the weight-aware adjoint of ``iota``."""
    J = qg.iota()
    w = qg.boundary_weights()
    return (J.conj().T @ decoupled_dtn(qg, z) @ J) / w[:, None]


def qg_dtn(qg: QuantumGraph, z, method: str | None = None) -> np.ndarray:
    """Coupled DtN on the vertex boundary space (coefficients w.r.t. ``boundary_weights``)."""
    method = method or ("averaged" if qg.standard else "iota")
    if method == "averaged":
        return averaged_dtn(qg, z)
    if method == "iota":
        return iota_dtn(qg, z)
    raise ValueError(f"unknown method {method!r}")


def equilateral_dtn(G: Graph, K0, z) -> np.ndarray:
    """``(1 x 1/s(z-K0)) (1 x c(z-K0) - 1 + Lap_G x 1)`` on ``l2(V, deg) x K``."""
    fib = K0 if isinstance(K0, FibreData) else FibreData.from_matrix(K0)
    w = complex(z) - fib.kappa
    s = _check_pole(1.0, w)
    U = fib.U
    Sinv = (U * (1.0 / s)[None, :]) @ U.conj().T
    Cm = (U * cfun(w)[None, :]) @ U.conj().T
    n, d = G.n_vertices, fib.dim
    lap = normalized_laplacian(G).coeffs
    inner = np.kron(np.eye(n), Cm) - np.eye(n * d) + np.kron(lap, np.eye(d))
    return np.kron(np.eye(n), Sinv) @ inner


def _hermitian_eigs(L: np.ndarray, w: np.ndarray, vectors: bool = False):
    sw = np.sqrt(w)
    A = sw[:, None] * L / sw[None, :]
    A = 0.5 * (A + A.conj().T)
    return np.linalg.eigh(A) if vectors else np.linalg.eigvalsh(A)


# ------------------------------------------------------------ secular solver

@dataclass
class SpectrumReport:
    eigenvalues: list                  # [(lambda, multiplicity)], ascending
    unresolved_windows: list           # [(lo, hi)]
    method: str
    residuals: list = field(default_factory=list)

    def values(self) -> np.ndarray:
        """Eigenvalues repeated by multiplicity."""
        return np.array([lam for lam, m in self.eigenvalues for _ in range(m)])

    def outside_windows(self) -> np.ndarray:
        v = self.values()
        keep = np.ones(v.size, bool)
        for lo, hi in self.unresolved_windows:
            keep &= ~((v >= lo) & (v <= hi))
        return v[keep]

    def to_json(self) -> dict:
        return {"method": self.method,
                "eigenvalues": [{"lambda": lam, "multiplicity": m} for lam, m in self.eigenvalues],
                "unresolved_windows": [list(w) for w in self.unresolved_windows]}


def _merge_roots(roots, rel: float = 1e-8):
    roots = sorted(roots)
    out = []
    for r in roots:
        if out and abs(r - out[-1][0]) <= rel * max(1.0, abs(r)):
            lam, m, acc = out[-1]
            out[-1] = (lam, m + 1, acc + [r])
        else:
            out.append((r, 1, [r]))
    return [(float(np.mean(acc)), m) for _, m, acc in out]


def _windows(points, half_width):
    wins = []
    for p in sorted(points):
        lo, hi = p - half_width, p + half_width
        if wins and lo <= wins[-1][1]:
            wins[-1][1] = hi
            wins[-1][2].append(p)
        else:
            wins.append([lo, hi, [p]])
    return wins


def _branch_roots(f, xs, vals, tol):
    """Roots of every sorted branch on the grid ``xs`` with values ``vals`` (shape n x m)."""
    roots = []
    for k in range(vals.shape[1]):
        y = vals[:, k]
        for i in range(len(xs) - 1):
            if abs(y[i]) <= tol:
                roots.append(xs[i])
            elif y[i] * y[i + 1] < 0 and abs(y[i + 1]) > tol:
                roots.append(brentq(lambda x: f(x)[k], xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15))
        if len(xs) and abs(y[-1]) <= tol:
            roots.append(xs[-1])
    return roots


def pole_directions(qg: QuantumGraph, point: float, rel: float = 1e-9) -> np.ndarray:
    """Boundary directions carrying the pole of the DtN at a Dirichlet point.

    An edge mode ``(n, u)`` contributes ``(u, -(-1)^n u)`` on the two edge
    ends; these are pulled back by ``iota*``.  Returns columns orthonormal
    for the weighted boundary inner product.
    """
    G = qg.graph
    J = qg.iota()
    w = qg.boundary_weights()
    eoff = np.concatenate([[0], np.cumsum([2 * qg.fibres[e.id].dim for e in G.edges])]).astype(int)
    vecs = []
    for val, k, j, n in qg.dirichlet_points(point * (1 + rel) + rel, point - rel * max(1, abs(point)) - rel):
        if abs(val - point) > rel * max(1.0, abs(point)):
            continue
        e = G.edges[k]
        fib = qg.fibres[e.id]
        d = fib.dim
        v = np.zeros(eoff[-1], dtype=complex)
        v[eoff[k]:eoff[k] + d] = fib.U[:, j]
        v[eoff[k] + d:eoff[k] + 2 * d] = -((-1) ** n) * fib.U[:, j]
        vecs.append((J.conj().T @ v) / w)
    if not vecs:
        return np.zeros((w.size, 0), dtype=complex)
    A = np.sqrt(w)[:, None] * np.stack(vecs, axis=1)
    U = orth(A, rcond=1e-10)
    return U / np.sqrt(w)[:, None]


def _schur_eigs(qg: QuantumGraph, P: np.ndarray, lam: float, method: str | None = None) -> np.ndarray:
    """Eigenvalues of the Schur complement of the DtN onto the complement of ``ran P``."""
    w = qg.boundary_weights()
    sw = np.sqrt(w)
    L = qg_dtn(qg, lam, method)
    A = sw[:, None] * L / sw[None, :]
    A = 0.5 * (A + A.conj().T)
    Pu = sw[:, None] * P
    m, r = A.shape[0], Pu.shape[1]
    if r == 0:
        return np.linalg.eigvalsh(A)
    Q, _ = np.linalg.qr(np.hstack([Pu, np.eye(m)]))
    Q = Q[:, :m]
    Q[:, :r] = np.linalg.qr(Pu)[0]
    Q = np.linalg.qr(Q)[0]
    B = Q.conj().T @ A @ Q
    A11, A12, A22 = B[:r, :r], B[:r, r:], B[r:, r:]
    S = A22 - A12.conj().T @ np.linalg.solve(A11, A12)
    return np.linalg.eigvalsh(0.5 * (S + S.conj().T))


def _resolve_window(qg: QuantumGraph, point: float, lo: float, hi: float, tol: float,
                    method: str | None = None):
    """Roots of the pole-free Schur complement inside a window around one Dirichlet point."""
    P = pole_directions(qg, point)
    if qg.boundary_weights().size == P.shape[1]:
        return []
    return _scan_roots(lambda x: _schur_eigs(qg, P, x, method), _window_grid(point, lo, hi), tol, point)


def _window_grid(point, lo, hi, n: int = 24):
    eta0 = min(1e-6 * max(1.0, abs(point)), 0.1 * (point - lo), 0.1 * (hi - point))
    left = point - np.geomspace(point - lo, eta0, n)
    right = point + np.geomspace(eta0, hi - point, n)
    return np.concatenate([left, right])


def _scan_roots(f, xs, tol, point):
    """Sign-change scan of the sorted values of ``f`` on ``xs`` which straddle ``point``.

    ``f`` cannot be evaluated at ``point``; a sign change across the gap
    around ``point`` is reported as a root at ``point`` itself.
    """
    vals = np.array([f(x) for x in xs])
    if vals.ndim != 2 or vals.shape[1] == 0:
        return []
    roots = []
    gap = int(np.searchsorted(xs, point))
    for k in range(vals.shape[1]):
        y = vals[:, k]
        for i in range(len(xs) - 1):
            if i == gap - 1:
                if y[i] * y[i + 1] <= 0 or min(abs(y[i]), abs(y[i + 1])) <= tol:
                    roots.append(point)
                continue
            if abs(y[i]) <= tol and i != gap:
                roots.append(xs[i])
            elif y[i] * y[i + 1] < 0:
                roots.append(brentq(lambda x: f(x)[k], xs[i], xs[i + 1], xtol=1e-14, rtol=1e-15))
    return roots


def dtn_eigenvalues(qg: QuantumGraph, lam: float) -> np.ndarray:
    return _hermitian_eigs(qg_dtn(qg, lam), qg.boundary_weights())


def neumann_spectrum(qg: QuantumGraph, window, grid_step: float | None = None,
                     tol: float = 1e-10, method: str | None = None) -> SpectrumReport:
    """Zeros of the DtN eigenvalue branches on ``window``.

    ``method`` picks the DtN realization (see :func:`qg_dtn`).

    Between Dirichlet points the sorted eigenvalues of the Hermitian DtN are
    continuous and decreasing, so each sign change brackets one root.  Around
    each Dirichlet point a window of half-width ``max(2 grid_step, 1e-6)``
    is reported as unresolved; inside it the pole directions are projected
    out and the analytic Schur complement is scanned instead, which recovers
    eigenfunctions whose boundary values are nonzero.
    """
    lo, hi = map(float, window)
    if not lo < hi:
        raise InputError("window must satisfy lo < hi")
    step = (hi - lo) / 2000 if grid_step is None else float(grid_step)
    if step <= 0:
        raise InputError("grid step must be positive")
    hw = max(2 * step, 1e-6)
    pts = sorted({round(p[0], 12) for p in qg.dirichlet_points(hi + hw, lo - hw)})
    wins = _windows(pts, hw)
    n = int(round((hi - lo) / step))
    grid = lo + step * np.arange(n + 1)
    grid[-1] = hi
    w = qg.boundary_weights()
    f = lambda x: _hermitian_eigs(qg_dtn(qg, x, method), w)

    # segments between windows
    edges = [lo]
    for a, b, _ in wins:
        edges.extend([a, b])
    edges.append(hi)
    roots = []
    for a, b in zip(edges[::2], edges[1::2]):
        a, b = max(a, lo), min(b, hi)
        if b <= a:
            continue
        xs = np.concatenate([[a], grid[(grid > a) & (grid < b)], [b]])
        vals = np.array([f(x) for x in xs])
        roots.extend(_branch_roots(f, xs, vals, tol))
    unresolved = []
    for a, b, points in wins:
        unresolved.append((float(a), float(b)))
        if len(points) == 1:
            roots.extend(r for r in _resolve_window(qg, points[0], a, b, tol, method) if lo <= r <= hi)
    merged = _merge_roots(roots)
    residuals = []
    for lam, _ in merged:
        if any(abs(lam - p) < hw for p in pts):
            near = min(pts, key=lambda p: abs(p - lam))
            P = pole_directions(qg, near)
            if abs(lam - near) > 1e-9 * max(1, near):
                ev = _schur_eigs(qg, P, lam, method)
            else:
                # symmetric average cancels the linear term at the pole
                eta = 3e-6 * max(1.0, near)
                ev = 0.5 * (_schur_eigs(qg, P, near - eta, method) + _schur_eigs(qg, P, near + eta, method))
        else:
            ev = f(lam)
        residuals.append(float(np.min(np.abs(ev))) if ev.size else 0.0)
    return SpectrumReport(merged, unresolved, "secular", residuals)


# ------------------------------------------------------------ equilateral closed form

def equilateral_spectrum(G: Graph, K0, window, grid_step: float | None = None) -> SpectrumReport:
    """``lam = kappa + (+-arccos(1 - mu) + 2 pi m)^2`` for ``kappa`` in spec K0, ``mu`` in spec Lap_G.

    Points on the Dirichlet spectrum ``(n pi)^2 + kappa`` are excluded;
    windows around them are reported as unresolved.
    """
    if not is_connected(G):
        raise InputError("equilateral spectrum needs a connected graph")
    lo, hi = map(float, window)
    step = (hi - lo) / 2000 if grid_step is None else float(grid_step)
    hw = max(2 * step, 1e-6)
    kappas = FibreData.from_matrix(K0).kappa
    mus = eigvalsh(normalized_laplacian(G))
    if np.any(mus < -1e-10) or np.any(mus > 2 + 1e-10):
        raise MuOutOfRange(f"Laplacian eigenvalue outside [0, 2]: {mus}")
    dpts = []
    for kap in kappas:
        n = 1
        while (n * np.pi) ** 2 + kap <= hi + hw:
            if (n * np.pi) ** 2 + kap >= lo - hw:
                dpts.append((n * np.pi) ** 2 + kap)
            n += 1
    # 0 and 2 are structural (connected, bipartite); arccos is ill-conditioned there
    mus = np.where(np.abs(mus) < 1e-9, 0.0, np.where(np.abs(mus - 2) < 1e-9, 2.0, mus))
    vals = []
    for kap in kappas:
        for mu in mus:
            theta = float(np.arccos(np.clip(1 - mu, -1.0, 1.0)))
            m = 0
            while (2 * np.pi * m - np.pi) ** 2 + kap <= hi or m == 0:
                cands = {theta + 2 * np.pi * m}
                if m >= 1:
                    cands.add(2 * np.pi * m - theta)
                # theta in {0, pi} gives coinciding frequencies; keep one
                for x in sorted(cands):
                    lam = kap + x * x
                    if lo <= lam <= hi:
                        vals.append(lam)
                m += 1
    vals = np.array(vals)
    keep = np.array([all(abs(v - d) > 1e-9 * max(1, d) for d in dpts) for v in vals], bool)
    merged = _merge_roots(vals[keep].tolist() if vals.size else [])
    wins = [(float(a), float(b)) for a, b, _ in _windows(sorted(set(np.round(dpts, 12))), hw)]
    return SpectrumReport(merged, wins, "equilateral")


# ------------------------------------------------------------ finite differences

def _vertex_projector(qg: QuantumGraph, v: str) -> np.ndarray:
    dmax = qg.max_dim(v)
    if qg.standard:
        G = qg.graph
        deg = G.degree(v)
        d = dmax // deg
        E = np.kron(np.ones((deg, 1)), np.eye(d)) / np.sqrt(deg)
    else:
        E = qg.bases[v]
    return E @ E.conj().T


def _fd_layout(qg: QuantumGraph, h: float):
    G = qg.graph
    info, off = [], 0
    for e in G.edges:
        l = qg.lengths[e.id]
        n = max(int(round(l / h)), 8)
        d = qg.fibres[e.id].dim
        info.append({"n": n, "h": l / n, "d": d, "off": off})
        off += (n - 1) * d
    return info, off


def fd_matrix(qg: QuantumGraph, h: float):
    """Sparse finite-difference operator on interior nodes with vertex values eliminated."""
    if h > qg.min_length / 8:
        raise MeshTooCoarse(f"mesh size {h} exceeds l0/8 = {qg.min_length / 8}")
    G = qg.graph
    info, N = _fd_layout(qg, h)

    def node(k, i, comp):
        """Global index of interior node ``i`` (1..n-1), fibre component ``comp`` on edge ``k``."""
        return info[k]["off"] + (i - 1) * info[k]["d"] + comp

    # end value at (edge k, end) as a linear combination of interior unknowns
    end_value = {}
    for v in G.vertices:
        blocks = []
        for k in G.incident(v):
            e = G.edges[k]
            blocks.append((k, "src" if e.src == v else "dst"))
        # two edges between the same pair of vertices can visit v twice only
        # through distinct edge indices, so the keys below are unique
        P = _vertex_projector(qg, v)
        dims = [info[k]["d"] for k, _ in blocks]
        boff = np.concatenate([[0], np.cumsum(dims)]).astype(int)
        D = np.concatenate([np.full(info[k]["d"], 3.0 / (2.0 * info[k]["h"])) for k, _ in blocks])
        I = np.eye(P.shape[0])
        Minv = np.linalg.inv((I - P) + P * D[None, :])
        T = Minv @ P                       # X = T Y
        # Y = (4 f_1 - f_2) / (2h) per block
        Y = np.zeros((P.shape[0], N), dtype=complex)
        for b, (k, end) in enumerate(blocks):
            n, hk, d = info[k]["n"], info[k]["h"], info[k]["d"]
            i1, i2 = (1, 2) if end == "src" else (n - 1, n - 2)
            for c in range(d):
                Y[boff[b] + c, node(k, i1, c)] += 4.0 / (2 * hk)
                Y[boff[b] + c, node(k, i2, c)] -= 1.0 / (2 * hk)
        X = T @ Y
        for b, (k, end) in enumerate(blocks):
            end_value[(k, end)] = X[boff[b]:boff[b + 1], :]
    rows, cols, data = [], [], []
    dense_rows = {}
    for k, e in enumerate(G.edges):
        n, hk, d = info[k]["n"], info[k]["h"], info[k]["d"]
        K = qg.fibres[e.id].K
        for i in range(1, n):
            for c in range(d):
                r = node(k, i, c)
                rows.append(r); cols.append(r); data.append(2.0 / hk ** 2)
                for c2 in range(d):
                    if K[c, c2] != 0:
                        rows.append(r); cols.append(node(k, i, c2)); data.append(K[c, c2])
                for j in (i - 1, i + 1):
                    if 1 <= j <= n - 1:
                        rows.append(r); cols.append(node(k, j, c)); data.append(-1.0 / hk ** 2)
                    else:
                        end = "src" if j == 0 else "dst"
                        dense_rows.setdefault(r, np.zeros(N, dtype=complex))
                        dense_rows[r] -= end_value[(k, end)][c] / hk ** 2
    A = sp.coo_matrix((data, (rows, cols)), shape=(N, N), dtype=complex).tocsr()
    if dense_rows:
        r_idx = np.array(sorted(dense_rows))
        extra = np.array([dense_rows[r] for r in r_idx])
        nz = np.nonzero(np.abs(extra) > 0)
        A = A + sp.csr_matrix((extra[nz], (r_idx[nz[0]], nz[1])), shape=(N, N))
    return A, info, end_value


def fd_oracle(qg: QuantumGraph, h: float, count: int, shift: float = -1.0) -> SpectrumReport:
    """Lowest ``count`` eigenvalues of the finite-difference discretization."""
    A, _, _ = fd_matrix(qg, h)
    N = A.shape[0]
    if count >= N - 1:
        vals = np.linalg.eigvals(A.toarray())
    else:
        vals = eigs(A.tocsc(), k=count, sigma=shift, which="LM", return_eigenvectors=False)
    vals = np.sort(vals.real)[:count]
    return SpectrumReport([(float(v), 1) for v in vals], [], "finite-difference")


def fd_vertex_residual(qg: QuantumGraph, h: float, count: int = 4) -> float:
    """Largest ``|P_v (oriented derivatives)|`` of FD eigenvectors, with third-order stencils.

    The discretization imposes the flux condition with second-order
    stencils; re-measuring with a more accurate stencil exposes the
    ``O(h^2)`` consistency error.
    """
    A, info, end_value = fd_matrix(qg, h)
    _, vecs = eigs(A.tocsc(), k=count, sigma=-1.0, which="LM")
    G = qg.graph
    worst = 0.0
    for col in range(vecs.shape[1]):
        u = vecs[:, col]
        u = u / np.max(np.abs(u))
        for v in G.vertices:
            parts = []
            for k in G.incident(v):
                e = G.edges[k]
                end = "src" if e.src == v else "dst"
                n, hk, d = info[k]["n"], info[k]["h"], info[k]["d"]
                f0 = end_value[(k, end)] @ u
                idx = [1, 2, 3] if end == "src" else [n - 1, n - 2, n - 3]
                fs = [u[info[k]["off"] + (i - 1) * d: info[k]["off"] + i * d] for i in idx]
                parts.append((11 * f0 - 18 * fs[0] + 9 * fs[1] - 2 * fs[2]) / (6 * hk))
            P = _vertex_projector(qg, v)
            worst = max(worst, float(np.linalg.norm(P @ np.concatenate(parts))))
    return worst


# ------------------------------------------------------------ dispersion

def dispersion(qg: QuantumGraph, window, grid_step: float | None = None):
    """Rows ``(lambda, branch_index, eigenvalue)`` of DtN eigenvalue branches on the grid.

    Branch labels follow eigenvector continuity (Hungarian matching of
    overlaps); grid points on a Dirichlet pole give NaN.
    """
    lo, hi = map(float, window)
    step = (hi - lo) / 2000 if grid_step is None else float(grid_step)
    n = int(round((hi - lo) / step))
    grid = lo + step * np.arange(n + 1)
    w = qg.boundary_weights()
    m = w.size
    rows = []
    prev = None
    for lam in grid:
        try:
            vals, vecs = _hermitian_eigs(qg_dtn(qg, lam), w, vectors=True)
        except DirichletPole:
            rows.extend((float(lam), b, float("nan")) for b in range(m))
            prev = None
            continue
        if prev is None:
            order = np.arange(m)
        else:
            overlap = np.abs(prev.conj().T @ vecs) ** 2
            r, c = linear_sum_assignment(-overlap)
            order = np.empty(m, int)
            order[r] = c
        vecs = vecs[:, order]
        rows.extend((float(lam), b, float(vals[order][b])) for b in range(m))
        prev = vecs
    return rows


# ------------------------------------------------------------ JSON

def _parse_complex_matrix(obj, field: str) -> np.ndarray:
    try:
        rows = []
        for row in obj:
            rows.append([complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in row])
        return np.array(rows, dtype=complex)
    except (TypeError, ValueError, IndexError) as exc:
        raise InputError(f"quantum graph JSON: invalid matrix in field '{field}'") from exc


def qgraph_from_json(obj) -> QuantumGraph:
    if not isinstance(obj, dict) or "graph" not in obj:
        raise InputError("quantum graph JSON: missing field 'graph'")
    G, _ = graph_from_json(obj["graph"])
    lengths, fibres = {}, {}
    for k, rec in enumerate(obj.get("edges", [])):
        if "id" not in rec:
            raise InputError(f"quantum graph JSON: edges[{k}] lacks field 'id'")
        if rec["id"] not in G.eindex:
            raise InputError(f"quantum graph JSON: edges[{k}].id {rec['id']!r} is not an edge of the graph")
        try:
            lengths[rec["id"]] = float(rec.get("length", 1.0))
        except (TypeError, ValueError) as exc:
            raise InputError(f"quantum graph JSON: edges[{k}].length is not a number") from exc
        d = int(rec.get("fibre_dim", 1))
        K = _parse_complex_matrix(rec["K"], f"edges[{k}].K") if "K" in rec else np.zeros((d, d))
        if K.shape != (d, d):
            raise InputError(f"quantum graph JSON: edges[{k}].K does not match fibre_dim")
        fibres[rec["id"]] = K
    vs = obj.get("vertex_spaces", "standard")
    if not isinstance(vs, str):
        vs = {v: _parse_complex_matrix(b, f"vertex_spaces.{v}") for v, b in vs.items()}
    return QuantumGraph(G, lengths, fibres, vs)


def qgraph_to_json(qg: QuantumGraph) -> dict:
    def cm(a):
        return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(a)]

    out = {"graph": graph_to_json(qg.graph),
           "edges": [{"id": e.id, "length": qg.lengths[e.id], "fibre_dim": qg.fibres[e.id].dim,
                      "K": cm(qg.fibres[e.id].K)} for e in qg.graph.edges]}
    out["vertex_spaces"] = "standard" if qg.standard else {v: cm(B) for v, B in qg.bases.items()}
    return out
