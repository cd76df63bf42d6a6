"""Finite oriented multigraphs and the constructions built on them.

Vertices and edges carry string ids.  An edge ``(id, src, dst)`` runs from
its initial vertex ``src`` to its terminal vertex ``dst``; loops are rejected,
parallel edges are allowed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InputError, InvalidGraph, IsolatedVertex
from .hilbert import GramForm, LinOp, WeightedSpace


@dataclass(frozen=True)
class Edge:
    id: str
    src: str
    dst: str


class Graph:
    """Finite oriented graph with incidence and degree queries."""

    def __init__(self, vertices, edges):
        self.vertices = tuple(str(v) for v in vertices)
        self.edges = tuple(
            e if isinstance(e, Edge) else Edge(str(e[0]), str(e[1]), str(e[2])) for e in edges
        )
        problems = structural_problems(self)
        if problems:
            raise InvalidGraph("; ".join(msg for msg, _ in problems), [o for _, o in problems])
        self.vindex = {v: i for i, v in enumerate(self.vertices)}
        self.eindex = {e.id: i for i, e in enumerate(self.edges)}
        inc = {v: [] for v in self.vertices}
        for i, e in enumerate(self.edges):
            inc[e.src].append(i)
            inc[e.dst].append(i)
        self._incident = {v: tuple(ix) for v, ix in inc.items()}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def incident(self, v: str) -> tuple[int, ...]:
        """Indices of the edges adjacent to ``v`` (the set E_v), in edge order."""
        return self._incident[v]

    def degree(self, v: str) -> int:
        return len(self._incident[v])

    def degrees(self) -> np.ndarray:
        return np.array([self.degree(v) for v in self.vertices], dtype=float)

    def other_end(self, edge_index: int, v: str) -> str:
        e = self.edges[edge_index]
        return e.dst if e.src == v else e.src

    def adjacency(self) -> np.ndarray:
        """Adjacency matrix counting parallel edges."""
        A = np.zeros((self.n_vertices, self.n_vertices))
        for e in self.edges:
            i, j = self.vindex[e.src], self.vindex[e.dst]
            A[i, j] += 1
            A[j, i] += 1
        return A

    def incidence(self) -> np.ndarray:
        """Signed incidence matrix ``d`` with ``(d f)_e = f(dst) - f(src)``."""
        d = np.zeros((self.n_edges, self.n_vertices))
        for k, e in enumerate(self.edges):
            d[k, self.vindex[e.dst]] += 1.0
            d[k, self.vindex[e.src]] -= 1.0
        return d

    def __repr__(self) -> str:
        return f"Graph(|V|={self.n_vertices}, |E|={self.n_edges})"


def structural_problems(G) -> list[tuple[str, object]]:
    problems = []
    if len(set(G.vertices)) != len(G.vertices):
        problems.append(("duplicate vertex ids", "vertices"))
    if len({e.id for e in G.edges}) != len(G.edges):
        problems.append(("duplicate edge ids", "edges"))
    vs = set(G.vertices)
    for e in G.edges:
        if e.src == e.dst:
            problems.append((f"loop at edge {e.id!r}", e.id))
        if e.src not in vs or e.dst not in vs:
            problems.append((f"dangling incidence at edge {e.id!r}", e.id))
    return problems


def validate(G: Graph, rng: np.random.Generator | None = None, trials: int = 10) -> dict:
    """Check structure, the handshake count and the reordering identity.

    The identity ``sum_v sum_{e in E_v} a_e(v) = sum_e sum_{v = src, dst} a_e(v)``
    is evaluated for ``trials`` random assignments ``a``.
    """
    problems = structural_problems(G)
    if problems:
        raise InvalidGraph("; ".join(m for m, _ in problems), [o for _, o in problems])
    rng = np.random.default_rng(0) if rng is None else rng
    worst = 0.0
    for _ in range(trials):
        a = {(k, v): complex(*rng.standard_normal(2))
             for k, e in enumerate(G.edges) for v in (e.src, e.dst)}
        by_vertex = sum(a[(k, v)] for v in G.vertices for k in G.incident(v))
        by_edge = sum(a[(k, v)] for k, e in enumerate(G.edges) for v in (e.src, e.dst))
        scale = max(1.0, sum(abs(x) for x in a.values()))
        worst = max(worst, abs(by_vertex - by_edge) / scale)
    sum_deg = int(sum(G.degree(v) for v in G.vertices))
    ok = worst <= 1e-12 and sum_deg == 2 * G.n_edges
    if not ok:
        raise InvalidGraph("reordering identity or handshake violated")
    return {"valid": True, "sum_deg": sum_deg, "two_E": 2 * G.n_edges,
            "reordering_residual": worst}


def _node_names(G: Graph) -> tuple[dict, dict]:
    vids = set(G.vertices)
    clash = any(e.id in vids for e in G.edges)
    vname = {v: (f"v:{v}" if clash else v) for v in G.vertices}
    ename = {e.id: (f"e:{e.id}" if clash else e.id) for e in G.edges}
    return vname, ename


def _star_edge(G: Graph, vname, ename, k: int, v: str) -> Edge:
    e = G.edges[k]
    bid = f"{vname[v]}|{ename[e.id]}"
    if v == e.src:
        return Edge(bid, vname[v], ename[e.id])
    return Edge(bid, ename[e.id], vname[v])


def subdivision(G: Graph) -> Graph:
    """Subdivision graph on ``V`` followed by ``E``; edge ``(v, e)`` runs v->e iff v = src(e)."""
    vname, ename = _node_names(G)
    verts = [vname[v] for v in G.vertices] + [ename[e.id] for e in G.edges]
    edges = []
    for k, e in enumerate(G.edges):
        edges.append(_star_edge(G, vname, ename, k, e.src))
        edges.append(_star_edge(G, vname, ename, k, e.dst))
    return Graph(verts, edges)


def line_graph(G: Graph) -> Graph:
    """Line graph; each common endpoint of two edges yields one adjacency."""
    edges = []
    for v in G.vertices:
        for i, j in itertools.combinations(G.incident(v), 2):
            a, b = G.edges[i].id, G.edges[j].id
            edges.append(Edge(f"{a}^{b}@{v}", a, b))
    return Graph([e.id for e in G.edges], edges)


@dataclass(frozen=True)
class StarComponent:
    center: str
    graph: Graph
    boundary: tuple[str, ...]
    edge_indices: tuple[int, ...]


def star_components(G: Graph) -> list[StarComponent]:
    """Star ``G_v`` per vertex: center ``v``, one leaf per edge in ``E_v``, leaves as boundary."""
    vname, ename = _node_names(G)
    out = []
    for v in G.vertices:
        ks = G.incident(v)
        leaves = tuple(ename[G.edges[k].id] for k in ks)
        edges = [_star_edge(G, vname, ename, k, v) for k in ks]
        out.append(StarComponent(v, Graph((vname[v],) + leaves, edges), leaves, ks))
    return out


def glue(graphs) -> Graph:
    """Union of graphs, identifying vertices with equal ids."""
    verts, seen, edges = [], set(), []
    for g in graphs:
        for v in g.vertices:
            if v not in seen:
                seen.add(v)
                verts.append(v)
        edges.extend(g.edges)
    return Graph(verts, edges)


def normalized_laplacian(G: Graph) -> LinOp:
    """``(Lap f)(v) = (1/deg v) sum_{e in E_v} (f(v) - f(v_e))`` on l2(V, deg)."""
    deg = G.degrees()
    if np.any(deg == 0):
        iso = [v for v, d in zip(G.vertices, deg) if d == 0]
        raise IsolatedVertex(f"isolated vertices: {iso}")
    space = WeightedSpace(deg, "vertices")
    coeffs = np.eye(G.n_vertices) - G.adjacency() / deg[:, None]
    return LinOp(space, space, coeffs)


def vertex_space(G: Graph, subset=None) -> WeightedSpace:
    """l2(subset, deg) with degrees computed in the whole graph."""
    verts = G.vertices if subset is None else subset
    deg = np.array([G.degree(v) for v in verts], dtype=float)
    if np.any(deg == 0):
        raise IsolatedVertex("isolated vertex in weighted vertex space")
    return WeightedSpace(deg, "vertices")


def energy_form(G: Graph) -> GramForm:
    """Energy form ``h(f) = sum_e |f(dst e) - f(src e)|^2`` on l2(V, deg)."""
    d = G.incidence()
    return GramForm(vertex_space(G), d.T @ d)


def energy(G: Graph, f) -> float:
    """Direct edge-sum evaluation of the energy form."""
    f = np.asarray(f)
    return float(sum(abs(f[G.vindex[e.dst]] - f[G.vindex[e.src]]) ** 2 for e in G.edges))


def subdivision_embedding(G: Graph, f) -> np.ndarray:
    """Extend ``f`` to the subdivision graph by averaging over each edge."""
    f = np.asarray(f)
    mid = np.array([(f[G.vindex[e.src]] + f[G.vindex[e.dst]]) / 2 for e in G.edges])
    return np.concatenate([f, mid]) if mid.size else f.copy()


def connected_components(G: Graph) -> list[list[str]]:
    parent = list(range(G.n_vertices))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for e in G.edges:
        a, b = find(G.vindex[e.src]), find(G.vindex[e.dst])
        if a != b:
            parent[a] = b
    groups: dict[int, list[str]] = {}
    for v in G.vertices:
        groups.setdefault(find(G.vindex[v]), []).append(v)
    return list(groups.values())


def is_connected(G: Graph) -> bool:
    return G.n_vertices > 0 and len(connected_components(G)) == 1


def is_regular(G: Graph) -> int | None:
    """Common degree if ``G`` is regular, else ``None``."""
    degs = {G.degree(v) for v in G.vertices}
    return degs.pop() if len(degs) == 1 else None


# ---------------------------------------------------------------- families

def path_graph(n: int, names=None) -> Graph:
    names = [str(i) for i in range(n)] if names is None else list(names)
    return Graph(names, [(f"e{i}", names[i], names[i + 1]) for i in range(n - 1)])


def cycle_graph(n: int) -> Graph:
    vs = [str(i) for i in range(n)]
    return Graph(vs, [(f"e{i}", vs[i], vs[(i + 1) % n]) for i in range(n)])


def complete_graph(n: int) -> Graph:
    vs = [str(i) for i in range(n)]
    es = [(f"e{i}_{j}", vs[i], vs[j]) for i, j in itertools.combinations(range(n), 2)]
    return Graph(vs, es)


def star_graph(k: int) -> Graph:
    vs = ["c"] + [f"l{i}" for i in range(k)]
    return Graph(vs, [(f"s{i}", "c", f"l{i}") for i in range(k)])


def petersen_graph() -> Graph:
    outer = [(i, (i + 1) % 5) for i in range(5)]
    spokes = [(i, i + 5) for i in range(5)]
    inner = [(5 + i, 5 + (i + 2) % 5) for i in range(5)]
    vs = [str(i) for i in range(10)]
    es = [(f"p{k}", str(a), str(b)) for k, (a, b) in enumerate(outer + spokes + inner)]
    return Graph(vs, es)


def random_connected_graph(rng: np.random.Generator, n: int, extra: int = 0,
                           multi: bool = False) -> Graph:
    """Random spanning tree plus ``extra`` random chords, with random orientations."""
    vs = [str(i) for i in range(n)]
    pairs = []
    order = rng.permutation(n)
    for k in range(1, n):
        pairs.append((int(order[k]), int(order[rng.integers(0, k)])))
    have = {frozenset(p) for p in pairs}
    attempts = 0
    while extra > 0 and n > 2 and attempts < 50 * (extra + 1):
        attempts += 1
        a, b = (int(x) for x in rng.choice(n, 2, replace=False))
        if not multi and frozenset((a, b)) in have:
            continue
        have.add(frozenset((a, b)))
        pairs.append((a, b))
        extra -= 1
    edges = []
    for k, (a, b) in enumerate(pairs):
        if rng.random() < 0.5:
            a, b = b, a
        edges.append((f"e{k}", vs[a], vs[b]))
    return Graph(vs, edges)


# ---------------------------------------------------------------- JSON

def graph_from_json(obj) -> tuple[Graph, list[str] | None]:
    """Parse ``{"vertices": [...], "edges": [{"id","src","dst"}], "boundary": [...]?}``."""
    if not isinstance(obj, dict):
        raise InputError("graph JSON must be an object")
    if "vertices" not in obj or not isinstance(obj["vertices"], list):
        raise InputError("graph JSON: missing or invalid field 'vertices'")
    if "edges" not in obj or not isinstance(obj["edges"], list):
        raise InputError("graph JSON: missing or invalid field 'edges'")
    edges = []
    for k, rec in enumerate(obj["edges"]):
        if not isinstance(rec, dict):
            raise InputError(f"graph JSON: edges[{k}] must be an object")
        for key in ("id", "src", "dst"):
            if key not in rec:
                raise InputError(f"graph JSON: edges[{k}] missing field '{key}'")
        edges.append(Edge(str(rec["id"]), str(rec["src"]), str(rec["dst"])))
    G = Graph([str(v) for v in obj["vertices"]], edges)
    boundary = obj.get("boundary")
    if boundary is not None:
        if not isinstance(boundary, list):
            raise InputError("graph JSON: field 'boundary' must be a list")
        boundary = [str(b) for b in boundary]
        unknown = [b for b in boundary if b not in G.vindex]
        if unknown:
            raise InputError(f"graph JSON: field 'boundary' names unknown vertices {unknown}")
    return G, boundary


def graph_to_json(G: Graph, boundary=None) -> dict:
    out = {"vertices": list(G.vertices),
           "edges": [{"id": e.id, "src": e.src, "dst": e.dst} for e in G.edges]}
    if boundary is not None:
        out["boundary"] = list(boundary)
    return out
