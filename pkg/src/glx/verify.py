"""Randomized and fixed verification suites behind ``glx verify``.

Every suite returns ``{"suite", "cases", "max_residual", "pass", ...}``.
Randomness comes from one seed through a counter-based generator keyed by
the suite name and the case index, so a case does not depend on which other
cases or suites ran before it.
"""

from __future__ import annotations

import os
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .abvp import (Abvp, dirichlet_spectrum, dtn_crosscheck, graph_abvp, green_residual,
                   krein_residual, neumann_spectrum, secular_zeros, spectral_relation_check)
from .coupling import (EdgeCouplingBlueprint, line_graph_dtn_check, standard_subspaces,
                       trivial_vertex_couple)
from .graph import (Graph, complete_graph, cycle_graph, path_graph, random_connected_graph)
from .quasi_iso import closeness_sweep, sampled_defects, trivial_limit_ids

KREIN_Z = (-1.0, -2.0, 0.5 + 1.0j)


def case_rng(seed: int, suite: str, case: int) -> np.random.Generator:
    """Philox stream for one case of one suite."""
    ss = np.random.SeedSequence(seed, spawn_key=(zlib.crc32(suite.encode()), case))
    return np.random.Generator(np.random.Philox(ss))


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("GLX_THREADS", "1")))
    except ValueError:
        return 1


def _map_cases(fn, n: int) -> list:
    threads = min(thread_count(), n)
    if threads <= 1:
        return [fn(k) for k in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, range(n)))


def random_graph_abvp(rng: np.random.Generator, max_vertices: int = 50) -> Abvp:
    """Random connected graph with a random non-empty boundary vertex set."""
    n = int(rng.integers(2, max_vertices + 1))
    G = random_connected_graph(rng, n, int(rng.integers(0, n)))
    nb = int(rng.integers(1, n + 1))
    boundary = [G.vertices[k] for k in np.sort(rng.choice(n, nb, replace=False))]
    return graph_abvp(G, boundary)


def _crandn(rng, n) -> np.ndarray:
    return rng.standard_normal(n) + 1j * rng.standard_normal(n)


def _report(suite: str, cases: int, residual: float, ok: bool, **extra) -> dict:
    out = {"suite": suite, "cases": int(cases), "max_residual": float(residual), "pass": bool(ok)}
    out.update(extra)
    return out


# ------------------------------------------------------------ suites

def suite_krein(seed: int, cases: int = 100) -> dict:
    def one(k):
        P = random_graph_abvp(case_rng(seed, "krein", k))
        res = [krein_residual(P, z) for z in KREIN_Z]
        res.append(dtn_crosscheck(P, -1.0))
        return max(res)
    res = _map_cases(one, cases)
    worst = max(res)
    return _report("krein", cases, worst, worst <= 1e-10, threshold=1e-10)


def suite_green(seed: int, cases: int = 100) -> dict:
    def one(k):
        rng = case_rng(seed, "green", k)
        P = random_graph_abvp(rng)
        worst = 0.0
        for _ in range(5):
            f, g = _crandn(rng, P.space.dim), _crandn(rng, P.space.dim)
            worst = max(worst, green_residual(P, f, g) / (P.form_norm(f) * P.form_norm(g)))
        return worst
    res = _map_cases(one, cases)
    worst = max(res)
    return _report("green", cases, worst, worst <= 1e-12, threshold=1e-12)


def _specrel_case(P: Abvp) -> tuple[float, bool]:
    """Largest mismatch between Neumann eigenvalues and secular zeros, and the check flags."""
    ev = neumann_spectrum(P)
    ds = dirichlet_spectrum(P)
    zeros = np.array([r for r, m in secular_zeros(P) for _ in range(m)])
    flags_ok = True
    worst = 0.0
    for lam in ev:
        if ds.size and np.min(np.abs(ds - lam)) <= 1e-6:
            continue
        a, b = spectral_relation_check(P, float(lam))
        flags_ok &= a and b
        worst = max(worst, np.min(np.abs(zeros - lam)) if zeros.size else np.inf)
    for r in zeros:
        worst = max(worst, float(np.min(np.abs(ev - r))))
    return worst, flags_ok


def suite_specrel(seed: int, cases: int = 100) -> dict:
    K2 = graph_abvp(path_graph(2, ["a", "b"]), ["a"])
    fixed = {"K2@0": spectral_relation_check(K2, 0.0), "K2@0.5": spectral_relation_check(K2, 0.5)}
    fixed_ok = fixed["K2@0"] == (True, True) and fixed["K2@0.5"] == (False, False)

    def one(k):
        return _specrel_case(random_graph_abvp(case_rng(seed, "specrel", k)))
    res = _map_cases(one, cases)
    worst = max(r[0] for r in res)
    ok = fixed_ok and all(r[1] for r in res) and worst <= 1e-8
    return _report("specrel", cases + 2, worst, ok,
                   fixtures={k: list(v) for k, v in fixed.items()})


def suite_subdivision(seed: int) -> dict:
    fixtures = {"C3": cycle_graph(3), "C4": cycle_graph(4), "C6": cycle_graph(6),
                "K4": complete_graph(4)}
    details, worst, ok = {}, 0.0, True
    for name, G in fixtures.items():
        rep = line_graph_dtn_check(G, -1.0)
        res = max(rep.fit_residual, rep.closed_form_error, rep.spectrum_error)
        worst = max(worst, res)
        ok &= rep.fit_residual <= 1e-10 and rep.closed_form_supported and rep.spectrum_error <= 1e-8
        details[name] = {
            "r": rep.r, "alpha_fit": rep.alpha_fit.real, "beta_fit": rep.beta_fit.real,
            "alpha_closed": rep.alpha_closed.real, "beta_closed": rep.beta_closed.real,
            "alpha_uncorrected": rep.alpha_uncorrected.real,
            "fit_residual": rep.fit_residual, "spectrum_error": rep.spectrum_error,
            "uncorrected_constant_supported": rep.uncorrected_constant_supported,
            "uncorrected_map_error": rep.uncorrected_map_error,
        }
    return _report("subdivision-corollary", len(fixtures), worst, ok, fixtures=details,
                   spectral_map="mu = r lam (2 - lam) / (r - 1), lam != 1")


def path_edge_blueprint(G: Graph, interior: int = 2) -> EdgeCouplingBlueprint:
    """Every edge carries a discrete path with ``interior`` inner vertices; ends are its boundary."""
    n = interior + 2
    names = [f"p{k}" for k in range(n)]
    abvps = {e.id: graph_abvp(path_graph(n, names), [names[0], names[-1]]) for e in G.edges}
    blocks = {e.id: ([0], [1]) for e in G.edges}
    return EdgeCouplingBlueprint(G, abvps, blocks, standard_subspaces(G, abvps, blocks))


def suite_trivial_vertex(seed: int, samples: int = 100) -> dict:
    fixtures = {"C3": cycle_graph(3), "K4": complete_graph(4)}
    details, worst = {}, 0.0
    for k, (name, G) in enumerate(fixtures.items()):
        red = trivial_vertex_couple(path_edge_blueprint(G))
        rng = case_rng(seed, "thm314", k)
        iw = fw = 0.0
        for _ in range(samples):
            f = _crandn(rng, red.edge_coupled.space.dim)
            scale = red.edge_coupled.form_norm(f)
            iw = max(iw, red.intertwining_residual(f) / scale)
            fw = max(fw, red.form_residual(f) / scale**2)
        details[name] = {"intertwining": iw, "form": fw, "subspace": red.subspace_residual}
        worst = max(worst, iw, fw, red.subspace_residual)
    return _report("thm314", len(fixtures) * samples, worst, worst <= 1e-12, fixtures=details)


def suite_trivial_limit(seed: int, cases: int = 20, samples: int = 200) -> dict:
    path = trivial_limit_ids(graph_abvp(path_graph(3, ["a", "m", "b"]), ["a"]), a=1.0)
    want = {"lambda1": 1.0, "gamma": 4.0, "delta": 2 * np.sqrt(3)}
    const_err = max(abs(getattr(path, k) - v) for k, v in want.items())
    const_ok = const_err <= 1e-12 and np.isinf(path.mu1)

    def excess(T, rng):
        got = sampled_defects(T.point, T.target, T.ids, rng, samples)
        return max(0.0, max(got.values()) - T.delta)

    path_excess = excess(path, case_rng(seed, "prop210", 0))

    def one(k):
        rng = case_rng(seed, "prop210", k + 1)
        T = trivial_limit_ids(random_graph_abvp(rng, 20))
        return excess(T, rng), T.delta

    res = _map_cases(one, cases)
    worst = max([path_excess] + [r[0] for r in res])
    ok = const_ok and worst == 0.0
    return _report("prop210", cases + 1, max(worst, const_err), ok,
                   path={"lambda1": path.lambda1, "gamma": path.gamma, "mu1": path.mu1,
                         "a": path.a, "delta": path.delta},
                   deltas=[r[1] for r in res])


def suite_coupled_closeness(seed: int) -> dict:
    rows = closeness_sweep(cycle_graph(3))
    measured = [r[1] for r in rows]
    within = all(m <= b * (1 + 1e-9) for _, m, b in rows)
    monotone = all(b < a for a, b in zip(measured, measured[1:]))
    worst = max(max(0.0, m - b) for _, m, b in rows)
    eps = np.array([r[0] for r in rows])
    slope = float(np.polyfit(np.log(eps), np.log(measured), 1)[0])
    return _report("thm42", len(rows), worst, within and monotone,
                   sweep=[{"epsilon": e, "delta_measured": m, "delta_bound": b} for e, m, b in rows],
                   loglog_slope=slope)


SUITES = {
    "krein": suite_krein,
    "green": suite_green,
    "specrel": suite_specrel,
    "subdivision-corollary": suite_subdivision,
    "thm314": suite_trivial_vertex,
    "prop210": suite_trivial_limit,
    "thm42": suite_coupled_closeness,
}


def run_suite(name: str, seed: int) -> dict:
    if name == "all":
        reports = [SUITES[k](seed) for k in SUITES]
        return _report("all", sum(r["cases"] for r in reports),
                       max(r["max_residual"] for r in reports),
                       all(r["pass"] for r in reports), suites=reports)
    if name not in SUITES:
        raise KeyError(name)
    return SUITES[name](seed)
