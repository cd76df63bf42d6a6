"""Command line interface: ``glx graph``, ``glx qg`` and ``glx verify``.

Exit codes: 0 when every check passed, 1 when a mathematical check failed,
2 for input or configuration errors.
"""

from __future__ import annotations

import json
import math
import sys

import click
import numpy as np

from .abvp import dtn, graph_abvp
from .errors import InputError, MathError
from .graph import (graph_from_json, graph_to_json, is_connected, line_graph,
                    normalized_laplacian, subdivision)
from .hilbert import eigvalsh
from .qgraph import dispersion, equilateral_spectrum, neumann_spectrum, qgraph_from_json
from .verify import SUITES, run_suite

SPECTRUM_HEADER = "lambda,multiplicity,method"
DISPERSION_HEADER = "lambda,branch_index,eigenvalue_of_dtn"


# ------------------------------------------------------------ serialization

def fmt_number(x) -> str:
    """17 significant digits; non-finite values become JSON strings."""
    x = float(x)
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    return format(x, ".17g")


def _csv_number(x) -> str:
    return fmt_number(x).strip('"')


def dumps(obj, indent: int = 0) -> str:
    """Deterministic JSON text with fixed float formatting."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_number(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return dumps({"re": obj.real, "im": obj.imag}, indent)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {dumps(v, indent + 1)}"
                 for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.number, str, bool)) or v is None for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _emit(text: str, path: str | None) -> None:
    if path is None:
        click.echo(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def _load_json(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read input {path!r}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"input {path!r} is not valid JSON: {exc.msg} at line {exc.lineno}") from exc


def _run(fn) -> None:
    """Run ``fn`` and translate library errors into exit codes."""
    try:
        code = fn()
    except InputError as exc:
        click.echo(f"input error: {exc}", err=True)
        sys.exit(2)
    except MathError as exc:
        click.echo(f"check failed: {type(exc).__name__}: {exc}", err=True)
        sys.exit(1)
    sys.exit(code or 0)


def _check_window(window, grid_step, tol):
    if window is None:
        raise InputError("--window LO HI is required")
    lo, hi = window
    if not lo < hi:
        raise InputError(f"--window needs LO < HI, got {lo} {hi}")
    if grid_step is not None and not grid_step > 0:
        raise InputError("--grid-step must be positive")
    if not tol > 0:
        raise InputError("--tol must be positive")


# ------------------------------------------------------------ commands

@click.group()
def main():
    """Boundary value problems on graphs: constructions, spectra and verification suites."""


@main.command("graph")
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
              help="Graph JSON file.")
@click.option("--subdivision", "mode", flag_value="subdivision", help="Emit the subdivision graph.")
@click.option("--line", "mode", flag_value="line", help="Emit the line graph.")
@click.option("--spectrum", "mode", flag_value="spectrum",
              help="Emit the normalized Laplacian spectrum.")
@click.option("--dtn", "z", type=str, default=None,
              help="Emit the DtN matrix at Z for the boundary listed in the input.")
@click.option("--out", "out", type=click.Path(dir_okay=False), default=None)
def graph_cmd(input_path, mode, z, out):
    """Graph constructions and spectra."""
    def go():
        G, boundary = graph_from_json(_load_json(input_path))
        if (mode is None) == (z is None):
            raise InputError("choose exactly one of --subdivision, --line, --spectrum, --dtn Z")
        if mode == "subdivision":
            rep = graph_to_json(subdivision(G))
        elif mode == "line":
            rep = graph_to_json(line_graph(G))
        elif mode == "spectrum":
            rep = {"spectrum": np.sort(eigvalsh(normalized_laplacian(G)))}
        else:
            try:
                zval = complex(z.replace(" ", ""))
            except ValueError as exc:
                raise InputError(f"--dtn: cannot parse {z!r} as a number") from exc
            if not boundary:
                raise InputError("graph JSON: field 'boundary' is required for --dtn")
            L = dtn(graph_abvp(G, boundary), zval).coeffs
            zout = zval.real if zval.imag == 0 else zval
            rep = {"z": zout, "boundary": boundary,
                   "dtn": {"re": L.real, "im": L.imag}}
        _emit(dumps(rep), out)
    _run(go)


@main.command("qg")
@click.argument("mode", type=click.Choice(["spectrum", "equilateral", "dispersion"]))
@click.option("--input", "input_path", required=True, type=click.Path(dir_okay=False),
              help="Quantum graph JSON file.")
@click.option("--window", nargs=2, type=float, default=None, help="Spectral window LO HI.")
@click.option("--grid-step", type=float, default=None, help="Scan step on the window.")
@click.option("--tol", type=float, default=1e-10, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), default=None,
              help="JSON report (spectrum modes) or CSV (dispersion); stdout if absent.")
@click.option("--csv", "csv_path", type=click.Path(dir_okay=False), default=None,
              help="CSV of eigenvalues (spectrum modes).")
def qg_cmd(mode, input_path, window, grid_step, tol, out, csv_path):
    """Quantum graph spectra and DtN dispersion curves."""
    def go():
        _check_window(window, grid_step, tol)
        qg = qgraph_from_json(_load_json(input_path))
        if mode == "dispersion":
            rows = dispersion(qg, window, grid_step)
            lines = [DISPERSION_HEADER] + [f"{_csv_number(lam)},{b},{_csv_number(v)}"
                                           for lam, b, v in rows]
            _emit("\n".join(lines), out)
            return 0
        if mode == "spectrum":
            rep = neumann_spectrum(qg, window, grid_step, tol)
        else:
            rep = _equilateral(qg, window, grid_step)
        _emit(dumps(rep.to_json()), out)
        if csv_path is not None:
            lines = [SPECTRUM_HEADER] + [f"{_csv_number(lam)},{m},{rep.method}"
                                         for lam, m in rep.eigenvalues]
            _emit("\n".join(lines), csv_path)
        return 0
    _run(go)


def _equilateral(qg, window, grid_step):
    G = qg.graph
    if any(abs(l - 1.0) > 1e-12 for l in qg.lengths.values()):
        raise InputError("equilateral mode needs every edge length equal to 1")
    Ks = [qg.fibres[e.id].K for e in G.edges]
    if any(K.shape != Ks[0].shape or np.max(np.abs(K - Ks[0])) > 1e-12 for K in Ks[1:]):
        raise InputError("equilateral mode needs the same K on every edge")
    if not qg.standard:
        raise InputError("equilateral mode needs standard vertex spaces")
    if not is_connected(G):
        raise InputError("equilateral mode needs a connected graph")
    return equilateral_spectrum(G, Ks[0], window, grid_step)


@main.command("verify")
@click.argument("suite", type=click.Choice(list(SUITES) + ["all"]))
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for all randomized cases.")
@click.option("--out", type=click.Path(dir_okay=False), default=None)
def verify_cmd(suite, seed, out):
    """Run a verification suite; exit 0 iff every check passes."""
    def go():
        if not 0 <= seed < 2**64:
            raise InputError("--seed must be a 64-bit unsigned integer")
        rep = run_suite(suite, seed)
        _emit(dumps(rep), out)
        return 0 if rep["pass"] else 1
    _run(go)


if __name__ == "__main__":
    main()
