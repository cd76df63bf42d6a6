"""Weighted finite-dimensional inner-product spaces and operators between them.

A :class:`WeightedSpace` is ``C^n`` with inner product
``<f, g> = sum_i f_i conj(g_i) w_i``.  Operators carry their domain and
codomain so that adjoints can include the weight ratio explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateNorm, DomainError, InputError, NotSelfAdjoint


@dataclass
class Tolerances:
    """Global numerical tolerances; mutate the module-level ``TOL`` to override."""

    rel: float = 1e-10
    truncation: float = 1e-12


TOL = Tolerances()
# operators this close to zero count as self-adjoint regardless of relative size
ABS_FLOOR = 1e-14


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.flags.writeable = False
    return a


class WeightedSpace:
    """``C^dim`` with positive diagonal weights."""

    __slots__ = ("weights", "label")

    def __init__(self, weights, label: str = ""):
        w = np.asarray(weights, dtype=float).reshape(-1)
        if w.size and (not np.all(np.isfinite(w)) or np.any(w <= 0)):
            raise InputError(f"weights of space {label!r} must be finite and > 0")
        self.weights = _frozen(w)
        self.label = label

    @classmethod
    def unweighted(cls, dim: int, label: str = "") -> "WeightedSpace":
        return cls(np.ones(dim), label)

    @property
    def dim(self) -> int:
        return int(self.weights.size)

    def inner(self, f, g) -> complex:
        return complex(np.sum(np.asarray(f) * np.conj(g) * self.weights))

    def norm(self, f) -> float:
        f = np.asarray(f)
        return float(np.sqrt(np.sum(np.abs(f) ** 2 * self.weights)))

    def gram(self) -> np.ndarray:
        return np.diag(self.weights)

    def compatible(self, other: "WeightedSpace") -> bool:
        return self.dim == other.dim and np.allclose(
            self.weights, other.weights, rtol=1e-14, atol=0.0
        )

    def __repr__(self) -> str:
        return f"WeightedSpace(dim={self.dim}, label={self.label!r})"


def direct_sum_spaces(spaces, label: str = "") -> WeightedSpace:
    ws = [s.weights for s in spaces]
    return WeightedSpace(np.concatenate(ws) if ws else np.zeros(0), label)


class LinOp:
    """Linear map ``domain -> codomain`` stored as a dense complex matrix."""

    __slots__ = ("domain", "codomain", "coeffs")

    def __init__(self, domain: WeightedSpace, codomain: WeightedSpace, coeffs):
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (codomain.dim, domain.dim):
            raise InputError(
                f"coefficient shape {c.shape} does not match "
                f"({codomain.dim}, {domain.dim})"
            )
        self.domain = domain
        self.codomain = codomain
        self.coeffs = _frozen(c)

    @classmethod
    def identity(cls, space: WeightedSpace) -> "LinOp":
        return cls(space, space, np.eye(space.dim))

    @classmethod
    def zero(cls, domain: WeightedSpace, codomain: WeightedSpace) -> "LinOp":
        return cls(domain, codomain, np.zeros((codomain.dim, domain.dim)))

    def __call__(self, f) -> np.ndarray:
        return self.coeffs @ np.asarray(f)

    def __matmul__(self, other: "LinOp") -> "LinOp":
        if not isinstance(other, LinOp):
            return NotImplemented
        return LinOp(other.domain, self.codomain, self.coeffs @ other.coeffs)

    def __add__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.domain, self.codomain, self.coeffs + other.coeffs)

    def __sub__(self, other: "LinOp") -> "LinOp":
        return LinOp(self.domain, self.codomain, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "LinOp":
        return LinOp(self.domain, self.codomain, scalar * self.coeffs)

    __rmul__ = __mul__

    def __neg__(self) -> "LinOp":
        return LinOp(self.domain, self.codomain, -self.coeffs)

    def shift(self, z) -> "LinOp":
        """Return ``T - z`` for an endomorphism ``T``."""
        return LinOp(self.domain, self.codomain, self.coeffs - z * np.eye(self.domain.dim))

    def adjoint(self) -> "LinOp":
        return adjoint(self)

    def __repr__(self) -> str:
        return f"LinOp({self.domain.dim} -> {self.codomain.dim})"


def adjoint(T: LinOp) -> LinOp:
    """Weight-aware adjoint: ``T*_ij = conj(T_ji) w_cod(j) / w_dom(i)``."""
    c = np.conj(T.coeffs.T) * T.codomain.weights[None, :] / T.domain.weights[:, None]
    return LinOp(T.codomain, T.domain, c)


class GramForm:
    """Hermitian positive-semidefinite sesquilinear form ``q(f, g) = g^H C f``."""

    __slots__ = ("space", "coeffs")

    def __init__(self, space: WeightedSpace, coeffs, check_psd: bool = True):
        c = np.asarray(coeffs, dtype=complex)
        if c.shape != (space.dim, space.dim):
            raise InputError("Gram matrix shape does not match its space")
        scale = max(1.0, float(np.max(np.abs(c)))) if c.size else 1.0
        if np.max(np.abs(c - c.conj().T), initial=0.0) > 1e-12 * scale:
            raise InputError("Gram matrix is not Hermitian")
        c = 0.5 * (c + c.conj().T)
        if check_psd and c.size:
            ev = np.linalg.eigvalsh(c)
            if ev[0] < -1e-12 * max(ev[-1], 1.0):
                raise InputError(f"Gram matrix is not positive semidefinite (min eig {ev[0]:.3e})")
        self.space = space
        self.coeffs = _frozen(c)

    def __call__(self, f, g=None) -> complex:
        f = np.asarray(f)
        g = f if g is None else np.asarray(g)
        return complex(np.conj(g) @ self.coeffs @ f)

    def __add__(self, other: "GramForm") -> "GramForm":
        return GramForm(self.space, self.coeffs + other.coeffs)


def plain_gram(space: WeightedSpace) -> GramForm:
    """Gram form of the space's own inner product."""
    return GramForm(space, np.diag(space.weights).astype(complex), check_psd=False)


def _sym_coords(T: LinOp) -> np.ndarray:
    sw = np.sqrt(T.domain.weights)
    return sw[:, None] * T.coeffs / sw[None, :]


def is_self_adjoint(T: LinOp, tol: float | None = None) -> bool:
    tol = TOL.rel if tol is None else tol
    if not T.domain.compatible(T.codomain):
        return False
    S = _sym_coords(T)
    return np.linalg.norm(S - S.conj().T) <= max(tol * np.linalg.norm(S), ABS_FLOOR)


def eigh(T: LinOp, tol: float | None = None):
    """Eigen-decomposition of a weighted-self-adjoint endomorphism.

    Returns ascending eigenvalues and a matrix whose columns are
    orthonormal with respect to the weighted inner product.
    """
    tol = TOL.rel if tol is None else tol
    if not T.domain.compatible(T.codomain):
        raise NotSelfAdjoint("domain and codomain differ")
    S = _sym_coords(T)
    nrm = np.linalg.norm(S)
    if np.linalg.norm(S - S.conj().T) > max(tol * nrm, ABS_FLOOR):
        raise NotSelfAdjoint(
            f"||T - T*|| = {np.linalg.norm(S - S.conj().T):.3e} exceeds {tol:.1e} ||T||"
        )
    vals, U = np.linalg.eigh(0.5 * (S + S.conj().T))
    V = U / np.sqrt(T.domain.weights)[:, None]
    return vals, V


def eigvalsh(T: LinOp, tol: float | None = None) -> np.ndarray:
    return eigh(T, tol)[0]


def _apply_scalar(f: Callable, vals: np.ndarray) -> np.ndarray:
    try:
        out = np.asarray(f(vals), dtype=complex)
        if out.shape != vals.shape:
            raise ValueError
    except (TypeError, ValueError):
        out = np.array([complex(f(float(x))) for x in vals])
    return out


def matfunc(K: LinOp, f: Callable, tol: float | None = None) -> LinOp:
    """``f(K) = sum_k f(lambda_k) v_k <., v_k>`` for self-adjoint ``K``."""
    vals, V = eigh(K, tol)
    with np.errstate(all="ignore"):
        fv = _apply_scalar(f, vals)
    if not np.all(np.isfinite(fv)):
        bad = vals[~np.isfinite(fv)]
        raise DomainError(f"function undefined at eigenvalue(s) {bad}")
    W = K.domain.weights
    coeffs = (V * fv[None, :]) @ (V.conj().T * W[None, :])
    return LinOp(K.domain, K.codomain, coeffs)


def _gram_root(C: np.ndarray) -> np.ndarray:
    """Return ``L`` with ``L^H L = C`` for Hermitian PSD ``C``."""
    s, U = np.linalg.eigh(0.5 * (C + C.conj().T))
    s = np.clip(s, 0.0, None)
    return np.sqrt(s)[:, None] * U.conj().T


def opnorm_matrix(T, dom_gram, cod_gram, trunc: float | None = None,
                  tol: float | None = None) -> float:
    """Operator norm of the matrix ``T`` between coordinate spaces with Grams."""
    trunc = TOL.truncation if trunc is None else trunc
    tol = TOL.rel if tol is None else tol
    T = np.asarray(T, dtype=complex)
    if T.size == 0:
        return 0.0
    Gd = np.asarray(dom_gram, dtype=complex)
    s, U = np.linalg.eigh(0.5 * (Gd + Gd.conj().T))
    smax = s[-1] if s.size else 0.0
    keep = s > trunc * smax if smax > 0 else np.zeros(s.shape, bool)
    tnorm = np.linalg.norm(T)
    if np.any(~keep) and tnorm > 0:
        leak = np.linalg.norm(T @ U[:, ~keep])
        if leak > tol * tnorm:
            raise DegenerateNorm(
                f"domain Gram has a null direction not annihilated by T (leak {leak:.3e})"
            )
    if not np.any(keep):
        return 0.0
    X = U[:, keep] / np.sqrt(s[keep])[None, :]
    L = _gram_root(np.asarray(cod_gram, dtype=complex))
    return float(np.linalg.norm(L @ T @ X, 2))


def opnorm(T: LinOp, dom_gram: GramForm | None = None, cod_gram: GramForm | None = None,
           trunc: float | None = None, tol: float | None = None) -> float:
    """``sup ||T f||_cod / ||f||_dom`` as the largest generalized singular value.

    Missing Grams default to the plain inner products of the spaces.
    """
    Gd = plain_gram(T.domain) if dom_gram is None else dom_gram
    Gc = plain_gram(T.codomain) if cod_gram is None else cod_gram
    return opnorm_matrix(T.coeffs, Gd.coeffs, Gc.coeffs, trunc, tol)


def orthonormal_null_space(A: np.ndarray, weights: np.ndarray | None = None,
                           tol: float = 1e-12) -> np.ndarray:
    """Columns spanning ``ker A``, orthonormal for the weighted inner product."""
    A = np.asarray(A, dtype=complex)
    n = A.shape[1]
    w = np.ones(n) if weights is None else np.asarray(weights, float)
    if A.shape[0] == 0:
        return np.eye(n, dtype=complex) / np.sqrt(w)[:, None]
    scaled = A / np.sqrt(w)[None, :]
    _, sv, Vh = np.linalg.svd(scaled)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > tol * smax)) if smax > 0 else 0
    Y = Vh[rank:].conj().T
    return Y / np.sqrt(w)[:, None]


def orthonormal_range(A: np.ndarray, weights: np.ndarray | None = None,
                      tol: float = 1e-12) -> np.ndarray:
    """Columns spanning ``ran A``, orthonormal for the weighted inner product."""
    A = np.asarray(A, dtype=complex)
    m = A.shape[0]
    w = np.ones(m) if weights is None else np.asarray(weights, float)
    if A.shape[1] == 0:
        return np.zeros((m, 0), dtype=complex)
    U, sv, _ = np.linalg.svd(np.sqrt(w)[:, None] * A, full_matrices=False)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > tol * smax)) if smax > 0 else 0
    return U[:, :rank] / np.sqrt(w)[:, None]
