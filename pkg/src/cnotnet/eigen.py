"""Symmetric eigensolvers.

``dense_symmetric_eigenvalues`` is a self-contained Householder
tridiagonalization followed by implicit-shift QL; it serves as the reference
for every spectral claim and deliberately does not call LAPACK.

``lanczos_extreme`` finds one extreme eigenvalue of a symmetric operator given
only its matrix-vector product, restricted to the orthogonal complement of a
set of known eigenvectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

DENSE_CEILING = 4096
SYMMETRY_TOL = 1e-12
_EPS = np.finfo(float).eps
_SQRT_EPS = math.sqrt(_EPS)


class EigenError(ValueError):
    pass


class LanczosNotConverged(RuntimeError):
    def __init__(self, estimate: float, residual: float, iterations: int):
        super().__init__(
            f"Lanczos did not converge after {iterations} iterations "
            f"(best estimate {estimate!r}, residual {residual:.3e})"
        )
        self.estimate = estimate
        self.residual = residual
        self.iterations = iterations


def householder_tridiagonalize(a: np.ndarray, want_q: bool = False):
    """Reduce symmetric ``a`` to tridiagonal form ``Q T Q^T``.

    Returns ``(diag, offdiag, Q)``; ``Q`` is None unless requested.
    """
    a = np.array(a, dtype=float, copy=True)
    n = a.shape[0]
    q = np.eye(n) if want_q else None
    for k in range(n - 2):
        x = a[k + 1:, k]
        norm_x = math.sqrt(float(x @ x))
        if norm_x == 0.0:
            continue
        alpha = -math.copysign(norm_x, x[0])
        v = x.copy()
        v[0] -= alpha
        norm_v = math.sqrt(float(v @ v))
        if norm_v == 0.0:
            continue
        v /= norm_v
        sub = a[k + 1:, k + 1:]
        p = sub @ v
        w = p - float(v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        a[k + 1, k] = a[k, k + 1] = alpha
        a[k + 2:, k] = 0.0
        a[k, k + 2:] = 0.0
        if q is not None:
            qs = q[:, k + 1:]
            qs -= 2.0 * np.outer(qs @ v, v)
    diag = np.diag(a).copy()
    off = np.diag(a, 1).copy()
    return diag, off, q


def tridiagonal_ql(diag, offdiag, z: np.ndarray | None = None, max_sweeps: int = 60):
    """Implicit-shift QL on a symmetric tridiagonal matrix.

    ``z`` (if given) is overwritten with ``z @ R`` where ``R`` holds the
    eigenvectors of the tridiagonal matrix, so passing the Householder ``Q``
    yields eigenvectors of the original matrix. Eigenvalues are unsorted.
    """
    d = [float(x) for x in diag]
    n = len(d)
    e = [float(x) for x in offdiag] + [0.0]
    # Rotations act on rows of zt, which are contiguous.
    zt = None if z is None else np.ascontiguousarray(z.T)
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise EigenError("QL iteration failed to converge")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if zt is not None:
                    hi = zt[i + 1].copy()
                    zt[i + 1] = s * zt[i] + c * hi
                    zt[i] = c * zt[i] - s * hi
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    if z is not None:
        z[...] = zt.T
    return np.array(d)


def check_symmetric(m: np.ndarray, tol: float = SYMMETRY_TOL) -> None:
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise EigenError(f"expected a square matrix, got shape {m.shape}")
    asym = float(np.max(np.abs(m - m.T))) if m.size else 0.0
    if asym > tol:
        raise EigenError(f"matrix is not symmetric (max asymmetry {asym:.3e})")


def dense_symmetric_eigenvalues(m, vectors: bool = False, ceiling: int = DENSE_CEILING,
                                tol: float = SYMMETRY_TOL):
    """All eigenvalues of a symmetric matrix, ascending.

    With ``vectors=True`` returns ``(values, vectors)`` with eigenvectors as
    columns.
    """
    m = np.asarray(m, dtype=float)
    check_symmetric(m, tol)
    n = m.shape[0]
    if n > ceiling:
        raise EigenError(f"dimension {n} exceeds the dense ceiling {ceiling}")
    if n == 0:
        return (np.zeros(0), np.zeros((0, 0))) if vectors else np.zeros(0)
    m = 0.5 * (m + m.T)
    diag, off, q = householder_tridiagonalize(m, want_q=vectors)
    values = tridiagonal_ql(diag, off, q)
    order = np.argsort(values, kind="stable")
    if vectors:
        return values[order], q[:, order]
    return values[order]


@dataclass(frozen=True)
class LanczosConfig:
    max_iterations: int = 600
    tolerance: float = 1e-10
    reorthogonalization: str = "full"
    seed: int = 12345
    num_deflation_vectors: int = 0
    check_every: int = 5

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")
        if self.reorthogonalization not in ("full", "selective"):
            raise ValueError("reorthogonalization must be 'full' or 'selective'")


@dataclass(frozen=True)
class LanczosResult:
    value: float
    vector: np.ndarray
    residual: float
    iterations: int


def _orthonormal_columns(vectors: Sequence[np.ndarray] | np.ndarray | None, dim: int) -> np.ndarray:
    if vectors is None or len(vectors) == 0:
        return np.zeros((dim, 0))
    d = np.column_stack([np.asarray(v, dtype=float) for v in vectors])
    if d.shape[0] != dim:
        raise EigenError("deflation vectors have the wrong dimension")
    gram = d.T @ d
    if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
        raise EigenError("deflation vectors are not orthonormal")
    return d


def _project_out(x: np.ndarray, basis: np.ndarray) -> np.ndarray:
    if basis.shape[1]:
        x = x - basis @ (basis.T @ x)
    return x


def lanczos_extreme(apply: Callable[[np.ndarray], np.ndarray], dim: int, which: str = "largest",
                    deflate=None, cfg: LanczosConfig | None = None) -> LanczosResult:
    """Extreme eigenpair of ``apply`` on the complement of ``deflate``."""
    cfg = cfg or LanczosConfig()
    if which not in ("largest", "smallest"):
        raise ValueError("which must be 'largest' or 'smallest'")
    sign = 1.0 if which == "largest" else -1.0
    full = cfg.reorthogonalization == "full"
    defl = _orthonormal_columns(deflate, dim)
    if cfg.num_deflation_vectors and defl.shape[1] != cfg.num_deflation_vectors:
        raise EigenError(f"expected {cfg.num_deflation_vectors} deflation vectors, got {defl.shape[1]}")
    rng = np.random.default_rng(cfg.seed)

    x, y = rng.standard_normal(dim), rng.standard_normal(dim)
    skew = abs(float(x @ apply(y)) - float(apply(x) @ y))
    if skew > 1e-10 * max(1.0, float(np.linalg.norm(x) * np.linalg.norm(y))):
        raise EigenError(f"operator is not symmetric (probe skew {skew:.3e})")

    free = dim - defl.shape[1]
    if free <= 0:
        raise EigenError("deflation space covers the whole space")
    limit = min(cfg.max_iterations, free)

    v = _project_out(rng.standard_normal(dim), defl)
    v /= np.linalg.norm(v)
    basis = np.empty((limit, dim))
    alphas: list[float] = []
    betas: list[float] = []
    best = (math.nan, math.inf)

    for j in range(limit):
        basis[j] = v
        w = _project_out(apply(v), defl)
        alpha = float(v @ w)
        w -= alpha * v
        if j:
            w -= betas[-1] * basis[j - 1]
        # Full: two classical Gram-Schmidt passes every step. Selective: one
        # pass, only once the overlap with the basis exceeds sqrt(eps).
        overlap = basis[: j + 1] @ w
        if full or np.max(np.abs(overlap)) > _SQRT_EPS * np.linalg.norm(w):
            for _ in range(2 if full else 1):
                w -= basis[: j + 1].T @ overlap
                w = _project_out(w, defl)
                overlap = basis[: j + 1] @ w
        beta = float(np.linalg.norm(w))
        alphas.append(alpha)
        exhausted = beta <= 1e-13 * max(1.0, abs(alpha)) or j + 1 == limit
        if exhausted or (j + 1) % cfg.check_every == 0:
            vals, vecs = eigh_tridiagonal(np.array(alphas), np.array(betas))
            k = -1 if sign > 0 else 0
            theta, s = float(vals[k]), vecs[:, k]
            estimate = abs(beta * s[-1])
            if exhausted or estimate <= cfg.tolerance:
                ritz = basis[: j + 1].T @ s
                ritz /= np.linalg.norm(ritz)
                resid = float(np.linalg.norm(_project_out(apply(ritz), defl) - theta * ritz))
                if resid <= cfg.tolerance:
                    return LanczosResult(theta, ritz, resid, j + 1)
                estimate = resid
            if estimate < best[1]:
                best = (theta, estimate)
            if exhausted:
                break
        betas.append(beta)
        v = w / beta
    raise LanczosNotConverged(best[0], best[1], len(alphas))
