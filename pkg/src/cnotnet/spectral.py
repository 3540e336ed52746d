"""Algebraic connectivity of the induced graph and subleading eigenvalues."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .channel import ATTRACTOR_CEILING, UNIT_MODULUS_TOL, superoperator_matrix
from .eigen import LanczosConfig, dense_symmetric_eigenvalues, lanczos_extreme
from .induced import DisconnectedGraphError, InducedGraph, build_induced_graph, connectivity_check
from .network import InteractionGraph

log = logging.getLogger(__name__)

POSITIVITY_TOL = 1e-10


@dataclass(frozen=True)
class SpectralSummary:
    lambda_max: float
    lambda_2: float
    lambda_min: float
    gamma: float
    beta_star: float
    positivity_violated: bool
    residual_norms: tuple[float, ...]
    iterations: int


def _uniform(n: int) -> np.ndarray:
    return np.full(n, 1.0 / math.sqrt(n))


def algebraic_connectivity(ig: InducedGraph, cfg: LanczosConfig | None = None,
                           method: str = "lanczos") -> SpectralSummary:
    """``gamma = 1 - lambda_2(A)`` with the uniform (lambda = 1) vector deflated.

    ``method="dense"`` uses the in-house dense solver instead of Lanczos.
    """
    connected, n_comp, _ = connectivity_check(ig)
    if not connected:
        raise DisconnectedGraphError(f"induced graph has {n_comp} components")
    size = ig.n_vertices
    u = _uniform(size)
    a = ig.adjacency
    lam_max = float(u @ (a @ u))
    top_res = float(np.linalg.norm(a @ u - u))

    if method == "dense":
        vals, vecs = dense_symmetric_eigenvalues(a.toarray(), vectors=True)
        lam2, lam_min = float(vals[-2]), float(vals[0])
        if lam_min <= -1.0 + UNIT_MODULUS_TOL:
            lam_min = float(vals[1])
        residuals, iters = (top_res,), 0
    elif method == "lanczos":
        if size == 1:
            raise DisconnectedGraphError("induced graph has a single vertex")
        apply = a.dot
        second = lanczos_extreme(apply, size, "largest", [u], cfg)
        deflate = [u]
        low = lanczos_extreme(apply, size, "smallest", deflate, cfg)
        # A -1 eigenvalue belongs to the unit-modulus set; look past it.
        while low.value <= -1.0 + UNIT_MODULUS_TOL and len(deflate) < size - 1:
            deflate.append(low.vector - sum((low.vector @ d) * d for d in deflate))
            deflate[-1] /= np.linalg.norm(deflate[-1])
            low = lanczos_extreme(apply, size, "smallest", deflate, cfg)
        lam2, lam_min = second.value, low.value
        residuals = (top_res, second.residual, low.residual)
        iters = second.iterations + low.iterations
    else:
        raise ValueError(f"unknown method {method!r}")

    violated = abs(lam_min) > lam2 + POSITIVITY_TOL
    if violated:
        log.warning("most negative eigenvalue %.6g outweighs lambda_2 %.6g", lam_min, lam2)
    return SpectralSummary(
        lambda_max=lam_max,
        lambda_2=lam2,
        lambda_min=lam_min,
        gamma=1.0 - lam2,
        beta_star=max(lam2, abs(lam_min)),
        positivity_violated=violated,
        residual_norms=residuals,
        iterations=iters,
    )


def connectivity_of(g: InteractionGraph, cfg: LanczosConfig | None = None, method: str = "lanczos") -> SpectralSummary:
    return algebraic_connectivity(build_induced_graph(g), cfg, method)


def subleading_eigenvalue(values: np.ndarray, tol: float = UNIT_MODULUS_TOL) -> float:
    """Eigenvalue of largest modulus below one; ties go to the positive one."""
    inside = values[np.abs(values) < 1.0 - tol]
    if inside.size == 0:
        raise ValueError("no eigenvalues strictly inside the unit disc")
    mags = np.abs(inside)
    top = mags.max()
    candidates = inside[mags >= top - 1e-12]
    return float(candidates.max())


def superoperator_spectrum(g: InteractionGraph, ceiling: int = ATTRACTOR_CEILING) -> np.ndarray:
    """Full spectrum of the dense ``4**N`` superoperator, ascending."""
    if g.n_qubits > ceiling:
        raise ValueError(f"dense superoperator supports N <= {ceiling}, got {g.n_qubits}")
    return dense_symmetric_eigenvalues(superoperator_matrix(g), ceiling=1 << (2 * ceiling))


def subleading_superoperator(g: InteractionGraph, ceiling: int = ATTRACTOR_CEILING) -> float:
    return subleading_eigenvalue(superoperator_spectrum(g, ceiling))
