"""Iterated random-unitary CNOT channel on density matrices.

Conventions: a density matrix is a ``2**N x 2**N`` array indexed by basis
states (see :mod:`cnotnet.induced`). Vectorization is row-major,
``vec(rho)[x * 2**N + y] = rho[x, y]``, under which the channel acts as
``Phi = sum_i p_i U_i (x) U_i`` (CNOTs are real and self-inverse).

Since every ``U_i (x) U_i`` is a permutation of index pairs, ``Phi`` is the
adjacency of a weighted graph on pairs ``(x, y)``; its +1 eigenspace is
spanned by indicators of that graph's components and a -1 eigenvector exists
exactly on loop-free bipartite components.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .eigen import LanczosConfig, dense_symmetric_eigenvalues, lanczos_extreme
from .induced import cnot_images, format_label, label_components, parse_label
from .network import InteractionGraph, NetworkError

TRAJECTORY_CEILING = 8
ATTRACTOR_CEILING = 6
DENSE_ATTRACTOR_CEILING = 4
UNIT_MODULUS_TOL = 1e-9


class CeilingError(NetworkError):
    pass


class DimensionError(ValueError):
    pass


def _ceiling(n: int, limit: int, what: str) -> None:
    if n > limit:
        raise CeilingError(f"{what} supports N <= {limit}, got N = {n}")


def gate_permutations(g: InteractionGraph) -> list[tuple[float, np.ndarray]]:
    states = np.arange(1 << g.n_qubits, dtype=np.int64)
    return [(p, cnot_images(states, c, t)) for c, t, p in g.links]


def basis_projector(state: int | str, n_qubits: int) -> np.ndarray:
    if isinstance(state, str):
        if len(state) != n_qubits:
            raise DimensionError(f"label {state!r} does not have {n_qubits} qubits")
        state = parse_label(state)
    rho = np.zeros((1 << n_qubits, 1 << n_qubits))
    rho[state, state] = 1.0
    return rho


def maximally_mixed(n_qubits: int) -> np.ndarray:
    d = 1 << n_qubits
    return np.eye(d) / d


def check_density_matrix(rho: np.ndarray, tol: float = 1e-12, psd_tol: float = 1e-10) -> None:
    """Raise ValueError unless ``rho`` is Hermitian, unit-trace and PSD."""
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > tol:
        raise ValueError(f"not Hermitian (deviation {herm:.3e})")
    tr = complex(np.trace(rho))
    if abs(tr - 1.0) > tol:
        raise ValueError(f"trace is {tr}, not 1")
    if np.iscomplexobj(rho) and np.max(np.abs(rho.imag)) > 0:
        # Embed the complex Hermitian matrix as a real symmetric one of twice
        # the size; its spectrum is that of rho, each value doubled.
        real = np.block([[rho.real, -rho.imag], [rho.imag, rho.real]])
    else:
        real = np.real(rho)
    lowest = float(dense_symmetric_eigenvalues(real, tol=max(tol, 1e-12))[0])
    if lowest < -psd_tol:
        raise ValueError(f"not positive semidefinite (eigenvalue {lowest:.3e})")


def apply_channel(g: InteractionGraph, rho: np.ndarray, perms=None) -> np.ndarray:
    """``sum_i p_i U_i rho U_i^T`` by permuting rows and columns."""
    d = 1 << g.n_qubits
    if rho.shape != (d, d):
        raise DimensionError(f"expected a {d}x{d} density matrix, got {rho.shape}")
    out = np.zeros_like(rho)
    for p, perm in perms or gate_permutations(g):
        out += p * rho[np.ix_(perm, perm)]
    return out


def hs_distance(r1: np.ndarray, r2: np.ndarray) -> float:
    """Hilbert-Schmidt distance sqrt(Tr (r1 - r2)^2) for Hermitian inputs."""
    if r1.shape != r2.shape:
        raise DimensionError(f"shape mismatch {r1.shape} vs {r2.shape}")
    diff = r1 - r2
    return math.sqrt(float(np.sum(np.abs(diff) ** 2)))


def pair_permutations(g: InteractionGraph) -> list[tuple[float, np.ndarray]]:
    d = 1 << g.n_qubits
    return [(p, (perm[:, None] * d + perm[None, :]).ravel()) for p, perm in gate_permutations(g)]


def superoperator_matrix(g: InteractionGraph) -> np.ndarray:
    """Dense ``4**N`` matrix of the channel in the row-major vec convention."""
    _ceiling(g.n_qubits, ATTRACTOR_CEILING, "dense superoperator")
    dim = 1 << (2 * g.n_qubits)
    phi = np.zeros((dim, dim))
    cols = np.arange(dim)
    for p, perm2 in pair_permutations(g):
        phi[perm2, cols] += p
    return phi


def superoperator_apply(g: InteractionGraph):
    """Matrix-free ``vec -> Phi vec``."""
    d = 1 << g.n_qubits
    perms = gate_permutations(g)

    def apply(v: np.ndarray) -> np.ndarray:
        return apply_channel(g, v.reshape(d, d), perms).ravel()

    return apply


@dataclass(frozen=True)
class AttractorProjection:
    """Orthonormal basis (columns) of the unit-modulus eigenspaces of Phi."""

    n_qubits: int
    basis: np.ndarray
    eigenvalues: np.ndarray
    method: str

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def project(self, vec: np.ndarray) -> np.ndarray:
        return self.basis @ (self.basis.T @ vec)

    def distance(self, rho: np.ndarray) -> float:
        """Distance of ``rho`` from the attractor manifold."""
        v = rho.ravel()
        return float(np.linalg.norm(v - self.project(v)))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.T


def _attractors_from_components(g: InteractionGraph) -> AttractorProjection:
    dim = 1 << (2 * g.n_qubits)
    perms = [perm2 for p, perm2 in pair_permutations(g) if p > 0]
    table = np.column_stack(perms)
    n_comp, comp = label_components(table)
    loop = np.zeros(dim, dtype=bool)
    for perm2 in perms:
        loop |= perm2 == np.arange(dim)

    vectors, values = [], []
    colour = np.full(dim, -1, dtype=np.int8)
    for c in range(n_comp):
        members = np.nonzero(comp == c)[0]
        v = np.zeros(dim)
        v[members] = 1.0 / math.sqrt(len(members))
        vectors.append(v)
        values.append(1.0)
        if loop[members].any():
            continue
        # 2-colour the component; success gives the -1 eigenvector.
        colour[members[0]] = 0
        frontier = members[:1]
        bipartite = True
        while frontier.size and bipartite:
            nbrs = table[frontier]
            want = np.repeat(1 - colour[frontier], nbrs.shape[1])
            flat = nbrs.ravel()
            seen = colour[flat] >= 0
            if np.any(colour[flat[seen]] != want[seen]):
                bipartite = False
                break
            fresh, idx = np.unique(flat[~seen], return_index=True)
            colour[fresh] = want[~seen][idx]
            frontier = fresh
        if bipartite:
            w = np.zeros(dim)
            w[members] = np.where(colour[members] == 0, 1.0, -1.0) / math.sqrt(len(members))
            vectors.append(w)
            values.append(-1.0)
    return AttractorProjection(g.n_qubits, np.column_stack(vectors), np.array(values), "components")


def _attractors_from_eigendecomposition(g: InteractionGraph, ceiling: int) -> AttractorProjection:
    _ceiling(g.n_qubits, ceiling, "dense attractor eigendecomposition")
    vals, vecs = dense_symmetric_eigenvalues(superoperator_matrix(g), vectors=True)
    keep = np.abs(vals) >= 1.0 - UNIT_MODULUS_TOL
    return AttractorProjection(g.n_qubits, vecs[:, keep], np.round(vals[keep]), "eigen")


def attractor_projection(g: InteractionGraph, method: str = "components",
                         ceiling: int = ATTRACTOR_CEILING) -> AttractorProjection:
    """Basis of the +1 and -1 eigenspaces of Phi.

    ``method="components"`` reads them off the pair graph and is exact;
    ``method="eigen"`` diagonalizes the dense ``4**N`` matrix with the
    in-house solver and is limited to N <= ``DENSE_ATTRACTOR_CEILING``.
    """
    if method == "components":
        _ceiling(g.n_qubits, ceiling, "attractor projection")
        return _attractors_from_components(g)
    if method == "eigen":
        return _attractors_from_eigendecomposition(g, min(ceiling, DENSE_ATTRACTOR_CEILING))
    raise ValueError(f"unknown attractor method {method!r}")


@dataclass(frozen=True)
class SuperoperatorGap:
    lambda_2: float
    lambda_min: float
    beta_star: float
    residuals: tuple[float, float]


def superoperator_gap(g: InteractionGraph, projection: AttractorProjection | None = None,
                      cfg: LanczosConfig | None = None) -> SuperoperatorGap:
    """Largest and most negative eigenvalues of Phi off the attractor manifold (Lanczos)."""
    projection = projection or attractor_projection(g)
    dim = 1 << (2 * g.n_qubits)
    apply = superoperator_apply(g)
    top = lanczos_extreme(apply, dim, "largest", list(projection.basis.T), cfg)
    low = lanczos_extreme(apply, dim, "smallest", list(projection.basis.T), cfg)
    beta = max(top.value, abs(low.value))
    return SuperoperatorGap(top.value, low.value, beta, (top.residual, low.residual))


@dataclass
class Trajectory:
    label: str
    beta_star: float
    steps: list[int] = field(default_factory=list)
    distances: list[float] = field(default_factory=list)

    @property
    def bound(self) -> list[float]:
        d0 = self.distances[0]
        return [self.beta_star ** n * d0 for n in self.steps]

    def rows(self):
        return list(zip(self.steps, self.distances, self.bound))


def trajectory(g: InteractionGraph, rho0: np.ndarray, steps: int,
               projection: AttractorProjection | None = None, beta_star: float | None = None,
               label: str | None = None, validate: bool = True) -> Trajectory:
    """Iterate the channel and record the distance to the attractor manifold."""
    _ceiling(g.n_qubits, TRAJECTORY_CEILING, "trajectory")
    if steps < 1:
        raise ValueError("steps must be at least 1")
    projection = projection or attractor_projection(g, ceiling=TRAJECTORY_CEILING)
    if beta_star is None:
        beta_star = superoperator_gap(g, projection).beta_star
    if label is None:
        diag = np.diag(rho0)
        label = format_label(int(np.argmax(diag)), g.n_qubits) if np.count_nonzero(rho0) == 1 else "custom"
    perms = gate_permutations(g)
    traj = Trajectory(label, float(beta_star))
    rho = rho0
    for n in range(steps + 1):
        if n:
            rho = apply_channel(g, rho, perms)
        if validate:
            check_density_matrix(rho)
        traj.steps.append(n)
        traj.distances.append(projection.distance(rho))
    return traj
