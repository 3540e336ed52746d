"""Random walk on the finite group generated by CNOT gates.

A CNOT acts on basis states as an invertible linear map of F_2^N, so the
gates generate a subgroup of GL_N(F_2). The walk that multiplies by gate
``i`` with probability ``p_i`` has transition matrix

    W[a, b] = sum_i p_i [g_a == U_i g_b]

and ``k(n) = W^n e_identity`` gives ``Tr phi^n = sum_a k_a(n) Tr(g_a)``, where
``Tr(g)`` counts the fixed points of ``g`` on F_2^N.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from .eigen import dense_symmetric_eigenvalues
from .induced import build_induced_graph
from .network import InteractionGraph, complete_pairs

DEFAULT_GROUP_CAP = 10**6


class GroupOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class GF2Matrix:
    """N x N matrix over GF(2); ``rows[r]`` has bit ``j`` set iff entry (r, j) is 1."""

    n: int
    rows: tuple[int, ...]

    @classmethod
    def identity(cls, n: int) -> "GF2Matrix":
        return cls(n, tuple(1 << r for r in range(n)))

    @property
    def key(self) -> int:
        """Row-major bit packing, unique per matrix for a fixed ``n``."""
        out = 0
        for r, row in enumerate(self.rows):
            out |= row << (r * self.n)
        return out

    def __matmul__(self, other: "GF2Matrix") -> "GF2Matrix":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        rows = []
        for row in self.rows:
            acc, j = 0, 0
            while row:
                if row & 1:
                    acc ^= other.rows[j]
                row >>= 1
                j += 1
            rows.append(acc)
        return GF2Matrix(self.n, tuple(rows))

    def apply(self, x: int) -> int:
        """Image of the basis state with bit vector ``x``."""
        out = 0
        for r, row in enumerate(self.rows):
            out |= (bin(row & x).count("1") & 1) << r
        return out

    def to_array(self) -> np.ndarray:
        return np.array([[(row >> j) & 1 for j in range(self.n)] for row in self.rows], dtype=np.uint8)

    def __add__(self, other: "GF2Matrix") -> "GF2Matrix":
        return GF2Matrix(self.n, tuple(a ^ b for a, b in zip(self.rows, other.rows)))


def gf2_rank(rows: Sequence[int], n_cols: int) -> int:
    work = list(rows)
    rank = 0
    for col in range(n_cols):
        pivot = next((r for r in range(rank, len(work)) if (work[r] >> col) & 1), None)
        if pivot is None:
            continue
        work[rank], work[pivot] = work[pivot], work[rank]
        for r in range(len(work)):
            if r != rank and (work[r] >> col) & 1:
                work[r] ^= work[rank]
        rank += 1
    return rank


def cnot_gf2(control: int, target: int, n: int) -> GF2Matrix:
    """Identity plus a 1 at (target, control): x_target += x_control."""
    if control == target:
        raise ValueError("control and target must differ")
    if not (0 <= control < n and 0 <= target < n):
        raise IndexError(f"qubit index out of range for N = {n}")
    rows = [1 << r for r in range(n)]
    rows[target] |= 1 << control
    return GF2Matrix(n, tuple(rows))


def element_trace(g: GF2Matrix) -> int:
    """Trace of the permutation operator of ``g`` on C^(2^N): its fixed-point count."""
    return 1 << (g.n - gf2_rank((g + GF2Matrix.identity(g.n)).rows, g.n))


def gl_order(n: int) -> int:
    """|GL_n(F_2)| = prod_k (2^n - 2^k)."""
    out = 1
    for k in range(n):
        out *= (1 << n) - (1 << k)
    return out


@dataclass(frozen=True)
class GroupTable:
    """Elements in BFS discovery order (identity first).

    ``action[a, i]`` is the index of ``generators[i] @ elements[a]``.
    """

    elements: tuple[GF2Matrix, ...]
    generators: tuple[GF2Matrix, ...]
    action: np.ndarray
    index: dict

    identity_index = 0

    @property
    def order(self) -> int:
        return len(self.elements)

    def lookup(self, g: GF2Matrix) -> int:
        return self.index[g.key]

    def traces(self) -> np.ndarray:
        return np.array([element_trace(g) for g in self.elements], dtype=float)


def generate_group(generators: Sequence[GF2Matrix], cap: int = DEFAULT_GROUP_CAP) -> GroupTable:
    if not generators:
        raise ValueError("need at least one generator")
    n = generators[0].n
    ident = GF2Matrix.identity(n)
    elements = [ident]
    index = {ident.key: 0}
    action_rows = []
    queue = deque([0])
    while queue:
        a = queue.popleft()
        g = elements[a]
        row = []
        for u in generators:
            h = u @ g
            k = index.get(h.key)
            if k is None:
                if len(elements) >= cap:
                    raise GroupOverflowError(f"group order exceeds the cap of {cap}")
                k = len(elements)
                index[h.key] = k
                elements.append(h)
                queue.append(k)
            row.append(k)
        action_rows.append(row)
    return GroupTable(tuple(elements), tuple(generators), np.array(action_rows, dtype=np.int64), index)


def cnot_generators(g: InteractionGraph) -> list[GF2Matrix]:
    return [cnot_gf2(c, t, g.n_qubits) for c, t in g.pairs]


def group_of(g: InteractionGraph, cap: int = DEFAULT_GROUP_CAP) -> GroupTable:
    """Group generated by the graph's gates.

    The full CNOT set on N qubits generates all of GL_N(F_2), so that case is
    rejected up front when |GL_N(F_2)| exceeds ``cap``.
    """
    n = g.n_qubits
    if set(g.pairs) == set(complete_pairs(n)) and gl_order(n) > cap:
        raise GroupOverflowError(f"the CNOT group on {n} qubits has order {gl_order(n)}, above the cap of {cap}")
    return generate_group(cnot_generators(g), cap)


@dataclass(frozen=True)
class WalkMatrix:
    """Column-stochastic transition matrix of the group walk (sparse)."""

    matrix: sp.csr_matrix
    probabilities: np.ndarray

    @property
    def order(self) -> int:
        return self.matrix.shape[0]

    def is_symmetric(self) -> bool:
        return (self.matrix != self.matrix.T).nnz == 0

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()


def build_walk_matrix(gt: GroupTable, probabilities: Sequence[float]) -> WalkMatrix:
    p = np.asarray(probabilities, dtype=float)
    if p.shape != (len(gt.generators),):
        raise ValueError(f"expected {len(gt.generators)} probabilities, got {p.shape}")
    if abs(p.sum() - 1.0) > 1e-12:
        raise ValueError("probabilities must sum to one")
    m = gt.order
    rows = gt.action.ravel()
    cols = np.repeat(np.arange(m), len(p))
    vals = np.tile(p, m)
    w = sp.csr_matrix((vals, (rows, cols)), shape=(m, m))
    w.sum_duplicates()
    walk = WalkMatrix(w, p)
    involutive = all((u @ u).key == GF2Matrix.identity(u.n).key for u in gt.generators)
    if involutive and not walk.is_symmetric():
        raise AssertionError("walk matrix of involutive generators is not symmetric")
    return walk


def walk_spectrum(w: WalkMatrix):
    """Ascending eigenvalues and eigenvector columns of a symmetric W."""
    if not w.is_symmetric():
        raise ValueError("walk matrix is not symmetric")
    return dense_symmetric_eigenvalues(w.to_dense(), vectors=True)


def walk_distribution(w: WalkMatrix, n: int, start: int = 0) -> np.ndarray:
    """``k(n) = W^n e_start`` by repeated products."""
    k = np.zeros(w.order)
    k[start] = 1.0
    for _ in range(n):
        k = w.matrix @ k
    return k


def walk_distribution_spectral(values: np.ndarray, vectors: np.ndarray, n: int, start: int = 0) -> np.ndarray:
    """Same as :func:`walk_distribution`, via ``sum_b w_b^n |w_b><w_b|start>``."""
    return vectors @ (values ** n * vectors[start])


def trace_phi_power(gt: GroupTable, w: WalkMatrix, n: int) -> float:
    return float(walk_distribution(w, n, gt.identity_index) @ gt.traces())


def trace_superoperator_power(gt: GroupTable, w: WalkMatrix, n: int) -> float:
    """``Tr Phi^n``: the same walk, weighted by Tr(U (x) U) = Tr(U)^2."""
    return float(walk_distribution(w, n, gt.identity_index) @ gt.traces() ** 2)


def direct_trace_phi_power(g: InteractionGraph, n: int) -> float:
    """``Tr phi^n`` from the full ``2**N`` operator, by sparse repeated products."""
    phi = build_induced_graph(g, drop_zero=False).adjacency
    x = np.eye(phi.shape[0])
    for _ in range(n):
        x = phi @ x
    return float(np.trace(x))


def trace_expansion(gt: GroupTable, w: WalkMatrix, tol: float = 1e-9) -> list[tuple[float, float]]:
    """Coefficients ``c`` with ``Tr phi^n = sum c * omega^n``, grouped by eigenvalue omega."""
    values, vectors = walk_spectrum(w)
    contrib = (vectors.T @ gt.traces()) * vectors[gt.identity_index]
    out: list[tuple[float, float]] = []
    for val, c in zip(values, contrib):
        if out and abs(out[-1][0] - val) <= tol:
            out[-1] = (out[-1][0], out[-1][1] + float(c))
        else:
            out.append((float(val), float(c)))
    return out


def bipartiteness_check(gt: GroupTable, w: WalkMatrix) -> tuple[bool, np.ndarray | None]:
    """2-colour the walk graph from the identity; returns (bipartite, parity or None)."""
    active = [i for i, p in enumerate(w.probabilities) if p > 0]
    table = gt.action[:, active]
    colour = np.full(gt.order, -1, dtype=np.int8)
    for start in range(gt.order):
        if colour[start] >= 0:
            continue
        colour[start] = 0
        queue = deque([start])
        while queue:
            a = queue.popleft()
            for b in table[a]:
                if b == a:
                    return False, None
                if colour[b] < 0:
                    colour[b] = 1 - colour[a]
                    queue.append(b)
                elif colour[b] == colour[a]:
                    return False, None
    return True, colour.astype(np.int64)


def two_qubit_word_order(gt: GroupTable) -> list[int]:
    """Indices of (1, U1, U2, U1U2, U2U1, U1U2U1) for a two-generator N=2 table."""
    if len(gt.generators) != 2:
        raise ValueError("expected exactly two generators")
    u1, u2 = gt.generators
    words = [GF2Matrix.identity(u1.n), u1, u2, u1 @ u2, u2 @ u1, u1 @ u2 @ u1]
    return [gt.lookup(x) for x in words]
