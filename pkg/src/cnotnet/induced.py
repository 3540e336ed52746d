"""Weighted graph on computational basis states induced by a CNOT channel.

Basis state ``x`` is an integer whose bit ``j`` is the excitation of qubit
``j``. Ket labels are written with qubit 0 first, so ``"10"`` is ``x = 1``.

Each gate (c -> t, p) sends ``x`` to ``x ^ (bit_c(x) << t)``. Summing ``p``
over gates gives the operator ``phi = sum_i p_i U_i``, which is symmetric and
doubly stochastic; its matrix is the adjacency of the induced graph, with
fixed points showing up as loops. The all-zeros state is fixed by every gate
and forms its own component, so it is dropped by default.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TextIO

import numpy as np
import scipy.sparse as sp

from .network import InteractionGraph, NetworkError

ROW_SUM_TOL = 1e-12
SYMMETRY_TOL = 1e-15


class DisconnectedGraphError(ValueError):
    def __init__(self, message: str, pair: tuple[int, int] | None = None):
        super().__init__(message)
        self.pair = pair


def parse_label(label: str) -> int:
    """Ket label (qubit 0 first) -> basis index."""
    if not label or set(label) - {"0", "1"}:
        raise ValueError(f"not a bit string: {label!r}")
    return sum(1 << j for j, ch in enumerate(label) if ch == "1")


def format_label(index: int, n_qubits: int) -> str:
    return "".join("1" if (index >> j) & 1 else "0" for j in range(n_qubits))


def apply_cnot(state: int, control: int, target: int, n_qubits: int | None = None) -> int:
    """Flip bit ``target`` of ``state`` iff bit ``control`` is set."""
    if control == target:
        raise ValueError("control and target must differ")
    if min(control, target) < 0:
        raise IndexError("negative qubit index")
    if n_qubits is not None:
        if max(control, target) >= n_qubits:
            raise IndexError(f"qubit index out of range for {n_qubits} qubits")
        if not 0 <= state < (1 << n_qubits):
            raise IndexError(f"state {state} out of range for {n_qubits} qubits")
    return state ^ (((state >> control) & 1) << target)


def cnot_images(states: np.ndarray, control: int, target: int) -> np.ndarray:
    """Vectorized :func:`apply_cnot`."""
    return states ^ (((states >> control) & 1) << target)


@dataclass(frozen=True)
class InducedGraph:
    """Adjacency ``A_phi`` as CSR with the loop weights on the diagonal.

    ``labels[k]`` is the basis index of vertex ``k``.
    """

    n_qubits: int
    labels: np.ndarray
    adjacency: sp.csr_matrix

    @property
    def n_vertices(self) -> int:
        return len(self.labels)

    @property
    def loops(self) -> np.ndarray:
        return self.adjacency.diagonal()

    def laplacian(self) -> sp.csr_matrix:
        """``L = I - A``; valid because every vertex has total weight one."""
        return (sp.identity(self.n_vertices, format="csr") - self.adjacency).tocsr()

    def skeleton(self) -> sp.csr_matrix:
        """Unweighted off-diagonal pattern (loops stripped)."""
        a = self.adjacency.copy().tolil()
        a.setdiag(0)
        a = a.tocsr()
        a.eliminate_zeros()
        a.data[:] = 1.0
        return a

    def vertex_of(self, basis_index: int) -> int:
        k = int(np.searchsorted(self.labels, basis_index))
        if k >= len(self.labels) or self.labels[k] != basis_index:
            raise KeyError(basis_index)
        return k

    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self.adjacency @ v

    def write_edge_list(self, fh: TextIO) -> None:
        """One ``u v weight`` line per undirected edge, loops as ``u u w``."""
        coo = sp.triu(self.adjacency).tocoo()
        order = np.lexsort((coo.col, coo.row))
        for r, c, w in zip(coo.row[order], coo.col[order], coo.data[order]):
            fh.write(f"{self.labels[r]} {self.labels[c]} {w:.17g}\n")


def build_induced_graph(g: InteractionGraph, drop_zero: bool = True) -> InducedGraph:
    n = g.n_qubits
    if n > g.max_qubits:
        raise NetworkError(f"{n} qubits exceeds the ceiling of {g.max_qubits}")
    dim = 1 << n
    states = np.arange(dim, dtype=np.int64)

    # Off-diagonal weight from x to x ^ (1 << t) is kept in column t; the
    # loop weight of x in ``loops``.
    flip = np.zeros((dim, n))
    loops = np.zeros(dim)
    for c, t, p in g.links:
        moved = ((states >> c) & 1).astype(bool)
        flip[moved, t] += p
        loops[~moved] += p

    rows, cols, vals = [states], [states], [loops]
    for t in range(n):
        nz = flip[:, t] > 0
        rows.append(states[nz])
        cols.append(states[nz] ^ (1 << t))
        vals.append(flip[nz, t])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.concatenate(vals)

    # Each undirected edge is assembled from both endpoints independently.
    fwd = flip[states[:, None] ^ (1 << np.arange(n))[None, :], np.arange(n)[None, :]]
    if np.max(np.abs(fwd - flip)) > SYMMETRY_TOL:
        raise AssertionError("induced adjacency assembled asymmetrically")

    if drop_zero:
        if flip[0].any() or np.any(flip[1 << np.arange(n), np.arange(n)]):
            raise AssertionError("zero state is not isolated")
        keep = (rows != 0) & (cols != 0)
        rows, cols, vals = rows[keep] - 1, cols[keep] - 1, vals[keep]
        labels = states[1:]
    else:
        labels = states
    size = len(labels)
    a = sp.csr_matrix((vals, (rows, cols)), shape=(size, size))
    a.sum_duplicates()
    a.eliminate_zeros()
    row_sums = np.asarray(a.sum(axis=1)).ravel()
    if np.max(np.abs(row_sums - 1.0)) > ROW_SUM_TOL:
        raise AssertionError("induced adjacency rows do not sum to one")
    return InducedGraph(n, labels, a)


def neighbour_table(adjacency: sp.csr_matrix) -> np.ndarray:
    """Off-diagonal neighbours of each vertex, padded with the vertex itself."""
    a = adjacency.tocsr()
    size = a.shape[0]
    degree = np.diff(a.indptr)
    width = max(int(degree.max()), 1)
    table = np.repeat(np.arange(size)[:, None], width, axis=1)
    row_of = np.repeat(np.arange(size), degree)
    slot = np.arange(a.nnz) - np.repeat(a.indptr[:-1], degree)
    table[row_of, slot] = a.indices
    return table


def label_components(table: np.ndarray) -> tuple[int, np.ndarray]:
    """BFS component labels for the graph whose row ``k`` lists neighbours of ``k``."""
    size = table.shape[0]
    comp = np.full(size, -1, dtype=np.int64)
    n_comp = 0
    for start in range(size):
        if comp[start] >= 0:
            continue
        comp[start] = n_comp
        frontier = np.array([start])
        while frontier.size:
            nxt = np.unique(table[frontier].ravel())
            nxt = nxt[comp[nxt] < 0]
            comp[nxt] = n_comp
            frontier = nxt
        n_comp += 1
    return n_comp, comp


def connectivity_check(ig: InducedGraph) -> tuple[bool, int, np.ndarray]:
    """Returns (connected, n_components, component label per vertex)."""
    n_comp, comp = label_components(neighbour_table(ig.adjacency))
    return n_comp == 1, n_comp, comp


def unweighted_diameter(ig: InducedGraph, chunk: int = 8192) -> int:
    """Exact diameter of the loop-free skeleton via bitset multi-source BFS.

    Sources are processed in chunks of ``chunk`` vertices; each vertex keeps a
    bitset of the chunk's sources that have reached it.
    """
    table = neighbour_table(ig.skeleton())
    size = ig.n_vertices
    diameter = 0
    for lo in range(0, size, chunk):
        src = np.arange(lo, min(lo + chunk, size))
        words = (len(src) + 63) // 64
        reach = np.zeros((size, words), dtype=np.uint64)
        bit = np.arange(len(src))
        reach[src, bit // 64] |= np.left_shift(np.uint64(1), (bit % 64).astype(np.uint64))
        level = 0
        while True:
            new = reach.copy()
            for col in table.T:
                new |= reach[col]
            if np.array_equal(new, reach):
                break
            reach = new
            level += 1
        full = np.zeros(words, dtype=np.uint64)
        np.bitwise_or.at(full, bit // 64, np.left_shift(np.uint64(1), (bit % 64).astype(np.uint64)))
        missing = np.nonzero((reach != full[None, :]).any(axis=1))[0]
        if missing.size:
            v = int(missing[0])
            lacking = full & ~reach[v]
            w = int(np.nonzero(lacking)[0][0])
            b = int(lacking[w]).bit_length() - 1
            s = int(src[w * 64 + b])
            pair = (int(ig.labels[s]), int(ig.labels[v]))
            raise DisconnectedGraphError(f"basis states {pair[0]} and {pair[1]} are not connected", pair)
        diameter = max(diameter, level)
    return diameter
