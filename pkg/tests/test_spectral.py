import math

import numpy as np
import pytest
import scipy.sparse as sp

from cnotnet.eigen import dense_symmetric_eigenvalues
from cnotnet.induced import DisconnectedGraphError, InducedGraph, build_induced_graph
from cnotnet.network import (
    InteractionGraph,
    NoiseSpec,
    apply_noise,
    make_complete,
    make_cycle,
    make_star,
    make_unbalanced,
)
from cnotnet.spectral import (
    algebraic_connectivity,
    connectivity_of,
    subleading_eigenvalue,
    subleading_superoperator,
    superoperator_spectrum,
)


def two_qubit(p):
    return InteractionGraph(2, ((0, 1, p), (1, 0, 1 - p)))


def test_complete_two_gamma_half():
    # Dense oracle on the hand-built 3x3 adjacency.
    a = np.array([[0.5, 0, 0.5], [0, 0.5, 0.5], [0.5, 0.5, 0]])
    assert 1 - dense_symmetric_eigenvalues(a)[-2] == pytest.approx(0.5, abs=1e-14)
    s = connectivity_of(make_complete(2))
    assert s.gamma == pytest.approx(0.5, abs=1e-10)
    assert s.lambda_min == pytest.approx(-0.5, abs=1e-10)
    assert not s.positivity_violated


def test_complete_six_near_fit_value():
    s = connectivity_of(make_complete(6))
    dense = connectivity_of(make_complete(6), method="dense")
    assert s.gamma == pytest.approx(dense.gamma, abs=1e-10)
    # Fit curve 0.704/N + 0.030/N^2 at N=6; the fit is only approximate at small N.
    assert s.gamma == pytest.approx(0.704 / 6 + 0.030 / 36, abs=0.01)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_two_qubit_general_p(p):
    s = connectivity_of(two_qubit(p), method="dense")
    assert s.beta_star == pytest.approx(math.sqrt(1 - 3 * p + 3 * p * p), abs=1e-12)


def test_superoperator_two_qubit_half():
    assert subleading_superoperator(two_qubit(0.5)) == pytest.approx(0.5, abs=1e-12)
    vals = superoperator_spectrum(make_complete(2))
    assert np.sum(np.abs(vals - 1) < 1e-9) >= 2


@pytest.mark.parametrize("n", [2, 3, 4])
def test_superoperator_coincides_with_connectivity(n):
    g = make_complete(n)
    assert subleading_superoperator(g) == pytest.approx(1 - connectivity_of(g).gamma, abs=1e-9)


def test_subleading_eigenvalue_tie_prefers_positive():
    assert subleading_eigenvalue(np.array([-1.0, -0.5, 0.5, 1.0])) == 0.5
    assert subleading_eigenvalue(np.array([-0.7, 0.5, 1.0])) == -0.7
    with pytest.raises(ValueError):
        subleading_eigenvalue(np.array([1.0, -1.0]))


def _instances():
    for n in range(3, 9):
        yield make_complete(n)
        yield make_cycle(n)
        yield make_unbalanced(n)
        yield apply_noise(make_complete(n), NoiseSpec(1.0, n))


@pytest.mark.parametrize("g", list(_instances()), ids=lambda g: f"N{g.n_qubits}")
def test_lanczos_matches_dense_and_invariants(g):
    ig = build_induced_graph(g)
    lan = algebraic_connectivity(ig)
    vals = dense_symmetric_eigenvalues(ig.adjacency.toarray())
    assert lan.lambda_2 == pytest.approx(vals[-2], abs=1e-8)
    assert lan.lambda_min == pytest.approx(vals[0], abs=1e-8)
    assert abs(lan.lambda_max - 1) <= 1e-12
    assert abs(vals[-1] - 1) <= 1e-10
    assert vals[0] >= -1 - 1e-10 and vals[-1] <= 1 + 1e-10
    assert 0 <= lan.gamma <= 2 and 0 <= lan.beta_star < 1


def test_gamma_decreases_with_n():
    gammas = [connectivity_of(make_complete(n)).gamma for n in range(3, 12)]
    assert all(b < a for a, b in zip(gammas, gammas[1:]))


def test_positivity_flag_on_synthetic_graph():
    # Triangle without loops: spectrum {1, -1/2, -1/2}.
    a = sp.csr_matrix(np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]]))
    ig = InducedGraph(2, np.array([1, 2, 3]), a)
    for method in ("lanczos", "dense"):
        s = algebraic_connectivity(ig, method=method)
        assert s.positivity_violated
        assert s.beta_star == pytest.approx(0.5, abs=1e-10)


def test_minus_one_eigenvalue_is_skipped():
    # Bipartite 4-cycle: spectrum {1, 0, 0, -1}; -1 has unit modulus.
    c4 = np.array([[0, .5, 0, .5], [.5, 0, .5, 0], [0, .5, 0, .5], [.5, 0, .5, 0]])
    ig = InducedGraph(2, np.arange(1, 5), sp.csr_matrix(c4))
    for method in ("lanczos", "dense"):
        s = algebraic_connectivity(ig, method=method)
        assert s.lambda_min == pytest.approx(0.0, abs=1e-10)
        assert s.beta_star == pytest.approx(0.0, abs=1e-10)


def test_disconnected_rejected():
    with pytest.raises(DisconnectedGraphError):
        connectivity_of(make_star(4))
