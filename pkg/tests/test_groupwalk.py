import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cnotnet.channel import superoperator_matrix
from cnotnet.induced import build_induced_graph
from cnotnet.network import InteractionGraph, make_complete
from cnotnet.spectral import connectivity_of, subleading_eigenvalue
from cnotnet.groupwalk import (
    GF2Matrix,
    GroupOverflowError,
    bipartiteness_check,
    build_walk_matrix,
    cnot_generators,
    cnot_gf2,
    direct_trace_phi_power,
    element_trace,
    generate_group,
    gf2_rank,
    gl_order,
    group_of,
    trace_expansion,
    trace_phi_power,
    trace_superoperator_power,
    two_qubit_word_order,
    walk_distribution,
    walk_distribution_spectral,
    walk_spectrum,
)


def two_qubit(p):
    return InteractionGraph(2, ((0, 1, p), (1, 0, 1 - p)))


def hand_walk_matrix(p):
    q = 1 - p
    return np.array([
        [0, p, q, 0, 0, 0],
        [p, 0, 0, 0, q, 0],
        [q, 0, 0, p, 0, 0],
        [0, 0, p, 0, 0, q],
        [0, q, 0, 0, 0, p],
        [0, 0, 0, q, p, 0],
    ])


def walk_for(g):
    gt = group_of(g)
    return gt, build_walk_matrix(gt, g.probabilities)


def test_cnot_gf2_action_and_involution():
    u = cnot_gf2(0, 1, 2)
    assert u.apply(0b01) == 0b11          # |10> -> |11>
    assert u.apply(0b10) == 0b10
    assert (u @ u) == GF2Matrix.identity(2)
    with pytest.raises(ValueError):
        cnot_gf2(1, 1, 2)
    with pytest.raises(IndexError):
        cnot_gf2(0, 2, 2)


def test_cnot_products_do_not_commute_n3():
    a, b = cnot_gf2(0, 1, 3), cnot_gf2(1, 2, 3)
    # Hand products: a@b has rows (1,0,0),(1,1,0),(0,1,1); b@a has (1,0,0),(1,1,0),(1,1,1).
    assert (a @ b).to_array().tolist() == [[1, 0, 0], [1, 1, 0], [0, 1, 1]]
    assert (b @ a).to_array().tolist() == [[1, 0, 0], [1, 1, 0], [1, 1, 1]]
    assert (a @ b) != (b @ a)


@given(st.integers(2, 6).flatmap(lambda n: st.tuples(
    st.just(n), st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), min_size=1, max_size=8),
    st.integers(0, (1 << n) - 1))))
@settings(max_examples=200, deadline=None)
def test_gf2_apply_matches_bit_rule(case):
    n, gates, x = case
    m, y = GF2Matrix.identity(n), x
    for c, t in gates:
        if c == t:
            continue
        m = cnot_gf2(c, t, n) @ m
        y ^= ((y >> c) & 1) << t
    assert m.apply(x) == y


@pytest.mark.parametrize("n,order", [(2, 6), (3, 168), (4, 20160)])
def test_group_orders(n, order):
    assert gl_order(n) == order
    gt = group_of(make_complete(n))
    assert gt.order == order
    assert gt.elements[0] == GF2Matrix.identity(n)
    for col in gt.action.T:
        assert sorted(col.tolist()) == list(range(order))
    assert all(gf2_rank(e.rows, n) == n for e in gt.elements)


def test_overflow():
    with pytest.raises(GroupOverflowError):
        group_of(make_complete(5))
    with pytest.raises(GroupOverflowError):
        generate_group(cnot_generators(make_complete(3)), cap=100)


@pytest.mark.parametrize("p", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_two_qubit_example(p):
    gt, w = walk_for(two_qubit(p))
    assert gt.order == 6
    order = two_qubit_word_order(gt)
    dense = w.to_dense()
    assert np.array_equal(dense[np.ix_(order, order)], hand_walk_matrix(p))
    assert np.allclose(dense.sum(axis=0), 1, atol=1e-15)
    assert w.is_symmetric()

    vals, vecs = walk_spectrum(w)
    s = math.sqrt(1 - 3 * p + 3 * p * p)
    assert np.allclose(vals, [-1, -s, -s, s, s, 1], atol=1e-12)
    assert np.allclose(np.abs(vecs[:, -1]), 1 / math.sqrt(6), atol=1e-12)

    tr = gt.traces()[order]
    assert tr.tolist() == [4, 2, 2, 1, 1, 2]
    ok, parity = bipartiteness_check(gt, w)
    assert ok and parity[order].tolist() == [0, 1, 1, 0, 0, 1]
    assert tr.sum() == 12
    assert float(((-1.0) ** parity) @ gt.traces()) == 0

    # W and the induced graph share the subleading eigenvalue.
    assert subleading_eigenvalue(vals) == pytest.approx(connectivity_of(two_qubit(p), method="dense").beta_star, abs=1e-12)


def test_element_traces():
    assert element_trace(GF2Matrix.identity(2)) == 4
    u1, u2 = cnot_gf2(0, 1, 2), cnot_gf2(1, 0, 2)
    assert element_trace(u1) == 2
    assert element_trace(u1 @ u2) == 1
    assert element_trace(GF2Matrix.identity(5)) == 32


def test_trace_half_tends_to_two():
    gt, w = walk_for(two_qubit(0.5))
    assert trace_phi_power(gt, w, 0) == 4
    assert trace_phi_power(gt, w, 60) == pytest.approx(2, abs=1e-12)
    # Tr phi^n = 2 + s^n A with s = 1/2.
    exp = {round(v, 9): c for v, c in trace_expansion(gt, w)}
    assert exp[1.0] == pytest.approx(2.0, abs=1e-12)
    assert exp[-1.0] == pytest.approx(0.0, abs=1e-12)
    assert exp[0.5] == pytest.approx(1.0, abs=1e-12)
    assert exp[-0.5] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("n", [2, 3])
def test_trace_identity_small(n):
    g = make_complete(n)
    gt, w = walk_for(g)
    for k in range(11):
        assert trace_phi_power(gt, w, k) == pytest.approx(direct_trace_phi_power(g, k), abs=1e-10)


def test_direct_trace_dense_oracle_n3():
    g = make_complete(3)
    phi = build_induced_graph(g, drop_zero=False).adjacency.toarray()
    for k in range(6):
        assert direct_trace_phi_power(g, k) == pytest.approx(np.trace(np.linalg.matrix_power(phi, k)), abs=1e-12)


def test_spectral_route_matches_products():
    gt, w = walk_for(make_complete(3))
    vals, vecs = walk_spectrum(w)
    for k in (0, 1, 5, 10):
        assert np.allclose(walk_distribution(w, k), walk_distribution_spectral(vals, vecs, k), atol=1e-12)


def test_superoperator_trace_n2():
    g = two_qubit(0.3)
    gt, w = walk_for(g)
    phi = superoperator_matrix(g)
    for k in range(8):
        direct = np.trace(np.linalg.matrix_power(phi, k))
        assert trace_superoperator_power(gt, w, k) == pytest.approx(direct, abs=1e-10)
    assert trace_superoperator_power(gt, w, 3) != pytest.approx(trace_phi_power(gt, w, 3))


def test_bipartiteness():
    gt, w = walk_for(make_complete(3))
    ok, parity = bipartiteness_check(gt, w)
    assert not ok and parity is None
    single = InteractionGraph(2, ((0, 1, 1.0),))
    gt1, w1 = walk_for(single)
    assert gt1.order == 2
    assert bipartiteness_check(gt1, w1)[0]


def test_bad_probabilities():
    gt = group_of(two_qubit(0.5))
    with pytest.raises(ValueError):
        build_walk_matrix(gt, [1.0])
    with pytest.raises(ValueError):
        build_walk_matrix(gt, [0.5, 0.6])
