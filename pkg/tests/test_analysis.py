import pytest
from hypothesis import given, settings, strategies as st

from cnotnet.analysis import (
    BoundNotApplicable,
    FitError,
    bound_report,
    diameter_bound,
    fit_scan,
    min_weight_bound,
    parse_n_range,
    power_law_fit,
    replica_seed,
    scan_connectivity,
    single_power_fit,
)
from cnotnet.induced import build_induced_graph
from cnotnet.network import make_complete, make_cycle, make_star, make_unbalanced


def test_diameter_bound_examples():
    assert diameter_bound(build_induced_graph(make_complete(4))) == pytest.approx(1 / 15, abs=1e-15)
    assert diameter_bound(build_induced_graph(make_cycle(4))) == pytest.approx(2 / 45, abs=1e-15)


def test_min_weight_bound():
    assert min_weight_bound(make_complete(5)) == pytest.approx(1 / 20, abs=1e-15)
    assert min_weight_bound(make_unbalanced(10)) == pytest.approx(9.182e-4, rel=1e-3)
    for g in (make_cycle(4), make_star(4)):
        with pytest.raises(BoundNotApplicable):
            min_weight_bound(g)


def test_bound_report():
    r = bound_report(make_complete(4), "complete")
    assert r.satisfied and r.diameter_ok and r.min_weight_ok
    assert r.diameter == 4
    s19, s21 = r.slack
    assert s19 > 1 and s21 > 1
    c = bound_report(make_cycle(5))
    assert c.min_weight_bound is None and c.min_weight_ok is None and c.satisfied


def test_exact_recovery():
    pts = [(n, 0.7 / n + 0.03 / n**2) for n in range(3, 16)]
    fit = power_law_fit(pts)
    assert fit.a == pytest.approx(0.7, abs=1e-12)
    assert fit.b == pytest.approx(0.03, abs=1e-12)
    assert fit.n_range == (8, 15)
    assert fit.rss < 1e-28


@given(st.floats(-5, 5), st.floats(-5, 5),
       st.sampled_from([(1.0, 2.0), (1.5, 2.5), (2.0, 4.0)]))
@settings(max_examples=100, deadline=None)
def test_exact_recovery_property(a, b, ex):
    pts = [(n, a * n ** -ex[0] + b * n ** -ex[1]) for n in range(8, 16)]
    fit = power_law_fit(pts, ex)
    assert fit.a == pytest.approx(a, abs=1e-12)
    assert fit.b == pytest.approx(b, abs=1e-12)


def test_fit_errors():
    with pytest.raises(FitError):
        power_law_fit([(8, 1.0), (9, 1.0)])
    with pytest.raises(FitError):
        power_law_fit([(n, 1.0) for n in range(8, 12)], (2.0, 1.0))
    with pytest.raises(FitError):
        power_law_fit([(8, 1.0), (8, 1.1), (8, 0.9)])


def test_fit_prediction_and_dict():
    fit = power_law_fit([(n, 1 / n) for n in range(8, 12)])
    assert fit.predict([10]) == pytest.approx([0.1])
    d = fit.to_dict()
    assert d["n_min"] == 8 and d["n_max"] == 11 and len(d["residuals"]) == 4


def test_scan_complete_decreasing_and_bounds():
    pts = scan_connectivity("complete", range(3, 10))
    gm = [p.gamma_mean for p in pts]
    assert all(b < a for a, b in zip(gm, gm[1:]))
    assert all(p.bounds_hold for p in pts)
    assert all(p.gamma_std == 0 for p in pts)
    # Two-term form fits better than a single power on the same data.
    two = fit_scan(pts, (1.0, 2.0), n_min=5)
    one = single_power_fit([(p.n_qubits, p.gamma_mean) for p in pts], 1.0, n_min=5)
    assert two.rss < one.rss


def test_noisy_scan_deterministic_and_parallel():
    a = scan_connectivity("complete", [4, 5], epsilon=0.6, replicas=4, master_seed=3)
    b = scan_connectivity("complete", [4, 5], epsilon=0.6, replicas=4, master_seed=3, threads=2)
    assert [p.gammas for p in a] == [p.gammas for p in b]
    assert all(p.gamma_std > 0 for p in a)
    assert all(p.bound21 is not None and p.bounds_hold for p in a)
    c = scan_connectivity("complete", [4, 5], epsilon=0.6, replicas=4, master_seed=4)
    assert [p.gammas for p in a] != [p.gammas for p in c]


def test_noise_lowers_mean_gamma():
    hi = scan_connectivity("complete", [6], epsilon=1.0, replicas=10)[0].gamma_mean
    lo = scan_connectivity("complete", [6], epsilon=0.3, replicas=10)[0].gamma_mean
    base = scan_connectivity("complete", [6])[0].gamma_mean
    assert hi <= lo <= base


def test_replica_seed():
    assert replica_seed(0, 6, 1) == replica_seed(0, 6, 1)
    seeds = {replica_seed(0, n, r) for n in range(3, 8) for r in range(20)}
    assert len(seeds) == 100
    assert replica_seed(1, 6, 1) != replica_seed(0, 6, 1)


def test_parse_n_range():
    assert parse_n_range("3..6") == [3, 4, 5, 6]
    assert parse_n_range("4") == [4]
    assert parse_n_range("3,5,8") == [3, 5, 8]
    with pytest.raises(ValueError):
        parse_n_range("6..3")
    with pytest.raises(ValueError):
        parse_n_range("a..b")
