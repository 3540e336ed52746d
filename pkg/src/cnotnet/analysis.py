"""Connectivity bounds, N-scans, and fixed-exponent power-law fits."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .eigen import LanczosConfig
from .induced import InducedGraph, build_induced_graph, unweighted_diameter
from .network import InteractionGraph, NoiseSpec, apply_noise, make_topology
from .spectral import SpectralSummary, algebraic_connectivity

BOUND_TOL = 1e-10


class BoundNotApplicable(ValueError):
    pass


class FitError(ValueError):
    pass


def diameter_bound(ig: InducedGraph, diameter: int | None = None) -> float:
    """Lower bound 4 / ((2**N - 1) * diam) on the algebraic connectivity."""
    if diameter is None:
        diameter = unweighted_diameter(ig)
    return 4.0 / (((1 << ig.n_qubits) - 1) * diameter)


def min_weight_bound(g: InteractionGraph) -> float:
    """Smallest link probability; a lower bound only for complete topologies."""
    if not g.is_complete():
        raise BoundNotApplicable("the minimum-weight bound needs a complete interaction graph")
    return g.min_probability


@dataclass(frozen=True)
class BoundReport:
    n_qubits: int
    descriptor: str
    gamma: float
    diameter: int
    diameter_bound: float
    min_weight_bound: float | None

    @property
    def diameter_ok(self) -> bool:
        return self.diameter_bound <= self.gamma + BOUND_TOL

    @property
    def min_weight_ok(self) -> bool | None:
        if self.min_weight_bound is None:
            return None
        return self.min_weight_bound <= self.gamma + BOUND_TOL

    @property
    def satisfied(self) -> bool:
        return self.diameter_ok and self.min_weight_ok is not False

    @property
    def slack(self) -> tuple[float, float | None]:
        """gamma divided by each bound."""
        mw = None if not self.min_weight_bound else self.gamma / self.min_weight_bound
        return self.gamma / self.diameter_bound, mw


def bound_report(g: InteractionGraph, descriptor: str = "", cfg: LanczosConfig | None = None,
                 diameter: int | None = None, summary: SpectralSummary | None = None) -> BoundReport:
    ig = build_induced_graph(g)
    if summary is None:
        summary = algebraic_connectivity(ig, cfg)
    if diameter is None:
        diameter = unweighted_diameter(ig)
    mw = min_weight_bound(g) if g.is_complete() else None
    return BoundReport(g.n_qubits, descriptor, summary.gamma, diameter, diameter_bound(ig, diameter), mw)


@dataclass(frozen=True)
class FitResult:
    exponents: tuple[float, float]
    a: float
    b: float
    rss: float
    n_range: tuple[int, int]
    residuals: tuple[float, ...]

    def predict(self, n) -> np.ndarray:
        n = np.asarray(n, dtype=float)
        return self.a * n ** -self.exponents[0] + self.b * n ** -self.exponents[1]

    def to_dict(self) -> dict:
        return {
            "exponents": list(self.exponents),
            "a": self.a,
            "b": self.b,
            "rss": self.rss,
            "n_min": self.n_range[0],
            "n_max": self.n_range[1],
            "residuals": list(self.residuals),
        }


def _window(points, n_min: int):
    pts = sorted((int(n), float(y)) for n, y in points if n >= n_min)
    ns = np.array([n for n, _ in pts], dtype=float)
    ys = np.array([y for _, y in pts])
    return ns, ys


def power_law_fit(points: Sequence[tuple[int, float]], exponents: tuple[float, float] = (1.0, 2.0),
                  n_min: int = 8) -> FitResult:
    """Least squares ``y ~ a N**-e1 + b N**-e2`` over points with ``N >= n_min``.

    The two basis columns are rescaled to unit norm before forming the 2x2
    normal equations, which are then solved in closed form.
    """
    e1, e2 = map(float, exponents)
    if not e1 < e2:
        raise FitError("exponents must satisfy e1 < e2")
    ns, ys = _window(points, n_min)
    if len(ns) < 3:
        raise FitError(f"need at least 3 points with N >= {n_min}, got {len(ns)}")
    x1, x2 = ns ** -e1, ns ** -e2
    s1, s2 = np.linalg.norm(x1), np.linalg.norm(x2)
    u1, u2 = x1 / s1, x2 / s2
    c = float(u1 @ u2)
    det = 1.0 - c * c
    if det <= 1e-13:
        raise FitError("design matrix is rank deficient for this N set")
    t1, t2 = float(u1 @ ys), float(u2 @ ys)
    a = (t1 - c * t2) / det / s1
    b = (t2 - c * t1) / det / s2
    resid = ys - (a * x1 + b * x2)
    return FitResult((e1, e2), a, b, float(resid @ resid), (int(ns[0]), int(ns[-1])), tuple(resid.tolist()))


def single_power_fit(points, exponent: float = 1.0, n_min: int = 8) -> FitResult:
    """One-term fit ``y ~ a N**-e``; returned with ``b = 0``."""
    ns, ys = _window(points, n_min)
    if len(ns) < 2:
        raise FitError("need at least 2 points")
    x = ns ** -float(exponent)
    a = float(x @ ys / (x @ x))
    resid = ys - a * x
    return FitResult((float(exponent), math.inf), a, 0.0, float(resid @ resid),
                     (int(ns[0]), int(ns[-1])), tuple(resid.tolist()))


def replica_seed(master_seed: int, n_qubits: int, replica: int) -> int:
    """Per-task noise seed: first word of SeedSequence(master, spawn_key=(N, replica)).

    Epsilon is deliberately not part of the key, so scans at different noise
    levels share the underlying uniform draws.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(n_qubits, replica))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass
class ScanPoint:
    n_qubits: int
    gammas: list[float]
    diameter: int
    bound19: float
    bound21: float | None
    min_probabilities: list[float] = field(default_factory=list)
    positivity_violations: int = 0

    @property
    def gamma_mean(self) -> float:
        return float(np.mean(self.gammas))

    @property
    def gamma_std(self) -> float:
        """Sample standard deviation across replicas (0 for a single one)."""
        return float(np.std(self.gammas, ddof=1)) if len(self.gammas) > 1 else 0.0

    @property
    def bounds_hold(self) -> bool:
        ok = all(self.bound19 <= g + BOUND_TOL for g in self.gammas)
        if self.bound21 is not None:
            ok = ok and all(p <= g + BOUND_TOL for p, g in zip(self.min_probabilities, self.gammas))
        return ok

    def row(self) -> tuple:
        return (self.n_qubits, self.gamma_mean, self.gamma_std, self.bound19,
                "" if self.bound21 is None else self.bound21)


SCAN_COLUMNS = ("N", "gamma_mean", "gamma_std", "bound19", "bound21")


def _gamma_task(args) -> tuple[float, float, bool]:
    g, cfg = args
    s = algebraic_connectivity(build_induced_graph(g), cfg)
    return s.gamma, g.min_probability, s.positivity_violated


_diameter_cache: dict[tuple, int] = {}


def _diameter_for(g: InteractionGraph) -> int:
    key = (g.n_qubits, tuple(sorted((c, t) for c, t, p in g.links if p > 0)))
    if key not in _diameter_cache:
        _diameter_cache[key] = unweighted_diameter(build_induced_graph(g))
    return _diameter_cache[key]


def scan_graphs(topology: str, n_values: Sequence[int], epsilon: float | None = None,
                replicas: int = 20, master_seed: int = 0) -> list[tuple[int, list[InteractionGraph]]]:
    out = []
    for n in n_values:
        base = make_topology(topology, n)
        if epsilon is None or epsilon == 0.0:
            graphs = [base]
        else:
            graphs = [apply_noise(base, NoiseSpec(epsilon, replica_seed(master_seed, n, r)))
                      for r in range(replicas)]
        out.append((n, graphs))
    return out


def scan_connectivity(topology: str, n_values: Sequence[int], epsilon: float | None = None,
                      replicas: int = 20, master_seed: int = 0, cfg: LanczosConfig | None = None,
                      threads: int = 1, with_diameter: bool = True) -> list[ScanPoint]:
    """Algebraic connectivity (mean and spread over noise replicas) for each N.

    Results are assembled in (N, replica) order whatever the thread count.
    """
    plan = scan_graphs(topology, n_values, epsilon, replicas, master_seed)
    tasks = [(g, cfg) for _, graphs in plan for g in graphs]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_gamma_task, tasks))
    else:
        results = [_gamma_task(t) for t in tasks]

    points, k = [], 0
    for n, graphs in plan:
        chunk = results[k:k + len(graphs)]
        k += len(graphs)
        gammas = [r[0] for r in chunk]
        diam = _diameter_for(graphs[0]) if with_diameter else 0
        b19 = 4.0 / (((1 << n) - 1) * diam) if diam else math.nan
        complete = graphs[0].is_complete()
        points.append(ScanPoint(
            n_qubits=n,
            gammas=gammas,
            diameter=diam,
            bound19=b19,
            bound21=min(r[1] for r in chunk) if complete else None,
            min_probabilities=[r[1] for r in chunk] if complete else [],
            positivity_violations=sum(r[2] for r in chunk),
        ))
    return points


def fit_scan(points: Sequence[ScanPoint], exponents=(1.0, 2.0), n_min: int = 8) -> FitResult:
    return power_law_fit([(p.n_qubits, p.gamma_mean) for p in points], exponents, n_min)


def parse_n_range(text: str) -> list[int]:
    """``"3..13"`` -> [3, ..., 13]; also accepts ``"4"`` and ``"3,5,8"``."""
    text = text.strip()
    if ".." in text:
        lo, hi = (int(x) for x in text.split("..", 1))
        if hi < lo:
            raise ValueError(f"empty N range {text!r}")
        return list(range(lo, hi + 1))
    return [int(x) for x in text.split(",") if x]
