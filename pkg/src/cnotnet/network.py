"""Interaction graphs: which qubit pairs carry a CNOT and with what probability.

A link ``(control, target, p)`` means that on each application of the channel
the gate CNOT(control -> target) is chosen with probability ``p``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

MAX_QUBITS = 16
PROB_TOL = 1e-12

Link = tuple[int, int, float]


class NetworkError(ValueError):
    """Raised for malformed interaction graphs or invalid sizes."""


@dataclass(frozen=True)
class InteractionGraph:
    n_qubits: int
    links: tuple[Link, ...]
    max_qubits: int = field(default=MAX_QUBITS, compare=False, repr=False)

    def __post_init__(self):
        links = tuple((int(c), int(t), float(p)) for c, t, p in self.links)
        object.__setattr__(self, "links", links)
        self.validate()

    def validate(self) -> None:
        n = self.n_qubits
        if n < 2:
            raise NetworkError(f"need at least 2 qubits, got {n}")
        if n > self.max_qubits:
            raise NetworkError(f"{n} qubits exceeds the ceiling of {self.max_qubits}")
        if not self.links:
            raise NetworkError("interaction graph has no links")
        seen = set()
        for c, t, p in self.links:
            if not (0 <= c < n and 0 <= t < n):
                raise NetworkError(f"link ({c}, {t}) references a qubit outside 0..{n - 1}")
            if c == t:
                raise NetworkError(f"link ({c}, {t}) has control == target")
            if (c, t) in seen:
                raise NetworkError(f"duplicate link ({c}, {t})")
            seen.add((c, t))
            if not np.isfinite(p) or p < 0:
                raise NetworkError(f"link ({c}, {t}) has invalid probability {p}")
        total = sum(p for _, _, p in self.links)
        if abs(total - 1.0) > PROB_TOL:
            raise NetworkError(f"link probabilities sum to {total!r}, not 1")

    @property
    def pairs(self) -> list[tuple[int, int]]:
        return [(c, t) for c, t, _ in self.links]

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([p for _, _, p in self.links])

    @property
    def min_probability(self) -> float:
        return min(p for _, _, p in self.links)

    def is_complete(self) -> bool:
        """True when every ordered qubit pair carries a link with nonzero weight."""
        n = self.n_qubits
        present = {(c, t) for c, t, p in self.links if p > 0}
        return len(present) == n * (n - 1)

    def to_dict(self) -> dict:
        return {"n_qubits": self.n_qubits, "links": [[c, t, p] for c, t, p in self.links]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "InteractionGraph":
        return cls(int(data["n_qubits"]), tuple(tuple(link) for link in data["links"]))

    @classmethod
    def from_json(cls, text: str) -> "InteractionGraph":
        return cls.from_dict(json.loads(text))


def from_weights(n_qubits: int, pairs: Sequence[tuple[int, int]], weights: Iterable[float]) -> InteractionGraph:
    """Build a graph from raw nonnegative weights, normalizing by their exact sum."""
    w = np.asarray(list(weights), dtype=float)
    if len(w) != len(pairs):
        raise NetworkError("weights and pairs differ in length")
    total = w.sum()
    if total <= 0:
        raise NetworkError("weights must have a positive sum")
    p = w / total
    return InteractionGraph(n_qubits, tuple((c, t, float(x)) for (c, t), x in zip(pairs, p)))


def _check_size(n: int, minimum: int, what: str) -> None:
    if n < minimum:
        raise NetworkError(f"{what} needs N >= {minimum}, got {n}")


def complete_pairs(n: int) -> list[tuple[int, int]]:
    return [(c, t) for c in range(n) for t in range(n) if c != t]


def make_complete(n: int) -> InteractionGraph:
    _check_size(n, 2, "complete graph")
    pairs = complete_pairs(n)
    p = 1.0 / (n * (n - 1))
    return InteractionGraph(n, tuple((c, t, p) for c, t in pairs))


def make_cycle(n: int, both_orientations: bool = False) -> InteractionGraph:
    """Oriented ring i -> i+1 (mod N).

    With ``both_orientations`` every neighbour pair carries both directions,
    giving 2N links of weight 1/(2N).
    """
    _check_size(n, 3, "cycle")
    pairs = [(i, (i + 1) % n) for i in range(n)]
    if both_orientations:
        pairs += [((i + 1) % n, i) for i in range(n)]
    p = 1.0 / len(pairs)
    return InteractionGraph(n, tuple((c, t, p) for c, t in pairs))


def make_star(n: int) -> InteractionGraph:
    """Hub qubit 0 controls every other qubit."""
    _check_size(n, 2, "star")
    p = 1.0 / (n - 1)
    return InteractionGraph(n, tuple((0, j, p) for j in range(1, n)))


def make_unbalanced(n: int) -> InteractionGraph:
    """Complete topology where link (0 -> 1) has raw weight 1 and all others N**-3."""
    _check_size(n, 3, "unbalanced graph")
    pairs = complete_pairs(n)
    small = float(n) ** -3
    weights = [1.0 if pair == (0, 1) else small for pair in pairs]
    return from_weights(n, pairs, weights)


def unbalanced_min_probability(n: int) -> float:
    small = float(n) ** -3
    return small / (1.0 + (n * (n - 1) - 1) * small)


@dataclass(frozen=True)
class NoiseSpec:
    """Multiplicative weight noise: each p_i is scaled by U[1 - epsilon, 1 + epsilon]."""

    epsilon: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise NetworkError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        if not 0 <= self.seed < 2**64:
            raise NetworkError("seed must be an unsigned 64-bit integer")


# Noise draws use numpy's PCG64 seeded through SeedSequence; one uniform per
# link, consumed in link-list order.
RNG_NAME = "numpy.random.PCG64 via SeedSequence"


def noise_rng(seed: int, *spawn_key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=tuple(spawn_key))))


def noise_multipliers(n_links: int, spec: NoiseSpec) -> np.ndarray:
    rng = noise_rng(spec.seed)
    return rng.uniform(1.0 - spec.epsilon, 1.0 + spec.epsilon, size=n_links)


def apply_noise(g: InteractionGraph, spec: NoiseSpec) -> InteractionGraph:
    if spec.epsilon == 0.0:
        return g
    u = noise_multipliers(len(g.links), spec)
    return from_weights(g.n_qubits, g.pairs, g.probabilities * u)


TOPOLOGIES = {
    "complete": make_complete,
    "cycle": make_cycle,
    "circle": make_cycle,
    "star": make_star,
    "unbalanced": make_unbalanced,
}


def make_topology(name: str, n: int) -> InteractionGraph:
    try:
        factory = TOPOLOGIES[name]
    except KeyError:
        raise NetworkError(f"unknown topology {name!r}; choose from {sorted(TOPOLOGIES)}") from None
    return factory(n)
