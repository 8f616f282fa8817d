"""Measurement models turning a pooling graph and ground truth into results.

Three variants are supported:

``exact``
    each query returns the multiplicity-weighted number of one-agents it drew.
``channel``
    every single draw is read through a binary channel: a one is read as
    zero with probability ``p`` and a zero as one with probability ``q``.
    Repeated draws of the same agent are read independently.  ``q = 0`` is
    the Z-channel.
``query``
    the exact sum plus one independent ``N(0, lam**2)`` variate per query.
    Results are not clamped and may be negative.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidConfigError
from .model import GroundTruth, PoolingGraph, as_generator


@dataclass(frozen=True)
class NoiseModel:
    variant: str = "exact"
    p: float = 0.0
    q: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.variant == "exact":
            if self.p or self.q or self.lam:
                raise InvalidConfigError("exact model takes no noise parameters")
        elif self.variant == "channel":
            if not (0.0 <= self.p < 1.0 and 0.0 <= self.q < 1.0):
                raise InvalidConfigError(f"channel needs p, q in [0, 1), got p={self.p}, q={self.q}")
            if self.p + self.q >= 1.0:
                raise InvalidConfigError(f"channel needs p + q < 1, got {self.p + self.q}")
            if self.lam:
                raise InvalidConfigError("channel model takes no lambda")
        elif self.variant == "query":
            if not self.lam >= 0.0:
                raise InvalidConfigError(f"query noise needs lambda >= 0, got {self.lam}")
            if self.p or self.q:
                raise InvalidConfigError("query model takes no p, q")
        else:
            raise InvalidConfigError(f"unknown noise variant {self.variant!r}")

    @classmethod
    def exact(cls):
        return cls("exact")

    @classmethod
    def channel(cls, p, q=0.0):
        return cls("channel", p=float(p), q=float(q))

    @classmethod
    def query(cls, lam):
        return cls("query", lam=float(lam))

    @property
    def label(self) -> str:
        """Short CLI/CSV name: none, z, gnc or gauss."""
        if self.variant == "exact":
            return "none"
        if self.variant == "channel":
            return "z" if self.q == 0.0 else "gnc"
        return "gauss"

    @classmethod
    def from_label(cls, label, p=0.0, q=0.0, lam=0.0):
        if label == "none":
            return cls.exact()
        if label == "z":
            if q:
                raise InvalidConfigError("the Z-channel has q = 0")
            return cls.channel(p, 0.0)
        if label == "gnc":
            return cls.channel(p, q)
        if label == "gauss":
            return cls.query(lam)
        raise InvalidConfigError(f"unknown model label {label!r}")

    @property
    def signal_gain(self) -> float:
        """Slope of the expected result in the exact sum (1 - p - q)."""
        return 1.0 - self.p - self.q


@dataclass(frozen=True)
class QueryResults:
    values: np.ndarray
    edge_bits: np.ndarray | None = None  # (m, gamma) observed bits, debug mode only

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        if self.edge_bits is not None:
            bits = np.asarray(self.edge_bits, dtype=np.int8).copy()
            bits.setflags(write=False)
            object.__setattr__(self, "edge_bits", bits)

    @property
    def m(self) -> int:
        return self.values.shape[0]


def observe_rows(draw_bits: np.ndarray, model: NoiseModel, gen: np.random.Generator):
    """Read a block of queries given the true bit of every draw.

    ``draw_bits`` has shape (rows, gamma).  Returns ``(values, edge_bits)``
    where ``edge_bits`` holds the observed bit of each draw (the true bits for
    the exact and query models).
    """
    if model.variant == "channel":
        u = gen.random(draw_bits.shape)
        observed = np.where(draw_bits == 1, u < 1.0 - model.p, u < model.q).astype(np.int8)
        return observed.sum(axis=1, dtype=np.int64).astype(np.float64), observed
    values = draw_bits.sum(axis=1, dtype=np.int64).astype(np.float64)
    if model.variant == "query" and model.lam > 0.0:
        values = values + model.lam * gen.standard_normal(values.shape[0])
    return values, draw_bits


def measure(graph: PoolingGraph, truth: GroundTruth, model: NoiseModel, rng=None, debug=False) -> QueryResults:
    """Query results for every query of ``graph``.

    With ``debug=True`` the observed per-draw bits are kept on the result so
    that second-neighbourhood decompositions can be checked.
    """
    if truth.n != graph.n:
        raise DimensionMismatchError(f"graph has n={graph.n} agents, truth has {truth.n}")
    if rng is None and model.variant != "exact":
        raise InvalidConfigError(f"{model.variant} model needs a random stream")
    gen = as_generator(rng) if rng is not None else None
    draw_bits = truth.bits[graph.queries]
    values, observed = observe_rows(draw_bits, model, gen)
    return QueryResults(values, observed if debug else None)


def second_neighborhood_count_oracle(graph: PoolingGraph, truth: GroundTruth, agent: int, channel_draws=None) -> int:
    """Observed ones among the co-members of ``agent`` in its distinct queries.

    Counts, over every distinct query containing ``agent``, the observed bits
    of all draws that are *not* the agent itself.  ``channel_draws`` is the
    (m, gamma) array of observed bits; by default the true bits are used.
    Straight loops on purpose: this is a test oracle.
    """
    if truth.n != graph.n:
        raise DimensionMismatchError(f"graph has n={graph.n} agents, truth has {truth.n}")
    if not (0 <= agent < graph.n):
        raise IndexError(f"agent {agent} out of range for n={graph.n}")
    observed = truth.bits[graph.queries] if channel_draws is None else np.asarray(channel_draws)
    if observed.shape != graph.queries.shape:
        raise DimensionMismatchError("channel draws must match the query draw array")
    total = 0
    for j in graph.memberships(agent):
        for drawn, bit in zip(graph.queries[j], observed[j]):
            if drawn != agent:
                total += int(bit)
    return total


def own_contribution(graph: PoolingGraph, agent: int, channel_draws) -> int:
    """Observed bits on the agent's own draws (sums to Delta_i * sigma_i when exact)."""
    return int(np.asarray(channel_draws)[graph.queries == agent].sum())
