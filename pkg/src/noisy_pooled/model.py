"""Problem instances: ground truth, pooling multigraph and degree statistics.

An instance has ``n`` agents, ``k`` of which hold bit one, and ``m`` queries.
Every query draws ``gamma`` agents uniformly at random *with replacement*, so
an agent can sit in the same query several times.  Per agent we track

* the multi-degree ``Delta_i`` (number of draws that hit agent ``i``), and
* the distinct degree ``Delta*_i`` (number of distinct queries containing it).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyGraphError, InvalidConfigError

_UINT64 = 2**64


@dataclass(frozen=True)
class RngHandle:
    """Seed pair naming one reproducible random stream.

    The stream is numpy's PCG64 seeded through ``SeedSequence`` with
    ``entropy=master_seed`` and ``spawn_key=(stream_id,)``.  SeedSequence
    hashes both values, so neighbouring stream ids give unrelated streams and
    the draws are identical on every platform numpy supports.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self):
        for name in ("master_seed", "stream_id"):
            value = getattr(self, name)
            if not (0 <= int(value) < _UINT64):
                raise InvalidConfigError(f"{name} must be a 64-bit unsigned integer, got {value}")

    def generator(self) -> np.random.Generator:
        seq = np.random.SeedSequence(entropy=int(self.master_seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(seq))


def as_generator(rng) -> np.random.Generator:
    """Accept an RngHandle or an existing Generator."""
    if isinstance(rng, RngHandle):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngHandle or numpy Generator, got {type(rng).__name__}")


@dataclass(frozen=True)
class Regime:
    """How ``k`` was derived from ``n``; metadata only.

    ``kind`` is one of ``"sublinear"`` (k = n**theta), ``"linear"``
    (k = zeta * n) or ``"explicit"``.
    """

    kind: str = "explicit"
    value: float | None = None

    def __post_init__(self):
        if self.kind not in ("sublinear", "linear", "explicit"):
            raise InvalidConfigError(f"unknown regime {self.kind!r}")
        if self.kind != "explicit":
            if self.value is None or not (0.0 < self.value < 1.0):
                raise InvalidConfigError(f"{self.kind} regime needs a parameter in (0, 1), got {self.value}")

    def k_for(self, n: int) -> int:
        if self.kind == "sublinear":
            return int(round(n**self.value))
        if self.kind == "linear":
            return int(round(self.value * n))
        raise InvalidConfigError("explicit regime carries no rule for k")

    def describe(self) -> str:
        if self.kind == "explicit":
            return "explicit"
        return f"{self.kind}:{self.value:g}"

    @classmethod
    def parse(cls, text: str) -> "Regime":
        if text == "explicit":
            return cls()
        kind, _, value = text.partition(":")
        return cls(kind, float(value))


def default_gamma(n: int) -> int:
    return max(1, n // 2)


@dataclass(frozen=True)
class ProblemConfig:
    n: int
    k: int
    m: int
    gamma: int | None = None
    regime: Regime = field(default_factory=Regime)

    def __post_init__(self):
        if self.gamma is None:
            object.__setattr__(self, "gamma", default_gamma(self.n))
        if self.n < 1:
            raise InvalidConfigError(f"n must be positive, got {self.n}")
        if not (0 <= self.k <= self.n):
            raise InvalidConfigError(f"k must lie in [0, n={self.n}], got {self.k}")
        if self.m < 0:
            raise InvalidConfigError(f"m must be non-negative, got {self.m}")
        if self.gamma < 1:
            raise InvalidConfigError(f"gamma must be at least 1, got {self.gamma}")
        if self.regime.kind != "explicit" and self.regime.k_for(self.n) != self.k:
            raise InvalidConfigError(
                f"k={self.k} inconsistent with {self.regime.describe()} at n={self.n}"
            )

    @classmethod
    def sublinear(cls, n, theta, m, gamma=None):
        regime = Regime("sublinear", theta)
        return cls(n, regime.k_for(n), m, gamma, regime)

    @classmethod
    def linear(cls, n, zeta, m, gamma=None):
        regime = Regime("linear", zeta)
        return cls(n, regime.k_for(n), m, gamma, regime)

    def with_m(self, m: int) -> "ProblemConfig":
        return ProblemConfig(self.n, self.k, m, self.gamma, self.regime)


def _readonly(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GroundTruth:
    bits: np.ndarray

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.int8)
        if bits.ndim != 1 or np.any((bits != 0) & (bits != 1)):
            raise InvalidConfigError("ground truth must be a 0/1 vector")
        object.__setattr__(self, "bits", _readonly(bits.copy()))

    @property
    def n(self) -> int:
        return self.bits.shape[0]

    @property
    def k(self) -> int:
        return int(self.bits.sum())

    @property
    def ones(self) -> np.ndarray:
        return np.flatnonzero(self.bits)


def sample_ground_truth(config: ProblemConfig, rng) -> GroundTruth:
    """Uniform weight-k bit vector of length n."""
    if config.n < 1 or not (0 <= config.k <= config.n):
        raise InvalidConfigError(f"cannot place k={config.k} ones among n={config.n} agents")
    gen = as_generator(rng)
    bits = np.zeros(config.n, dtype=np.int8)
    bits[gen.choice(config.n, size=config.k, replace=False)] = 1
    return GroundTruth(bits)


class PoolingGraph:
    """Bipartite multigraph between ``m`` queries and ``n`` agents.

    ``queries[j]`` is the ordered list of the ``gamma`` draws of query ``j``.
    Distinct (query, agent) incidences are kept twice in CSR form: grouped by
    query (``pair_query``/``pair_agent``, ascending query then agent) and grouped
    by agent (``membership_indptr``/``membership_queries``, ascending query
    inside each agent).  All arrays are read-only after construction.
    """

    def __init__(self, n: int, queries):
        queries = np.asarray(queries)
        if queries.ndim != 2:
            raise InvalidConfigError("queries must be a 2-d array of shape (m, gamma)")
        if n < 1 or queries.shape[1] < 1:
            raise InvalidConfigError("need n >= 1 and gamma >= 1")
        if queries.size and (queries.min() < 0 or queries.max() >= n):
            raise InvalidConfigError("query draws must be agent indices in [0, n)")
        self.n = int(n)
        self.queries = _readonly(queries.astype(np.int32 if n < 2**31 else np.int64, copy=True))
        m, gamma = self.queries.shape

        ordered = np.sort(self.queries, axis=1)
        first = np.ones(ordered.shape, dtype=bool)
        first[:, 1:] = ordered[:, 1:] != ordered[:, :-1]
        self.pair_query = _readonly(np.nonzero(first)[0].astype(np.int64))
        self.pair_agent = _readonly(ordered[first].astype(np.int64))

        self.multi_degree = _readonly(np.bincount(self.queries.ravel(), minlength=n).astype(np.int64))
        self.distinct_degree = _readonly(np.bincount(self.pair_agent, minlength=n).astype(np.int64))

        by_agent = np.argsort(self.pair_agent, kind="stable")
        self.membership_queries = _readonly(self.pair_query[by_agent])
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(self.distinct_degree, out=indptr[1:])
        self.membership_indptr = _readonly(indptr)

    @property
    def m(self) -> int:
        return self.queries.shape[0]

    @property
    def gamma(self) -> int:
        return self.queries.shape[1]

    def memberships(self, agent: int) -> np.ndarray:
        """Sorted distinct query indices containing ``agent``."""
        lo, hi = self.membership_indptr[agent], self.membership_indptr[agent + 1]
        return self.membership_queries[lo:hi]

    def multiplicity_matrix(self) -> np.ndarray:
        """Dense (m, n) matrix of draw counts."""
        counts = np.zeros((self.m, self.n), dtype=np.int64)
        np.add.at(counts, (np.repeat(np.arange(self.m), self.gamma), self.queries.ravel()), 1)
        return counts

    def __eq__(self, other):
        if not isinstance(other, PoolingGraph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.queries, other.queries)

    def __repr__(self):
        return f"PoolingGraph(n={self.n}, m={self.m}, gamma={self.gamma})"

    def to_text(self) -> str:
        """Line format: header ``n m gamma`` then one line of draws per query."""
        lines = [f"{self.n} {self.m} {self.gamma}"]
        lines.extend(" ".join(map(str, row)) for row in self.queries.tolist())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PoolingGraph":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise InvalidConfigError("empty graph text")
        n, m, gamma = (int(tok) for tok in lines[0].split())
        if len(lines) - 1 != m:
            raise InvalidConfigError(f"header announces {m} queries, found {len(lines) - 1}")
        rows = [[int(tok) for tok in ln.split()] for ln in lines[1:]]
        if any(len(r) != gamma for r in rows):
            raise InvalidConfigError(f"every query line must list gamma={gamma} agents")
        return cls(n, np.array(rows, dtype=np.int64).reshape(m, gamma))

    def write(self, path):
        Path(path).write_text(self.to_text())

    @classmethod
    def read(cls, path) -> "PoolingGraph":
        return cls.from_text(Path(path).read_text())


def sample_pooling_graph(config: ProblemConfig, rng) -> PoolingGraph:
    """m independent queries, each gamma uniform draws with replacement."""
    gen = as_generator(rng)
    draws = gen.integers(0, config.n, size=(config.m, config.gamma))
    return PoolingGraph(config.n, draws)


@dataclass(frozen=True)
class DegreeSummary:
    mean_multi: float
    mean_distinct: float
    min_multi: int
    max_multi: int
    min_distinct: int
    max_distinct: int
    mean_ratio: float


def degree_summary(graph: PoolingGraph) -> DegreeSummary:
    # mean_ratio averages Delta*_i / Delta_i over agents that were drawn at all
    if graph.m == 0:
        raise EmptyGraphError("degree ratios are undefined without queries")
    multi, distinct = graph.multi_degree, graph.distinct_degree
    hit = multi > 0
    ratio = float(np.mean(distinct[hit] / multi[hit])) if hit.any() else math.nan
    return DegreeSummary(
        mean_multi=float(multi.mean()),
        mean_distinct=float(distinct.mean()),
        min_multi=int(multi.min()),
        max_multi=int(multi.max()),
        min_distinct=int(distinct.min()),
        max_distinct=int(distinct.max()),
        mean_ratio=ratio,
    )
