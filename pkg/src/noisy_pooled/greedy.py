"""Distributed greedy reconstruction, simulated one query at a time.

Phase I: every query sends its (noisy) result once to each *distinct* agent
it drew, and each agent keeps the running neighbourhood sum ``psi_i`` and its
distinct degree.  Phase II: agents are ranked by ``psi_i - Delta*_i * k / 2``
and the top ``k`` declare bit one.

Per agent the neighbourhood sum is accumulated in ascending query order,
both in the batch pass and in :class:`NeighborhoodAccumulator`, so the two
agree bit for bit even for Gaussian results.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, InvalidConfigError
from .model import GroundTruth, PoolingGraph
from .noise import QueryResults
from .sorting import bitonic_sort


@dataclass(frozen=True)
class ScoreTable:
    psi: np.ndarray
    distinct_degree: np.ndarray
    score: np.ndarray
    k: int


@dataclass(frozen=True)
class Estimate:
    bits: np.ndarray
    ranking: np.ndarray
    separation_margin: float

    @property
    def ones(self) -> np.ndarray:
        return np.flatnonzero(self.bits)


@dataclass(frozen=True)
class Evaluation:
    exact: bool
    overlap: float


def neighborhood_sums(graph: PoolingGraph, results: QueryResults) -> np.ndarray:
    if results.m != graph.m:
        raise DimensionMismatchError(f"{results.m} results for {graph.m} queries")
    weights = results.values[graph.pair_query]
    return np.bincount(graph.pair_agent, weights=weights, minlength=graph.n).astype(np.float64)


def compute_scores(psi, graph: PoolingGraph, k: int) -> ScoreTable:
    psi = np.asarray(psi, dtype=np.float64)
    if psi.shape != (graph.n,):
        raise DimensionMismatchError(f"psi has shape {psi.shape}, expected ({graph.n},)")
    return _score_table(psi, graph.distinct_degree, k)


def _score_table(psi, distinct_degree, k):
    distinct_degree = np.asarray(distinct_degree, dtype=np.int64)
    score = psi - distinct_degree * (k / 2.0)
    return ScoreTable(psi.copy(), distinct_degree.copy(), score, int(k))


def ranking_order(values, method="sort") -> np.ndarray:
    """Agents by value descending, ties by ascending index."""
    values = np.asarray(values, dtype=np.float64)
    if method == "sort":
        return np.lexsort((np.arange(values.shape[0]), -values))
    if method == "bitonic":
        return bitonic_sort(values)
    raise InvalidConfigError(f"unknown ranking method {method!r}")


def declare_top_k(values, k: int, method="sort") -> Estimate:
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    if not (0 <= k <= n):
        raise InvalidConfigError(f"k={k} outside [0, {n}]")
    order = ranking_order(values, method)
    bits = np.zeros(n, dtype=np.int8)
    bits[order[:k]] = 1
    if k == 0 or k == n:
        margin = math.inf
    else:
        margin = float(values[order[k - 1]] - values[order[k]])
    return Estimate(bits, order, margin)


def rank_and_declare(scores: ScoreTable, k: int | None = None, method="sort") -> Estimate:
    """Top-k declaration on a score table (k defaults to the table's k)."""
    return declare_top_k(scores.score, scores.k if k is None else k, method)


def greedy_reconstruct(graph: PoolingGraph, results: QueryResults, k: int, method="sort") -> Estimate:
    return rank_and_declare(compute_scores(neighborhood_sums(graph, results), graph, k), k, method)


def evaluate(estimate: Estimate, truth: GroundTruth) -> Evaluation:
    if estimate.bits.shape != truth.bits.shape:
        raise DimensionMismatchError("estimate and truth differ in length")
    exact = bool(np.array_equal(estimate.bits, truth.bits))
    k = truth.k
    if k == 0:
        return Evaluation(exact, 1.0)
    hits = int(np.count_nonzero(estimate.bits[truth.bits == 1]))
    return Evaluation(exact, hits / k)


def cleanly_separated(score, truth_bits) -> bool:
    """True iff every one-agent scores strictly above every zero-agent.

    Equivalent to: the top-k declaration equals the truth and the separation
    margin is positive.
    """
    score = np.asarray(score)
    ones = truth_bits == 1
    if ones.all() or not ones.any():
        return True
    return bool(score[ones].min() > score[~ones].max())


class NeighborhoodAccumulator:
    """Streaming Phase I state: queries are folded in one at a time."""

    def __init__(self, n: int, k: int):
        self.n = n
        self.k = k
        self.m = 0
        self.psi = np.zeros(n, dtype=np.float64)
        self.distinct_degree = np.zeros(n, dtype=np.int64)

    def add_query(self, draws, value: float):
        agents = np.unique(draws)
        self.psi[agents] += value
        self.distinct_degree[agents] += 1
        self.m += 1

    def snapshot(self):
        return self.m, self.psi.copy(), self.distinct_degree.copy()

    def restore(self, snap):
        m, psi, dstar = snap
        self.m, self.psi, self.distinct_degree = m, psi.copy(), dstar.copy()

    def score(self) -> np.ndarray:
        return self.psi - self.distinct_degree * (self.k / 2.0)

    def score_table(self) -> ScoreTable:
        return _score_table(self.psi, self.distinct_degree, self.k)
