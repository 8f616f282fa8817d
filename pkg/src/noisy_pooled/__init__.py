"""Noisy pooled data: greedy reconstruction, an AMP baseline, thresholds and experiments."""

from .amp import BayesBernoulli, SoftThreshold, amp_reconstruct, build_design_matrix
from .errors import (
    AmpDivergenceError,
    DimensionMismatchError,
    EmptyGraphError,
    InvalidConfigError,
    ResourceBudgetError,
    WindowUndefinedError,
)
from .greedy import evaluate, greedy_reconstruct, neighborhood_sums, compute_scores, rank_and_declare
from .model import (
    GroundTruth,
    PoolingGraph,
    ProblemConfig,
    Regime,
    RngHandle,
    degree_summary,
    sample_ground_truth,
    sample_pooling_graph,
)
from .noise import NoiseModel, QueryResults, measure
from .theory import ThresholdQuery, gamma_constant, required_queries_bound

__version__ = "0.1.0"
