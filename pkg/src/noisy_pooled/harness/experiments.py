"""Monte Carlo experiments: required queries, success rates, AMP comparison."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from multiprocessing import get_context

import numpy as np

from ..amp import amp_reconstruct
from ..errors import AmpDivergenceError, InvalidConfigError, WindowUndefinedError
from ..greedy import (
    NeighborhoodAccumulator,
    cleanly_separated,
    compute_scores,
    evaluate,
    greedy_reconstruct,
    neighborhood_sums,
    rank_and_declare,
)
from ..model import (
    PoolingGraph,
    ProblemConfig,
    Regime,
    RngHandle,
    as_generator,
    sample_ground_truth,
    sample_pooling_graph,
)
from ..noise import NoiseModel, QueryResults, measure, observe_rows, own_contribution, second_neighborhood_count_oracle
from ..theory import ThresholdQuery, required_queries_bound
from .results import ResultRow

ALGORITHMS = ("greedy", "amp")
KINDS = ("required-queries", "success-rate", "overlap", "amp-compare", "threshold-table")


def stream_id(grid_index: int, trial_index: int) -> int:
    return (grid_index << 32) | trial_index


def threshold_for(n, k, regime: Regime, model: NoiseModel, eps) -> int:
    """Closed-form bound matching the instance; explicit k maps to theta = ln k / ln n."""
    if regime.kind == "explicit":
        theta = min(max(math.log(max(k, 1)) / math.log(n), 1e-9), 1 - 1e-9)
        regime = Regime("sublinear", theta)
    return required_queries_bound(ThresholdQuery(n, regime, model.label, eps, model.p, model.q, model.lam))


@dataclass(frozen=True)
class RequiredQueries:
    m_star: int
    terminated: bool
    cap: int
    separation_margin: float
    overlap: float


def required_queries(n, k, model: NoiseModel, rng, gamma=None, regime=None, cap=None,
                     cap_factor=50, eps=0.05, stride=1) -> RequiredQueries:
    """Add queries one by one until the greedy scores separate the truth.

    Success at m means every one-agent scores strictly above every zero-agent.
    With ``stride > 1`` separation is only tested every ``stride`` queries and
    a hit is then resolved to single-query resolution inside the last window,
    so the result is the first success within the first successful window.
    The returned m is re-verified by rebuilding the graph and scores from the
    stored queries.
    """
    if stride < 1:
        raise InvalidConfigError("stride must be >= 1")
    regime = regime or Regime()
    config = ProblemConfig(n, k, 0, gamma, regime)
    gen = as_generator(rng)
    truth = sample_ground_truth(config, gen)
    if k == 0 or k == n:
        return RequiredQueries(0, True, 0, math.inf, 1.0)
    if cap is None:
        cap = max(1, cap_factor * threshold_for(n, k, regime, model, eps))

    acc = NeighborhoodAccumulator(n, k)
    draws, values = [], []
    checkpoint = acc.snapshot()
    found = False
    while acc.m < cap:
        row = gen.integers(0, n, size=(1, config.gamma))
        value, _ = observe_rows(truth.bits[row], model, gen)
        draws.append(row[0].astype(np.int32))
        values.append(float(value[0]))
        acc.add_query(row[0], values[-1])
        if acc.m % stride and acc.m < cap:
            continue
        if cleanly_separated(acc.score(), truth.bits):
            found = True
            break
        checkpoint = acc.snapshot()

    if found and stride > 1:
        hit = acc.m
        acc.restore(checkpoint)
        while acc.m < hit:
            acc.add_query(draws[acc.m], values[acc.m])
            if cleanly_separated(acc.score(), truth.bits):
                break

    m_star = acc.m
    graph = PoolingGraph(n, np.stack(draws[:m_star]))
    table = compute_scores(neighborhood_sums(graph, QueryResults(values[:m_star])), graph, k)
    if not (np.array_equal(table.psi, acc.psi) and np.array_equal(table.distinct_degree, acc.distinct_degree)
            and np.array_equal(table.score, acc.score())):
        raise RuntimeError("incremental scores disagree with the from-scratch recomputation")
    estimate = rank_and_declare(table)
    result = evaluate(estimate, truth)
    if found and not (result.exact and estimate.separation_margin > 0):
        raise RuntimeError("verification at m* did not reproduce a separated exact estimate")
    return RequiredQueries(m_star, found, cap, estimate.separation_margin, result.overlap)


@dataclass(frozen=True)
class TrialOutcome:
    exact: bool
    overlap: float
    margin: float


def check_decomposition(graph, truth, results) -> None:
    """Psi_j == Xi_j + own observed contribution for every agent, else raise."""
    psi = neighborhood_sums(graph, results)
    observed = results.edge_bits if results.edge_bits is not None else truth.bits[graph.queries]
    for agent in range(graph.n):
        xi = second_neighborhood_count_oracle(graph, truth, agent, observed)
        own = own_contribution(graph, agent, observed)
        if psi[agent] != xi + own:
            raise AssertionError(f"decomposition fails at agent {agent}: {psi[agent]} != {xi} + {own}")


def run_trial(config: ProblemConfig, model: NoiseModel, gen, algorithms=("greedy",), oracle=False, amp_options=None):
    """One fresh instance, reconstructed by every requested algorithm."""
    truth = sample_ground_truth(config, gen)
    graph = sample_pooling_graph(config, gen)
    results = measure(graph, truth, model, gen, debug=oracle)
    if oracle and not (model.variant == "query" and model.lam > 0):
        # Gaussian noise sits outside the count decomposition
        check_decomposition(graph, truth, results)
    out = {}
    for algo in algorithms:
        if algo == "greedy":
            est = greedy_reconstruct(graph, results, config.k)
        elif algo == "amp":
            try:
                est = amp_reconstruct(graph, results, config.k, model, **(amp_options or {})).estimate
            except AmpDivergenceError:
                out[algo] = TrialOutcome(False, 0.0, math.nan)
                continue
        else:
            raise InvalidConfigError(f"unknown algorithm {algo!r}")
        ev = evaluate(est, truth)
        out[algo] = TrialOutcome(ev.exact, ev.overlap, est.separation_margin)
    return out


@dataclass(frozen=True)
class SuccessStats:
    trials: int
    successes: int
    mean_overlap: float
    mean_margin: float

    @property
    def rate(self) -> float:
        return self.successes / self.trials


def _aggregate(outcomes):
    return SuccessStats(
        trials=len(outcomes),
        successes=sum(o.exact for o in outcomes),
        mean_overlap=math.fsum(o.overlap for o in outcomes) / len(outcomes),
        mean_margin=_mean(o.margin for o in outcomes),
    )


def _mean(xs):
    xs = list(xs)
    if any(math.isinf(x) for x in xs):
        return math.fsum(x for x in xs if math.isinf(x))  # inf (or nan for mixed signs)
    return math.fsum(xs) / len(xs)


def success_rate(config: ProblemConfig, model: NoiseModel, trials, algorithm="greedy", seed=0, grid_index=0,
                 oracle=False, amp_options=None):
    """Independent instances at fixed m; returns {algorithm: SuccessStats}.

    With ``algorithm="both"`` greedy and AMP see the same instances.
    """
    if trials < 1:
        raise InvalidConfigError("trials must be >= 1")
    algos = _algorithms(algorithm)
    per_algo = {a: [] for a in algos}
    for t in range(trials):
        gen = RngHandle(seed, stream_id(grid_index, t)).generator()
        res = run_trial(config, model, gen, algos, oracle, amp_options)
        for a in algos:
            per_algo[a].append(res[a])
    return {a: _aggregate(v) for a, v in per_algo.items()}


def _algorithms(selector):
    if selector == "both":
        return ALGORITHMS
    if selector in ALGORITHMS:
        return (selector,)
    raise InvalidConfigError(f"unknown algorithm selector {selector!r}")


def transition_window(curve, low=0.1, high=0.9):
    """(m_low, m_high): smallest integer m whose interpolated rate reaches each level.

    The curve is linearly interpolated between grid points and the crossing is
    rounded up to the next integer query count.  Raises WindowUndefinedError
    if the rate never reaches ``high``.
    """
    points = sorted((int(m), float(r)) for m, r in dict(curve).items())
    if not points:
        raise WindowUndefinedError("empty success curve")

    def crossing(level):
        prev = None
        for m, r in points:
            if r >= level:
                if prev is None or prev[1] >= level:
                    return m
                m0, r0 = prev
                x = m0 + (level - r0) * (m - m0) / (r - r0)
                return min(m, math.ceil(x - 1e-9))
            prev = (m, r)
        raise WindowUndefinedError(f"success curve never reaches {level}")

    return crossing(low), crossing(high)


@dataclass(frozen=True)
class GridPoint:
    n: int
    regime: Regime
    model: NoiseModel
    m: int | None = None

    def config(self, gamma=None) -> ProblemConfig:
        k = self.regime.k_for(self.n)
        return ProblemConfig(self.n, k, self.m or 0, gamma, self.regime)


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    ns: tuple = ()
    regimes: tuple = ()
    models: tuple = (NoiseModel(),)
    ms: tuple | None = None
    trials: int = 100
    master_seed: int = 0
    algorithm: str = "greedy"
    out: str | None = None
    eps: float = 0.05
    cap_factor: int = 50
    stride: int = 1
    oracle: bool = False
    timing: bool = False
    label: str = ""
    theory: tuple = field(default=())  # (description, xlabel, ylabel, points) curves written alongside

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidConfigError(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise InvalidConfigError("trials must be >= 1")
        _algorithms(self.algorithm)
        if self.kind == "required-queries" and self.algorithm != "greedy":
            raise InvalidConfigError("required-queries is defined for the greedy algorithm only")
        if self.kind in ("success-rate", "overlap", "amp-compare") and self.ns and self.regimes and not self.ms:
            raise InvalidConfigError(f"{self.kind} needs a list of m values")
        for n in self.ns:
            for regime in self.regimes:
                GridPoint(n, regime, NoiseModel()).config()
        if any(m < 0 for m in (self.ms or ())):
            raise InvalidConfigError("m values must be non-negative")

    def grid(self):
        ms = self.ms if self.kind != "required-queries" else (None,)
        points = []
        for n in self.ns:
            for regime in self.regimes:
                for model in self.models:
                    for m in ms:
                        points.append(GridPoint(n, regime, model, m))
        return points


def _work_unit(args):
    spec, point, grid_index, trial = args
    gen = RngHandle(spec.master_seed, stream_id(grid_index, trial)).generator()
    start = time.perf_counter()
    config = point.config()
    if spec.kind == "required-queries":
        rq = required_queries(point.n, config.k, point.model, gen, regime=point.regime,
                              cap_factor=spec.cap_factor, eps=spec.eps, stride=spec.stride)
        payload = rq
    else:
        payload = run_trial(config, point.model, gen, _algorithms(spec.algorithm), spec.oracle)
    return grid_index, trial, payload, (time.perf_counter() - start) * 1e3


def _failed_unit(args, exc):
    spec, point, grid_index, trial = args
    return grid_index, trial, exc, 0.0


def _safe_unit(args):
    try:
        return _work_unit(args)
    except (InvalidConfigError, RuntimeError, AssertionError, MemoryError, ValueError) as exc:
        return _failed_unit(args, f"{type(exc).__name__}: {exc}")


def execute(spec: ExperimentSpec, workers=1):
    """Run every (grid point, trial) unit; output order never depends on workers."""
    points = spec.grid()
    units = [(spec, p, gi, t) for gi, p in enumerate(points) for t in range(spec.trials)]
    if workers > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=workers, mp_context=get_context("spawn")) as pool:
            done = list(pool.map(_safe_unit, units, chunksize=max(1, len(units) // (4 * workers))))
    else:
        done = [_safe_unit(u) for u in units]
    done.sort(key=lambda r: (r[0], r[1]))
    return points, done


def run_experiment(spec: ExperimentSpec, workers=1):
    """Execute ``spec`` and return its result rows; files are written if ``spec.out`` is set."""
    from .output import write_outputs

    points, done = execute(spec, workers)
    rows = build_rows(spec, points, done)
    if spec.out:
        write_outputs(spec, rows)
    return rows


def build_rows(spec, points, done):
    by_point = {}
    for gi, trial, payload, ms in done:
        by_point.setdefault(gi, []).append((trial, payload, ms))
    rows = []
    for gi, point in enumerate(points):
        units = by_point.get(gi, [])
        config = point.config()
        base = dict(seed=spec.master_seed, n=point.n, k=config.k, regime=point.regime.describe(),
                    model=point.model.label, p=point.model.p, q=point.model.q, lam=point.model.lam)
        elapsed = math.fsum(ms for _, _, ms in units) if spec.timing else None
        if spec.kind == "required-queries":
            for trial, payload, ms in units:
                if isinstance(payload, str):
                    rows.append(ResultRow(**base, algorithm="greedy", m=0, trials=1, successes=0,
                                          mean_overlap=None, separation_margin_mean=None,
                                          elapsed_ms=ms if spec.timing else None))
                    continue
                rows.append(ResultRow(**base, algorithm="greedy", m=payload.m_star, trials=1,
                                      successes=int(payload.terminated), mean_overlap=payload.overlap,
                                      separation_margin_mean=payload.separation_margin,
                                      elapsed_ms=ms if spec.timing else None))
            continue
        failed = [p for _, p, _ in units if isinstance(p, str)]
        for algo in _algorithms(spec.algorithm):
            if failed:
                rows.append(ResultRow(**base, algorithm=algo, m=point.m, trials=spec.trials, successes=0,
                                      mean_overlap=None, separation_margin_mean=None, elapsed_ms=elapsed))
                continue
            stats = _aggregate([p[algo] for _, p, _ in units])
            rows.append(ResultRow(**base, algorithm=algo, m=point.m, trials=stats.trials,
                                  successes=stats.successes, mean_overlap=stats.mean_overlap,
                                  separation_margin_mean=stats.mean_margin, elapsed_ms=elapsed))
    return rows


def all_capped(spec, rows) -> bool:
    """True when a required-queries run terminated nowhere."""
    return spec.kind == "required-queries" and bool(rows) and all(r.successes == 0 for r in rows)


def curves(rows, view):
    """Group rows into plot curves.

    ``view`` is ``success`` or ``overlap`` (x = m) or ``required`` (x = n,
    y = median m* over terminated trials).
    """
    groups = {}
    for r in rows:
        if view == "required":
            key = (r.algorithm, r.model, r.p, r.q, r.lam, r.regime)
            groups.setdefault(key, {}).setdefault(r.n, [])
            if r.successes:
                groups[key][r.n].append(r.m)
        else:
            key = (r.algorithm, r.model, r.p, r.q, r.lam, r.n, r.regime)
            if r.mean_overlap is None:
                continue
            y = r.successes / r.trials if view == "success" else r.mean_overlap
            groups.setdefault(key, {})[r.m] = y
    if view == "required":
        return {key: {n: float(np.median(v)) for n, v in pts.items() if v} for key, pts in groups.items()}
    return groups


def with_output(spec: ExperimentSpec, out) -> ExperimentSpec:
    return replace(spec, out=out)
