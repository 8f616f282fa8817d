import numpy as np
import pytest

from noisy_pooled import (
    AmpDivergenceError,
    BayesBernoulli,
    GroundTruth,
    InvalidConfigError,
    NoiseModel,
    PoolingGraph,
    ProblemConfig,
    QueryResults,
    ResourceBudgetError,
    RngHandle,
    SoftThreshold,
    amp_reconstruct,
    build_design_matrix,
    evaluate,
    greedy_reconstruct,
    measure,
    sample_ground_truth,
    sample_pooling_graph,
)
from noisy_pooled.amp import AmpState, DesignMatrix, Identity, amp_run, amp_step, denoise, initial_state
from noisy_pooled.theory import ThresholdQuery, required_queries_bound
from noisy_pooled.model import Regime


def test_fig1_design_row(fig1_graph):
    A = build_design_matrix(fig1_graph, "none")
    assert A.entries[2].tolist() == [0, 2, 1, 0, 0, 0, 1]
    assert np.all(A.entries.sum(axis=1) == 4)
    assert A.normalization == "none"


def test_empty_design():
    g = sample_pooling_graph(ProblemConfig(5, 1, 0), RngHandle(0))
    assert build_design_matrix(g).shape == (0, 5)


def test_centered_columns_sum_to_zero():
    g = sample_pooling_graph(ProblemConfig(300, 4, 80), RngHandle(1))
    A = build_design_matrix(g)
    col = A.entries.sum(axis=0)
    assert np.all(np.abs(col) <= 1e-10 * np.abs(A.entries).sum(axis=0))
    assert np.mean(np.sum(A.entries**2, axis=0)) == pytest.approx(1.0)


def test_centered_noiseless_identity():
    cfg = ProblemConfig(200, 5, 60)
    gen = RngHandle(2).generator()
    truth, g = sample_ground_truth(cfg, gen), sample_pooling_graph(cfg, gen)
    A = build_design_matrix(g)
    y = A.observations(measure(g, truth, NoiseModel.exact()).values)
    assert np.allclose(A.entries @ truth.bits, y, atol=1e-9)


def test_budget_guard_names_limit():
    g = sample_pooling_graph(ProblemConfig(100, 2, 30), RngHandle(0))
    with pytest.raises(ResourceBudgetError, match="max_entries=1000"):
        build_design_matrix(g, max_entries=1000)


def test_soft_threshold_values():
    eta = SoftThreshold(1.0)
    assert denoise(eta, 3.0) == (2.0, 1.0)
    assert denoise(eta, -0.5) == (0.0, 0.0)
    assert denoise(eta, -3.0) == (-2.0, 1.0)
    # right-derivative at the kinks
    assert denoise(eta, 1.0)[1] == 1.0
    assert denoise(eta, -1.0)[1] == 0.0


def test_bayes_midpoint():
    for v in (0.01, 0.3, 2.0):
        assert denoise(BayesBernoulli(0.5), 0.5, noise_var=v)[0] == pytest.approx(0.5)


def test_bayes_range_and_limit():
    eta = BayesBernoulli(0.1)
    x = np.linspace(-50, 50, 101)
    val, der = denoise(eta, x, noise_var=0.2)
    assert np.all((val >= 0) & (val <= 1)) and np.all(der >= 0)
    assert denoise(eta, 1.0, noise_var=1e-6)[0] == pytest.approx(1.0)
    assert denoise(eta, 0.0, noise_var=1e-6)[0] == pytest.approx(0.0)


def test_bayes_matches_posterior_oracle():
    # direct Bayes rule with Gaussian densities
    prior, v = 0.2, 0.3
    for x in (-0.4, 0.1, 0.5, 0.9, 1.7):
        l1 = prior * np.exp(-(x - 1) ** 2 / (2 * v))
        l0 = (1 - prior) * np.exp(-(x**2) / (2 * v))
        assert denoise(BayesBernoulli(prior), x, noise_var=v)[0] == pytest.approx(l1 / (l0 + l1), rel=1e-12)


@pytest.mark.parametrize("denoiser,var", [(SoftThreshold(0.7), None), (BayesBernoulli(0.05), 0.4),
                                          (BayesBernoulli(0.5), 0.05)])
def test_derivative_finite_difference(denoiser, var):
    gen = np.random.default_rng(4)
    x = gen.uniform(-3, 3, size=100)
    if isinstance(denoiser, SoftThreshold):
        x = x[np.abs(np.abs(x) - 0.7) > 1e-3]
    h = 1e-6
    hi, _ = denoise(denoiser, x + h, noise_var=var)
    lo, _ = denoise(denoiser, x - h, noise_var=var)
    _, d = denoise(denoiser, x, noise_var=var)
    assert np.max(np.abs((hi - lo) / (2 * h) - d)) < 1e-5


def test_first_step_from_zero_state(fig1_graph, fig1_truth):
    A = build_design_matrix(fig1_graph, "none")
    res = measure(fig1_graph, fig1_truth, NoiseModel.exact())
    nxt = amp_step(initial_state(A, res), A, res, SoftThreshold(1.0))
    # A^T y by hand: (5, 4, 6, 4, 5, 4, 4), shrunk by 1
    assert np.max(np.abs(nxt.sigma_est - np.array([4, 3, 5, 3, 4, 3, 3]))) < 1e-10
    assert nxt.iteration == 1


def test_first_step_centered(fig1_graph, fig1_truth):
    A = build_design_matrix(fig1_graph)
    res = measure(fig1_graph, fig1_truth, NoiseModel.exact())
    eta = BayesBernoulli(3 / 7, noise_var=0.25)
    nxt = amp_step(initial_state(A, res), A, res, eta)
    counts = fig1_graph.multiplicity_matrix().astype(float)
    Ac = counts - counts.mean(axis=0)
    Ac /= np.sqrt((Ac**2).sum() / 7)
    y = res.values - res.values.mean()
    y /= np.sqrt(((counts - counts.mean(axis=0)) ** 2).sum() / 7)
    expect, _ = denoise(eta, Ac.T @ y)
    assert np.max(np.abs(nxt.sigma_est - expect)) < 1e-10


def test_step_matches_linear_algebra_oracle():
    entries = np.array([[1.0, 0.5, 0.0], [0.2, 1.0, 0.3], [0.0, 0.4, 1.0]])
    A = DesignMatrix(entries, "none")
    res = QueryResults(np.array([1.0, 0.5, -0.2]))
    state = AmpState(np.array([0.1, -0.3, 0.2]), np.array([0.3, 0.1, -0.4]), 3, 0.0)
    eta = SoftThreshold(0.15)
    nxt = amp_step(state, A, res, eta)
    r = entries.T @ state.residual + state.sigma_est
    sig = np.sign(r) * np.maximum(np.abs(r) - 0.15, 0)
    b = np.sum(np.abs(r) > 0.15) / 3
    z = res.values - entries @ sig + b * state.residual
    assert np.allclose(nxt.sigma_est, sig, atol=1e-14, rtol=0)
    assert np.allclose(nxt.residual, z, atol=1e-14, rtol=0)
    assert nxt.onsager_last == pytest.approx(b)


def test_identity_with_zero_residual_is_fixed_point():
    A = DesignMatrix(np.random.default_rng(0).normal(size=(4, 6)), "none")
    sigma = np.arange(6.0)
    state = AmpState(sigma, np.zeros(4), 2, 0.0)
    assert np.array_equal(amp_step(state, A, QueryResults(np.zeros(4)), Identity()).sigma_est, sigma)


def test_step_is_pure(fig1_graph, fig1_truth):
    A = build_design_matrix(fig1_graph)
    res = measure(fig1_graph, fig1_truth, NoiseModel.exact())
    s = initial_state(A, res)
    a = amp_step(s, A, res, BayesBernoulli(0.4))
    b = amp_step(s, A, res, BayesBernoulli(0.4))
    assert np.array_equal(a.sigma_est, b.sigma_est) and np.array_equal(a.residual, b.residual)
    assert np.array_equal(s.sigma_est, np.zeros(7))


def test_landweber_without_onsager():
    gen = np.random.default_rng(5)
    entries = 0.6 * np.eye(5) + 0.05 * gen.normal(size=(5, 5))
    A = DesignMatrix(entries, "none")
    y = gen.normal(size=5)
    res = QueryResults(y)
    state = initial_state(A, res)
    for _ in range(2000):
        state = amp_step(state, A, res, Identity(), onsager=False)
    sigma = state.sigma_est
    assert np.linalg.norm(entries.T @ (y - entries @ sigma)) < 1e-6
    assert np.allclose(sigma, np.linalg.solve(entries, y), atol=1e-6)


def test_divergence_raises_with_iteration():
    A = DesignMatrix(np.array([[1e200, 1e200]]), "none")
    with pytest.raises(AmpDivergenceError) as info:
        amp_step(initial_state(A, QueryResults(np.array([1e200]))), A, QueryResults(np.array([1e200])),
                 Identity())
    assert info.value.iteration == 1


def test_decoupled_design_one_iteration():
    n = 12
    g = PoolingGraph(n, np.arange(n)[:, None])
    truth = GroundTruth(np.array([1, 0, 0, 1, 0, 0, 0, 1, 0, 0, 0, 0]))
    A = build_design_matrix(g, "none")
    out = amp_run(A, measure(g, truth, NoiseModel.exact()), SoftThreshold(0.5), 3, max_iters=1)
    assert np.array_equal(out.bits, truth.bits)
    assert out.iterations == 1


def test_k_zero_all_zero():
    g = sample_pooling_graph(ProblemConfig(50, 0, 20), RngHandle(0))
    res = QueryResults(np.zeros(20))
    out = amp_reconstruct(g, res, 0)
    assert out.bits.sum() == 0


def test_run_parameter_validation(fig1_graph, fig1_truth):
    A = build_design_matrix(fig1_graph)
    res = measure(fig1_graph, fig1_truth, NoiseModel.exact())
    with pytest.raises(InvalidConfigError):
        amp_run(A, res, BayesBernoulli(0.4), 3, max_iters=0)
    with pytest.raises(InvalidConfigError):
        amp_run(A, res, BayesBernoulli(0.4), 3, tol=0)


@pytest.mark.parametrize("model", [NoiseModel.exact(), NoiseModel.channel(0.2), NoiseModel.query(0.5)])
def test_output_weight_is_k(model):
    gen = RngHandle(7).generator()
    for n, k, m in [(60, 3, 10), (100, 10, 40), (40, 20, 5)]:
        cfg = ProblemConfig(n, k, m)
        truth, g = sample_ground_truth(cfg, gen), sample_pooling_graph(cfg, gen)
        out = amp_reconstruct(g, measure(g, truth, model, gen), k, model)
        assert out.bits.sum() == k
        assert len(out.residual_norms) == out.iterations + 1


def test_amp_at_least_greedy_above_threshold():
    n = 1000
    regime = Regime("sublinear", 0.25)
    m = int(np.ceil(1.2 * required_queries_bound(ThresholdQuery(n, regime, "none", 0.05))))
    cfg = ProblemConfig(n, regime.k_for(n), m, regime=regime)
    wins = {"greedy": 0, "amp": 0}
    for t in range(100):
        gen = RngHandle(31, t).generator()
        truth, g = sample_ground_truth(cfg, gen), sample_pooling_graph(cfg, gen)
        res = measure(g, truth, NoiseModel.exact())
        wins["greedy"] += evaluate(greedy_reconstruct(g, res, cfg.k), truth).exact
        wins["amp"] += evaluate(amp_reconstruct(g, res, cfg.k).estimate, truth).exact
    assert wins["amp"] >= wins["greedy"]
