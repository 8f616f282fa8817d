"""Approximate message passing baseline on the pooling design matrix.

Iteration, starting from ``sigma = 0`` and ``z = y``::

    r          = A.T @ z + sigma
    sigma_next = eta_t(r)
    b          = sum(eta_t'(r)) / m
    z_next     = y - A @ sigma_next + b * z

``b * z`` is the Onsager correction; it is zero before the first step.

Raw draw counts have mean ``gamma / n`` per entry, which breaks the zero-mean
design AMP relies on, so the default normalisation subtracts each column's
empirical mean and rescales by one global factor that makes the mean squared
column norm exactly one.  Centering the results by their own mean keeps the
noiseless identity ``A_c @ sigma == y_c`` exact.  Matrix-vector products are
plain dense numpy products.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit, logit

from .errors import AmpDivergenceError, DimensionMismatchError, InvalidConfigError, ResourceBudgetError
from .greedy import Estimate, declare_top_k
from .model import PoolingGraph
from .noise import NoiseModel, QueryResults

DEFAULT_MAX_ENTRIES = 50_000_000
_MIN_NOISE_VAR = 1e-12


@dataclass(frozen=True)
class DesignMatrix:
    entries: np.ndarray
    normalization: str = "none"
    column_mean: np.ndarray | None = None
    scale: float = 1.0

    @property
    def shape(self):
        return self.entries.shape

    def observations(self, values) -> np.ndarray:
        """Map raw query results into the coordinates of ``entries``."""
        y = np.asarray(values, dtype=np.float64)
        if y.shape != (self.entries.shape[0],):
            raise DimensionMismatchError(f"{y.shape[0]} results for a {self.entries.shape} design")
        if self.normalization == "none" or y.size == 0:
            return y.copy()
        return (y - y.mean()) / self.scale


def build_design_matrix(graph: PoolingGraph, normalization="centered-scaled", max_entries=DEFAULT_MAX_ENTRIES) -> DesignMatrix:
    if graph.m * graph.n > max_entries:
        raise ResourceBudgetError(graph.m * graph.n, max_entries)
    counts = graph.multiplicity_matrix().astype(np.float64)
    if normalization == "none":
        return DesignMatrix(counts, "none")
    if normalization != "centered-scaled":
        raise InvalidConfigError(f"unknown normalization {normalization!r}")
    if graph.m == 0:
        return DesignMatrix(counts, normalization, np.zeros(graph.n), 1.0)
    mean = counts.mean(axis=0)
    centered = counts - mean
    scale = math.sqrt(float(np.sum(centered * centered)) / graph.n)
    if scale == 0.0:
        scale = 1.0
    return DesignMatrix(centered / scale, normalization, mean, scale)


class SoftThreshold:
    """eta(x) = sign(x) * max(|x| - tau, 0).

    ``tau`` is a constant or a callable ``tau(t, noise_var)``.  The derivative
    uses the right-derivative at the kinks.
    """

    def __init__(self, tau):
        self.tau = tau

    @classmethod
    def residual_scaled(cls, alpha):
        return cls(lambda t, noise_var: alpha * math.sqrt(noise_var))

    def threshold(self, t, noise_var):
        return self.tau(t, noise_var) if callable(self.tau) else float(self.tau)

    def __call__(self, x, t=0, noise_var=None):
        x = np.asarray(x, dtype=np.float64)
        tau = self.threshold(t, noise_var)
        value = np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)
        deriv = ((x >= tau) | (x < -tau)).astype(np.float64)
        return value, deriv


class BayesBernoulli:
    """Posterior mean of a Bernoulli(prior) bit seen through N(0, v) noise.

    eta(x) = P(bit = 1 | x) = expit((x - 1/2) / v + logit(prior)), and
    eta'(x) = eta (1 - eta) / v.  ``v`` is fixed when ``noise_var`` is given,
    otherwise it is the per-iteration residual estimate.
    """

    def __init__(self, prior, noise_var=None):
        if not 0.0 < prior < 1.0:
            raise InvalidConfigError(f"prior must lie in (0, 1), got {prior}")
        self.prior = float(prior)
        self.noise_var = noise_var

    def __call__(self, x, t=0, noise_var=None):
        v = self.noise_var if self.noise_var is not None else noise_var
        if v is None:
            raise InvalidConfigError("BayesBernoulli needs a noise variance")
        v = max(float(v), _MIN_NOISE_VAR)
        x = np.asarray(x, dtype=np.float64)
        value = expit((x - 0.5) / v + logit(self.prior))
        return value, value * (1.0 - value) / v


class Identity:
    def __call__(self, x, t=0, noise_var=None):
        x = np.asarray(x, dtype=np.float64)
        return x.copy(), np.ones_like(x)


def denoise(denoiser, x, t=0, noise_var=None):
    """(value, derivative) of ``denoiser`` at ``x`` for iteration ``t``."""
    value, deriv = denoiser(np.atleast_1d(x), t, noise_var)
    if np.ndim(x) == 0:
        return float(value[0]), float(deriv[0])
    return value, deriv


@dataclass(frozen=True)
class AmpState:
    sigma_est: np.ndarray
    residual: np.ndarray
    iteration: int = 0
    onsager_last: float = 0.0


def initial_state(A: DesignMatrix, results: QueryResults) -> AmpState:
    y = A.observations(results.values)
    return AmpState(np.zeros(A.shape[1]), y, 0, 0.0)


def amp_step(state: AmpState, A: DesignMatrix, results: QueryResults, denoiser, onsager=True) -> AmpState:
    """One AMP update; pure in its inputs.

    ``onsager=False`` drops the correction term, which turns the iteration
    into a plain Landweber step when the denoiser is the identity.
    """
    m, n = A.shape
    if state.sigma_est.shape != (n,) or state.residual.shape != (m,):
        raise DimensionMismatchError("AMP state does not match the design matrix")
    y = A.observations(results.values)
    z = state.residual
    # overflow surfaces as AmpDivergenceError below
    with np.errstate(over="ignore", invalid="ignore"):
        noise_var = float(z @ z) / m if m else 0.0
        pseudo = A.entries.T @ z + state.sigma_est
        sigma_next, deriv = denoiser(pseudo, state.iteration, noise_var)
        b = float(deriv.sum()) / m if (onsager and m) else 0.0
        z_next = y - A.entries @ sigma_next + b * z
    t = state.iteration + 1
    if not (np.all(np.isfinite(sigma_next)) and np.all(np.isfinite(z_next)) and math.isfinite(b)):
        raise AmpDivergenceError(t)
    return AmpState(sigma_next, z_next, t, b)


@dataclass(frozen=True)
class AmpResult:
    estimate: Estimate
    sigma: np.ndarray
    residual_norms: list
    iterations: int
    converged: bool

    @property
    def bits(self):
        return self.estimate.bits


def amp_run(A: DesignMatrix, results: QueryResults, denoiser, k, max_iters=200, tol=1e-6) -> AmpResult:
    """Iterate until the RMS change of sigma drops below ``tol``; declare top k."""
    if max_iters < 1 or tol <= 0:
        raise InvalidConfigError("need max_iters >= 1 and tol > 0")
    n = A.shape[1]
    if k == 0 or k == n or A.shape[0] == 0:
        sigma = np.zeros(n)
        return AmpResult(declare_top_k(sigma, k), sigma, [], 0, True)
    state = initial_state(A, results)
    norms = [float(np.linalg.norm(state.residual))]
    converged = False
    for _ in range(max_iters):
        nxt = amp_step(state, A, results, denoiser)
        change = float(np.linalg.norm(nxt.sigma_est - state.sigma_est)) / math.sqrt(n)
        state = nxt
        norms.append(float(np.linalg.norm(state.residual)))
        if change < tol:
            converged = True
            break
    return AmpResult(declare_top_k(state.sigma_est, k), state.sigma_est, norms, state.iteration, converged)


def amp_reconstruct(graph: PoolingGraph, results: QueryResults, k, model: NoiseModel | None = None,
                    denoiser=None, max_iters=200, tol=1e-6, max_entries=DEFAULT_MAX_ENTRIES) -> AmpResult:
    """Default AMP pipeline: centered-scaled design, Bayes-Bernoulli denoiser.

    For channel noise the results are divided by ``1 - p - q`` so the signal
    is back on the 0/1 scale the prior assumes; the offset ``q * gamma`` is
    removed by the centering.
    """
    A = build_design_matrix(graph, "centered-scaled", max_entries)
    values = results.values
    if model is not None and model.variant == "channel":
        values = values / model.signal_gain
    if denoiser is None:
        prior = k / graph.n
        if not 0.0 < prior < 1.0:
            return amp_run(A, QueryResults(values), Identity(), k, max_iters, tol)
        denoiser = BayesBernoulli(prior)
    return amp_run(A, QueryResults(values), denoiser, k, max_iters, tol)
