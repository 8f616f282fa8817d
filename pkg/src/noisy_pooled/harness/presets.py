"""Experiment presets for the standard figure grids.

Figure numbering: 2 Z-channel required queries, 3 Gaussian query noise
required queries, 4 symmetric general channel required queries, 5 success
rate and 6 overlap (5 and 6 share one grid and differ in the plotted view).
``ns`` overrides the default n grid, e.g. to reach n = 10**5.
"""

from __future__ import annotations

from ..errors import InvalidConfigError
from ..model import Regime
from ..noise import NoiseModel
from ..theory import ThresholdQuery, required_queries_bound
from .experiments import ExperimentSpec

THETA = 0.25
DEFAULT_NS = (100, 300, 1000, 3000, 10000)
EXTENDED_NS = (100, 300, 1000, 3000, 10000, 30000, 100000)


def _bound_curve(ns, model_label, eps, p=0.0, q=0.0, lam=0.0):
    return [(n, required_queries_bound(ThresholdQuery(n, Regime("sublinear", THETA), model_label, eps, p, q, lam)))
            for n in ns]


def figure_spec(figure, trials=None, seed=0, out=None, ns=None, eps=None, algorithm=None) -> ExperimentSpec:
    regime = (Regime("sublinear", THETA),)
    out = out or f"fig{figure}.csv"
    if figure in (2, 3, 4):
        ns = tuple(ns or DEFAULT_NS)
        eps = 0.05 if eps is None else eps
        if figure == 2:
            models = tuple(NoiseModel.channel(p) for p in (0.1, 0.3, 0.5))
            theory = ((f"Z bound p=0.1 eps={eps:g}", "n", "m", _bound_curve(ns, "z", eps, p=0.1)),)
        elif figure == 3:
            models = (NoiseModel.exact(), NoiseModel.query(1.0), NoiseModel.query(2.0))
            theory = ((f"noiseless bound eps={eps:g}", "n", "m", _bound_curve(ns, "none", eps)),)
        else:
            rates = (1e-1, 1e-2, 1e-3, 1e-4, 1e-5)
            models = tuple(NoiseModel.channel(r, r) for r in rates)
            theory = tuple((f"GNC bound p=q={r:g} eps={eps:g}", "n", "m", _bound_curve(ns, "gnc", eps, p=r, q=r))
                           for r in rates)
        return ExperimentSpec("required-queries", ns, regime, models, None, trials or 20, seed, "greedy", out,
                              eps, theory=theory, label=f"figure {figure}")
    if figure in (5, 6):
        ns = tuple(ns or (1000,))
        eps = 0.1 if eps is None else eps
        models = tuple(NoiseModel.channel(p) for p in (0.1, 0.3, 0.5))
        ms = tuple(range(0, 601, 25))
        theory = tuple(
            (f"Z bound p=0.1 eps={eps:g} n={n}", "m", "rate",
             [(b, 0.0), (b, 1.0)])
            for n in ns
            for b in [required_queries_bound(ThresholdQuery(n, regime[0], "z", eps, 0.1))]
        )
        kind = "success-rate" if figure == 5 else "overlap"
        return ExperimentSpec(kind, ns, regime, models, ms, trials or 100, seed, algorithm or "both", out, eps,
                              theory=theory, label=f"figure {figure}")
    raise InvalidConfigError(f"no preset for figure {figure}; choose 2, 3, 4, 5 or 6")
