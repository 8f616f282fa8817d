"""Closed-form query thresholds and the tail bounds used as test oracles.

Logarithms are natural throughout.  ``k`` is derived from the regime by
rounding, exactly as :class:`noisy_pooled.model.Regime` does, so thresholds
refer to the same integer ``k`` that the simulations use.

Sublinear regime (k = n**theta), with g = 1 - exp(-1/2):

* noiseless / Z-channel:   (4g + eps) (1 + sqrt(theta))**2 / (1 - p) * k ln n
* general channel, q > 0:  (4g + eps) q (1 + sqrt(theta))**2 / (1 - p - q)**2 * n ln n
* Gaussian query noise:    (4g + eps) (1 + sqrt(theta))**2 * k ln n

Linear regime (k = zeta * n):

* noiseless / channel:     (16g + eps) (q + (1 - p - q)) / (1 - p - q)**2 * zeta n ln n
* Gaussian query noise:    (16g + eps) zeta n ln n

A q that is small against k/n behaves like q = 0 asymptotically; callers pick
the Z or GNC branch explicitly, nothing switches automatically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import InvalidConfigError
from .model import Regime


def gamma_constant() -> float:
    """1 - exp(-1/2); twice this is the asymptotic ratio Delta*/Delta."""
    return -math.expm1(-0.5)


@dataclass(frozen=True)
class ThresholdQuery:
    n: int
    regime: Regime
    model: str  # "none", "z", "gnc" or "gauss"
    eps: float
    p: float = 0.0
    q: float = 0.0
    lam: float = 0.0

    def __post_init__(self):
        if self.n < 2:
            raise InvalidConfigError("thresholds need n >= 2")
        if self.regime.kind not in ("sublinear", "linear"):
            raise InvalidConfigError("thresholds need a sublinear or linear regime")
        if self.eps < 0:
            raise InvalidConfigError(f"eps must be non-negative, got {self.eps}")
        if self.model == "none":
            if self.p or self.q:
                raise InvalidConfigError("noiseless query takes no p, q")
        elif self.model == "z":
            if self.q != 0.0:
                raise InvalidConfigError("the Z-channel has q = 0")
            if not 0.0 <= self.p < 1.0:
                raise InvalidConfigError(f"Z-channel needs p in [0, 1), got {self.p}")
        elif self.model == "gnc":
            if not (self.q > 0.0 and self.p >= 0.0 and self.p + self.q < 1.0):
                raise InvalidConfigError(f"GNC needs q > 0 and p + q < 1, got p={self.p}, q={self.q}")
        elif self.model == "gauss":
            if self.lam < 0:
                raise InvalidConfigError("lambda must be non-negative")
        else:
            raise InvalidConfigError(f"unknown model {self.model!r}")

    @property
    def k(self) -> int:
        return self.regime.k_for(self.n)


def required_queries_rhs(tq: ThresholdQuery) -> float:
    """Right-hand side of the sufficient condition on m, before rounding."""
    g = gamma_constant()
    log_n = math.log(tq.n)
    if tq.regime.kind == "sublinear":
        shape = (1.0 + math.sqrt(tq.regime.value)) ** 2
        lead = 4.0 * g + tq.eps
        if tq.model in ("none", "gauss"):
            return lead * shape * tq.k * log_n
        if tq.model == "z":
            return lead * shape / (1.0 - tq.p) * tq.k * log_n
        gain = 1.0 - tq.p - tq.q
        return lead * tq.q * shape / gain**2 * tq.n * log_n
    zeta = tq.regime.value
    lead = 16.0 * g + tq.eps
    if tq.model == "gauss":
        return lead * zeta * tq.n * log_n
    gain = 1.0 - tq.p - tq.q
    return lead * (tq.q + gain) / gain**2 * zeta * tq.n * log_n


def required_queries_bound(tq: ThresholdQuery) -> int:
    return math.ceil(required_queries_rhs(tq))


class Feasibility(enum.Enum):
    ACHIEVABLE = "achievable"
    FAILING = "failing"
    INDETERMINATE = "indeterminate"


def noisy_query_feasibility(m, n, lam, c_safe=1.0, c_fail=1.0) -> Feasibility:
    """Finite-n reading of the Gaussian noise conditions.

    Achievable when lam**2 <= c_safe * m / ln n, failing when
    lam**2 >= c_fail * m.  The constants stand in for asymptotic o/Omega
    statements and carry no intrinsic value.
    """
    if c_safe <= 0 or c_fail <= 0:
        raise InvalidConfigError("c_safe and c_fail must be positive")
    if n < 2:
        raise InvalidConfigError("need n >= 2")
    var = lam * lam
    if var <= c_safe * m / math.log(n):
        return Feasibility.ACHIEVABLE
    if var >= c_fail * m:
        return Feasibility.FAILING
    return Feasibility.INDETERMINATE


def chernoff_bound(mean, eps, side="upper") -> float:
    """Chernoff tail bound for a sum of negatively associated Bernoullis.

    upper: P(X >= (1 + eps) E X) <= exp(-eps**2 / (2 + eps) * E X)
    lower: P(X <= (1 - eps) E X) <= exp(-eps**2 / 2 * E X)
    """
    if mean < 0 or eps < 0:
        raise InvalidConfigError("mean and eps must be non-negative")
    if side == "upper":
        return math.exp(-eps * eps / (2.0 + eps) * mean)
    if side == "lower":
        return math.exp(-eps * eps / 2.0 * mean)
    raise InvalidConfigError(f"side must be 'upper' or 'lower', got {side!r}")


def gaussian_tail_bounds(lam, y):
    """Mills-ratio sandwich for P(X >= y), X ~ N(0, lam**2)."""
    if lam <= 0 or y <= 0:
        raise InvalidConfigError("need lam > 0 and y > 0")
    r = lam / y
    density = math.exp(-y * y / (2.0 * lam * lam)) / math.sqrt(2.0 * math.pi)
    return (r - r**3) * density, r * density
