"""Poisson bipolar network with ALOHA.

Transmitters form a PPP of intensity lambda, each talks to a receiver at
distance R, and every node transmits with probability p in each slot.  With
Rayleigh fading the b-th moment of the conditional success probability is
exp(-C theta^delta D_b(p, delta)).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np
from scipy.special import digamma

from .errors import DomainError
from .special_functions import d_b, d_b_array

__all__ = ["BipolarParams", "MetaQuery", "moment", "moment_array", "variance",
           "mean_local_delay", "moment_bounds_p1", "asymptotic_variance_slope"]


@dataclass(frozen=True)
class BipolarParams:
    lam: float
    R: float
    p: float
    alpha: float

    def __post_init__(self):
        if not self.lam > 0:
            raise DomainError(f"intensity must be positive, got {self.lam}")
        if not self.R > 0:
            raise DomainError(f"link distance must be positive, got {self.R}")
        if not 0.0 < self.p <= 1.0:
            raise DomainError(f"ALOHA probability must lie in (0, 1], got {self.p}")
        if not self.alpha > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.alpha}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def C(self) -> float:
        d = self.delta
        return self.lam * math.pi * self.R ** 2 * math.gamma(1.0 - d) * math.gamma(1.0 + d)

    @property
    def tau(self) -> float:
        """Density of active transmitters."""
        return self.lam * self.p

    def with_p(self, p: float) -> "BipolarParams":
        return BipolarParams(self.lam, self.R, p, self.alpha)


@dataclass(frozen=True)
class MetaQuery:
    theta: float
    x: float

    def __post_init__(self):
        if not self.theta > 0:
            raise DomainError(f"theta must be positive, got {self.theta}")
        if not 0.0 <= self.x <= 1.0:
            raise DomainError(f"x must lie in [0, 1], got {self.x}")


def _check_theta(theta):
    if not theta >= 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")


def _ctd(params: BipolarParams, theta: float) -> float:
    return params.C * theta ** params.delta


def moment(params: BipolarParams, theta: float, b):
    """M_b(theta) = exp(-C theta^delta D_b(p, delta)); real b gives a real result."""
    _check_theta(theta)
    D = d_b(b, params.p, params.delta)
    out = np.exp(-_ctd(params, theta) * D)
    if isinstance(b, numbers.Real):
        return float(out)
    return complex(out)


def moment_array(params: BipolarParams, theta: float, b: np.ndarray) -> np.ndarray:
    """Vectorised moments for an array of (typically imaginary) orders."""
    _check_theta(theta)
    return np.exp(-_ctd(params, theta) * d_b_array(b, params.p, params.delta))


def variance(params: BipolarParams, theta: float) -> float:
    """Variance of P_s(theta).

    For p < 1, M_1^2 (M_1^{p(delta-1)} - 1) written with expm1 so small
    variances keep their relative accuracy; p = 1 uses M_2 - M_1^2.
    """
    _check_theta(theta)
    if params.p == 1.0:
        return max(moment(params, theta, 2.0) - moment(params, theta, 1.0) ** 2, 0.0)
    c = _ctd(params, theta)
    m1 = math.exp(-c * params.p)
    return m1 * m1 * math.expm1(c * params.p ** 2 * (1.0 - params.delta))


def mean_local_delay(params: BipolarParams, theta: float) -> float:
    """M_{-1}: finite for p < 1, math.inf when every node always transmits."""
    _check_theta(theta)
    p = params.p
    if p == 1.0:
        return math.inf
    return math.exp(_ctd(params, theta) * p * (1.0 - p) ** (params.delta - 1.0))


def moment_bounds_p1(params: BipolarParams, theta: float, b: float) -> tuple[float, float]:
    """Bracket [lower, upper] around M_b for p = 1 from M_1 and b^delta.

    For b >= 1 the upper bound is M_1^{b^delta}; for b < 1 it becomes the
    lower bound.  The other side bounds f(b) = log(Gamma(b+delta)/Gamma(b)),
    which is concave: Wendel's inequality, combined with the tangent at b = 1
    (b >= 1) or the chord over [1, 2] shifted by the recurrence (b < 1), so
    both sides are genuine bounds and meet at b = 1.
    """
    if params.p != 1.0:
        raise DomainError("moment_bounds_p1 requires p = 1")
    if not b > 0:
        raise DomainError("moment_bounds_p1 requires b > 0")
    _check_theta(theta)
    d = params.delta
    c = _ctd(params, theta)
    m1 = math.exp(-c)
    lg1 = math.lgamma(1.0 + d)
    pow_bound = m1 ** (b ** d)
    if b >= 1.0:
        # f(b) <= d log b (Wendel) and f(b) <= f(1) + f'(1)(b-1) (tangent)
        f_up = min(d * math.log(b), lg1 + float(digamma(1.0 + d) - digamma(1.0)) * (b - 1.0))
        return math.exp(-c * math.exp(f_up - lg1)), pow_bound
    # f(b) >= d log b + (1-d) log(b/(b+d)) (Wendel) and
    # f(b) = f(b+1) - log((b+d)/b) >= f(1) + b log(1+d) - log((b+d)/b) (chord)
    f_lo = max(d * math.log(b) + (1.0 - d) * math.log(b / (b + d)),
               lg1 + b * math.log1p(d) - math.log((b + d) / b))
    return pow_bound, math.exp(-c * math.exp(f_lo - lg1))


def asymptotic_variance_slope(params: BipolarParams, theta: float) -> float:
    """Constant s with var P_s ~ s p as p -> 0 at fixed transmitter density."""
    _check_theta(theta)
    # M_1 depends on p only through tau = lambda p
    log_m1 = -_ctd(params, theta) * params.p
    return -math.exp(2.0 * log_m1) * log_m1 * (1.0 - params.delta)
