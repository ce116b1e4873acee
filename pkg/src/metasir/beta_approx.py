"""Beta approximation of the meta distribution matched to M_1 and M_2."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import betainc

from .errors import InfeasibleMoments, MomentDoesNotExist

__all__ = ["BetaFit", "fit", "ccdf", "moment_of_fit"]


@dataclass(frozen=True)
class BetaFit:
    mu: float
    beta_param: float

    @property
    def a(self) -> float:
        """First shape parameter mu beta / (1 - mu)."""
        return self.mu * self.beta_param / (1.0 - self.mu)

    @property
    def variance(self) -> float:
        return self.mu * (1.0 - self.mu) ** 2 / (self.beta_param + 1.0 - self.mu)


def fit(M1: float, M2: float) -> BetaFit:
    """Match mean M1 and second moment M2; needs M1^2 < M2 < M1."""
    if not (0.0 < M1 < 1.0 and M1 * M1 < M2 < M1):
        raise InfeasibleMoments(f"(M1, M2) = ({M1}, {M2}) is not a (0,1) moment pair")
    beta = (M1 - M2) * (1.0 - M1) / (M2 - M1 * M1)
    return BetaFit(mu=M1, beta_param=beta)


def ccdf(f: BetaFit, x):
    """P(X > x) = I_{1-x}(beta, a) for the fitted beta variable."""
    xa = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    out = betainc(f.beta_param, f.a, 1.0 - xa)
    return float(out) if np.ndim(x) == 0 else out


def moment_of_fit(f: BetaFit, k: float) -> float:
    """E(X^k) = B(a+k, beta)/B(a, beta), via log-gamma differences."""
    a, b = f.a, f.beta_param
    if not k > -a:
        raise MomentDoesNotExist(f"E(X^{k}) diverges for a = {a}")
    if k == 0:
        return 1.0
    return math.exp(math.lgamma(a + k) + math.lgamma(a + b) - math.lgamma(a) - math.lgamma(a + k + b))
