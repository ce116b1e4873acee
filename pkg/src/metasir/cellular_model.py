"""Poisson cellular downlink with nearest-BS association.

Users attach to the nearest base station of a PPP; with Rayleigh fading the
conditional success probability depends on the BS process only through the
relative distance process, so none of the results depend on the densities.
Interfering BSs may be active independently with probability ``activity_p``.

All moments are written with u = theta r^alpha, under which the relative
distance pgfl becomes

    M_b = 1 / (1 + I),  I = delta theta^delta int_0^theta (1 - q(u)^b) u^(-delta-1) du,

with q(u) = 1 - p u / (1 + u).
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, DomainError, NegativeMomentDivergence
from .quadrature import gauss_kronrod_batch
from .special_functions import _cexpm1, _clog1p, binom, d_b_array, gauss_2f1, sinc

__all__ = ["CellularParams", "moment", "moment_array", "variance", "mean_local_delay",
           "moment_with_activity", "moment_series", "success_probability",
           "success_probability_andrews", "critical_activity", "pc_conjectured_bracket",
           "asymptotic_success", "asymptotic_variance"]

# |Im b| above which the rotated-contour decomposition replaces the direct integral
COMPLEX_SWITCH = 20.0
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class CellularParams:
    alpha: float
    activity_p: float = 1.0

    def __post_init__(self):
        if not self.alpha > 2:
            raise DomainError(f"path-loss exponent must exceed 2, got {self.alpha}")
        if not 0.0 < self.activity_p <= 1.0:
            raise DomainError(f"activity probability must lie in (0, 1], got {self.activity_p}")

    @property
    def delta(self) -> float:
        return 2.0 / self.alpha

    @property
    def kappa(self) -> float:
        """Equivalent frequency-reuse factor 1/p."""
        return 1.0 / self.activity_p

    def with_p(self, p: float) -> "CellularParams":
        return CellularParams(self.alpha, p)


def _check_theta(theta):
    if not theta > 0:
        raise DomainError(f"theta must be positive, got {theta}")


def _finish(den, b):
    # turn the pgfl denominator into a moment, flagging divergent negative moments
    if isinstance(b, numbers.Real):
        den = complex(den).real
        if b < 0 and not den > 0:
            raise NegativeMomentDivergence(f"moment of order {b} is infinite")
        return 1.0 / den
    return 1.0 / complex(den)


def moment(params: CellularParams, theta: float, b):
    """M_b for a fully loaded network (activity_p = 1).

    Real b uses the Euler-transformed hypergeometric form
    (1+theta)^b / 2F1(b, 1; 1-delta; theta/(1+theta)), or 1/2F1(b, -delta;
    1-delta; -theta) for theta > 1 where the Euler series slows down;
    complex b goes through the relative-distance integral.
    """
    if params.activity_p != 1.0:
        raise DomainError("moment() is the activity_p = 1 case; use moment_with_activity")
    _check_theta(theta)
    if isinstance(b, numbers.Real):
        if b == 0:
            return 1.0
        d = params.delta
        if theta > 1.0 and abs(b + d - round(b + d)) > 1e-6:
            # the Euler argument theta/(1+theta) nears 1; 2F1 then uses its 1/(1+theta) expansion
            return _finish(gauss_2f1(b, -d, 1.0 - d, -theta), b)
        if theta > 1e3:
            # degenerate connection formula and a slow Euler series: integrate instead
            return moment_with_activity(params, theta, b)
        f = gauss_2f1(b, 1.0, 1.0 - d, theta / (1.0 + theta))
        # (1+theta)^{-b} F equals 2F1(b, -delta; 1-delta; -theta)
        den = f * (1.0 + theta) ** (-b)
        return _finish(den, b)
    return moment_with_activity(params, theta, b)


def mean_local_delay(params: CellularParams, theta: float) -> float:
    """M_{-1} = (1-delta)/(1-delta(1+theta)); math.inf once theta >= 1/delta - 1."""
    if params.activity_p != 1.0:
        try:
            return moment_with_activity(params, theta, -1.0)
        except NegativeMomentDivergence:
            return math.inf
    if theta < 0:
        raise DomainError(f"theta must be nonnegative, got {theta}")
    d = params.delta
    den = 1.0 - d * (1.0 + theta)
    if den <= 0:
        return math.inf
    return (1.0 - d) / den


def _rdp_integral(b: complex, p: float, theta: float, delta: float, tol: float) -> complex:
    # I with u = theta w^(1/(1-delta)); the weight then cancels the u^-delta singularity
    e = 1.0 / (1.0 - delta)

    def f(w, _i):
        u = theta * w ** e
        lq = _clog1p(-p * u / (1.0 + u))
        g = -_cexpm1(b * lq)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = g * w ** (-e)
        # limit w -> 0: g ~ -b log q ~ b p theta w^e
        return np.where(w > 0, out, b * p * theta)

    noise = 8.0 * _EPS * (1.0 + abs(b) * (1.0 - math.log1p(-min(p, 1.0 - 1e-16))))
    val, _ = gauss_kronrod_batch(f, 1, tol=tol, rel_noise=noise)
    return complex(val[0]) * delta * e


def _k_tail(b: np.ndarray, p: float, theta: float, delta: float) -> np.ndarray:
    """K(b) = int_theta^inf q(u)^b u^(-delta-1) du along u = theta - i s sign(Im b)."""
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    n = b.size
    sg = np.where(b.imag < 0, -1.0, 1.0)
    # beyond S the damping exp(-|t| p/((1-p) s)) has worn off and the integrand is algebraic
    if p < 1.0:
        S = np.maximum(1.0 + theta, np.abs(b.imag) * p / (1.0 - p))
        lim = abs(math.log1p(-p))
    else:
        S = np.full(n, 1.0 + theta)
        lim = 0.0

    A = 1.0 + (1.0 - p) * theta
    B = 1.0 + theta

    def h(s, i):
        # log q(u) and log u at u = theta - i sg s, in real and imaginary parts
        s = np.minimum(s, 1e150)
        s2 = s * s
        sgn = sg[i][:, None]
        den = B * B + s2
        arg = -p * (theta * (A + B) + (2.0 - p) * s2) / den
        # log1p keeps small p accurate; the plain log ratio avoids log1p(-1) when p is near 1
        re = np.where(arg > -0.5, np.log1p(np.maximum(arg, -0.5)),
                      np.log(A * A + (1.0 - p) ** 2 * s2) - np.log(den))
        lq = 0.5 * re + 1j * sgn * np.arctan(p * s / (A * B + (1.0 - p) * s2))
        lu = 0.5 * np.log(theta * theta + s2) - 1j * sgn * np.arctan2(s, theta)
        return np.exp(b[i][:, None] * lq - (delta + 1.0) * lu)

    def head(x, i):
        return h(S[i][:, None] * x, i) * S[i][:, None]

    # s = S y^(-a/delta) makes the integrand O(y^(a-1)) at y = 0; a > 1 also damps the
    # t log(s) oscillation of q^b that p = 1 leaves undamped
    a = 3.0 / delta

    def tail(y, i):
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            s = S[i][:, None] * y ** (-a)
            out = h(s, i) * S[i][:, None] * a * y ** (-a - 1.0)
        return np.where(y > 0, out, 0.0)

    tol = 1e-14 * theta ** (-delta)
    noise = 8.0 * _EPS * (1.0 + np.abs(b) * (1.0 + math.log1p(theta) + lim))
    hv, _ = gauss_kronrod_batch(head, n, tol=tol, initial_panels=2, rel_noise=noise)
    tv, _ = gauss_kronrod_batch(tail, n, tol=tol, initial_panels=2, rel_noise=noise)
    return -1j * sg * (hv + tv)


def _decomposed_denominator(b: np.ndarray, p: float, theta: float, delta: float) -> np.ndarray:
    # 1 + I = theta^delta (Gamma(1+delta) Gamma(1-delta) D_b(p, delta) + delta K(b))
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    D = d_b_array(b, p, delta)
    K = _k_tail(b, p, theta, delta)
    g = math.gamma(1.0 + delta) * math.gamma(1.0 - delta)
    return theta ** delta * (g * D + delta * K)


def moment_with_activity(params: CellularParams, theta: float, b):
    """M_b(p) with interfering BSs active independently with probability p.

    Evaluated from the relative-distance integral by adaptive quadrature.  For
    |Im b| > COMPLEX_SWITCH the integrand oscillates too fast on the real
    line, and the integral is split into a D_b term plus a tail integral on
    a rotated ray instead.
    """
    _check_theta(theta)
    if b == 0:
        return 1.0 if isinstance(b, numbers.Real) else 1.0 + 0j
    p, d = params.activity_p, params.delta
    bc = complex(b)
    if abs(bc.imag) > COMPLEX_SWITCH:
        den = complex(_decomposed_denominator(np.array([bc]), p, theta, d)[0])
    else:
        den = 1.0 + _rdp_integral(bc, p, theta, d, tol=1e-13)
    return _finish(den, b)


def moment_array(params: CellularParams, theta: float, b: np.ndarray) -> np.ndarray:
    """Vectorised complex moments (the Gil-Pelaez workhorse)."""
    _check_theta(theta)
    b = np.asarray(b, dtype=complex)
    out = np.ones(b.shape, dtype=complex)
    nz = b != 0
    if np.any(nz):
        out[nz] = 1.0 / _decomposed_denominator(b[nz], params.activity_p, theta, params.delta)
    return out


def moment_series(params: CellularParams, theta: float, b: float, max_terms: int = 100_000) -> float:
    """M_b(p) from the binomial series over 2F1(k, k-delta; k+1-delta; -theta).

    Real b only; used as an independent check of the quadrature.
    """
    _check_theta(theta)
    p, d = params.activity_p, params.delta
    total = 0.0
    for k in range(1, max_terms + 1):
        c = binom(b, k)
        if c == 0:
            break
        term = c * (-p * theta) ** k * d / (k - d) * gauss_2f1(float(k), k - d, k + 1.0 - d, -theta)
        total += term
        # terms behave like (p theta/(1+theta))^k
        r = p * theta / (1.0 + theta)
        if abs(term) < 1e-15 * max(1.0, abs(total)) and abs(term) * r / (1.0 - r + 1e-300) < 1e-13:
            break
    else:
        raise ConvergenceError("activity series did not converge")
    return _finish(1.0 - total, b)


def variance(params: CellularParams, theta: float) -> float:
    m1 = moment_with_activity(params, theta, 1.0)
    m2 = moment_with_activity(params, theta, 2.0)
    return max(m2 - m1 * m1, 0.0)


def success_probability(params: CellularParams, theta: float) -> float:
    """p_s(theta, p) = 1/(1 - p + p 2F1(1, -delta; 1-delta; -theta))."""
    if theta == 0:
        return 1.0
    _check_theta(theta)
    p = params.activity_p
    return 1.0 / (1.0 - p + p * gauss_2f1(1.0, -params.delta, 1.0 - params.delta, -theta))


def success_probability_andrews(params: CellularParams, theta: float) -> float:
    """Same quantity via 1/(1 + p theta delta/(1-delta) 2F1(1, 1-delta; 2-delta; -theta))."""
    _check_theta(theta)
    p, d = params.activity_p, params.delta
    return 1.0 / (1.0 + p * theta * d / (1.0 - d) * gauss_2f1(1.0, 1.0 - d, 2.0 - d, -theta))


def _g(p: float, theta: float, d: float) -> float:
    # denominator of M_{-1}(p); its root in p is the critical activity
    return 1.0 - p * theta * d / (1.0 - d) * gauss_2f1(1.0, 1.0 - d, 2.0 - d, -theta * (1.0 - p))


def critical_activity(params: CellularParams, theta: float, tol: float = 1e-10) -> float:
    """Largest p with finite mean local delay; 1 when theta < 1/delta - 1."""
    _check_theta(theta)
    d = params.delta
    if _g(1.0, theta, d) > 0:
        return 1.0
    lo, hi = 1e-6, 1.0
    if not _g(lo, theta, d) > 0:
        raise ConvergenceError("critical activity is below the bisection bracket")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _g(mid, theta, d) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def pc_conjectured_bracket(params: CellularParams, theta: float) -> tuple[float, float]:
    """Conjectured (not proven) bracket for the critical activity."""
    d = params.delta
    up = (d / (1.0 - d) * theta) ** (-d)
    return 0.5 * up, up


def asymptotic_success(delta: float, t: float) -> float:
    """Limit of p_s as p -> 0 with t = p theta^delta fixed."""
    if t < 0:
        raise DomainError("t must be nonnegative")
    s = sinc(delta)
    return s / (t + s)


def asymptotic_variance(p_target: float) -> float:
    """Limit of the variance as p -> 0 along the contour p_s = p_target."""
    if not 0.0 < p_target < 1.0:
        raise DomainError("p_target must lie in (0, 1)")
    return p_target / (2.0 - p_target) - p_target ** 2
