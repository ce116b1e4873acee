"""Complex-capable special functions used by the bipolar and cellular models.

``log_gamma`` works on scalars and numpy arrays.  ``binom``, ``gauss_2f1``
and ``d_b`` take scalars; numbers that come in real leave real, numbers that
come in complex leave complex.  ``d_b_array`` is the vectorised companion of
``d_b`` used by the Gil-Pelaez machinery.
"""

from __future__ import annotations

import math
import numbers

import numpy as np

from .errors import ConvergenceError, DomainError, PoleError, UndefinedError
from .quadrature import gauss_kronrod_batch

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS = np.array([
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
])
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)
POLE_TOL = 1e-12


def _is_real_input(x) -> bool:
    return isinstance(x, numbers.Real) or (
        isinstance(x, np.ndarray) and not np.iscomplexobj(x))


def _lanczos(z: np.ndarray) -> np.ndarray:
    # log Gamma(z) for Re z >= 0.5
    zm = z - 1.0
    series = np.full(z.shape, _LANCZOS[0], dtype=complex)
    for k in range(1, _LANCZOS.size):
        series = series + _LANCZOS[k] / (zm + k)
    t = zm + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (zm + 0.5) * np.log(t) - t + np.log(series)


def log_gamma(z):
    """Principal branch of log Gamma for complex (or real) arguments.

    Uses the Lanczos approximation on ``Re z >= 0.5``; to the left of that
    line the argument is shifted right with ``log Gamma(z) = log Gamma(z+n) -
    sum log(z+k)``, which keeps the branch cut on the negative real axis.
    Real input on the positive axis returns real output.
    """
    scalar = np.ndim(z) == 0
    real_in = _is_real_input(z)
    zc = np.atleast_1d(np.asarray(z, dtype=complex))
    near = np.round(zc.real)
    on_pole = (np.abs(zc.imag) < POLE_TOL) & (np.abs(zc.real - near) < POLE_TOL) & (near <= 0)
    if np.any(on_pole):
        raise PoleError(f"log_gamma pole at {zc[on_pole][0]}")
    shift = np.maximum(np.ceil(0.5 - zc.real), 0.0).astype(int)
    out = _lanczos(zc + shift)
    for k in range(int(shift.max(initial=0))):
        m = shift > k
        out[m] -= np.log(zc[m] + k)
    if real_in and np.all(zc.real > 0):
        out = out.real
    return out[0] if scalar else out


def binom(b, k: int):
    """Generalised binomial coefficient b(b-1)...(b-k+1)/k! by direct product."""
    if k < 0:
        raise DomainError("binom needs k >= 0")
    acc = 1.0 if isinstance(b, numbers.Real) else 1.0 + 0.0j
    for i in range(k):
        acc = acc * (b - i) / (i + 1)
    return acc


def _series_sum(a, b, c, z, max_terms, rtol=1e-16, chunk=512):
    # sum_n (a)_n (b)_n / ((c)_n n!) z^n, 0 <= z < 1
    total = 0.0 + 0.0j
    term = 1.0 + 0.0j
    n0 = 0
    while n0 < max_terms:
        n = np.arange(n0, n0 + chunk, dtype=float)
        ratio = (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z
        terms = term * np.concatenate([[1.0], np.cumprod(ratio[:-1])])
        partial = total + np.cumsum(terms)
        r = np.maximum(np.abs(ratio), abs(z))
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(r < 1.0, np.abs(terms) * r / (1.0 - r), np.inf)
        ok = (tail <= rtol * np.abs(partial) + 1e-300) | (terms == 0)
        hit = np.flatnonzero(ok)
        if hit.size:
            return partial[hit[0]]
        total = partial[-1]
        term = terms[-1] * ratio[-1]
        n0 += chunk
    raise ConvergenceError(f"2F1 series did not converge in {max_terms} terms")


def _rgamma_prod(num, den) -> complex:
    # prod Gamma(num) / prod Gamma(den); zero when a denominator sits on a pole
    for z in den:
        zc = complex(z)
        if zc.imag == 0 and zc.real <= 0 and float(zc.real).is_integer():
            return 0j
    return complex(np.exp(sum(log_gamma(complex(z)) for z in num)
                          - sum(log_gamma(complex(z)) for z in den)))


def _near_integer(x: complex, tol: float = 1e-6) -> bool:
    return abs(x.imag) < tol and abs(x.real - round(x.real)) < tol


def gauss_2f1(a, b: float, c: float, z: float, max_terms: int = 10**6):
    """Gaussian hypergeometric function 2F1(a, b; c; z) for real z < 1.

    ``a`` may be complex; ``b``, ``c`` and ``z`` are real.  For negative z the
    Pfaff transformation moves the argument to z/(z-1) in [0, 1) so the
    summed series never alternates because of z.  For z < -1 that argument
    approaches 1 and the series slows down, so the connection formula to
    1/(1-z) is used instead unless a - b is (close to) an integer.
    """
    if c <= 0 and float(c).is_integer():
        raise DomainError("2F1 undefined for c a nonpositive integer")
    if not z < 1.0:
        raise DomainError("gauss_2f1 supports z < 1 only")
    real_in = isinstance(a, numbers.Real)
    ac = complex(a)
    if z == 0.0:
        out = 1.0 + 0.0j
    elif z < -1.0 and not _near_integer(ac - b):
        w = 1.0 / (1.0 - z)
        t1 = _rgamma_prod([c, b - ac], [b, c - ac]) * w ** ac
        t2 = _rgamma_prod([c, ac - b], [ac, c - b]) * w ** b
        out = 0j
        if t1 != 0:
            out += t1 * _series_sum(ac, c - b, ac - b + 1.0, w, max_terms)
        if t2 != 0:
            out += t2 * _series_sum(complex(b), c - ac, b - ac + 1.0, w, max_terms)
    elif z < 0.0:
        w = z / (z - 1.0)
        out = (1.0 - z) ** (-b) * _series_sum(c - ac, b, c, w, max_terms)
    else:
        out = _series_sum(ac, b, c, z, max_terms)
    return out.real if real_in else complex(out)


def sinc(delta: float) -> float:
    """sin(pi delta) / (pi delta)."""
    return 1.0 if delta == 0 else math.sin(math.pi * delta) / (math.pi * delta)


def _check_p_delta(p, delta):
    if not 0.0 <= p <= 1.0:
        raise DomainError(f"p must lie in [0, 1], got {p}")
    if not 0.0 < delta < 1.0:
        raise DomainError(f"delta must lie in (0, 1), got {delta}")


def _d_b_gamma(b, delta):
    # D_b(1, delta) = Gamma(b+delta) / (Gamma(b) Gamma(1+delta))
    b = np.asarray(b, dtype=complex)
    out = np.zeros(b.shape, dtype=complex)
    nz = b != 0
    out[nz] = np.exp(log_gamma(b[nz] + delta) - log_gamma(b[nz]) - math.lgamma(1.0 + delta))
    return out


def _d_b_series(b: complex, p: float, delta: float, max_terms: int = 10**6):
    """Sum the defining series; returns (value, condition number) or None."""
    total = 0.0 + 0.0j
    abs_total = 0.0
    term = b * p  # k = 1 term: binom(b,1) binom(delta-1,0) p
    k0 = 1
    chunk = 256
    while k0 <= max_terms:
        k = np.arange(k0, k0 + chunk, dtype=float)
        ratio = (b - k) * (delta - k) / ((k + 1.0) * k) * p
        terms = term * np.concatenate([[1.0], np.cumprod(ratio[:-1])])
        partial = total + np.cumsum(terms)
        abs_partial = abs_total + np.cumsum(np.abs(terms))
        r = np.maximum(np.abs(ratio), p)
        with np.errstate(divide="ignore", invalid="ignore"):
            geo = np.where(r < 1.0, np.abs(terms) * r / (1.0 - r), np.inf)
        ok = ((np.abs(terms) < 1e-13 * np.maximum(1.0, np.abs(partial))) & (geo < 1e-13)) | (terms == 0)
        hit = np.flatnonzero(ok)
        if hit.size:
            i = hit[0]
            value = partial[i]
            cond = abs_partial[i] / max(abs(value), 1e-300)
            return value, cond
        if not np.all(np.isfinite(partial)):
            return None
        total, abs_total = partial[-1], abs_partial[-1]
        term = terms[-1] * ratio[-1]
        k0 += chunk
    return None


def _d_b_contour(b: np.ndarray, p: float, delta: float) -> np.ndarray:
    """D_b for p < 1 from its integral representation on a rotated ray.

    D_b = (sin(pi delta)/pi) int_0^inf [1 - (1 - p/(1+v))^b] v^(delta-1) dv.
    The ray v = r e^{i phi}, phi = +-pi/2 following the sign of Im b, turns
    the oscillation of (.)^b for large |Im b| into exponential damping.
    """
    b = np.atleast_1d(np.asarray(b, dtype=complex))
    n = b.size
    sign = np.where(b.imag < 0, -1.0, 1.0)
    scale = 4.0 * (1.0 + np.abs(b) * p)
    s_max = scale ** delta                          # head covers r in [0, scale]

    def g(r, i):
        # log(1 - p/(1+v)) at v = +-i r, split into real and imaginary parts
        r2 = r * r
        lq = 0.5 * np.log1p(-p * (2.0 - p) / (1.0 + r2)) + 1j * sign[i][:, None] * np.arctan(r * p / (1.0 - p + r2))
        return -_cexpm1(b[i][:, None] * lq)

    def head(x, i):
        s = s_max[i][:, None] * x
        r = s ** (1.0 / delta)
        return g(r, i) * s_max[i][:, None] / delta

    def tail(y, i):
        r = scale[i][:, None] * y ** (-1.0 / (1.0 - delta))
        jac = scale[i][:, None] ** delta / (1.0 - delta) * y ** (-1.0 / (1.0 - delta))
        return g(r, i) * jac

    tol = 1e-14 * (1.0 + np.abs(b) * p) ** delta
    noise = 8.0 * np.finfo(float).eps * (1.0 + np.abs(b) * (1.0 - math.log1p(-p)))
    h, _ = gauss_kronrod_batch(head, n, tol=tol, initial_panels=2, rel_noise=noise)
    t, _ = gauss_kronrod_batch(tail, n, tol=tol, initial_panels=2, rel_noise=noise)
    pref = math.sin(math.pi * delta) / math.pi * np.exp(1j * delta * 0.5 * math.pi * sign)
    return pref * (h + t)


def _clog1p(z):
    # Kahan: log(w) z/(w-1) with w = 1+z recovers the bits lost in forming w
    z = np.asarray(z, dtype=complex)
    w = 1.0 + z
    dw = w - 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(w) * (z / dw)
    return np.where(dw == 0, z, out)


def _cexpm1(z):
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    em1 = np.expm1(x)
    re = em1 * np.cos(y) - 2.0 * np.sin(0.5 * y) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def d_b(b, p: float, delta: float):
    """The function D_b(p, delta) behind the bipolar moments.

    p = 1 uses the gamma-ratio closed form.  For p < 1 the defining series
    is summed; when it is badly conditioned (large |b| p, where terms grow
    far beyond the result) or slow, the integral representation is used
    instead.  Integer b >= 1 makes the series terminate at k = b.
    """
    _check_p_delta(p, delta)
    real_in = isinstance(b, numbers.Real)
    bc = complex(b)
    if p == 0.0 or bc == 0:
        return 0.0 if real_in else 0j
    if p == 1.0:
        if bc.imag == 0 and bc.real <= 0 and float(bc.real).is_integer():
            raise UndefinedError("D_b(1, delta) undefined for b a negative integer")
        s = bc + delta
        if s.imag == 0 and s.real <= 0 and float(s.real).is_integer():
            raise UndefinedError("D_b(1, delta) undefined for b + delta a nonpositive integer")
        out = complex(_d_b_gamma(np.array([bc]), delta)[0])
    else:
        res = _d_b_series(bc, p, delta)
        if res is not None and res[1] < 1e2:
            out = res[0]
        else:
            out = complex(_d_b_contour(np.array([bc]), p, delta)[0])
    return out.real if real_in else out


def d_b_array(b: np.ndarray, p: float, delta: float) -> np.ndarray:
    """Vectorised D_b for arrays of complex orders (no pole checks)."""
    _check_p_delta(p, delta)
    b = np.asarray(b, dtype=complex)
    if p == 0.0:
        return np.zeros(b.shape, dtype=complex)
    if p == 1.0:
        return _d_b_gamma(b, delta)
    out = np.zeros(b.shape, dtype=complex)
    nz = b != 0
    if np.any(nz):
        out[nz] = _d_b_contour(b[nz], p, delta)
    return out
