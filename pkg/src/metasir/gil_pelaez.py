"""Meta distribution from imaginary moments by Gil-Pelaez inversion.

With X = log P_s, the characteristic function of X at t is M_{jt}, so

    F(x) = P(P_s > x) = 1/2 + (1/pi) int_0^inf Im(e^{j w t} M_{jt}) / t dt,   w = -log x.

The integral is summed over panels that each span half a period of the
integrand's local oscillation.  The tail beyond the last panel is either
certified by a power-law envelope fitted to |M_{jt}|, or, when |M_{jt}|
decays too slowly for that (cellular networks decay like t^-delta), the
alternating panel sums are extrapolated with Wynn's epsilon algorithm.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Protocol, Sequence

import numpy as np

from . import bipolar_model as bipolar, cellular_model as cellular
from .errors import DomainError, TailError
from .quadrature import gauss_kronrod_batch, wynn_epsilon

__all__ = ["MomentProvider", "CachedProvider", "CcdfCurve", "Inversion", "bipolar_provider",
           "cellular_provider", "point_mass_provider", "invert", "invert_detailed", "curve"]


class MomentProvider(Protocol):
    """Maps an array of complex orders b to the moments M_b at a fixed theta."""

    def __call__(self, b: np.ndarray) -> np.ndarray: ...


def bipolar_provider(params: bipolar.BipolarParams, theta: float) -> MomentProvider:
    return lambda b: bipolar.moment_array(params, theta, b)


def cellular_provider(params: cellular.CellularParams, theta: float) -> MomentProvider:
    return lambda b: cellular.moment_array(params, theta, b)


def point_mass_provider(x0: float) -> MomentProvider:
    """Moments of the constant P_s = x0."""
    return lambda b: np.exp(np.asarray(b, dtype=complex) * math.log(x0))


class CachedProvider:
    """Memoises M_{jt} by t so repeated inversions share evaluations.

    Each instance belongs to one invocation of ``curve`` (or to a caller who
    keeps it single-threaded); it is not meant to be shared across threads.
    """

    def __init__(self, provider: MomentProvider):
        self.provider = provider
        self._cache: dict[float, complex] = {}
        self.evaluations = 0

    def at_t(self, t: np.ndarray) -> np.ndarray:
        """M_{jt} for real t >= 0 of any shape."""
        t = np.asarray(t, dtype=float)
        flat = t.ravel()
        uniq, inv = np.unique(flat, return_inverse=True)
        vals = np.empty(uniq.size, dtype=complex)
        missing = []
        for k, tk in enumerate(uniq.tolist()):
            v = self._cache.get(tk)
            if v is None:
                missing.append(k)
            else:
                vals[k] = v
        if missing:
            miss = np.asarray(missing)
            new = np.asarray(self.provider(1j * uniq[miss]), dtype=complex)
            if not np.all(np.isfinite(new)):
                raise TailError("moment provider returned a non-finite value")
            vals[miss] = new
            self._cache.update(zip(uniq[miss].tolist(), new.tolist()))
            self.evaluations += miss.size
        return vals[inv].reshape(t.shape)

    def __call__(self, b):
        return self.provider(b)


@dataclass
class Inversion:
    """Result of one Gil-Pelaez inversion with diagnostics."""
    x: float
    value: float                 # clamped to [0, 1]
    raw: float                   # before clamping
    integral: float              # int_0^T of the integrand
    tail: float                  # estimate of int_T^inf
    tail_error: float            # bound or estimate of the tail error
    tail_method: str             # "envelope" or "wynn"
    T: float
    panels: int

    @property
    def clamp_residual(self) -> float:
        return self.raw - self.value


@dataclass
class CcdfCurve:
    theta: float
    x: np.ndarray
    values: np.ndarray
    details: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.x.shape != self.values.shape:
            raise DomainError("x and values must have the same length")
        if np.any(np.diff(self.x) <= 0):
            raise DomainError("x grid must be strictly increasing")
        if np.any((self.values < 0) | (self.values > 1)):
            raise DomainError("ccdf values must lie in [0, 1]")

    @property
    def points(self) -> list[tuple[float, float]]:
        return list(zip(self.x.tolist(), self.values.tolist()))

    def is_monotone(self, slack: float = 1e-6) -> bool:
        return bool(np.all(np.diff(self.values) <= slack))


def _check_x(x):
    if not 0.0 < x < 1.0:
        raise DomainError(f"x must lie in (0, 1), got {x}")


class _Job:
    # state of one inversion: panel edges, partial sums, current frequency
    def __init__(self, x: float):
        self.x = x
        self.w = -math.log(x)
        self.T = 0.0
        self.sums: list[float] = [0.0]
        self.done = False
        self.result: Inversion | None = None
        self.prev_wynn = math.nan


def _local_frequency(cp: CachedProvider, job: _Job) -> float:
    # w plus the phase drift of M_{jt} at the current end point
    t0 = job.T
    eps = 1e-4 * max(1.0, t0)
    m = cp.at_t(np.array([t0, t0 + eps]))
    if abs(m[0]) == 0 or abs(m[1]) == 0:
        return job.w
    drift = float(np.angle(m[1] / m[0])) / eps
    return abs(job.w + drift)


def _run(cp: CachedProvider, xs: Sequence[float], tol: float, max_panels: int,
         t_max: float, panel_tol: float) -> list[Inversion]:
    jobs = [_Job(float(x)) for x in xs]
    tail_tol = 0.1 * tol
    per_round = 8
    while True:
        live = [j for j in jobs if not j.done]
        if not live:
            break
        # lay out the next panels of each live job at its local half period
        a_list, w_list, owner = [], [], []
        for j in live:
            h = math.pi / max(_local_frequency(cp, j), 0.25 * j.w, 1e-9)
            starts = j.T + h * np.arange(per_round)
            a_list.append(starts)
            w_list.append(np.full(per_round, h))
            owner.append(np.full(per_round, jobs.index(j)))
        a = np.concatenate(a_list)
        width = np.concatenate(w_list)
        own = np.concatenate(owner)
        omega = np.array([jobs[k].w for k in own])

        def f(u, idx):
            t = a[idx][:, None] + width[idx][:, None] * u
            m = cp.at_t(t)
            return np.imag(np.exp(1j * omega[idx][:, None] * t) * m) / t * width[idx][:, None]

        vals, _ = gauss_kronrod_batch(f, a.size, tol=panel_tol, initial_panels=1)
        vals = vals.real
        pos = 0
        for j in live:
            seg = vals[pos:pos + per_round]
            pos += per_round
            j.T = float(a[pos - 1] + width[pos - 1])
            j.sums.extend((j.sums[-1] + np.cumsum(seg)).tolist())
            _try_finish(cp, j, tol, tail_tol, max_panels, t_max)
        per_round = min(2 * per_round, 64)
    return [j.result for j in jobs]


def _envelope_bound(cp: CachedProvider, T: float) -> float:
    # fit |M| ~ A t^-a between T/2 and T; int_T^inf |M|/t dt = |M(T)|/a
    m = np.abs(cp.at_t(np.array([0.5 * T, T])))
    if m[1] == 0.0:
        return 0.0
    if m[0] <= m[1]:
        return math.inf
    a = math.log(m[0] / m[1]) / math.log(2.0)
    return float(m[1]) / a / math.pi


def _try_finish(cp, j: _Job, tol, tail_tol, max_panels, t_max):
    n = len(j.sums) - 1
    s = j.sums[-1]
    env = _envelope_bound(cp, j.T)
    if env < tail_tol:
        _record(j, s, 0.0, env, "envelope", n)
        return
    if n >= 16:
        est, err = wynn_epsilon(j.sums[-min(n, 48):])
        est_err = max(err, abs(est - j.prev_wynn)) / math.pi
        j.prev_wynn = est
        if est_err < tail_tol:
            _record(j, s, est - s, est_err, "wynn", n)
            return
    if n >= max_panels or j.T >= t_max:
        raise TailError(
            f"Gil-Pelaez tail not certified below {tail_tol:g} at x={j.x} (T={j.T:g}, {n} panels)")


def _record(j: _Job, integral: float, tail: float, tail_err: float, method: str, n: int):
    raw = 0.5 + (integral + tail) / math.pi
    j.result = Inversion(x=j.x, value=min(max(raw, 0.0), 1.0), raw=raw, integral=integral / math.pi,
                         tail=tail / math.pi, tail_error=tail_err, tail_method=method, T=j.T,
                         panels=n)
    j.done = True


def invert_detailed(provider: MomentProvider, x: float, tol: float = 1e-6,
                    max_panels: int = 20_000, t_max: float = 1e9,
                    panel_tol: float = 1e-10) -> Inversion:
    """Gil-Pelaez inversion at one x with full diagnostics."""
    _check_x(x)
    cp = provider if isinstance(provider, CachedProvider) else CachedProvider(provider)
    return _run(cp, [x], tol, max_panels, t_max, panel_tol)[0]


def invert(provider: MomentProvider, x: float, tol: float = 1e-6) -> float:
    """P(P_s > x), clamped to [0, 1]."""
    return invert_detailed(provider, x, tol=tol).value


def curve(provider: MomentProvider, x_grid, theta: float = math.nan, tol: float = 1e-6) -> CcdfCurve:
    """Evaluate the ccdf on a grid, sharing moment evaluations across points."""
    xs = np.asarray(x_grid, dtype=float)
    for x in xs:
        _check_x(x)
    if np.any(np.diff(xs) <= 0):
        raise DomainError("x grid must be strictly increasing")
    cp = provider if isinstance(provider, CachedProvider) else CachedProvider(provider)
    res = _run(cp, xs.tolist(), tol, 20_000, 1e9, 1e-10)
    return CcdfCurve(theta=theta, x=xs, values=np.array([r.value for r in res]), details=res)
