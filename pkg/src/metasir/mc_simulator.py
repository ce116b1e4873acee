"""Monte Carlo oracle for the meta distribution.

Each realization draws a PPP in a disc of radius w around the typical
receiver and computes P_s exactly by averaging fading and channel access
analytically (the product forms).  Interferers beyond w are not dropped:
their contribution to log P_s is replaced by its mean, which by Campbell's
theorem is lambda int_{|x|>w} log f(x) dx and is summed here as a power
series.  The residual error is the far-field fluctuation, which is of
second order in the neglected interference.

Random numbers come from counter-based Philox streams: the key is the
master seed and the counter names the chunk of realizations, so the
samples do not depend on how many threads run the chunks.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bipolar_model import BipolarParams
from .cellular_model import CellularParams
from .errors import ConfigError, DomainError, EmptyRealization
from .gil_pelaez import CcdfCurve

__all__ = ["SimConfig", "EmpiricalMeta", "simulate", "simulate_bipolar", "simulate_cellular",
           "empirical_ccdf", "empirical_moment", "empirical_variance", "default_window",
           "write_samples", "THREADS_ENV"]

THREADS_ENV = "METASIR_THREADS"
CHUNK = 4096
RESIDUAL = 1e-5
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SimConfig:
    model: str
    params: BipolarParams | CellularParams
    theta: float
    realizations: int
    window_radius: float | None = None
    master_seed: int = 0
    bs_density: float = 1.0          # cellular only; results must not depend on it
    threads: int | None = None

    def __post_init__(self):
        if self.model not in ("bipolar", "cellular"):
            raise ConfigError(f"unknown model {self.model!r}")
        want = BipolarParams if self.model == "bipolar" else CellularParams
        if not isinstance(self.params, want):
            raise ConfigError(f"{self.model} model needs {want.__name__}")
        if self.realizations < 1:
            raise ConfigError("need at least one realization")
        if not self.theta > 0:
            raise ConfigError("theta must be positive")
        if not self.bs_density > 0:
            raise ConfigError("BS density must be positive")

    @property
    def window(self) -> float:
        return self.window_radius if self.window_radius is not None else default_window(self)


@dataclass
class EmpiricalMeta:
    samples: np.ndarray
    theta: float
    rejected: int = 0
    window: float = math.nan
    config: SimConfig | None = field(default=None, repr=False)

    def __len__(self):
        return self.samples.size


def _threads(cfg: SimConfig) -> int:
    if cfg.threads is not None:
        return max(1, int(cfg.threads))
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer") from None


def _rng(seed: int, chunk: int) -> np.random.Generator:
    key = [seed & _MASK64, (seed >> 64) & _MASK64]
    return np.random.Generator(np.random.Philox(key=key, counter=[0, 0, chunk, 0]))


def _log_far(A: np.ndarray | float, p: float, alpha: float, w: float, lam: float) -> np.ndarray:
    # lam int_w^inf log(1 - p y/(1+y)) 2 pi r dr with y = A r^-alpha, as a power series in y(w)
    A = np.asarray(A, dtype=float)
    yw = A * w ** (-alpha)
    if np.any(yw >= 0.75):
        raise ConfigError("window too small for the far-field series")
    total = np.zeros_like(yw)
    term_pow = np.ones_like(yw)
    for n in range(1, 200):
        term_pow = term_pow * yw
        c = (-1) ** (n + 1) * ((1.0 - p) ** n - 1.0) / n
        inc = c * term_pow / (n * alpha - 2.0)
        total = total + inc
        if np.all(np.abs(inc) < 1e-17 * np.maximum(np.abs(total), 1e-300)):
            break
    return lam * 2.0 * math.pi * w * w * total


def default_window(cfg: SimConfig) -> float:
    """Window radius whose far-field residual moves the moments by < ~1e-5.

    The mean of the far-field log term is added back exactly, so what is left
    is second order: the variance of that term, lam int_w^inf (p y/(1+y))^2
    2 pi r dr <= lam p^2 2 pi A^2 w^(2-2 alpha)/(2 alpha-2) with y = A r^-alpha.
    The bipolar window keeps this below RESIDUAL and never drops below 4R.
    For the cellular model the window is in units of the mean nearest-BS
    distance, 8.4/sqrt(lambda), which makes the rejection of realizations
    with a far serving BS (r_0 > w/4) a 1e-6 event.
    """
    a = cfg.params.alpha
    if cfg.model == "bipolar":
        P = cfg.params
        A = cfg.theta * P.R ** a
        c = P.lam * P.p ** 2 * 2.0 * math.pi * A * A / (2.0 * a - 2.0)
        w = (c / RESIDUAL) ** (1.0 / (2.0 * a - 2.0))
        return max(w, 4.0 * P.R, (A / 0.25) ** (1.0 / a))
    return 8.4 / math.sqrt(cfg.bs_density)


def _cell_ratio(cfg: SimConfig) -> float:
    # realizations with r0 > w/ratio are rejected
    return max(4.0, (cfg.theta / 0.25) ** (1.0 / cfg.params.alpha))


def _bipolar_chunk(cfg: SimConfig, w: float, far: float, n: int, rng: np.random.Generator):
    P = cfg.params
    a = P.alpha
    A = cfg.theta * P.R ** a
    counts = rng.poisson(P.lam * math.pi * w * w, size=n)
    r2 = w * w * rng.random(counts.sum())
    y = A * r2 ** (-0.5 * a)
    lf = np.log1p(-P.p * y / (1.0 + y))
    owner = np.repeat(np.arange(n), counts)
    logp = np.bincount(owner, weights=lf, minlength=n)
    return np.exp(logp + far), 0


def _cellular_chunk(cfg: SimConfig, w: float, n: int, rng: np.random.Generator):
    P = cfg.params
    a, p = P.alpha, P.activity_p
    lam = cfg.bs_density
    ratio = _cell_ratio(cfg)
    out = np.empty(n)
    todo = np.arange(n)
    rejected = 0
    for _ in range(1000):
        m = todo.size
        counts = rng.poisson(lam * math.pi * w * w, size=m)
        r2 = w * w * rng.random(counts.sum())
        owner = np.repeat(np.arange(m), counts)
        # nearest BS per realization
        r0sq = np.full(m, np.inf)
        np.minimum.at(r0sq, owner, r2)
        ok = np.isfinite(r0sq) & (r0sq <= (w / ratio) ** 2)
        y = cfg.theta * (r0sq[owner] / r2) ** (0.5 * a)
        lf = np.log1p(-p * y / (1.0 + y))
        lf[r2 == r0sq[owner]] = 0.0        # the serving BS is not an interferer
        logp = np.bincount(owner, weights=lf, minlength=m)
        good = np.flatnonzero(ok)
        far = _log_far(cfg.theta * r0sq[good] ** (0.5 * a), p, a, w, lam)
        out[todo[good]] = np.exp(logp[good] + far)
        rejected += m - good.size
        todo = todo[~ok]
        if todo.size == 0:
            return out, rejected
    raise EmptyRealization("could not draw an admissible BS configuration")


def _run(cfg: SimConfig, worker) -> EmpiricalMeta:
    n = cfg.realizations
    nchunks = -(-n // CHUNK)
    sizes = [min(CHUNK, n - k * CHUNK) for k in range(nchunks)]

    def job(k):
        return worker(sizes[k], _rng(cfg.master_seed, k))

    nt = _threads(cfg)
    if nt == 1:
        parts = [job(k) for k in range(nchunks)]
    else:
        with ThreadPoolExecutor(max_workers=nt) as ex:
            parts = list(ex.map(job, range(nchunks)))
    samples = np.concatenate([s for s, _ in parts])
    rejected = sum(r for _, r in parts)
    return EmpiricalMeta(samples=np.clip(samples, 0.0, 1.0), theta=cfg.theta, rejected=rejected,
                         window=cfg.window, config=cfg)


def simulate_bipolar(cfg: SimConfig) -> EmpiricalMeta:
    if cfg.model != "bipolar":
        raise ConfigError("simulate_bipolar needs a bipolar configuration")
    P = cfg.params
    w = cfg.window
    A = cfg.theta * P.R ** P.alpha
    if A * w ** (-P.alpha) >= 0.75:
        raise ConfigError(f"window radius {w} too small for theta R^alpha = {A}")
    far = float(_log_far(A, P.p, P.alpha, w, P.lam))
    return _run(cfg, lambda n, rng: _bipolar_chunk(cfg, w, far, n, rng))


def simulate_cellular(cfg: SimConfig) -> EmpiricalMeta:
    if cfg.model != "cellular":
        raise ConfigError("simulate_cellular needs a cellular configuration")
    w = cfg.window
    if cfg.bs_density * math.pi * (w / _cell_ratio(cfg)) ** 2 < 5.0:
        raise ConfigError(f"window radius {w} leaves too many realizations without a nearby BS")
    return _run(cfg, lambda n, rng: _cellular_chunk(cfg, w, n, rng))


def simulate(cfg: SimConfig) -> EmpiricalMeta:
    return simulate_bipolar(cfg) if cfg.model == "bipolar" else simulate_cellular(cfg)


def empirical_ccdf(meta: EmpiricalMeta, x_grid) -> CcdfCurve:
    """Fraction of samples strictly above each x."""
    if len(meta) == 0:
        raise DomainError("no samples")
    xs = np.asarray(x_grid, dtype=float)
    s = np.sort(meta.samples)
    vals = 1.0 - np.searchsorted(s, xs, side="right") / s.size
    return CcdfCurve(theta=meta.theta, x=xs, values=vals)


def empirical_moment(meta: EmpiricalMeta, b: float) -> tuple[float, float]:
    """Sample mean of P_s^b and its standard error."""
    s = meta.samples
    if b < 0 and np.any(s <= 0):
        raise DomainError("negative moment with a zero sample")
    v = s ** b
    se = float(v.std(ddof=1) / math.sqrt(v.size)) if v.size > 1 else math.inf
    return float(v.mean()), se


def empirical_variance(meta: EmpiricalMeta) -> tuple[float, float]:
    """Sample variance and the standard error sqrt((mu_4 - sigma^4)/N)."""
    s = meta.samples
    n = s.size
    d = s - s.mean()
    var = float(d @ d / (n - 1))
    mu4 = float(np.mean(d ** 4))
    return var, math.sqrt(max(mu4 - var * var, 0.0) / n)


def write_samples(meta: EmpiricalMeta, path, fmt: str = "bin") -> None:
    """Little-endian float64 binary, or one-column CSV with a header."""
    if fmt == "bin":
        meta.samples.astype("<f8").tofile(path)
    elif fmt == "csv":
        with open(path, "w") as fh:
            fh.write("ps\n")
            fh.writelines(f"{v:.17g}\n" for v in meta.samples)
    else:
        raise ConfigError(f"unknown sample format {fmt!r}")
