"""Bounds on the meta distribution from a handful of moments.

``classical`` gives the Markov, reverse Markov, Chebyshev and Cantelli
(Paley-Zygmund type) bounds.  ``four_moment`` gives the sharp bounds over all
distributions sharing M_1..M_4, obtained from the three-atom extremal
distributions of the moment problem after shifting the target x to 0.
All bounds are stated for the ccdf P(P_s > x).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DegenerateMoments, InfeasibleMoments, MissingMoment

__all__ = ["MomentSet", "BoundSet", "classical", "four_moment", "four_moment_cdf",
           "bound_set", "extremal_atoms"]

DEAD_ZONE = 1e-12
_ZERO_VAR = 1e-14


def _clamp(v: float) -> float:
    return min(max(v, 0.0), 1.0)


@dataclass(frozen=True)
class MomentSet:
    """Moments M_b = E(P_s^b) keyed by order."""
    M: Mapping[float, float]

    def __post_init__(self):
        m = dict(self.M)
        if 1 in m and not 0.0 < m[1] <= 1.0:
            raise InfeasibleMoments(f"M_1 must lie in (0, 1], got {m[1]}")
        pos = sorted(k for k in m if k >= 1)
        for a, b in zip(pos, pos[1:]):
            if m[b] > m[a] * (1 + 1e-12):
                raise InfeasibleMoments(f"M_{b} exceeds M_{a}")
        object.__setattr__(self, "M", m)

    def __getitem__(self, b: float) -> float:
        try:
            return self.M[b]
        except KeyError:
            raise MissingMoment(f"moment of order {b} not available") from None

    def __contains__(self, b) -> bool:
        return b in self.M

    def complementary(self, b: int) -> float:
        """E((1-P_s)^b) by binomial expansion."""
        return sum(math.comb(b, k) * (-1) ** k * (1.0 if k == 0 else self[k]) for k in range(b + 1))

    @property
    def variance(self) -> float:
        return self[2] - self[1] ** 2

    @classmethod
    def from_function(cls, fn, orders=(-1, 1, 2, 3, 4)) -> "MomentSet":
        """Collect moments from fn(b); orders whose moment is infinite are stored as inf."""
        return cls({b: float(fn(float(b))) for b in orders})


@dataclass
class BoundSet:
    x: float
    markov_upper: list[float]
    markov_lower: list[float]
    markov_lower_neg1: float | None = None
    chebyshev_lower: float | None = None
    chebyshev_upper: float | None = None
    paley_zygmund: float | None = None
    best_lower: float | None = None
    best_upper: float | None = None
    orders: tuple[int, ...] = field(default=(1, 2, 3, 4))

    def classical_lowers(self, include_neg1: bool = True) -> list[float]:
        out = list(self.markov_lower)
        if include_neg1 and self.markov_lower_neg1 is not None:
            out.append(self.markov_lower_neg1)
        out += [v for v in (self.chebyshev_lower, self.paley_zygmund) if v is not None]
        return out

    def classical_uppers(self) -> list[float]:
        out = list(self.markov_upper)
        if self.chebyshev_upper is not None:
            out.append(self.chebyshev_upper)
        return out

    def lowers(self) -> list[float]:
        out = self.classical_lowers()
        return out + ([self.best_lower] if self.best_lower is not None else [])

    def uppers(self) -> list[float]:
        out = self.classical_uppers()
        return out + ([self.best_upper] if self.best_upper is not None else [])

    @property
    def markov_envelope(self) -> float:
        return min(self.markov_upper)


def classical(moments: MomentSet, x: float, orders=(1, 2, 3, 4)) -> BoundSet:
    """Markov, reverse Markov, Chebyshev and Cantelli bounds at x."""
    if not 0.0 < x < 1.0:
        raise ValueError(f"x must lie in (0, 1), got {x}")
    up = [_clamp(moments[b] / x ** b) for b in orders]
    lo = [_clamp(1.0 - moments.complementary(b) / (1.0 - x) ** b) for b in orders]
    neg1 = None
    if -1 in moments and math.isfinite(moments[-1]):
        neg1 = _clamp(1.0 - x * moments[-1])
    m1, V = moments[1], max(moments.variance, 0.0)
    cheb_lo = cheb_up = pz = None
    if x < m1:
        cheb_lo = _clamp(1.0 - V / (x - m1) ** 2)
        # Cantelli's one-sided inequality, the sharp second-moment form
        pz = _clamp((m1 - x) ** 2 / ((m1 - x) ** 2 + V))
    elif x > m1:
        cheb_up = _clamp(V / (x - m1) ** 2)
    return BoundSet(x=x, markov_upper=up, markov_lower=lo, markov_lower_neg1=neg1,
                    chebyshev_lower=cheb_lo, chebyshev_upper=cheb_up, paley_zygmund=pz,
                    orders=tuple(orders))


def _shifted(moments: MomentSet, x: float) -> list[float]:
    raw = [1.0] + [moments[k] for k in range(1, 5)]
    return [sum(math.comb(i, k) * (-x) ** (i - k) * raw[k] for k in range(i + 1)) for i in range(5)]


@dataclass(frozen=True)
class ExtremalAtoms:
    """Three-atom distribution (shifted so the target sits at 0)."""
    p0: float
    y1: float
    y2: float
    p1: float
    p2: float
    q: float


def extremal_atoms(moments: MomentSet, x: float) -> ExtremalAtoms:
    """Atoms 0, y1 < y2 and weights p0, p1, p2 matching the shifted moments m_1..m_4.

    The two nonzero atoms are the roots of y^2 - c1 y - c0 with
    m_{k+2} = c1 m_{k+1} + c0 m_k (k = 1, 2); the weights follow from m_1, m_2.
    """
    _, m1, m2, m3, m4 = _shifted(moments, x)
    h = m2 * m4 - m3 * m3
    det = m2 * m2 - m1 * m3
    if abs(h) < DEAD_ZONE or abs(det) < DEAD_ZONE:
        raise DegenerateMoments(f"moment problem degenerate at x={x}")
    disc = (m1 * m4 - m2 * m3) ** 2 - 4.0 * det * (m3 * m3 - m2 * m4)
    if disc < 0:
        raise InfeasibleMoments(f"negative discriminant at x={x}")
    q = math.sqrt(disc)
    if q < DEAD_ZONE:
        raise DegenerateMoments(f"q(x) vanishes at x={x}")
    r1 = (m2 * m3 - m1 * m4 - q) / (2.0 * det)
    r2 = (m2 * m3 - m1 * m4 + q) / (2.0 * det)
    y1, y2 = min(r1, r2), max(r1, r2)
    a2 = (m2 - m1 * y1) / (y2 - y1)
    a1 = m1 - a2
    p1, p2 = a1 / y1, a2 / y2
    p0 = 1.0 - p1 - p2
    return ExtremalAtoms(p0=p0, y1=y1, y2=y2, p1=p1, p2=p2, q=q)


def _cases(at: ExtremalAtoms, s1: int, s2: int) -> tuple[float, float]:
    # (L, U) for the cdf given the signs of y1, y2
    if s1 < 0 and s2 < 0:
        return at.p1 + at.p2, 1.0
    if s1 < 0 < s2:
        return at.p1, at.p0 + at.p1
    return 0.0, at.p0


def _racz_cdf(moments: MomentSet, x: float) -> tuple[float, float, ExtremalAtoms]:
    at = extremal_atoms(moments, x)
    if at.y1 > DEAD_ZONE and at.y2 < -DEAD_ZONE:
        raise AssertionError("extremal atoms with y1 > 0 > y2 cannot occur")
    signs1 = [-1, 1] if abs(at.y1) <= DEAD_ZONE else [int(math.copysign(1, at.y1))]
    signs2 = [-1, 1] if abs(at.y2) <= DEAD_ZONE else [int(math.copysign(1, at.y2))]
    cand = [_cases(at, s1, s2) for s1 in signs1 for s2 in signs2 if not (s1 > 0 > s2)]
    L = min(c[0] for c in cand)
    U = max(c[1] for c in cand)
    return _clamp(L), _clamp(U), at


def _inside_unit(at: ExtremalAtoms, x: float, tol: float = 1e-12) -> bool:
    ok = min(at.p0, at.p1, at.p2) >= -tol
    return ok and all(-tol <= y + x <= 1.0 + tol for y in (at.y1, at.y2))


def _max_on(poly: np.ndarray, a: float, b: float) -> float:
    # exact maximum of a polynomial (coefficients low to high) on [a, b]
    if b <= a:
        return -math.inf
    d = np.polynomial.polynomial.polyder(poly)
    roots = np.polynomial.polynomial.polyroots(d) if np.any(d) else np.array([])
    pts = [a, b] + [r.real for r in np.atleast_1d(roots) if abs(r.imag) < 1e-12 and a < r.real < b]
    return float(max(np.polynomial.polynomial.polyval(pts, poly)))


def _lp_cdf(moments: MomentSet, x: float, n_grid: int = 801) -> tuple[float, float]:
    """Sharp cdf bounds over distributions on [0, 1] via the dual moment LP.

    A degree-4 polynomial g below the indicator of [0, x] gives P(Y <= x) >=
    E g(Y); one above it gives an upper bound.  The LP is solved on a grid,
    then g is shifted by its exact worst violation on [0, 1], so the
    returned numbers are valid bounds whatever the grid.
    """
    from scipy.optimize import linprog

    m = np.array([1.0] + [moments[k] for k in range(1, 5)])
    y = np.unique(np.concatenate([np.linspace(0.0, 1.0, n_grid), [x]]))
    V = np.vander(y, 5, increasing=True)
    ind = (y < x).astype(float)             # g <= 1 on [0, x), g <= 0 on [x, 1]
    ind_u = (y <= x).astype(float)          # h >= 1 on [0, x], h >= 0 on (x, 1]

    lo = linprog(-m, A_ub=V, b_ub=ind, bounds=[(None, None)] * 5, method="highs")
    hi = linprog(m, A_ub=-V, b_ub=-ind_u, bounds=[(None, None)] * 5, method="highs")
    if lo.status != 0 or hi.status != 0:
        raise DegenerateMoments(f"moment LP failed at x={x}")
    g, h = lo.x, hi.x
    viol_g = max(_max_on(g - np.array([1, 0, 0, 0, 0]), 0.0, x), _max_on(g, x, 1.0), 0.0)
    viol_h = max(_max_on(np.array([1, 0, 0, 0, 0]) - h, 0.0, x), _max_on(-h, x, 1.0), 0.0)
    return _clamp(float(m @ g) - viol_g), _clamp(float(m @ h) + viol_h)


def four_moment_cdf(moments: MomentSet, x: float, support: str = "unit") -> tuple[float, float]:
    """Sharp (L, U) with L <= P(P_s <= x) <= U given M_1..M_4.

    ``support="real"`` applies the closed-form three-atom solution, which is
    sharp over all distributions on the real line.  With ``support="unit"``
    (default) the same closed form is used whenever its atoms fall in [0, 1];
    otherwise the bound over distributions on [0, 1] is computed from the
    dual linear program, which is never looser.
    """
    m1 = moments[1]
    if moments[2] - m1 * m1 <= _ZERO_VAR:
        # point mass: every case denominator vanishes together
        if x < m1:
            return 0.0, 0.0
        if x > m1:
            return 1.0, 1.0
        return 0.0, 1.0
    if support not in ("unit", "real"):
        raise ValueError("support must be 'unit' or 'real'")
    L, U, at = _racz_cdf(moments, x)
    if support == "real" or _inside_unit(at, x):
        return L, U
    L2, U2 = _lp_cdf(moments, x)
    return max(L, L2), min(U, U2)


def four_moment(moments: MomentSet, x: float, support: str = "unit") -> tuple[float, float]:
    """Sharp ccdf bounds (1 - U, 1 - L) from M_1..M_4."""
    L, U = four_moment_cdf(moments, x, support)
    return 1.0 - U, 1.0 - L


def bound_set(moments: MomentSet, x: float) -> BoundSet:
    """Classical bounds plus the four-moment pair."""
    bs = classical(moments, x)
    bs.best_lower, bs.best_upper = four_moment(moments, x)
    return bs


def grid_bounds(moments: MomentSet, xs) -> list[BoundSet]:
    return [bound_set(moments, float(x)) for x in np.asarray(xs, dtype=float)]
