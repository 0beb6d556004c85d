"""Type distributions on [0, 1] and their truncated moments.

Every reputational quantity in the game is a difference of conditional
means E[theta | lo <= theta <= hi], so this module is the numerical floor
the rest of the package stands on.  All families here integrate exactly
(uniform, linear and piecewise-linear densities have polynomial
antiderivatives), which keeps finite-difference checks downstream clean.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEGENERATE_EPS = 1e-10


class DegenerateInterval(ValueError):
    """Raised when a conditional mean is requested over a collapsed segment."""


class TypeDistribution:
    """Base class.  Subclasses provide ``pdf``, ``cdf`` and ``partial_moment``
    (the integral of theta * f from 0 to x), all vectorised over x."""

    name = "abstract"

    def pdf(self, x):
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def partial_moment(self, x):
        raise NotImplementedError

    def interval_moments(self, lo, hi):
        """Return (mass, first moment) of the interval [lo, hi]."""
        return self.cdf(hi) - self.cdf(lo), self.partial_moment(hi) - self.partial_moment(lo)

    def mean(self) -> float:
        return float(self.partial_moment(1.0))

    @property
    def is_monotone(self) -> int:
        """+1 non-decreasing, -1 non-increasing, 0 constant, None otherwise."""
        return None

    def to_dict(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Uniform(TypeDistribution):
    name = "uniform"

    def pdf(self, x):
        return np.ones_like(np.asarray(x, dtype=float)) if np.ndim(x) else 1.0

    def cdf(self, x):
        return x

    def partial_moment(self, x):
        return 0.5 * np.multiply(x, x)

    def interval_moments(self, lo, hi):
        w = np.subtract(hi, lo)
        return w, w * 0.5 * np.add(lo, hi)

    @property
    def is_monotone(self):
        return 0

    def to_dict(self):
        return {"family": "uniform"}


@dataclass(frozen=True)
class Linear(TypeDistribution):
    """f(theta) = 1 + slope * (theta - 1/2).  |slope| <= 2 keeps f > 0 on (0, 1)."""

    slope: float

    name = "linear"

    def __post_init__(self):
        if not np.isfinite(self.slope) or abs(self.slope) > 2.0:
            raise ValueError(f"linear density slope must lie in [-2, 2], got {self.slope}")

    @property
    def _a(self):
        return 1.0 - 0.5 * self.slope

    def pdf(self, x):
        return self._a + self.slope * np.asarray(x, dtype=float) if np.ndim(x) else self._a + self.slope * x

    def cdf(self, x):
        return self._a * x + 0.5 * self.slope * np.multiply(x, x)

    def partial_moment(self, x):
        x2 = np.multiply(x, x)
        return 0.5 * self._a * x2 + self.slope * np.multiply(x2, x) / 3.0

    def interval_moments(self, lo, hi):
        # width factored out so short intervals do not cancel
        a, b = self._a, self.slope
        w = np.subtract(hi, lo)
        s = np.add(lo, hi)
        q = np.multiply(hi, hi) + np.multiply(hi, lo) + np.multiply(lo, lo)
        return w * (a + 0.5 * b * s), w * (0.5 * a * s + b * q / 3.0)

    @property
    def is_monotone(self):
        return 0 if self.slope == 0 else int(np.sign(self.slope))

    def to_dict(self):
        if self.slope < 0:
            return {"family": "linear_decreasing", "slope": -self.slope}
        if self.slope > 0:
            return {"family": "linear_increasing", "slope": self.slope}
        return {"family": "linear_increasing", "slope": 0.0}


def linear_decreasing(slope: float = 2.0) -> Linear:
    """Decreasing linear density; the default is f(theta) = 2 (1 - theta)."""
    return Linear(-abs(slope))


def linear_increasing(slope: float = 2.0) -> Linear:
    return Linear(abs(slope))


@dataclass(frozen=True)
class PiecewiseLinear(TypeDistribution):
    """Density interpolated linearly between knots covering [0, 1].

    Knot values are rescaled so the density integrates to one.  Values may be
    zero at the endpoints but must be positive at interior knots (full support).
    """

    positions: tuple
    values: tuple
    family_name: str = field(default="piecewise_linear", compare=False)

    name = "piecewise_linear"

    def __post_init__(self):
        x = np.asarray(self.positions, dtype=float)
        y = np.asarray(self.values, dtype=float)
        if x.ndim != 1 or x.shape != y.shape or x.size < 2:
            raise ValueError("piecewise-linear density needs matching 1-d knot arrays (>= 2 knots)")
        if x[0] != 0.0 or x[-1] != 1.0:
            raise ValueError("knot positions must start at 0 and end at 1")
        if np.any(np.diff(x) <= 0):
            raise ValueError("knot positions must be strictly increasing")
        if np.any(~np.isfinite(y)) or np.any(y < 0):
            raise ValueError("density values must be finite and non-negative")
        if np.any(y[1:-1] <= 0) or y.max() <= 0:
            raise ValueError("density must be positive on (0, 1) (full support)")
        total = float(np.sum(np.diff(x) * (y[1:] + y[:-1]) / 2.0))
        y = y / total
        slopes = np.diff(y) / np.diff(x)
        dx = np.diff(x)
        seg_mass = dx * (y[:-1] + y[1:]) / 2.0
        # integral of theta * f on each segment, exact for linear f
        seg_mom = dx * (x[:-1] * y[:-1] + (x[:-1] * slopes + y[:-1]) * dx / 2.0 + slopes * dx**2 / 3.0)
        object.__setattr__(self, "_x", x)
        object.__setattr__(self, "_y", y)
        object.__setattr__(self, "_s", slopes)
        object.__setattr__(self, "_F", np.concatenate([[0.0], np.cumsum(seg_mass)]))
        object.__setattr__(self, "_M", np.concatenate([[0.0], np.cumsum(seg_mom)]))
        object.__setattr__(self, "normalization", total)

    def _locate(self, x):
        k = np.searchsorted(self._x, x, side="right") - 1
        return np.clip(k, 0, self._x.size - 2)

    def pdf(self, x):
        return np.interp(x, self._x, self._y)

    def cdf(self, x):
        k = self._locate(x)
        u = np.asarray(x, dtype=float) - self._x[k]
        out = self._F[k] + self._y[k] * u + 0.5 * self._s[k] * u * u
        return out if np.ndim(x) else float(out)

    def partial_moment(self, x):
        k = self._locate(x)
        xk, yk, sk = self._x[k], self._y[k], self._s[k]
        u = np.asarray(x, dtype=float) - xk
        out = self._M[k] + xk * yk * u + (xk * sk + yk) * u * u / 2.0 + sk * u**3 / 3.0
        return out if np.ndim(x) else float(out)

    @property
    def is_monotone(self):
        d = np.diff(self._y)
        if np.all(d == 0):
            return 0
        if np.all(d >= 0):
            return 1
        if np.all(d <= 0):
            return -1
        return None

    def to_dict(self):
        if self.family_name == "tabulated":
            return {"family": "tabulated", "values": [float(v) for v in self.values]}
        return {
            "family": "piecewise_linear",
            "knots": [[float(p), float(v)] for p, v in zip(self.positions, self.values)],
        }


def piecewise_linear(knots: Sequence[Sequence[float]]) -> PiecewiseLinear:
    pos, val = zip(*knots)
    return PiecewiseLinear(tuple(float(p) for p in pos), tuple(float(v) for v in val))


def tabulated(values: Sequence[float]) -> PiecewiseLinear:
    """Density samples on a uniform grid over [0, 1], interpolated linearly."""
    values = tuple(float(v) for v in values)
    pos = tuple(np.linspace(0.0, 1.0, len(values)).tolist())
    return PiecewiseLinear(pos, values, family_name="tabulated")


def from_dict(d: dict) -> TypeDistribution:
    fam = d.get("family")
    if fam == "uniform":
        return Uniform()
    if fam == "linear_decreasing":
        return linear_decreasing(d.get("slope", 2.0))
    if fam == "linear_increasing":
        return linear_increasing(d.get("slope", 2.0))
    if fam == "piecewise_linear":
        return piecewise_linear(d["knots"])
    if fam == "tabulated":
        return tabulated(d["values"])
    raise ValueError(f"unknown density family {fam!r}")


def _check_unit(x, what="x"):
    if np.any(np.asarray(x) < 0.0) or np.any(np.asarray(x) > 1.0):
        raise ValueError(f"{what} must lie in [0, 1], got {x}")


def cdf(dist: TypeDistribution, x):
    _check_unit(x)
    return dist.cdf(x)


def truncated_mean(dist: TypeDistribution, lo, hi, eps: float = DEGENERATE_EPS, boundary: bool = False):
    """E[theta | lo <= theta <= hi].

    Collapsed intervals (hi - lo < eps) raise DegenerateInterval unless
    ``boundary`` is set, in which case the interval midpoint is returned
    (the limit of the conditional mean for a continuous positive density).
    Vectorised over lo/hi; the error is raised if any entry is degenerate.
    """
    lo_a, hi_a = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
    if np.any(lo_a < 0.0) or np.any(hi_a > 1.0):
        raise ValueError(f"interval [{lo}, {hi}] not inside [0, 1]")
    width = hi_a - lo_a
    short = width < eps
    if np.any(short) and not boundary:
        raise DegenerateInterval(f"segment [{lo}, {hi}] is collapsed (width < {eps:g})")
    if not np.any(short):
        mass, mom = dist.interval_moments(lo, hi)
        if np.any(np.asarray(mass) <= 0):
            raise DegenerateInterval(f"segment [{lo}, {hi}] carries no probability mass")
        return mom / mass
    mid = 0.5 * (lo_a + hi_a)
    # evaluate collapsed entries on a dummy full interval, then mask them
    lo_safe = np.where(short, 0.0, lo_a)
    hi_safe = np.where(short, 1.0, hi_a)
    mass, mom = dist.interval_moments(lo_safe, hi_safe)
    out = np.where(short, mid, np.asarray(mom) / np.asarray(mass))
    return out if out.ndim else float(out)


def dmean_dhi(dist: TypeDistribution, lo, hi, eps: float = DEGENERATE_EPS):
    """Derivative of E[theta | lo..hi] with respect to the upper bound.

    f(hi) (hi - m) / (F(hi) - F(lo)); tends to 1/2 as the interval collapses.
    """
    if hi - lo < eps:
        return 0.5
    mass, mom = dist.interval_moments(lo, hi)
    m = mom / mass
    return float(dist.pdf(hi) * (hi - m) / mass)


def dmean_dlo(dist: TypeDistribution, lo, hi, eps: float = DEGENERATE_EPS):
    """Derivative of E[theta | lo..hi] with respect to the lower bound."""
    if hi - lo < eps:
        return 0.5
    mass, mom = dist.interval_moments(lo, hi)
    m = mom / mass
    return float(dist.pdf(lo) * (m - lo) / mass)


def jewitt_gap(dist: TypeDistribution, cut, lo: float = 0.0, hi: float = 1.0):
    """Upper minus lower truncated mean around ``cut`` within [lo, hi].

    Monotone in ``cut`` whenever the density is monotone: non-decreasing for
    a non-increasing density, non-increasing for a non-decreasing one.
    """
    if np.any(np.asarray(cut) <= lo) or np.any(np.asarray(cut) >= hi):
        raise ValueError("cut must lie strictly inside (lo, hi)")
    return truncated_mean(dist, cut, hi) - truncated_mean(dist, lo, cut)
