"""Primitives of the two-stage game and checks of the signaling assumptions.

Groups are the strings ``"h"`` and ``"l"``; actions are the ints 0 and 1.
Only cost *gaps* enter the equilibrium conditions, with one exception: the
group-indifference residual uses d(1, h, .) - d(0, l, .), so cost levels are
kept as well.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from .density import TypeDistribution, Uniform

GROUPS = ("h", "l")
VALIDATION_GRID = 1001
STRICT_TOL = 1e-12


def _check_group(g):
    if g not in GROUPS:
        raise ValueError(f"group must be 'h' or 'l', got {g!r}")


# --------------------------------------------------------------------------
# action cost d(a, g, theta)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearGapActionCost:
    """d(1, g, theta) = delta_g (1 - theta), d(0, g, theta) = 0."""

    delta_h: float
    delta_l: float

    kind = "linear_gap"

    def level(self, a, g, theta):
        _check_group(g)
        if a == 0:
            return 0.0 * np.asarray(theta, dtype=float) if np.ndim(theta) else 0.0
        delta = self.delta_h if g == "h" else self.delta_l
        return delta * (1.0 - np.asarray(theta, dtype=float)) if np.ndim(theta) else delta * (1.0 - theta)

    def level_slope(self, a, g, theta):
        if a == 0:
            return 0.0
        return -(self.delta_h if g == "h" else self.delta_l)

    def gap(self, g, theta):
        return self.level(1, g, theta)

    def gap_slope(self, g, theta):
        return self.level_slope(1, g, theta)

    def scaled(self, k):
        return LinearGapActionCost(k * self.delta_h, k * self.delta_l)

    def to_dict(self):
        return {"family": "linear_gap", "delta_h": self.delta_h, "delta_l": self.delta_l}


@dataclass(frozen=True)
class TabulatedActionCost:
    """d(a, g, theta) sampled on a grid, interpolated with shape-preserving
    cubics (PCHIP) so monotone data stays monotone and slopes are continuous."""

    grid: tuple
    d1h: tuple
    d0h: tuple
    d1l: tuple
    d0l: tuple

    kind = "tabulated"

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        if x[0] > 0.0 or x[-1] < 1.0 or np.any(np.diff(x) <= 0):
            raise ValueError("tabulated cost grid must be increasing and cover [0, 1]")
        interp = {}
        for key in ("d1h", "d0h", "d1l", "d0l"):
            y = np.asarray(getattr(self, key), dtype=float)
            if y.shape != x.shape:
                raise ValueError(f"{key} has {y.size} samples, grid has {x.size}")
            interp[key] = PchipInterpolator(x, y)
        object.__setattr__(self, "_interp", interp)

    def _f(self, a, g):
        _check_group(g)
        return self._interp[f"d{a}{g}"]

    def level(self, a, g, theta):
        out = self._f(a, g)(theta)
        return out if np.ndim(theta) else float(out)

    def level_slope(self, a, g, theta):
        out = self._f(a, g).derivative()(theta)
        return out if np.ndim(theta) else float(out)

    def gap(self, g, theta):
        return self.level(1, g, theta) - self.level(0, g, theta)

    def gap_slope(self, g, theta):
        return self.level_slope(1, g, theta) - self.level_slope(0, g, theta)

    def scaled(self, k):
        return TabulatedActionCost(
            self.grid, *(tuple(k * v for v in getattr(self, n)) for n in ("d1h", "d0h", "d1l", "d0l"))
        )

    def to_dict(self):
        return {
            "family": "tabulated",
            "grid": list(self.grid),
            "d1h": list(self.d1h),
            "d0h": list(self.d0h),
            "d1l": list(self.d1l),
            "d0l": list(self.d0l),
        }


# --------------------------------------------------------------------------
# group cost c(g, theta)
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class LinearGapGroupCost:
    """c(h, theta) = kappa (1 - theta) + kappa0, c(l, theta) = 0."""

    kappa: float
    kappa0: float = 0.0

    kind = "linear_gap"

    def level(self, g, theta):
        _check_group(g)
        if g == "l":
            return 0.0 * np.asarray(theta, dtype=float) if np.ndim(theta) else 0.0
        return self.kappa * (1.0 - np.asarray(theta, dtype=float)) + self.kappa0 if np.ndim(theta) \
            else self.kappa * (1.0 - theta) + self.kappa0

    def level_slope(self, g, theta):
        return -self.kappa if g == "h" else 0.0

    def gap(self, theta):
        return self.level("h", theta)

    def gap_slope(self, theta):
        return -self.kappa

    def scaled(self, k):
        return LinearGapGroupCost(k * self.kappa, k * self.kappa0)

    def to_dict(self):
        return {"family": "linear_gap", "kappa": self.kappa, "kappa0": self.kappa0}


@dataclass(frozen=True)
class TabulatedGroupCost:
    grid: tuple
    ch: tuple
    cl: tuple

    kind = "tabulated"

    def __post_init__(self):
        x = np.asarray(self.grid, dtype=float)
        if x[0] > 0.0 or x[-1] < 1.0 or np.any(np.diff(x) <= 0):
            raise ValueError("tabulated cost grid must be increasing and cover [0, 1]")
        object.__setattr__(self, "_interp", {
            "h": PchipInterpolator(x, np.asarray(self.ch, dtype=float)),
            "l": PchipInterpolator(x, np.asarray(self.cl, dtype=float)),
        })

    def level(self, g, theta):
        _check_group(g)
        out = self._interp[g](theta)
        return out if np.ndim(theta) else float(out)

    def level_slope(self, g, theta):
        out = self._interp[g].derivative()(theta)
        return out if np.ndim(theta) else float(out)

    def gap(self, theta):
        return self.level("h", theta) - self.level("l", theta)

    def gap_slope(self, theta):
        return self.level_slope("h", theta) - self.level_slope("l", theta)

    def scaled(self, k):
        return TabulatedGroupCost(self.grid, tuple(k * v for v in self.ch), tuple(k * v for v in self.cl))

    def to_dict(self):
        return {"family": "tabulated", "grid": list(self.grid), "ch": list(self.ch), "cl": list(self.cl)}


# --------------------------------------------------------------------------
# spec
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Benefits:
    """Material benefits v(a, g).  Only the gaps v_g = v(1,g) - v(0,g) move
    action cutoffs; the levels v(0,h) and v(1,l) enter the directly evaluated
    group comparison."""

    v1h: float = 0.0
    v0h: float = 0.0
    v1l: float = 0.0
    v0l: float = 0.0

    def v(self, a, g):
        return getattr(self, f"v{a}{g}")

    def gap(self, g):
        return self.v(1, g) - self.v(0, g)


@dataclass(frozen=True)
class Policy:
    """Additive shifters: alpha on d_h, beta on d_l, gamma on the group-cost gap."""

    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0


@dataclass(frozen=True)
class ModelSpec:
    dist: TypeDistribution = field(default_factory=Uniform)
    action_cost: object = field(default_factory=lambda: LinearGapActionCost(1.0, 0.5))
    group_cost: object = field(default_factory=lambda: LinearGapGroupCost(0.1, 0.0))
    benefits: Benefits = field(default_factory=Benefits)
    mu_inside: float = 0.4
    mu_outside: float = 0.5
    policy: Policy = field(default_factory=Policy)
    # experimental: group-specific inside-status sensitivity {"h": .., "l": ..}
    mu_inside_by_group: Optional[tuple] = None

    def mu_i(self, g) -> float:
        if self.mu_inside_by_group is None:
            return self.mu_inside
        return dict(self.mu_inside_by_group)[g]

    def with_policy(self, alpha=None, beta=None, gamma=None) -> "ModelSpec":
        p = self.policy
        return replace(self, policy=Policy(
            p.alpha if alpha is None else alpha,
            p.beta if beta is None else beta,
            p.gamma if gamma is None else gamma,
        ))

    def scaled(self, k: float) -> "ModelSpec":
        """Multiply every payoff primitive (costs, benefits, sensitivities, shifters) by k."""
        b = self.benefits
        byg = None if self.mu_inside_by_group is None else tuple((g, k * m) for g, m in self.mu_inside_by_group)
        return replace(
            self,
            action_cost=self.action_cost.scaled(k),
            group_cost=self.group_cost.scaled(k),
            benefits=Benefits(k * b.v1h, k * b.v0h, k * b.v1l, k * b.v0l),
            mu_inside=k * self.mu_inside,
            mu_outside=k * self.mu_outside,
            policy=Policy(k * self.policy.alpha, k * self.policy.beta, k * self.policy.gamma),
            mu_inside_by_group=byg,
        )


def scenario_s1(**overrides) -> ModelSpec:
    """Uniform types, delta_h=1, delta_l=0.5, mu_I=0.4, mu_O=0.5, kappa=0.1."""
    base = ModelSpec()
    return replace(base, **overrides) if overrides else base


def action_cost_gap(spec: ModelSpec, g, theta):
    """d_g(theta) plus the group's policy shifter."""
    shift = spec.policy.alpha if g == "h" else spec.policy.beta
    return spec.action_cost.gap(g, theta) + shift


def group_cost_gap(spec: ModelSpec, theta):
    return spec.group_cost.gap(theta) + spec.policy.gamma


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    assumption: str
    theta: Optional[float]
    detail: str

    def __str__(self):
        where = "" if self.theta is None else f" at theta={self.theta:.6g}"
        return f"{self.assumption}{where}: {self.detail}"


@dataclass
class ValidationReport:
    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def lines(self):
        return [str(v) for v in self.violations]


def _first_bad(grid, values, *, strict: bool, label: str, out: list):
    diffs = np.diff(values)
    bad = diffs > (-STRICT_TOL if strict else STRICT_TOL)
    if np.any(bad):
        i = int(np.argmax(bad))
        out.append(Violation(label, float(grid[i + 1]),
                             f"value rises from {values[i]:.6g} to {values[i + 1]:.6g}"))


def validate(spec: ModelSpec, n: int = VALIDATION_GRID) -> ValidationReport:
    """Check monotonicity and single crossing of the cost primitives on a grid.

    Cost levels are required to be non-increasing in type (the built-in
    families normalise d(0, g, .) and c(l, .) to zero); the action-cost gaps
    d_g and the group-cost gap must be strictly decreasing.
    """
    grid = np.linspace(0.0, 1.0, n)
    out = []
    ac, gc = spec.action_cost, spec.group_cost
    for g in GROUPS:
        for a in (0, 1):
            _first_bad(grid, np.asarray(ac.level(a, g, grid), dtype=float), strict=False,
                       label=f"action cost decreasing in type, a={a}, group {g}", out=out)
        _first_bad(grid, np.asarray(ac.gap(g, grid), dtype=float), strict=True,
                   label=f"action single-crossing, group {g}", out=out)
        _first_bad(grid, np.asarray(gc.level(g, grid), dtype=float), strict=False,
                   label=f"group cost decreasing in type, group {g}", out=out)
    _first_bad(grid, np.asarray(gc.gap(grid), dtype=float), strict=True,
               label="group single-crossing", out=out)
    if isinstance(ac, LinearGapActionCost):
        if not ac.delta_l > 0:
            out.append(Violation("action cost ordering delta_h > delta_l > 0", None,
                                 f"delta_l={ac.delta_l} must be positive"))
        if not ac.delta_h > ac.delta_l:
            out.append(Violation("action cost ordering delta_h > delta_l > 0", None,
                                 f"delta_h={ac.delta_h} must exceed delta_l={ac.delta_l}"))
    if isinstance(gc, LinearGapGroupCost):
        if not gc.kappa > 0:
            out.append(Violation("group cost slope kappa > 0", None, f"kappa={gc.kappa}"))
        if gc.kappa0 < 0:
            out.append(Violation("group cost offset kappa0 >= 0", None, f"kappa0={gc.kappa0}"))
    for label, mu in (("mu_inside > 0", spec.mu_inside), ("mu_outside > 0", spec.mu_outside)):
        if not mu > 0:
            out.append(Violation(label, None, f"got {mu}"))
    if spec.mu_inside_by_group is not None:
        for g, mu in spec.mu_inside_by_group:
            if not mu > 0:
                out.append(Violation(f"mu_inside[{g}] > 0", None, f"got {mu}"))
    return ValidationReport(out)
