"""Reputational gaps, the three-equation equilibrium residual and its Jacobian.

Notation in code:  a profile is (theta_l, theta_hat, theta_h) with
0 < theta_l < theta_hat < theta_h < 1 in a partially-separating profile.
Group h holds [theta_hat, 1], group l holds [0, theta_hat); inside each
group types at or above the action cutoff take a = 1.

The residual vector is (sigma_h, sigma_l, sigma_s).  sigma_h and sigma_l are
the action-indifference conditions.  sigma_s is the group-indifference
condition of the marginal type and comes in two forms:

``"canonical"`` (default)
    mu_I phi_tilde - (mu_I - mu_O) phi - dtilde - ctilde - gamma with
    dtilde = d(1, h, .) - d(0, l, .).  This is the canonical residual the
    solver and the comparative statics work with.
``"direct"``
    The marginal type's payoff comparison evaluated straight from the stage
    payoffs, mu_O phi + Vtilde - ctilde - gamma.  The marginal type shirks in
    h and works in l, so its cost terms are d(0, h, .) - d(1, l, .).

The two forms differ by d_h(theta_hat) + d_l(theta_hat) + beta + v(0,h) -
v(1,l) at interior profiles; ``form_gap`` reports that difference.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .density import DEGENERATE_EPS, DegenerateInterval, dmean_dhi, dmean_dlo, truncated_mean
from .model import ModelSpec, action_cost_gap, group_cost_gap

FORMS = ("canonical", "direct")


class Ordering(str, Enum):
    INTERIOR = "Interior"
    POOLING_LOW = "PoolingLowGroup"
    POOLING_HIGH = "PoolingHighGroup"
    ALL_IN_ONE = "AllInOneGroup"
    INVALID = "Invalid"


@dataclass(frozen=True)
class CutoffProfile:
    theta_l: float
    theta_hat: float
    theta_h: float

    @property
    def ordering(self) -> Ordering:
        l, s, h = self.theta_l, self.theta_hat, self.theta_h
        if not (0.0 <= l <= s <= h <= 1.0):
            return Ordering.INVALID
        if s <= 0.0 or s >= 1.0:
            return Ordering.ALL_IN_ONE
        if h <= s or h >= 1.0:
            return Ordering.POOLING_HIGH
        if l <= 0.0 or l >= s:
            return Ordering.POOLING_LOW
        return Ordering.INTERIOR

    @property
    def is_interior(self) -> bool:
        return self.ordering is Ordering.INTERIOR

    def as_array(self):
        """(theta_h, theta_l, theta_hat): the column order of the Jacobian."""
        return np.array([self.theta_h, self.theta_l, self.theta_hat])

    @classmethod
    def from_array(cls, x):
        return cls(theta_l=float(x[1]), theta_hat=float(x[2]), theta_h=float(x[0]))

    def segment_bounds(self):
        """Bounds of the (l,0), (l,1), (h,0), (h,1) segments."""
        return {
            ("l", 0): (0.0, self.theta_l),
            ("l", 1): (self.theta_l, self.theta_hat),
            ("h", 0): (self.theta_hat, self.theta_h),
            ("h", 1): (self.theta_h, 1.0),
        }

    def distance(self, other: "CutoffProfile") -> float:
        return float(np.max(np.abs(self.as_array() - other.as_array())))


@dataclass(frozen=True)
class SigmaValue:
    sigma_h: float
    sigma_l: float
    sigma_s: float

    def as_array(self):
        return np.array([self.sigma_h, self.sigma_l, self.sigma_s])

    @property
    def max_abs(self) -> float:
        return float(np.max(np.abs(self.as_array())))


def _cm(dist, lo, hi, boundary=False):
    """Conditional mean; the outer segments may be empty at the ends of [0, 1]."""
    if hi - lo < DEGENERATE_EPS and (boundary or lo >= 1.0 or hi <= 0.0):
        return 0.5 * (lo + hi)
    return truncated_mean(dist, lo, hi)


def _dhi(dist, lo, hi):
    return dmean_dhi(dist, lo, hi)


def _dlo(dist, lo, hi):
    return dmean_dlo(dist, lo, hi)


# --------------------------------------------------------------------------
# reputational gaps
# --------------------------------------------------------------------------

def phi_h(dist, profile: CutoffProfile, boundary=False) -> float:
    """E[theta | theta_h..1] - E[theta | theta_hat..theta_h]."""
    s, h = profile.theta_hat, profile.theta_h
    return _cm(dist, h, 1.0, boundary) - _cm(dist, s, h, boundary)


def phi_l(dist, profile: CutoffProfile, boundary=False) -> float:
    """E[theta | theta_l..theta_hat] - E[theta | 0..theta_l]."""
    l, s = profile.theta_l, profile.theta_hat
    return _cm(dist, l, s, boundary) - _cm(dist, 0.0, l, boundary)


def phi_group(dist, theta_hat, boundary=False) -> float:
    """Outside-status gap E[theta | h] - E[theta | l]."""
    return _cm(dist, theta_hat, 1.0, boundary) - _cm(dist, 0.0, theta_hat, boundary)


def phi_tilde(dist, profile: CutoffProfile, boundary=False) -> float:
    """Mean of h-group shirkers minus mean of l-group workers."""
    l, s, h = profile.theta_l, profile.theta_hat, profile.theta_h
    return _cm(dist, s, h, boundary) - _cm(dist, l, s, boundary)


def dphi_h(dist, profile):
    """(d/d theta_h, d/d theta_hat) of phi_h."""
    s, h = profile.theta_hat, profile.theta_h
    return _dlo(dist, h, 1.0) - _dhi(dist, s, h), -_dlo(dist, s, h)


def dphi_l(dist, profile):
    """(d/d theta_l, d/d theta_hat) of phi_l."""
    l, s = profile.theta_l, profile.theta_hat
    return _dlo(dist, l, s) - _dhi(dist, 0.0, l), _dhi(dist, l, s)


def dphi_group(dist, theta_hat):
    return _dlo(dist, theta_hat, 1.0) - _dhi(dist, 0.0, theta_hat)


def dphi_tilde(dist, profile):
    """(d/d theta_h, d/d theta_l, d/d theta_hat) of phi_tilde."""
    l, s, h = profile.theta_l, profile.theta_hat, profile.theta_h
    return _dhi(dist, s, h), -_dlo(dist, l, s), _dlo(dist, s, h) - _dhi(dist, l, s)


def population_means(dist, theta_hat):
    """Population mean and the two group means (display only: the level
    terms cancel out of every cutoff condition)."""
    return {
        "all": float(truncated_mean(dist, 0.0, 1.0)),
        "h": _cm(dist, theta_hat, 1.0),
        "l": _cm(dist, 0.0, theta_hat),
    }


# --------------------------------------------------------------------------
# residual system
# --------------------------------------------------------------------------

def dtilde(spec: ModelSpec, theta):
    return spec.action_cost.level(1, "h", theta) - spec.action_cost.level(0, "l", theta)


def _reputation_s(spec, profile, boundary=False):
    """Status part of the marginal type's h-minus-l comparison."""
    d = spec.dist
    l, s, h = profile.theta_l, profile.theta_hat, profile.theta_h
    mh, ml, mo = spec.mu_i("h"), spec.mu_i("l"), spec.mu_outside
    if spec.mu_inside_by_group is None:
        return mh * phi_tilde(d, profile, boundary) - (mh - mo) * phi_group(d, s, boundary)
    bar_h, bar_l = _cm(d, s, 1.0, boundary), _cm(d, 0.0, s, boundary)
    return (mh * (_cm(d, s, h, boundary) - bar_h) - ml * (_cm(d, l, s, boundary) - bar_l)
            + mo * (bar_h - bar_l))


def sigma_action(spec: ModelSpec, g, profile, boundary=False) -> float:
    if g == "h":
        return (action_cost_gap(spec, "h", profile.theta_h) - spec.benefits.gap("h")
                - spec.mu_i("h") * phi_h(spec.dist, profile, boundary))
    return (action_cost_gap(spec, "l", profile.theta_l) - spec.benefits.gap("l")
            - spec.mu_i("l") * phi_l(spec.dist, profile, boundary))


def sigma_group(spec: ModelSpec, profile, form="canonical", boundary=False) -> float:
    if form == "canonical":
        s = profile.theta_hat
        return (_reputation_s(spec, profile, boundary) - dtilde(spec, s) - group_cost_gap(spec, s))
    if form == "direct":
        return direct_residual(spec, profile)
    raise ValueError(f"form must be one of {FORMS}, got {form!r}")


def sigma(spec: ModelSpec, profile: CutoffProfile, form="canonical", boundary=False) -> SigmaValue:
    """Residuals of the two action conditions and the group condition."""
    return SigmaValue(
        float(sigma_action(spec, "h", profile, boundary)),
        float(sigma_action(spec, "l", profile, boundary)),
        float(sigma_group(spec, profile, form, boundary)),
    )


def sigma_jacobian(spec: ModelSpec, profile: CutoffProfile, form="canonical"):
    """J[i, j] = d sigma_i / d x_j, rows (h, l, s), columns (theta_h, theta_l, theta_hat).

    Entries J[0, 1] and J[1, 0] are structurally zero.
    """
    if form not in FORMS:
        raise ValueError(f"form must be one of {FORMS}, got {form!r}")
    d = spec.dist
    s = profile.theta_hat
    mh, ml, mo = spec.mu_i("h"), spec.mu_i("l"), spec.mu_outside
    ac = spec.action_cost

    ph_h, ph_s = dphi_h(d, profile)
    pl_l, pl_s = dphi_l(d, profile)
    pt_h, pt_l, pt_s = dphi_tilde(d, profile)

    J = np.zeros((3, 3))
    J[0, 0] = ac.gap_slope("h", profile.theta_h) - mh * ph_h
    J[0, 2] = -mh * ph_s
    J[1, 1] = ac.gap_slope("l", profile.theta_l) - ml * pl_l
    J[1, 2] = -ml * pl_s

    J[2, 0] = mh * pt_h
    J[2, 1] = ml * pt_l
    if spec.mu_inside_by_group is None:
        rep_s = mh * pt_s - (mh - mo) * dphi_group(d, s)
    else:
        bar_h_s, bar_l_s = _dlo(d, s, 1.0), _dhi(d, 0.0, s)
        rep_s = (mh * (_dlo(d, s, profile.theta_h) - bar_h_s)
                 - ml * (_dhi(d, profile.theta_l, s) - bar_l_s)
                 + mo * (bar_h_s - bar_l_s))
    if form == "canonical":
        cost_s = ac.level_slope(1, "h", s) - ac.level_slope(0, "l", s)
    else:
        cost_s = ac.level_slope(0, "h", s) - ac.level_slope(1, "l", s)
    J[2, 2] = rep_s - cost_s - spec.group_cost.gap_slope(s)
    return J


def policy_gradient(form="canonical"):
    """d sigma / d (alpha, beta, gamma); rows (h, l, s)."""
    P = np.array([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, -1.0]])
    if form == "direct":
        # the marginal type works in l, so beta reaches its group comparison
        P[2, 1] = 1.0
    return P


# --------------------------------------------------------------------------
# directly evaluated stage payoffs
# --------------------------------------------------------------------------

def stage2_value(spec: ModelSpec, profile: CutoffProfile, g, theta) -> float:
    """V(a*, g, theta) with beliefs and action implied by the profile.

    The type takes a = 1 iff theta >= theta_g (ties go to the higher action).
    Collapsed segments carry their limit belief.
    """
    d = spec.dist
    l, s, h = profile.theta_l, profile.theta_hat, profile.theta_h
    if g == "h":
        a = 1 if theta >= h else 0
        belief = _cm(d, h, 1.0, True) if a else _cm(d, s, h, True)
        bar = _cm(d, s, 1.0, True)
        shift = spec.policy.alpha
    else:
        a = 1 if theta >= l else 0
        belief = _cm(d, l, s, True) if a else _cm(d, 0.0, l, True)
        bar = _cm(d, 0.0, s, True)
        shift = spec.policy.beta
    return (spec.benefits.v(a, g) - spec.action_cost.level(a, g, theta) - shift * a
            + spec.mu_i(g) * (belief - bar))


def value_gap(spec: ModelSpec, profile: CutoffProfile, theta) -> float:
    """Vtilde = V(a*, h, theta) - V(a*, l, theta)."""
    return stage2_value(spec, profile, "h", theta) - stage2_value(spec, profile, "l", theta)


def direct_residual(spec: ModelSpec, profile: CutoffProfile) -> float:
    """mu_O phi(theta_hat) + Vtilde(theta_hat) - ctilde(theta_hat) - gamma.

    Zero when the marginal type is exactly indifferent between groups under
    the stage payoffs.
    """
    s = profile.theta_hat
    return (spec.mu_outside * phi_group(spec.dist, s, boundary=True)
            + value_gap(spec, profile, s) - group_cost_gap(spec, s))


def form_gap(spec: ModelSpec, profile: CutoffProfile) -> float:
    """Direct-minus-canonical group residual at a profile."""
    return direct_residual(spec, profile) - sigma_group(spec, profile, "canonical", boundary=True)
