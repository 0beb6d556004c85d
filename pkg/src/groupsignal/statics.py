"""Sensitivity of equilibrium cutoffs to the three policy shifters.

Derivatives come from the implicit function theorem (Cramer's rule on the
residual Jacobian) and, independently, from central differences of
re-solved equilibria.  Rows are ordered (theta_hat, theta_h, theta_l),
columns (alpha, beta, gamma).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import ModelSpec
from .payoffs import policy_gradient, sigma_jacobian
from .solver import Equilibrium, NonConvergence, SolverOptions, solve_from

SHIFTERS = ("alpha", "beta", "gamma")
CUTOFFS = ("theta_hat", "theta_h", "theta_l")
# (theta_hat, theta_h, theta_l) response signs claimed for each shifter
EXPECTED_SIGNS = {
    "alpha": (-1, 1, 1),
    "beta": (1, 1, 1),
    "gamma": (1, 1, -1),
}
BRANCH_JUMP = 0.1
# Jacobian columns are (theta_h, theta_l, theta_hat); report rows as CUTOFFS
_ROW_ORDER = (2, 0, 1)


class StaticsError(RuntimeError):
    pass


class NotStable(StaticsError):
    pass


class SingularJacobian(StaticsError):
    pass


class BranchJump(StaticsError):
    pass


def _cramer(J, b):
    det = np.linalg.det(J)
    out = np.empty(3)
    for i in range(3):
        Ji = J.copy()
        Ji[:, i] = b
        out[i] = np.linalg.det(Ji) / det
    return out


def ift_derivatives(spec: ModelSpec, eq: Equilibrium, form: str = None, det_floor: float = 1e-12):
    """3x3 matrix of d(theta_hat, theta_h, theta_l) / d(alpha, beta, gamma)."""
    form = form or eq.form
    if not eq.stable_interior:
        raise NotStable(f"equilibrium is {eq.stability.verdict}/{eq.ordering.value}; statics need a stable interior one")
    J = sigma_jacobian(spec, eq.profile, form)
    det = np.linalg.det(J)
    if det <= det_floor:
        raise SingularJacobian(f"Jacobian determinant {det:.3g} is not positive")
    P = policy_gradient(form)
    D = np.empty((3, 3))
    for j in range(3):
        x = _cramer(J, -P[:, j])
        D[:, j] = x[list(_ROW_ORDER)]
    return D


def _resolve(spec, eq, shifter, value, options):
    shifted = spec.with_policy(**{shifter: value})
    try:
        new = solve_from(shifted, eq.profile, options)
    except NonConvergence as exc:
        raise BranchJump(f"re-solve failed at {shifter}={value:g}: {exc}") from exc
    if new.profile.distance(eq.profile) > BRANCH_JUMP:
        raise BranchJump(f"re-solve at {shifter}={value:g} moved {new.profile.distance(eq.profile):.3g} away")
    if not new.stable_interior:
        raise NotStable(f"shifted equilibrium at {shifter}={value:g} is {new.stability.verdict}")
    p = new.profile
    return np.array([p.theta_hat, p.theta_h, p.theta_l])


def fd_column(spec: ModelSpec, eq: Equilibrium, shifter: str, step: float = 1e-4,
              options: SolverOptions = None, rel_switch: float = 1e-3):
    """Central-difference response to one shifter, Richardson-extrapolated
    when the h and h/2 estimates disagree by more than ``rel_switch``."""
    if not step > 0:
        raise ValueError("finite-difference step must be positive")
    options = options or SolverOptions(form=eq.form)
    base = getattr(spec.policy, shifter)

    def central(h):
        return (_resolve(spec, eq, shifter, base + h, options)
                - _resolve(spec, eq, shifter, base - h, options)) / (2 * h)

    d1 = central(step)
    d2 = central(step / 2)
    scale = np.maximum(np.abs(d2), 1e-12)
    if np.any(np.abs(d1 - d2) / scale > rel_switch):
        return (4 * d2 - d1) / 3
    return d2


def fd_derivatives(spec: ModelSpec, eq: Equilibrium, step: float = 1e-4, options: SolverOptions = None):
    if not step > 0:
        raise ValueError("finite-difference step must be positive")
    return np.column_stack([fd_column(spec, eq, s, step, options) for s in SHIFTERS])


def total_effort_response(spec: ModelSpec, eq: Equilibrium, D=None):
    """dE/d(alpha, beta, gamma) for E = F(theta_hat) - F(theta_l) + 1 - F(theta_h)."""
    if D is None:
        D = ift_derivatives(spec, eq)
    f = spec.dist.pdf
    p = eq.profile
    w = np.array([f(p.theta_hat), -f(p.theta_h), -f(p.theta_l)], dtype=float)
    return w @ D


def sign_table(D, zero_tol: float = 0.0):
    return [["0" if abs(v) <= zero_tol else ("+" if v > 0 else "-") for v in row] for row in D]


def proposition_verdicts(D):
    """PASS/FAIL per shifter: all three cutoff responses carry the claimed sign."""
    out = {}
    for j, s in enumerate(SHIFTERS):
        got = tuple(int(np.sign(D[i, j])) for i in range(3))
        out[s] = "PASS" if got == EXPECTED_SIGNS[s] else "FAIL"
    return out


def agree(a, b, rtol=1e-3, atol=1e-6):
    """Entrywise agreement: relative tolerance, absolute floor near zero."""
    a, b = np.asarray(a), np.asarray(b)
    return np.abs(a - b) <= np.maximum(rtol * np.abs(b), atol)


@dataclass
class StaticsReport:
    equilibrium: Equilibrium
    derivs_ift: np.ndarray
    derivs_fd: np.ndarray
    fd_flags: dict = field(default_factory=dict)
    effort_ift: np.ndarray = None
    effort_fd: np.ndarray = None

    @property
    def sign_table(self):
        return sign_table(self.derivs_ift)

    @property
    def prop_verdicts(self):
        return proposition_verdicts(self.derivs_ift)

    @property
    def agreement(self):
        ok = agree(self.derivs_ift, self.derivs_fd)
        return np.where(np.isnan(self.derivs_fd), False, ok)


def statics_report(spec: ModelSpec, eq: Equilibrium, step: float = 1e-4, options: SolverOptions = None
                   ) -> StaticsReport:
    """IFT and FD derivatives side by side.  FD columns that fail are NaN
    and named in ``fd_flags``."""
    D = ift_derivatives(spec, eq)
    fd = np.full((3, 3), np.nan)
    flags = {}
    for j, s in enumerate(SHIFTERS):
        try:
            fd[:, j] = fd_column(spec, eq, s, step, options)
        except (BranchJump, NotStable) as exc:
            flags[s] = f"{type(exc).__name__}: {exc}"
    return StaticsReport(
        equilibrium=eq,
        derivs_ift=D,
        derivs_fd=fd,
        fd_flags=flags,
        effort_ift=total_effort_response(spec, eq, D),
        effort_fd=total_effort_response(spec, eq, fd),
    )
