"""Equilibrium search: nested cutoff solve, Newton polish, stability, multistart.

The group cutoff is the outer unknown.  For each candidate theta_hat the two
action cutoffs are found by scanning their residual for sign changes and
bisecting; the group residual evaluated along those curves is then a scalar
function of theta_hat that is scanned and refined with Brent's method.  Every
interior root is polished by damped Newton on the full three-equation system.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Union

import numpy as np
from scipy.optimize import brentq

from .density import DegenerateInterval, truncated_mean
from .model import ModelSpec, action_cost_gap
from .payoffs import (
    CutoffProfile,
    Ordering,
    SigmaValue,
    direct_residual,
    sigma,
    sigma_group,
    sigma_jacobian,
)

log = logging.getLogger(__name__)

INDETERMINATE_BAND = 1e-7


class SolverError(RuntimeError):
    pass


class NonConvergence(SolverError):
    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace or []


class MultipleActionCutoffs(SolverError):
    pass


class ResidualPrecondition(ValueError):
    """Stability was requested at a profile that does not solve the system."""


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    newton_tol: float = 1e-10
    max_newton: int = 100
    scan_points: int = 512
    inner_scan_points: int = 64
    bisect_xtol: float = 1e-12
    form: str = "canonical"
    n_starts: int = 32
    fd_step: float = 1e-4


class Pooling(str, Enum):
    ALL_ACT = "AllAct"
    NONE_ACT = "NoneAct"


@dataclass(frozen=True)
class PoolingOutcome:
    group: str
    kind: Pooling

    def boundary_cutoff(self, theta_hat):
        """Cutoff value that reproduces the pooled behaviour."""
        if self.group == "h":
            return theta_hat if self.kind is Pooling.ALL_ACT else 1.0
        return 0.0 if self.kind is Pooling.ALL_ACT else theta_hat


# --------------------------------------------------------------------------
# action cutoffs
# --------------------------------------------------------------------------

def _action_residual(spec: ModelSpec, g, theta_hat, t):
    """Vectorised action residual of group g with action cutoff t.

    Collapsed segments take their limit belief, so t may sit on the ends
    of the group's interval.
    """
    d = spec.dist
    s = np.asarray(theta_hat, dtype=float)
    t = np.asarray(t, dtype=float)
    if g == "h":
        upper = truncated_mean(d, t, np.ones_like(t), boundary=True)
        lower = truncated_mean(d, np.broadcast_to(s, t.shape), t, boundary=True)
    else:
        upper = truncated_mean(d, t, np.broadcast_to(s, t.shape), boundary=True)
        lower = truncated_mean(d, np.zeros_like(t), t, boundary=True)
    return action_cost_gap(spec, g, t) - spec.benefits.gap(g) - spec.mu_i(g) * (upper - lower)


def _action_cutoffs_vec(spec, g, theta_hat, n_scan=64, xtol=1e-13):
    """Solve the action condition of group g for an array of group cutoffs.

    Returns (cutoff, code) arrays; code is 0 interior, 1 AllAct, 2 NoneAct,
    3 several sign changes.  Pooled entries carry the boundary cutoff.
    """
    s = np.atleast_1d(np.asarray(theta_hat, dtype=float))
    lo = s if g == "h" else np.zeros_like(s)
    hi = np.ones_like(s) if g == "h" else s
    u = np.linspace(0.0, 1.0, n_scan)
    T = lo[:, None] + (hi - lo)[:, None] * u[None, :]
    S = s[:, None] * np.ones_like(u)[None, :]
    R = _action_residual(spec, g, S, T)
    sg = np.sign(R)
    flips = sg[:, 1:] * sg[:, :-1] < 0
    # exact zeros on the grid are treated as roots
    zeros = sg[:, 1:-1] == 0
    n_roots = flips.sum(axis=1) + zeros.sum(axis=1)

    cut = np.empty_like(s)
    code = np.zeros(s.shape, dtype=int)
    all_act = (n_roots == 0) & (R[:, -1] <= 0) & (R[:, 0] <= 0)
    none_act = (n_roots == 0) & ~all_act
    code[all_act] = 1
    code[none_act] = 2
    code[n_roots > 1] = 3
    cut[all_act] = lo[all_act]
    cut[none_act] = hi[none_act]
    cut[n_roots > 1] = np.nan

    one = np.flatnonzero(n_roots == 1)
    if one.size:
        f = flips[one]
        z = zeros[one]
        has_flip = f.any(axis=1)
        k = np.where(has_flip, np.argmax(f, axis=1), 0)
        a = T[one, k]
        b = T[one, k + 1]
        ra = R[one, k]
        zk = np.argmax(z, axis=1) + 1
        exact = ~has_flip
        for _ in range(200):
            if np.all(b - a <= xtol):
                break
            m = 0.5 * (a + b)
            rm = _action_residual(spec, g, s[one], m)
            left = np.sign(rm) == np.sign(ra)
            a = np.where(left, m, a)
            ra = np.where(left, rm, ra)
            b = np.where(left, b, m)
        root = 0.5 * (a + b)
        root = np.where(exact, T[one, zk], root)
        cut[one] = root
    return cut, code


def solve_action_cutoff(spec: ModelSpec, g, theta_hat, options: SolverOptions = SolverOptions()
                        ) -> Union[float, PoolingOutcome]:
    """Action cutoff of group g given the group cutoff.

    Returns a float inside the group's interval, or a PoolingOutcome when the
    action residual keeps one sign over the whole interval.
    """
    if not 0.0 < theta_hat < 1.0:
        raise ValueError("theta_hat must be interior")
    cut, code = _action_cutoffs_vec(spec, g, theta_hat, options.inner_scan_points)
    c = int(code[0])
    if c == 3:
        raise MultipleActionCutoffs(f"action residual of group {g} changes sign more than once at theta_hat={theta_hat}")
    if c == 1:
        return PoolingOutcome(g, Pooling.ALL_ACT)
    if c == 2:
        return PoolingOutcome(g, Pooling.NONE_ACT)
    return float(cut[0])


# --------------------------------------------------------------------------
# results
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class Stability:
    verdict: str
    action_h: float
    action_l: float
    group: float

    @property
    def stable(self) -> bool:
        return self.verdict == "Stable"


@dataclass(frozen=True)
class Segment:
    group: str
    action: int
    mass: float
    mean: float


@dataclass
class Equilibrium:
    profile: CutoffProfile
    residual: SigmaValue
    stability: Stability
    jacobian_det: float
    segments: list
    total_effort: float
    direct_residual: float
    form: str = "canonical"

    @property
    def ordering(self) -> Ordering:
        return self.profile.ordering

    @property
    def stable_interior(self) -> bool:
        return self.stability.stable and self.profile.is_interior


@dataclass
class BoundaryOutcome:
    ordering: Ordering
    profile: Optional[CutoffProfile]
    note: str


@dataclass
class SolveResult:
    equilibria: list
    boundary: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def stable_interior(self):
        return [e for e in self.equilibria if e.stable_interior]

    @property
    def has_interior(self) -> bool:
        return bool(self.equilibria)


def segments(dist, profile: CutoffProfile):
    out = []
    for (g, a), (lo, hi) in profile.segment_bounds().items():
        mass = float(dist.cdf(hi) - dist.cdf(lo))
        mean = float(truncated_mean(dist, lo, hi, boundary=True))
        out.append(Segment(g, a, mass, mean))
    return out


def total_effort(dist, profile: CutoffProfile) -> float:
    F = dist.cdf
    return float(F(profile.theta_hat) - F(profile.theta_l) + 1.0 - F(profile.theta_h))


# --------------------------------------------------------------------------
# stability
# --------------------------------------------------------------------------

def stability_quantities(J):
    """Own-slope of each action condition and the group condition's slope
    along the action-cutoff curves, sign-flipped so that all three are
    negative at a stable equilibrium."""
    qh, ql = J[0, 0], J[1, 1]
    if qh == 0.0 or ql == 0.0:
        return qh, ql, float("nan")
    dh = -J[0, 2] / qh
    dl = -J[1, 2] / ql
    total = J[2, 2] + J[2, 0] * dh + J[2, 1] * dl
    return float(qh), float(ql), float(-total)


def check_stability(spec: ModelSpec, profile: CutoffProfile, form="canonical",
                    residual_tol: float = 1e-6) -> Stability:
    """Stability verdict at a solved profile.

    Requires d_g' - mu_I phi_g' < 0 in both groups and the group condition
    to cross zero from below along the action-cutoff curves (equivalently
    ctilde' - Vtilde' - mu_O phi' < 0).  Quantities within 1e-7 of zero give
    Indeterminate.
    """
    res = sigma(spec, profile, form)
    if res.max_abs > residual_tol:
        raise ResidualPrecondition(f"profile does not solve the system: max|sigma|={res.max_abs:.3g}")
    q = stability_quantities(sigma_jacobian(spec, profile, form))
    if any(not np.isfinite(v) or abs(v) < INDETERMINATE_BAND for v in q):
        verdict = "Indeterminate"
    elif all(v < 0 for v in q):
        verdict = "Stable"
    else:
        verdict = "Unstable"
    return Stability(verdict, *q)


def make_equilibrium(spec: ModelSpec, profile: CutoffProfile, form="canonical") -> Equilibrium:
    res = sigma(spec, profile, form)
    J = sigma_jacobian(spec, profile, form)
    return Equilibrium(
        profile=profile,
        residual=res,
        stability=check_stability(spec, profile, form, residual_tol=np.inf),
        jacobian_det=float(np.linalg.det(J)),
        segments=segments(spec.dist, profile),
        total_effort=total_effort(spec.dist, profile),
        direct_residual=float(direct_residual(spec, profile)),
        form=form,
    )


# --------------------------------------------------------------------------
# Newton polish
# --------------------------------------------------------------------------

def newton_polish(spec: ModelSpec, profile: CutoffProfile, options: SolverOptions = SolverOptions()
                  ) -> CutoffProfile:
    """Damped Newton on the full system, staying inside the interior region."""
    form = options.form
    x = profile.as_array()
    p = CutoffProfile.from_array(x)
    f = sigma(spec, p, form).as_array()
    trace = [(0, float(np.max(np.abs(f))), p)]
    for it in range(1, options.max_newton + 1):
        err = float(np.max(np.abs(f)))
        if err <= options.newton_tol:
            return p
        J = sigma_jacobian(spec, p, form)
        try:
            dx = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError as exc:
            raise NonConvergence(f"singular Jacobian at {p}", trace) from exc
        t = 1.0
        while t > 1e-12:
            cand = CutoffProfile.from_array(x + t * dx)
            if cand.is_interior:
                try:
                    fc = sigma(spec, cand, form).as_array()
                except DegenerateInterval:
                    fc = None
                if fc is not None and np.max(np.abs(fc)) < (1.0 - 1e-4 * t) * err:
                    break
            t *= 0.5
        else:
            raise NonConvergence(f"line search stalled at {p} (max|sigma|={err:.3g})", trace)
        x = x + t * dx
        p, f = cand, fc
        trace.append((it, float(np.max(np.abs(f))), p))
    if float(np.max(np.abs(f))) <= options.newton_tol:
        return p
    raise NonConvergence(f"no convergence in {options.max_newton} Newton steps", trace)


def solve_from(spec: ModelSpec, start: CutoffProfile, options: SolverOptions = SolverOptions()) -> Equilibrium:
    """Continuation solve: polish from a nearby profile and package the result."""
    p = newton_polish(spec, start, options)
    return make_equilibrium(spec, p, options.form)


# --------------------------------------------------------------------------
# full solve
# --------------------------------------------------------------------------

def _outer_grid(n):
    return np.concatenate([[1e-6], (np.arange(n) + 0.5) / n, [1.0 - 1e-6]])


def reduced_profile(spec, theta_hat, options: SolverOptions = SolverOptions()):
    """Profile obtained by solving both action conditions at theta_hat."""
    th, ch = _action_cutoffs_vec(spec, "h", theta_hat, options.inner_scan_points)
    tl, cl = _action_cutoffs_vec(spec, "l", theta_hat, options.inner_scan_points)
    if ch[0] == 3 or cl[0] == 3:
        return None
    return CutoffProfile(float(tl[0]), float(theta_hat), float(th[0]))


def reduced_residual(spec, theta_hat, options: SolverOptions = SolverOptions()) -> float:
    """Group residual along the action-cutoff curves (NaN if an action
    condition has several roots)."""
    p = reduced_profile(spec, theta_hat, options)
    if p is None:
        return float("nan")
    return float(sigma_group(spec, p, options.form, boundary=True))


def solve_equilibrium(spec: ModelSpec, options: SolverOptions = SolverOptions()) -> SolveResult:
    """All interior equilibria found by the nested scan, plus boundary outcomes."""
    grid = _outer_grid(options.scan_points)
    th, ch = _action_cutoffs_vec(spec, "h", grid, options.inner_scan_points)
    tl, cl = _action_cutoffs_vec(spec, "l", grid, options.inner_scan_points)
    R = np.full(grid.shape, np.nan)
    for i, s in enumerate(grid):
        if ch[i] != 3 and cl[i] != 3:
            R[i] = sigma_group(spec, CutoffProfile(tl[i], s, th[i]), options.form, boundary=True)
    result = SolveResult([])
    if np.any(np.isnan(R)):
        result.notes.append(f"several action cutoffs at {int(np.isnan(R).sum())} scan points")

    finite = np.isfinite(R)
    if finite.any() and np.all(R[finite] > 0):
        result.boundary.append(BoundaryOutcome(Ordering.ALL_IN_ONE, CutoffProfile(0.0, 0.0, 0.0),
                                               "group residual positive everywhere: every type joins h"))
    elif finite.any() and np.all(R[finite] < 0):
        result.boundary.append(BoundaryOutcome(Ordering.ALL_IN_ONE, CutoffProfile(1.0, 1.0, 1.0),
                                               "group residual negative everywhere: every type joins l"))

    roots = []
    for i in range(grid.size - 1):
        a, b = R[i], R[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)):
            continue
        if a == 0.0:
            roots.append(grid[i])
        elif a * b < 0:
            roots.append(brentq(lambda s: reduced_residual(spec, s, options), grid[i], grid[i + 1],
                                xtol=options.bisect_xtol))
    if R[-1] == 0.0:
        roots.append(grid[-1])

    for s in roots:
        p = reduced_profile(spec, s, options)
        if p is None:
            result.notes.append(f"root near theta_hat={s:.6g} skipped: several action cutoffs")
            continue
        if not p.is_interior:
            resid = sigma_group(spec, p, options.form, boundary=True)
            note = f"action pooling at theta_hat={s:.10g}"
            if abs(resid) > 1e-6:
                note += f" (group residual jumps across 0, |r|={abs(resid):.3g})"
            result.boundary.append(BoundaryOutcome(p.ordering, p, note))
            continue
        p = newton_polish(spec, p, options)
        eq = make_equilibrium(spec, p, options.form)
        if eq.residual.max_abs > options.tol:
            raise NonConvergence(f"residual {eq.residual.max_abs:.3g} above tolerance at {p}")
        if all(p.distance(e.profile) > 1e-6 for e in result.equilibria):
            result.equilibria.append(eq)
    return result


# --------------------------------------------------------------------------
# multistart
# --------------------------------------------------------------------------

@dataclass
class MultistartReport:
    n_starts: int
    equilibria: list
    converged: int
    failures: int

    @property
    def count(self) -> int:
        return len(self.equilibria)

    @property
    def classes(self):
        return [e.stability.verdict for e in self.equilibria]


def multistart_scan(spec: ModelSpec, n_starts: int = 32, options: SolverOptions = SolverOptions()
                    ) -> MultistartReport:
    """Newton from a stratified grid of group cutoffs; count distinct interior solutions."""
    if n_starts < 8:
        raise ValueError("n_starts must be at least 8")
    found, ok, bad = [], 0, 0
    for k in range(n_starts):
        s = (k + 0.5) / n_starts
        p = reduced_profile(spec, s, options)
        if p is None:
            bad += 1
            continue
        th = p.theta_h if s < p.theta_h < 1.0 else 0.5 * (s + 1.0)
        tl = p.theta_l if 0.0 < p.theta_l < s else 0.5 * s
        try:
            q = newton_polish(spec, CutoffProfile(tl, s, th), options)
        except NonConvergence:
            bad += 1
            continue
        ok += 1
        if all(q.distance(e.profile) > 1e-6 for e in found):
            found.append(make_equilibrium(spec, q, options.form))
    found.sort(key=lambda e: e.profile.theta_hat)
    return MultistartReport(n_starts, found, ok, bad)
