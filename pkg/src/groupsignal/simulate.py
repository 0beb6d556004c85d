"""Best-response dynamics on a deterministic grid population.

No equilibrium condition is used here: agents compare the stage payoffs of
the four (group, action) choices given beliefs formed from the current
assignment, and the rest point is compared with the analytic solver.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .model import ModelSpec
from .payoffs import CutoffProfile

# empty-segment belief convention: segment -> where its belief sits
DEFAULT_EMPTY = {("h", 0): "theta_hat", ("l", 1): "theta_hat", ("h", 1): 1.0, ("l", 0): 0.0}
SEGMENTS = (("l", 0), ("l", 1), ("h", 0), ("h", 1))


@dataclass(frozen=True)
class SimulateOptions:
    n: int = 10001
    damping: float = 0.5
    max_iters: int = 2000
    start: str = "equilibrium"  # or "all_low", "all_high"
    perturb_cells: int = 2
    empty_beliefs: Optional[tuple] = None  # ((segment-key, value), ...) overrides


@dataclass
class Population:
    theta: np.ndarray
    weight: np.ndarray
    in_h: np.ndarray
    action: np.ndarray

    @property
    def n(self):
        return self.theta.size

    def copy(self):
        return replace(self, in_h=self.in_h.copy(), action=self.action.copy())


def grid_population(spec: ModelSpec, n: int) -> Population:
    theta = (np.arange(n) + 0.5) / n
    w = np.asarray(spec.dist.pdf(theta), dtype=float)
    w = w / w.sum()
    return Population(theta, w, np.zeros(n, dtype=bool), np.zeros(n, dtype=int))


def assign_from_profile(pop: Population, profile: CutoffProfile) -> Population:
    """Cutoff convention: a type at or above a cutoff takes the higher choice."""
    t = pop.theta
    in_h = t >= profile.theta_hat
    action = np.where(in_h, t >= profile.theta_h, t >= profile.theta_l).astype(int)
    return replace(pop, in_h=in_h, action=action)


def _group_boundary(pop: Population) -> float:
    if not pop.in_h.any():
        return 1.0
    if pop.in_h.all():
        return 0.0
    return float(np.argmax(pop.in_h)) / pop.n


def beliefs(pop: Population, empty=None):
    """Segment means, group means and the population mean."""
    rule = dict(DEFAULT_EMPTY)
    if empty:
        rule.update({tuple(k): v for k, v in empty})
    s = _group_boundary(pop)
    seg = {}
    for g, a in SEGMENTS:
        mask = (pop.in_h == (g == "h")) & (pop.action == a)
        w = pop.weight[mask]
        if w.sum() > 0:
            seg[(g, a)] = float(np.dot(w, pop.theta[mask]) / w.sum())
        else:
            v = rule[(g, a)]
            seg[(g, a)] = s if v == "theta_hat" else float(v)
    grp = {}
    for g in ("h", "l"):
        mask = pop.in_h == (g == "h")
        w = pop.weight[mask]
        grp[g] = float(np.dot(w, pop.theta[mask]) / w.sum()) if w.sum() > 0 \
            else 0.5 * (seg[(g, 0)] + seg[(g, 1)])
    return seg, grp, float(np.dot(pop.weight, pop.theta))


def best_responses(spec: ModelSpec, pop: Population, empty=None):
    """Target (in_h, action) for every agent given current beliefs."""
    seg, grp, mean = beliefs(pop, empty)
    t = pop.theta
    ac, gc, b = spec.action_cost, spec.group_cost, spec.benefits
    shift = {"h": spec.policy.alpha, "l": spec.policy.beta}
    V, A = {}, {}
    for g in ("h", "l"):
        mu = spec.mu_i(g)
        u = [b.v(a, g) - np.asarray(ac.level(a, g, t), dtype=float) - shift[g] * a
             + mu * (seg[(g, a)] - grp[g]) for a in (0, 1)]
        A[g] = (u[1] >= u[0]).astype(int)
        V[g] = np.maximum(u[0], u[1])
    Uh = V["h"] - np.asarray(gc.level("h", t), dtype=float) - spec.policy.gamma + spec.mu_outside * (grp["h"] - mean)
    Ul = V["l"] - np.asarray(gc.level("l", t), dtype=float) + spec.mu_outside * (grp["l"] - mean)
    in_h = Uh >= Ul
    return in_h, np.where(in_h, A["h"], A["l"])


def best_response_step(spec: ModelSpec, pop: Population, damping: float = 1.0, empty=None):
    """One simultaneous update.  A ``damping`` share of the agents who want to
    move (lowest type first, at least one) switch.  Returns the new population
    and the number of agents whose best response differs from their choice."""
    if not 0.0 < damping <= 1.0:
        raise ValueError("damping must lie in (0, 1]")
    in_h, action = best_responses(spec, pop, empty)
    flagged = np.flatnonzero((in_h != pop.in_h) | (action != pop.action))
    new = pop.copy()
    if flagged.size:
        k = max(1, math.ceil(damping * flagged.size))
        idx = flagged[:k]
        new.in_h[idx] = in_h[idx]
        new.action[idx] = action[idx]
    return new, int(flagged.size)


def implied_cutoffs(pop: Population) -> Optional[CutoffProfile]:
    """Cutoffs read off the assignment as grid-cell boundaries, or None when
    group or action choice is not monotone in type."""
    n = pop.n
    g = pop.in_h.astype(int)
    if np.any(np.diff(g) < 0):
        return None
    i0 = int(np.argmax(pop.in_h)) if pop.in_h.any() else n
    low, high = pop.action[:i0], pop.action[i0:]
    if np.any(np.diff(low) < 0) or np.any(np.diff(high) < 0):
        return None
    s = i0 / n
    tl = (int(np.argmax(low)) / n) if low.any() else s
    th = ((i0 + int(np.argmax(high))) / n) if high.any() else 1.0
    return CutoffProfile(tl, s, th)


@dataclass
class RestPoint:
    population: Population
    cutoffs: Optional[CutoffProfile]
    converged: bool
    iterations: int
    trace: list = field(default_factory=list)

    @property
    def cutoff_shaped(self) -> bool:
        return self.cutoffs is not None


def initial_population(spec: ModelSpec, options: SimulateOptions, profile: CutoffProfile = None) -> Population:
    pop = grid_population(spec, options.n)
    if options.start == "all_low":
        return pop
    if options.start == "all_high":
        return replace(pop, in_h=np.ones(pop.n, dtype=bool))
    if options.start != "equilibrium":
        raise ValueError(f"unknown start {options.start!r}")
    if profile is None:
        raise ValueError("start='equilibrium' needs a solved profile")
    c = options.perturb_cells / options.n
    moved = CutoffProfile(profile.theta_l + c, profile.theta_hat + c, profile.theta_h - c)
    return assign_from_profile(pop, moved)


def run_dynamics(spec: ModelSpec, pop: Population, max_iters: int = 2000, damping: float = 0.5,
                 empty=None, patience: int = 3) -> RestPoint:
    """Iterate best responses until nobody wants to move for ``patience``
    consecutive steps or ``max_iters`` is reached."""
    if pop.n < 1000:
        raise ValueError("population must have at least 1000 agents")
    trace = []
    quiet = 0
    it = 0
    for it in range(1, max_iters + 1):
        pop, changes = best_response_step(spec, pop, damping, empty)
        c = implied_cutoffs(pop)
        cut = (np.nan,) * 3 if c is None else (c.theta_l, c.theta_hat, c.theta_h)
        trace.append((it, changes, *cut))
        quiet = quiet + 1 if changes == 0 else 0
        if quiet >= patience:
            return RestPoint(pop, implied_cutoffs(pop), True, it, trace)
    return RestPoint(pop, implied_cutoffs(pop), False, it, trace)
