"""Acceptance criteria 1-9, each a function returning a CriterionResult.

Run with ``groupsignal check`` or ``python3 -m groupsignal.acceptance``.
Every criterion is evaluated at its stated tolerance; a criterion that the
model as specified cannot meet is reported as FAIL with the measured value.
"""
from __future__ import annotations

import filecmp
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import density
from .config import load_preset, preset_names
from .corpus import build as build_corpus
from .model import scenario_s1
from .payoffs import CutoffProfile, phi_h, phi_l, sigma_jacobian
from .simulate import SimulateOptions, initial_population, run_dynamics
from .solver import SolverOptions, solve_equilibrium, solve_from
from .statics import agree, fd_derivatives, ift_derivatives, proposition_verdicts, total_effort_response


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.number}. {self.name}: {self.detail} ({self.seconds:.2f}s)"


def uniform_linear_closed_form(delta_h, delta_l, kappa, mu_i, mu_o):
    """Exact cutoffs for uniform types, linear cost gaps, no benefits or policy.

    With d(1,g,t) = delta_g (1 - t), c(h,t) - c(l,t) = kappa (1 - t):
      theta_h = 1 - mu_i (1 - s) / (2 delta_h)
      theta_l = 1 - mu_i s / (2 delta_l)
    and the group condition is affine in s:
      mu_i (theta_h - theta_l) / 2 - (mu_i - mu_o) / 2 - (delta_h + kappa)(1 - s) = 0.
    """
    dh, dl, k, mi, mo = (Fraction(x).limit_denominator(10**9) for x in (delta_h, delta_l, kappa, mu_i, mu_o))
    a = mi * mi / 4 * (1 / dl + 1 / dh) + dh + k
    b = -mi * mi / (4 * dh) - (mi - mo) / 2 - dh - k
    s = -b / a
    th = 1 - mi * (1 - s) / (2 * dh)
    tl = 1 - mi * s / (2 * dl)
    return float(tl), float(s), float(th)


def _kronecker(n, dim=3):
    """Deterministic low-discrepancy points in [0,1)^dim."""
    g = 1.0
    for _ in range(30):
        g = (1 + g) ** (1.0 / (dim + 1))
    alpha = np.array([(1 / g) ** (j + 1) for j in range(dim)])
    return np.mod(0.5 + np.outer(np.arange(1, n + 1), alpha), 1.0)


def interior_profiles(n=100):
    u = _kronecker(n)
    s = 0.1 + 0.8 * u[:, 0]
    th = s + (1 - s) * (0.05 + 0.9 * u[:, 1])
    tl = s * (0.05 + 0.9 * u[:, 2])
    return [CutoffProfile(float(a), float(b), float(c)) for a, b, c in zip(tl, s, th)]


# --------------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    res = solve_equilibrium(scenario_s1())
    dt = time.perf_counter() - t0
    oracle = uniform_linear_closed_form(1.0, 0.5, 0.1, 0.4, 0.5)
    if len(res.equilibria) != 1:
        return False, f"expected one interior equilibrium, found {len(res.equilibria)}", dt
    p = res.equilibria[0].profile
    err = max(abs(x - y) for x, y in zip((p.theta_l, p.theta_hat, p.theta_h), oracle))
    ok = err <= 1e-8 and dt < 1.0
    return ok, f"max|solver - closed form| = {err:.2e} (tol 1e-8), solve {dt:.3f}s (limit 1s)", dt


def criterion_2():
    t0 = time.perf_counter()
    members, skipped = build_corpus()
    bad = []
    for m in members:
        for eq in m.stable:
            v = proposition_verdicts(ift_derivatives(m.spec, eq))
            bad += [f"{m.name}:{k}" for k, x in v.items() if x != "PASS"]
    dt = time.perf_counter() - t0
    ok = len(members) >= 20 and not bad and dt < 30.0
    detail = f"{len(members)} specs, {9 * sum(len(m.stable) for m in members)} signs checked, {len(bad)} exceptions"
    if bad:
        detail += f" ({', '.join(bad[:5])})"
    return ok, detail + f", {dt:.1f}s (limit 30s)", dt


def criterion_3():
    members, _ = build_corpus()
    worst, n_bad = 0.0, 0
    for m in members:
        D = ift_derivatives(m.spec, m.equilibrium)
        F = fd_derivatives(m.spec, m.equilibrium, 1e-4)
        n_bad += int((~agree(D, F)).sum())
        worst = max(worst, float(np.max(np.abs(D - F) / np.maximum(np.abs(F), 1e-3))))
    ok = n_bad == 0 and len(members) >= 20
    return ok, f"{n_bad} of {9 * len(members)} entries outside rtol 1e-3/atol 1e-6, worst rel err {worst:.2e}", 0.0


# rows sigma^(h,l,s), columns (theta_h, theta_l, theta_hat)
JACOBIAN_SIGNS = np.array([[-1, 0, 1], [0, -1, -1], [1, -1, 1]])


def criterion_4():
    members, _ = build_corpus()
    bad, n = [], 0
    for m in members:
        for eq in m.stable:
            n += 1
            J = sigma_jacobian(m.spec, eq.profile, eq.form)
            if not np.array_equal(np.sign(J).astype(int), JACOBIAN_SIGNS) or not np.linalg.det(J) > 0:
                bad.append(m.name)
    return not bad, f"{n - len(bad)}/{n} stable equilibria match the sign pattern with det > 0" + (
        f"; mismatches: {', '.join(bad[:5])}" if bad else ""), 0.0


def criterion_5():
    cuts = np.linspace(0.02, 0.98, 50)
    z_u = density.jewitt_gap(density.Uniform(), cuts)
    z_dec = density.jewitt_gap(density.linear_decreasing(2.0), cuts)
    z_inc = density.jewitt_gap(density.linear_increasing(2.0), cuts)
    l1 = (np.max(np.abs(z_u - 0.5)) <= 1e-10 and np.all(np.diff(z_dec) >= 0) and np.all(np.diff(z_inc) <= 0))

    h = 1e-6
    dists = [density.Uniform(), density.linear_decreasing(1.0), density.linear_increasing(1.0),
             density.piecewise_linear([[0.0, 0.6], [0.3, 1.6], [0.7, 0.9], [1.0, 0.4]])]
    profiles = interior_profiles(100)
    l2_bad = l3_bad = printed_ii = 0
    for d in dists:
        for p in profiles:
            up = CutoffProfile(p.theta_l, p.theta_hat + h, p.theta_h)
            dn = CutoffProfile(p.theta_l, p.theta_hat - h, p.theta_h)
            if not (phi_h(d, up) - phi_h(d, dn) < 0 and phi_l(d, up) - phi_l(d, dn) > 0):
                l2_bad += 1
            s = p.theta_hat
            di = (density.truncated_mean(d, s, p.theta_h + h) - density.truncated_mean(d, s, p.theta_h - h)) / (2 * h)
            dii = (density.truncated_mean(d, p.theta_l + h, s) - density.truncated_mean(d, p.theta_l - h, s)) / (2 * h)
            # (ii) is checked with the sign its own derivation yields and the
            # Jacobian sign table relies on; the opposite sign is counted.
            if not (di > 0 and dii > 0):
                l3_bad += 1
            printed_ii += int(dii < 0)
    total = len(dists) * len(profiles)
    ok = bool(l1) and l2_bad == 0 and l3_bad == 0
    detail = (f"cut-gap monotonicity {'ok' if l1 else 'violated'} (uniform dev {np.max(np.abs(z_u - 0.5)):.1e}); "
              f"phi slopes {total - l2_bad}/{total}; truncated-mean slopes {total - l3_bad}/{total} "
              f"(lower-bound derivative negative on {printed_ii}/{total})")
    return ok, detail, 0.0


def criterion_6():
    t0 = time.perf_counter()
    spec = scenario_s1()
    eq = solve_equilibrium(spec).stable_interior[0]
    opts = SimulateOptions(n=10001)
    rest = run_dynamics(spec, initial_population(spec, opts, eq.profile), opts.max_iters, opts.damping)
    dt = time.perf_counter() - t0
    if rest.cutoffs is None:
        first = rest.trace[0][1] if rest.trace else 0
        return False, (f"S1 rest point not cutoff-shaped after {rest.iterations} iterations "
                       f"(converged={rest.converged}; {first} of {opts.n} agents prefer to move at step 1); "
                       f"{dt:.1f}s"), dt
    dev = rest.cutoffs.distance(eq.profile)
    ok = rest.converged and dev <= 2.0 / opts.n and dt < 10.0
    return ok, f"converged={rest.converged}, max deviation {dev:.2e} (tol {2 / opts.n:.1e}), {dt:.1f}s", dt


def criterion_7():
    spec = scenario_s1()
    eq = solve_equilibrium(spec).stable_interior[0]
    dE = total_effort_response(spec, eq)[0]
    step = 1e-3
    moved = solve_from(spec.with_policy(alpha=-step), eq.profile)
    p, q = eq.profile, moved.profile
    sweep_slope = (eq.total_effort - moved.total_effort) / step
    directions = q.theta_hat > p.theta_hat and q.theta_h < p.theta_h and q.theta_l < p.theta_l
    # [tl, s] U [th, 1] strictly inside [tl', s'] U [th', 1]
    contains = q.theta_l < p.theta_l and q.theta_hat > p.theta_hat and q.theta_h < p.theta_h and q.theta_h > q.theta_hat
    ok = dE < 0 and sweep_slope < 0 and directions and contains and moved.stable_interior
    return ok, (f"dE/dalpha IFT {dE:+.6f}, two-point {sweep_slope:+.6f}; at alpha-{step:g}: "
                f"theta_hat {q.theta_hat - p.theta_hat:+.2e}, theta_h {q.theta_h - p.theta_h:+.2e}, "
                f"theta_l {q.theta_l - p.theta_l:+.2e}; effort set strictly grows: {contains}"), 0.0


def criterion_8():
    eq = solve_equilibrium(scenario_s1()).stable_interior[0]
    r = eq.direct_residual
    members, _ = build_corpus()
    worst = max(abs(m.equilibrium.direct_residual) for m in members)
    return abs(r) <= 1e-8, (f"S1 direct indifference residual {r:+.6e} (tol 1e-8); "
                            f"corpus max |residual| {worst:.3e} (logged only)"), 0.0


def _run(args, cwd):
    return subprocess.run([sys.executable, "-m", "groupsignal", *args], cwd=cwd,
                          capture_output=True, text=True)


def criterion_9():
    t0 = time.perf_counter()
    mismatched = []
    with tempfile.TemporaryDirectory() as tmp:
        for run in ("a", "b"):
            d = Path(tmp) / run
            d.mkdir()
            for name in preset_names():
                _run(["solve", "--preset", name, "--json", "--csv", "--out", str(d / f"{name}")], d)
                _run(["sweep", "--preset", name, "--param", "alpha", "--from", "0", "--to", "0.01",
                      "--steps", "3", "--out", str(d / f"{name}.sweep.csv")], d)
        a, b = Path(tmp) / "a", Path(tmp) / "b"
        files = sorted(p.name for p in a.iterdir())
        _, mismatch, errors = filecmp.cmpfiles(a, b, files, shallow=False)
        mismatched = mismatch + errors
        expected = 3 * len(preset_names())
    dt = time.perf_counter() - t0
    ok = not mismatched and len(files) == expected
    return ok, f"{len(files)} files over {len(preset_names())} presets, {len(mismatched)} differ", dt


CRITERIA = (
    (1, "closed-form oracle", criterion_1),
    (2, "proposition signs on corpus", criterion_2),
    (3, "IFT vs finite differences", criterion_3),
    (4, "Jacobian sign pattern and determinant", criterion_4),
    (5, "truncated-mean lemmas", criterion_5),
    (6, "simulator consistency", criterion_6),
    (7, "total-effort spillover", criterion_7),
    (8, "direct indifference identity", criterion_8),
    (9, "determinism", criterion_9),
)


def run_criterion(number: int) -> CriterionResult:
    num, name, fn = CRITERIA[number - 1]
    t0 = time.perf_counter()
    ok, detail, _ = fn()
    return CriterionResult(num, name, bool(ok), detail, time.perf_counter() - t0)


def run_all(verbose: bool = False):
    out = []
    for num, _, _ in CRITERIA:
        r = run_criterion(num)
        if verbose:
            print(r.line(), flush=True)
        out.append(r)
    return out


if __name__ == "__main__":
    results = run_all(verbose=True)
    sys.exit(0 if all(r.passed for r in results) else 1)
