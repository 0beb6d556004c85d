from fractions import Fraction as Fr

import numpy as np
import pytest

from groupsignal import statics
from groupsignal.model import TabulatedGroupCost, scenario_s1
from groupsignal.solver import SolverOptions, solve_equilibrium


def s1_cutoffs_exact(alpha=Fr(0), beta=Fr(0), gamma=Fr(0)):
    """Uniform/linear S1 with shifters, solved in rationals:
    d_h(th) + alpha = mu_I (1 - s)/2, d_l(tl) + beta = mu_I s / 2, and the
    group condition mu_I (th - tl)/2 - (mu_I - mu_O)/2 - (1 + kappa)(1 - s) - gamma = 0."""
    mi, mo, dh, dl, k = Fr(2, 5), Fr(1, 2), Fr(1), Fr(1, 2), Fr(1, 10)
    # th = A_h + B_h s, tl = A_l + B_l s
    A_h, B_h = 1 - (mi / 2 - alpha) / dh, mi / (2 * dh)
    A_l, B_l = 1 + beta / dl, -mi / (2 * dl)
    a = mi / 2 * (B_h - B_l) + dh + k
    b = mi / 2 * (A_h - A_l) - (mi - mo) / 2 - dh - k - gamma
    s = -b / a
    return s, A_h + B_h * s, A_l + B_l * s


def exact_derivatives():
    base = np.array(s1_cutoffs_exact(), dtype=object)
    h = Fr(1, 10**6)
    cols = []
    for j in range(3):
        shift = [Fr(0)] * 3
        shift[j] = h
        cols.append((np.array(s1_cutoffs_exact(*shift), dtype=object) - base) / h)
    return np.array(cols, dtype=float).T  # affine system: exact


def test_ift_matches_exact_rational_derivatives(s1, s1_eq):
    D = statics.ift_derivatives(s1, s1_eq)
    assert np.allclose(D, exact_derivatives(), atol=1e-12)
    assert D[0, 0] == pytest.approx(-10 / 61)


def test_fd_agrees_with_ift(s1, s1_eq):
    D = statics.ift_derivatives(s1, s1_eq)
    F = statics.fd_derivatives(s1, s1_eq)
    assert statics.agree(D, F).all()


def test_sign_table_and_verdicts(s1, s1_eq):
    D = statics.ift_derivatives(s1, s1_eq)
    assert statics.sign_table(D) == [["-", "+", "+"], ["+", "+", "+"], ["+", "+", "-"]]
    assert statics.proposition_verdicts(D) == {"alpha": "PASS", "beta": "PASS", "gamma": "PASS"}


def test_total_effort_response(s1, s1_eq):
    dE = statics.total_effort_response(s1, s1_eq)
    assert dE == pytest.approx([-73 / 61, -98 / 61, 60 / 61], abs=1e-12)


def test_report_flags_branch_jump_near_pooling(s1):
    spec = s1.with_policy(alpha=0.021)
    eq = solve_equilibrium(spec).stable_interior[0]
    rep = statics.statics_report(spec, eq, step=5e-3)
    assert "alpha" in rep.fd_flags
    assert np.isnan(rep.derivs_fd[:, 0]).all() and not rep.agreement[:, 0].any()
    assert rep.agreement[:, 1:].all()


def test_unstable_equilibrium_rejected():
    grid = np.linspace(0, 1, 201)
    ch = 0.1 * (1 - grid) + 0.2 * np.exp(-((grid - 0.95) / 0.02) ** 2)
    spec = scenario_s1(group_cost=TabulatedGroupCost(tuple(grid), tuple(ch), tuple(0 * grid)))
    unstable = solve_equilibrium(spec).equilibria[1]
    assert unstable.stability.verdict == "Unstable"
    with pytest.raises(statics.NotStable):
        statics.ift_derivatives(spec, unstable)


def test_bad_step(s1, s1_eq):
    with pytest.raises(ValueError):
        statics.fd_derivatives(s1, s1_eq, step=0.0)


def test_direct_form_derivatives_match_fd():
    from groupsignal.model import LinearGapGroupCost

    spec = scenario_s1(group_cost=LinearGapGroupCost(1.0, 0.0))
    opts = SolverOptions(form="direct")
    eq = solve_equilibrium(spec, opts).stable_interior[0]
    assert statics.agree(statics.ift_derivatives(spec, eq), statics.fd_derivatives(spec, eq, options=opts)).all()
