from dataclasses import replace

import numpy as np
import pytest

from groupsignal import model
from groupsignal.model import (
    Benefits,
    LinearGapActionCost,
    LinearGapGroupCost,
    TabulatedActionCost,
    TabulatedGroupCost,
)


def test_s1_is_valid(s1):
    rep = model.validate(s1)
    assert rep.ok and not rep.lines()


def test_reversed_action_costs_name_the_ordering(s1):
    rep = model.validate(replace(s1, action_cost=LinearGapActionCost(0.4, 0.5)))
    assert not rep.ok
    assert any("ordering" in line for line in rep.lines())


def test_nonpositive_kappa_flagged(s1):
    rep = model.validate(replace(s1, group_cost=LinearGapGroupCost(0.0, 0.0)))
    labels = {v.assumption for v in rep.violations}
    assert "group cost slope kappa > 0" in labels
    assert "group single-crossing" in labels


def test_nonpositive_sensitivity_flagged(s1):
    rep = model.validate(replace(s1, mu_outside=0.0))
    assert [v.assumption for v in rep.violations] == ["mu_outside > 0"]


def test_tabulated_cost_gap_rising_is_located(s1):
    grid = np.linspace(0, 1, 11)
    d1h = 1 - grid
    d1h[7] = d1h[6] + 0.05
    ac = TabulatedActionCost(tuple(grid), tuple(d1h), tuple(0 * grid), tuple(0.5 * (1 - grid)), tuple(0 * grid))
    rep = model.validate(replace(s1, action_cost=ac))
    v = [x for x in rep.violations if x.assumption == "action single-crossing, group h"]
    assert v and 0.6 <= v[0].theta <= 0.7


def test_tabulated_matches_linear_family():
    grid = np.linspace(0, 1, 21)
    lin = LinearGapActionCost(1.0, 0.5)
    tab = TabulatedActionCost(tuple(grid), tuple(1 - grid), tuple(0 * grid), tuple(0.5 * (1 - grid)),
                              tuple(0 * grid))
    xs = np.linspace(0, 1, 37)
    for g in ("h", "l"):
        assert np.allclose(tab.gap(g, xs), lin.gap(g, xs), atol=1e-12)
        assert np.allclose(tab.gap_slope(g, xs), lin.gap_slope(g, xs), atol=1e-9)
    gtab = TabulatedGroupCost(tuple(grid), tuple(0.1 * (1 - grid)), tuple(0 * grid))
    assert np.allclose(gtab.gap(xs), LinearGapGroupCost(0.1, 0.0).gap(xs), atol=1e-12)


def test_benefit_gaps():
    b = Benefits(v1h=0.3, v0h=0.1, v1l=0.2, v0l=0.05)
    assert b.gap("h") == pytest.approx(0.2)
    assert b.gap("l") == pytest.approx(0.15)
    assert b.v(1, "l") == 0.2


def test_policy_shifters_enter_gaps(s1):
    s = s1.with_policy(alpha=0.1, beta=0.2, gamma=0.3)
    assert model.action_cost_gap(s, "h", 0.5) == pytest.approx(0.5 + 0.1)
    assert model.action_cost_gap(s, "l", 0.5) == pytest.approx(0.25 + 0.2)
    assert model.group_cost_gap(s, 0.5) == pytest.approx(0.05 + 0.3)


def test_scaled_multiplies_primitives(s1):
    s = s1.with_policy(alpha=0.01).scaled(3.0)
    assert s.mu_inside == pytest.approx(1.2)
    assert s.policy.alpha == pytest.approx(0.03)
    assert model.action_cost_gap(s, "h", 0.2) == pytest.approx(3 * (0.8 + 0.01))


def test_group_specific_sensitivity(s1):
    s = replace(s1, mu_inside_by_group=(("h", 0.3), ("l", 0.5)))
    assert (s.mu_i("h"), s.mu_i("l")) == (0.3, 0.5)
    assert s1.mu_i("h") == s1.mu_i("l") == 0.4
