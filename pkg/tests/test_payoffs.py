from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from groupsignal import density, payoffs
from groupsignal.model import Benefits, scenario_s1
from groupsignal.payoffs import CutoffProfile, Ordering

S1_PROFILE = CutoffProfile(1 - 0.4 * 109 / 122, 109 / 122, 1 - 0.2 * (1 - 109 / 122))
DISTS = [density.Uniform(), density.linear_decreasing(1.5), density.linear_increasing(1.0),
         density.piecewise_linear([[0.0, 1.4], [0.5, 0.5], [1.0, 1.2]])]


@st.composite
def profiles(draw):
    s = draw(st.floats(0.1, 0.9))
    return CutoffProfile(s * draw(st.floats(0.05, 0.95)), s, s + (1 - s) * draw(st.floats(0.05, 0.95)))


@st.composite
def specs(draw):
    spec = scenario_s1(
        dist=draw(st.sampled_from(DISTS)),
        benefits=Benefits(*(draw(st.floats(-0.1, 0.1)) for _ in range(4))),
        mu_inside=draw(st.floats(0.1, 0.8)),
        mu_outside=draw(st.floats(0.1, 0.8)),
    )
    return spec.with_policy(*(draw(st.floats(-0.05, 0.05)) for _ in range(3)))


def test_s1_closed_form_is_a_zero(s1):
    assert payoffs.sigma(s1, S1_PROFILE).max_abs < 1e-14


def test_uniform_phis_are_half_widths():
    d = density.Uniform()
    p = CutoffProfile(0.2, 0.6, 0.9)
    assert payoffs.phi_h(d, p) == pytest.approx((1 - 0.6) / 2)
    assert payoffs.phi_l(d, p) == pytest.approx(0.6 / 2)
    assert payoffs.phi_group(d, 0.6) == pytest.approx(0.5)
    assert payoffs.phi_tilde(d, p) == pytest.approx((0.9 - 0.2) / 2)


@pytest.mark.parametrize("form", payoffs.FORMS)
@given(spec=specs(), p=profiles())
def test_jacobian_matches_fd(form, spec, p):
    J = payoffs.sigma_jacobian(spec, p, form)
    x = p.as_array()
    h = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = h
        fd = (payoffs.sigma(spec, CutoffProfile.from_array(x + e), form).as_array()
              - payoffs.sigma(spec, CutoffProfile.from_array(x - e), form).as_array()) / (2 * h)
        assert np.allclose(J[:, j], fd, rtol=1e-5, atol=1e-7)
    assert J[0, 1] == 0.0 and J[1, 0] == 0.0


@pytest.mark.parametrize("form", payoffs.FORMS)
@given(spec=specs(), p=profiles())
def test_policy_gradient_matches_fd(form, spec, p):
    P = payoffs.policy_gradient(form)
    h = 1e-6
    for j, name in enumerate(("alpha", "beta", "gamma")):
        base = getattr(spec.policy, name)
        up = payoffs.sigma(spec.with_policy(**{name: base + h}), p, form).as_array()
        dn = payoffs.sigma(spec.with_policy(**{name: base - h}), p, form).as_array()
        assert np.allclose((up - dn) / (2 * h), P[:, j], atol=1e-7)


@given(spec=specs(), p=profiles())
def test_phi_slopes_in_group_cutoff(spec, p):
    """phi_h falls and phi_l rises in the group cutoff."""
    _, dh_s = payoffs.dphi_h(spec.dist, p)
    _, dl_s = payoffs.dphi_l(spec.dist, p)
    assert dh_s < 0 < dl_s


@given(spec=specs(), p=profiles())
def test_form_gap_identity(spec, p):
    s = p.theta_hat
    ac, b = spec.action_cost, spec.benefits
    expected = ac.gap("h", s) + ac.gap("l", s) + spec.policy.beta + b.v0h - b.v1l
    assert payoffs.form_gap(spec, p) == pytest.approx(expected, abs=1e-12)


def test_form_gap_at_s1(s1):
    assert payoffs.form_gap(s1, S1_PROFILE) == pytest.approx(1.5 * (1 - 109 / 122), abs=1e-14)
    assert payoffs.direct_residual(s1, S1_PROFILE) == pytest.approx(0.15983606557377, abs=1e-12)


@given(spec=specs(), p=profiles(), k=st.floats(0.1, 10.0))
def test_sigma_scales_with_primitives(spec, p, k):
    a = payoffs.sigma(spec, p).as_array()
    b = payoffs.sigma(spec.scaled(k), p).as_array()
    assert np.allclose(b, k * a, rtol=1e-10, atol=1e-12)


@given(spec=specs(), p=profiles())
def test_stage_values_at_action_cutoff_are_indifferent(spec, p):
    """At a profile, sigma_action measures the gain from shirking for the
    cutoff type, which must equal the stage value difference."""
    for g, cut in (("h", p.theta_h), ("l", p.theta_l)):
        lo = payoffs.stage2_value(spec, p, g, cut * (1 - 1e-12))
        hi = payoffs.stage2_value(spec, p, g, cut)
        assert lo - hi == pytest.approx(payoffs.sigma_action(spec, g, p), abs=1e-9)


def test_ordering_classes():
    assert CutoffProfile(0.2, 0.5, 0.8).ordering is Ordering.INTERIOR
    assert CutoffProfile(0.0, 0.5, 0.8).ordering is Ordering.POOLING_LOW
    assert CutoffProfile(0.2, 0.5, 1.0).ordering is Ordering.POOLING_HIGH
    assert CutoffProfile(0.6, 0.5, 0.8).ordering is Ordering.INVALID


def test_group_specific_sensitivity_reduces_to_common(s1):
    p = CutoffProfile(0.3, 0.6, 0.85)
    same = replace(s1, mu_inside_by_group=(("h", 0.4), ("l", 0.4)))
    assert np.allclose(payoffs.sigma(same, p).as_array(), payoffs.sigma(s1, p).as_array(), atol=1e-15)
    assert np.allclose(payoffs.sigma_jacobian(same, p), payoffs.sigma_jacobian(s1, p), atol=1e-14)
