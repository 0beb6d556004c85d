from dataclasses import replace

import numpy as np
import pytest

from groupsignal import simulate
from groupsignal.model import LinearGapGroupCost, scenario_s1
from groupsignal.payoffs import CutoffProfile
from groupsignal.simulate import SimulateOptions
from groupsignal.solver import SolverOptions, solve_equilibrium

DIRECT = SolverOptions(form="direct")


@pytest.fixture(scope="module")
def direct_case():
    spec = scenario_s1(group_cost=LinearGapGroupCost(1.0, 0.0))
    return spec, solve_equilibrium(spec, DIRECT).stable_interior[0]


def rest_point(spec, eq, n):
    opts = SimulateOptions(n=n)
    pop = simulate.initial_population(spec, opts, eq.profile)
    return simulate.run_dynamics(spec, pop, opts.max_iters, opts.damping)


def test_direct_form_rest_point_matches_solver(direct_case):
    spec, eq = direct_case
    rest = rest_point(spec, eq, 10001)
    assert rest.converged and rest.cutoff_shaped
    assert rest.cutoffs.distance(eq.profile) <= 2 / 10001


def test_deviation_shrinks_with_grid(direct_case):
    spec, eq = direct_case
    coarse = rest_point(spec, eq, 1000).cutoffs.distance(eq.profile)
    fine = rest_point(spec, eq, 10001).cutoffs.distance(eq.profile)
    assert fine < coarse <= 2 / 1000


def test_s1_canonical_profile_is_not_a_rest_point(s1, s1_eq):
    """Every type below the high cutoff gains from joining h under the
    stage payoffs at the S1 profile, so the dynamics leave it."""
    pop = simulate.assign_from_profile(simulate.grid_population(s1, 10001), s1_eq.profile)
    in_h, _ = simulate.best_responses(s1, pop)
    assert in_h.mean() > 0.99
    rest = simulate.run_dynamics(s1, pop, max_iters=200)
    assert not rest.converged


def test_assignment_reads_back_cutoffs(s1):
    pop = simulate.grid_population(s1, 2000)
    p = CutoffProfile(0.3, 0.6, 0.85)
    back = simulate.implied_cutoffs(simulate.assign_from_profile(pop, p))
    assert back.distance(p) <= 1 / 2000


def test_non_monotone_assignment_detected(s1):
    pop = simulate.assign_from_profile(simulate.grid_population(s1, 2000), CutoffProfile(0.3, 0.6, 0.85))
    pop.in_h[100] = True
    assert simulate.implied_cutoffs(pop) is None


def test_empty_segment_beliefs(s1):
    pop = simulate.grid_population(s1, 1000)  # everyone in l, shirking
    seg, grp, mean = simulate.beliefs(pop)
    assert seg[("h", 1)] == 1.0 and seg[("l", 1)] == 1.0  # group boundary sits at 1
    assert grp["l"] == pytest.approx(0.5) and mean == pytest.approx(0.5)
    seg2, _, _ = simulate.beliefs(pop, empty=((("h", 1), 0.9),))
    assert seg2[("h", 1)] == 0.9


def test_guards(s1):
    pop = simulate.grid_population(s1, 500)
    with pytest.raises(ValueError):
        simulate.run_dynamics(s1, pop)
    with pytest.raises(ValueError):
        simulate.best_response_step(s1, simulate.grid_population(s1, 1000), damping=0.0)
    with pytest.raises(ValueError):
        simulate.initial_population(s1, SimulateOptions(start="equilibrium"))


def test_weights_follow_density():
    from groupsignal import density

    spec = scenario_s1(dist=density.linear_decreasing(2.0))
    pop = simulate.grid_population(spec, 1000)
    assert pop.weight.sum() == pytest.approx(1.0)
    assert np.all(np.diff(pop.weight) < 0)
