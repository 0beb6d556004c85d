import textwrap

import pytest
from hypothesis import given
from hypothesis import strategies as st

from groupsignal import config, density
from groupsignal.config import ConfigError, Scenario
from groupsignal.model import Benefits, LinearGapActionCost, LinearGapGroupCost, ModelSpec, Policy, validate
from groupsignal.simulate import SimulateOptions
from groupsignal.solver import SolverOptions, solve_equilibrium

MINIMAL = """
name: tiny
distribution: {family: uniform}
costs:
  action: {family: linear_gap, delta_h: 1.0, delta_l: 0.5}
  group: {family: linear_gap, kappa: 0.1}
"""


def test_minimal_defaults_to_s1():
    sc = config.loads(MINIMAL)
    assert sc.spec == ModelSpec()
    assert sc.solver == SolverOptions() and sc.simulate == SimulateOptions()


@pytest.mark.parametrize("name", config.preset_names())
def test_presets_valid_and_solvable(name):
    sc = config.load_preset(name)
    assert validate(sc.spec).ok
    assert solve_equilibrium(sc.spec, sc.solver).stable_interior
    assert config.loads(config.dumps(sc)) == sc


def test_expected_presets_present():
    assert {"s1", "s1_direct", "college", "crime", "residence"} <= set(config.preset_names())


def test_unknown_key_is_located():
    text = MINIMAL + "policy: {alpha: 0.0, delta: 1.0}\n"
    with pytest.raises(ConfigError) as err:
        config.loads(text)
    msg = str(err.value)
    assert "policy.delta" in msg and err.value.line == 7 and err.value.column == 22


def test_unknown_nested_key():
    text = MINIMAL.replace("kappa: 0.1", "kappa: 0.1, slope: 2")
    with pytest.raises(ConfigError, match=r"costs\.group"):
        config.loads(text)


def test_parse_error_has_line_and_column():
    with pytest.raises(ConfigError) as err:
        config.loads("name: x\ndistribution: {family: uniform\n")
    assert err.value.line is not None and err.value.column is not None


def test_type_errors():
    with pytest.raises(ConfigError, match="expected a number"):
        config.loads(MINIMAL.replace("delta_h: 1.0", "delta_h: high"))
    with pytest.raises(ConfigError, match="integer"):
        config.loads(MINIMAL + "simulate: {n: 10.5}\n")
    with pytest.raises(ConfigError, match="form"):
        config.loads(MINIMAL + "solver: {form: sideways}\n")
    with pytest.raises(ConfigError, match="distribution"):
        config.loads("costs: {}\n")


def test_unknown_preset():
    with pytest.raises(ConfigError, match="unknown preset"):
        config.load_preset("nope")


def test_tabulated_round_trip():
    text = textwrap.dedent("""
        name: tab
        distribution: {family: tabulated, values: [1.5, 1.0, 0.5]}
        costs:
          action: {family: tabulated, grid: [0, 0.5, 1], d1h: [1, 0.5, 0], d0h: [0, 0, 0],
                   d1l: [0.5, 0.25, 0], d0l: [0, 0, 0]}
          group: {family: tabulated, grid: [0, 1], ch: [0.1, 0], cl: [0, 0]}
        sensitivities: {mu_inside: 0.4, mu_outside: 0.5, mu_inside_h: 0.3, mu_inside_l: 0.5}
        simulate: {empty_beliefs: {h1: 0.95, l1: theta_hat}}
    """)
    sc = config.loads(text)
    assert config.loads(config.dumps(sc)) == sc
    assert sc.spec.mu_i("h") == 0.3


finite = st.floats(-0.05, 0.05)


@st.composite
def scenarios(draw):
    dist = draw(st.sampled_from([
        density.Uniform(), density.linear_decreasing(draw(st.floats(0.0, 2.0))),
        density.linear_increasing(draw(st.floats(0.0, 2.0))),
        density.piecewise_linear([[0.0, draw(st.floats(0.1, 2.0))], [draw(st.floats(0.1, 0.9)), 1.0],
                                  [1.0, draw(st.floats(0.1, 2.0))]]),
    ]))
    spec = ModelSpec(
        dist=dist,
        action_cost=LinearGapActionCost(draw(st.floats(0.5, 2.0)), draw(st.floats(0.1, 0.5))),
        group_cost=LinearGapGroupCost(draw(st.floats(0.01, 1.0)), draw(st.floats(0.0, 0.5))),
        benefits=Benefits(*(draw(finite) for _ in range(4))),
        mu_inside=draw(st.floats(0.05, 1.0)), mu_outside=draw(st.floats(0.05, 1.0)),
        policy=Policy(*(draw(finite) for _ in range(3))),
    )
    solver = SolverOptions(tol=draw(st.floats(1e-12, 1e-6)), form=draw(st.sampled_from(["canonical", "direct"])))
    sim = SimulateOptions(n=draw(st.integers(1000, 20000)), damping=draw(st.floats(0.01, 1.0)))
    return Scenario(draw(st.text("abcxyz_", min_size=1, max_size=8)), spec, solver, sim, "generated")


@given(sc=scenarios())
def test_round_trip_is_lossless(sc):
    assert config.loads(config.dumps(sc)) == sc
