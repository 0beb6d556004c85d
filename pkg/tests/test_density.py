import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from scipy.integrate import quad

from groupsignal import density

DISTS = [
    density.Uniform(),
    density.linear_decreasing(2.0),
    density.linear_increasing(1.0),
    density.piecewise_linear([[0.0, 0.6], [0.3, 1.6], [0.7, 0.9], [1.0, 0.4]]),
    density.tabulated([2.0, 1.0, 0.5, 1.5, 1.0]),
]
unit = st.floats(0.0, 1.0)


def quad_mean(d, lo, hi):
    kinks = [p for p in getattr(d, "positions", ()) if lo < p < hi] or None
    kw = dict(points=kinks, epsabs=1e-14, epsrel=1e-13, limit=200)
    return quad(d.pdf, lo, hi, **kw)[0], quad(lambda t: t * d.pdf(t), lo, hi, **kw)[0]


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.to_dict()["family"])
def test_density_integrates_to_one(d):
    assert quad(d.pdf, 0, 1, points=[0.3, 0.5, 0.7])[0] == pytest.approx(1.0, abs=1e-12)
    assert d.cdf(0.0) == pytest.approx(0.0, abs=1e-15)
    assert d.cdf(1.0) == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.to_dict()["family"])
@given(a=unit, b=unit)
def test_interval_moments_match_quadrature(d, a, b):
    lo, hi = min(a, b), max(a, b)
    mass, mom = d.interval_moments(lo, hi)
    qm, qmom = quad_mean(d, lo, hi)
    assert mass == pytest.approx(qm, abs=1e-12)
    assert mom == pytest.approx(qmom, abs=1e-12)


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.to_dict()["family"])
@given(a=unit, b=unit)
def test_truncated_mean_inside_interval(d, a, b):
    lo, hi = min(a, b), max(a, b)
    assume(hi - lo > 1e-6)
    m = density.truncated_mean(d, lo, hi)
    assert lo <= m <= hi
    qm, qmom = quad_mean(d, lo, hi)
    assert m == pytest.approx(qmom / qm, abs=1e-9)


def test_uniform_truncated_mean_is_midpoint():
    assert density.truncated_mean(density.Uniform(), 0.2, 0.6) == pytest.approx(0.4, abs=1e-15)


def test_degenerate_interval():
    d = density.Uniform()
    with pytest.raises(density.DegenerateInterval):
        density.truncated_mean(d, 0.5, 0.5)
    assert density.truncated_mean(d, 0.5, 0.5, boundary=True) == 0.5


def test_domain_errors():
    with pytest.raises(ValueError):
        density.cdf(density.Uniform(), 1.5)
    with pytest.raises(ValueError):
        density.Linear(2.5)
    with pytest.raises(ValueError):
        density.piecewise_linear([[0.0, 1.0], [0.5, -0.1], [1.0, 1.0]])


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.to_dict()["family"])
@given(a=st.floats(0.02, 0.98), b=st.floats(0.02, 0.98))
def test_mean_derivatives_match_fd(d, a, b):
    lo, hi = min(a, b), max(a, b)
    assume(hi - lo > 1e-3)
    h = 1e-6
    fd_hi = (density.truncated_mean(d, lo, hi + h) - density.truncated_mean(d, lo, hi - h)) / (2 * h)
    fd_lo = (density.truncated_mean(d, lo + h, hi) - density.truncated_mean(d, lo - h, hi)) / (2 * h)
    assert density.dmean_dhi(d, lo, hi) == pytest.approx(fd_hi, rel=1e-5, abs=1e-7)
    assert density.dmean_dlo(d, lo, hi) == pytest.approx(fd_lo, rel=1e-5, abs=1e-7)
    assert density.dmean_dhi(d, lo, hi) > 0 and density.dmean_dlo(d, lo, hi) > 0


def test_mean_derivatives_on_collapsed_interval():
    d = density.linear_decreasing(1.0)
    assert density.dmean_dhi(d, 0.4, 0.4) == pytest.approx(0.5)
    assert density.dmean_dlo(d, 0.4, 0.4) == pytest.approx(0.5)


def test_jewitt_gap_uniform_constant():
    cuts = np.linspace(0.01, 0.99, 99)
    assert np.max(np.abs(density.jewitt_gap(density.Uniform(), cuts) - 0.5)) <= 1e-10


@st.composite
def monotone_pwl(draw):
    n = draw(st.integers(2, 6))
    vals = sorted(draw(st.lists(st.floats(0.05, 3.0), min_size=n, max_size=n)))
    return draw(st.booleans()), vals


@given(spec=monotone_pwl(), lo=st.floats(0.0, 0.3), hi=st.floats(0.7, 1.0))
def test_jewitt_gap_monotone_for_monotone_density(spec, lo, hi):
    increasing, vals = spec
    if not increasing:
        vals = vals[::-1]
    d = density.tabulated(vals)
    cuts = np.linspace(lo, hi, 52)[1:-1]
    z = density.jewitt_gap(d, cuts, lo, hi)
    dz = np.diff(z)
    if increasing:
        assert np.all(dz <= 1e-12)
    else:
        assert np.all(dz >= -1e-12)


@pytest.mark.parametrize("d", DISTS, ids=lambda d: d.to_dict()["family"])
def test_dict_round_trip(d):
    e = density.from_dict(d.to_dict())
    xs = np.linspace(0, 1, 11)
    assert np.allclose(e.pdf(xs), d.pdf(xs), atol=1e-15)
