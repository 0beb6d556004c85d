"""Fixed corpus of scenarios for the sign and oracle suites.

Seven densities crossed with four parameter sets.  Members are kept or
dropped only on whether a stable interior equilibrium exists; the signs
are never consulted when building the list.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

from . import density
from .model import LinearGapActionCost, LinearGapGroupCost, ModelSpec, validate
from .solver import Equilibrium, SolverOptions, solve_equilibrium

DENSITIES = {
    "uniform": density.Uniform(),
    "lin_dec_1": density.linear_decreasing(1.0),
    "lin_dec_2": density.linear_decreasing(2.0),
    "lin_inc_1": density.linear_increasing(1.0),
    "lin_inc_2": density.linear_increasing(2.0),
    "pwl_hump": density.piecewise_linear([[0.0, 0.6], [0.3, 1.6], [0.7, 0.9], [1.0, 0.4]]),
    "pwl_valley": density.piecewise_linear([[0.0, 1.4], [0.5, 0.5], [1.0, 1.2]]),
}

# (delta_h, delta_l, kappa, mu_inside, mu_outside)
PARAMETER_SETS = {
    "base": (1.0, 0.5, 0.1, 0.4, 0.5),
    "steep": (1.2, 0.6, 0.15, 0.5, 0.5),
    "peer": (1.0, 0.4, 0.1, 0.6, 0.4),
    "prestige": (0.8, 0.5, 0.08, 0.3, 0.6),
}


@dataclass(frozen=True)
class CorpusMember:
    name: str
    spec: ModelSpec
    equilibrium: Equilibrium
    stable: tuple = ()


def candidates():
    for dn, dist in DENSITIES.items():
        for pn, (dh, dl, kappa, mi, mo) in PARAMETER_SETS.items():
            spec = ModelSpec(dist=dist, action_cost=LinearGapActionCost(dh, dl),
                             group_cost=LinearGapGroupCost(kappa, 0.0), mu_inside=mi, mu_outside=mo)
            yield f"{dn}/{pn}", spec


@lru_cache(maxsize=None)
def build(options: SolverOptions = SolverOptions()):
    """(members, skipped names).  A member is a validated spec with a stable
    interior equilibrium; the first such equilibrium is kept."""
    members, skipped = [], []
    for name, spec in candidates():
        if not validate(spec).ok:
            skipped.append(name)
            continue
        stable = solve_equilibrium(spec, options).stable_interior
        if stable:
            members.append(CorpusMember(name, spec, stable[0], tuple(stable)))
        else:
            skipped.append(name)
    return tuple(members), tuple(skipped)
