"""Scenario files: YAML with fixed sections, strict keys, lossless round trip.

Grammar (every section except ``distribution`` and ``costs`` is optional)::

    name: s1
    description: free text
    distribution: {family: uniform}
                | {family: linear_decreasing|linear_increasing, slope: <0..2>}
                | {family: piecewise_linear, knots: [[pos, value], ...]}
                | {family: tabulated, values: [f0, f1, ...]}
    costs:
      action: {family: linear_gap, delta_h: .., delta_l: ..}
            | {family: tabulated, grid: [...], d1h: [...], d0h: [...], d1l: [...], d0l: [...]}
      group:  {family: linear_gap, kappa: .., kappa0: ..}
            | {family: tabulated, grid: [...], ch: [...], cl: [...]}
    benefits: {v1h: 0, v0h: 0, v1l: 0, v0l: 0}
    sensitivities: {mu_inside: .., mu_outside: .., mu_inside_h: .., mu_inside_l: ..}
    policy: {alpha: 0, beta: 0, gamma: 0}
    solver: {tol, newton_tol, max_newton, scan_points, inner_scan_points,
             bisect_xtol, form, n_starts, fd_step}
    simulate: {n, damping, max_iters, start, perturb_cells,
               empty_beliefs: {h0|h1|l0|l1: theta_hat | <float>}}
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import yaml

from . import density
from .model import (
    Benefits,
    LinearGapActionCost,
    LinearGapGroupCost,
    ModelSpec,
    Policy,
    TabulatedActionCost,
    TabulatedGroupCost,
)
from .simulate import SimulateOptions
from .solver import SolverOptions


class ConfigError(ValueError):
    def __init__(self, msg, line=None, column=None):
        if line is not None:
            msg = f"line {line}, column {column}: {msg}"
        super().__init__(msg)
        self.line = line
        self.column = column


@dataclass(frozen=True)
class Scenario:
    name: str
    spec: ModelSpec
    solver: SolverOptions = field(default_factory=SolverOptions)
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    description: str = ""


TOP_KEYS = ("name", "description", "distribution", "costs", "benefits", "sensitivities",
            "policy", "solver", "simulate")
DIST_KEYS = {
    "uniform": (),
    "linear_decreasing": ("slope",),
    "linear_increasing": ("slope",),
    "piecewise_linear": ("knots",),
    "tabulated": ("values",),
}
ACTION_KEYS = {"linear_gap": ("delta_h", "delta_l"), "tabulated": ("grid", "d1h", "d0h", "d1l", "d0l")}
GROUP_KEYS = {"linear_gap": ("kappa", "kappa0"), "tabulated": ("grid", "ch", "cl")}
SEGMENT_KEYS = {"h0": ("h", 0), "h1": ("h", 1), "l0": ("l", 0), "l1": ("l", 1)}


def _mark(root, path):
    """(line, column), 1-based, of the node at ``path`` in a composed YAML tree."""
    node = root
    for key in path:
        if not isinstance(node, yaml.MappingNode):
            break
        for k, v in node.value:
            if k.value == key:
                node = k if key == path[-1] else v
                break
        else:
            break
    return node.start_mark.line + 1, node.start_mark.column + 1


class _Reader:
    def __init__(self, root):
        self.root = root

    def fail(self, msg, path):
        line, col = _mark(self.root, path) if self.root is not None else (None, None)
        raise ConfigError(f"{'.'.join(path) or '<top>'}: {msg}", line, col)

    def section(self, d, path, allowed, required=()):
        if not isinstance(d, dict):
            self.fail("expected a mapping", path)
        for k in d:
            if k not in allowed:
                self.fail(f"unknown key {k!r} (allowed: {', '.join(allowed)})", path + [str(k)])
        for k in required:
            if k not in d:
                self.fail(f"missing key {k!r}", path)
        return d

    def number(self, d, key, path, default=None):
        if key not in d:
            if default is None:
                self.fail(f"missing key {key!r}", path)
            return default
        v = d[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            self.fail(f"expected a number, got {v!r}", path + [key])
        return float(v)

    def family(self, d, path, table):
        self.section(d, path, ("family",) + tuple(k for ks in table.values() for k in ks), ("family",))
        fam = d["family"]
        if fam not in table:
            self.fail(f"unknown family {fam!r} (allowed: {', '.join(table)})", path + ["family"])
        self.section(d, path, ("family",) + table[fam])
        return fam


def _build_spec(raw, r: _Reader) -> ModelSpec:
    dd = raw.get("distribution")
    if dd is None:
        r.fail("missing section 'distribution'", [])
    fam = r.family(dd, ["distribution"], DIST_KEYS)
    try:
        dist = density.from_dict(dd)
    except (ValueError, TypeError, KeyError) as exc:
        r.fail(str(exc), ["distribution"])

    costs = r.section(raw.get("costs"), ["costs"], ("action", "group"), ("action", "group"))
    ad = costs["action"]
    fam = r.family(ad, ["costs", "action"], ACTION_KEYS)
    try:
        if fam == "linear_gap":
            ac = LinearGapActionCost(r.number(ad, "delta_h", ["costs", "action"]),
                                     r.number(ad, "delta_l", ["costs", "action"]))
        else:
            ac = TabulatedActionCost(*(tuple(float(x) for x in ad[k]) for k in ACTION_KEYS["tabulated"]))
    except (ValueError, TypeError, KeyError) as exc:
        r.fail(str(exc), ["costs", "action"])
    gd = costs["group"]
    fam = r.family(gd, ["costs", "group"], GROUP_KEYS)
    try:
        if fam == "linear_gap":
            gc = LinearGapGroupCost(r.number(gd, "kappa", ["costs", "group"]),
                                    r.number(gd, "kappa0", ["costs", "group"], 0.0))
        else:
            gc = TabulatedGroupCost(*(tuple(float(x) for x in gd[k]) for k in GROUP_KEYS["tabulated"]))
    except (ValueError, TypeError, KeyError) as exc:
        r.fail(str(exc), ["costs", "group"])

    bd = r.section(raw.get("benefits", {}), ["benefits"], ("v1h", "v0h", "v1l", "v0l"))
    ben = Benefits(**{k: r.number(bd, k, ["benefits"], 0.0) for k in ("v1h", "v0h", "v1l", "v0l")})

    sd = r.section(raw.get("sensitivities", {}), ["sensitivities"],
                   ("mu_inside", "mu_outside", "mu_inside_h", "mu_inside_l"))
    mu_i = r.number(sd, "mu_inside", ["sensitivities"], 0.4)
    mu_o = r.number(sd, "mu_outside", ["sensitivities"], 0.5)
    byg = None
    if "mu_inside_h" in sd or "mu_inside_l" in sd:
        byg = (("h", r.number(sd, "mu_inside_h", ["sensitivities"])),
               ("l", r.number(sd, "mu_inside_l", ["sensitivities"])))

    pd = r.section(raw.get("policy", {}), ["policy"], ("alpha", "beta", "gamma"))
    pol = Policy(*(r.number(pd, k, ["policy"], 0.0) for k in ("alpha", "beta", "gamma")))
    return ModelSpec(dist, ac, gc, ben, mu_i, mu_o, pol, byg)


def _options(cls, d, path, r: _Reader, convert=None):
    names = [f.name for f in fields(cls)]
    r.section(d, path, tuple(names))
    defaults = cls()
    kw = {}
    for k, v in d.items():
        default = getattr(defaults, k)
        if convert and k in convert:
            kw[k] = convert[k](v, path + [k])
        elif isinstance(default, bool) or isinstance(default, str):
            if not isinstance(v, type(default)):
                r.fail(f"expected {type(default).__name__}, got {v!r}", path + [k])
            kw[k] = v
        elif isinstance(default, int):
            if isinstance(v, bool) or not isinstance(v, int):
                r.fail(f"expected an integer, got {v!r}", path + [k])
            kw[k] = v
        else:
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                r.fail(f"expected a number, got {v!r}", path + [k])
            kw[k] = float(v)
    return cls(**kw)


def scenario_from_dict(raw, root=None) -> Scenario:
    r = _Reader(root)
    if not isinstance(raw, dict):
        r.fail("scenario file must be a mapping", [])
    r.section(raw, [], TOP_KEYS)
    spec = _build_spec(raw, r)

    solver = _options(SolverOptions, raw.get("solver", {}), ["solver"], r)
    if solver.form not in ("canonical", "direct"):
        r.fail(f"form must be 'canonical' or 'direct', got {solver.form!r}", ["solver", "form"])

    def empties(v, path):
        r.section(v, path, tuple(SEGMENT_KEYS))
        out = []
        for k in SEGMENT_KEYS:
            if k in v:
                val = v[k]
                if val != "theta_hat" and (isinstance(val, bool) or not isinstance(val, (int, float))):
                    r.fail(f"expected 'theta_hat' or a number, got {val!r}", path + [k])
                out.append((SEGMENT_KEYS[k], val if val == "theta_hat" else float(val)))
        return tuple(out) or None

    sim = _options(SimulateOptions, raw.get("simulate", {}), ["simulate"], r, {"empty_beliefs": empties})
    name = raw.get("name", "scenario")
    desc = raw.get("description", "")
    if not isinstance(name, str) or not isinstance(desc, str):
        r.fail("name and description must be strings", [])
    return Scenario(name, spec, solver, sim, desc)


def loads(text: str) -> Scenario:
    try:
        root = yaml.compose(text, Loader=yaml.SafeLoader)
        raw = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        m = exc.problem_mark
        raise ConfigError(f"YAML parse error: {exc.problem}", m.line + 1, m.column + 1) from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"YAML parse error: {exc}") from exc
    return scenario_from_dict(raw, root)


def load(path) -> Scenario:
    return loads(Path(path).read_text())


def scenario_to_dict(sc: Scenario) -> dict:
    s = sc.spec
    out = {"name": sc.name}
    if sc.description:
        out["description"] = sc.description
    out["distribution"] = s.dist.to_dict()
    out["costs"] = {"action": s.action_cost.to_dict(), "group": s.group_cost.to_dict()}
    out["benefits"] = asdict(s.benefits)
    sens = {"mu_inside": s.mu_inside, "mu_outside": s.mu_outside}
    if s.mu_inside_by_group is not None:
        byg = dict(s.mu_inside_by_group)
        sens.update(mu_inside_h=byg["h"], mu_inside_l=byg["l"])
    out["sensitivities"] = sens
    out["policy"] = asdict(s.policy)
    out["solver"] = asdict(sc.solver)
    sim = asdict(sc.simulate)
    if sc.simulate.empty_beliefs:
        inv = {v: k for k, v in SEGMENT_KEYS.items()}
        sim["empty_beliefs"] = {inv[tuple(k)]: v for k, v in sc.simulate.empty_beliefs}
    else:
        sim.pop("empty_beliefs")
    out["simulate"] = sim
    return out


def dumps(sc: Scenario) -> str:
    return yaml.safe_dump(scenario_to_dict(sc), sort_keys=False, default_flow_style=None)


def preset_names():
    files = resources.files("groupsignal").joinpath("presets").iterdir()
    return sorted(p.name[:-5] for p in files if p.name.endswith(".yaml"))


def load_preset(name: str) -> Scenario:
    res = resources.files("groupsignal").joinpath("presets").joinpath(f"{name}.yaml")
    if not res.is_file():
        raise ConfigError(f"unknown preset {name!r} (available: {', '.join(preset_names())})")
    return loads(res.read_text())
