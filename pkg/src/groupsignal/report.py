"""Flat records and deterministic CSV/JSON rendering.

CSV files carry a ``schema`` first column naming the layout and its
version; floats are written with 17 significant digits so values survive a
round trip exactly.  JSON uses sorted keys and ``repr`` floats.
"""
from __future__ import annotations

import io
import json
import math

import numpy as np

SOLVE_SCHEMA = "groupsignal.solve/1"
SWEEP_SCHEMA = "groupsignal.sweep/1"
TRACE_SCHEMA = "groupsignal.trace/1"
ASSIGN_SCHEMA = "groupsignal.assignment/1"
STATICS_SCHEMA = "groupsignal.statics/1"

SEGMENT_COLS = ("l0", "l1", "h0", "h1")
SOLVE_COLUMNS = (
    "schema", "index", "form", "ordering", "stability", "theta_l", "theta_hat", "theta_h",
    "sigma_h", "sigma_l", "sigma_s", "residual_max", "jacobian_det",
    "stab_action_h", "stab_action_l", "stab_group",
    *(f"mass_{s}" for s in SEGMENT_COLS), *(f"mean_{s}" for s in SEGMENT_COLS),
    "total_effort", "direct_residual",
)
SWEEP_COLUMNS = (
    "schema", "param", "value", "status", "theta_l", "theta_hat", "theta_h",
    *(f"mass_{s}" for s in SEGMENT_COLS), "total_effort", "stability", "residual_max",
)
TRACE_COLUMNS = ("schema", "iteration", "changes", "theta_l", "theta_hat", "theta_h")
ASSIGN_COLUMNS = ("schema", "theta", "weight", "group", "action")


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else format(v, ".17g")
    return "" if v is None else str(v)


def to_csv(columns, rows) -> str:
    """Rows are mappings; missing cells render empty."""
    buf = io.StringIO()
    buf.write(",".join(columns) + "\n")
    for r in rows:
        buf.write(",".join(fmt(r.get(c)) for c in columns) + "\n")
    return buf.getvalue()


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def to_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2) + "\n"


def equilibrium_record(eq, index=0) -> dict:
    p, r, st = eq.profile, eq.residual, eq.stability
    rec = {
        "schema": SOLVE_SCHEMA, "index": index, "form": eq.form, "ordering": eq.ordering.value,
        "stability": st.verdict, "theta_l": p.theta_l, "theta_hat": p.theta_hat, "theta_h": p.theta_h,
        "sigma_h": r.sigma_h, "sigma_l": r.sigma_l, "sigma_s": r.sigma_s, "residual_max": r.max_abs,
        "jacobian_det": eq.jacobian_det, "stab_action_h": st.action_h, "stab_action_l": st.action_l,
        "stab_group": st.group, "total_effort": eq.total_effort, "direct_residual": eq.direct_residual,
    }
    for seg in eq.segments:
        key = f"{seg.group}{seg.action}"
        rec[f"mass_{key}"] = seg.mass
        rec[f"mean_{key}"] = seg.mean
    return rec


def solve_document(name, result, multistart=None) -> dict:
    doc = {
        "schema": SOLVE_SCHEMA,
        "scenario": name,
        "equilibria": [equilibrium_record(e, i) for i, e in enumerate(result.equilibria)],
        "boundary": [
            {"ordering": b.ordering.value, "note": b.note,
             "profile": None if b.profile is None else list(b.profile.as_array())}
            for b in result.boundary
        ],
        "notes": list(result.notes),
        "stable_interior": len(result.stable_interior),
    }
    if multistart is not None:
        doc["multistart"] = {"n_starts": multistart.n_starts, "distinct": multistart.count,
                             "converged": multistart.converged, "failures": multistart.failures,
                             "classes": multistart.classes}
    return doc


def statics_document(name, rep, shifters, cutoffs) -> dict:
    def table(M):
        return {c: {s: M[i, j] for j, s in enumerate(shifters)} for i, c in enumerate(cutoffs)}

    return {
        "schema": STATICS_SCHEMA,
        "scenario": name,
        "equilibrium": equilibrium_record(rep.equilibrium),
        "ift": table(rep.derivs_ift),
        "fd": table(rep.derivs_fd),
        "agree": table(rep.agreement),
        "signs": {c: dict(zip(shifters, row)) for c, row in zip(cutoffs, rep.sign_table)},
        "verdicts": rep.prop_verdicts,
        "effort_ift": dict(zip(shifters, rep.effort_ift)),
        "effort_fd": dict(zip(shifters, rep.effort_fd)),
        "fd_flags": rep.fd_flags,
    }


def render_statics(doc, shifters, cutoffs) -> str:
    out = [f"scenario {doc['scenario']}", "derivatives (IFT | FD), rows cutoffs, columns shifters"]
    out.append(f"{'':>10}" + "".join(f"{s:>26}" for s in shifters))
    for c in cutoffs:
        cells = []
        for s in shifters:
            fd = doc["fd"][c][s]
            cells.append(f"{doc['ift'][c][s]:>+12.6f} | " + ("     nan" if fd is None else f"{fd:>+10.6f}"))
        out.append(f"{c:>10}" + "".join(f"{x:>26}" for x in cells))
    out.append("signs: " + "  ".join(f"{c}: " + "".join(doc["signs"][c][s] for s in shifters) for c in cutoffs))
    out.append("verdicts: " + "  ".join(f"{s} {doc['verdicts'][s]}" for s in shifters))
    out.append("total effort response (IFT): " + "  ".join(
        f"{s} {doc['effort_ift'][s]:+.6f}" for s in shifters))
    for s, msg in sorted(doc["fd_flags"].items()):
        out.append(f"flag {s}: {msg}")
    return "\n".join(out) + "\n"


def render_solve(doc) -> str:
    out = [f"scenario {doc['scenario']}: {len(doc['equilibria'])} interior equilibria, "
           f"{doc['stable_interior']} stable"]
    labels = {"l0": "join l, a=0", "l1": "join l, a=1", "h0": "join h, a=0", "h1": "join h, a=1"}
    for e in doc["equilibria"]:
        out.append(f"[{e['index']}] {e['stability']}  theta_l={e['theta_l']:.10f}  "
                   f"theta_hat={e['theta_hat']:.10f}  theta_h={e['theta_h']:.10f}")
        bounds = {"l0": (0.0, e["theta_l"]), "l1": (e["theta_l"], e["theta_hat"]),
                  "h0": (e["theta_hat"], e["theta_h"]), "h1": (e["theta_h"], 1.0)}
        for s in SEGMENT_COLS:
            lo, hi = bounds[s]
            out.append(f"    [{lo:.6f}, {hi:.6f}] {labels[s]}: mass {e['mass_' + s]:.6f}, "
                       f"mean {e['mean_' + s]:.6f}")
        out.append(f"    max|sigma| {e['residual_max']:.3e}  det J {e['jacobian_det']:.6f}  "
                   f"total effort {e['total_effort']:.6f}  direct group residual {e['direct_residual']:+.6f}")
    for b in doc["boundary"]:
        out.append(f"boundary {b['ordering']}: {b['note']}")
    for n in doc["notes"]:
        out.append(f"note: {n}")
    if "multistart" in doc:
        m = doc["multistart"]
        out.append(f"multistart: {m['distinct']} distinct from {m['n_starts']} starts ({m['failures']} failed)")
    return "\n".join(out) + "\n"
