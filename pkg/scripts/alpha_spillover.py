"""Total effort and cutoffs along an alpha path for a scenario (default s1).

    python3 scripts/alpha_spillover.py [--preset s1] [--lo -0.05] [--hi 0.02] [--steps 29] [--out alpha.csv]
"""
import argparse
import sys

from groupsignal import report
from groupsignal.cli import sweep
from groupsignal.config import load_preset


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--preset", default="s1")
    ap.add_argument("--lo", type=float, default=-0.05)
    ap.add_argument("--hi", type=float, default=0.02)
    ap.add_argument("--steps", type=int, default=29)
    ap.add_argument("--out")
    a = ap.parse_args()
    sc = load_preset(a.preset)
    rows = sweep(sc.spec, "alpha", a.lo, a.hi, a.steps, sc.solver)
    text = report.to_csv(report.SWEEP_COLUMNS, rows)
    if a.out:
        open(a.out, "w").write(text)
    for r in rows:
        if r["status"] == "ok":
            print(f"alpha {r['value']:+.4f}  theta_l {r['theta_l']:.5f}  theta_hat {r['theta_hat']:.5f}  "
                  f"theta_h {r['theta_h']:.5f}  effort {r['total_effort']:.5f}")
        else:
            print(f"alpha {r['value']:+.4f}  {r['status']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
