"""Cutoff response signs and IFT/FD agreement over the fixed corpus."""
import numpy as np

from groupsignal.corpus import build
from groupsignal.statics import agree, fd_derivatives, ift_derivatives, proposition_verdicts, sign_table


def main():
    members, skipped = build()
    print(f"{len(members)} members, {len(skipped)} skipped")
    for m in members:
        D = ift_derivatives(m.spec, m.equilibrium)
        F = fd_derivatives(m.spec, m.equilibrium)
        signs = " ".join("".join(row) for row in sign_table(D))
        verdicts = proposition_verdicts(D)
        bad = [k for k, v in verdicts.items() if v != "PASS"]
        rel = np.max(np.abs(D - F) / np.maximum(np.abs(F), 1e-6))
        print(f"{m.name:22s} {signs}  agree={bool(agree(D, F).all())}  max rel {rel:.1e}  "
              f"{'FAIL ' + ','.join(bad) if bad else 'ok'}")


if __name__ == "__main__":
    main()
