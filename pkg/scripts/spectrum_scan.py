"""List every allowed 209Bi transition that crosses a target frequency.

    python3 scripts/spectrum_scan.py --target-ghz 7.2 --bmax-mt 370
"""
import argparse

import numpy as np

from kipa_esr import spin


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--target-ghz", type=float, default=7.2)
    ap.add_argument("--bmax-mt", type=float, default=370.0)
    ap.add_argument("--step-mt", type=float, default=0.5)
    args = ap.parse_args()

    sys_ = spin.SpinSystem()
    omega = 2 * np.pi * args.target_ghz * 1e9
    found = spin.find_crossings(sys_, omega, 0.0, args.bmax_mt * 1e-3, args.step_mt * 1e-3)
    print(f"{'B0 (mT)':>9}  {'op':>3}  {'|F,mF> lower -> upper':<22} {'df/dB (MHz/mT)':>15}")
    for c in found:
        tr = c.transition
        op = "Sx" if tr.mx >= 0.05 else "Sz"
        grad = spin.transition_gradient(sys_, (tr.lower, tr.upper), c.field) / (2 * np.pi) * 1e-9
        label = f"{tr.lower[0]:.0f},{tr.lower[1]:+.0f} -> {tr.upper[0]:.0f},{tr.upper[1]:+.0f}"
        print(f"{c.field * 1e3:9.3f}  {op:>3}  {label:<22} {grad:15.3f}")
    print(f"{len(found)} crossings")


if __name__ == "__main__":
    main()
