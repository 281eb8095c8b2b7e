"""Visibility optimum versus photon energy, plus the fine scan at 511 keV."""
import argparse

import numpy as np

from compton_witness import channel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--energies", type=float, nargs="+", default=[1e-4, 0.1, 2 / 3, 1.0, 2.0, 5.0])
    args = ap.parse_args()
    th = np.radians(np.arange(0, 180.005, 0.01))
    v = channel.visibility(1.0, th)
    print(f"fine scan k=1: max V={v.max():.5f} at {np.degrees(th[v.argmax()]):.2f} deg")
    print(f"{'k':>8} {'keV':>8} {'theta_opt':>10} {'V_max':>8}")
    for k in args.energies:
        t, vm = channel.optimal_angle(k)
        print(f"{k:8.4g} {511 * k:8.1f} {np.degrees(t):10.3f} {vm:8.5f}")


if __name__ == "__main__":
    main()
