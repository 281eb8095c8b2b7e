"""Reproduce the MUB/SIC bound table and settle the m~=2 separable ceiling by brute force.

Entangled ranges are over local unitaries acting on psi+.  Both partner
conventions for the SIC witness are printed since neither alone reproduces
every table entry.
"""
import argparse

import numpy as np

from compton_witness import channel, witness


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=100_000)
    args = ap.parse_args()
    for k in (1e-4, 1.0):
        v = channel.max_visibility(k)
        print(f"\nk = {k:g}  (V = {v:.4f})")
        for m, mt in ((3, 4), (2, 3), (1, 2)):
            sep = witness.mub_bounds_any(v * v, m)
            print(f"  MUB m={m}: SEP {sep[0]:.3f}/{sep[1]:.3f}  ENT {sep[2]:.3f}/{sep[3]:.3f}")
            for conj in (True, False):
                s_lo, s_hi = witness.sic_separable_range(mt, v, v, conj, n_samples=args.samples)
                e_lo, e_hi = witness.sic_entangled_range(mt, v, v, conj)
                tag = "conjugate" if conj else "plain"
                print(f"  SIC m~={mt} ({tag:9s}): SEP {s_lo:.3f}/{s_hi:.3f}  ENT {e_lo:.3f}/{e_hi:.3f}")
    brute = witness.sic_separable_range(2, n_samples=args.samples)[1]
    print(f"\nm~=2 separable upper bound, brute force over {args.samples} product states: {brute:.6f}")
    print(f"  ((1+sqrt3)/2)^2 = {witness.SIC_UPPER_M2_TABLE:.6f}   ((1+sqrt3)/3)^2 = {witness.SIC_UPPER_M2_TEXT:.6f}")
    print("  the smaller figure lies below the psi+ value 1.5 and cannot bound separable states")


if __name__ == "__main__":
    main()
