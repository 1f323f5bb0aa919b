"""Sampled cutoff constants against their closed forms, for several profile powers.

    python scripts/cutoff_constants.py --powers 8 10 12
"""
import argparse

import numpy as np

from lagflow import estimate_harness as eh


def closed_forms(p):
    # on the ramp eta = cos^p x with dx/du = pi / L
    x = np.linspace(0.0, np.pi / 2, 200001)[1:-1]
    c, s = np.cos(x), np.sin(x)
    K_r = np.max(p * c ** (p / 4 - 1) * s) * np.pi
    K_t = np.max(p * c ** (p / 2 - 1) * s) * np.pi
    K_rr = np.max(np.abs(p * ((p - 1) * c ** (p / 2 - 2) * s**2 - c ** (p / 2)))) * np.pi**2
    return K_r, K_rr, K_t


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--powers", type=int, nargs="+", default=[8, 10, 12, 16])
    ap.add_argument("--R", type=float, default=2.0)
    ap.add_argument("--T", type=float, default=1.0)
    args = ap.parse_args()
    print(f"{'p':>3} {'K_r':>9} {'exact':>9} {'K_rr':>9} {'exact':>9} {'K_t':>9} {'exact':>9}")
    for p in args.powers:
        a = eh.audit_cutoff(eh.CutoffSpec(args.R, args.T, p))
        e = closed_forms(p)
        print(f"{p:3d} {a.K_r:9.4f} {e[0]:9.4f} {a.K_rr:9.3f} {e[1]:9.3f} {a.K_t:9.4f} {e[2]:9.4f}")


if __name__ == "__main__":
    main()
