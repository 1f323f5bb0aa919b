"""Evolution-equation residuals of grim reaper runs under joint (h, dt) refinement.

    python scripts/convergence_study.py --levels 4 --collar 0.3
"""
import argparse

import numpy as np

from lagflow import exact_solutions as ex
from lagflow import flow_engine as fe


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n0", type=int, default=131, help="vertex count of the coarsest level")
    p.add_argument("--dt0", type=float, default=4e-3)
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--t-end", type=float, default=0.2)
    p.add_argument("--margin", type=int, default=3)
    p.add_argument("--collar", type=float, default=0.3)
    args = p.parse_args()

    rows = []
    for k in range(args.levels):
        n, dt = (args.n0 - 1) * 2**k + 1, args.dt0 / 2**k
        traj = fe.run(fe.FlowConfig(ex.SolutionSpec("grim_reaper", n=n), 0.0, args.t_end, dt=dt))
        r = fe.evolution_residuals(traj, args.margin, args.collar).as_dict()
        rows.append((n, dt, r))
    print(f"{'n':>6} {'dt':>9} {'R1':>10} {'R2':>10} {'R3':>10}")
    for n, dt, r in rows:
        print(f"{n:6d} {dt:9.2e} {r['R1']:10.3e} {r['R2']:10.3e} {r['R3']:10.3e}")
    for key in ("R1", "R2", "R3"):
        e = np.array([r[key] for _, _, r in rows])
        print(key, "orders:", " ".join(f"{x:.2f}" for x in np.log2(e[:-1] / e[1:])))


if __name__ == "__main__":
    main()
