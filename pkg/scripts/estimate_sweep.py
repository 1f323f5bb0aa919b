"""Sweep sup |H| / (b - varphi) over cylinders on a flowed sine graph and audit each cell.

    python scripts/estimate_sweep.py --anchor start
"""
import argparse

import numpy as np

from lagflow import estimate_harness as eh
from lagflow import exact_solutions as ex
from lagflow import flow_engine as fe
from lagflow.curve_geometry import geometry


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=1024)
    p.add_argument("--periods", type=int, default=8)
    p.add_argument("--amplitude", type=float, default=0.2)
    p.add_argument("--t-end", type=float, default=8.0)
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("--R", type=float, nargs="+", default=[2.0, 4.0, 8.0])
    p.add_argument("--T", type=float, nargs="+", default=[1.0, 2.0, 4.0])
    p.add_argument("--anchor", default="4", help="cylinder centre time, or 'start' for t_start + T")
    p.add_argument("--no-audit", action="store_true")
    args = p.parse_args()

    spec = ex.SolutionSpec("sine_graph", n=args.n, amplitude=args.amplitude, periods=args.periods)
    traj = fe.run(fe.FlowConfig(spec, 0.0, args.t_end, dt=args.dt, boundary="periodic"))
    delta = min(geometry(s.curve).inf_cos_theta for s in traj.states)
    b = eh.choose_b(delta)
    bp = traj[0].curve.basepoint_index
    center = None if args.anchor == "start" else float(args.anchor)
    res = eh.sweep_and_fit(traj, bp, args.R, args.T, b, center)
    print(f"delta={delta:.6f} b={b:.6f}")
    print(f"{'R':>5} {'T':>5} {'centre':>7} {'sup_ratio':>11} {'ratio/bound':>11} {'sup*sqrtT':>11} {'audit':>6}")
    for c in res.cells:
        audit = ""
        if not args.no_audit:
            rep = eh.maxpoint_audit(traj, eh.CylinderSpec(bp, c.R, c.T, c.center_time), b)
            audit = "ok" if rep.all_satisfied else "FAIL"
        print(f"{c.R:5g} {c.T:5g} {c.center_time:7g} {c.sup_ratio:11.4e} {c.ratio_to_bound:11.4e} "
              f"{c.sup_ratio * np.sqrt(c.T):11.4e} {audit:>6}")
    print(f"fitted_C={res.fitted_C:.5f} small={res.fitted_C_small:.5f} large={res.fitted_C_large:.5f} "
          f"SCALING_OK={res.scaling_ok}")


if __name__ == "__main__":
    main()
