"""Command-line front end: simulate, verify, estimate, inequalities, soliton.

Exit codes: 0 success, 1 a check failed or a sweep cell was inadmissible,
2 configuration error, 3 numerical abort (spacing collapse).
"""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import config as cfgmod
from . import estimate_harness as eh
from . import exact_solutions as ex
from . import flow_engine as fe
from . import inequality_lab as il
from . import storage
from .curve_geometry import geometry, inequality_audit
from .errors import ConfigError, SpacingCollapse

log = logging.getLogger("lagflow")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_ABORT = 0, 1, 2, 3


class _Run:
    """Collects outputs and writes the manifest at the end of a command."""

    def __init__(self, command, config, out: Path, seed):
        self.command, self.config, self.out, self.seed = command, config, out, seed
        self.outputs = {}
        self.extra = {}
        self.t0 = time.perf_counter()

    def write(self, name, text):
        path = storage.atomic_write(self.out / name, text)
        self.outputs[name] = str(path)
        return path

    def finish(self, status, **extra):
        self.extra.update(extra)
        manifest = {
            "command": self.command,
            "config": self.config,
            "version": __version__,
            "seed": self.seed,
            "outputs": self.outputs,
            "status": status,
            "duration_s": time.perf_counter() - self.t0,
            **self.extra,
        }
        storage.write_manifest(self.out / "manifest.json", manifest)


def _report(lines: dict) -> str:
    return "".join(f"{k}: {v}\n" for k, v in lines.items())


def _fmt(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


# --- commands -----------------------------------------------------------------


def cmd_simulate(conf, run: _Run, svg: bool) -> int:
    flow = conf["flow"]
    try:
        fc = cfgmod.flow_config(flow)
    except ValueError as e:
        raise ConfigError(str(e)) from e
    try:
        traj = fe.run(fc)
        status, code = "ok", EXIT_OK
    except SpacingCollapse as e:
        traj = e.trajectory
        status, code = "aborted", EXIT_ABORT
        run.extra["abort_reason"] = str(e)
        log.error("%s", e)
    csv, side = storage.write_trajectory(traj, run.out / "trajectory.csv", flow)
    run.outputs["trajectory.csv"] = str(csv)
    run.outputs["trajectory.meta.json"] = str(side)
    if svg:
        run.write("snapshots.svg", storage.snapshots_svg(traj))
    summary = {"snapshots": len(traj), "t_final": _fmt(float(traj.times[-1])), "status": status}
    run.write("simulate.txt", _report(summary))
    sys.stdout.write(_report(summary))
    run.finish(status)
    return code


def _load_traj(path):
    try:
        return storage.read_trajectory(path)
    except (OSError, ValueError) as e:
        raise ConfigError(f"cannot read trajectory {path}: {e}") from e


def cmd_verify(conf, run: _Run, svg: bool) -> int:
    v = conf["verify"]
    traj = _load_traj(v["trajectory"])
    lines, failed = {}, []
    if v["residuals"]:
        try:
            res = fe.evolution_residuals(traj, margin=v["margin"], collar=v["collar"]).as_dict()
            for key, tol in (("R1", v["r1_tol"]), ("R2", v["r2_tol"]), ("R3", v["r3_tol"])):
                ok = res[key] <= tol
                lines[key] = _fmt(res[key])
                lines[f"{key}_ok"] = _fmt(ok)
                if not ok:
                    failed.append(key)
        except ValueError as e:
            lines["residuals_error"] = str(e)
            failed.append("residuals")
    worst = {"cos_h": -np.inf, "kato": -np.inf, "p_bound": -np.inf, "p_identity": 0.0, "scalar_curvature": 0.0}
    for state in traj.states:
        a = inequality_audit(state.curve, traj.offset)
        for key in worst:
            worst[key] = max(worst[key], getattr(a, key))
    slack = v["inequality_slack"]
    for key in ("cos_h", "kato", "p_bound"):
        ok = worst[key] <= slack
        lines[key] = _fmt(float(worst[key]))
        lines[f"{key}_ok"] = _fmt(ok)
        if not ok:
            failed.append(key)
    lines["p_identity"] = _fmt(float(worst["p_identity"]))
    lines["scalar_curvature"] = _fmt(float(worst["scalar_curvature"]))
    lines["kato_curve_max"] = _fmt(max(il.curve_kato_check(s.curve) for s in traj.states))
    lines["failed"] = ",".join(failed) if failed else "none"
    lines["pass"] = _fmt(not failed)
    text = _report(lines)
    run.write("verify.txt", text)
    sys.stdout.write(text)
    if svg:
        run.write("snapshots.svg", storage.snapshots_svg(traj))
    run.finish("ok" if not failed else "failed", failed=failed)
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_estimate(conf, run: _Run, svg: bool, audit: bool) -> int:
    e = conf["estimate"]
    traj = _load_traj(e["trajectory"])
    basepoint = traj[0].curve.basepoint_index if e["basepoint"] is None else int(e["basepoint"])
    delta = e["delta"]
    if delta is None:
        delta = min(geometry(s.curve, traj.offset).inf_cos_theta for s in traj.states)
    if e["b"] is not None:
        b = e["b"]
    else:
        try:
            b = eh.choose_b(delta)
        except ValueError as err:
            raise ConfigError(f"cannot choose b from delta={delta:.6g}: {err}") from err
    center = None if e["center_time"] == "start" else e["center_time"]
    lines = {"delta": _fmt(float(delta)), "b": _fmt(float(b)), "basepoint": basepoint}
    try:
        res = eh.sweep_and_fit(traj, basepoint, e["R_list"], e["T_list"], b, center)
    except eh.CellError as err:
        lines["error"] = str(err)
        text = _report(lines)
        run.write("estimate.txt", text)
        sys.stdout.write(text)
        run.finish("inadmissible", error=str(err))
        return EXIT_FAIL
    rows = ["R,T,sup_ratio,ratio_to_bound"]
    rows += [f"{c.R!r},{c.T!r},{c.sup_ratio!r},{c.ratio_to_bound!r}" for c in res.cells]
    run.write("estimate.csv", "\n".join(rows) + "\n")
    lines.update(
        fitted_C=_fmt(res.fitted_C), fitted_C_small=_fmt(res.fitted_C_small),
        fitted_C_large=_fmt(res.fitted_C_large), SCALING_OK=_fmt(res.scaling_ok),
    )
    failed = []
    if audit:
        header, arows = None, []
        for c in res.cells:
            cyl = eh.CylinderSpec(basepoint, c.R, c.T, c.center_time)
            rep = eh.maxpoint_audit(traj, cyl, b, e["epsilon"], e["profile_power"], e["audit_slack"])
            d = {"R": c.R, "T": c.T, **rep.as_dict(), "all_satisfied": rep.all_satisfied}
            header = header or list(d)
            arows.append(",".join(_fmt(d[k]) for k in header))
            if not rep.all_satisfied:
                failed.append(f"R={c.R:g},T={c.T:g}")
        run.write("audit.csv", ",".join(header) + "\n" + "\n".join(arows) + "\n")
        lines["audit_failed"] = ";".join(failed) if failed else "none"
    text = _report(lines)
    run.write("estimate.txt", text)
    sys.stdout.write(text)
    if svg:
        run.write("snapshots.svg", storage.snapshots_svg(traj))
    run.finish("ok" if not failed else "failed", scaling_ok=res.scaling_ok)
    return EXIT_OK if not failed else EXIT_FAIL


def cmd_inequalities(conf, run: _Run) -> int:
    q = conf["inequalities"]
    try:
        dom = il.SampleDomain(p_range=(q["p_lo"], q["p_hi"]), sample_count=q["sample_count"], seed=q["seed"])
    except ValueError as err:
        raise ConfigError(str(err)) from err
    young = il.young_check(dom)
    mei = il.amgm_mei_check(dom)
    lines = {"samples": dom.sample_count, "seed": dom.seed, "young_violations": young, "mei_violations": mei,
             "pass": _fmt(young == 0 and mei == 0)}
    text = _report(lines)
    run.write("inequalities.txt", text)
    sys.stdout.write(text)
    ok = young == 0 and mei == 0
    run.finish("ok" if ok else "failed")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_soliton(conf, run: _Run) -> int:
    s = conf["soliton"]
    V = (s["vx"], s["vy"])
    try:
        coarse = ex.sample(ex.SolutionSpec("grim_reaper", n=s["n"], param_range=(s["y_lo"], s["y_hi"])))
        fine = ex.sample(ex.SolutionSpec("grim_reaper", n=2 * s["n"] - 1, param_range=(s["y_lo"], s["y_hi"])))
        r_c, r_f = ex.translator_residual(coarse, V), ex.translator_residual(fine, V)
    except ValueError as err:
        raise ConfigError(str(err)) from err
    ratio = r_c / r_f if r_f > 0 else float("inf")
    ok = r_c < s["tol"] and ratio >= s["min_ratio"]
    lines = {"residual": _fmt(r_c), "residual_half_h": _fmt(r_f), "ratio": _fmt(ratio), "pass": _fmt(ok)}
    text = _report(lines)
    run.write("soliton.txt", text)
    sys.stdout.write(text)
    run.finish("ok" if ok else "failed")
    return EXIT_OK if ok else EXIT_FAIL


# --- entry point --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lagflow", description="Curve shortening flow laboratory")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("simulate", "run a flow and write snapshot CSV"),
        ("verify", "evolution-equation residuals and pointwise inequalities of a trajectory"),
        ("estimate", "sweep the curvature estimate over cylinders"),
        ("inequalities", "seeded sampling of the scalar inequalities"),
        ("soliton", "translator residual of the sampled grim reaper"),
    ):
        s = sub.add_parser(name, help=help_)
        s.add_argument("--config", type=Path, default=None, help="INI file or a manifest.json from an earlier run")
        s.add_argument("--out", type=Path, default=Path("."), help="output directory")
        s.add_argument("--seed", type=int, default=None, help="overrides [inequalities] seed")
        s.add_argument("--audit", action="store_true", help="append the maximum-point audit per sweep cell")
        s.add_argument("--svg", action="store_true", help="also write snapshots.svg")
        s.add_argument("--print-config", action="store_true", help="list every key with its default")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    if args.print_config:
        sys.stdout.write(cfgmod.describe())
        return EXIT_OK
    try:
        conf = cfgmod.load(args.config, args.command)
        if args.seed is not None and "inequalities" in conf:
            conf["inequalities"]["seed"] = args.seed
        seed = conf["inequalities"]["seed"] if "inequalities" in conf else args.seed
        for section in ("verify", "estimate"):
            if section in conf:
                conf[section]["trajectory"] = str(Path(conf[section]["trajectory"]).resolve())
        run = _Run(args.command, conf, args.out, seed)
        if args.command == "simulate":
            return cmd_simulate(conf, run, args.svg)
        if args.command == "verify":
            return cmd_verify(conf, run, args.svg)
        if args.command == "estimate":
            return cmd_estimate(conf, run, args.svg, args.audit)
        if args.command == "inequalities":
            return cmd_inequalities(conf, run)
        return cmd_soliton(conf, run)
    except ConfigError as e:
        log.error("configuration error: %s", e)
        return EXIT_CONFIG
