"""Snapshot CSV, run manifests and SVG figure data.

Every file is written whole to a temporary sibling and renamed into place.
Floats go through ``repr`` so a CSV round trip is exact.
"""
from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .curve_geometry import PlanarCurve
from .flow_engine import FlowState, Trajectory

CSV_HEADER = "time,index,x,y"


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def meta_path(csv_path) -> Path:
    p = Path(csv_path)
    return p.with_name(p.stem + ".meta.json")


def trajectory_csv(traj: Trajectory) -> str:
    rows = [CSV_HEADER]
    for state in traj.states:
        t = repr(float(state.time))
        for i, (x, y) in enumerate(state.curve.vertices):
            rows.append(f"{t},{i},{float(x)!r},{float(y)!r}")
    return "\n".join(rows) + "\n"


def write_trajectory(traj: Trajectory, path, flow_section: dict | None = None) -> tuple:
    """CSV plus a sidecar with topology, period, basepoints and the flow settings."""
    c0 = traj[0].curve
    meta = {
        "topology": c0.topology,
        "period": c0.period,
        "offset": traj.offset,
        "basepoints": [s.curve.basepoint_index for s in traj.states],
        "flow": flow_section,
    }
    csv = atomic_write(path, trajectory_csv(traj))
    side = atomic_write(meta_path(path), json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv, side


def read_trajectory(path) -> Trajectory:
    from .config import flow_config

    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no trajectory at {path}")
    with path.open() as f:
        header = f.readline().strip()
    if header != CSV_HEADER:
        raise ValueError(f"{path}: expected header {CSV_HEADER!r}, got {header!r}")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    mp = meta_path(path)
    meta = json.loads(mp.read_text()) if mp.exists() else {}
    topology = meta.get("topology", "open")
    period = meta.get("period", 0.0)
    times, starts = np.unique(data[:, 0], return_index=True)
    order = np.argsort(starts)
    times, starts = times[order], starts[order]
    ends = list(starts[1:]) + [len(data)]
    basepoints = meta.get("basepoints") or [0] * len(times)
    states = []
    for k, (t, a, b) in enumerate(zip(times, starts, ends)):
        block = data[a:b]
        if not np.array_equal(block[:, 1], np.arange(len(block))):
            raise ValueError(f"{path}: vertex indices out of order at t={t!r}")
        curve = PlanarCurve(block[:, 2:4], topology, period, int(basepoints[k]))
        states.append(FlowState(curve, float(t)))
    config = flow_config(meta["flow"]) if meta.get("flow") else None
    return Trajectory(tuple(states), config, float(meta.get("offset", 0.0)))


def write_manifest(path, manifest: dict) -> Path:
    return atomic_write(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def snapshots_svg(traj: Trajectory, max_curves: int = 12, width: int = 800, pad: float = 20.0) -> str:
    """Polylines of evenly chosen snapshots, y axis pointing up."""
    picks = np.unique(np.linspace(0, len(traj) - 1, min(max_curves, len(traj))).round().astype(int))
    pts = np.vstack([traj[k].curve.vertices for k in picks])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    span = np.where(hi - lo > 0, hi - lo, 1.0)
    scale = (width - 2 * pad) / span.max()
    height = int(np.ceil(span[1] * scale + 2 * pad))
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">'
    ]
    for j, k in enumerate(picks):
        v = traj[k].curve.vertices
        if traj[k].curve.periodic:
            v = np.vstack([v, v[0] + traj[k].curve.shift])
        sx = pad + (v[:, 0] - lo[0]) * scale
        sy = height - pad - (v[:, 1] - lo[1]) * scale
        coords = " ".join(f"{x:.3f},{y:.3f}" for x, y in zip(sx, sy))
        shade = int(200 * (1 - j / max(1, len(picks) - 1)))
        lines.append(
            f'<polyline fill="none" stroke="rgb({shade},{shade},255)" stroke-width="1" '
            f'points="{coords}"><title>t={traj[k].time:.6g}</title></polyline>'
        )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"
