"""Flat ``key = value`` configuration with one section per command area.

Every key has a default.  Unknown sections or keys are errors, so a typo
cannot silently change an experiment.  Resolved configurations are plain
JSON-able dicts; a run manifest stores one and can be fed back to
``--config`` to reproduce a run.
"""
from __future__ import annotations

import configparser
import json
from pathlib import Path

from .errors import ConfigError

AUTO = "auto"


def _float(v):
    return float(v)


def _int(v):
    if isinstance(v, float) and not v.is_integer():
        raise ValueError(f"{v} is not an integer")
    return int(v)


def _opt_float(v):
    if v is None or (isinstance(v, str) and v.strip().lower() in (AUTO, "none", "")):
        return None
    return float(v)


def _float_list(v):
    if isinstance(v, (list, tuple)):
        return [float(x) for x in v]
    items = [x for x in str(v).replace(",", " ").split() if x]
    if not items:
        raise ValueError("empty list")
    return [float(x) for x in items]


def _choice(*options):
    def parse(v):
        v = str(v).strip()
        if v not in options:
            raise ValueError(f"{v!r} not one of {', '.join(options)}")
        return v
    return parse


def _path(v):
    return str(v).strip()


def _center(v):
    if v is None or str(v).strip().lower() == "start":
        return "start"
    return float(v)


def _bool(v):
    if isinstance(v, bool):
        return v
    s = str(v).strip().lower()
    if s in ("1", "true", "yes", "on"):
        return True
    if s in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"{v!r} is not a boolean")


# section -> key -> (parser, default, description)
SCHEMA = {
    "flow": {
        "kind": (_choice("grim_reaper", "hairclip", "line", "circle", "sine_graph"), "grim_reaper", "exact family for initial data"),
        "n": (_int, 521, "vertex count"),
        "param_lo": (_float, -1.3, "lower end of the ordinate (or arclength for line) range"),
        "param_hi": (_float, 1.3, "upper end of that range"),
        "amplitude": (_float, 0.2, "sine_graph amplitude A"),
        "wavenumber": (_float, 1.0, "sine_graph wavenumber k"),
        "periods": (_int, 1, "sine_graph periods in the fundamental domain"),
        "radius": (_float, 1.0, "circle radius at time 0"),
        "direction": (_float, 0.0, "line direction angle"),
        "t_start": (_float, 0.0, "start time"),
        "t_end": (_float, 1.0, "end time"),
        "scheme": (_choice("explicit_cfl", "fixed", "semi_implicit"), "semi_implicit", "time-step policy"),
        "dt": (_opt_float, 1e-3, "step for fixed and semi_implicit"),
        "safety": (_float, 0.4, "CFL safety factor"),
        "snapshot_stride": (_int, 1, "steps between stored snapshots"),
        "reparametrize_every": (_int, 0, "steps between arclength resamplings, 0 = never"),
        "boundary": (_choice("auto", "pin_to_exact", "free_neumann", "periodic"), AUTO, "auto picks periodic or pin_to_exact"),
        "offset": (_opt_float, None, "angle phase, auto = family default"),
    },
    "verify": {
        "trajectory": (_path, "trajectory.csv", "snapshot CSV written by simulate"),
        "r1_tol": (_float, 1e-3, "sup-norm tolerance for the theta equation"),
        "r2_tol": (_float, 1e-3, "tolerance for the cos(theta) equation"),
        "r3_tol": (_float, 1e-3, "tolerance for the |H|^2 equation"),
        "margin": (_int, 3, "vertices skipped at open ends"),
        "collar": (_float, 0.0, "arclength skipped at open ends"),
        "residuals": (_bool, True, "check evolution-equation residuals"),
        "inequality_slack": (_float, 1e-6, "allowed excess in pointwise inequalities"),
    },
    "estimate": {
        "trajectory": (_path, "trajectory.csv", "snapshot CSV written by simulate"),
        "basepoint": (_opt_float, None, "vertex index, auto = stored basepoint"),
        "R_list": (_float_list, [2.0, 4.0, 8.0], "cylinder radii"),
        "T_list": (_float_list, [1.0, 2.0, 4.0], "cylinder half heights"),
        "center_time": (_center, 4.0, "cylinder centre, or start for t_start + T"),
        "delta": (_opt_float, None, "calibration level, auto = measured inf cos(theta)"),
        "b": (_opt_float, None, "level b, auto = 1 - delta/2"),
        "epsilon": (_opt_float, None, "audit epsilon, auto = (1-b)(b - sup varphi)"),
        "profile_power": (_int, 8, "cutoff exponent"),
        "audit_slack": (_float, 1.0, "multiplier on the O(h + dt) audit tolerance"),
    },
    "inequalities": {
        "sample_count": (_int, 1_000_000, "samples per check"),
        "seed": (_int, 0, "generator seed"),
        "p_lo": (_float, 1.1, "smallest Young exponent"),
        "p_hi": (_float, 10.0, "largest Young exponent"),
    },
    "soliton": {
        "n": (_int, 400, "vertex count of the coarse sample"),
        "y_lo": (_float, -1.3, "lower ordinate"),
        "y_hi": (_float, 1.3, "upper ordinate"),
        "vx": (_float, 1.0, "translation vector x"),
        "vy": (_float, 0.0, "translation vector y"),
        "tol": (_float, 1e-3, "residual tolerance"),
        "min_ratio": (_float, 3.5, "required residual drop when h halves"),
    },
}

# sections each command reads
COMMAND_SECTIONS = {
    "simulate": ("flow",),
    "verify": ("verify",),
    "estimate": ("estimate",),
    "inequalities": ("inequalities",),
    "soliton": ("soliton",),
}


def _resolve_section(section, given):
    schema = SCHEMA[section]
    unknown = sorted(set(given) - set(schema))
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(unknown)}")
    out = {}
    for key, (parse, default, _) in schema.items():
        raw = given.get(key, default)
        try:
            out[key] = parse(raw) if raw is not None else None
        except (TypeError, ValueError) as e:
            raise ConfigError(f"[{section}] {key}: {e}") from e
    return out


def _raw_from_path(path: Path) -> dict:
    if path.suffix == ".json":
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from e
        # a run manifest carries its resolved configuration under "config"
        return data.get("config", data)
    parser = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    parser.optionxform = str  # keys are case sensitive (R_list)
    try:
        parser.read_string(path.read_text(), source=str(path))
    except configparser.Error as e:
        raise ConfigError(str(e)) from e
    return {s: dict(parser[s]) for s in parser.sections()}


def load(path, command: str) -> dict:
    """Resolved configuration for ``command``: {section: {key: value}}."""
    raw = {} if path is None else _raw_from_path(Path(path))
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping of sections")
    unknown = sorted(set(raw) - set(SCHEMA))
    if unknown:
        raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
    return {s: _resolve_section(s, raw.get(s, {}) or {}) for s in COMMAND_SECTIONS[command]}


def describe() -> str:
    """Text listing of every key with its default."""
    lines = []
    for section, keys in SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default, doc) in keys.items():
            shown = AUTO if default is None else default
            if isinstance(shown, list):
                shown = ", ".join(f"{x:g}" for x in shown)
            lines.append(f"{key} = {shown}    # {doc}")
        lines.append("")
    return "\n".join(lines)


def flow_config(section: dict):
    """FlowConfig from a resolved [flow] section."""
    from . import exact_solutions as ex
    from .flow_engine import FlowConfig

    s = section
    spec = ex.SolutionSpec(
        kind=s["kind"], n=s["n"], param_range=(s["param_lo"], s["param_hi"]),
        amplitude=s["amplitude"], wavenumber=s["wavenumber"], periods=s["periods"],
        radius=s["radius"], direction=s["direction"],
    )
    boundary = s["boundary"]
    if boundary == AUTO:
        boundary = "periodic" if s["kind"] in ("circle", "sine_graph") else "pin_to_exact"
    return FlowConfig(
        initial=spec, t_start=s["t_start"], t_end=s["t_end"], scheme=s["scheme"], dt=s["dt"],
        safety=s["safety"], snapshot_stride=s["snapshot_stride"],
        reparametrize_every=s["reparametrize_every"], boundary=boundary, offset=s["offset"],
    )
