"""Closed-form curves and flows used as oracles.

Each family is also given implicitly as ``u(x, y, t) = 0``.  The implicit form
supplies the boundary data for pinned runs: a point of the zero set moving
with the purely normal velocity ``-u_t grad(u) / |grad(u)|^2`` stays on the
exact solution, which is exactly how our vertices move.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .curve_geometry import OPEN, X_PERIODIC, PlanarCurve, curvature, frame

KINDS = ("grim_reaper", "hairclip", "line", "circle", "sine_graph")

# Lagrangian-angle phase that makes each family almost calibrated
CANONICAL_OFFSET = {
    "grim_reaper": -np.pi / 2,
    "hairclip": -np.pi / 2,
    "line": 0.0,
    "circle": 0.0,
    "sine_graph": 0.0,
}


@dataclass(frozen=True)
class SolutionSpec:
    """Which exact solution to sample, at what time and resolution.

    ``param_range`` is the ordinate interval for grim_reaper and hairclip and
    the arclength interval for line.  sine_graph uses amplitude, wavenumber
    and periods; circle uses radius (its value at time 0).
    """

    kind: str
    time: float = 0.0
    n: int = 400
    param_range: tuple = (-1.3, 1.3)
    amplitude: float = 0.2
    wavenumber: float = 1.0
    periods: int = 1
    radius: float = 1.0
    direction: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown solution kind {self.kind!r}")
        if self.n < 4:
            raise ValueError("need at least 4 samples")
        lo, hi = self.param_range
        if not lo < hi:
            raise ValueError("param_range must be increasing")
        if self.kind in ("grim_reaper", "hairclip") and not (-np.pi / 2 < lo and hi < np.pi / 2):
            raise ValueError("ordinate range must lie inside (-pi/2, pi/2)")
        if self.kind == "sine_graph" and (self.wavenumber <= 0 or self.periods < 1):
            raise ValueError("sine_graph needs wavenumber > 0 and periods >= 1")
        if self.kind == "circle":
            if self.radius <= 0:
                raise ValueError("radius must be positive")
            if self.radius**2 - 2.0 * self.time <= 0:
                raise ValueError("circle has already shrunk to a point at this time")

    @property
    def offset(self) -> float:
        return CANONICAL_OFFSET[self.kind]

    def at(self, time: float) -> "SolutionSpec":
        return replace(self, time=time)


def calibration_bound(spec: SolutionSpec) -> float:
    """delta with cos(theta) >= delta everywhere, for families that have one."""
    if spec.kind == "line":
        return 1.0
    if spec.kind == "sine_graph":
        ak = spec.amplitude * spec.wavenumber
        if abs(ak) >= 1.0:
            raise ValueError("a calibration bound needs amplitude * wavenumber < 1")
        return 1.0 / np.sqrt(1.0 + ak**2)
    raise ValueError(f"{spec.kind} is not uniformly almost calibrated")


def circle_radius(r0: float, t: float) -> float:
    return float(np.sqrt(r0**2 - 2.0 * t))


def _centre_index(values) -> int:
    return int(np.argmin(np.abs(values - 0.5 * (values[0] + values[-1]))))


def sample(spec: SolutionSpec) -> PlanarCurve:
    """Vertices at uniform parameter steps; basepoint at the middle sample."""
    t, n = spec.time, spec.n
    if spec.kind in ("grim_reaper", "hairclip"):
        y = np.linspace(*spec.param_range, n)
        if spec.kind == "grim_reaper":
            x = -np.log(np.cos(y)) + t
        else:
            x = np.arcsinh(np.exp(-t) * np.cos(y))
        b = int(np.argmin(np.abs(y)))
        return PlanarCurve(np.column_stack([x, y]), OPEN, 0.0, b)
    if spec.kind == "line":
        s = np.linspace(*spec.param_range, n)
        d = np.array([np.cos(spec.direction), np.sin(spec.direction)])
        b = int(np.argmin(np.abs(s)))
        return PlanarCurve(s[:, None] * d, OPEN, 0.0, b)
    if spec.kind == "circle":
        a = 2.0 * np.pi * np.arange(n) / n
        rho = circle_radius(spec.radius, t)
        return PlanarCurve(rho * np.column_stack([np.cos(a), np.sin(a)]), X_PERIODIC, 0.0, 0)
    k, A = spec.wavenumber, spec.amplitude
    period = spec.periods * 2.0 * np.pi / k
    x = period * np.arange(n) / n
    # pure Fourier mode: exact at t = 0 only, later times need the flow
    y = A * np.sin(k * x)
    return PlanarCurve(np.column_stack([x, y]), X_PERIODIC, period, _centre_index(x))


# implicit forms u(x, y, t) with partials (u_t, u_x, u_y)


def implicit(kind: str, p, t: float, radius: float = 1.0):
    x, y = p[..., 0], p[..., 1]
    if kind == "grim_reaper":
        u = x + np.log(np.cos(y)) - t
        return u, -np.ones_like(x), np.ones_like(x), -np.tan(y)
    if kind == "hairclip":
        e = np.exp(-t)
        u = np.sinh(x) - e * np.cos(y)
        return u, e * np.cos(y), np.cosh(x), e * np.sin(y)
    if kind == "circle":
        u = x**2 + y**2 - (radius**2 - 2.0 * t)
        return u, 2.0 * np.ones_like(x), 2.0 * x, 2.0 * y
    if kind == "line":
        z = np.zeros_like(x)
        return z, z, z, z
    raise ValueError(f"{kind} has no implicit form")


def normal_velocity(kind: str, p, t: float, radius: float = 1.0):
    """Velocity of a material point of the exact flow moving purely normally."""
    _, ut, ux, uy = implicit(kind, p, t, radius)
    g2 = ux**2 + uy**2
    if kind == "line":
        return np.zeros_like(p)
    return -(ut / g2)[..., None] * np.stack([ux, uy], axis=-1)


def advance_material_point(kind: str, p, t0: float, t1: float, radius: float = 1.0, substeps: int = 8):
    """RK4 along the exact normal velocity, then one Newton projection onto u(., t1) = 0."""
    p = np.array(p, dtype=float)
    if kind == "line" or t1 == t0:
        return p
    h = (t1 - t0) / substeps
    t = t0
    for _ in range(substeps):
        k1 = normal_velocity(kind, p, t, radius)
        k2 = normal_velocity(kind, p + 0.5 * h * k1, t + 0.5 * h, radius)
        k3 = normal_velocity(kind, p + 0.5 * h * k2, t + 0.5 * h, radius)
        k4 = normal_velocity(kind, p + h * k3, t + h, radius)
        p = p + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    u, _, ux, uy = implicit(kind, p, t1, radius)
    g = np.stack([ux, uy], axis=-1)
    return p - (u / (ux**2 + uy**2))[..., None] * g


def translator_residual(curve: PlanarCurve, V) -> float:
    """max over interior vertices of |kappa N - V_perp|; zero exactly for translators."""
    V = np.asarray(V, dtype=float)
    if not np.any(V):
        raise ValueError("translation vector must be nonzero")
    kappa = curvature(curve)
    T, N = frame(curve)
    v_perp = V - (T @ V)[:, None] * T
    res = np.hypot(*(kappa[:, None] * N - v_perp).T)
    return float(res[curve.interior()].max())


def implicit_residual_hairclip(curve: PlanarCurve, t: float) -> float:
    x, y = curve.vertices.T
    return float(np.max(np.abs(np.sinh(x) - np.exp(-t) * np.cos(y))))


def hausdorff_to_exact(curve: PlanarCurve, kind: str, t: float, dense: int = 20001) -> float:
    """Symmetric Hausdorff distance between a polyline in (-pi/2, pi/2) ordinates and an exact graph over y.

    The exact curve is restricted to the ordinate span of the polyline, which
    shrinks over time because pinned endpoints move with the normal flow.
    """
    if kind == "grim_reaper":
        x_of = lambda y: -np.log(np.cos(y)) + t  # noqa: E731
    elif kind == "hairclip":
        x_of = lambda y: np.arcsinh(np.exp(-t) * np.cos(y))  # noqa: E731
    else:
        raise ValueError(f"no graph form for {kind}")
    v = curve.vertices
    y = np.linspace(v[:, 1].min(), v[:, 1].max(), dense)
    exact = np.column_stack([x_of(y), y])
    d1 = _points_to_polyline(v, exact).max()
    d2 = _points_to_polyline(exact, v).max()
    return float(max(d1, d2))


def _points_to_polyline(points, poly, chunk: int = 512):
    a, b = poly[:-1], poly[1:]
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    out = np.empty(len(points))
    for i in range(0, len(points), chunk):
        p = points[i : i + chunk, None, :]
        s = np.clip(np.einsum("mij,ij->mi", p - a, ab) / L2, 0.0, 1.0)
        q = a + s[..., None] * ab
        out[i : i + chunk] = np.sqrt(np.min(np.sum((p - q) ** 2, axis=-1), axis=1))
    return out
