"""Discrete differential geometry of planar curves.

A curve in C = R^2 is trivially Lagrangian.  Its Lagrangian angle is the
tangent direction angle (plus a constant phase), its mean curvature vector is
kappa * N, and the intrinsic distance is arclength.  Everything here works on
vertex arrays with non-uniform spacing.

Periodic curves store one fundamental domain of N distinct vertices; the
neighbour after the last vertex is ``vertices[0] + (period, 0)``.  A closed
loop is the special case ``period == 0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CurveError, UnderResolvedError

OPEN = "open"
X_PERIODIC = "x_periodic"

_TOPOLOGIES = (OPEN, X_PERIODIC)


@dataclass(frozen=True, eq=False)
class PlanarCurve:
    """Ordered vertex list with topology flag; one time slice of the flow."""

    vertices: np.ndarray
    topology: str = OPEN
    period: float = 0.0
    basepoint_index: int = 0

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2:
            raise CurveError(f"vertices must have shape (N, 2), got {v.shape}")
        if v.shape[0] < 4:
            raise CurveError("a curve needs at least 4 vertices")
        if not np.all(np.isfinite(v)):
            raise CurveError("non-finite vertex coordinates")
        if self.topology not in _TOPOLOGIES:
            raise CurveError(f"unknown topology {self.topology!r}")
        if self.topology == OPEN and self.period != 0.0:
            raise CurveError("open curves carry no period")
        if not 0 <= self.basepoint_index < v.shape[0]:
            raise CurveError(f"basepoint_index {self.basepoint_index} out of range")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "period", float(self.period))
        object.__setattr__(self, "basepoint_index", int(self.basepoint_index))
        if np.any(segment_lengths(self) <= 0.0):
            raise CurveError("degenerate segment: consecutive vertices coincide")

    @property
    def n(self) -> int:
        return self.vertices.shape[0]

    @property
    def periodic(self) -> bool:
        return self.topology == X_PERIODIC

    @property
    def shift(self) -> np.ndarray:
        return np.array([self.period, 0.0])

    def interior(self, margin: int = 1) -> np.ndarray:
        """Vertex indices used for suprema (all of them on periodic curves)."""
        if self.periodic:
            return np.arange(self.n)
        return np.arange(margin, self.n - margin)

    def with_vertices(self, vertices, basepoint_index=None) -> "PlanarCurve":
        b = self.basepoint_index if basepoint_index is None else basepoint_index
        return PlanarCurve(vertices, self.topology, self.period, b)

    def translated(self, vector) -> "PlanarCurve":
        return self.with_vertices(self.vertices + np.asarray(vector, dtype=float))


def segment_vectors(curve: PlanarCurve) -> np.ndarray:
    v = curve.vertices
    d = np.diff(v, axis=0)
    if curve.periodic:
        d = np.vstack([d, v[0] + curve.shift - v[-1]])
    return d


def segment_lengths(curve: PlanarCurve) -> np.ndarray:
    return np.hypot(*segment_vectors(curve).T)


def arclength_and_distance(curve: PlanarCurve):
    """Per-segment lengths and the intrinsic distance r from the basepoint.

    On periodic curves r is measured along the fundamental listing, i.e. on
    the universal cover, in both directions from the basepoint.
    """
    h = segment_lengths(curve)
    s = np.concatenate([[0.0], np.cumsum(h[: curve.n - 1])])
    r = np.abs(s - s[curve.basepoint_index])
    return h, r


def neighbour_spacing(curve: PlanarCurve):
    """(h_minus, h_plus) per vertex; NaN where an open endpoint has no neighbour."""
    h = segment_lengths(curve)
    if curve.periodic:
        return np.roll(h, 1), h.copy()
    nan = np.array([np.nan])
    return np.concatenate([nan, h]), np.concatenate([h, nan])


def _wrap(a):
    return (a + np.pi) % (2.0 * np.pi) - np.pi


def turning_angles(curve: PlanarCurve) -> np.ndarray:
    """Signed exterior angle at each vertex (left turn positive); 0 at open endpoints."""
    d = segment_vectors(curve)
    alpha = np.arctan2(d[:, 1], d[:, 0])
    if curve.periodic:
        tau = _wrap(alpha - np.roll(alpha, 1))
    else:
        tau = np.concatenate([[0.0], _wrap(np.diff(alpha)), [0.0]])
    bad = np.abs(tau) >= np.pi - 1e-12
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise UnderResolvedError(f"turning angle of pi at vertex {i}; refine the curve")
    return tau


def tangent_angle(curve: PlanarCurve, offset: float = 0.0):
    """Continuously unwrapped vertex tangent angle and the winding number.

    The vertex angle is the mean of the two adjacent segment angles, so the
    difference of neighbouring values is half the sum of their turning angles.
    """
    d = segment_vectors(curve)
    tau = turning_angles(curve)
    alpha0 = np.arctan2(d[0, 1], d[0, 0])
    n = curve.n
    if curve.periodic:
        # segment i leaves vertex i; vertex i sits between segments i-1 and i
        alpha = alpha0 + np.concatenate([[0.0], np.cumsum(tau[1:])])
        theta = alpha - 0.5 * tau
        winding = int(np.rint(tau.sum() / (2.0 * np.pi)))
    else:
        alpha = alpha0 + np.concatenate([[0.0], np.cumsum(tau[1 : n - 1])])
        theta = np.empty(n)
        theta[0] = alpha[0]
        theta[-1] = alpha[-1]
        theta[1:-1] = alpha[:-1] + 0.5 * tau[1:-1]
        winding = 0
    return theta + offset, winding


def curvature(curve: PlanarCurve) -> np.ndarray:
    """Turning angle over dual length, so kappa = d(theta)/ds holds discretely."""
    tau = turning_angles(curve)
    hm, hp = neighbour_spacing(curve)
    with np.errstate(invalid="ignore"):
        kappa = tau / (0.5 * (hm + hp))
    if not curve.periodic:
        kappa[0] = kappa[1]
        kappa[-1] = kappa[-2]
    return kappa


def frame(curve: PlanarCurve):
    """Unit tangent T and normal N = J T at the vertices."""
    theta, _ = tangent_angle(curve)
    t = np.column_stack([np.cos(theta), np.sin(theta)])
    return t, np.column_stack([-t[:, 1], t[:, 0]])


def _neighbours(values, curve):
    f = np.asarray(values, dtype=float)
    if f.shape[0] != curve.n:
        raise CurveError(f"field has {f.shape[0]} values, curve has {curve.n} vertices")
    if curve.periodic:
        return np.roll(f, 1, axis=0), f, np.roll(f, -1, axis=0)
    nan = np.full((1,) + f.shape[1:], np.nan)
    return np.concatenate([nan, f[:-1]]), f, np.concatenate([f[1:], nan])


def gradient(values, curve: PlanarCurve) -> np.ndarray:
    """Signed df/ds: second-order non-uniform central difference, one-sided at open ends."""
    fm, f, fp = _neighbours(values, curve)
    hm, hp = neighbour_spacing(curve)
    with np.errstate(invalid="ignore"):
        g = (hm**2 * fp - hp**2 * fm + (hp**2 - hm**2) * f) / (hm * hp * (hm + hp))
    if not curve.periodic:
        g[0] = (f[1] - f[0]) / hp[0]
        g[-1] = (f[-1] - f[-2]) / hm[-1]
    return g


def gradient_norm(values, curve: PlanarCurve) -> np.ndarray:
    return np.abs(gradient(values, curve))


def laplacian(values, curve: PlanarCurve) -> np.ndarray:
    """Non-uniform three-point second derivative in arclength; NaN at open endpoints."""
    fm, f, fp = _neighbours(values, curve)
    hm, hp = neighbour_spacing(curve)
    return 2.0 * (fm / (hm * (hm + hp)) - f / (hm * hp) + fp / (hp * (hm + hp)))


@dataclass(frozen=True, eq=False)
class GeometryReport:
    theta: np.ndarray
    winding_number: int
    cos_theta: np.ndarray
    varphi: np.ndarray
    kappa: np.ndarray
    abs_H: np.ndarray
    distance_r: np.ndarray
    inf_cos_theta: float
    arclengths: np.ndarray


def geometry(curve: PlanarCurve, offset: float = 0.0) -> GeometryReport:
    theta, winding = tangent_angle(curve, offset)
    cos_theta = np.cos(theta)
    kappa = curvature(curve)
    h, r = arclength_and_distance(curve)
    return GeometryReport(
        theta=theta,
        winding_number=winding,
        cos_theta=cos_theta,
        varphi=1.0 - cos_theta,
        kappa=kappa,
        abs_H=np.abs(kappa),
        distance_r=r,
        inf_cos_theta=float(cos_theta[curve.interior()].min()),
        arclengths=h,
    )


def kato_violation(curve: PlanarCurve, guard: float = 1e-8) -> np.ndarray:
    """(d|kappa|/ds)^2 - (dkappa/ds)^2 at interior vertices with |kappa| > guard."""
    kappa = curvature(curve)
    lhs = gradient(np.abs(kappa), curve) ** 2
    rhs = gradient(kappa, curve) ** 2
    idx = curve.interior()
    keep = idx[np.abs(kappa[idx]) > guard]
    return lhs[keep] - rhs[keep]


def product_lift_forms(kappa, normal):
    """Second fundamental form, H and P of c x R in C^2 = R^4.

    Coordinates are (x1, y1, x2, y2); the curve lives in the first factor and
    e2 = d/dx2 spans the flat factor.  Returns |A|^2, H (as R^4 vectors), |P|^2.
    """
    m = len(kappa)
    A = np.zeros((m, 2, 2, 4))
    A[:, 0, 0, :2] = kappa[:, None] * normal
    H = np.einsum("mii...->m...", A)
    norm_A2 = np.einsum("mijk,mijk->m", A, A)
    P = np.einsum("mijk,mk->mij", A, H)
    norm_P2 = np.einsum("mij,mij->m", P, P)
    return norm_A2, H, norm_P2


@dataclass(frozen=True)
class InequalityAudit:
    """Largest pointwise violation of each inequality (<= 0 means it holds)."""

    cos_h: float  # |grad cos(theta)|^2 - |H|^2
    kato: float  # (d|k|/ds)^2 - (dk/ds)^2
    scalar_curvature: float  # max |Scal| = max | |H|^2 - |A|^2 | of the product lift
    p_bound: float  # max |P|^2 - |A|^2 |H|^2
    p_identity: float  # max | |P|^2 - |H|^4 |

    def holds(self, slack: float = 0.0) -> bool:
        return all(v <= slack for v in (self.cos_h, self.kato, self.p_bound))


def _max_or_zero(x) -> float:
    return float(np.max(x)) if len(x) else 0.0


def inequality_audit(curve: PlanarCurve, offset: float = 0.0) -> InequalityAudit:
    idx = curve.interior()
    theta, _ = tangent_angle(curve, offset)
    kappa = curvature(curve)
    grad_cos = gradient(np.cos(theta), curve)
    cos_h = grad_cos[idx] ** 2 - kappa[idx] ** 2
    _, normal = frame(curve)
    norm_A2, H, norm_P2 = product_lift_forms(kappa[idx], normal[idx])
    norm_H2 = np.einsum("mk,mk->m", H, H)
    return InequalityAudit(
        cos_h=_max_or_zero(cos_h),
        kato=_max_or_zero(kato_violation(curve)),
        scalar_curvature=_max_or_zero(np.abs(norm_H2 - norm_A2)),
        p_bound=_max_or_zero(norm_P2 - norm_A2 * norm_H2),
        p_identity=_max_or_zero(np.abs(norm_P2 - norm_H2**2)),
    )
