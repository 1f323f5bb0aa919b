"""Empirical audit of the interior mean curvature estimate.

The quantity under test is ``sup |H| / (b - varphi)`` over the half cylinder
``D_{R/2, T/2}`` around a basepoint, where ``varphi = 1 - cos(theta)``.  It
should be bounded by ``C (1/R + 1/sqrt(R) + 1/sqrt(T))`` with C independent
of R and T.  The maximum-point argument behind that bound is replayed on the
discrete fields by :func:`maxpoint_audit`.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve_geometry import arclength_and_distance, curvature, gradient, laplacian, segment_lengths, tangent_angle
from .errors import DomainError, NotCalibratedError
from .flow_engine import Trajectory

_TIME_TOL = 1e-9


# --- cutoff -------------------------------------------------------------------


@dataclass(frozen=True)
class CutoffSpec:
    R: float
    T: float
    profile_power: int = 8

    def __post_init__(self):
        if not (self.R > 0 and self.T > 0):
            raise ValueError("R and T must be positive")
        p = self.profile_power
        if int(p) != p or p % 2 or p < 8:
            raise ValueError("profile_power must be an even integer >= 8")


def _profile(u, L, p):
    """(value, first, second derivative) of the 1-D profile in u >= 0."""
    u = np.abs(np.asarray(u, dtype=float))
    x = 0.5 * np.pi * (2.0 * u / L - 1.0)
    ramp = (u > 0.5 * L) & (u < L)
    c, s = np.cos(x), np.sin(x)
    w = np.pi / L
    val = np.where(u <= 0.5 * L, 1.0, np.where(ramp, c**p, 0.0))
    d1 = np.where(ramp, -p * w * c ** (p - 1) * s, 0.0)
    d2 = np.where(ramp, p * w**2 * ((p - 1) * c ** (p - 2) * s**2 - c**p), 0.0)
    return val, d1, d2


@dataclass(frozen=True)
class Cutoff:
    """eta(r, t) = eta1(|r|) eta2(|t|), plateau on [-R/2, R/2] x [-T/2, T/2].

    Derivatives are taken in |r| and |t|, so ``dr`` is the decreasing radial
    slope used for r >= 0.
    """

    spec: CutoffSpec

    def __call__(self, r, t):
        return self._e1(r)[0] * self._e2(t)[0]

    def _e1(self, r):
        return _profile(r, self.spec.R, self.spec.profile_power)

    def _e2(self, t):
        return _profile(t, self.spec.T, self.spec.profile_power)

    def dr(self, r, t):
        return self._e1(r)[1] * self._e2(t)[0]

    def drr(self, r, t):
        return self._e1(r)[2] * self._e2(t)[0]

    def dt(self, r, t):
        """Partial derivative in t; the sign accounts for eta2 depending on |t|."""
        return self._e1(r)[0] * self._e2(t)[1] * np.sign(t)


def build_cutoff(spec: CutoffSpec) -> Cutoff:
    return Cutoff(spec)


@dataclass(frozen=True)
class CutoffAudit:
    K_r: float  # sup |eta'| eta^{-3/4} R
    K_rr: float  # sup |eta''| eta^{-1/2} R^2
    K_t: float  # sup |eta_t| eta^{-1/2} T
    monotone: bool
    plateau: bool
    support: bool
    in_range: bool

    @property
    def finite(self) -> bool:
        return bool(np.isfinite([self.K_r, self.K_rr, self.K_t]).all())

    def ok(self) -> bool:
        return self.finite and self.monotone and self.plateau and self.support and self.in_range


def audit_cutoff(spec: CutoffSpec, samples: int = 10_000) -> CutoffAudit:
    """Sampled cutoff constants on the open ramps plus the structural properties."""
    if samples < 1000:
        raise ValueError("need at least 1000 samples")
    eta = build_cutoff(spec)
    R, T = spec.R, spec.T
    # open intervals: drop the endpoints where eta' = 0 or eta = 0
    r = np.linspace(0.5 * R, R, samples + 2)[1:-1]
    t = np.linspace(0.5 * T, T, samples + 2)[1:-1]
    e1, d1, d2 = _profile(r, R, spec.profile_power)
    e2, dt2, _ = _profile(t, T, spec.profile_power)
    K_r = float(np.max(np.abs(d1) * e1**-0.75) * R)
    K_rr = float(np.max(np.abs(d2) * e1**-0.5) * R**2)
    K_t = float(np.max(np.abs(dt2) * e2**-0.5) * T)
    if not np.isfinite([K_r, K_rr, K_t]).all():
        raise ArithmeticError("unbounded cutoff ratio: cutoff construction bug")

    rr = np.linspace(0.0, 1.5 * R, samples)
    tt = np.linspace(-1.5 * T, 1.5 * T, 64)
    grid = eta(rr[None, :], tt[:, None])
    monotone = bool(np.all(np.diff(grid, axis=1) <= 1e-15))
    half_r = np.linspace(-0.5 * R, 0.5 * R, 201)
    half_t = np.linspace(-0.5 * T, 0.5 * T, 201)
    plateau = bool(np.all(eta(half_r[None, :], half_t[:, None]) == 1.0))
    outside = eta(np.array([R, 1.2 * R, -R, 0.0, 0.0]), np.array([0.0, 0.0, 0.0, T, -1.3 * T]))
    support = bool(np.all(outside == 0.0))
    in_range = bool(np.all((grid >= 0.0) & (grid <= 1.0)))
    return CutoffAudit(K_r, K_rr, K_t, monotone, plateau, support, in_range)


def choose_b(delta: float) -> float:
    if not 0.0 < delta <= 1.0:
        raise ValueError("delta must lie in (0, 1]")
    return 1.0 - 0.5 * delta


# --- cylinders ----------------------------------------------------------------


@dataclass(frozen=True)
class CylinderSpec:
    basepoint: int
    R: float
    T: float
    center_time: float

    def __post_init__(self):
        if not (self.R > 0 and self.T > 0):
            raise ValueError("R and T must be positive")


@dataclass(frozen=True, eq=False)
class _Slice:
    """Fields of one snapshot needed by the estimate."""

    time: float
    r: np.ndarray
    kappa: np.ndarray
    varphi: np.ndarray
    curve: object


def _slices(traj: Trajectory, cyl: CylinderSpec, half: float, radius: float):
    times = traj.times
    lo, hi = cyl.center_time - cyl.T, cyl.center_time + cyl.T
    if times[0] > lo + _TIME_TOL or times[-1] < hi - _TIME_TOL:
        raise DomainError(
            f"trajectory covers [{times[0]:.6g}, {times[-1]:.6g}], cylinder needs [{lo:.6g}, {hi:.6g}]"
        )
    out = []
    for state in traj.states:
        if abs(state.time - cyl.center_time) > half * cyl.T + _TIME_TOL:
            continue
        c = state.curve
        if not 0 <= cyl.basepoint < c.n:
            raise DomainError(f"basepoint {cyl.basepoint} out of range")
        if c.basepoint_index != cyl.basepoint:
            c = c.with_vertices(c.vertices, basepoint_index=cyl.basepoint)
        _, r = arclength_and_distance(c)
        # intrinsic radius on the stored listing, both directions
        if min(r[0], r[-1]) < radius * (1.0 - 1e-12):
            raise DomainError(f"intrinsic radius {min(r[0], r[-1]):.4g} < {radius:.4g} at t={state.time:.6g}")
        theta, _ = tangent_angle(c, traj.offset)
        out.append(_Slice(state.time, r, curvature(c), 1.0 - np.cos(theta), c))
    return out


def _check_calibrated(slices, R, b):
    sup_phi = max(float(s.varphi[s.r <= R].max()) for s in slices)
    if not b > sup_phi:
        raise NotCalibratedError(f"not almost calibrated at level b={b:.6g} (sup varphi = {sup_phi:.6g})")
    if not b < 1.0:
        raise NotCalibratedError(f"not almost calibrated at level b={b:.6g}: need b < 1")
    return sup_phi


def sup_ratio(traj: Trajectory, cyl: CylinderSpec, b: float) -> float:
    """max |H| / (b - varphi) over vertices with r <= R/2 at times |t - center| <= T/2."""
    full = _slices(traj, cyl, 1.0, cyl.R)
    _check_calibrated(full, cyl.R, b)
    best = 0.0
    for s in full:
        if abs(s.time - cyl.center_time) > 0.5 * cyl.T + _TIME_TOL:
            continue
        m = s.r <= 0.5 * cyl.R
        best = max(best, float(np.max(np.abs(s.kappa[m]) / (b - s.varphi[m]))))
    return best


def bound_shape(R: float, T: float) -> float:
    return 1.0 / R + 1.0 / np.sqrt(R) + 1.0 / np.sqrt(T)


@dataclass(frozen=True)
class SweepCell:
    R: float
    T: float
    center_time: float
    sup_ratio: float
    ratio_to_bound: float


@dataclass(frozen=True)
class EstimateSweepResult:
    cells: tuple
    fitted_C: float
    fitted_C_small: float  # over the cells with the largest bound shape (small R, T)
    fitted_C_large: float  # over the cells with the smallest bound shape (large R, T)
    scaling_ok: bool

    @property
    def grid(self):
        return [(c.R, c.T, c.sup_ratio) for c in self.cells]

    def cell(self, R, T) -> SweepCell:
        for c in self.cells:
            if c.R == R and c.T == T:
                return c
        raise KeyError((R, T))


class CellError(ValueError):
    """A sweep cell failed; carries its coordinates."""

    def __init__(self, R, T, cause):
        super().__init__(f"cell R={R:g}, T={T:g}: {cause}")
        self.R, self.T, self.cause = R, T, cause


def sweep_and_fit(traj: Trajectory, basepoint: int, R_list, T_list, b: float,
                  center_time: float | None = None) -> EstimateSweepResult:
    """Grid of sup ratios and the fitted constant.

    ``center_time=None`` anchors each cylinder at the start of the run,
    centre ``t_start + T``, so that larger T reaches further into the past.
    """
    cells = []
    t0 = float(traj.times[0])
    for R in R_list:
        for T in T_list:
            c = t0 + T if center_time is None else center_time
            try:
                s = sup_ratio(traj, CylinderSpec(basepoint, R, T, c), b)
            except (DomainError, NotCalibratedError) as e:
                raise CellError(R, T, e) from e
            cells.append(SweepCell(float(R), float(T), float(c), s, float(s / bound_shape(R, T))))
    ratios = np.array([c.ratio_to_bound for c in cells])
    order = np.argsort([-bound_shape(c.R, c.T) for c in cells], kind="stable")
    half = len(cells) // 2
    small, large = ratios[order[:half]], ratios[order[len(cells) - half :]]
    c_small = float(small.max()) if half else float(ratios.max())
    c_large = float(large.max()) if half else float(ratios.max())
    ok = c_large <= 2.0 * c_small if c_small > 0 else c_large == 0.0
    return EstimateSweepResult(tuple(cells), float(ratios.max()), c_small, c_large, bool(ok))


# --- maximum-point audit ------------------------------------------------------


def young_constants(epsilon: float) -> dict:
    """Constants of the four Young steps, each splitting off (eps/4) psi Q^2.

    ab <= e a^p + e^{-q/p} b^q with e = eps/4.  Term (I) and (II) use
    exponents (4/3, 4) and (2, 2) on |grad psi|^4 / psi^3, terms (III1) and
    (III2) use (2, 2) on |eta''|^2 / psi and |eta_t|^2 / psi.
    """
    e = 0.25 * epsilon
    return {
        "I": 2.0**4 * e**-3.0,  # (2 Q^{3/2} |grad psi|) split as (psi^{3/4} Q^{3/2}) (2 |grad psi| psi^{-3/4})
        "II": 2.0**2 / e,  # (psi^{1/2} Q) (2 |grad psi|^2 psi^{-3/2})
        "III1": 1.0 / e,
        "III2": 1.0 / e,
    }


@dataclass(frozen=True)
class Link:
    lhs: float
    rhs: float
    tol: float

    @property
    def ok(self) -> bool:
        return self.lhs <= self.rhs + self.tol


@dataclass(frozen=True)
class Chain:
    """A chain lhs <= step1 <= step2 ...; each link is (left value, right value)."""

    name: str
    links: tuple

    @property
    def lhs(self) -> float:
        return self.links[0].lhs

    @property
    def rhs(self) -> float:
        return self.links[-1].rhs

    @property
    def satisfied(self) -> bool:
        return all(link.ok for link in self.links)


@dataclass(frozen=True)
class MaxpointReport:
    snapshot: int
    vertex: int
    time: float
    r: float
    psi: float
    Q: float
    epsilon: float
    C_epsilon: float
    laplacian_comparison_term: float  # (n-1)/r |eta'| Q, identically 0 for curves
    core: Link  # 2(1-b)(b-varphi) psi Q^2 <= (I) + (II) + (III)
    terms: dict  # name -> Chain for I, II, III1, III2
    final: Link
    meimei_residual: float
    mei: Link

    @property
    def all_satisfied(self) -> bool:
        return all(c.satisfied for c in self.terms.values()) and self.final.ok

    def as_dict(self):
        out = {
            "snapshot": self.snapshot, "vertex": self.vertex, "time": self.time, "r": self.r,
            "psi": self.psi, "Q": self.Q, "epsilon": self.epsilon, "C_epsilon": self.C_epsilon,
            "core_lhs": self.core.lhs, "core_rhs": self.core.rhs, "core_ok": self.core.ok,
            "final_lhs": self.final.lhs, "final_rhs": self.final.rhs, "final_ok": self.final.ok,
            "meimei_residual": self.meimei_residual, "mei_ok": self.mei.ok,
        }
        for name, chain in self.terms.items():
            out[f"{name}_lhs"], out[f"{name}_rhs"], out[f"{name}_ok"] = chain.lhs, chain.rhs, chain.satisfied
        return out


def maxpoint_audit(traj: Trajectory, cyl: CylinderSpec, b: float, epsilon: float | None = None,
                   profile_power: int = 8, slack: float = 1.0, samples: int = 10_000) -> MaxpointReport:
    """Replay the maximum-point inequality chain at the discrete argmax of psi Q.

    Q = |H|^2 / (b - varphi)^2 and psi = eta(r, t - center).  The argmax runs
    over the open support psi > 0; ties go to the smallest vertex index, then
    the earliest snapshot.  Every link is accepted up to a tolerance
    ``slack * (h + dt) * (|lhs| + |rhs|)``.  Derivatives of psi go through
    the chain rule on the discrete distance r.  The cutoff constants are the
    sampled suprema of :func:`audit_cutoff`, so C(eps) is explicit.
    """
    slices = _slices(traj, cyl, 1.0, cyl.R)
    sup_phi = _check_calibrated(slices, cyl.R, b)
    margin = 2.0 * (1.0 - b) * (b - sup_phi)
    if epsilon is None:
        epsilon = 0.5 * margin
    if not 0.0 < epsilon < margin:
        raise ValueError(f"epsilon must lie in (0, {margin:.6g})")
    spec = CutoffSpec(cyl.R, cyl.T, profile_power)
    eta = build_cutoff(spec)
    K = audit_cutoff(spec, samples)
    Y = young_constants(epsilon)
    R, T = cyl.R, cyl.T
    C_eps = (Y["I"] + Y["II"]) * K.K_r**4 + Y["III1"] * K.K_rr**2 + Y["III2"] * K.K_t**2

    best, where = -1.0, None
    for k, s in enumerate(slices):
        tau = s.time - cyl.center_time
        psi = eta(s.r, tau)
        q = s.kappa**2 / (b - s.varphi) ** 2
        v = np.where(psi > 0.0, psi * q, -np.inf)
        i = int(np.argmax(v))  # first index among ties
        if v[i] > best:
            best, where = float(v[i]), (k, i)
    if where is None or best < 0:
        raise RuntimeError("argmax outside the cutoff support")
    k, i = where
    s = slices[k]
    c = s.curve
    tau = s.time - cyl.center_time
    times = np.array([x.time for x in slices])
    dt_loc = float(np.max(np.diff(times))) if len(times) > 1 else 0.0
    h_loc = float(segment_lengths(c).max())
    scale_tol = slack * (h_loc + dt_loc)

    def link(lhs, rhs):
        lhs, rhs = float(lhs), float(rhs)
        return Link(lhs, rhs, scale_tol * (abs(lhs) + abs(rhs)))

    psi_f = eta(s.r, tau)
    q_f = s.kappa**2 / (b - s.varphi) ** 2
    psi, Q, phi, kap = psi_f[i], q_f[i], s.varphi[i], s.kappa[i]
    g_phi = gradient(s.varphi, c)[i]
    r_i = s.r[i]
    e_r = abs(eta.dr(r_i, tau))
    e_rr = abs(eta.drr(r_i, tau))
    e_t = eta.dt(r_i, tau)
    # chain rule through the discrete distance function; exact zeros on the plateau
    grad_r = gradient(s.r, c)[i]
    lap_r = laplacian(s.r, c)[i] if (c.periodic or 0 < i < c.n - 1) else 0.0
    g_psi = -e_r * grad_r
    lap_psi = -e_r * lap_r - e_rr * grad_r**2 if e_rr or e_r else 0.0
    bp = b - phi
    q4 = 0.25 * epsilon * psi * Q**2

    # (I) chain: Cauchy-Schwarz, |grad cos| <= |H|, Young, |grad psi| <= |eta'|, cutoff constant
    term_I = 2.0 * Q * g_phi * g_psi / bp
    I_links = (
        link(term_I, 2.0 * Q * abs(g_phi) * abs(g_psi) / bp),
        link(2.0 * Q * abs(g_phi) * abs(g_psi) / bp, 2.0 * Q**1.5 * abs(g_psi)),
        link(2.0 * Q**1.5 * abs(g_psi), q4 + Y["I"] * g_psi**4 / psi**3),
        link(q4 + Y["I"] * g_psi**4 / psi**3, q4 + Y["I"] * e_r**4 / psi**3),
        link(q4 + Y["I"] * e_r**4 / psi**3, q4 + Y["I"] * K.K_r**4 / R**4),
    )
    term_II = 2.0 * Q * g_psi**2 / psi
    II_links = (
        link(term_II, q4 + Y["II"] * g_psi**4 / psi**3),
        link(q4 + Y["II"] * g_psi**4 / psi**3, q4 + Y["II"] * e_r**4 / psi**3),
        link(q4 + Y["II"] * e_r**4 / psi**3, q4 + Y["II"] * K.K_r**4 / R**4),
    )
    lap_term = 0.0 * e_r * Q / max(r_i, 1e-300)  # n - 1 = 0
    term_III1 = -Q * lap_psi
    III1_links = (
        link(term_III1, Q * e_rr + lap_term),
        link(Q * e_rr + lap_term, q4 + Y["III1"] * e_rr**2 / psi),
        link(q4 + Y["III1"] * e_rr**2 / psi, q4 + Y["III1"] * K.K_rr**2 / R**4),
    )
    term_III2 = Q * e_t
    III2_links = (
        link(term_III2, Q * abs(e_t)),
        link(Q * abs(e_t), q4 + Y["III2"] * e_t**2 / psi),
        link(q4 + Y["III2"] * e_t**2 / psi, q4 + Y["III2"] * K.K_t**2 / T**2),
    )
    terms = {
        "I": Chain("I", I_links),
        "II": Chain("II", II_links),
        "III1": Chain("III1", III1_links),
        "III2": Chain("III2", III2_links),
    }
    main = 2.0 * (1.0 - b) * bp * psi * Q**2
    core = link(main, term_I + term_II + term_III1 + term_III2)
    final = link(main, epsilon * psi * Q**2 + C_eps * (1.0 / R**4 + 1.0 / R**2 + 1.0 / T**2))

    g_h2 = gradient(s.kappa**2, c)[i]
    g_q = gradient(q_f, c)[i]
    meimei = 2.0 * g_h2 * g_phi / bp**3 + 4.0 * kap**2 * g_phi**2 / bp**4 - 2.0 * g_phi * g_q / bp
    X, Yv, Z = abs(gradient(s.kappa, c)[i]), abs(g_phi), abs(kap)
    mei = Link(4.0 * X * Yv * Z / bp**3, 2.0 * X**2 / bp**2 + 2.0 * Yv**2 * Z**2 / bp**4, 0.0)

    return MaxpointReport(
        snapshot=int(np.searchsorted(traj.times, s.time - _TIME_TOL)),
        vertex=i, time=s.time, r=float(r_i), psi=float(psi), Q=float(Q),
        epsilon=float(epsilon), C_epsilon=float(C_eps), laplacian_comparison_term=float(lap_term),
        core=core, terms=terms, final=final, meimei_residual=float(meimei), mei=mei,
    )
