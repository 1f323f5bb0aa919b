"""Seeded sampling checks of the scalar inequalities used by the estimate.

These are classical, so sampling is not meant to prove anything; it catches
sign and exponent slips in the formulas the harness evaluates.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve_geometry import PlanarCurve, kato_violation

# allowed floating-point excess, relative to the larger side
REL_SLACK = 1e-12


@dataclass(frozen=True)
class SampleDomain:
    """Ranges for the sampled quantities; positive ones are drawn log-uniformly.

    ``v`` and ``b`` are drawn with 0 < v < b < 1 as ``b ~ U(b_range)`` then
    ``v ~ U(0, b)``.
    """

    a_range: tuple = (1e-3, 1e3)
    bhat_range: tuple = (1e-3, 1e3)
    eps_range: tuple = (1e-3, 1e3)
    p_range: tuple = (1.1, 10.0)
    X_range: tuple = (1e-3, 1e3)
    Y_range: tuple = (1e-3, 1e3)
    Z_range: tuple = (1e-3, 1e3)
    b_range: tuple = (1e-3, 1.0 - 1e-3)
    sample_count: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        for name in ("a_range", "bhat_range", "eps_range", "X_range", "Y_range", "Z_range"):
            lo, hi = getattr(self, name)
            if not 0.0 < lo <= hi:
                raise ValueError(f"{name} must be positive and ordered")
        lo, hi = self.p_range
        if not 1.0 < lo <= hi:
            raise ValueError("p_range must lie above 1")
        lo, hi = self.b_range
        if not 0.0 < lo <= hi < 1.0:
            raise ValueError("b_range must lie inside (0, 1)")
        if self.sample_count < 1:
            raise ValueError("sample_count must be positive")


def _loguniform(rng, rng_range, size):
    lo, hi = rng_range
    return np.exp(rng.uniform(np.log(lo), np.log(hi), size))


def young_holds(a, b, eps, p):
    """Boolean mask of ab <= eps a^p + eps^{-q/p} b^q with q = p / (p - 1)."""
    a, b, eps, p = np.broadcast_arrays(*map(np.asarray, (a, b, eps, p)))
    q = p / (p - 1.0)
    lhs = a * b
    rhs = eps * a**p + eps ** (-q / p) * b**q
    return lhs <= rhs * (1.0 + REL_SLACK)


def young_check(domain: SampleDomain = SampleDomain(), chunk: int = 250_000) -> int:
    rng = np.random.default_rng(domain.seed)
    bad = 0
    for start in range(0, domain.sample_count, chunk):
        m = min(chunk, domain.sample_count - start)
        a = _loguniform(rng, domain.a_range, m)
        b = _loguniform(rng, domain.bhat_range, m)
        eps = _loguniform(rng, domain.eps_range, m)
        p = rng.uniform(*domain.p_range, m)
        ok = young_holds(a, b, eps, p)
        bad += int(np.count_nonzero(~ok))
    return bad


def amgm_mei_holds(X, Y, Z, v, b):
    """2X^2/(b-v)^2 + 2Y^2Z^2/(b-v)^4 >= 4XYZ/(b-v)^3."""
    d = np.asarray(b) - np.asarray(v)
    lhs = 2.0 * X**2 / d**2 + 2.0 * Y**2 * Z**2 / d**4
    rhs = 4.0 * X * Y * Z / d**3
    return lhs >= rhs * (1.0 - REL_SLACK)


def amgm_mei_check(domain: SampleDomain = SampleDomain(), chunk: int = 250_000) -> int:
    rng = np.random.default_rng(domain.seed)
    bad = 0
    for start in range(0, domain.sample_count, chunk):
        m = min(chunk, domain.sample_count - start)
        X = _loguniform(rng, domain.X_range, m)
        Y = _loguniform(rng, domain.Y_range, m)
        Z = _loguniform(rng, domain.Z_range, m)
        b = rng.uniform(*domain.b_range, m)
        v = b * rng.uniform(0.0, 1.0, m)
        bad += int(np.count_nonzero(~amgm_mei_holds(X, Y, Z, v, b)))
    return bad


def curve_kato_check(curve: PlanarCurve, guard: float = 1e-8) -> float:
    """Largest (d|k|/ds)^2 - (dk/ds)^2 over guarded interior vertices; 0 if none qualify."""
    v = kato_violation(curve, guard)
    return float(v.max()) if len(v) else 0.0
