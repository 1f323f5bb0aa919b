import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagflow import exact_solutions as ex
from lagflow import inequality_lab as il

from conftest import jittered_line
from lagflow.curve_geometry import PlanarCurve, kato_violation

pos = st.floats(1e-3, 1e3)


def test_domain_validation():
    with pytest.raises(ValueError):
        il.SampleDomain(a_range=(0.0, 1.0))
    with pytest.raises(ValueError):
        il.SampleDomain(p_range=(1.0, 2.0))
    with pytest.raises(ValueError):
        il.SampleDomain(b_range=(0.2, 1.0))
    with pytest.raises(ValueError):
        il.SampleDomain(sample_count=0)


def test_young_unit_instance():
    # (a, b, p) = (1, 1, 2): 1 <= eps + 1/eps, whose minimum 2 at eps = 1 is never tight
    eps = np.geomspace(1e-2, 1e2, 2001)
    rhs = eps * 1.0**2 + eps ** (-1.0) * 1.0**2
    assert np.all(il.young_holds(1.0, 1.0, eps, 2.0))
    assert rhs.min() == pytest.approx(2.0, rel=1e-5)
    assert eps[np.argmin(rhs)] == pytest.approx(1.0, rel=1e-2)


def test_young_needs_the_eps_power():
    # with eps^{-q/p} replaced by 1 the bound fails for small eps
    a, b, eps, p = 10.0, 5.0, 0.01, 2.0
    assert il.young_holds(a, b, eps, p)
    assert not a * b <= eps * a**p + b**2


@given(pos, pos, pos, st.floats(1.1, 10.0))
def test_young_property(a, b, eps, p):
    assert il.young_holds(a, b, eps, p)


@given(pos, pos, pos, st.floats(1e-3, 0.999), st.floats(0.0, 0.999))
def test_amgm_property(X, Y, Z, b, frac):
    assert il.amgm_mei_holds(X, Y, Z, frac * b, b)


def test_amgm_equality_case():
    # equality when X (b - v) = Y Z
    Y, Z, v, b = 1.0, 0.5, 0.25, 0.75
    d = b - v
    X = Y * Z / d
    assert il.amgm_mei_holds(X, Y, Z, v, b)
    lhs = 2 * X**2 / d**2 + 2 * Y**2 * Z**2 / d**4
    rhs = 4 * X * Y * Z / d**3
    assert lhs == pytest.approx(rhs, rel=1e-14)


def test_seeded_checks_are_reproducible_and_clean():
    dom = il.SampleDomain(sample_count=20_000, seed=7)
    assert il.young_check(dom) == 0
    assert il.amgm_mei_check(dom) == 0
    assert il.young_check(dom, chunk=3_000) == il.young_check(dom)


def test_checks_detect_a_broken_formula(monkeypatch):
    monkeypatch.setattr(il, "REL_SLACK", -0.5)
    dom = il.SampleDomain(sample_count=1000)
    assert il.young_check(dom) > 0
    assert il.amgm_mei_check(dom) > 0


def test_curve_kato_on_grim_reaper_is_zero():
    c = ex.sample(ex.SolutionSpec("grim_reaper", n=200))
    assert il.curve_kato_check(c) == 0.0


def test_curve_kato_on_jittered_sine():
    # equality where kappa keeps its sign, strict where a sign change sits in the stencil
    for seed in range(4):
        s = jittered_line(120, seed=seed, amp=0.45) * 3 * np.pi / 119 - 0.37
        c = PlanarCurve(np.column_stack([s, 0.3 * np.sin(s)]), "open", 0.0, 60)
        v = kato_violation(c)
        assert il.curve_kato_check(c) == 0.0
        assert np.count_nonzero(v < 0) >= 2
