import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagflow import exact_solutions as ex
from lagflow.curve_geometry import PlanarCurve, curvature, geometry, segment_lengths, tangent_angle


def test_spec_validation():
    with pytest.raises(ValueError):
        ex.SolutionSpec("ellipse")
    with pytest.raises(ValueError):
        ex.SolutionSpec("grim_reaper", param_range=(-1.6, 1.0))
    with pytest.raises(ValueError):
        ex.SolutionSpec("grim_reaper", param_range=(1.0, -1.0))
    with pytest.raises(ValueError):
        ex.SolutionSpec("sine_graph", wavenumber=0.0)
    with pytest.raises(ValueError):
        ex.SolutionSpec("circle", radius=1.0, time=0.5)
    with pytest.raises(ValueError):
        ex.SolutionSpec("line", n=3)


def test_grim_reaper_passes_through_origin():
    c = ex.sample(ex.SolutionSpec("grim_reaper", n=401))
    np.testing.assert_allclose(c.vertices[c.basepoint_index], [0.0, 0.0], atol=1e-15)


def test_hairclip_vertex_on_axis():
    c = ex.sample(ex.SolutionSpec("hairclip", n=401))
    x0 = c.vertices[c.basepoint_index, 0]
    assert x0 == pytest.approx(np.log(1 + np.sqrt(2)), rel=1e-14)
    assert x0 == pytest.approx(0.8814, abs=5e-5)


def test_line_has_zero_curvature():
    c = ex.sample(ex.SolutionSpec("line", n=50, param_range=(-3, 3), direction=0.7))
    np.testing.assert_allclose(curvature(c), 0.0, atol=1e-12)


def test_translator_residual_of_grim_reaper():
    r1 = ex.translator_residual(ex.sample(ex.SolutionSpec("grim_reaper", n=400)), (1.0, 0.0))
    r2 = ex.translator_residual(ex.sample(ex.SolutionSpec("grim_reaper", n=799)), (1.0, 0.0))
    assert r1 < 1e-3
    assert r1 / r2 >= 3.5


def test_translator_residual_of_line_with_parallel_vector():
    c = ex.sample(ex.SolutionSpec("line", n=30, direction=0.4))
    assert ex.translator_residual(c, (np.cos(0.4), np.sin(0.4))) < 1e-14


def test_circle_is_not_a_translator():
    c = ex.sample(ex.SolutionSpec("circle", n=256))
    assert ex.translator_residual(c, (1.0, 0.0)) >= 1.0 - 1e-3


def test_translator_residual_rejects_zero_vector():
    with pytest.raises(ValueError):
        ex.translator_residual(ex.sample(ex.SolutionSpec("grim_reaper", n=20)), (0.0, 0.0))


def test_hairclip_residuals():
    for t in (0.0, 0.3, 1.0):
        c = ex.sample(ex.SolutionSpec("hairclip", time=t, n=301))
        assert ex.implicit_residual_hairclip(c, t) < 1e-14
        shifted = ex.implicit_residual_hairclip(c, t + 0.1)
        # sinh x - e^{-t-0.1} cos y = (1 - e^{-0.1}) e^{-t} cos y, largest at y = 0
        assert shifted == pytest.approx((1 - np.exp(-0.1)) * np.exp(-t), rel=1e-12)
    g = ex.sample(ex.SolutionSpec("grim_reaper", n=301))
    assert ex.implicit_residual_hairclip(g, 0.0) > 0.5


def test_calibration_bound():
    assert ex.calibration_bound(ex.SolutionSpec("line")) == 1.0
    d = ex.calibration_bound(ex.SolutionSpec("sine_graph", amplitude=0.2, wavenumber=1.0))
    assert d == pytest.approx(1 / np.sqrt(1.04))
    with pytest.raises(ValueError):
        ex.calibration_bound(ex.SolutionSpec("sine_graph", amplitude=1.0, wavenumber=1.0))
    with pytest.raises(ValueError):
        ex.calibration_bound(ex.SolutionSpec("grim_reaper"))


def test_sine_graph_min_cos_matches_calibration_bound():
    errs = []
    for n in (64, 128):
        spec = ex.SolutionSpec("sine_graph", n=n, amplitude=0.5, wavenumber=1.0)
        c = ex.sample(spec)
        errs.append(abs(geometry(c).inf_cos_theta - ex.calibration_bound(spec)))
    assert errs[0] < 5e-3
    assert np.log2(errs[0] / errs[1]) > 1.8


def test_sine_graph_layout():
    c = ex.sample(ex.SolutionSpec("sine_graph", n=40, wavenumber=2.0, periods=3))
    assert c.periodic and c.period == pytest.approx(3 * np.pi)
    assert tangent_angle(c)[1] == 0


def test_circle_radius_law():
    assert ex.circle_radius(1.0, 0.375) == pytest.approx(0.5)
    c = ex.sample(ex.SolutionSpec("circle", n=64, time=0.375))
    np.testing.assert_allclose(np.hypot(*c.vertices.T), 0.5)


def test_hairclip_straightens():
    sups = []
    for t in (0.0, 0.5, 1.0, 2.0, 4.0):
        c = ex.sample(ex.SolutionSpec("hairclip", time=t, n=401))
        sups.append(np.abs(curvature(c)[c.interior()]).max())
    assert all(a > b for a, b in zip(sups, sups[1:]))


def test_material_point_of_grim_reaper():
    # along the normal flow d/dt tan y = -tan y
    p = np.array([-np.log(np.cos(1.3)), 1.3])
    q = ex.advance_material_point("grim_reaper", p, 0.0, 1.0, substeps=64)
    assert np.tan(q[1]) == pytest.approx(np.tan(1.3) * np.exp(-1.0), rel=1e-7)
    assert q[0] + np.log(np.cos(q[1])) - 1.0 == pytest.approx(0.0, abs=1e-12)


def test_material_point_of_circle_stays_on_ray():
    p = np.array([0.6, 0.8])
    q = ex.advance_material_point("circle", p, 0.0, 0.3)
    np.testing.assert_allclose(q, p * np.sqrt(1 - 0.6), rtol=1e-12)


@given(st.floats(0.0, 2.0), st.floats(0.01, 0.5))
def test_exact_normal_velocity_is_normal(t, y):
    p = np.array([np.arcsinh(np.exp(-t) * np.cos(y)), y])
    v = ex.normal_velocity("hairclip", p, t)
    _, _, ux, uy = ex.implicit("hairclip", p, t)
    tangent = np.array([-uy, ux])
    assert abs(v @ tangent) <= 1e-12 * (1 + np.linalg.norm(v) * np.linalg.norm(tangent))


def test_hausdorff_zero_on_exact_and_detects_shift():
    c = ex.sample(ex.SolutionSpec("grim_reaper", n=201, time=1.0))
    # an inscribed polyline misses the curve by at most the chord sagitta h^2 kappa / 8
    sagitta = segment_lengths(c).max() ** 2 * np.abs(curvature(c)).max() / 8
    assert ex.hausdorff_to_exact(c, "grim_reaper", 1.0) <= 1.01 * sagitta
    assert ex.hausdorff_to_exact(c, "grim_reaper", 0.0) == pytest.approx(1.0, abs=1e-3)
    with pytest.raises(ValueError):
        ex.hausdorff_to_exact(c, "circle", 0.0)


def test_grim_reaper_sample_is_planar_curve():
    c = ex.sample(ex.SolutionSpec("grim_reaper", n=11))
    assert isinstance(c, PlanarCurve) and c.topology == "open"
