import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from lagflow import exact_solutions as ex
from lagflow import flow_engine as fe
from lagflow.curve_geometry import PlanarCurve, curvature, geometry, segment_lengths
from lagflow.errors import CFLViolation, SpacingCollapse


def sup_kappa(curve):
    return float(np.abs(curvature(curve)[curve.interior()]).max())


# --- configuration ------------------------------------------------------------


def test_config_validation():
    grim = ex.SolutionSpec("grim_reaper", n=20)
    sine = ex.SolutionSpec("sine_graph", n=20)
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, 1.0, 0.5)
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, safety=0.6)
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, scheme="rk4")
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, scheme="fixed", dt=None)
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, boundary="periodic")
    with pytest.raises(ValueError):
        fe.FlowConfig(sine, boundary="pin_to_exact")
    with pytest.raises(ValueError):
        fe.FlowConfig(ex.sample(grim), boundary="pin_to_exact")
    with pytest.raises(ValueError):
        fe.FlowConfig(grim, snapshot_stride=0)


def test_zero_length_run_returns_initial_state():
    spec = ex.SolutionSpec("grim_reaper", n=30)
    traj = fe.run(fe.FlowConfig(spec, 0.5, 0.5))
    assert len(traj) == 1
    np.testing.assert_array_equal(traj[0].curve.vertices, ex.sample(spec.at(0.5)).vertices)
    assert traj[0].time == 0.5


def test_run_is_deterministic():
    cfg = fe.FlowConfig(ex.SolutionSpec("grim_reaper", n=41), 0.0, 0.05, dt=5e-3)
    a, b = fe.run(cfg), fe.run(cfg)
    for s, t in zip(a.states, b.states):
        np.testing.assert_array_equal(s.curve.vertices, t.curve.vertices)


# --- stepping -----------------------------------------------------------------


@pytest.mark.parametrize("scheme", ["fixed", "semi_implicit", "explicit_cfl"])
def test_line_is_stationary(scheme):
    spec = ex.SolutionSpec("line", n=41, param_range=(-2, 2), direction=1.1)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.2, scheme=scheme, dt=1e-3 if scheme == "fixed" else 0.02))
    x0 = traj[0].curve.vertices
    for s in traj.states:
        np.testing.assert_allclose(s.curve.vertices, x0, atol=1e-13)


def test_explicit_step_checks_cfl():
    c = ex.sample(ex.SolutionSpec("grim_reaper", n=41))
    dt = 0.5 * segment_lengths(c).min() ** 2
    state = fe.FlowState(c, 0.0)
    exact = fe._Exact("grim_reaper", 1.0, np.array([c.vertices[0], c.vertices[-1]]))
    with pytest.raises(CFLViolation):
        fe.step(state, dt, "explicit", "pin_to_exact", exact, safety=0.4)
    with pytest.raises(ValueError):
        fe.step(state, 0.0, "explicit", "pin_to_exact", exact)


def test_explicit_step_moves_normally():
    c = ex.sample(ex.SolutionSpec("sine_graph", n=64))
    new = fe.step(fe.FlowState(c, 0.0), 1e-4, "explicit", "periodic")
    _, N = fe.frame(c)
    d = (new.curve.vertices - c.vertices) / 1e-4
    np.testing.assert_allclose(d, curvature(c)[:, None] * N, atol=1e-10)


def test_fixed_scheme_rejects_large_dt():
    spec = ex.SolutionSpec("grim_reaper", n=101)
    with pytest.raises(CFLViolation):
        fe.run(fe.FlowConfig(spec, 0.0, 0.1, scheme="fixed", dt=1e-2))


def test_shrinking_circle_radius():
    spec = ex.SolutionSpec("circle", n=128)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.375, scheme="explicit_cfl", boundary="periodic", snapshot_stride=10**9))
    rho = np.hypot(*traj[-1].curve.vertices.T)
    assert traj[-1].time == 0.375
    assert abs(rho.mean() - 0.5) < 5e-3
    assert np.ptp(rho) < 1e-10


def test_circle_collapses_near_extinction():
    # the polygon's explicit extinction time sits just after 1/2
    spec = ex.SolutionSpec("circle", n=64)
    cfg = fe.FlowConfig(spec, 0.0, 0.51, scheme="explicit_cfl", boundary="periodic", snapshot_stride=10**9)
    with pytest.raises(SpacingCollapse) as info:
        fe.run(cfg)
    assert 0.49 < info.value.time < 0.51
    assert len(info.value.trajectory) >= 1


def test_semi_implicit_grim_reaper_translates():
    spec = ex.SolutionSpec("grim_reaper", n=131)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.5, dt=4e-3, snapshot_stride=25))
    assert ex.hausdorff_to_exact(traj[-1].curve, "grim_reaper", 0.5) < 5e-3


def test_free_neumann_keeps_endpoint_offset():
    spec = ex.SolutionSpec("grim_reaper", n=61)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.05, dt=5e-3, boundary="free_neumann"))
    for s in traj.states:
        assert np.all(np.isfinite(s.curve.vertices))
    assert traj[-1].curve.vertices[0, 0] > traj[0].curve.vertices[0, 0]


# --- sine graph properties ----------------------------------------------------


def test_sine_sup_curvature_strictly_decreases(sine_short):
    sups = [sup_kappa(s.curve) for s in sine_short.states]
    assert all(a > b for a, b in zip(sups, sups[1:]))


def test_sine_length_decreases_and_min_cos_grows(sine_short):
    lengths = [fe.length(s.curve) for s in sine_short.states]
    assert all(a > b for a, b in zip(lengths, lengths[1:]))
    mins = [geometry(s.curve).inf_cos_theta for s in sine_short.states]
    t = sine_short.times
    assert all(b - a >= -1e-6 * (t1 - t0) for a, b, t0, t1 in zip(mins, mins[1:], t, t[1:]))


def test_sine_graph_property_preserved(sine_short):
    for s in sine_short.states:
        x = s.curve.vertices[:, 0]
        assert np.all(np.diff(x) > 0)
        assert x[0] + s.curve.period > x[-1]


def test_sine_decays_like_linear_mode(sine_short):
    # linearised graph flow damps sin x by e^{-t}
    amp = [np.ptp(s.curve.vertices[:, 1]) / 2 for s in sine_short.states]
    assert amp[-1] / amp[0] == pytest.approx(np.exp(-2.0), rel=0.05)


# --- reparametrization --------------------------------------------------------


def test_reparametrize_uniform_and_on_curve():
    spec = ex.SolutionSpec("grim_reaper", n=81)
    c = ex.sample(spec)
    r = fe.reparametrize(c)
    h = segment_lengths(r)
    assert np.ptp(h) / h.mean() < 1e-3
    x, y = r.vertices.T
    np.testing.assert_allclose(x, -np.log(np.cos(y)), atol=1e-4)
    assert abs(r.vertices[r.basepoint_index, 1]) < h.max()


def test_reparametrize_periodic():
    c = ex.sample(ex.SolutionSpec("sine_graph", n=64, amplitude=0.5))
    r = fe.reparametrize(c)
    h = segment_lengths(r)
    assert r.period == c.period
    assert np.ptp(h) / h.mean() < 1e-3
    np.testing.assert_allclose(r.vertices[:, 1], 0.5 * np.sin(r.vertices[:, 0]), atol=1e-4)


def test_run_with_reparametrization_and_rejection():
    spec = ex.SolutionSpec("sine_graph", n=64)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.2, dt=1e-2, boundary="periodic", reparametrize_every=5))
    assert len(traj) == 21
    with pytest.raises(ValueError):
        fe.evolution_residuals(traj)


# --- residuals ----------------------------------------------------------------


def test_residuals_reject_short_trajectories():
    spec = ex.SolutionSpec("grim_reaper", n=30)
    traj = fe.run(fe.FlowConfig(spec, 0.0, 1e-3, dt=1e-3))
    with pytest.raises(ValueError):
        fe.evolution_residuals(traj)


def test_residuals_vanish_on_line(line_traj):
    r = fe.evolution_residuals(line_traj)
    assert max(r.as_dict().values()) < 1e-12


def test_collar_must_leave_vertices(grim_traj):
    with pytest.raises(ValueError):
        fe.evolution_residuals(grim_traj, collar=10.0)


def test_grim_reaper_residuals_small(grim_traj):
    r = fe.evolution_residuals(grim_traj, collar=0.3)
    assert r.theta < 1e-3 and r.cos_theta < 1e-3 and r.h_squared < 2e-3


def test_sine_r2_envelope():
    spec = ex.SolutionSpec("sine_graph", n=128)
    dt = 1e-2
    traj = fe.run(fe.FlowConfig(spec, 0.0, 0.5, dt=dt, boundary="periodic"))
    r = fe.evolution_residuals(traj)
    h = segment_lengths(traj[0].curve).max()
    kmax = max(sup_kappa(s.curve) for s in traj.states)
    assert r.cos_theta <= 10 * (h**2 + dt**2) * max(kmax**3, 1.0)


# --- linear algebra and containers --------------------------------------------


@given(st.integers(3, 40), st.integers(0, 10**6))
def test_solve_cyclic_matches_dense(n, seed):
    rng = np.random.default_rng(seed)
    lower, upper = rng.uniform(-1, 0, n), rng.uniform(-1, 0, n)
    diag = 2.5 + rng.uniform(0, 1, n)
    rhs = rng.normal(size=(n, 2))
    A = np.diag(diag)
    for i in range(n):
        A[i, (i - 1) % n] += lower[i]
        A[i, (i + 1) % n] += upper[i]
    np.testing.assert_allclose(fe.solve_cyclic(lower, diag, upper, rhs), np.linalg.solve(A, rhs), atol=1e-10)


def test_trajectory_requires_increasing_times():
    c = ex.sample(ex.SolutionSpec("line", n=10))
    with pytest.raises(ValueError):
        fe.Trajectory((fe.FlowState(c, 0.0), fe.FlowState(c, 0.0)))


def test_trajectory_translation(grim_traj):
    moved = grim_traj.translated((1.0, -2.0))
    np.testing.assert_allclose(moved[3].curve.vertices, grim_traj[3].curve.vertices + [1.0, -2.0])
    np.testing.assert_array_equal(moved.times, grim_traj.times)


def test_external_periodic_curve_runs():
    x = np.linspace(0, 2 * np.pi, 48, endpoint=False)
    c = PlanarCurve(np.column_stack([x, 0.1 * np.cos(2 * x)]), "x_periodic", 2 * np.pi, 0)
    traj = fe.run(fe.FlowConfig(c, 0.0, 0.1, dt=1e-2, boundary="periodic"))
    assert sup_kappa(traj[-1].curve) < sup_kappa(c)
