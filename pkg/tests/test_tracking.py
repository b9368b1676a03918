import numpy as np
import pytest

from kinplex.charts import torus
from kinplex.errors import PreconditionError, TrackingLostError
from kinplex.kinematics import canonical_map
from kinplex.tracking import (ProbeEntry, TrackingSpec, WorkPath,
                              cyclicity_drift, lift_path, probe_loop, rk4_step,
                              shrinking_loop_probe)


def square_loop():
    pts = np.array([[1.0, 1.0], [2.0, 1.0], [2.0, 2.0], [1.0, 2.0], [1.0, 1.0]])
    return WorkPath(np.linspace(0.0, 4.0, 5), pts)


def test_work_path_validation():
    with pytest.raises(PreconditionError):
        WorkPath(np.array([0.0]), np.array([[1.0, 1.0]]))
    with pytest.raises(PreconditionError):
        WorkPath(np.array([0.0, 0.0]), np.array([[1.0, 1.0], [2.0, 2.0]]))
    with pytest.raises(PreconditionError):
        WorkPath(np.array([0.0, 1.0, 2.0]), np.array([[1.0], [2.0]]))


def test_work_path_interpolation():
    path = square_loop()
    chart = torus()
    assert np.allclose(path.point(chart, 0.5), [1.5, 1.0])
    assert np.allclose(path.point(chart, -3.0), [1.0, 1.0])  # clamped
    assert np.allclose(path.point(chart, 9.0), [1.0, 1.0])
    assert np.allclose(path.velocity(chart, 0.5), [1.0, 0.0])
    assert path.is_closed(chart)
    assert np.isclose(path.duration, 4.0)


def test_resample_bounds_steps():
    path = square_loop()
    chart = torus()
    assert np.isclose(path.max_step(chart), 1.0)
    fine = path.resample(chart, 0.2)
    assert fine.max_step(chart) <= 0.2 + 1e-12
    assert np.allclose(fine.points[0], path.points[0])
    assert np.allclose(fine.points[-1], path.points[-1])
    assert np.isclose(fine.duration, path.duration)


def test_work_path_csv_round_trip(tmp_path):
    path = square_loop()
    f = tmp_path / "loop.csv"
    path.to_csv(str(f))
    back = WorkPath.from_csv(str(f))
    assert np.array_equal(back.times, path.times)
    assert np.array_equal(back.points, path.points)
    assert f.read_text().splitlines()[0] == "t,w0,w1"


def test_rk4_is_fourth_order():
    # exponential test problem: global error should shrink 16x per halving
    def f(t, q):
        return q

    def run(n):
        q = np.array([1.0])
        h = 1.0 / n
        for i in range(n):
            q = rk4_step(f, i * h, q, h)
        return abs(q[0] - np.e)

    e1, e2 = run(40), run(80)
    assert 13.0 < e1 / e2 < 18.0


def test_lift_identity_torus_tracks_closely():
    # damped least squares trades a little lag for conditioning, so the
    # error bound is loose while the closure gap stays tight
    k = canonical_map("identity_torus")
    loop = probe_loop(k, 0.3)
    res = lift_path(k, None, loop.points[0].copy(), loop)
    assert res.max_error <= 1e-3
    assert res.drift <= 1e-5
    assert res.singular_count == 0
    assert res.configs.shape[1] == 2


def test_lift_checks_start():
    k = canonical_map("planar_rr")
    loop = probe_loop(k, 0.5)
    with pytest.raises(PreconditionError):
        lift_path(k, None, np.array([0.0, 0.0, 0.0]), loop)
    with pytest.raises(PreconditionError):
        # maps to the wrong workspace point
        lift_path(k, None, np.array([0.0, 0.0]), loop)


def test_planar_interior_loop_closes():
    k = canonical_map("planar_rr")
    loop = probe_loop(k, 0.5)  # circle around (phi=pi, r=2), fully interior
    from kinplex.tracking import _default_start

    start = _default_start(k, loop.points[0])
    drift = cyclicity_drift(k, None, loop, start)
    assert drift <= 1e-3
    assert np.isclose(drift, 0.000231859, rtol=1e-2)


def test_pseudoinverse_method_also_closes():
    k = canonical_map("planar_rr")
    loop = probe_loop(k, 0.5)
    from kinplex.tracking import _default_start

    spec = TrackingSpec(method="pseudoinverse")
    drift = cyclicity_drift(k, spec, loop, _default_start(k, loop.points[0]))
    assert drift <= 1e-3


def test_cyclicity_needs_closed_loop():
    k = canonical_map("planar_rr")
    open_path = WorkPath(np.array([0.0, 1.0]),
                         np.array([[0.0, 2.0], [0.5, 2.0]]))
    with pytest.raises(PreconditionError):
        cyclicity_drift(k, None, open_path, np.zeros(2))


def test_tracking_lost_beyond_reach():
    k = canonical_map("planar_rr")
    from kinplex.tracking import _default_start

    path = WorkPath(np.array([0.0, 1.0]), np.array([[0.0, 2.0], [0.0, 4.2]]))
    with pytest.raises(TrackingLostError) as err:
        lift_path(k, None, _default_start(k, path.points[0]), path)
    assert 0.0 < err.value.time <= 1.0
    assert err.value.error > 0.5


def test_probe_loop_chart_geometry():
    k = canonical_map("planar_rr")
    loop = probe_loop(k, 0.5)
    assert loop.is_closed(k.work_model)
    radii = np.hypot(loop.points[:, 0] - np.pi, loop.points[:, 1] - 2.0)
    assert np.allclose(radii, 0.5, atol=1e-12)
    with pytest.raises(PreconditionError):
        probe_loop(k, 1.5)  # leaves the annulus r-interval
    with pytest.raises(PreconditionError):
        probe_loop(canonical_map("identity_interval"), 0.1)
    with pytest.raises(PreconditionError):
        probe_loop(k, -0.5)


def test_probe_loop_sphere_geometry():
    k = canonical_map("pointing")
    loop = probe_loop(k, 0.4)
    assert np.allclose(np.linalg.norm(loop.points, axis=1), 1.0, atol=1e-12)
    assert loop.is_closed(k.work_model)
    # passes through the antipode of the ring: polar angle reaches radius on
    # both sides of the center
    center = np.array([0.0, 0.0, 1.0])
    ang = np.arccos(np.clip(loop.points @ center, -1.0, 1.0))
    assert np.isclose(ang.max(), 0.4, atol=1e-9)
    recentered = probe_loop(k, 0.4, center=[1.0, 0.0, 0.0])
    ang2 = np.arccos(np.clip(recentered.points @ [1.0, 0.0, 0.0], -1, 1))
    assert np.isclose(ang2.max(), 0.4, atol=1e-9)


def test_pole_lollipop_drift_persists():
    k = canonical_map("pointing")
    rep = shrinking_loop_probe(k, None, [0.0, 0.0, 1.0], [0.4, 0.2, 0.1])
    assert np.all(rep.drifts >= 0.1)
    assert np.allclose(rep.drifts, [3.2413117, 3.1669446, 3.1479466],
                       rtol=1e-4)
    # every loop necessarily crosses the rank-drop point it encircles
    assert all(r.singular_count >= 1 for r in rep.results)
    assert isinstance(rep.entries[0], ProbeEntry)


def test_shrinking_probe_validates_radii():
    k = canonical_map("pointing")
    with pytest.raises(PreconditionError):
        shrinking_loop_probe(k, None, [0.0, 0.0, 1.0], [0.2, 0.2])
    with pytest.raises(PreconditionError):
        shrinking_loop_probe(k, None, [0.0, 0.0, 1.0], [0.2, -0.1])


def test_tracking_spec_validation():
    with pytest.raises(PreconditionError):
        TrackingSpec(method="newton")
    with pytest.raises(PreconditionError):
        TrackingSpec(method="extended")
    with pytest.raises(PreconditionError):
        TrackingSpec(steps_per_segment=0)


def test_extended_method_shape_check():
    k = canonical_map("scara")
    spec = TrackingSpec(method="extended",
                        constraint=lambda q: np.ones((1, 3)))
    loop = probe_loop(k, 0.5)
    from kinplex.sections import canonical_section

    start = canonical_section(k, "elbow_up").section(loop.points[:1])[0]
    with pytest.raises(PreconditionError):
        lift_path(k, spec, start, loop)  # 4x3 augmented system


def test_result_csv(tmp_path):
    k = canonical_map("identity_torus")
    loop = probe_loop(k, 0.3)
    res = lift_path(k, None, loop.points[0].copy(), loop)
    out = tmp_path / "track.csv"
    res.to_csv(str(out))
    lines = out.read_text().splitlines()
    assert lines[0] == "t,q0,q1,error,smin"
    assert len(lines) == 1 + res.times.size
