import numpy as np
import pytest
from scipy.spatial.transform import Rotation as SciRot

from kinplex.errors import (AxisUndefinedError, GimbalLockError,
                            PreconditionError)
from kinplex.pose import (RigidPose, Rotation, ScrewParams,
                          euler_zyx_from_rot, pose_compose,
                          pose_from_homogeneous, pose_to_homogeneous,
                          rot_from_angle_axis, rot_from_euler_zyx,
                          rot_from_matrix, rot_to_angle_axis,
                          screw_decompose, screw_to_pose)


def random_rotation(rng):
    q = rng.standard_normal(4)
    q /= np.linalg.norm(q)
    return Rotation.from_quat(*q)


def random_pose(rng):
    return RigidPose.from_parts(random_rotation(rng), rng.uniform(-2, 2, 3))


def test_matrix_matches_scipy(rng):
    for _ in range(20):
        r = random_rotation(rng)
        oracle = SciRot.from_quat([r.x, r.y, r.z, r.w]).as_matrix()
        assert np.allclose(r.matrix(), oracle, atol=1e-12)


def test_worked_quarter_turn_about_z():
    r = rot_from_angle_axis([0.0, 0.0, 1.0], np.pi / 2)
    expected = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(r.matrix(), expected, atol=1e-15)


def test_compose_matches_matrix_product(rng):
    for _ in range(10):
        a = random_rotation(rng)
        b = random_rotation(rng)
        assert np.allclose(a.compose(b).matrix(), a.matrix() @ b.matrix(),
                           atol=1e-12)


def test_inverse_cancels(rng):
    r = random_rotation(rng)
    assert r.compose(r.inverse()).angle() < 1e-12


def test_apply_matches_matrix(rng):
    r = random_rotation(rng)
    v = rng.standard_normal(3)
    assert np.allclose(r.apply(v), r.matrix() @ v, atol=1e-14)
    batch = rng.standard_normal((7, 3))
    assert np.allclose(r.apply(batch), batch @ r.matrix().T, atol=1e-14)


def test_rot_from_matrix_round_trip(rng):
    for _ in range(20):
        r = random_rotation(rng)
        back = rot_from_matrix(r.matrix())
        assert np.allclose(back.matrix(), r.matrix(), atol=1e-12)


def test_rot_from_matrix_rejects_non_rotation():
    with pytest.raises(PreconditionError):
        rot_from_matrix(2.0 * np.eye(3))
    with pytest.raises(PreconditionError):
        rot_from_matrix(np.diag([1.0, 1.0, -1.0]))


def test_angle_axis_round_trip(rng):
    for _ in range(20):
        axis = rng.standard_normal(3)
        axis /= np.linalg.norm(axis)
        ang = rng.uniform(1e-4, np.pi - 1e-4)
        got_axis, got_ang = rot_to_angle_axis(rot_from_angle_axis(axis, ang))
        assert abs(got_ang - ang) < 1e-12
        assert np.allclose(got_axis, axis, atol=1e-9)


def test_angle_axis_identity_raises():
    with pytest.raises(AxisUndefinedError):
        rot_to_angle_axis(Rotation.identity())


def test_angle_axis_rejects_non_unit_axis():
    with pytest.raises(PreconditionError):
        rot_from_angle_axis([0.0, 2.0, 0.0], 0.5)


def test_half_turn_axis_canonical():
    plus = rot_to_angle_axis(rot_from_angle_axis([0.0, 1.0, 0.0], np.pi))
    minus = rot_to_angle_axis(rot_from_angle_axis([0.0, -1.0, 0.0], np.pi))
    assert np.allclose(plus[0], minus[0], atol=1e-12)
    assert plus[0][np.nonzero(plus[0])[0][0]] > 0.0


def test_euler_matches_scipy(rng):
    for _ in range(20):
        yaw, pitch, roll = rng.uniform([-np.pi, -1.4, -np.pi],
                                       [np.pi, 1.4, np.pi])
        r = rot_from_euler_zyx(yaw, pitch, roll)
        oracle = SciRot.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
        assert np.allclose(r.matrix(), oracle, atol=1e-12)
        back = euler_zyx_from_rot(r)
        assert np.allclose(back, (yaw, pitch, roll), atol=1e-9)


def test_euler_gimbal_lock_raises():
    with pytest.raises(GimbalLockError):
        euler_zyx_from_rot(rot_from_euler_zyx(0.3, np.pi / 2, 0.1))


def test_pose_compose_and_apply(rng):
    a = random_pose(rng)
    b = random_pose(rng)
    v = rng.standard_normal(3)
    assert np.allclose(pose_compose(a, b).apply(v), a.apply(b.apply(v)),
                       atol=1e-12)


def test_pose_inverse(rng):
    p = random_pose(rng)
    v = rng.standard_normal(3)
    assert np.allclose(p.inverse().apply(p.apply(v)), v, atol=1e-12)


def test_pose_translation_shape_checked():
    with pytest.raises(PreconditionError):
        RigidPose.from_parts(Rotation.identity(), [1.0, 2.0])


def test_homogeneous_round_trip(rng):
    p = random_pose(rng)
    m = pose_to_homogeneous(p)
    assert m.shape == (4, 4)
    assert np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0])
    back = pose_from_homogeneous(m)
    assert np.allclose(back.rotation.matrix(), p.rotation.matrix(), atol=1e-12)
    assert np.allclose(back.t, p.t, atol=1e-12)


def test_homogeneous_rejects_bad_last_row():
    m = np.eye(4)
    m[3, 0] = 0.1
    with pytest.raises(PreconditionError):
        pose_from_homogeneous(m)


def test_screw_round_trip(rng):
    for _ in range(20):
        p = random_pose(rng)
        back = screw_to_pose(screw_decompose(p))
        assert np.allclose(back.rotation.matrix(), p.rotation.matrix(),
                           atol=1e-9)
        assert np.allclose(back.t, p.t, atol=1e-9)


def test_screw_axis_is_invariant(rng):
    # points on the screw axis advance by the slide along the direction
    p = random_pose(rng)
    s = screw_decompose(p)
    c = np.array(s.point)
    u = np.array(s.direction)
    assert np.allclose(p.apply(c), c + s.slide * u, atol=1e-9)


def test_screw_pure_translation():
    p = RigidPose.from_parts(Rotation.identity(), [3.0, 0.0, 4.0])
    s = screw_decompose(p)
    assert s.angle == 0.0
    assert np.isclose(s.slide, 5.0)
    assert np.allclose(s.direction, [0.6, 0.0, 0.8])


def test_screw_identity_convention():
    s = screw_decompose(RigidPose.identity())
    assert s.angle == 0.0 and s.slide == 0.0
    assert s.direction == (0.0, 0.0, 1.0)


def test_screw_to_pose_rebuilds_offset_rotation():
    # quarter turn about a vertical axis through (1, 0, 0)
    s = ScrewParams((1.0, 0.0, 0.0), (0.0, 0.0, 1.0), np.pi / 2, 0.0)
    p = screw_to_pose(s)
    assert np.allclose(p.apply([1.0, 0.0, 0.0]), [1.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(p.apply([2.0, 0.0, 0.0]), [1.0, 1.0, 0.0], atol=1e-12)
