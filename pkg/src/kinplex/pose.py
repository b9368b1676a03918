"""Rotations, rigid poses and screw decompositions.

Orientation is stored as a unit quaternion with nonnegative scalar part;
matrices are derived views.  Angle-axis output is canonicalized so equal
rotations give equal numbers: angle lies in [0, pi], and for a half-turn
(where the axis sign is not determined by the rotation) the first nonzero
axis coordinate is made positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import AxisUndefinedError, GimbalLockError, PreconditionError

_UNIT_TOL = 1e-9
_HALF_TURN_TOL = 1e-9


def _canonical_quat(w, x, y, z):
    n = math.sqrt(w * w + x * x + y * y + z * z)
    if n < _UNIT_TOL:
        raise PreconditionError("quaternion norm too small")
    w, x, y, z = w / n, x / n, y / n, z / n
    if w < 0.0:
        w, x, y, z = -w, -x, -y, -z
    if w <= 1e-12:
        # half turn: q and -q describe the same rotation, fix the vector sign
        w = abs(w)
        for c in (x, y, z):
            if c != 0.0:
                if c < 0.0:
                    x, y, z = -x, -y, -z
                break
    return w, x, y, z


@dataclass(frozen=True)
class Rotation:
    """Rotation of R^3 as a unit quaternion (w, x, y, z), w >= 0."""

    w: float
    x: float
    y: float
    z: float

    @staticmethod
    def identity() -> "Rotation":
        return Rotation(1.0, 0.0, 0.0, 0.0)

    @staticmethod
    def from_quat(w, x, y, z) -> "Rotation":
        return Rotation(*_canonical_quat(float(w), float(x), float(y), float(z)))

    def compose(self, other: "Rotation") -> "Rotation":
        """Rotation equal to applying other first, then self."""
        w1, x1, y1, z1 = self.w, self.x, self.y, self.z
        w2, x2, y2, z2 = other.w, other.x, other.y, other.z
        return Rotation.from_quat(
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )

    def inverse(self) -> "Rotation":
        return Rotation.from_quat(self.w, -self.x, -self.y, -self.z)

    def matrix(self) -> np.ndarray:
        w, x, y, z = self.w, self.x, self.y, self.z
        return np.array(
            [
                [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
                [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
                [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
            ]
        )

    def apply(self, v) -> np.ndarray:
        return np.asarray(v, float) @ self.matrix().T

    def quat(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def angle(self) -> float:
        v = math.sqrt(self.x**2 + self.y**2 + self.z**2)
        return 2.0 * math.atan2(v, self.w)


def rot_from_matrix(m) -> Rotation:
    """Quaternion from a rotation matrix (Shepperd's method)."""
    m = np.asarray(m, float)
    if m.shape != (3, 3):
        raise PreconditionError("rotation matrix must be 3x3")
    if abs(np.linalg.det(m) - 1.0) > 1e-6 or np.abs(m @ m.T - np.eye(3)).max() > 1e-6:
        raise PreconditionError("matrix is not a rotation")
    t = np.trace(m)
    if t > max(m[0, 0], m[1, 1], m[2, 2]):
        w = 0.5 * math.sqrt(1.0 + t)
        s = 0.25 / w
        return Rotation.from_quat(
            w,
            s * (m[2, 1] - m[1, 2]),
            s * (m[0, 2] - m[2, 0]),
            s * (m[1, 0] - m[0, 1]),
        )
    i = int(np.argmax([m[0, 0], m[1, 1], m[2, 2]]))
    j, k = (i + 1) % 3, (i + 2) % 3
    q = np.empty(4)
    q[1 + i] = 0.5 * math.sqrt(1.0 + m[i, i] - m[j, j] - m[k, k])
    s = 0.25 / q[1 + i]
    q[0] = s * (m[k, j] - m[j, k])
    q[1 + j] = s * (m[j, i] + m[i, j])
    q[1 + k] = s * (m[k, i] + m[i, k])
    return Rotation.from_quat(*q)


def rot_from_angle_axis(axis, angle: float) -> Rotation:
    """Rotation by angle about a unit axis."""
    axis = np.asarray(axis, float)
    n = np.linalg.norm(axis)
    if abs(n - 1.0) > _UNIT_TOL:
        raise PreconditionError(f"axis norm {n} is not 1")
    h = 0.5 * float(angle)
    s = math.sin(h)
    return Rotation.from_quat(math.cos(h), s * axis[0], s * axis[1], s * axis[2])


def rot_to_angle_axis(r: Rotation):
    """Canonical (axis, angle) of a rotation, angle in [0, pi].

    Raises AxisUndefinedError below 1e-9 of rotation.  At a half turn the
    axis is canonicalized (first nonzero coordinate positive).
    """
    v = np.array([r.x, r.y, r.z])
    nv = np.linalg.norm(v)
    angle = 2.0 * math.atan2(nv, r.w)
    if angle < 1e-9:
        raise AxisUndefinedError("rotation too small to define an axis")
    axis = v / nv
    if angle > np.pi - _HALF_TURN_TOL:
        nz = np.nonzero(axis)[0]
        if nz.size and axis[nz[0]] < 0.0:
            axis = -axis
    return axis, angle


def euler_zyx_from_rot(r: Rotation):
    """(yaw, pitch, roll) with R = Rz(yaw) Ry(pitch) Rx(roll).

    Raises GimbalLockError when pitch sits at +-pi/2.
    """
    m = r.matrix()
    s = -m[2, 0]
    if abs(s) > 1.0 - 1e-12:
        raise GimbalLockError("pitch at a pole, yaw/roll not separable")
    pitch = math.asin(s)
    yaw = math.atan2(m[1, 0], m[0, 0])
    roll = math.atan2(m[2, 1], m[2, 2])
    return yaw, pitch, roll


def rot_from_euler_zyx(yaw: float, pitch: float, roll: float) -> Rotation:
    rz = rot_from_angle_axis([0.0, 0.0, 1.0], yaw)
    ry = rot_from_angle_axis([0.0, 1.0, 0.0], pitch)
    rx = rot_from_angle_axis([1.0, 0.0, 0.0], roll)
    return rz.compose(ry).compose(rx)


@dataclass(frozen=True)
class RigidPose:
    """Rigid motion x -> R x + t."""

    rotation: Rotation
    translation: tuple

    @staticmethod
    def identity() -> "RigidPose":
        return RigidPose(Rotation.identity(), (0.0, 0.0, 0.0))

    @staticmethod
    def from_parts(rotation: Rotation, translation) -> "RigidPose":
        t = np.asarray(translation, float)
        if t.shape != (3,):
            raise PreconditionError("translation must be a 3-vector")
        return RigidPose(rotation, (float(t[0]), float(t[1]), float(t[2])))

    @property
    def t(self) -> np.ndarray:
        return np.array(self.translation)

    def apply(self, v) -> np.ndarray:
        return self.rotation.apply(v) + self.t

    def inverse(self) -> "RigidPose":
        rinv = self.rotation.inverse()
        return RigidPose.from_parts(rinv, -rinv.apply(self.t))


def pose_compose(a: RigidPose, b: RigidPose) -> RigidPose:
    """Pose of applying b first, then a."""
    return RigidPose.from_parts(
        a.rotation.compose(b.rotation), a.rotation.apply(b.t) + a.t
    )


def pose_to_homogeneous(p: RigidPose) -> np.ndarray:
    m = np.eye(4)
    m[:3, :3] = p.rotation.matrix()
    m[:3, 3] = p.t
    return m


def pose_from_homogeneous(m) -> RigidPose:
    m = np.asarray(m, float)
    if m.shape != (4, 4) or np.any(m[3] != (0.0, 0.0, 0.0, 1.0)):
        raise PreconditionError("not a homogeneous rigid transform")
    return RigidPose.from_parts(rot_from_matrix(m[:3, :3]), m[:3, 3])


@dataclass(frozen=True)
class ScrewParams:
    """Axis-point, axis-direction, rotation angle and slide along the axis.

    Conventions for the degenerate cases: a pure translation reports angle
    0 with direction along the translation and slide equal to its length;
    the identity reports direction (0, 0, 1) and zero slide.
    """

    point: tuple
    direction: tuple
    angle: float
    slide: float


def screw_decompose(p: RigidPose) -> ScrewParams:
    """Chasles decomposition of a rigid pose."""
    t = p.t
    ang = p.rotation.angle()
    if ang < 1e-9:
        # translation only
        n = np.linalg.norm(t)
        if n < 1e-12:
            return ScrewParams((0.0, 0.0, 0.0), (0.0, 0.0, 1.0), 0.0, 0.0)
        u = t / n
        return ScrewParams((0.0, 0.0, 0.0), tuple(u), 0.0, float(n))
    u, ang = rot_to_angle_axis(p.rotation)
    slide = float(np.dot(t, u))
    t_perp = t - slide * u
    # point on the axis: solve (I - R) c = t_perp in the plane normal to u
    c = 0.5 * (t_perp + np.cross(u, t_perp) / math.tan(0.5 * ang))
    return ScrewParams(tuple(c), tuple(u), float(ang), slide)


def screw_to_pose(s: ScrewParams) -> RigidPose:
    """Reassemble the pose described by screw parameters."""
    u = np.asarray(s.direction, float)
    c = np.asarray(s.point, float)
    if s.angle == 0.0:
        return RigidPose.from_parts(Rotation.identity(), s.slide * u)
    r = rot_from_angle_axis(u, s.angle)
    t = c - r.apply(c) + s.slide * u
    return RigidPose.from_parts(r, t)
