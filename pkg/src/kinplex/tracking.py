"""Workspace path tracking: lifting a path in W to a path in C.

A WorkPath is a timed sequence of waypoints in the work model's point
representation (factor coordinates for product charts, unit vectors for the
sphere).  lift_path integrates the differential-kinematics ODE

    dq/dt = solve(J(q), v_des(t) + gain * e(t))

with fixed-step RK4, where v_des is the interpolated target velocity in the
same output coordinates the map's Jacobian uses and e is the feedback error
toward the interpolated target.  The lifted configuration path is kept
unwrapped, so closing failures of a closed workspace loop show up as a
nonzero quotient-metric gap between the end and start configurations.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .charts import Chart, Circle, Interval, SphereModel
from .errors import PreconditionError, TrackingLostError

__all__ = [
    "WorkPath",
    "TrackingSpec",
    "TrackingResult",
    "rk4_step",
    "lift_path",
    "cyclicity_drift",
    "probe_loop",
    "shrinking_loop_probe",
    "ProbeEntry",
    "ProbeReport",
]


@dataclass(frozen=True)
class WorkPath:
    """Timed waypoints in workspace representation coordinates."""

    times: np.ndarray
    points: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, float)
        p = np.atleast_2d(np.asarray(self.points, float))
        if t.ndim != 1 or t.size < 2:
            raise PreconditionError("a path needs at least two timed waypoints")
        if np.any(np.diff(t) <= 0):
            raise PreconditionError("waypoint times must strictly increase")
        if p.shape[0] != t.size:
            raise PreconditionError("times and points disagree in length")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "points", p)

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])

    def segment_index(self, t: float) -> int:
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        return min(max(i, 0), self.times.size - 2)

    def point(self, model, t: float) -> np.ndarray:
        i = self.segment_index(t)
        u = (t - self.times[i]) / (self.times[i + 1] - self.times[i])
        u = min(max(u, 0.0), 1.0)
        return model.interpolate(self.points[i], self.points[i + 1], np.asarray(u))

    def velocity(self, model, t: float) -> np.ndarray:
        """Target velocity at time t in representation coordinates (the
        ambient slerp derivative for the sphere)."""
        i = self.segment_index(t)
        dt = self.times[i + 1] - self.times[i]
        if isinstance(model, SphereModel):
            u = min(max((t - self.times[i]) / dt, 0.0), 1.0)
            return model.interp_velocity(self.points[i], self.points[i + 1],
                                         np.asarray(u)) / dt
        return model.diff(self.points[i + 1], self.points[i]) / dt

    def is_closed(self, model, tol: float = 1e-12) -> bool:
        return bool(model.distance(self.points[0], self.points[-1]) <= tol)

    def max_step(self, model) -> float:
        steps = [float(model.distance(self.points[i], self.points[i + 1]))
                 for i in range(self.times.size - 1)]
        return max(steps)

    def resample(self, model, max_step: float = 0.2) -> "WorkPath":
        """Insert waypoints so consecutive model distances are <= max_step."""
        ts = [self.times[0]]
        ps = [self.points[0]]
        for i in range(self.times.size - 1):
            d = float(model.distance(self.points[i], self.points[i + 1]))
            n = max(1, int(math.ceil(d / max_step)))
            for s in range(1, n + 1):
                u = s / n
                ts.append(self.times[i] + u * (self.times[i + 1] - self.times[i]))
                ps.append(model.interpolate(self.points[i], self.points[i + 1],
                                            np.asarray(u)))
        return WorkPath(np.array(ts), np.array(ps))

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t"] + [f"w{i}" for i in range(self.points.shape[1])])
            for t, p in zip(self.times, self.points):
                w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in p])

    @classmethod
    def from_csv(cls, path: str) -> "WorkPath":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        data = np.array([[float(x) for x in row] for row in rows[1:]])
        return cls(data[:, 0], data[:, 1:])


@dataclass(frozen=True)
class TrackingSpec:
    """Solver settings for lift_path.

    method: 'pseudoinverse', 'damped' (damped least squares) or 'extended'
    (Jacobian augmented with constraint rows to a square system; requires
    constraint).  constraint(q) must return an (r, dim) array of rows whose
    commanded velocity is zero.
    """

    method: str = "damped"
    damping: float = 1e-3
    feedback_gain: float = 10.0
    steps_per_segment: int = 8
    singular_threshold: float = 1e-2
    lost_threshold: float = 0.5
    constraint: object = None

    def __post_init__(self):
        if self.method not in ("pseudoinverse", "damped", "extended"):
            raise PreconditionError(f"unknown tracking method {self.method!r}")
        if self.method == "extended" and self.constraint is None:
            raise PreconditionError("extended tracking needs constraint rows")
        if self.steps_per_segment < 1:
            raise PreconditionError("steps_per_segment must be positive")


@dataclass
class TrackingResult:
    times: np.ndarray
    configs: np.ndarray  # unwrapped
    errors: np.ndarray  # work-model metric, per node
    smins: np.ndarray  # smallest Jacobian singular value, per node
    max_error: float
    drift: float  # quotient-metric gap between final and initial config
    singular_times: list
    path: WorkPath
    spec: TrackingSpec

    @property
    def final_config(self) -> np.ndarray:
        return self.configs[-1]

    @property
    def singular_count(self) -> int:
        return len(self.singular_times)

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            dim = self.configs.shape[1]
            w.writerow(["t"] + [f"q{i}" for i in range(dim)] + ["error", "smin"])
            for t, q, e, s in zip(self.times, self.configs, self.errors, self.smins):
                w.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in q]
                           + [f"{e:.17g}", f"{s:.17g}"])


def rk4_step(f, t: float, q: np.ndarray, h: float) -> np.ndarray:
    k1 = f(t, q)
    k2 = f(t + 0.5 * h, q + 0.5 * h * k1)
    k3 = f(t + 0.5 * h, q + 0.5 * h * k2)
    k4 = f(t + h, q + h * k3)
    return q + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _solve_rates(jac, rhs, q, spec: TrackingSpec) -> np.ndarray:
    if spec.method == "pseudoinverse":
        return np.linalg.pinv(jac) @ rhs
    if spec.method == "damped":
        jjt = jac @ jac.T + (spec.damping ** 2) * np.eye(jac.shape[0])
        return jac.T @ np.linalg.solve(jjt, rhs)
    rows = np.atleast_2d(np.asarray(spec.constraint(q), float))
    aug = np.vstack([jac, rows])
    if aug.shape[0] != aug.shape[1]:
        raise PreconditionError(
            f"extended system is {aug.shape[0]}x{aug.shape[1]}, not square")
    return np.linalg.solve(aug, np.concatenate([rhs, np.zeros(rows.shape[0])]))


def _target_state(k, path: WorkPath, t: float):
    """(ambient target, ambient target velocity) at time t."""
    model = k.work_model
    w_rep = path.point(model, t)
    if isinstance(model, SphereModel):
        return w_rep, path.velocity(model, t)
    v_rep = path.velocity(model, t)
    if k.work_embed is None:
        return w_rep, v_rep
    return k.work_embed(w_rep), k.work_embed_jac(w_rep) @ v_rep


def _ambient_error(k, amb_des, q) -> np.ndarray:
    amb = k.ambient_many(q)[0]
    if k.work_embed is None and isinstance(k.work_model, Chart):
        return k.work_model.diff(amb_des, amb)
    return amb_des - amb


def _metric_error(k, path: WorkPath, t: float, q) -> float:
    w_des = path.point(k.work_model, t)
    return float(k.work_model.distance(w_des, k.forward_many(q)[0]))


def lift_path(k, spec: TrackingSpec | None, start, path: WorkPath) -> TrackingResult:
    """Integrate the tracking ODE along a workspace path.

    start must map to within 1e-6 of the first waypoint, otherwise there is
    no well-defined lift to speak of.  The input path is resampled so no
    segment exceeds 0.2 chart units.  Configurations are returned unwrapped.
    """
    spec = spec or TrackingSpec()
    q = np.asarray(start, float).copy()
    if q.shape != (k.config_chart.dim,):
        raise PreconditionError("start configuration has the wrong dimension")
    if path.max_step(k.work_model) > 0.2:
        path = path.resample(k.work_model, 0.2)
    init_err = _metric_error(k, path, path.times[0], q)
    if init_err > 1e-6:
        raise PreconditionError(
            f"start config maps {init_err:.3g} away from the first waypoint")

    def rate(t, qq):
        amb_des, v_des = _target_state(k, path, t)
        e = _ambient_error(k, amb_des, qq)
        jac = k.jacobian_many(qq)[0]
        return _solve_rates(jac, v_des + spec.feedback_gain * e, qq, spec)

    def smallest_sv(qq):
        return float(np.linalg.svd(k.jacobian_many(qq)[0], compute_uv=False)[-1])

    node_times = [path.times[0]]
    configs = [q.copy()]
    errors = [init_err]
    smins = [smallest_sv(q)]
    singular_times = [float(path.times[0])] if smins[0] < spec.singular_threshold else []

    for i in range(path.times.size - 1):
        t0, t1 = path.times[i], path.times[i + 1]
        h = (t1 - t0) / spec.steps_per_segment
        t = t0
        for _ in range(spec.steps_per_segment):
            q = rk4_step(rate, t, q, h)
            t += h
        t = t1  # avoid accumulated float drift in the node time
        err = _metric_error(k, path, t, q)
        if err > spec.lost_threshold:
            raise TrackingLostError(float(t), err)
        sv = smallest_sv(q)
        if sv < spec.singular_threshold:
            singular_times.append(float(t))
        node_times.append(t)
        configs.append(q.copy())
        errors.append(err)
        smins.append(sv)

    configs = np.array(configs)
    errors = np.array(errors)
    drift = float(k.config_chart.distance(configs[-1], configs[0]))
    return TrackingResult(
        times=np.array(node_times),
        configs=configs,
        errors=errors,
        smins=np.array(smins),
        max_error=float(errors.max()),
        drift=drift,
        singular_times=singular_times,
        path=path,
        spec=spec,
    )


def cyclicity_drift(k, spec: TrackingSpec | None, loop: WorkPath, start) -> float:
    """Lift a closed workspace loop and return the quotient-metric gap
    between the end and start configurations.  A full 2*pi wind of a circle
    coordinate counts as zero; genuine drift means the loop's lift failed to
    close, which no choice of tracking settings can repair."""
    if not loop.is_closed(k.work_model):
        raise PreconditionError("cyclicity drift needs a closed workspace loop")
    return lift_path(k, spec, start, loop).drift


def _chart_center(chart: Chart) -> np.ndarray:
    out = []
    for f in chart.factors:
        if isinstance(f, Circle):
            out.append(np.pi)
        elif isinstance(f, Interval):
            out.append(0.5 * (f.lo + f.hi))
        else:
            out.append(0.0)
    return np.array(out)


def _rotation_to(target: np.ndarray) -> np.ndarray:
    """Rotation matrix taking the +z axis to the unit vector target."""
    z = np.array([0.0, 0.0, 1.0])
    c = float(np.dot(z, target))
    if c > 1.0 - 1e-12:
        return np.eye(3)
    if c < -1.0 + 1e-12:
        return np.diag([1.0, -1.0, -1.0])  # half turn about x
    axis = np.cross(z, target)
    axis /= np.linalg.norm(axis)
    ang = math.acos(c)
    kx = np.array([[0, -axis[2], axis[1]],
                   [axis[2], 0, -axis[0]],
                   [-axis[1], axis[0], 0]])
    return np.eye(3) + math.sin(ang) * kx + (1.0 - math.cos(ang)) * (kx @ kx)


def probe_loop(k, radius: float, center=None, max_step: float = 0.05) -> WorkPath:
    """A closed workspace loop of the given radius for loop probing.

    Product-chart workspaces get a metric circle around the center in the
    first two factors.  The sphere gets a loop through the center point:
    out along a geodesic, through the center to the far side, then back
    around the circle at geodesic distance radius.  Shrinking the radius
    shrinks the loop toward the center; a plain geodesic circle would not
    do, since its lifts wind a circle coordinate and the quotient metric
    cancels the wind.
    """
    if radius <= 0:
        raise PreconditionError("probe radius must be positive")
    model = k.work_model
    if isinstance(model, SphereModel):
        n_a = max(4, int(math.ceil(2.0 * radius / max_step)))
        n_b = max(4, int(math.ceil(np.pi * math.sin(radius) / max_step)))
        pts = []
        for s in range(n_a + 1):
            u = s / n_a
            ang = radius * (1.0 - 2.0 * u)  # polar angle along the meridian plane
            pts.append([math.sin(ang), 0.0, math.cos(ang)])
        for s in range(1, n_b + 1):
            u = s / n_b
            lon = np.pi * (1.0 - u)
            pts.append([math.sin(radius) * math.cos(lon),
                        math.sin(radius) * math.sin(lon),
                        math.cos(radius)])
        pts[-1] = pts[0]
        pts = np.array(pts)
        if center is not None:
            c = np.asarray(center, float)
            pts = pts @ _rotation_to(c / np.linalg.norm(c)).T
        times = np.linspace(0.0, 1.0, len(pts))
        return WorkPath(times, pts)

    if isinstance(model, Chart):
        if model.dim < 2:
            raise PreconditionError("chart probe loops need at least two factors")
        c = _chart_center(model) if center is None else np.asarray(center, float)
        for i in (0, 1):
            f = model.factors[i]
            if isinstance(f, Interval):
                if not (f.lo <= c[i] - radius and c[i] + radius <= f.hi):
                    raise PreconditionError(
                        f"probe circle leaves factor {i} bounds at radius {radius}")
        n = max(8, int(math.ceil(2 * np.pi * radius / max_step)))
        ts = np.linspace(0.0, 1.0, n + 1)
        pts = np.tile(c, (n + 1, 1))
        pts[:, 0] = c[0] + radius * np.cos(2 * np.pi * ts)
        pts[:, 1] = c[1] + radius * np.sin(2 * np.pi * ts)
        pts[-1] = pts[0]
        return WorkPath(ts, pts)

    raise PreconditionError("probe loops support chart and sphere workspaces")


@dataclass(frozen=True)
class ProbeEntry:
    radius: float
    drift: float
    max_error: float


@dataclass(frozen=True)
class ProbeReport:
    entries: tuple
    results: tuple = field(repr=False, default=())

    @property
    def drifts(self):
        return np.array([e.drift for e in self.entries])


def _default_start(k, w0):
    """Start configuration from a fixed section branch of the map."""
    model = k.work_model
    if isinstance(model, SphereModel) and k.name == "pointing":
        lat, lon = model.latlon(w0)
        return np.array([float(lat), float(lon)])
    if k.name == "planar_rr":
        from .sections import canonical_section
        piece = canonical_section(k, "elbow_up")
        return piece.section(np.atleast_2d(np.asarray(w0, float)))[0]
    if isinstance(model, Chart) and model == k.config_chart and k.work_embed is None:
        return np.asarray(w0, float).copy()
    raise PreconditionError(
        "no default start branch for this map; pass start_rule")


def shrinking_loop_probe(k, spec: TrackingSpec | None, center, radii,
                         start_rule=None) -> ProbeReport:
    """Lift probe loops of shrinking radius around center and report the
    drift of each.

    The start configuration is recomputed per radius from a fixed section
    branch (start_rule, or the map's natural branch), which is what makes
    the per-radius drifts comparable.  Loops whose drift stays bounded away
    from zero as the radius shrinks witness an obstruction to any continuous
    local inverse near the center.
    """
    radii = [float(r) for r in radii]
    if any(r <= 0 for r in radii):
        raise PreconditionError("probe radii must be positive")
    if any(b >= a for a, b in zip(radii, radii[1:])):
        raise PreconditionError("probe radii must be strictly decreasing")
    entries = []
    results = []
    for r in radii:
        path = probe_loop(k, r, center=center)
        w0 = path.points[0]
        c0 = start_rule(w0) if start_rule is not None else _default_start(k, w0)
        res = lift_path(k, spec, c0, path)
        entries.append(ProbeEntry(radius=r, drift=res.drift, max_error=res.max_error))
        results.append(res)
    return ProbeReport(entries=tuple(entries), results=tuple(results))
