"""Kinematic maps from configuration charts to workspace models.

A KinematicMap bundles a configuration chart, a workspace model and batched
evaluators for the point map and its Jacobian.  Canonical closed-form maps
cover the fixtures used throughout (gimbal pointing, planar two-link,
planar-on-slide, identities); mechanism-backed maps fold DH frames along a
serial or tree chain of R/P joints.

Jacobians are taken in ambient output coordinates (plane/space coordinates
for arm maps, R^3 for the sphere, stacked linear/angular velocity for rigid
outputs), so singular values measure true output speed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .charts import (
    Chart,
    Circle,
    Interval,
    RigidModel,
    SphereModel,
    annulus,
    cylinder,
    wrap_positive,
)
from .errors import (
    PreconditionError,
    UnsupportedTopologyError,
    VacuousTestError,
)
from .mechanism import Mechanism, classify_mechanism
from .pose import rot_from_matrix, rot_to_angle_axis

CANONICAL_NAMES = (
    "pointing",
    "planar_rr",
    "scara",
    "identity_circle",
    "identity_interval",
    "identity_torus",
)


@dataclass(frozen=True)
class FrameChain:
    """World frames of a chain evaluation at one configuration.

    axes[j] and origins[j] describe the frame the j-th joint acts in; for a
    revolute joint axes[j] is its rotation axis direction.
    """

    kinds: tuple
    axes: np.ndarray
    origins: np.ndarray
    end_frame: np.ndarray

    def revolute_axes(self) -> np.ndarray:
        idx = [i for i, k in enumerate(self.kinds) if k == "R"]
        return self.axes[idx]


class KinematicMap:
    def __init__(self, name, config_chart, work_model, forward_many, jacobian_many,
                 ambient_many=None, params=None, mechanism=None, end_link=None,
                 chain_many=None, work_embed=None, work_embed_jac=None):
        self.name = name
        self.config_chart = config_chart
        self.work_model = work_model
        self.params = dict(params or {})
        self.mechanism = mechanism
        self.end_link = end_link
        self._forward_many = forward_many
        self._jacobian_many = jacobian_many
        self._ambient_many = ambient_many or forward_many
        self._chain_many = chain_many
        # rep -> ambient embedding and its Jacobian, for maps whose Jacobian
        # lives in different coordinates than the workspace representation
        self.work_embed = work_embed
        self.work_embed_jac = work_embed_jac

    def forward_many(self, qs) -> np.ndarray:
        return self._forward_many(np.atleast_2d(np.asarray(qs, float)))

    def ambient_many(self, qs) -> np.ndarray:
        return self._ambient_many(np.atleast_2d(np.asarray(qs, float)))

    def jacobian_many(self, qs) -> np.ndarray:
        return self._jacobian_many(np.atleast_2d(np.asarray(qs, float)))

    def forward(self, c):
        """Workspace point and, for mechanism maps, the frame chain."""
        w = self.forward_many(c)[0]
        chain = self.frame_chain(c) if self._chain_many else None
        return w, chain

    def jacobian(self, c) -> np.ndarray:
        c = np.asarray(c, float)
        if not self.config_chart.contains(c, tol=0.0):
            raise PreconditionError("configuration outside the chart")
        return self.jacobian_many(c)[0]

    def frame_chain(self, c) -> FrameChain | None:
        if self._chain_many is None:
            return None
        ee, axes, origins = self._chain_many(np.atleast_2d(np.asarray(c, float)))
        kinds = tuple(j.kind for j in self._path_joints)
        return FrameChain(kinds=kinds, axes=axes[0], origins=origins[0],
                          end_frame=ee[0])


def _rigid_rep_from_frames(frames):
    out = np.empty((frames.shape[0], 7))
    for i, m in enumerate(frames):
        r = rot_from_matrix(m[:3, :3])
        out[i, :4] = (r.w, r.x, r.y, r.z)
        out[i, 4:] = m[:3, 3]
    return out


def canonical_map(name: str, **params) -> KinematicMap:
    """Closed-form fixture maps; see CANONICAL_NAMES."""
    if name == "pointing":
        chart = Chart([Circle(), Circle()])

        def fwd(qs):
            return kernels.pointing_batch(qs)[0]

        def jac(qs):
            return kernels.pointing_batch(qs)[1]

        return KinematicMap(name, chart, SphereModel(), fwd, jac)

    if name == "planar_rr":
        r1 = float(params.pop("r1", 2.0))
        r2 = float(params.pop("r2", 1.0))
        if params:
            raise PreconditionError(f"unknown parameters {sorted(params)}")
        if not r1 > r2 > 0:
            raise PreconditionError("planar_rr needs r1 > r2 > 0")
        chart = Chart([Circle(), Circle()])
        work = annulus(r1 - r2, r1 + r2)

        def amb(qs):
            return kernels.planar_rr_batch(qs, r1, r2)[0]

        def fwd(qs):
            xy = kernels.planar_rr_batch(qs, r1, r2)[0]
            phi = wrap_positive(np.arctan2(xy[:, 1], xy[:, 0]))
            r = np.hypot(xy[:, 0], xy[:, 1])
            return np.stack([phi, r], axis=-1)

        def jac(qs):
            return kernels.planar_rr_batch(qs, r1, r2)[1]

        def embed(w):
            phi, r = w[..., 0], w[..., 1]
            return np.stack([r * np.cos(phi), r * np.sin(phi)], axis=-1)

        def embed_jac(w):
            phi, r = float(w[0]), float(w[1])
            return np.array([[-r * np.sin(phi), np.cos(phi)],
                             [r * np.cos(phi), np.sin(phi)]])

        return KinematicMap(name, chart, work, fwd, jac, ambient_many=amb,
                            params={"r1": r1, "r2": r2},
                            work_embed=embed, work_embed_jac=embed_jac)

    if name == "scara":
        r1 = float(params.pop("r1", 2.0))
        r2 = float(params.pop("r2", 1.0))
        z_lo, z_hi = params.pop("z_range", (0.0, 1.0))
        if params:
            raise PreconditionError(f"unknown parameters {sorted(params)}")
        if not r1 > r2 > 0:
            raise PreconditionError("scara needs r1 > r2 > 0")
        chart = Chart([Circle(), Circle(), Interval(z_lo, z_hi)])
        work = cylinder(r1 - r2, r1 + r2, z_lo, z_hi)

        def amb(qs):
            return kernels.scara_batch(qs, r1, r2)[0]

        def fwd(qs):
            xyz = kernels.scara_batch(qs, r1, r2)[0]
            phi = wrap_positive(np.arctan2(xyz[:, 1], xyz[:, 0]))
            r = np.hypot(xyz[:, 0], xyz[:, 1])
            return np.stack([phi, r, xyz[:, 2]], axis=-1)

        def jac(qs):
            return kernels.scara_batch(qs, r1, r2)[1]

        def embed(w):
            phi, r = w[..., 0], w[..., 1]
            return np.stack([r * np.cos(phi), r * np.sin(phi), w[..., 2]], axis=-1)

        def embed_jac(w):
            phi, r = float(w[0]), float(w[1])
            return np.array([[-r * np.sin(phi), np.cos(phi), 0.0],
                             [r * np.cos(phi), np.sin(phi), 0.0],
                             [0.0, 0.0, 1.0]])

        return KinematicMap(name, chart, work, fwd, jac, ambient_many=amb,
                            params={"r1": r1, "r2": r2, "z_range": (z_lo, z_hi)},
                            work_embed=embed, work_embed_jac=embed_jac)

    if name == "identity_circle":
        return identity_map(Chart([Circle()]), name=name)

    if name == "identity_interval":
        lo, hi = params.pop("bounds", (0.0, 1.0))
        if params:
            raise PreconditionError(f"unknown parameters {sorted(params)}")
        return identity_map(Chart([Interval(lo, hi)]), name=name)

    if name == "identity_torus":
        return identity_map(Chart([Circle(), Circle()]), name=name)

    raise PreconditionError(f"unknown canonical map {name!r}")


def identity_map(chart: Chart, name: str = "identity") -> KinematicMap:
    """Identity map on a product chart (workspace equals the chart)."""

    def fwd(qs):
        return chart.wrap(qs)

    def jac(qs):
        return np.broadcast_to(np.eye(chart.dim), (qs.shape[0], chart.dim, chart.dim)).copy()

    return KinematicMap(name, chart, chart, fwd, jac)


def product_map(f: KinematicMap, g: KinematicMap, name: str | None = None) -> KinematicMap:
    """Product of two maps: configuration and workspace factors concatenate,
    forward maps act blockwise, Jacobians are block diagonal."""
    if not isinstance(f.work_model, Chart) or not isinstance(g.work_model, Chart):
        raise PreconditionError("product maps need product-chart workspaces")
    chart = Chart(tuple(f.config_chart.factors) + tuple(g.config_chart.factors))
    work = Chart(tuple(f.work_model.factors) + tuple(g.work_model.factors))
    dcf = f.config_chart.dim
    dwf = f.work_model.dim
    name = name or f"{f.name}*{g.name}"

    def fwd(qs):
        return np.concatenate([f.forward_many(qs[:, :dcf]),
                               g.forward_many(qs[:, dcf:])], axis=1)

    def jac(qs):
        ja = f.jacobian_many(qs[:, :dcf])
        jb = g.jacobian_many(qs[:, dcf:])
        out = np.zeros((qs.shape[0], ja.shape[1] + jb.shape[1],
                        ja.shape[2] + jb.shape[2]))
        out[:, :ja.shape[1], :ja.shape[2]] = ja
        out[:, ja.shape[1]:, ja.shape[2]:] = jb
        return out

    def amb(qs):
        return np.concatenate([f.ambient_many(qs[:, :dcf]),
                               g.ambient_many(qs[:, dcf:])], axis=1)

    embed = embed_jac = None
    if f.work_embed is not None or g.work_embed is not None:
        f_embed = f.work_embed or (lambda w: np.asarray(w, float))
        g_embed = g.work_embed or (lambda w: np.asarray(w, float))

        def embed(w):
            w = np.asarray(w, float)
            return np.concatenate([np.atleast_1d(f_embed(w[:dwf])),
                                   np.atleast_1d(g_embed(w[dwf:]))])

        def embed_jac(w):
            w = np.asarray(w, float)
            if f.work_embed_jac is not None:
                ja = np.atleast_2d(f.work_embed_jac(w[:dwf]))
            else:
                ja = np.eye(dwf)
            if g.work_embed_jac is not None:
                jb = np.atleast_2d(g.work_embed_jac(w[dwf:]))
            else:
                jb = np.eye(work.dim - dwf)
            out = np.zeros((ja.shape[0] + jb.shape[0], ja.shape[1] + jb.shape[1]))
            out[:ja.shape[0], :ja.shape[1]] = ja
            out[ja.shape[0]:, ja.shape[1]:] = jb
            return out

    return KinematicMap(name, chart, work, fwd, jac, ambient_many=amb,
                        params={**f.params, **g.params},
                        work_embed=embed, work_embed_jac=embed_jac)


def map_from_mechanism(m: Mechanism, end_link: int | None = None) -> KinematicMap:
    """Kinematic map of a serial or tree mechanism of R/P joints.

    The configuration chart stacks one coordinate per joint in joint order;
    joints off the base-to-end path contribute zero Jacobian columns.  The
    workspace is the rigid-motion model of the end link frame.
    """
    shape = classify_mechanism(m)
    if shape == "parallel":
        raise UnsupportedTopologyError("loop closure is not supported in FK")
    for j in m.joints:
        if j.kind not in ("R", "P"):
            raise UnsupportedTopologyError(f"FK chains support R/P joints, got {j.kind}")
        if j.dh is None:
            raise PreconditionError("every joint in an FK chain needs dh parameters")

    if end_link is None:
        # deepest leaf from the base for trees; the tip for serial chains
        end_link = m.links
        if shape == "tree":
            adj = m.adjacency()
            depth = {0: 0}
            stack = [0]
            while stack:
                v = stack.pop()
                for u, _ in adj[v]:
                    if u not in depth:
                        depth[u] = depth[v] + 1
                        stack.append(u)
            end_link = max(depth, key=lambda v: (depth[v], v))

    # path of joint indices from base to end link
    adj = m.adjacency()
    prev = {0: None}
    stack = [0]
    while stack:
        v = stack.pop()
        for u, ji in adj[v]:
            if u not in prev:
                prev[u] = (v, ji)
                stack.append(u)
    if end_link not in prev:
        raise PreconditionError(f"end link {end_link} unreachable")
    path = []
    v = end_link
    while prev[v] is not None:
        v, ji = prev[v]
        path.append(ji)
    path.reverse()
    path_joints = tuple(m.joints[i] for i in path)

    factors = []
    for j in m.joints:
        if j.kind == "R":
            factors.append(Circle())
        else:
            (lo, hi), = j.limits
            factors.append(Interval(lo, hi))
    chart = Chart(factors)

    theta = np.array([j.dh.theta for j in path_joints])
    d = np.array([j.dh.d for j in path_joints])
    a = np.array([j.dh.a for j in path_joints])
    alpha = np.array([j.dh.alpha for j in path_joints])
    kinds_u8 = np.array([0 if j.kind == "R" else 1 for j in path_joints], dtype=np.uint8)
    base = m.base_matrix()

    def chain_many(qs):
        return kernels.dh_fk_batch(theta, d, a, alpha, kinds_u8, base, qs[:, path])

    def fwd(qs):
        ee, _, _ = chain_many(qs)
        return _rigid_rep_from_frames(ee)

    def jac(qs):
        ee, axes, origins = chain_many(qs)
        n = qs.shape[0]
        out = np.zeros((n, 6, chart.dim))
        p_ee = ee[:, :3, 3]
        for c, ji in enumerate(path):
            z = axes[:, c]
            if m.joints[ji].kind == "R":
                out[:, :3, ji] = np.cross(z, p_ee - origins[:, c])
                out[:, 3:, ji] = z
            else:
                out[:, :3, ji] = z
        return out

    k = KinematicMap(m.name, chart, RigidModel(), fwd, jac,
                     params={"end_link": end_link}, mechanism=m,
                     end_link=end_link, chain_many=chain_many)
    k._path_joints = path_joints
    return k


def forward_kinematics(k: KinematicMap, c):
    """Workspace point of configuration c plus the frame chain when the map
    is mechanism-backed (None for closed-form maps)."""
    return k.forward(c)


def jacobian(k: KinematicMap, c) -> np.ndarray:
    return k.jacobian(c)


def jacobian_fd(k: KinematicMap, c, h: float = 1e-6) -> np.ndarray:
    """Central-difference Jacobian in the same output coordinates as
    k.jacobian.  Circle-valued outputs are differenced along the shortest
    arc; rigid outputs difference position directly and orientation through
    the relative rotation's angle-axis."""
    c = np.asarray(c, float)
    dim = k.config_chart.dim
    steps = np.eye(dim) * h
    plus = c[None, :] + steps
    minus = c[None, :] - steps

    if isinstance(k.work_model, RigidModel):
        ee_p = [k.frame_chain(p).end_frame for p in plus]
        ee_m = [k.frame_chain(p).end_frame for p in minus]
        out = np.empty((6, dim))
        for i in range(dim):
            out[:3, i] = (ee_p[i][:3, 3] - ee_m[i][:3, 3]) / (2 * h)
            rel = rot_from_matrix(ee_p[i][:3, :3] @ ee_m[i][:3, :3].T)
            try:
                axis, ang = rot_to_angle_axis(rel)
                out[3:, i] = axis * ang / (2 * h)
            except Exception:
                out[3:, i] = 0.0
        return out

    if isinstance(k.work_model, SphereModel):
        fp = k.ambient_many(plus)
        fm = k.ambient_many(minus)
        return ((fp - fm) / (2 * h)).T

    # product-chart outputs: ambient coordinates, wrapped differences for
    # any circle factors of the ambient representation
    fp = k.ambient_many(plus)
    fm = k.ambient_many(minus)
    if k._ambient_many is k._forward_many and isinstance(k.work_model, Chart):
        diff = k.work_model.diff(fp, fm)
    else:
        diff = fp - fm
    return (diff / (2 * h)).T


def singular_test(k: KinematicMap, c, tol: float = 1e-8):
    """(is_singular, rank, singular values) at configuration c.

    Rank counts singular values above tol times the largest; the map is
    singular when rank drops below min(config dim, workspace dim).
    """
    jac_c = k.jacobian(c)
    sv = np.linalg.svd(jac_c, compute_uv=False)
    smax = sv[0] if sv.size else 0.0
    rank = int(np.sum(sv > tol * smax)) if smax > 0 else 0
    full = min(k.config_chart.dim, k.work_model.dim)
    return rank < full, rank, sv


def coplanarity_test(chain: FrameChain, tol: float = 1e-8) -> bool:
    """Whether the revolute axis directions of a chain span at most a plane.

    Needs at least three revolute joints; with fewer, the axes are always
    coplanar and the test would say nothing.
    """
    dirs = chain.revolute_axes()
    if dirs.shape[0] < 3:
        raise VacuousTestError("coplanarity needs at least 3 revolute joints")
    sv = np.linalg.svd(dirs.T, compute_uv=False)
    rank = int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0
    return rank <= 2


def singularity_cross_report(k: KinematicMap, c, tol: float = 1e-8) -> dict:
    """Compare the axis-coplanarity predicate with Jacobian rank tests.

    Reports each verdict side by side rather than resolving conflicts; the
    orientation block of the Jacobian stacks exactly the revolute axes, so
    orient_rank_deficient should track coplanar.
    """
    chain = k.frame_chain(c)
    if chain is None:
        raise PreconditionError("cross report needs a mechanism-backed map")
    jac_c = k.jacobian(c)
    ang = jac_c[3:, :]
    pos = jac_c[:3, :]

    def rank_of(mat):
        sv = np.linalg.svd(mat, compute_uv=False)
        return int(np.sum(sv > tol * sv[0])) if sv[0] > 0 else 0

    coplanar = coplanarity_test(chain, tol)
    orient_deficient = rank_of(ang) < 3
    pos_deficient = rank_of(pos) < 3
    return {
        "coplanar": coplanar,
        "orient_rank_deficient": orient_deficient,
        "position_rank_deficient": pos_deficient,
        "orient_agrees": coplanar == orient_deficient,
        "position_agrees": coplanar == pos_deficient,
    }


@dataclass(frozen=True)
class SingularScanReport:
    grid: tuple
    tol: float
    centers: list
    smin: np.ndarray
    smax: np.ndarray
    flagged: np.ndarray  # boolean, shape == grid
    fraction: float
    components: list = field(default_factory=list)  # (cell count, dim estimate)

    @property
    def flagged_cells(self):
        return np.argwhere(self.flagged)

    def summary(self) -> str:
        shape = "x".join(str(n) for n in self.grid)
        return (f"singular scan {shape}: {int(self.flagged.sum())} cells "
                f"flagged ({self.fraction:.6g} of grid), "
                f"{len(self.components)} components")

    def to_csv(self, path: str) -> None:
        import csv

        nd = self.flagged.ndim
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"i{a}" for a in range(nd)]
                       + [f"q{a}" for a in range(nd)] + ["smin", "is_singular"])
            for idx in np.ndindex(self.flagged.shape):
                center = [self.centers[a][idx[a]] for a in range(nd)]
                w.writerow([*idx] + [f"{x:.17g}" for x in center]
                           + [f"{self.smin[idx]:.17g}", int(self.flagged[idx])])


def _cell_centers(factor, n):
    if isinstance(factor, Circle):
        return (np.arange(n) + 0.5) * (2 * np.pi / n)
    if isinstance(factor, Interval):
        step = (factor.hi - factor.lo) / n
        return factor.lo + (np.arange(n) + 0.5) * step
    raise PreconditionError("cannot scan an unbounded factor")


def _scan_flags(k, n, tol):
    axes = [_cell_centers(f, n) for f in k.config_chart.factors]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    jacs = k.jacobian_many(pts)
    if jacs.shape[2] == 2:
        smin, smax = kernels.sv_extremes2_batch(jacs)
    else:
        sv = np.linalg.svd(jacs, compute_uv=False)
        smin, smax = sv[:, -1], sv[:, 0]
    flagged = smin < tol * np.maximum(smax, 1e-300)
    shape = (n,) * k.config_chart.dim
    return axes, smin.reshape(shape), smax.reshape(shape), flagged.reshape(shape)


def _label_components(flagged, wrap_axes):
    """Connected components of flagged cells under face adjacency; axes in
    wrap_axes are periodic."""
    labels = -np.ones(flagged.shape, dtype=np.int64)
    nd = flagged.ndim
    next_label = 0
    for start in np.argwhere(flagged):
        start = tuple(start)
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = next_label
        while stack:
            cell = stack.pop()
            for ax in range(nd):
                for dv in (-1, 1):
                    nb = list(cell)
                    nb[ax] += dv
                    if ax in wrap_axes:
                        nb[ax] %= flagged.shape[ax]
                    elif not (0 <= nb[ax] < flagged.shape[ax]):
                        continue
                    nb = tuple(nb)
                    if flagged[nb] and labels[nb] < 0:
                        labels[nb] = next_label
                        stack.append(nb)
        next_label += 1
    return labels, next_label


def singular_scan(k: KinematicMap, n: int, tol: float = 1e-2) -> SingularScanReport:
    """Grid scan of the singular set over an n-per-axis cell grid.

    Flags cells whose center has smallest singular value below tol times
    the largest.  Each connected flagged component gets a box-counting
    dimension estimate from a refined 2n scan (diagnostic only).
    """
    if k.config_chart.dim > 4:
        raise PreconditionError("scan supports at most 4 configuration axes")
    axes, smin, smax, flagged = _scan_flags(k, n, tol)
    frac = float(np.mean(flagged))
    wrap_axes = {i for i, f in enumerate(k.config_chart.factors) if isinstance(f, Circle)}
    labels, n_comp = _label_components(flagged, wrap_axes)
    components = []
    if n_comp:
        _, _, _, fine = _scan_flags(k, 2 * n, tol)
        # map each fine cell to its parent at the coarse resolution
        coarse_of_fine = labels[tuple(np.indices(fine.shape)[i] // 2 for i in range(fine.ndim))]
        for comp in range(n_comp):
            coarse_count = int(np.sum(labels == comp))
            fine_count = int(np.sum(fine & (coarse_of_fine == comp)))
            dim_est = float(np.log2(fine_count / coarse_count)) if fine_count else 0.0
            components.append((coarse_count, dim_est))
    return SingularScanReport(
        grid=flagged.shape,
        tol=tol,
        centers=axes,
        smin=smin,
        smax=smax,
        flagged=flagged,
        fraction=frac,
        components=components,
    )
