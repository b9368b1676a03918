"""Jointed mechanisms: taxonomy, documents, mobility and DH frames.

A mechanism is a graph whose vertices are rigid links (vertex 0 is the
fixed base) and whose edges are joints drawn from the six lower pairs:

    R revolute, P prismatic, H helical   (1 dof)
    C cylindrical                        (2 dof)
    S spherical, E planar                (3 dof)

Documents are JSON with exactly the fields produced by serialize_mechanism;
unknown fields are rejected so typos fail loudly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .charts import Chart, Circle, Interval
from .errors import DocumentError, PreconditionError
from .pose import RigidPose, pose_from_homogeneous

JOINT_DOF = {"R": 1, "P": 1, "H": 1, "C": 2, "S": 3, "E": 3}

# number of interval limit pairs each kind must carry; circle coordinates
# are unbounded and take none
JOINT_LIMIT_COUNT = {"R": 0, "P": 1, "H": 1, "C": 1, "S": 2, "E": 2}


@dataclass(frozen=True)
class DHParams:
    """Denavit-Hartenberg joint frame offsets (theta, d, a, alpha)."""

    theta: float
    d: float
    a: float
    alpha: float


@dataclass(frozen=True)
class JointSpec:
    kind: str
    parent: int
    child: int
    dh: DHParams | None = None
    limits: tuple = ()
    actuated: bool = True
    pitch: float | None = None  # lead of an H joint, stored but not simulated

    def __post_init__(self):
        if self.kind not in JOINT_DOF:
            raise PreconditionError(f"unknown joint kind {self.kind!r}")
        if len(self.limits) != JOINT_LIMIT_COUNT[self.kind]:
            raise PreconditionError(
                f"{self.kind} joint takes {JOINT_LIMIT_COUNT[self.kind]} "
                f"limit pairs, got {len(self.limits)}"
            )
        for lo, hi in self.limits:
            if not hi > lo:
                raise PreconditionError(f"empty joint limit [{lo}, {hi}]")

    @property
    def dof(self) -> int:
        return JOINT_DOF[self.kind]


@dataclass(frozen=True)
class Mechanism:
    """Link-joint graph with an anchoring base frame.

    links counts the moving bodies; vertices are 0..links with 0 the base.
    The base frame is kept as the raw homogeneous 16-tuple so documents
    round-trip bit-exactly; base_pose() gives the RigidPose view.
    """

    name: str
    planar: bool
    links: int
    joints: tuple
    base_frame: tuple = field(
        default=(1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0)
    )

    def __post_init__(self):
        if self.links < 1:
            raise PreconditionError("mechanism needs at least one moving link")
        if len(self.base_frame) != 16:
            raise PreconditionError("base_frame must have 16 entries")
        seen = set()
        for j in self.joints:
            if not (0 <= j.parent <= self.links and 0 <= j.child <= self.links):
                raise PreconditionError(
                    f"joint {j.parent}->{j.child} references a missing link"
                )
            if j.parent == j.child:
                raise PreconditionError("joint connects a link to itself")
            seen.update((j.parent, j.child))
        # connectivity including the base
        adj = {v: set() for v in range(self.links + 1)}
        for j in self.joints:
            adj[j.parent].add(j.child)
            adj[j.child].add(j.parent)
        reached = {0}
        frontier = [0]
        while frontier:
            v = frontier.pop()
            for u in adj[v]:
                if u not in reached:
                    reached.add(u)
                    frontier.append(u)
        if len(reached) != self.links + 1:
            raise PreconditionError("mechanism graph is not connected to the base")

    def base_matrix(self) -> np.ndarray:
        return np.array(self.base_frame).reshape(4, 4)

    def base_pose(self) -> RigidPose:
        return pose_from_homogeneous(self.base_matrix())

    def adjacency(self):
        adj = {v: [] for v in range(self.links + 1)}
        for i, j in enumerate(self.joints):
            adj[j.parent].append((j.child, i))
            adj[j.child].append((j.parent, i))
        return adj


def classify_mechanism(m: Mechanism) -> str:
    """'serial' (a path rooted at the base), 'tree', or 'parallel' (loops)."""
    n, g = m.links, len(m.joints)
    if g > n:
        return "parallel"
    degs = [0] * (n + 1)
    for j in m.joints:
        degs[j.parent] += 1
        degs[j.child] += 1
    if degs[0] == 1 and all(d <= 2 for d in degs):
        return "serial"
    return "tree"


@dataclass(frozen=True)
class MobilityReport:
    naive_mobility: int
    redundancy_override: int
    effective_mobility: int
    planar: bool
    formula: str


def mobility(m: Mechanism, planar: bool | None = None,
             redundancy_override: int = 0) -> MobilityReport:
    """Grubler mobility count.

    Spatial: M = 6 (n - g) + sum f_i; planar replaces 6 by 3.  The count
    assumes independent constraints, so platforms with redundant leg
    freedoms need the override: effective = naive - redundancy_override.
    planar defaults to the mechanism's own flag.
    """
    if redundancy_override < 0:
        raise PreconditionError("redundancy_override must be >= 0")
    if planar is None:
        planar = m.planar
    n, g = m.links, len(m.joints)
    f = sum(j.dof for j in m.joints)
    k = 3 if planar else 6
    naive = k * (n - g) + f
    formula = f"{k}*({n}-{g})+{f}"
    return MobilityReport(naive_mobility=naive,
                          redundancy_override=redundancy_override,
                          effective_mobility=naive - redundancy_override,
                          planar=planar, formula=formula)


def joint_chart(j: JointSpec) -> Chart:
    """Coordinate chart of one joint's motion.

    R is a circle; P and H are intervals; C is interval x circle; S and E
    are interval x interval x circle.
    """
    if j.kind == "R":
        return Chart([Circle()])
    if j.kind in ("P", "H"):
        (lo, hi), = j.limits
        return Chart([Interval(lo, hi)])
    if j.kind == "C":
        (lo, hi), = j.limits
        return Chart([Interval(lo, hi), Circle()])
    # S and E
    (a0, a1), (b0, b1) = j.limits
    return Chart([Interval(a0, a1), Interval(b0, b1), Circle()])


def dh_transform(dh: DHParams, q: float, kind: str) -> np.ndarray:
    """Homogeneous frame step for one R or P joint at joint value q.

    The joint variable adds to theta for R and to d for P; a and alpha are
    fixed link geometry.
    """
    if kind == "R":
        th, d = dh.theta + q, dh.d
    elif kind == "P":
        th, d = dh.theta, dh.d + q
    else:
        raise PreconditionError(f"dh_transform supports R and P joints, got {kind!r}")
    ct, st = math.cos(th), math.sin(th)
    ca, sa = math.cos(dh.alpha), math.sin(dh.alpha)
    return np.array(
        [
            [ct, -ca * st, sa * st, dh.a * ct],
            [st, ca * ct, -sa * ct, dh.a * st],
            [0.0, sa, ca, d],
            [0.0, 0.0, 0.0, 1.0],
        ]
    )


# -- documents ---------------------------------------------------------------

_MECH_FIELDS = {"name", "planar", "links", "base_frame", "joints"}
_JOINT_FIELDS = {"kind", "parent", "child", "dh", "limits", "actuated", "pitch"}
_DH_FIELDS = {"theta", "d", "a", "alpha"}


def _require(obj, fields, optional=(), where=""):
    unknown = set(obj) - fields
    if unknown:
        raise DocumentError(f"unknown field(s) in {where}", field=sorted(unknown)[0])
    for f in fields - set(optional):
        if f not in obj:
            raise DocumentError(f"missing field in {where}", field=f)


def parse_mechanism(text: str) -> Mechanism:
    """Mechanism from JSON text; errors carry the offending field or line."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"invalid JSON: {e.msg}", line=e.lineno) from e
    if not isinstance(doc, dict):
        raise DocumentError("document root must be an object")
    _require(doc, _MECH_FIELDS, where="mechanism")
    joints = []
    for idx, jd in enumerate(doc["joints"]):
        _require(jd, _JOINT_FIELDS, optional=("dh", "pitch"), where=f"joint {idx}")
        dh = None
        if jd.get("dh") is not None:
            _require(jd["dh"], _DH_FIELDS, where=f"joint {idx} dh")
            dh = DHParams(**{k: float(jd["dh"][k]) for k in ("theta", "d", "a", "alpha")})
        try:
            joints.append(
                JointSpec(
                    kind=jd["kind"],
                    parent=int(jd["parent"]),
                    child=int(jd["child"]),
                    dh=dh,
                    limits=tuple((float(lo), float(hi)) for lo, hi in jd["limits"]),
                    actuated=bool(jd["actuated"]),
                    pitch=None if jd.get("pitch") is None else float(jd["pitch"]),
                )
            )
        except PreconditionError as e:
            raise DocumentError(str(e), field=f"joints[{idx}]") from e
    base = doc["base_frame"]
    if len(base) != 16:
        raise DocumentError("base_frame must list 16 numbers", field="base_frame")
    try:
        return Mechanism(
            name=str(doc["name"]),
            planar=bool(doc["planar"]),
            links=int(doc["links"]),
            joints=tuple(joints),
            base_frame=tuple(float(v) for v in base),
        )
    except PreconditionError as e:
        raise DocumentError(str(e)) from e


def serialize_mechanism(m: Mechanism) -> str:
    """Canonical JSON for a mechanism; parse(serialize(m)) == m."""
    doc = {
        "name": m.name,
        "planar": m.planar,
        "links": m.links,
        "base_frame": list(m.base_frame),
        "joints": [
            {
                "kind": j.kind,
                "parent": j.parent,
                "child": j.child,
                **({"dh": {"theta": j.dh.theta, "d": j.dh.d, "a": j.dh.a, "alpha": j.dh.alpha}} if j.dh else {}),
                "limits": [list(pair) for pair in j.limits],
                "actuated": j.actuated,
                **({"pitch": j.pitch} if j.pitch is not None else {}),
            }
            for j in m.joints
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


def serial_chain(name, dh_rows, kinds=None, planar=False, limits=None, base=None) -> Mechanism:
    """Convenience constructor for an open chain of R/P joints.

    dh_rows: sequence of (theta, d, a, alpha); kinds defaults to all 'R'.
    """
    n = len(dh_rows)
    kinds = kinds or "R" * n
    joints = []
    for i, row in enumerate(dh_rows):
        kind = kinds[i]
        lim = ()
        if kind == "P":
            lim = ((limits or {}).get(i) or (-1.0, 1.0),)
            lim = (tuple(lim[0]),)
        joints.append(
            JointSpec(kind=kind, parent=i, child=i + 1, dh=DHParams(*row), limits=lim)
        )
    kw = {}
    if base is not None:
        kw["base_frame"] = tuple(np.asarray(base, float).reshape(16))
    return Mechanism(name=name, planar=planar, links=n, joints=tuple(joints), **kw)
