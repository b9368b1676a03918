"""Predicate language for plan-piece domains in C x W.

A Domain is a finite union of boxes; a box is a conjunction of interval
clauses on scalar features of a configuration/workspace pair.  Features are
either raw coordinates of one side, the wrapped difference of a C angle and
a W angle, or the wrapped difference of a C angle and the prediction of a
named section branch.  Circle-valued features take clauses as arcs of
[0, 2*pi): lo <= hi is the ordinary arc, lo > hi wraps through zero, and
endpoint openness is tracked so unions of boxes can partition exactly.

Membership is an exact predicate.  Distance is measured per clause in the
feature's own metric and combined in quadrature over the clauses of a box;
for difference features the workspace argument is held fixed, so the box
distance is a conservative stand-in for true product-metric distance.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .charts import Chart, Circle, Interval, SphereModel, wrap_positive
from .errors import DomainError, PreconditionError

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class DomainContext:
    """What a domain needs to evaluate features: the configuration chart,
    the workspace model, and the section branches referenced by name."""

    c_chart: Chart
    w_model: object
    sections: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Feature:
    kind: str  # "coord" | "reldiff" | "secdiff"
    side: str = "c"  # coord only
    index: int = 0  # coordinate index; the C index for the diff kinds
    w_index: int = 0  # reldiff only
    section: str = ""  # secdiff only

    def __post_init__(self):
        if self.kind not in ("coord", "reldiff", "secdiff"):
            raise PreconditionError(f"unknown feature kind {self.kind!r}")
        if self.kind == "coord" and self.side not in ("c", "w"):
            raise PreconditionError(f"coord feature side must be c or w")
        if self.kind == "secdiff" and not self.section:
            raise PreconditionError("secdiff feature needs a section name")

    def label(self) -> str:
        if self.kind == "coord":
            return f"{self.side}[{self.index}]"
        if self.kind == "reldiff":
            return f"wrap(c[{self.index}]-w[{self.w_index}])"
        return f"wrap(c[{self.index}]-{self.section}(w)[{self.index}])"

    def _w_coord(self, ws, ctx: DomainContext, index: int):
        if isinstance(ctx.w_model, SphereModel):
            lat, lon = ctx.w_model.latlon(ws)
            if index == 0:
                return lat, False
            if index == 1:
                return lon, True
            raise PreconditionError("sphere features are lat (0) and lon (1)")
        if isinstance(ctx.w_model, Chart):
            wrapped = isinstance(ctx.w_model.factors[index], Circle)
            col = ws[:, index]
            return (wrap_positive(col) if wrapped else col), wrapped
        raise PreconditionError("domains support chart and sphere workspaces")

    def values(self, cs, ws, ctx: DomainContext):
        """(feature values (N,), wrapped flag)."""
        if self.kind == "coord":
            if self.side == "c":
                wrapped = isinstance(ctx.c_chart.factors[self.index], Circle)
                col = cs[:, self.index]
                return (wrap_positive(col) if wrapped else col), wrapped
            return self._w_coord(ws, ctx, self.index)
        if self.kind == "reldiff":
            wcol, wrapped = self._w_coord(ws, ctx, self.w_index)
            if not wrapped:
                raise DomainError("reldiff needs an angular workspace coordinate")
            return wrap_positive(cs[:, self.index] - wcol), True
        sec = ctx.sections.get(self.section)
        if sec is None:
            raise DomainError(f"section {self.section!r} not available")
        pred = sec(ws)
        return wrap_positive(cs[:, self.index] - pred[:, self.index]), True

    def to_doc(self) -> dict:
        return {
            "kind": self.kind,
            "side": self.side,
            "index": self.index,
            "w_index": self.w_index,
            "section": self.section,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Feature":
        return cls(kind=doc["kind"], side=doc["side"], index=doc["index"],
                   w_index=doc["w_index"], section=doc["section"])


def _arc_dist(v, target):
    d = np.abs(np.mod(v - target, TWO_PI))
    return np.minimum(d, TWO_PI - d)


@dataclass(frozen=True)
class Clause:
    """Interval constraint on one feature.

    For wrapped features the bounds live on [0, 2*pi); lo > hi means the
    arc passes through zero.  lo == hi denotes the singleton {lo} when both
    ends are closed and the complement of that point when both are open.
    full=True matches everything (used when a subtraction needs an explicit
    everything-clause for a feature).
    """

    feature: Feature
    lo: float | None = None
    hi: float | None = None
    lo_open: bool = False
    hi_open: bool = False
    wrap: bool = False
    full: bool = False

    def __post_init__(self):
        if self.full:
            return
        if self.wrap:
            if self.lo is None or self.hi is None:
                raise PreconditionError("wrapped clauses need both bounds")
            if not (0.0 <= self.lo < TWO_PI and 0.0 <= self.hi < TWO_PI):
                raise PreconditionError("wrapped bounds must lie in [0, 2*pi)")
            if self.lo == self.hi and self.lo_open != self.hi_open:
                raise PreconditionError("degenerate arc must be open-open or closed-closed")
        elif self.lo is None and self.hi is None:
            raise PreconditionError("a clause needs at least one bound (or full)")

    @property
    def _punctured(self) -> bool:
        # wrap arc from a point back to itself the long way round: everything
        # except that point
        return (self.wrap and not self.full and self.lo == self.hi
                and self.lo_open and self.hi_open)

    def contains(self, v: np.ndarray) -> np.ndarray:
        if self.full:
            return np.ones(v.shape, dtype=bool)
        if self._punctured:
            return v != self.lo
        if self.wrap:
            above = (v > self.lo) if self.lo_open else (v >= self.lo)
            below = (v < self.hi) if self.hi_open else (v <= self.hi)
            if self.lo <= self.hi:
                return above & below
            return above | below
        ok = np.ones(v.shape, dtype=bool)
        if self.lo is not None:
            ok &= (v > self.lo) if self.lo_open else (v >= self.lo)
        if self.hi is not None:
            ok &= (v < self.hi) if self.hi_open else (v <= self.hi)
        return ok

    def distance(self, v: np.ndarray) -> np.ndarray:
        """Distance to the clause's closure in the feature metric."""
        if self.full or self._punctured:
            return np.zeros(v.shape)
        if self.wrap:
            inside = self.contains_closure(v)
            d = np.minimum(_arc_dist(v, self.lo), _arc_dist(v, self.hi))
            return np.where(inside, 0.0, d)
        d = np.zeros(v.shape)
        if self.lo is not None:
            d = np.maximum(d, self.lo - v)
        if self.hi is not None:
            d = np.maximum(d, v - self.hi)
        return d

    def contains_closure(self, v: np.ndarray) -> np.ndarray:
        if self.full or self._punctured:
            return np.ones(v.shape, dtype=bool)
        if self.wrap:
            if self.lo <= self.hi:
                return (v >= self.lo) & (v <= self.hi)
            return (v >= self.lo) | (v <= self.hi)
        ok = np.ones(v.shape, dtype=bool)
        if self.lo is not None:
            ok &= v >= self.lo
        if self.hi is not None:
            ok &= v <= self.hi
        return ok

    def to_doc(self) -> dict:
        return {
            "feature": self.feature.to_doc(),
            "lo": self.lo,
            "hi": self.hi,
            "lo_open": self.lo_open,
            "hi_open": self.hi_open,
            "wrap": self.wrap,
            "full": self.full,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "Clause":
        return cls(feature=Feature.from_doc(doc["feature"]), lo=doc["lo"],
                   hi=doc["hi"], lo_open=doc["lo_open"], hi_open=doc["hi_open"],
                   wrap=doc["wrap"], full=doc["full"])


@dataclass(frozen=True)
class Box:
    clauses: tuple

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))

    def contains(self, cs, ws, ctx) -> np.ndarray:
        ok = np.ones(cs.shape[0], dtype=bool)
        for cl in self.clauses:
            v, _ = cl.feature.values(cs, ws, ctx)
            ok &= cl.contains(v)
        return ok

    def distance(self, cs, ws, ctx) -> np.ndarray:
        acc = np.zeros(cs.shape[0])
        for cl in self.clauses:
            v, _ = cl.feature.values(cs, ws, ctx)
            acc += cl.distance(v) ** 2
        return np.sqrt(acc)

    def to_doc(self) -> dict:
        return {"clauses": [cl.to_doc() for cl in self.clauses]}

    @classmethod
    def from_doc(cls, doc: dict) -> "Box":
        return cls(tuple(Clause.from_doc(c) for c in doc["clauses"]))


@dataclass(frozen=True)
class Domain:
    """Union of boxes.  An empty box tuple is the empty domain (nothing
    contained, distance infinite); disjointification produces these when a
    later cover member is swallowed by earlier ones."""

    boxes: tuple

    def __post_init__(self):
        object.__setattr__(self, "boxes", tuple(self.boxes))

    @property
    def is_empty(self) -> bool:
        return not self.boxes

    def contains(self, cs, ws, ctx) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, float))
        ws = np.atleast_2d(np.asarray(ws, float))
        ok = np.zeros(cs.shape[0], dtype=bool)
        for b in self.boxes:
            ok |= b.contains(cs, ws, ctx)
        return ok

    def distance(self, cs, ws, ctx) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, float))
        ws = np.atleast_2d(np.asarray(ws, float))
        d = np.full(cs.shape[0], np.inf)
        for b in self.boxes:
            d = np.minimum(d, b.distance(cs, ws, ctx))
        return d

    def to_doc(self) -> dict:
        return {"boxes": [b.to_doc() for b in self.boxes]}

    @classmethod
    def from_doc(cls, doc: dict) -> "Domain":
        return cls(tuple(Box.from_doc(b) for b in doc["boxes"]))

    def to_json(self) -> str:
        return json.dumps(self.to_doc(), sort_keys=True)


# ---------------------------------------------------------------------------
# clause builders

def coord(side: str, index: int) -> Feature:
    return Feature(kind="coord", side=side, index=index)


def reldiff(c_index: int, w_index: int) -> Feature:
    return Feature(kind="reldiff", index=c_index, w_index=w_index)


def secdiff(c_index: int, section: str) -> Feature:
    return Feature(kind="secdiff", index=c_index, section=section)


def arc(feature: Feature, lo: float, hi: float, lo_open=False, hi_open=False) -> Clause:
    return Clause(feature, lo=float(wrap_positive(lo)), hi=float(wrap_positive(hi)),
                  lo_open=lo_open, hi_open=hi_open, wrap=True)


def span(feature: Feature, lo=None, hi=None, lo_open=False, hi_open=False) -> Clause:
    return Clause(feature, lo=lo, hi=hi, lo_open=lo_open, hi_open=hi_open, wrap=False)


def everything(feature: Feature, wrap: bool) -> Clause:
    return Clause(feature, full=True, wrap=wrap)


# ---------------------------------------------------------------------------
# disjointification: orthogonal subtraction of boxes over shared features

def _linear_pieces(cl: Clause):
    """Clause as linear intervals on the real line ([0, 2*pi] for wrapped
    features, splitting wrap-through arcs at zero).  Each piece is
    (lo, hi, lo_open, hi_open) with concrete bounds."""
    if cl.full:
        if cl.wrap:
            return [(0.0, TWO_PI, False, True)]
        return [(-np.inf, np.inf, True, True)]
    if not cl.wrap:
        lo = -np.inf if cl.lo is None else cl.lo
        hi = np.inf if cl.hi is None else cl.hi
        return [(lo, hi, cl.lo_open, cl.hi_open)]
    if cl._punctured:
        if cl.lo == 0.0:
            return [(0.0, TWO_PI, True, True)]
        return [(cl.lo, TWO_PI, True, True), (0.0, cl.hi, False, True)]
    if cl.lo <= cl.hi:
        return [(cl.lo, cl.hi, cl.lo_open, cl.hi_open)]
    # wrap-through arc: upper part owns the point 0 (== 2*pi) iff hi side
    # reaches it, which it always does here since hi >= 0
    return [(cl.lo, TWO_PI, cl.lo_open, True), (0.0, cl.hi, False, cl.hi_open)]


def _piece_intersect(a, b):
    lo = max(a[0], b[0])
    hi = min(a[1], b[1])
    lo_open = (a[2] if a[0] > b[0] else b[2]) if a[0] != b[0] else (a[2] or b[2])
    hi_open = (a[3] if a[1] < b[1] else b[3]) if a[1] != b[1] else (a[3] or b[3])
    if lo > hi or (lo == hi and (lo_open or hi_open)):
        return None
    return (lo, hi, lo_open, hi_open)


def _piece_subtract(a, b):
    """a minus b as a list of pieces."""
    inter = _piece_intersect(a, b)
    if inter is None:
        return [a]
    out = []
    if a[0] < inter[0] or (a[0] == inter[0] and not a[2] and inter[2]):
        out.append((a[0], inter[0], a[2], not inter[2]))
    if inter[1] < a[1] or (inter[1] == a[1] and not a[3] and inter[3]):
        out.append((inter[1], a[1], not inter[3], a[3]))
    return out


def _pieces_to_clauses(feature, wrap, pieces):
    out = []
    for lo, hi, lo_open, hi_open in pieces:
        if wrap:
            hi_b = hi if hi < TWO_PI else 0.0
            # an arc spanning the whole circle is just "full"
            if lo == 0.0 and hi == TWO_PI and not lo_open and hi_open:
                out.append(Clause(feature, full=True, wrap=True))
            else:
                out.append(Clause(feature, lo=lo, hi=hi_b, lo_open=lo_open,
                                  hi_open=hi_open, wrap=True))
        else:
            out.append(Clause(feature,
                              lo=None if lo == -np.inf else lo,
                              hi=None if hi == np.inf else hi,
                              lo_open=lo_open, hi_open=hi_open, wrap=False))
    return out


def _box_features(box: Box):
    return {cl.feature: cl for cl in box.clauses}


def _subtract_box(a: Box, b: Box) -> list:
    """Boxes covering a minus b exactly."""
    fa = _box_features(a)
    fb = _box_features(b)
    feats = list(fa.keys()) + [f for f in fb.keys() if f not in fa]
    wraps = {}
    for f in feats:
        cl = fa.get(f) or fb.get(f)
        wraps[f] = cl.wrap

    def clause_of(box_map, f):
        return box_map.get(f) or Clause(f, full=True, wrap=wraps[f])

    out = []
    prefix = []  # clauses pinning earlier features to the intersection
    for pos, f in enumerate(feats):
        ca, cb = clause_of(fa, f), clause_of(fb, f)
        rest = [clause_of(fa, g) for g in feats[pos + 1:]]
        diff_pieces = []
        inter_pieces = []
        for pa in _linear_pieces(ca):
            for pb in _linear_pieces(cb):
                p = _piece_intersect(pa, pb)
                if p is not None:
                    inter_pieces.append(p)
            remaining = [pa]
            for pb in _linear_pieces(cb):
                remaining = [r for piece in remaining for r in _piece_subtract(piece, pb)]
            diff_pieces.extend(remaining)
        for cl in _pieces_to_clauses(f, wraps[f], diff_pieces):
            out.append(Box(tuple(prefix + [cl] + rest)))
        if not inter_pieces:
            # nothing survives into the intersection prefix: a and b are
            # disjoint along f, so everything of a is already emitted
            return [a] if pos == 0 and not out else out
        inter_clauses = _pieces_to_clauses(f, wraps[f], inter_pieces)
        if len(inter_clauses) == 1:
            prefix.append(inter_clauses[0])
        else:
            # split the subtraction across the intersection branches
            result = list(out)
            for cl in inter_clauses:
                branch_a = Box(tuple(prefix + [cl] + rest))
                for sub in _subtract_box(branch_a, b):
                    result.append(sub)
            return result
    return out


def _drop_full(box: Box) -> Box:
    kept = tuple(cl for cl in box.clauses if not cl.full)
    return Box(kept) if kept else box


def disjointify(domains: list) -> list:
    """Make a list of domains pairwise disjoint by subtracting, from each
    domain, everything covered by earlier ones.  The union is unchanged.
    Later domains swallowed entirely by earlier ones come back empty;
    callers decide whether to drop or keep the empty survivors."""
    out = []
    consumed: list = []
    for dom in domains:
        boxes = list(dom.boxes)
        for earlier in consumed:
            boxes = [piece for b in boxes for piece in _subtract_and_simplify(b, earlier)]
        out.append(Domain(tuple(_drop_full(b) for b in boxes)))
        consumed.extend(dom.boxes)
    return out


def _subtract_and_simplify(box: Box, other: Box) -> list:
    pieces = _subtract_box(box, other)
    return [p for p in pieces if not _box_obviously_empty(p)]


def _box_obviously_empty(box: Box) -> bool:
    for cl in box.clauses:
        if cl.full:
            continue
        if not cl.wrap and cl.lo is not None and cl.hi is not None:
            if cl.lo > cl.hi or (cl.lo == cl.hi and (cl.lo_open or cl.hi_open)):
                return True
    return False
