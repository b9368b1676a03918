"""Sections of kinematic maps and the categorical covers plans are built from.

A SectionPiece is a domain in W together with a right inverse of the map on
that domain, optionally equipped with a deformation K contracting the section
image to a point c1 of C.  A CatPiece is a domain in C with a deformation H
contracting it to a point c0.  Both deformations are straight-line homotopies
in a lifted angle patch: coordinates are unwrapped around a per-piece anchor
so the lerp never crosses a wrap seam inside the piece.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .charts import Chart, Circle, SphereModel, wrap_positive
from .domains import Box, Domain, DomainContext, arc, coord, span
from .errors import DomainError, PreconditionError
from .kinematics import KinematicMap, canonical_map

__all__ = [
    "SectionPiece",
    "CatPiece",
    "canonical_section",
    "cat_cover_torus",
    "trivial_cat_cover",
    "sphere_section_cover",
    "annulus_section_cover",
]

TWO_PI = 2.0 * np.pi


def _lift(chart: Chart, anchor: np.ndarray, pts: np.ndarray) -> np.ndarray:
    """Unwrap pts into the angle patch centered on anchor."""
    return anchor + chart.diff(pts, anchor)


def _lerp_paths(chart: Chart, anchor, starts, target, ts) -> np.ndarray:
    """(m, T, dim) straight paths from each start to target, computed in the
    lifted patch around anchor."""
    anchor = np.asarray(anchor, float)
    la = _lift(chart, anchor, np.atleast_2d(np.asarray(starts, float)))
    lt = _lift(chart, anchor, np.asarray(target, float))
    ts = np.atleast_1d(np.asarray(ts, float))
    return (la[:, None, :] * (1.0 - ts)[None, :, None]
            + lt[None, None, :] * ts[None, :, None])


def _w_dummy(ws_like: np.ndarray, dim: int) -> np.ndarray:
    return np.zeros((ws_like.shape[0], dim))


@dataclass(frozen=True)
class SectionPiece:
    """A branch of the inverse kinematics over a region of W.

    section maps (m, wdim) points to (m, cdim) configurations with
    f(section(w)) = w on the domain.  When c1 is set the piece carries the
    contraction K(w, s) from section values (s=0) to the constant c1 (s=1),
    computed as a straight lerp in the patch around anchor.
    """

    name: str
    domain: Domain
    chart: Chart
    section: object
    anchor: np.ndarray | None = None
    c1: np.ndarray | None = None

    @property
    def has_deformation(self) -> bool:
        return self.c1 is not None

    def contains(self, ws, ctx: DomainContext) -> np.ndarray:
        ws = np.atleast_2d(np.asarray(ws, float))
        return self.domain.contains(_w_dummy(ws, ctx.c_chart.dim), ws, ctx)

    def deform(self, ws, ts) -> np.ndarray:
        if self.c1 is None:
            raise PreconditionError(f"section piece {self.name!r} has no deformation")
        return _lerp_paths(self.chart, self.anchor, self.section(ws), self.c1, ts)


@dataclass(frozen=True)
class CatPiece:
    """A categorical piece of C: a domain with a contraction to c0.

    parts lists (sub-domain, anchor) pairs; a configuration is unwrapped
    around the anchor of the first part containing it, so the contraction is
    continuous on each part even when the piece as a whole hugs a wrap seam.
    """

    name: str
    domain: Domain
    chart: Chart
    parts: tuple
    c0: np.ndarray

    def contains(self, cs, ctx: DomainContext) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, float))
        return self.domain.contains(cs, np.zeros((cs.shape[0], 1)), ctx)

    def contract(self, cs, ts, ctx: DomainContext) -> np.ndarray:
        cs = np.atleast_2d(np.asarray(cs, float))
        ts = np.atleast_1d(np.asarray(ts, float))
        out = np.empty((cs.shape[0], ts.size, self.chart.dim))
        assigned = np.zeros(cs.shape[0], dtype=bool)
        dummy = np.zeros((cs.shape[0], 1))
        for part_domain, anchor in self.parts:
            sel = part_domain.contains(cs, dummy, ctx) & ~assigned
            if np.any(sel):
                out[sel] = _lerp_paths(self.chart, anchor, cs[sel], self.c0, ts)
                assigned |= sel
        if not np.all(assigned):
            # points outside every part still get a well-defined contraction
            out[~assigned] = _lerp_paths(self.chart, self.parts[0][1],
                                         cs[~assigned], self.c0, ts)
        return out


def _as_map(k_or_name) -> KinematicMap:
    if isinstance(k_or_name, KinematicMap):
        return k_or_name
    return canonical_map(k_or_name)


def _everything() -> Domain:
    return Domain((Box(()),))


def _planar_section(r1: float, r2: float, sign: float):
    def section(ws):
        ws = np.atleast_2d(np.asarray(ws, float))
        phi, r = ws[:, 0], ws[:, 1]
        argv = np.clip((r * r - r1 * r1 - r2 * r2) / (2.0 * r1 * r2), -1.0, 1.0)
        beta = sign * np.arccos(argv)
        delta = np.arctan2(r2 * np.sin(beta), r1 + r2 * np.cos(beta))
        alpha = phi - delta
        return np.stack([alpha, beta], axis=1)

    return section


def _geo_section(model: SphereModel, flip: bool):
    def section(ws):
        ws = np.atleast_2d(np.asarray(ws, float))
        lat, lon = model.latlon(ws)
        if np.any(np.abs(lat) >= np.pi / 2 - 1e-12):
            raise DomainError("geo branch is undefined at the poles")
        if flip:
            return np.stack([np.pi - lat, lon + np.pi], axis=1)
        return np.stack([lat, lon], axis=1)

    return section


def _identity_section():
    def section(ws):
        return np.array(np.atleast_2d(np.asarray(ws, float)))

    return section


def canonical_section(k_or_name, branch: str) -> SectionPiece:
    """Named global/partial inverse branches of the canonical maps.

    planar_rr: elbow_up / elbow_down, continuous on the whole closed annulus.
    pointing: geo / geo_flip, defined on the sphere minus both poles.
    scara: elbow_up / elbow_down on the elbow part, identity on z.
    identity maps: identity.
    """
    k = _as_map(k_or_name)
    chart = k.config_chart
    if k.name == "planar_rr":
        if branch not in ("elbow_up", "elbow_down"):
            raise PreconditionError(f"unknown planar_rr branch {branch!r}")
        sign = 1.0 if branch == "elbow_up" else -1.0
        sec = _planar_section(k.params["r1"], k.params["r2"], sign)
        return SectionPiece(name=branch, domain=_everything(), chart=chart, section=sec)
    if k.name == "pointing":
        if branch not in ("geo", "geo_flip"):
            raise PreconditionError(f"unknown pointing branch {branch!r}")
        dom = Domain((Box((span(coord("w", 0), -np.pi / 2, np.pi / 2,
                                lo_open=True, hi_open=True),)),))
        sec = _geo_section(k.work_model, branch == "geo_flip")
        return SectionPiece(name=branch, domain=dom, chart=chart, section=sec)
    if k.name == "scara":
        if branch not in ("elbow_up", "elbow_down",
                          "elbow_up x identity", "elbow_down x identity"):
            raise PreconditionError(f"unknown scara branch {branch!r}")
        sign = 1.0 if branch.startswith("elbow_up") else -1.0
        planar = _planar_section(k.params["r1"], k.params["r2"], sign)

        def sec(ws):
            ws = np.atleast_2d(np.asarray(ws, float))
            return np.concatenate([planar(ws[:, :2]), ws[:, 2:3]], axis=1)

        return SectionPiece(name=branch, domain=_everything(), chart=chart, section=sec)
    if k.name.startswith("identity"):
        if branch != "identity":
            raise PreconditionError(f"unknown identity branch {branch!r}")
        return SectionPiece(name=branch, domain=_everything(), chart=chart,
                            section=_identity_section())
    raise PreconditionError(f"no canonical sections for map {k.name!r}")


# ---------------------------------------------------------------------------
# categorical covers


def cat_cover_torus(chart: Chart) -> list:
    """Three-piece categorical cover of the 2-torus.

    Piece 1 is the big closed square clear of the wrap seams; piece 2 is a
    pair of strips along the seams; piece 3 is a small cross around the
    corner (0,0).  Each part lifts around its own anchor, so every
    contraction is a straight lerp free of seam crossings.
    """
    if chart.dim != 2 or not all(isinstance(f, Circle) for f in chart.factors):
        raise PreconditionError("the torus cover needs a chart of two circles")
    u, v = coord("c", 0), coord("c", 1)
    e = 0.5
    pi = np.pi

    d1 = Domain((Box((arc(u, e, TWO_PI - e), arc(v, e, TWO_PI - e))),))
    p1 = CatPiece(name="square", domain=d1, chart=chart,
                  parts=((d1, np.array([pi, pi])),), c0=np.array([pi, pi]))

    a = Domain((Box((arc(u, TWO_PI - e, e, lo_open=True, hi_open=True),
                     arc(v, 1.0, TWO_PI - 1.0))),))
    b = Domain((Box((arc(u, 1.0, TWO_PI - 1.0),
                     arc(v, TWO_PI - e, e, lo_open=True, hi_open=True))),))
    d2 = Domain(a.boxes + b.boxes)
    p2 = CatPiece(name="strips", domain=d2, chart=chart,
                  parts=((a, np.array([0.0, pi])), (b, np.array([pi, 0.0]))),
                  c0=np.array([pi, pi]))

    d3 = Domain((Box((arc(u, TWO_PI - e, e, lo_open=True, hi_open=True),
                      arc(v, TWO_PI - 1.0, 1.0, lo_open=True, hi_open=True))),
                 Box((arc(u, TWO_PI - 1.0, 1.0, lo_open=True, hi_open=True),
                      arc(v, TWO_PI - e, e, lo_open=True, hi_open=True))),))
    p3 = CatPiece(name="cross", domain=d3, chart=chart,
                  parts=((d3, np.array([0.0, 0.0])),), c0=np.array([0.0, 0.0]))
    return [p1, p2, p3]


def trivial_cat_cover(chart: Chart, c0=None) -> list:
    """Single-piece cover for a contractible chart (no circle factors)."""
    if any(isinstance(f, Circle) for f in chart.factors):
        raise PreconditionError("a chart with circle factors is not contractible")
    if c0 is None:
        c0 = np.array([0.5 * (f.lo + f.hi) for f in chart.factors])
    c0 = np.asarray(c0, float)
    dom = _everything()
    return [CatPiece(name="all", domain=dom, chart=chart,
                     parts=((dom, c0),), c0=c0)]


def sphere_section_cover(k_or_name="pointing") -> list:
    """Categorical section cover for the pointing map, three stages.

    The geodesic-coordinates branch cannot contract over a full band of
    longitudes (its image winds a circle factor), so the band and caps stop
    short of the slit lon in (-0.4, 0.4), and the slit strip is its own
    stage anchored at longitude zero.  The poles, where the branch is
    undefined, ride along with the band stage as singleton points sent to
    longitude pi.
    """
    k = _as_map(k_or_name)
    if k.name != "pointing":
        raise PreconditionError("the sphere section cover is for the pointing map")
    chart = k.config_chart
    model = k.work_model
    l0 = float(np.arcsin(0.9))
    lam = 0.4
    lat, lon = coord("w", 0), coord("w", 1)
    pi = np.pi
    geo = _geo_section(model, False)

    def band_section(ws):
        ws = np.atleast_2d(np.asarray(ws, float))
        la, lo = model.latlon(ws)
        at_pole = np.abs(la) >= pi / 2 - 1e-12
        lo = np.where(at_pole, pi, lo)
        return np.stack([la, lo], axis=1)

    band = SectionPiece(
        name="band",
        domain=Domain((Box((span(lat, -l0, l0), arc(lon, lam, TWO_PI - lam))),
                       Box((span(lat, pi / 2, pi / 2),)),
                       Box((span(lat, -pi / 2, -pi / 2),)))),
        chart=chart, section=band_section,
        anchor=np.array([0.0, pi]), c1=np.array([0.0, pi]))

    caps = SectionPiece(
        name="caps",
        domain=Domain((Box((span(lat, l0, pi / 2, lo_open=True, hi_open=True),
                            arc(lon, lam, TWO_PI - lam))),
                       Box((span(lat, -pi / 2, -l0, lo_open=True, hi_open=True),
                            arc(lon, lam, TWO_PI - lam))))),
        chart=chart, section=geo,
        anchor=np.array([0.0, pi]), c1=np.array([0.0, pi]))

    slit = SectionPiece(
        name="slit",
        domain=Domain((Box((span(lat, -pi / 2, pi / 2, lo_open=True, hi_open=True),
                            arc(lon, TWO_PI - lam, lam, lo_open=True, hi_open=True))),)),
        chart=chart, section=geo,
        anchor=np.array([0.0, 0.0]), c1=np.array([0.0, 0.0]))

    return [band, caps, slit]


def annulus_section_cover(k_or_name="planar_rr") -> list:
    """Two-piece categorical section cover of the planar arm's annulus.

    Half-annulus split by azimuth: the wide arc clear of the seam and the
    narrow arc across it, both carrying the elbow-up branch.  Anchors sit at
    the azimuth midpoints so the contractions never cross a wrap seam (the
    section's alpha leads phi by at most asin(r2/r1)).
    """
    k = _as_map(k_or_name)
    if k.name != "planar_rr":
        raise PreconditionError("the annulus section cover is for the planar arm")
    chart = k.config_chart
    r1, r2 = k.params["r1"], k.params["r2"]
    if r2 >= r1:
        raise PreconditionError("the cover's lift margins need r2 < r1")
    lam = 0.6
    phi = coord("w", 0)
    pi = np.pi
    sec = _planar_section(r1, r2, 1.0)

    wide = SectionPiece(
        name="wide",
        domain=Domain((Box((arc(phi, lam, TWO_PI - lam),)),)),
        chart=chart, section=sec,
        anchor=np.array([pi, pi / 2]), c1=np.array([pi, pi / 2]))

    seam = SectionPiece(
        name="seam",
        domain=Domain((Box((arc(phi, TWO_PI - lam, lam, lo_open=True, hi_open=True),)),)),
        chart=chart, section=sec,
        anchor=np.array([0.0, pi / 2]), c1=np.array([0.0, pi / 2]))

    return [wide, seam]
