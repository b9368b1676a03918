"""Manipulation plans: partitions of C x W with a section of pi_f per piece.

A plan piece owns a Domain over C x W and a rule producing, for each pair
(c, w) in the domain, a configuration path from c to some preimage of w.
Rules are batch closures: rule(cs (m, dc), ws (m, dw), ts (T,)) -> paths
(m, T, dc).  Plans are built by a small set of constructors (identity plans,
pullback along a global section, products, the cat/csec combinator,
disjointification), each of which records a recipe so the plan document
format can rebuild the object deterministically.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .charts import Chart, Circle, Interval
from .domains import (Box, Clause, Domain, DomainContext, arc, coord, reldiff,
                      span)
from .domains import disjointify as disjointify_domains
from .errors import DocumentError, DomainError, PreconditionError
from .kinematics import KinematicMap, canonical_map, product_map
from .sections import (CatPiece, SectionPiece, annulus_section_cover,
                       canonical_section, cat_cover_torus,
                       sphere_section_cover, trivial_cat_cover)

__all__ = [
    "PathInC",
    "PlanPiece",
    "ManipulationPlan",
    "KnownValue",
    "KNOWN_VALUES",
    "known_values",
    "identity_interval_plan",
    "identity_circle_plan",
    "identity_torus_plan",
    "product_plan",
    "pullback_plan",
    "combine_csec_cat",
    "combine_from_named",
    "disjointify",
    "builtin_plan",
    "BUILTIN_PLANS",
    "serialize_plan",
    "parse_plan",
    "plateau_map",
    "h_fixture_gap",
    "h_fixture_plan",
    "h_fixture_single_plan",
]

TWO_PI = 2.0 * np.pi

BUILTIN_PLANS = (
    "identity_interval",
    "identity_circle",
    "identity_torus",
    "planar_rr",
    "scara",
    "pointing",
)


@dataclass(frozen=True)
class PathInC:
    """Uniformly sampled configuration path on [0, 1]."""

    chart: Chart
    samples: np.ndarray

    def __post_init__(self):
        s = np.atleast_2d(np.asarray(self.samples, float))
        if s.shape[0] < 2:
            raise PreconditionError("a path needs at least two samples")
        gaps = self.chart.distance(s[1:], s[:-1])
        if float(np.max(gaps)) > 0.2:
            raise PreconditionError("path samples more than 0.2 chart units apart")
        object.__setattr__(self, "samples", s)

    @property
    def times(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.samples.shape[0])

    def point(self, t: float) -> np.ndarray:
        n = self.samples.shape[0]
        x = min(max(float(t), 0.0), 1.0) * (n - 1)
        i = min(int(x), n - 2)
        u = x - i
        return self.chart.interpolate(self.samples[i], self.samples[i + 1],
                                      np.asarray(u))

    @property
    def start(self) -> np.ndarray:
        return self.samples[0]

    @property
    def end(self) -> np.ndarray:
        return self.samples[-1]


@dataclass(frozen=True)
class PlanPiece:
    name: str
    domain: Domain
    rule: object  # (cs, ws, ts) -> (m, T, dc)


@dataclass(frozen=True)
class KnownValue:
    """A reference value for a fixture, with its citation.

    external marks values carried from the general literature; the rest are
    published values for these specific mechanism families.
    """

    fixture: str
    quantity: str  # "TC" | "cat" | "csec"
    values: tuple
    citation: str
    external: bool = False


KNOWN_VALUES = (
    KnownValue("planar_rr", "TC", (3,),
               "published value for the planar two-link arm"),
    KnownValue("scara", "TC", (3,),
               "published value for the planar arm with a vertical slide"),
    KnownValue("pointing", "TC", (3, 4),
               "published value for the universal-joint pointing map"),
    KnownValue("identity_circle", "TC", (2,),
               "Farber, Topological complexity of motion planning, "
               "Discrete Comput. Geom. 29 (2003) 211-221", external=True),
    KnownValue("identity_torus", "TC", (3,),
               "Farber, Topological complexity of motion planning, "
               "Discrete Comput. Geom. 29 (2003) 211-221", external=True),
    KnownValue("identity_torus", "cat", (3,),
               "Cornea, Lupton, Oprea, Tanre, Lusternik-Schnirelmann "
               "Category, AMS Surveys 103 (2003)", external=True),
    KnownValue("identity_interval", "TC", (1,),
               "Farber, Topological complexity of motion planning, "
               "Discrete Comput. Geom. 29 (2003) 211-221", external=True),
)


def known_values(fixture: str | None = None, quantity: str | None = None) -> tuple:
    out = KNOWN_VALUES
    if fixture is not None:
        out = tuple(v for v in out if v.fixture == fixture)
    if quantity is not None:
        out = tuple(v for v in out if v.quantity == quantity)
    return out


@dataclass
class ManipulationPlan:
    name: str
    kmap: KinematicMap
    pieces: tuple
    sections: dict = field(default_factory=dict)
    recipe: dict | None = None
    note: str = ""

    def __post_init__(self):
        self.pieces = tuple(self.pieces)

    @property
    def piece_count(self) -> int:
        return len(self.pieces)

    @property
    def ctx(self) -> DomainContext:
        return DomainContext(c_chart=self.kmap.config_chart,
                             w_model=self.kmap.work_model,
                             sections=self.sections)

    @property
    def known(self) -> tuple:
        return known_values(self.name)

    def memberships(self, cs, ws) -> np.ndarray:
        """(m, piece_count) containment flags."""
        cs = np.atleast_2d(np.asarray(cs, float))
        ws = np.atleast_2d(np.asarray(ws, float))
        ctx = self.ctx
        return np.stack([p.domain.contains(cs, ws, ctx) for p in self.pieces],
                        axis=1)

    def piece_of(self, c, w) -> int:
        """Index of the unique piece containing (c, w)."""
        flags = self.memberships(c, w)[0]
        hits = np.flatnonzero(flags)
        if hits.size != 1:
            raise DomainError(
                f"(c, w) lies in {hits.size} piece domains, expected exactly 1")
        return int(hits[0])

    def path(self, c, w, samples: int = 17) -> PathInC:
        """The plan's configuration path for one (c, w) pair, refined until
        consecutive samples are within 0.2 chart units."""
        c = np.asarray(c, float)
        w = np.asarray(w, float)
        piece = self.pieces[self.piece_of(c, w)]
        chart = self.kmap.config_chart
        n = max(int(samples), 2)
        while True:
            ts = np.linspace(0.0, 1.0, n)
            path = piece.rule(c[None, :], w[None, :], ts)[0]
            gaps = chart.distance(path[1:], path[:-1])
            if float(np.max(gaps)) <= 0.2 or n > 2048:
                return PathInC(chart, path)
            n = 2 * n - 1


# ---------------------------------------------------------------------------
# rule helpers


def _lerp_rule(chart: Chart, target_fn):
    """Straight chart-geodesic path from c to target_fn(cs, ws)."""

    def rule(cs, ws, ts):
        tgt = target_fn(cs, ws)
        d = chart.diff(tgt, cs)
        return cs[:, None, :] + ts[None, :, None] * d[:, None, :]

    return rule


def _everything() -> Domain:
    return Domain((Box(()),))


def _same_chart(a: Chart, b: Chart) -> bool:
    return isinstance(a, Chart) and isinstance(b, Chart) \
        and tuple(a.factors) == tuple(b.factors)


# ---------------------------------------------------------------------------
# identity plans


def identity_interval_plan(k: KinematicMap | None = None) -> ManipulationPlan:
    """One piece: C is contractible, so straight lines are a global section."""
    k = k or canonical_map("identity_interval")
    piece = PlanPiece(name="all", domain=_everything(),
                      rule=_lerp_rule(k.config_chart, lambda cs, ws: ws))
    return ManipulationPlan(name=k.name, kmap=k, pieces=(piece,),
                            recipe={"kind": "builtin", "name": "identity_interval"})


def identity_circle_plan(k: KinematicMap | None = None) -> ManipulationPlan:
    """Two pieces: shortest arc where it is unique, counterclockwise at the
    antipode.  The near domain is the circle minus the antipodal offset; the
    far domain is that single offset."""
    k = k or canonical_map("identity_circle")
    chart = k.config_chart
    pi = float(np.pi)
    near = PlanPiece(
        name="near",
        domain=Domain((Box((arc(reldiff(0, 0), pi, pi, lo_open=True, hi_open=True),)),)),
        rule=_lerp_rule(chart, lambda cs, ws: ws))

    def far_rule(cs, ws, ts):
        return cs[:, None, :] + ts[None, :, None] * pi

    far = PlanPiece(
        name="far",
        domain=Domain((Box((arc(reldiff(0, 0), pi, pi),)),)),
        rule=far_rule)
    return ManipulationPlan(name=k.name, kmap=k, pieces=(near, far),
                            recipe={"kind": "builtin", "name": "identity_circle"})


def identity_torus_plan() -> ManipulationPlan:
    plan = product_plan(identity_circle_plan(), identity_circle_plan(),
                        kmap=canonical_map("identity_torus"),
                        name="identity_torus")
    plan.recipe = {"kind": "builtin", "name": "identity_torus"}
    return plan


# ---------------------------------------------------------------------------
# feature reindexing for product plans


def _shift_feature(f, dc: int, dw: int):
    if f.kind == "coord":
        if f.side == "c":
            return coord("c", f.index + dc)
        return coord("w", f.index + dw)
    if f.kind == "reldiff":
        return reldiff(f.index + dc, f.w_index + dw)
    from .domains import secdiff
    return secdiff(f.index + dc, f.section)


def _shift_clause(cl: Clause, dc: int, dw: int) -> Clause:
    return Clause(feature=_shift_feature(cl.feature, dc, dw), lo=cl.lo, hi=cl.hi,
                  lo_open=cl.lo_open, hi_open=cl.hi_open, wrap=cl.wrap, full=cl.full)


def _cross_boxes(a: Domain, b: Domain, dc: int, dw: int) -> list:
    """Boxes of (a x b) with b's features shifted by the f-block widths."""
    out = []
    for ba in a.boxes:
        for bb in b.boxes:
            out.append(Box(tuple(ba.clauses)
                           + tuple(_shift_clause(cl, dc, dw) for cl in bb.clauses)))
    return out


def _pad_section(sec, col_lo: int, col_hi: int, out_lo: int, out_dim: int):
    """Wrap a section of one factor so it consumes/produces full-width rows."""

    def wrapped(ws):
        ws = np.atleast_2d(np.asarray(ws, float))
        block = sec(ws[:, col_lo:col_hi])
        out = np.zeros((ws.shape[0], out_dim))
        out[:, out_lo:out_lo + block.shape[1]] = block
        return out

    return wrapped


def product_plan(plan_f: ManipulationPlan, plan_g: ManipulationPlan,
                 kmap: KinematicMap | None = None,
                 name: str | None = None) -> ManipulationPlan:
    """Plan for the product map with pieces P_k = union over i+j=k of
    piece_i(f) x piece_j(g); the summands are mutually separated, so the
    sections patch blockwise.  Piece count is count(f) + count(g) - 1."""
    kf, kg = plan_f.kmap, plan_g.kmap
    k = kmap or product_map(kf, kg)
    dcf, dwf = kf.config_chart.dim, kf.work_model.dim
    dc = k.config_chart.dim

    sections = {}
    for nm, sec in plan_f.sections.items():
        sections[nm] = _pad_section(sec, 0, dwf, 0, dc)
    for nm, sec in plan_g.sections.items():
        if nm in sections:
            raise PreconditionError(f"section name collision in product: {nm!r}")
        sections[nm] = _pad_section(sec, dwf, k.work_model.dim, dcf, dc)

    ctx_f, ctx_g = plan_f.ctx, plan_g.ctx
    nf, ng = plan_f.piece_count, plan_g.piece_count
    pieces = []
    for total in range(2, nf + ng + 1):
        blocks = [(plan_f.pieces[i - 1], plan_g.pieces[j - 1])
                  for i in range(1, nf + 1) for j in range(1, ng + 1)
                  if i + j == total]
        if not blocks:
            continue
        boxes = []
        for fp, gp in blocks:
            boxes.extend(_cross_boxes(fp.domain, gp.domain, dcf, dwf))
        domain = Domain(tuple(boxes))

        def rule(cs, ws, ts, blocks=blocks):
            m = cs.shape[0]
            out = np.empty((m, np.size(ts), dc))
            done = np.zeros(m, dtype=bool)
            for fp, gp in blocks:
                sel = (fp.domain.contains(cs[:, :dcf], ws[:, :dwf], ctx_f)
                       & gp.domain.contains(cs[:, dcf:], ws[:, dwf:], ctx_g)
                       & ~done)
                if not np.any(sel):
                    continue
                out[sel, :, :dcf] = fp.rule(cs[sel, :dcf], ws[sel, :dwf], ts)
                out[sel, :, dcf:] = gp.rule(cs[sel, dcf:], ws[sel, dwf:], ts)
                done |= sel
            if not np.all(done):
                raise DomainError("product rule called outside its piece domain")
            return out

        pieces.append(PlanPiece(
            name=";".join(f"{fp.name}*{gp.name}" for fp, gp in blocks),
            domain=domain, rule=rule))

    recipe = None
    if plan_f.recipe is not None and plan_g.recipe is not None:
        recipe = {"kind": "product", "f": plan_f.recipe, "g": plan_g.recipe}
    return ManipulationPlan(name=name or f"{plan_f.name}*{plan_g.name}",
                            kmap=k, pieces=tuple(pieces), sections=sections,
                            recipe=recipe)


# ---------------------------------------------------------------------------
# pullback along a global section


def _is_global(domain: Domain) -> bool:
    return any(all(cl.full for cl in b.clauses) for b in domain.boxes)


def _pullback_clause(cl: Clause, section_name: str) -> Clause:
    from .domains import secdiff
    f = cl.feature
    if f.kind == "coord" and f.side == "c":
        return cl
    if f.kind == "reldiff":
        if f.index != f.w_index:
            raise PreconditionError(
                "pullback needs aligned config/work indices in base domains")
        return Clause(feature=secdiff(f.index, section_name), lo=cl.lo, hi=cl.hi,
                      lo_open=cl.lo_open, hi_open=cl.hi_open, wrap=cl.wrap,
                      full=cl.full)
    raise PreconditionError(
        f"cannot pull back a domain over feature {f.label()}")


def pullback_plan(k: KinematicMap, section: SectionPiece,
                  base: ManipulationPlan,
                  name: str | None = None) -> ManipulationPlan:
    """Plan for k from a global section s and a motion plan for C.

    Piece i has domain {(c, w) : (c, s(w)) in D_i} and the path the base
    plan assigns to the pair (c, s(w)); the piece count is the base's.
    """
    if not _is_global(section.domain):
        raise PreconditionError(
            f"section {section.name!r} is partial; pullback needs a global one")
    if not _same_chart(base.kmap.work_model, k.config_chart):
        raise PreconditionError("base plan must be a motion plan for C")

    sections = dict(base.sections)
    sections[section.name] = section.section
    sec = section.section

    pieces = []
    for p in base.pieces:
        domain = Domain(tuple(
            Box(tuple(_pullback_clause(cl, section.name) for cl in b.clauses))
            for b in p.domain.boxes))

        def rule(cs, ws, ts, base_rule=p.rule):
            return base_rule(cs, sec(ws), ts)

        pieces.append(PlanPiece(name=p.name, domain=domain, rule=rule))

    recipe = None
    if base.recipe is not None:
        recipe = {"kind": "pullback", "map": k.name, "branch": section.name,
                  "base": base.recipe}
    return ManipulationPlan(name=name or f"{k.name}.{section.name}",
                            kmap=k, pieces=tuple(pieces), sections=sections,
                            recipe=recipe)


# ---------------------------------------------------------------------------
# cat x csec combinator


def combine_csec_cat(k: KinematicMap, cat_pieces, sec_pieces, connectors=None,
                     name: str | None = None,
                     recipe: dict | None = None) -> ManipulationPlan:
    """Plan from a categorical cover of C and a categorical section cover
    of W: piece k is the union over i+j = k of C_i x A_j, and its path runs
    the contraction H_i on [0, 1/3], the connector from c0_i to c1_j on
    [1/3, 2/3], and the reversed deformation K_j on [2/3, 1]."""
    cat_pieces = list(cat_pieces)
    sec_pieces = list(sec_pieces)
    for sp in sec_pieces:
        if not sp.has_deformation:
            raise PreconditionError(
                f"section piece {sp.name!r} has no deformation to combine with")
    chart = k.config_chart
    ctx = DomainContext(c_chart=chart, w_model=k.work_model, sections={})

    def connector(i, j):
        if connectors is not None and (i, j) in connectors:
            return connectors[(i, j)]
        c0 = np.asarray(cat_pieces[i].c0, float)
        c1 = np.asarray(sec_pieces[j].c1, float)
        d = chart.diff(c1, c0)

        def gamma(ss):
            return c0[None, :] + np.asarray(ss, float)[:, None] * d[None, :]

        return gamma

    a, b = len(cat_pieces), len(sec_pieces)
    pieces = []
    for total in range(2, a + b + 1):
        blocks = [(i - 1, j - 1) for i in range(1, a + 1) for j in range(1, b + 1)
                  if i + j == total]
        if not blocks:
            continue
        boxes = []
        for i, j in blocks:
            for bc in cat_pieces[i].domain.boxes:
                for bw in sec_pieces[j].domain.boxes:
                    boxes.append(Box(tuple(bc.clauses) + tuple(bw.clauses)))
        domain = Domain(tuple(boxes))

        def rule(cs, ws, ts, blocks=blocks):
            ts = np.atleast_1d(np.asarray(ts, float))
            m = cs.shape[0]
            out = np.empty((m, ts.size, chart.dim))
            seg1 = ts < 1.0 / 3.0
            seg2 = (ts >= 1.0 / 3.0) & (ts < 2.0 / 3.0)
            seg3 = ts >= 2.0 / 3.0
            done = np.zeros(m, dtype=bool)
            for i, j in blocks:
                cp, sp = cat_pieces[i], sec_pieces[j]
                sel = cp.contains(cs, ctx) & sp.contains(ws, ctx) & ~done
                if not np.any(sel):
                    continue
                rows = np.flatnonzero(sel)
                if np.any(seg1):
                    h = cp.contract(cs[rows], 3.0 * ts[seg1], ctx)
                    out[np.ix_(rows, np.flatnonzero(seg1))] = h
                if np.any(seg2):
                    g = connector(i, j)(3.0 * ts[seg2] - 1.0)
                    out[np.ix_(rows, np.flatnonzero(seg2))] = g[None, :, :]
                if np.any(seg3):
                    kk = sp.deform(ws[rows], 3.0 - 3.0 * ts[seg3])
                    out[np.ix_(rows, np.flatnonzero(seg3))] = kk
                done |= sel
            if not np.all(done):
                raise DomainError("combine rule called outside its piece domain")
            return out

        pieces.append(PlanPiece(
            name=";".join(f"{cat_pieces[i].name}*{sec_pieces[j].name}"
                          for i, j in blocks),
            domain=domain, rule=rule))

    return ManipulationPlan(name=name or f"{k.name}.combined", kmap=k,
                            pieces=tuple(pieces), recipe=recipe)


def combine_from_named(map_name: str, cat: str, sec: str,
                       name: str | None = None) -> ManipulationPlan:
    """combine_csec_cat over the stock covers, by name, so the result
    carries a rebuildable recipe.  cat: torus | trivial; sec: sphere |
    annulus."""
    k = canonical_map(map_name)
    if cat == "torus":
        cat_pieces = cat_cover_torus(k.config_chart)
    elif cat == "trivial":
        cat_pieces = trivial_cat_cover(k.config_chart)
    else:
        raise PreconditionError(f"unknown cat cover {cat!r}")
    if sec == "sphere":
        sec_pieces = sphere_section_cover(k)
    elif sec == "annulus":
        sec_pieces = annulus_section_cover(k)
    else:
        raise PreconditionError(f"unknown section cover {sec!r}")
    recipe = {"kind": "combine", "map": map_name, "cat": cat, "sec": sec}
    return combine_csec_cat(k, cat_pieces, sec_pieces, name=name, recipe=recipe)


# ---------------------------------------------------------------------------
# disjointification


def disjointify(pieces, kmap: KinematicMap, name: str = "disjoint",
                sections: dict | None = None, grid: int = 6,
                recipe: dict | None = None) -> ManipulationPlan:
    """Plan from an ordered, possibly overlapping piece list: each domain
    loses everything covered by earlier ones, empty survivors are dropped,
    and each kept piece keeps its original rule (now on a smaller domain).
    The input must cover the check grid; gaps raise with witness samples."""
    pieces = list(pieces)
    plan_sections = dict(sections or {})
    ctx = DomainContext(c_chart=kmap.config_chart, w_model=kmap.work_model,
                        sections=plan_sections)

    cs_grid = kmap.config_chart.grid_points(grid)
    ws_grid = kmap.work_model.grid_points(grid)
    mc, mw = cs_grid.shape[0], ws_grid.shape[0]
    cs = np.repeat(cs_grid, mw, axis=0)
    ws = np.tile(ws_grid, (mc, 1))
    covered = np.zeros(mc * mw, dtype=bool)
    for p in pieces:
        covered |= p.domain.contains(cs, ws, ctx)
    if not np.all(covered):
        missed = np.flatnonzero(~covered)[:5]
        witnesses = [(cs[i].tolist(), ws[i].tolist()) for i in missed]
        raise DomainError(f"cover has gaps; first uncovered samples: {witnesses}")

    new_domains = disjointify_domains([p.domain for p in pieces])
    out = []
    for p, dom in zip(pieces, new_domains):
        if dom.is_empty:
            continue
        out.append(PlanPiece(name=p.name, domain=dom, rule=p.rule))

    counts = np.zeros(mc * mw, dtype=int)
    for p in out:
        counts += p.domain.contains(cs, ws, ctx).astype(int)
    if not np.all(counts == 1):
        bad = np.flatnonzero(counts != 1)[:5]
        witnesses = [(cs[i].tolist(), ws[i].tolist()) for i in bad]
        raise DomainError(
            f"disjointification broke the partition at samples: {witnesses}")

    return ManipulationPlan(name=name, kmap=kmap, pieces=tuple(out),
                            sections=plan_sections, recipe=recipe)


# ---------------------------------------------------------------------------
# builtins


def builtin_plan(name: str) -> ManipulationPlan:
    """The stock plans: identity_interval (1 piece), identity_circle (2),
    identity_torus (3), planar_rr (3), scara (3), pointing (5)."""
    if name == "identity_interval":
        return identity_interval_plan()
    if name == "identity_circle":
        return identity_circle_plan()
    if name == "identity_torus":
        return identity_torus_plan()
    if name == "planar_rr":
        k = canonical_map("planar_rr")
        plan = pullback_plan(k, canonical_section(k, "elbow_up"),
                             identity_torus_plan(), name="planar_rr")
        plan.recipe = {"kind": "builtin", "name": "planar_rr"}
        return plan
    if name == "scara":
        plan = product_plan(builtin_plan("planar_rr"), identity_interval_plan(),
                            kmap=canonical_map("scara"), name="scara")
        plan.recipe = {"kind": "builtin", "name": "scara"}
        return plan
    if name == "pointing":
        k = canonical_map("pointing")
        plan = combine_csec_cat(k, cat_cover_torus(k.config_chart),
                                sphere_section_cover(k), name="pointing")
        plan.recipe = {"kind": "builtin", "name": "pointing"}
        return plan
    raise PreconditionError(f"unknown builtin plan {name!r}")


# ---------------------------------------------------------------------------
# documents


def plan_to_doc(plan: ManipulationPlan) -> dict:
    if plan.recipe is None:
        raise DocumentError(
            "only plans built from a named recipe serialize", field="recipe")
    return {
        "format": "kinplex-plan",
        "version": 1,
        "name": plan.name,
        "map": plan.kmap.name,
        "recipe": plan.recipe,
        "pieces": [{"name": p.name, "domain": p.domain.to_doc()}
                   for p in plan.pieces],
    }


def serialize_plan(plan: ManipulationPlan) -> str:
    """Canonical JSON; parse(serialize(plan)) rebuilds an identical plan."""
    return json.dumps(plan_to_doc(plan), indent=2, sort_keys=True) + "\n"


def _build_recipe(recipe: dict) -> ManipulationPlan:
    kind = recipe.get("kind")
    if kind == "builtin":
        return builtin_plan(recipe["name"])
    if kind == "h_fixture":
        return h_fixture_plan() if recipe.get("pieces", 2) == 2 else h_fixture_single_plan()
    if kind == "product":
        return product_plan(_build_recipe(recipe["f"]), _build_recipe(recipe["g"]))
    if kind == "pullback":
        k = canonical_map(recipe["map"])
        return pullback_plan(k, canonical_section(k, recipe["branch"]),
                             _build_recipe(recipe["base"]))
    if kind == "combine":
        return combine_from_named(recipe["map"], recipe["cat"], recipe["sec"])
    raise DocumentError(f"unknown plan recipe kind {kind!r}", field="recipe.kind")


def parse_plan(text: str) -> ManipulationPlan:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise DocumentError(f"not valid JSON: {e.msg}", line=e.lineno)
    if not isinstance(doc, dict) or doc.get("format") != "kinplex-plan":
        raise DocumentError("not a plan document", field="format")
    if doc.get("version") != 1:
        raise DocumentError(f"unsupported version {doc.get('version')!r}",
                            field="version")
    known_fields = {"format", "version", "name", "map", "recipe", "pieces"}
    extra = set(doc) - known_fields
    if extra:
        raise DocumentError(f"unknown fields {sorted(extra)}",
                            field=sorted(extra)[0])
    plan = _build_recipe(doc["recipe"])
    if len(doc.get("pieces", [])) != plan.piece_count:
        raise DocumentError(
            f"document lists {len(doc['pieces'])} pieces, recipe builds "
            f"{plan.piece_count}", field="pieces")
    if doc.get("map") != plan.kmap.name:
        raise DocumentError(
            f"document names map {doc.get('map')!r}, recipe builds "
            f"{plan.kmap.name!r}", field="map")
    plan.name = doc.get("name", plan.name)
    return plan


# ---------------------------------------------------------------------------
# the plateau fixture: a map with a genuinely discontinuous forced section


def plateau_map() -> KinematicMap:
    """h: [0, 3] -> [0, 2], identity, then flat at 1 on [1, 2], then shifted
    identity.  The fiber over 1 is the interval [1, 2]; every other fiber is
    a point."""
    chart = Chart([Interval(0.0, 3.0)])
    work = Chart([Interval(0.0, 2.0)])

    def fwd(qs):
        q = qs[:, 0]
        return np.where(q < 1.0, q, np.where(q <= 2.0, 1.0, q - 1.0))[:, None]

    def jac(qs):
        q = qs[:, 0]
        return np.where((q < 1.0) | (q > 2.0), 1.0, 0.0)[:, None, None]

    return KinematicMap("plateau", chart, work, fwd, jac)


def h_fixture_gap(y: float) -> float:
    """Jump between the right- and left-forced section values at y: the
    fiber over y is a point except at y = 1, where it is [1, 2] and any
    section must jump across the plateau."""
    y = float(y)
    if not (0.0 <= y <= 2.0):
        raise PreconditionError("gap queries need y in [0, 2]")
    return 1.0 if y == 1.0 else 0.0


def h_fixture_plan() -> ManipulationPlan:
    """The 2-piece closed filtration {w <= 1, w > 1} with sections s(y) = y
    and s(y) = y + 1."""
    k = plateau_map()
    chart = k.config_chart
    low = PlanPiece(
        name="low",
        domain=Domain((Box((span(coord("w", 0), 0.0, 1.0),)),)),
        rule=_lerp_rule(chart, lambda cs, ws: ws))
    high = PlanPiece(
        name="high",
        domain=Domain((Box((span(coord("w", 0), 1.0, 2.0, lo_open=True),)),)),
        rule=_lerp_rule(chart, lambda cs, ws: ws + 1.0))
    return ManipulationPlan(name="h_fixture", kmap=k, pieces=(low, high),
                            recipe={"kind": "h_fixture", "pieces": 2})


def h_fixture_single_plan() -> ManipulationPlan:
    """The best single piece can do: one global rule, necessarily
    discontinuous across the plateau fiber.  Exists to fail validation."""
    k = plateau_map()
    chart = k.config_chart

    def target(cs, ws):
        return np.where(ws <= 1.0, ws, ws + 1.0)

    piece = PlanPiece(name="all", domain=_everything(),
                      rule=_lerp_rule(chart, target))
    return ManipulationPlan(name="h_fixture_single", kmap=k, pieces=(piece,),
                            recipe={"kind": "h_fixture", "pieces": 1})
