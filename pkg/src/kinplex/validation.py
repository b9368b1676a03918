"""Grid validation of manipulation plans and instability-order measurement.

Validation samples a C x W product grid and checks four things: coverage
(every sample in exactly one piece domain), the endpoint identity
path(0) = c, the target identity f(path(1)) = w, and a Lipschitz modulus
on grid-neighbor edges whose endpoints share a piece.  Failures become
report entries with witness coordinates, never exceptions.

Instability measurement counts, per sample, how many piece-domain closures
an epsilon-ball meets.  Somewhere the count must reach the plan's stage
count at the seams, and it can never exceed the piece count; the report
carries the R_k filtration sizes and a grid-scale mutual-separation
self-check of the maximal-order samples.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .charts import Chart, SphereModel
from .errors import PreconditionError
from .planning import ManipulationPlan
from .kinematics import KinematicMap

__all__ = [
    "ValidationCheck",
    "ValidationReport",
    "validate_plan",
    "InstabilityReport",
    "measure_instability",
]

DEFAULT_TOLERANCES = {"endpoint": 1e-9, "target": 1e-6, "lipschitz": 50.0}
MAX_SAMPLES = 10 ** 7
MAX_WITNESSES = 5
DEGENERATE_EDGE = 1e-12


def _grids(k: KinematicMap, grid: int):
    cs = k.config_chart.grid_points(grid)
    ws = k.work_model.grid_points(grid)
    return cs, ws


def _axis_edges(shape, wrap_axes):
    """Neighbor index pairs of a C-order grid, per axis, wrap edges included
    for the axes named in wrap_axes."""
    idx = np.arange(int(np.prod(shape))).reshape(shape)
    out = []
    for ax, n in enumerate(shape):
        if n < 2:
            continue
        left = np.take(idx, range(n - 1), axis=ax).ravel()
        right = np.take(idx, range(1, n), axis=ax).ravel()
        if ax in wrap_axes and n > 2:
            left = np.concatenate([left, np.take(idx, [n - 1], axis=ax).ravel()])
            right = np.concatenate([right, np.take(idx, [0], axis=ax).ravel()])
        out.append((left, right))
    return out


def _chart_edges(chart: Chart, n: int):
    from .charts import Circle
    shape = tuple(len(g) for g in chart.axis_grids(n))
    wrap = {i for i, f in enumerate(chart.factors) if isinstance(f, Circle)}
    return _axis_edges(shape, wrap)


def _work_edges(model, n: int):
    if isinstance(model, Chart):
        return _chart_edges(model, n)
    if isinstance(model, SphereModel):
        # lat x lon grid; longitude wraps, latitude does not
        return _axis_edges((n, n), {1})
    raise PreconditionError("validation grids need a chart or sphere workspace")


def _paths_at(plan: ManipulationPlan, cs, ws, piece, ts) -> np.ndarray:
    """(m, T, dc) plan paths, dispatched to each row's piece."""
    out = np.empty((cs.shape[0], np.size(ts), plan.kmap.config_chart.dim))
    for i, p in enumerate(plan.pieces):
        rows = np.flatnonzero(piece == i)
        if rows.size:
            out[rows] = p.rule(cs[rows], ws[rows], ts)
    return out


@dataclass(frozen=True)
class ValidationCheck:
    name: str
    passed: bool
    worst: float
    bound: float
    witness: tuple | None = None
    detail: str = ""


@dataclass(frozen=True)
class ValidationReport:
    plan_name: str
    grid: int
    tolerances: dict
    samples: int
    checks: tuple
    edges_checked: int = 0
    edges_cross_piece: int = 0
    edges_degenerate: int = 0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> ValidationCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def summary(self) -> str:
        verdict = "pass" if self.passed else "FAIL"
        parts = ", ".join(f"{c.name} {'ok' if c.passed else 'FAIL'}"
                          for c in self.checks)
        return (f"validate {self.plan_name}: {verdict} "
                f"({self.samples} samples; {parts})")

    def to_csv(self, path: str) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["check", "passed", "worst", "bound", "witness", "detail"])
            for c in self.checks:
                wit = "" if c.witness is None else " ".join(
                    f"{x:.17g}" for part in c.witness for x in np.atleast_1d(part))
                w.writerow([c.name, int(c.passed), f"{c.worst:.17g}",
                            f"{c.bound:.17g}", wit, c.detail])


def validate_plan(plan: ManipulationPlan, k: KinematicMap | None = None,
                  grid: int = 12, tolerances: dict | None = None,
                  path_samples: int = 17) -> ValidationReport:
    """Check a plan on the product grid; failures are report entries."""
    k = k or plan.kmap
    tol = dict(DEFAULT_TOLERANCES)
    tol.update(tolerances or {})
    cs_grid, ws_grid = _grids(k, grid)
    nc, nw = cs_grid.shape[0], ws_grid.shape[0]
    if nc * nw > MAX_SAMPLES:
        raise PreconditionError(
            f"grid yields {nc * nw} samples, above the {MAX_SAMPLES} cap")

    cs = np.repeat(cs_grid, nw, axis=0)
    ws = np.tile(ws_grid, (nc, 1))
    memb = plan.memberships(cs, ws)
    counts = memb.sum(axis=1)

    def witness(i):
        return (cs[i].copy(), ws[i].copy())

    checks = []
    bad = np.flatnonzero(counts != 1)
    cov_witness = witness(bad[0]) if bad.size else None
    checks.append(ValidationCheck(
        name="coverage", passed=bad.size == 0, worst=float(bad.size), bound=0.0,
        witness=cov_witness,
        detail=(f"{int((counts == 0).sum())} uncovered, "
                f"{int((counts > 1).sum())} multiply covered")))

    piece = np.where(counts >= 1, np.argmax(memb, axis=1), -1)
    ok_rows = counts == 1

    # endpoint and target identities need the paths only at t = 0 and t = 1
    rows = np.flatnonzero(ok_rows)
    ends = np.empty((cs.shape[0], 2, k.config_chart.dim))
    ends[rows] = _paths_at(plan, cs[rows], ws[rows], piece[rows],
                           np.array([0.0, 1.0]))

    e0 = np.zeros(cs.shape[0])
    e0[rows] = k.config_chart.distance(ends[rows, 0], cs[rows])
    worst0 = int(np.argmax(e0))
    checks.append(ValidationCheck(
        name="endpoint", passed=bool(np.max(e0, initial=0.0) <= tol["endpoint"]),
        worst=float(np.max(e0, initial=0.0)), bound=tol["endpoint"],
        witness=witness(worst0) if rows.size else None))

    e1 = np.zeros(cs.shape[0])
    if rows.size:
        f1 = k.forward_many(ends[rows, 1])
        e1[rows] = np.atleast_1d(k.work_model.distance(f1, ws[rows]))
    worst1 = int(np.argmax(e1))
    checks.append(ValidationCheck(
        name="target", passed=bool(np.max(e1, initial=0.0) <= tol["target"]),
        worst=float(np.max(e1, initial=0.0)), bound=tol["target"],
        witness=witness(worst1) if rows.size else None))

    # Lipschitz modulus over same-piece grid-neighbor edges
    ts = np.linspace(0.0, 1.0, max(int(path_samples), 2))
    L = tol["lipschitz"]
    chart = k.config_chart
    worst_ratio = 0.0
    worst_edge = None
    n_checked = n_cross = n_degen = 0

    def run_edges(i_pairs, j_pairs, input_dist):
        nonlocal worst_ratio, worst_edge, n_checked, n_cross, n_degen
        same = (piece[i_pairs] == piece[j_pairs]) & ok_rows[i_pairs] & ok_rows[j_pairs]
        n_cross += int(np.size(i_pairs) - same.sum())
        i_pairs, j_pairs, input_dist = i_pairs[same], j_pairs[same], input_dist[same]
        degen = input_dist <= DEGENERATE_EDGE
        n_degen += int(degen.sum())
        i_pairs, j_pairs, input_dist = (i_pairs[~degen], j_pairs[~degen],
                                        input_dist[~degen])
        chunk = 20000
        for lo in range(0, i_pairs.size, chunk):
            sl = slice(lo, lo + chunk)
            ii, jj, dd = i_pairs[sl], j_pairs[sl], input_dist[sl]
            pa = _paths_at(plan, cs[ii], ws[ii], piece[ii], ts)
            pb = _paths_at(plan, cs[jj], ws[jj], piece[jj], ts)
            sup = np.max(chart.distance(pa, pb), axis=1)
            ratio = sup / dd
            n_checked += ii.size
            w = int(np.argmax(ratio)) if ratio.size else 0
            if ratio.size and float(ratio[w]) > worst_ratio:
                worst_ratio = float(ratio[w])
                worst_edge = (cs[ii[w]].copy(), ws[ii[w]].copy(),
                              cs[jj[w]].copy(), ws[jj[w]].copy())

    w_all = np.arange(nw)
    for left, right in _chart_edges(chart, grid):
        d_edge = chart.distance(cs_grid[left], cs_grid[right])
        i_pairs = (left[:, None] * nw + w_all[None, :]).ravel()
        j_pairs = (right[:, None] * nw + w_all[None, :]).ravel()
        run_edges(i_pairs, j_pairs, np.repeat(d_edge, nw))

    c_all = np.arange(nc)
    for left, right in _work_edges(k.work_model, grid):
        d_edge = np.atleast_1d(k.work_model.distance(ws_grid[left], ws_grid[right]))
        i_pairs = (c_all[:, None] * nw + left[None, :]).ravel()
        j_pairs = (c_all[:, None] * nw + right[None, :]).ravel()
        run_edges(i_pairs, j_pairs, np.tile(d_edge, nc))

    checks.append(ValidationCheck(
        name="lipschitz", passed=worst_ratio <= L, worst=worst_ratio, bound=L,
        witness=worst_edge,
        detail=(f"{n_checked} edges, {n_cross} cross-piece skipped, "
                f"{n_degen} degenerate skipped")))

    return ValidationReport(plan_name=plan.name, grid=grid, tolerances=tol,
                            samples=nc * nw, checks=tuple(checks),
                            edges_checked=n_checked, edges_cross_piece=n_cross,
                            edges_degenerate=n_degen)


# ---------------------------------------------------------------------------
# instability order


@dataclass(frozen=True)
class InstabilityReport:
    plan_name: str
    grid: int
    eps: float
    spacing: float
    samples: int
    max_order: int
    witness: tuple
    r_counts: tuple  # r_counts[k-1] = number of samples with order >= k
    separation_violations: int
    orders: np.ndarray = field(repr=False)
    points: tuple = field(repr=False, default=())  # (cs, ws) sample arrays

    def summary(self) -> str:
        rk = ", ".join(f"R{k + 1}={n}" for k, n in enumerate(self.r_counts))
        return (f"instability {self.plan_name}: max order {self.max_order} "
                f"(eps {self.eps:.6g}, {self.samples} samples; {rk})")

    def to_csv(self, path: str) -> None:
        cs, ws = self.points
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"c{i}" for i in range(cs.shape[1])]
                       + [f"w{i}" for i in range(ws.shape[1])] + ["order"])
            for c, wpt, o in zip(cs, ws, self.orders):
                w.writerow([f"{x:.17g}" for x in c]
                           + [f"{x:.17g}" for x in wpt] + [int(o)])


def _grid_spacing(k: KinematicMap, grid: int) -> float:
    c_sp = k.config_chart.max_spacing(grid)
    model = k.work_model
    if isinstance(model, (Chart, SphereModel)):
        w_sp = model.max_spacing(grid)
    else:
        raise PreconditionError("instability grids need a chart or sphere workspace")
    return max(c_sp, w_sp)


def measure_instability(plan: ManipulationPlan, grid: int = 12,
                        eps: float | None = None) -> InstabilityReport:
    """Count, per grid sample, the piece-domain closures within eps."""
    k = plan.kmap
    spacing = _grid_spacing(k, grid)
    if eps is None:
        eps = 2.0 * spacing
    if eps < 2.0 * spacing - 1e-12:
        raise PreconditionError(
            f"eps {eps:.6g} below 2 x grid spacing {2.0 * spacing:.6g}; "
            "closures between samples would go undetected")

    cs_grid, ws_grid = _grids(k, grid)
    nc, nw = cs_grid.shape[0], ws_grid.shape[0]
    if nc * nw > MAX_SAMPLES:
        raise PreconditionError(
            f"grid yields {nc * nw} samples, above the {MAX_SAMPLES} cap")
    cs = np.repeat(cs_grid, nw, axis=0)
    ws = np.tile(ws_grid, (nc, 1))
    ctx = plan.ctx

    near = np.stack([p.domain.distance(cs, ws, ctx) <= eps for p in plan.pieces],
                    axis=1)
    orders = near.sum(axis=1).astype(int)
    max_order = int(orders.max())
    wi = int(np.argmax(orders))
    r_counts = tuple(int((orders >= kk).sum())
                     for kk in range(1, plan.piece_count + 1))

    # mutual-separation self-check: adjacent maximal-order samples should
    # agree on which domains their neighborhoods meet
    masks = near.dot(1 << np.arange(plan.piece_count))
    is_max = orders == max_order
    violations = 0
    w_all = np.arange(nw)
    for left, right in _chart_edges(k.config_chart, grid):
        i_pairs = (left[:, None] * nw + w_all[None, :]).ravel()
        j_pairs = (right[:, None] * nw + w_all[None, :]).ravel()
        both = is_max[i_pairs] & is_max[j_pairs]
        violations += int((masks[i_pairs[both]] != masks[j_pairs[both]]).sum())
    c_all = np.arange(nc)
    for left, right in _work_edges(k.work_model, grid):
        i_pairs = (c_all[:, None] * nw + left[None, :]).ravel()
        j_pairs = (c_all[:, None] * nw + right[None, :]).ravel()
        both = is_max[i_pairs] & is_max[j_pairs]
        violations += int((masks[i_pairs[both]] != masks[j_pairs[both]]).sum())

    return InstabilityReport(plan_name=plan.name, grid=grid, eps=float(eps),
                             spacing=spacing, samples=nc * nw,
                             max_order=max_order,
                             witness=(cs[wi].copy(), ws[wi].copy()),
                             r_counts=r_counts,
                             separation_violations=violations,
                             orders=orders, points=(cs, ws))
