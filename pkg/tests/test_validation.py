"""Plan validation and instability-order measurement."""

import numpy as np
import pytest

from kinplex import (
    Box,
    Domain,
    ManipulationPlan,
    PlanPiece,
    PreconditionError,
    builtin_plan,
    canonical_map,
    coord,
    h_fixture_plan,
    h_fixture_single_plan,
    identity_torus_plan,
    measure_instability,
    plateau_map,
    span,
    validate_plan,
)

EVERYTHING = Domain((Box(()),))

VALIDATION_GRIDS = {
    "identity_interval": 12,
    "identity_circle": 12,
    "identity_torus": 8,
    "planar_rr": 8,
    "scara": 6,
    "pointing": 6,
}

INSTABILITY_GRIDS = {
    "identity_interval": 12,
    "identity_circle": 12,
    "identity_torus": 6,
    "planar_rr": 6,
    "scara": 4,
    "pointing": 6,
}


def lerp_to(target_fn):
    def rule(cs, ws, ts):
        tgt = target_fn(cs, ws)
        return cs[:, None, :] + np.asarray(ts)[None, :, None] * (tgt - cs)[:, None, :]

    return rule


# ---------------------------------------------------------------------------
# validate_plan on the stock plans


@pytest.mark.parametrize("name,grid", sorted(VALIDATION_GRIDS.items()))
def test_builtin_plans_validate(name, grid):
    rep = validate_plan(builtin_plan(name), grid=grid)
    assert rep.passed
    assert rep.plan_name == name
    for check in ("coverage", "endpoint", "target", "lipschitz"):
        assert rep.check(check).passed


def test_validation_report_bookkeeping():
    rep = validate_plan(builtin_plan("identity_circle"), grid=12)
    assert rep.samples == 144
    assert rep.tolerances == {"endpoint": 1e-9, "target": 1e-6, "lipschitz": 50.0}
    assert rep.edges_cross_piece > 0  # the two arc pieces share a border
    assert rep.edges_degenerate == 0
    assert rep.summary().startswith("validate identity_circle: pass")
    assert "lipschitz ok" in rep.summary()
    with pytest.raises(KeyError):
        rep.check("parallax")


def test_pointing_validation_skips_pole_degenerate_edges():
    rep = validate_plan(builtin_plan("pointing"), grid=6)
    assert rep.passed
    # every lon edge at the two poles is zero-length in the workspace
    assert rep.edges_degenerate == 432
    assert rep.edges_cross_piece > 0


def test_tolerance_override_tightens_the_modulus():
    rep = validate_plan(builtin_plan("identity_circle"), grid=12,
                        tolerances={"lipschitz": 5.0})
    lip = rep.check("lipschitz")
    assert lip.bound == 5.0
    assert not lip.passed
    assert not rep.passed
    assert lip.worst == pytest.approx(5.8125, rel=1e-12)


def test_validation_grid_cap():
    with pytest.raises(PreconditionError, match="above the"):
        validate_plan(identity_torus_plan(), grid=60)
    with pytest.raises(PreconditionError, match="above the"):
        measure_instability(builtin_plan("identity_torus"), grid=60)


def test_validation_csv_is_deterministic(tmp_path):
    rep = validate_plan(builtin_plan("identity_interval"), grid=8)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rep.to_csv(str(a))
    rep.to_csv(str(b))
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "check,passed,worst,bound,witness,detail"
    assert len(lines) == 5
    assert lines[1].startswith("coverage,1,")


# ---------------------------------------------------------------------------
# broken plans fail the matching check


def test_coverage_failure_lists_witness():
    low_only = ManipulationPlan(name="holey", kmap=plateau_map(),
                                pieces=(h_fixture_plan().pieces[0],))
    rep = validate_plan(low_only, grid=10)
    assert not rep.passed
    cov = rep.check("coverage")
    assert not cov.passed
    assert cov.worst == 50.0  # 5 uncovered work rows x 10 configs
    assert "50 uncovered, 0 multiply covered" == cov.detail
    c, w = cov.witness
    assert w[0] > 1.0


def test_multiple_cover_counts_as_coverage_failure():
    k = canonical_map("identity_interval")
    twice = ManipulationPlan(
        name="twice", kmap=k,
        pieces=(PlanPiece("a", EVERYTHING, lerp_to(lambda cs, ws: ws)),
                PlanPiece("b", EVERYTHING, lerp_to(lambda cs, ws: ws))))
    rep = validate_plan(twice, grid=5)
    cov = rep.check("coverage")
    assert not cov.passed
    assert cov.detail == "0 uncovered, 25 multiply covered"
    # nothing is singly covered, so the pointwise checks are vacuous
    assert rep.check("endpoint").witness is None
    assert rep.check("target").witness is None


def test_target_failure_when_rule_lands_on_wrong_branch():
    k = plateau_map()
    wrong = ManipulationPlan(
        name="wrong_branch", kmap=k,
        pieces=(PlanPiece("all", EVERYTHING, lerp_to(lambda cs, ws: ws + 1.0)),))
    rep = validate_plan(wrong, grid=9)
    assert rep.check("coverage").passed
    assert rep.check("endpoint").passed
    tgt = rep.check("target")
    assert not tgt.passed
    assert tgt.worst == pytest.approx(1.0, abs=1e-12)
    c, w = tgt.witness
    assert w[0] == 0.0


def test_endpoint_failure_when_path_ignores_the_start():
    k = canonical_map("identity_interval")

    def teleport(cs, ws, ts):
        return np.repeat(ws[:, None, :], np.size(ts), axis=1)

    jumpy = ManipulationPlan(name="teleport", kmap=k,
                             pieces=(PlanPiece("all", EVERYTHING, teleport),))
    rep = validate_plan(jumpy, grid=6)
    end = rep.check("endpoint")
    assert not end.passed
    assert end.worst == pytest.approx(1.0, abs=1e-12)
    assert rep.check("target").passed


def test_h_two_pieces_validate_where_one_cannot():
    assert validate_plan(h_fixture_plan(), grid=100).passed

    single = h_fixture_single_plan()
    rep99 = validate_plan(single, grid=99)
    assert rep99.passed
    assert rep99.check("lipschitz").worst == pytest.approx(50.0, rel=1e-9)

    rep100 = validate_plan(single, grid=100)
    assert not rep100.passed
    lip = rep100.check("lipschitz")
    assert not lip.passed
    assert lip.worst == pytest.approx(50.5, rel=1e-12)
    assert lip.witness is not None

    # the discontinuity-to-spacing ratio scales linearly with the grid
    rep50 = validate_plan(single, grid=50)
    assert rep50.check("lipschitz").worst == pytest.approx(25.5, rel=1e-12)


# ---------------------------------------------------------------------------
# instability order


@pytest.mark.parametrize("name,grid", sorted(INSTABILITY_GRIDS.items()))
def test_instability_order_sandwich(name, grid):
    plan = builtin_plan(name)
    rep = measure_instability(plan, grid=grid)
    assert 1 <= rep.max_order <= plan.piece_count
    assert rep.separation_violations == 0
    assert rep.eps == 2.0 * rep.spacing
    assert len(rep.r_counts) == plan.piece_count
    assert rep.r_counts[0] == rep.samples
    assert all(a >= b for a, b in zip(rep.r_counts, rep.r_counts[1:]))
    assert rep.r_counts[rep.max_order - 1] > 0
    assert all(n == 0 for n in rep.r_counts[rep.max_order:])
    assert int(rep.orders.max()) == rep.max_order


def test_planar_rr_instability_order_three():
    plan = builtin_plan("planar_rr")
    rep = measure_instability(plan, grid=12)
    assert rep.max_order == 3
    assert rep.r_counts == (20736, 11520, 1704)
    assert rep.eps == pytest.approx(2.0 * np.pi / 6.0, rel=1e-12)
    # the witness really does sit within eps of all three piece domains
    cw, ww = rep.witness
    ctx = plan.ctx
    near = sum(
        float(p.domain.distance(cw[None, :], ww[None, :], ctx)[0]) <= rep.eps
        for p in plan.pieces)
    assert near == 3


def test_pointing_instability_reaches_five():
    rep = measure_instability(builtin_plan("pointing"), grid=10)
    assert rep.max_order == 5
    assert rep.samples == 10000
    assert rep.r_counts == (10000, 10000, 8750, 5720, 2090)


def test_circle_and_scara_instability_counts():
    rep = measure_instability(builtin_plan("identity_circle"), grid=30)
    assert rep.max_order == 2
    assert rep.r_counts == (900, 116)
    rep = measure_instability(builtin_plan("scara"), grid=6)
    assert rep.max_order == 3
    assert rep.r_counts == (46656, 41328, 15912)


def test_instability_eps_floor_and_monotonicity():
    plan = builtin_plan("identity_circle")
    with pytest.raises(PreconditionError, match="below 2 x grid spacing"):
        measure_instability(plan, grid=12, eps=0.1)
    small = measure_instability(plan, grid=30)
    large = measure_instability(plan, grid=30, eps=0.8)
    assert large.r_counts[1] > small.r_counts[1]
    assert large.max_order >= small.max_order


def test_instability_summary_and_csv(tmp_path):
    rep = measure_instability(builtin_plan("identity_interval"), grid=5)
    assert rep.max_order == 1
    s = rep.summary()
    assert s.startswith("instability identity_interval: max order 1")
    assert "R1=25" in s
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    rep.to_csv(str(a))
    rep.to_csv(str(b))
    assert a.read_bytes() == b.read_bytes()
    lines = a.read_text().splitlines()
    assert lines[0] == "c0,w0,order"
    assert len(lines) == 26
