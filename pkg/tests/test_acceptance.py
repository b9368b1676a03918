"""End-to-end acceptance checks.

Each test covers one numbered criterion, prints exactly one pass/fail line
to the terminal (visible even under pytest capture), and enforces the
criterion's runtime budget.
"""

import time
from contextlib import contextmanager

import numpy as np
import pytest

from kinplex import (
    CANONICAL_NAMES,
    DHParams,
    annulus_section_cover,
    builtin_plan,
    canonical_map,
    cat_cover_torus,
    combine_from_named,
    coplanarity_test,
    cyclicity_drift,
    dh_transform,
    h_fixture_gap,
    h_fixture_plan,
    h_fixture_single_plan,
    identity_circle_plan,
    identity_interval_plan,
    identity_torus_plan,
    jacobian_fd,
    map_from_mechanism,
    measure_instability,
    mobility,
    parse_mechanism,
    parse_plan,
    probe_loop,
    product_plan,
    serial_chain,
    serialize_mechanism,
    serialize_plan,
    shrinking_loop_probe,
    singular_scan,
    sphere_section_cover,
    validate_plan,
)
from kinplex.cli import run_command
from kinplex.tracking import _default_start


@pytest.fixture
def verdict(capsys):
    """One criterion: collect named boolean checks, print one line, assert."""

    @contextmanager
    def criterion(num, desc, budget=None):
        checks = []
        t0 = time.perf_counter()
        try:
            yield checks
        except BaseException:
            with capsys.disabled():
                print(f"criterion {num:2d}: FAIL - {desc} (raised)")
            raise
        elapsed = time.perf_counter() - t0
        in_budget = budget is None or elapsed < budget
        ok = all(v for _, v in checks) and in_budget
        with capsys.disabled():
            print(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'} - {desc} "
                  f"({elapsed:.2f}s)")
        for label, v in checks:
            assert v, f"criterion {num}: {label}"
        if budget is not None:
            assert in_budget, (f"criterion {num}: runtime {elapsed:.2f}s "
                               f"over the {budget:g}s budget")

    return criterion


def four_r_map():
    chain = serial_chain("four_r", [(0.0, 0.3, 0.8, np.pi / 2),
                                    (0.0, 0.0, 0.9, -np.pi / 2),
                                    (0.0, 0.2, 0.7, np.pi / 2),
                                    (0.0, 0.0, 0.5, 0.0)])
    return map_from_mechanism(chain)


def coplanar_config(rng):
    q = rng.uniform(0.0, 2 * np.pi, 4)
    q[1] = rng.choice([0.0, np.pi])
    q[2] = rng.choice([0.0, np.pi])
    return q


def dh_direct(theta, d, a, alpha):
    """Elementary-transform composition Rz(theta) Tz(d) Tx(a) Rx(alpha)."""
    ct, st = np.cos(theta), np.sin(theta)
    ca, sa = np.cos(alpha), np.sin(alpha)
    return np.array([
        [ct, -st * ca, st * sa, a * ct],
        [st, ct * ca, -ct * sa, a * st],
        [0.0, sa, ca, d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def test_criterion_01_dh_transform(verdict):
    with verdict(1, "DH step matches direct evaluation and worked matrices",
                 budget=1.0) as c:
        rng = np.random.default_rng(11)
        worst = 0.0
        for _ in range(20):
            theta, d, a, alpha = rng.uniform(-np.pi, np.pi, 4)
            got = dh_transform(DHParams(theta, d, a, alpha), 0.0, "R")
            worst = max(worst, float(np.abs(got - dh_direct(theta, d, a,
                                                            alpha)).max()))
        c.append(("20 random quadruples within 1e-12", worst <= 1e-12))

        quarter = dh_transform(DHParams(np.pi / 2, 1.0, 2.0, 0.0), 0.0, "R")
        want_q = np.array([[0.0, -1.0, 0.0, 0.0],
                           [1.0, 0.0, 0.0, 2.0],
                           [0.0, 0.0, 1.0, 1.0],
                           [0.0, 0.0, 0.0, 1.0]])
        c.append(("worked quarter-turn matrix",
                  float(np.abs(quarter - want_q).max()) <= 1e-12))

        twist = dh_transform(DHParams(0.0, 0.0, 0.0, np.pi / 2), 0.0, "R")
        want_t = np.array([[1.0, 0.0, 0.0, 0.0],
                           [0.0, 0.0, -1.0, 0.0],
                           [0.0, 1.0, 0.0, 0.0],
                           [0.0, 0.0, 0.0, 1.0]])
        c.append(("worked quarter-twist matrix",
                  float(np.abs(twist - want_t).max()) <= 1e-12))


def test_criterion_02_grubler_numbers(verdict, fourbar, stewart):
    with verdict(2, "Grubler mobility for four-bar and Stewart platform",
                 budget=1.0) as c:
        fb = mobility(fourbar, planar=True)
        c.append(("four-bar planar M = 1",
                  fb.effective_mobility == 1 and isinstance(
                      fb.effective_mobility, int)))
        st = mobility(stewart, planar=False)
        c.append(("Stewart naive M = 12", st.naive_mobility == 12))
        st6 = mobility(stewart, planar=False, redundancy_override=6)
        c.append(("Stewart effective M = 6 with override",
                  st6.effective_mobility == 6 and st6.naive_mobility == 12))
        c.append(("counts are exact integers",
                  all(isinstance(x, int) for x in
                      (fb.naive_mobility, st.naive_mobility,
                       st6.effective_mobility))))


def test_criterion_03_pointing_singular_bands(verdict):
    with verdict(3, "pointing singular scan flags the two polar bands",
                 budget=30.0) as c:
        k = canonical_map("pointing")
        rep = singular_scan(k, 360, tol=1e-2)
        centers = rep.centers[0]
        oracle = np.broadcast_to((np.abs(np.cos(centers)) < 1e-2)[:, None],
                                 (360, 360))
        c.append(("flags exactly the |cos| < tol cells",
                  np.array_equal(rep.flagged, oracle)))
        c.append(("two bands", len(rep.components) == 2))

        g = np.linspace(0.0, 2 * np.pi, 100, endpoint=False)
        qq = np.stack(np.meshgrid(g, g, indexing="ij"), axis=-1).reshape(-1, 2)
        jac = k.jacobian_many(qq)
        gram = np.einsum("nij,nik->njk", jac, jac)
        dets = np.sqrt(np.abs(np.linalg.det(gram)))
        gap = float(np.abs(dets - np.abs(np.cos(qq[:, 0]))).max())
        c.append(("|det| equals |cos alpha| within 1e-9 on 100x100",
                  gap <= 1e-9))


def test_criterion_04_coplanarity_vs_rank(verdict):
    with verdict(4, "coplanarity agrees with orientation rank on the 4R arm",
                 budget=30.0) as c:
        k = four_r_map()
        rng = np.random.default_rng(44)
        agree = 0
        total = 10_000
        for _ in range(total):
            q = rng.uniform(0.0, 2 * np.pi, 4)
            chain = k.frame_chain(q)
            dirs = chain.revolute_axes()
            sv = np.linalg.svd(dirs.T, compute_uv=False)
            oracle = int(np.sum(sv > 1e-8 * sv[0])) <= 2
            agree += int(coplanarity_test(chain) == oracle)
        c.append((f"agreement {agree}/{total}", agree == total))

        invariant = 0
        for _ in range(1_000):
            q = coplanar_config(rng)
            before = coplanarity_test(k.frame_chain(q))
            q[0] = rng.uniform(0.0, 2 * np.pi)
            q[3] = rng.uniform(0.0, 2 * np.pi)
            after = coplanarity_test(k.frame_chain(q))
            invariant += int(before and after)
        c.append(("invariance under first/last-joint changes, 1000 samples",
                  invariant == 1_000))


def test_criterion_05_jacobian_vs_finite_differences(verdict):
    with verdict(5, "analytic Jacobians match central differences",
                 budget=10.0) as c:
        rng = np.random.default_rng(55)
        maps = [canonical_map(name) for name in CANONICAL_NAMES]
        maps.append(four_r_map())
        worst = 0.0
        for k in maps:
            kept = 0
            guard = 0
            while kept < 1_000:
                guard += 1
                assert guard < 50_000, f"could not sample regular configs ({k.name})"
                q = k.config_chart.random_points(1, rng)[0]
                jac = k.jacobian(q)
                if np.linalg.svd(jac, compute_uv=False)[-1] < 1e-3:
                    continue  # criterion asks for regular configurations
                rel = (np.linalg.norm(jacobian_fd(k, q) - jac)
                       / max(np.linalg.norm(jac), 1e-12))
                worst = max(worst, float(rel))
                kept += 1
        c.append((f"worst relative gap {worst:.3g} on 1000 configs per map",
                  worst <= 1e-5))


def test_criterion_06_planar_rr_plan(verdict):
    with verdict(6, "planar RR plan: 3 pieces, valid, instability order 3",
                 budget=300.0) as c:
        plan = builtin_plan("planar_rr")
        c.append(("exactly 3 pieces", plan.piece_count == 3))

        rep = validate_plan(plan, grid=12)
        c.append(("12^4 grid", rep.samples == 12 ** 4))
        c.append(("coverage 100%", rep.check("coverage").passed))
        c.append(("endpoint within 1e-9",
                  rep.check("endpoint").passed
                  and rep.tolerances["endpoint"] == 1e-9))
        c.append(("target within 1e-6",
                  rep.check("target").passed
                  and rep.tolerances["target"] == 1e-6))
        c.append(("Lipschitz modulus within L = 50",
                  rep.check("lipschitz").passed
                  and rep.tolerances["lipschitz"] == 50.0))

        inst = measure_instability(plan, grid=12)
        c.append(("eps = 2 x spacing", inst.eps == 2.0 * inst.spacing))
        c.append(("max instability order exactly 3", inst.max_order == 3))
        c.append(("witness recorded",
                  len(inst.witness) == 2 and inst.witness[0].shape == (2,)))


def test_criterion_07_scara_product_plan(verdict):
    with verdict(7, "SCARA product plan and the piece-count laws",
                 budget=300.0) as c:
        plan = product_plan(builtin_plan("planar_rr"), identity_interval_plan(),
                            kmap=canonical_map("scara"), name="scara")
        c.append(("3 pieces", plan.piece_count == 3))
        rep = validate_plan(plan, grid=6)
        c.append(("passes validation", rep.passed))

        products = [
            (identity_circle_plan(), identity_circle_plan()),
            (identity_torus_plan(), identity_circle_plan()),
            (builtin_plan("planar_rr"), identity_interval_plan()),
            (identity_interval_plan(), identity_interval_plan()),
        ]
        law_fg = all(
            product_plan(f, g).piece_count == f.piece_count + g.piece_count - 1
            for f, g in products)
        c.append(("product law f+g-1 across constructor fixtures", law_fg))

        kp = canonical_map("pointing")
        kr = canonical_map("planar_rr")
        planar_combined = combine_from_named("planar_rr", "torus", "annulus")
        law_cat = (builtin_plan("pointing").piece_count
                   == len(cat_cover_torus(kp.config_chart))
                   + len(sphere_section_cover(kp)) - 1)
        law_cat = law_cat and (planar_combined.piece_count
                               == len(cat_cover_torus(kr.config_chart))
                               + len(annulus_section_cover(kr)) - 1)
        c.append(("combine law cat+sec-1 across constructor fixtures", law_cat))


def test_criterion_08_pointing_plan(verdict):
    with verdict(8, "pointing plan validates; instability order at least 3",
                 budget=600.0) as c:
        plan = builtin_plan("pointing")
        c.append(("at most 5 pieces", plan.piece_count <= 5))
        rep = validate_plan(plan, grid=10)
        c.append(("about 10^4 samples", 9_000 <= rep.samples <= 12_000))
        c.append(("passes validation", rep.passed))
        inst = measure_instability(plan, grid=10)
        c.append(("max instability order >= 3", inst.max_order >= 3))


def test_criterion_09_tracking_cyclicity(verdict):
    with verdict(9, "interior loop closes; pole lollipop loops drift",
                 budget=60.0) as c:
        k = canonical_map("planar_rr")
        loop = probe_loop(k, 0.5)
        drift = cyclicity_drift(k, None, loop, _default_start(k, loop.points[0]))
        c.append((f"planar interior-loop drift {drift:.3g} <= 1e-3",
                  drift <= 1e-3))

        kp = canonical_map("pointing")
        rep = shrinking_loop_probe(kp, None, [0.0, 0.0, 1.0], [0.4, 0.2, 0.1])
        c.append(("all lollipop drifts >= 0.1 rad",
                  bool(np.all(rep.drifts >= 0.1))))


def test_criterion_10_h_fixture(verdict):
    with verdict(10, "forced-section gap and the two-piece filtration",
                 budget=5.0) as c:
        ys = np.arange(2001) / 1000.0
        gaps = np.array([h_fixture_gap(y) for y in ys])
        c.append(("gap is 1 exactly at y = 1 on the 1e-3 grid",
                  gaps[1000] == 1.0 and np.count_nonzero(gaps) == 1))

        c.append(("2-piece filtration validates",
                  validate_plan(h_fixture_plan(), grid=100).passed))

        single = h_fixture_single_plan()
        fails = all(not validate_plan(single, grid=g).passed
                    for g in (100, 101, 137, 200))
        c.append(("single piece fails at every grid >= 100 tried", fails))


def test_criterion_11_determinism(verdict, fourbar, stewart, tmp_path):
    with verdict(11, "document round-trips and byte-identical CLI runs") as c:
        mech_ok = True
        for m in (fourbar, stewart):
            text = serialize_mechanism(m)
            mech_ok = mech_ok and serialize_mechanism(parse_mechanism(text)) == text
        c.append(("mechanism documents round-trip", mech_ok))

        plan_ok = True
        for name in ("identity_interval", "identity_circle", "identity_torus",
                     "planar_rr", "scara", "pointing"):
            text = serialize_plan(builtin_plan(name))
            plan_ok = plan_ok and serialize_plan(parse_plan(text)) == text
        c.append(("plan documents round-trip", plan_ok))

        pairs = []
        for i in (1, 2):
            scan = tmp_path / f"scan{i}.csv"
            doc = tmp_path / f"plan{i}.json"
            svg = tmp_path / f"ws{i}.svg"
            run_command(["singular", "scan", "pointing", "--grid", "24",
                         "--out", str(scan)])
            run_command(["plan", "builtin", "pointing", "--out", str(doc)])
            run_command(["render", "workspace", "planar_rr", "--out", str(svg)])
            pairs.append((scan.read_bytes(), doc.read_bytes(), svg.read_bytes()))
        c.append(("repeated CLI runs byte-identical", pairs[0] == pairs[1]))
