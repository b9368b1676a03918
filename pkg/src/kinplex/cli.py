"""Command-line front end: parse documents, run analyses, write reports.

Exit codes: 0 success, 1 when an analysis produced a failing report
(validation failure, tracking lost, invalid mechanism), 2 for usage and
input errors raised before any analysis ran.  Summaries print numbers at 6
significant digits; CSV report files carry 17.
"""

from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import (DocumentError, DomainError, KinplexError,
                     PreconditionError, TrackingLostError,
                     UnsupportedTopologyError, VacuousTestError)
from .kinematics import (CANONICAL_NAMES, canonical_map, map_from_mechanism,
                         singular_scan)
from .mechanism import classify_mechanism, mobility, parse_mechanism
from .planning import BUILTIN_PLANS, builtin_plan, parse_plan, serialize_plan
from .planning import h_fixture_gap
from .svgplot import (render_instability_slice, render_singular_scan,
                      render_workspace)
from .tracking import WorkPath, lift_path, shrinking_loop_probe
from .validation import measure_instability, validate_plan

__all__ = ["CommandOutcome", "run_command", "main"]

USAGE_ERRORS = (DocumentError, PreconditionError, DomainError,
                UnsupportedTopologyError, VacuousTestError, OSError,
                ValueError)


@dataclass(frozen=True)
class CommandOutcome:
    exit_code: int
    summary: str
    outputs: tuple = field(default_factory=tuple)


def _read(path: str) -> str:
    with open(path) as fh:
        return fh.read()


def _parse_vector(text: str, degrees: bool = False) -> np.ndarray:
    vals = np.array([float(x) for x in text.split(",") if x.strip() != ""])
    return np.deg2rad(vals) if degrees else vals


def _load_map(target: str):
    """A canonical map name, or a mechanism JSON path."""
    if target in CANONICAL_NAMES:
        return canonical_map(target)
    return map_from_mechanism(parse_mechanism(_read(target)))


def _load_plan(args):
    if getattr(args, "builtin", None):
        return builtin_plan(args.builtin)
    if getattr(args, "plan", None):
        return parse_plan(_read(args.plan))
    raise PreconditionError("pass a plan file or --builtin NAME")


def _write_rows(path: str, header: list, rows: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _g(x) -> str:
    return f"{float(x):.6g}"


# ---------------------------------------------------------------------------
# subcommand bodies


def _cmd_mech_validate(args) -> CommandOutcome:
    text = _read(args.file)
    try:
        m = parse_mechanism(text)
    except DocumentError as e:
        if args.out:
            _write_rows(args.out, ["check", "passed", "detail"],
                        [["document", 0, str(e)]])
        return CommandOutcome(1, f"invalid mechanism: {e}",
                              (args.out,) if args.out else ())
    shape = classify_mechanism(m)
    if args.out:
        _write_rows(args.out, ["check", "passed", "detail"],
                    [["document", 1, f"name={m.name}"],
                     ["links", 1, str(m.links)],
                     ["joints", 1, str(len(m.joints))],
                     ["shape", 1, shape]])
    return CommandOutcome(
        0, f"valid mechanism '{m.name}': links={m.links} "
           f"joints={len(m.joints)} ({shape})",
        (args.out,) if args.out else ())


def _cmd_mech_classify(args) -> CommandOutcome:
    m = parse_mechanism(_read(args.file))
    shape = classify_mechanism(m)
    if args.out:
        _write_rows(args.out, ["name", "shape", "links", "joints"],
                    [[m.name, shape, m.links, len(m.joints)]])
    return CommandOutcome(0, f"{m.name}: {shape} (links={m.links}, "
                             f"joints={len(m.joints)})",
                          (args.out,) if args.out else ())


def _cmd_mech_mobility(args) -> CommandOutcome:
    m = parse_mechanism(_read(args.file))
    planar = True if args.planar else (False if args.spatial else None)
    rep = mobility(m, planar=planar, redundancy_override=args.redundancy)
    if args.out:
        _write_rows(args.out,
                    ["naive_mobility", "redundancy_override",
                     "effective_mobility", "planar", "formula"],
                    [[rep.naive_mobility, rep.redundancy_override,
                      rep.effective_mobility, int(rep.planar), rep.formula]])
    line = f"M={rep.effective_mobility}"
    if rep.redundancy_override:
        line += (f" (naive {rep.naive_mobility}, "
                 f"override {rep.redundancy_override})")
    return CommandOutcome(0, line, (args.out,) if args.out else ())


def _cmd_fk(args) -> CommandOutcome:
    k = _load_map(args.target)
    c = _parse_vector(args.config, args.degrees)
    w, _chain = k.forward(c)
    if args.out:
        _write_rows(args.out, [f"w{i}" for i in range(w.shape[0])],
                    [[f"{x:.17g}" for x in w]])
    vals = ", ".join(_g(x) for x in w)
    return CommandOutcome(0, f"f({args.config}) = ({vals})",
                          (args.out,) if args.out else ())


def _cmd_jac(args) -> CommandOutcome:
    k = _load_map(args.target)
    c = _parse_vector(args.config, args.degrees)
    jac_c = k.jacobian(c)
    if args.out:
        _write_rows(args.out, [f"dq{j}" for j in range(jac_c.shape[1])],
                    [[f"{x:.17g}" for x in row] for row in jac_c])
    sv = np.linalg.svd(jac_c, compute_uv=False)
    return CommandOutcome(
        0, f"jacobian {jac_c.shape[0]}x{jac_c.shape[1]}: "
           f"smin={_g(sv[-1])} smax={_g(sv[0])}",
        (args.out,) if args.out else ())


def _cmd_singular_scan(args) -> CommandOutcome:
    k = _load_map(args.target)
    rep = singular_scan(k, args.grid, tol=args.tol)
    if args.out:
        rep.to_csv(args.out)
    return CommandOutcome(0, rep.summary(), (args.out,) if args.out else ())


def _cmd_track_lift(args) -> CommandOutcome:
    k = _load_map(args.target)
    path = WorkPath.from_csv(args.path)
    start = _parse_vector(args.start, args.degrees)
    try:
        res = lift_path(k, None, start, path)
    except TrackingLostError as e:
        return CommandOutcome(1, f"tracking lost: {e}")
    if args.out:
        res.to_csv(args.out)
    return CommandOutcome(
        0, f"lift: {res.times.size} nodes, max error {_g(res.max_error)}, "
           f"drift {_g(res.drift)}, singular encounters "
           f"{res.singular_count}",
        (args.out,) if args.out else ())


def _cmd_track_drift(args) -> CommandOutcome:
    k = _load_map(args.target)
    loop = WorkPath.from_csv(args.loop)
    if not loop.is_closed:
        raise PreconditionError("drift needs a closed loop path")
    start = _parse_vector(args.start, args.degrees)
    try:
        res = lift_path(k, None, start, loop)
    except TrackingLostError as e:
        return CommandOutcome(1, f"tracking lost: {e}")
    if args.out:
        res.to_csv(args.out)
    return CommandOutcome(0, f"drift={_g(res.drift)}",
                          (args.out,) if args.out else ())


def _cmd_track_probe(args) -> CommandOutcome:
    k = _load_map(args.target)
    center = _parse_vector(args.center, args.degrees)
    radii = [float(x) for x in args.radii.split(",")]
    try:
        rep = shrinking_loop_probe(k, None, center, radii)
    except TrackingLostError as e:
        return CommandOutcome(1, f"tracking lost: {e}")
    if args.out:
        _write_rows(args.out, ["radius", "drift", "max_error"],
                    [[f"{e.radius:.17g}", f"{e.drift:.17g}",
                      f"{e.max_error:.17g}"] for e in rep.entries])
    drifts = ", ".join(_g(e.drift) for e in rep.entries)
    return CommandOutcome(0, f"probe drifts: {drifts} (radii {args.radii})",
                          (args.out,) if args.out else ())


def _cmd_plan_validate(args) -> CommandOutcome:
    plan = _load_plan(args)
    rep = validate_plan(plan, grid=args.grid)
    if args.out:
        rep.to_csv(args.out)
    return CommandOutcome(0 if rep.passed else 1, rep.summary(),
                          (args.out,) if args.out else ())


def _cmd_plan_instability(args) -> CommandOutcome:
    plan = _load_plan(args)
    rep = measure_instability(plan, grid=args.grid, eps=args.eps)
    if args.out:
        rep.to_csv(args.out)
    return CommandOutcome(0, rep.summary(), (args.out,) if args.out else ())


def _cmd_plan_builtin(args) -> CommandOutcome:
    plan = builtin_plan(args.name)
    text = serialize_plan(plan)
    if args.out:
        with open(args.out, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return CommandOutcome(0, f"plan {plan.name}: {plan.piece_count} pieces",
                          (args.out,) if args.out else ())


def _cmd_fixture_h_gap(args) -> CommandOutcome:
    gap = h_fixture_gap(args.y)
    if args.out:
        _write_rows(args.out, ["y", "gap"],
                    [[f"{args.y:.17g}", f"{gap:.17g}"]])
    return CommandOutcome(0, f"h gap at y={_g(args.y)}: {_g(gap)}",
                          (args.out,) if args.out else ())


def _cmd_render(args) -> CommandOutcome:
    if args.kind == "workspace":
        k = _load_map(args.target)
        summary = render_workspace(k, args.out, grid=args.grid)
    elif args.kind == "singular-scan":
        k = _load_map(args.target)
        rep = singular_scan(k, args.grid, tol=args.tol)
        summary = render_singular_scan(rep, args.out,
                                       title=f"singular scan: {k.name}")
    else:
        plan = (builtin_plan(args.target) if args.target in BUILTIN_PLANS
                else parse_plan(_read(args.target)))
        rep = measure_instability(plan, grid=args.grid, eps=args.eps)
        axes = tuple(args.axes.split(","))
        summary = render_instability_slice(rep, args.out, axes=axes)
    return CommandOutcome(0, summary, (args.out,))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kinplex",
        description="Mechanism kinematics, singularity scans, path lifting, "
                    "and manipulation-plan analysis.")
    sub = p.add_subparsers(dest="command", required=True)

    mech = sub.add_parser("mech", help="mechanism document analyses")
    mech_sub = mech.add_subparsers(dest="subcommand", required=True)
    mv = mech_sub.add_parser("validate", help="check a mechanism document")
    mv.add_argument("file")
    mv.add_argument("--out")
    mv.set_defaults(fn=_cmd_mech_validate)
    mc = mech_sub.add_parser("classify", help="serial / tree / parallel")
    mc.add_argument("file")
    mc.add_argument("--out")
    mc.set_defaults(fn=_cmd_mech_classify)
    mm = mech_sub.add_parser("mobility", help="Grubler mobility count")
    mm.add_argument("file")
    mm.add_argument("--planar", action="store_true",
                    help="force the planar formula")
    mm.add_argument("--spatial", action="store_true",
                    help="force the spatial formula")
    mm.add_argument("--redundancy", type=int, default=0,
                    help="redundant-freedom override to subtract")
    mm.add_argument("--out")
    mm.set_defaults(fn=_cmd_mech_mobility)

    fk = sub.add_parser("fk", help="forward kinematics at one configuration")
    fk.add_argument("target", help="canonical map name or mechanism JSON path")
    fk.add_argument("--config", required=True, help='joint values "v1,v2,..."')
    fk.add_argument("--degrees", action="store_true")
    fk.add_argument("--out")
    fk.set_defaults(fn=_cmd_fk)

    jac = sub.add_parser("jac", help="Jacobian at one configuration")
    jac.add_argument("target")
    jac.add_argument("--config", required=True)
    jac.add_argument("--degrees", action="store_true")
    jac.add_argument("--out")
    jac.set_defaults(fn=_cmd_jac)

    sing = sub.add_parser("singular", help="singular set analyses")
    sing_sub = sing.add_subparsers(dest="subcommand", required=True)
    ss = sing_sub.add_parser("scan", help="grid scan of the singular set")
    ss.add_argument("target")
    ss.add_argument("--grid", type=int, default=360)
    ss.add_argument("--tol", type=float, default=1e-2)
    ss.add_argument("--out")
    ss.set_defaults(fn=_cmd_singular_scan)

    track = sub.add_parser("track", help="workspace-path lifting")
    track_sub = track.add_subparsers(dest="subcommand", required=True)
    tl = track_sub.add_parser("lift", help="lift a workspace path")
    tl.add_argument("target")
    tl.add_argument("--path", required=True, help="workspace path CSV")
    tl.add_argument("--start", required=True, help='start config "v1,v2,..."')
    tl.add_argument("--degrees", action="store_true")
    tl.add_argument("--out")
    tl.set_defaults(fn=_cmd_track_lift)
    td = track_sub.add_parser("drift", help="cyclicity drift of a closed loop")
    td.add_argument("target")
    td.add_argument("--loop", required=True, help="closed loop CSV")
    td.add_argument("--start", required=True)
    td.add_argument("--degrees", action="store_true")
    td.add_argument("--out")
    td.set_defaults(fn=_cmd_track_drift)
    tp = track_sub.add_parser("probe", help="shrinking-loop drift probe")
    tp.add_argument("target")
    tp.add_argument("--center", required=True, help='workspace point "v1,v2,..."')
    tp.add_argument("--radii", required=True, help='decreasing radii "r1,r2,..."')
    tp.add_argument("--degrees", action="store_true")
    tp.add_argument("--out")
    tp.set_defaults(fn=_cmd_track_probe)

    plan = sub.add_parser("plan", help="manipulation-plan analyses")
    plan_sub = plan.add_subparsers(dest="subcommand", required=True)
    pv = plan_sub.add_parser("validate", help="grid validation of a plan")
    pv.add_argument("plan", nargs="?", help="plan JSON path")
    pv.add_argument("--builtin", choices=BUILTIN_PLANS)
    pv.add_argument("--grid", type=int, default=12)
    pv.add_argument("--out")
    pv.set_defaults(fn=_cmd_plan_validate)
    pi = plan_sub.add_parser("instability", help="instability-order measurement")
    pi.add_argument("plan", nargs="?")
    pi.add_argument("--builtin", choices=BUILTIN_PLANS)
    pi.add_argument("--grid", type=int, default=12)
    pi.add_argument("--eps", type=float, default=None)
    pi.add_argument("--out")
    pi.set_defaults(fn=_cmd_plan_instability)
    pb = plan_sub.add_parser("builtin", help="emit a builtin plan document")
    pb.add_argument("name", choices=BUILTIN_PLANS)
    pb.add_argument("--out")
    pb.set_defaults(fn=_cmd_plan_builtin)

    fixture = sub.add_parser("fixture", help="worked fixtures")
    fixture_sub = fixture.add_subparsers(dest="subcommand", required=True)
    hg = fixture_sub.add_parser("h-gap", help="forced-section jump of the "
                                              "plateau map")
    hg.add_argument("y", type=float)
    hg.add_argument("--out")
    hg.set_defaults(fn=_cmd_fixture_h_gap)

    render = sub.add_parser("render", help="SVG plots of report data")
    render.add_argument("kind",
                        choices=["workspace", "singular-scan",
                                 "instability-slice"])
    render.add_argument("target",
                        help="map name/mechanism path, or plan name/path for "
                             "instability-slice")
    render.add_argument("--grid", type=int, default=None)
    render.add_argument("--tol", type=float, default=1e-2)
    render.add_argument("--eps", type=float, default=None)
    render.add_argument("--axes", default="c0,w0",
                        help="the two free axes of an instability slice")
    render.add_argument("--out", required=True)
    render.set_defaults(fn=_cmd_render)

    return p


def run_command(argv) -> CommandOutcome:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return CommandOutcome(int(e.code or 0), "")
    if getattr(args, "fn", None) is _cmd_render and args.grid is None:
        args.grid = {"workspace": 40, "singular-scan": 360,
                     "instability-slice": 12}[args.kind]
    try:
        return args.fn(args)
    except TrackingLostError as e:
        return CommandOutcome(1, f"tracking lost: {e}")
    except USAGE_ERRORS as e:
        print(f"kinplex: error: {e}", file=sys.stderr)
        return CommandOutcome(2, "")
    except KinplexError as e:
        print(f"kinplex: error: {e}", file=sys.stderr)
        return CommandOutcome(2, "")


def main(argv=None) -> int:
    outcome = run_command(sys.argv[1:] if argv is None else argv)
    if outcome.summary:
        print(outcome.summary)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
