"""Command-line interface.

Exit codes: 0 success (for ``check``: certified), 1 computation error or not
certified, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .bezier import eval_surface
from .curvature import DEFAULT_QUAD_NODES, curvature_report
from .errors import GeometryError
from .formats import dumps_report, export_mesh, load_net
from .intersect import DEFAULT_EPSILON
from .mesh import control_mesh_at_level
from .pipeline import MAX_LEVEL_CEILING, RunConfig, convergence_summary, first_certified, run


def _number(x: float) -> str:
    text = repr(float(x) + 0.0)
    return text[:-2] if text.endswith(".0") else text


def _level(text):
    value = int(text)
    if not 0 <= value <= MAX_LEVEL_CEILING:
        raise argparse.ArgumentTypeError(f"level must be in [0, {MAX_LEVEL_CEILING}]")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--quad-nodes", type=int, default=DEFAULT_QUAD_NODES,
                        help="Gauss-Legendre nodes per direction (default %(default)s)")
    common.add_argument("--samples", type=int, default=32,
                        help="Hausdorff samples per direction (default %(default)s)")
    common.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                        help="intersection tolerance relative to the bounding-box diagonal")

    parser = argparse.ArgumentParser(prog="bezier-isotopy",
                                     description="Subdivision certificates for Bezier control nets.")
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", parents=[common], help="run the subdivision pipeline")
    check.add_argument("net")
    check.add_argument("--max-level", type=_level, default=5)
    check.add_argument("--stop-on-certify", action="store_true")
    check.add_argument("--json", metavar="OUT", help="write the JSON report here")

    curv = sub.add_parser("curvature", parents=[common], help="curvature report at one level")
    curv.add_argument("net")
    curv.add_argument("--level", type=_level, required=True)

    export = sub.add_parser("export", parents=[common], help="write the level-k control surface as OBJ")
    export.add_argument("net")
    export.add_argument("--level", type=_level, required=True)
    export.add_argument("--out", required=True)

    ev = sub.add_parser("eval", parents=[common], help="evaluate the surface at (u, v)")
    ev.add_argument("net")
    ev.add_argument("--u", type=float, required=True)
    ev.add_argument("--v", type=float, required=True)
    return parser


def _config(args, max_level=0, stop=False) -> RunConfig:
    return RunConfig(max_level=max_level, quad_nodes=args.quad_nodes, samples=args.samples,
                     epsilon=args.epsilon, stop_on_certify=stop)


def _check(args, out) -> int:
    net = load_net(args.net)
    config = _config(args, args.max_level, args.stop_on_certify)
    records = run(net, config)
    print(f"{'level':>5} {'patches':>7} {'hausdorff':>11} {'theta_n':>8} {'theta_u':>8} {'theta_v':>8} "
          f"{'cones':>5} {'oracle':>6} {'topo':>5} verdict", file=out)
    for r in records:
        c = r.certificate
        tn, tu, tv = r.max_cone_spans
        print(f"{r.level:>5} {r.patch_count:>7} {r.hausdorff:>11.4e} {tn:>8.4f} {tu:>8.4f} {tv:>8.4f} "
              f"{'ok' if c.conditions_pass else 'fail':>5} {'ok' if c.oracle_clear else 'fail':>6} "
              f"{'ok' if c.topology_match else 'fail':>5} {c.verdict.value}", file=out)
    k_star = first_certified(records)
    if k_star is None:
        print(f"not certified up to level {records[-1].level}", file=out)
    else:
        print(f"certified at level {k_star}", file=out)
    if args.json:
        summary = convergence_summary(records) if len(records) >= 2 else None
        Path(args.json).write_text(dumps_report(net, records, config, summary))
    return 0 if k_star is not None else 1


def _curvature(args, out) -> int:
    net = load_net(args.net)
    _config(args)  # validates the shared flags
    report = curvature_report(control_mesh_at_level(net, args.level), net, args.quad_nodes)
    for name, value in vars(report).items():
        if value is not None:
            print(f"{name} {_number(value) if isinstance(value, float) else value}", file=out)
    return 0


def _export(args, out) -> int:
    net = load_net(args.net)
    mesh = control_mesh_at_level(net, args.level)
    Path(args.out).write_bytes(export_mesh(mesh, "obj"))
    print(f"wrote {mesh.num_vertices} vertices and {mesh.num_faces} triangles to {args.out}", file=out)
    return 0


def _eval(args, out) -> int:
    net = load_net(args.net)
    if not (0.0 <= args.u <= 1.0 and 0.0 <= args.v <= 1.0):
        raise ValueError("u and v must lie in [0, 1]")
    point = eval_surface(net, args.u, args.v)
    print(" ".join(_number(c) for c in point), file=out)
    return 0


COMMANDS = {"check": _check, "curvature": _curvature, "export": _export, "eval": _eval}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args, out)
    except (GeometryError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
