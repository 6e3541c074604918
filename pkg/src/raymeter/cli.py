"""Command-line front door.

Subcommands: ``intersect`` (batch ray intersection), ``simulate`` (Monte
Carlo accuracy on the canonical ring scene), ``evaluate`` (accuracy
statistics of measured vs truth CSVs), ``serve`` (HTTP service) and
``make-scene`` (synthetic posed-image project).

Exit codes: 0 success, 1 input/usage error, 2 degenerate geometry, so
shell pipelines can branch on geometry failure. JSON output keeps full
float precision; human tables print 3 decimals (millimeters).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import formats
from .geometry import (
    DegenerateGeometryError,
    GeometryError,
    SystemMode,
    ellipsoid_from_covariance,
    intersect_rays,
)
from .simulate import (
    AccuracyReport,
    EmptyInputError,
    NoiseModel,
    UnmatchedIdError,
    evaluate,
    make_ring_scene,
    simulate_campaign,
)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_DEGENERATE = 2

RING_RADIUS = 10.0  # canonical simulation ring (meters)


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on usage errors; 2 is reserved for
    # degenerate geometry, so usage errors map to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="raymeter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("intersect", parents=[], help="intersect rays from a JSON file")
    p.add_argument("--rays", required=True, help="rays JSON file")
    p.add_argument("--mode", choices=[m.value for m in SystemMode], default=None,
                   help="override the mode stored in the rays file")
    p.add_argument("--json", action="store_true", help="emit the full result as JSON")

    p = sub.add_parser("simulate", help="Monte Carlo accuracy on the ring scene")
    p.add_argument("--cameras", type=int, required=True)
    p.add_argument("--rays-per-point", type=int, required=True)
    p.add_argument("--noise-px", type=float, required=True)
    p.add_argument("--trials", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in SystemMode],
                   default=SystemMode.PROJECTION.value)
    p.add_argument("--out", required=True, help="pooled report JSON path")

    p = sub.add_parser("evaluate", help="compare measured vs truth CSV")
    p.add_argument("--measured", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--json", action="store_true", help="emit the report as JSON")

    p = sub.add_parser("serve", help="run the HTTP measurement service")
    p.add_argument("--port", type=int, default=None,
                   help="default: $RAYMETER_PORT or 8000")
    p.add_argument("--data-dir", default=None,
                   help="default: $RAYMETER_DATA_DIR or ./data")
    p.add_argument("--ui-dir", default=None, help="static UI directory served at /")

    p = sub.add_parser("make-scene", help="generate a synthetic posed-image project")
    p.add_argument("--preset", choices=["ring"], default="ring")
    p.add_argument("--cameras", type=int, required=True)
    p.add_argument("--out", required=True, help="project directory to create")
    p.add_argument("--seed", type=int, default=0)

    return parser


def cmd_intersect(args) -> int:
    try:
        rays, file_mode = formats.load_rays_file(args.rays)
    except (OSError, ValueError, json.JSONDecodeError, GeometryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    mode = SystemMode(args.mode) if args.mode else file_mode
    try:
        result = intersect_rays(rays, mode)
    except DegenerateGeometryError as exc:
        print(f"degenerate geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except GeometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        document = formats.result_to_dict(result)
        document["summary"] = formats.result_summary(result)
        print(formats.dump_json(document), end="")
        return EXIT_OK
    ellipsoid = ellipsoid_from_covariance(result.point, result.covariance)
    x, y, z = result.point
    print(f"point      {x:.6f} {y:.6f} {z:.6f}")
    print(f"sigma0     {result.sigma0:.6f}")
    print(f"redundancy {result.redundancy}  (rays: {result.ray_count}, mode: {result.mode.value})")
    q = result.covariance
    print(f"var(x,y,z) {q[0, 0]:.9f} {q[1, 1]:.9f} {q[2, 2]:.9f}")
    a, b, c = ellipsoid.semi_axes
    print(f"ellipsoid  {a:.6f} {b:.6f} {c:.6f}")
    return EXIT_OK


def print_report_table(title: str, report: AccuracyReport) -> None:
    print(f"{title}")
    print(f"{'N':>6} {'RMSE':>8} {'ME':>8} {'Std':>8} {'Std(pop)':>9}")
    print(
        f"{report.n:>6} {report.rmse:>8.3f} {report.mean_error:>8.3f} "
        f"{report.std:>8.3f} {report.std_pop:>9.3f}"
    )


def cmd_simulate(args) -> int:
    if args.cameras < 2 or args.rays_per_point < 2 or args.trials < 1 or args.noise_px < 0:
        print("error: arguments out of range", file=sys.stderr)
        return EXIT_INPUT
    if args.rays_per_point > args.cameras:
        print("error: --rays-per-point cannot exceed --cameras", file=sys.stderr)
        return EXIT_INPUT
    scene = make_ring_scene(radius=RING_RADIUS, count=args.cameras, seed=args.seed)
    result = simulate_campaign(
        scene,
        NoiseModel(args.noise_px),
        rays_per_point=args.rays_per_point,
        trials=args.trials,
        mode=SystemMode(args.mode),
    )
    document = {
        "config": {
            "cameras": args.cameras,
            "rays_per_point": args.rays_per_point,
            "noise_px": args.noise_px,
            "trials": args.trials,
            "seed": args.seed,
            "mode": args.mode,
            "ring_radius": RING_RADIUS,
        },
        "pooled": formats.report_to_dict(result.pooled),
    }
    formats.dump_json(document, args.out)
    print_report_table(
        f"ring scene, {args.cameras} cameras, N={args.rays_per_point}, "
        f"noise {args.noise_px}px, {args.trials} trials (errors in meters)",
        result.pooled,
    )
    print(f"report written to {args.out}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    try:
        measured = formats.read_points_csv(args.measured)
        truth = formats.read_points_csv(args.truth)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        report = evaluate(measured, truth)
    except UnmatchedIdError as exc:
        print(f"error: unmatched ids: {', '.join(exc.ids)}", file=sys.stderr)
        return EXIT_INPUT
    except EmptyInputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if args.json:
        print(formats.dump_json(formats.report_to_dict(report)), end="")
    else:
        print_report_table("accuracy vs truth (meters)", report)
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    data_dir = args.data_dir or os.environ.get("RAYMETER_DATA_DIR") or "data"
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        print(f"error: data directory {data_dir} does not exist", file=sys.stderr)
        return EXIT_INPUT
    port = args.port
    if port is None:
        port = int(os.environ.get("RAYMETER_PORT", "8000"))
    ui_dir = args.ui_dir
    if ui_dir is not None and not Path(ui_dir).is_dir():
        print(f"error: ui directory {ui_dir} does not exist", file=sys.stderr)
        return EXIT_INPUT
    app = create_app(data_dir, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host="127.0.0.1", port=port, log_level="info")
    except (OSError, SystemExit) as exc:
        print(f"error: cannot serve on port {port}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def cmd_make_scene(args) -> int:
    from .scenegen import generate_ring_project

    if args.cameras < 2:
        print("error: need at least 2 cameras", file=sys.stderr)
        return EXIT_INPUT
    try:
        manifest = generate_ring_project(args.out, cameras=args.cameras, seed=args.seed)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    print(f"project {manifest['id']} with {len(manifest['images'])} images in {args.out}")
    return EXIT_OK


COMMANDS = {
    "intersect": cmd_intersect,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "serve": cmd_serve,
    "make-scene": cmd_make_scene,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
