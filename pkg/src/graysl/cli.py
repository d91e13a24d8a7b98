"""Command-line entry point: simulate, depth, bench, metrics.

Every run writes a JSON manifest holding the full configuration, the seed and
per-stage timings, so results are reproducible from the manifest alone. Exit
codes: 0 success, 1 processing failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, mapio
from . import backend as _backend
from .bench import bench_keyvalues, format_bench, run_bench
from .errors import ConfigurationError, DomainError, GraySLError, IntegrityError, ParseError
from .event_io import read_events, write_events
from .geometry import default_rig, load_rig, triangulate
from .graycode import GrayCodeConfig, make_pattern_set, write_pattern_images
from .matching import depth_pipeline
from .metrics import compute_metrics, format_report, report_keyvalues
from .scenes import SCENE_KINDS, make_scene, with_albedo_dropouts
from .simulator import ProjectionTiming, SensorModel, generate_events


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="graysl",
        description="Event-camera Gray-code structured light toolkit",
    )
    parser.add_argument("--version", action="version", version=f"graysl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, default=None,
                        help="key=value file supplying flag defaults")
    common.add_argument("--rig", type=Path, default=None,
                        help="rig parameter file (default: built-in desk rig)")
    common.add_argument("--bits", type=int, default=9, help="Gray code bit depth")
    common.add_argument("--columns", type=int, default=None,
                        help="covered projector columns (default 2**bits)")
    common.add_argument("--offset", type=int, default=0, help="first covered projector column")
    common.add_argument("--lsb-first", action="store_true",
                        help="project least-significant bit plane first")
    common.add_argument("--seed", type=int, default=0, help="simulation RNG seed")
    common.add_argument("--slide-us", type=int, default=400, help="slide period [us]")
    common.add_argument("--dark-us", type=int, default=80, help="dark interval [us]")
    common.add_argument("--jitter-us", type=int, default=0, help="timestamp jitter bound [us]")
    common.add_argument("--gap-us", type=float, default=None,
                        help="segmentation gap threshold [us] (default dark/2)")
    common.add_argument("--close-radius", type=int, default=0, help="code-image close radius")
    common.add_argument("--median-radius", type=int, default=0, help="depth median filter radius")
    common.add_argument("--backend", choices=("native", "python"), default=None,
                        help="kernel backend (default: native when built)")

    p_sim = sub.add_parser("simulate", parents=[common],
                           help="render a scene into an event file plus ground truth")
    p_sim.add_argument("--scene", choices=SCENE_KINDS, default="plane")
    p_sim.add_argument("--d0", type=float, default=64.0, help="primary disparity parameter")
    p_sim.add_argument("--d1", type=float, default=160.0, help="secondary disparity parameter")
    p_sim.add_argument("--motion-dx", type=int, default=1,
                       help="per-slide x translation for moving scenes")
    p_sim.add_argument("--slides", type=int, default=None,
                       help="number of projected slides (default: one code cycle)")
    p_sim.add_argument("--albedo-dropout", type=float, default=0.0,
                       help="fraction of pixels with event-suppressing albedo")
    p_sim.add_argument("--text-events", action="store_true",
                       help="write the text event format instead of binary")
    p_sim.add_argument("--dump-patterns", action="store_true",
                       help="export the projected bit planes as PBM images")
    p_sim.add_argument("--out", type=Path, required=True, help="output directory")
    p_sim.set_defaults(func=cmd_simulate)

    p_depth = sub.add_parser("depth", parents=[common],
                             help="decode an event file into depth maps")
    p_depth.add_argument("--events", type=Path, required=True, help="event file")
    p_depth.add_argument("--out", type=Path, required=True, help="output directory")
    p_depth.add_argument("--png", action="store_true", help="also write 16-bit PNG depth maps")
    p_depth.add_argument("--disparity", action="store_true",
                         help="also write per-window disparity text grids")
    p_depth.add_argument("--codes", action="store_true",
                         help="also write per-window code images (PNG + text grid)")
    p_depth.set_defaults(func=cmd_depth)

    p_bench = sub.add_parser("bench", parents=[common],
                             help="time GX-map query against epipolar search")
    p_bench.add_argument("--repeats", type=int, default=5)
    p_bench.add_argument("--backends", default=None,
                         help="comma-separated backends to measure (default: all)")
    p_bench.add_argument("--out", type=Path, default=None,
                         help="directory for bench report files")
    p_bench.set_defaults(func=cmd_bench)

    p_met = sub.add_parser("metrics", parents=[common],
                           help="compare two depth-map text grids")
    p_met.add_argument("candidate", type=Path)
    p_met.add_argument("reference", type=Path)
    p_met.add_argument("--threshold-mm", type=float, default=None,
                       help="override the 1%%-of-mean-depth threshold")
    p_met.add_argument("--keyvalues", action="store_true",
                       help="print machine-readable key=value lines")
    p_met.set_defaults(func=cmd_metrics)
    return parser


def _load_config_argv(path: Path) -> list[str]:
    """Turn a key=value config file into synthetic argv entries."""
    extra: list[str] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        flag = "--" + key.strip().replace("_", "-")
        value = value.strip()
        if value.lower() in ("true", "false"):
            if value.lower() == "true":
                extra.append(flag)
        else:
            extra.extend([flag, value])
    return extra


def _splice_config(argv: list[str]) -> list[str]:
    """Apply --config file entries as defaults (real flags override them)."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        return argv
    cfg = _load_config_argv(Path(argv[idx + 1]))
    # insert right after the subcommand so later explicit flags win
    for i, token in enumerate(argv):
        if not token.startswith("-"):
            return argv[: i + 1] + cfg + argv[i + 1:]
    return argv + cfg


def _code_config(args) -> GrayCodeConfig:
    bits = args.bits
    columns = args.columns if args.columns is not None else 1 << bits
    return GrayCodeConfig(num_bits=bits, num_columns=columns,
                          column_offset=args.offset, msb_first=not args.lsb_first)


def _rig(args):
    if args.rig is None:
        return default_rig()
    if not args.rig.exists():
        raise ConfigurationError(f"rig file not found: {args.rig}")
    return load_rig(args.rig)


def _manifest(args, out_dir: Path, extra: dict) -> None:
    payload = {
        "tool": "graysl",
        "version": __version__,
        "command": args.command,
        "config": {k: (str(v) if isinstance(v, Path) else v)
                   for k, v in vars(args).items() if k not in ("func",)},
        "backend": args.backend or _backend.active_backend_name(),
    }
    payload.update(extra)
    (out_dir / "manifest.json").write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def cmd_simulate(args) -> int:
    rig = _rig(args)
    config = _code_config(args)
    scene = make_scene(args.scene, rig.cam_shape, args.d0, args.d1, motion_dx=args.motion_dx)
    if args.albedo_dropout > 0:
        scene = with_albedo_dropouts(scene, np.random.default_rng(args.seed),
                                     fraction=args.albedo_dropout)
    sensor = SensorModel(jitter_bound_us=args.jitter_us, rng_seed=args.seed)
    timing = ProjectionTiming(slide_period_us=args.slide_us, dark_interval_us=args.dark_us)
    patterns = make_pattern_set(config, rig.proj_width, rig.proj_height)
    num_slides = args.slides if args.slides is not None else config.num_bits

    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    t0 = time.perf_counter()
    stream = generate_events(scene, patterns, rig, sensor, timing, num_slides=num_slides)
    gen_s = time.perf_counter() - t0

    events_path = out_dir / ("events.txt" if args.text_events else "events.evb")
    t0 = time.perf_counter()
    write_events(stream, events_path, binary=not args.text_events)
    write_s = time.perf_counter() - t0

    gt_disparity = _covered_ground_truth(scene, rig, config)
    mapio.write_grid(gt_disparity, out_dir / "gt_disparity.txt")
    mapio.write_grid(triangulate(gt_disparity, rig), out_dir / "gt_depth.txt")
    if args.dump_patterns:
        write_pattern_images(patterns, out_dir / "patterns")

    _manifest(args, out_dir, {
        "events_file": events_path.name,
        "num_events": len(stream),
        "num_slides": num_slides,
        "timings_s": {"generate": gen_s, "write_events": write_s},
    })
    print(f"wrote {len(stream)} events over {num_slides} slides to {events_path}")
    return 0


def _covered_ground_truth(scene, rig, config) -> np.ndarray:
    """Scene disparity masked to pixels whose projector column the code covers.

    This is the measurable reference: pixels outside the covered columns (or
    the projector's field) can never be recovered by any decoder.
    """
    d = scene.state_at(0)[0].astype(np.float32).copy()
    h, w = d.shape
    cols = np.arange(w)[None, :] - np.rint(np.nan_to_num(d, nan=0.0)).astype(np.int64)
    rel = cols - config.column_offset
    covered = np.isfinite(d) & (rel >= 0) & (rel < config.num_columns)
    covered &= (np.arange(h)[:, None] < rig.proj_height)
    d[~covered] = np.nan
    return d


def cmd_depth(args) -> int:
    rig = _rig(args)
    if not args.events.exists():
        raise ConfigurationError(f"event file not found: {args.events}")
    stream = read_events(args.events)
    bits = stream.num_bits or args.bits
    columns = args.columns if args.columns is not None else 1 << bits
    config = GrayCodeConfig(num_bits=bits, num_columns=columns,
                            column_offset=args.offset, msb_first=not args.lsb_first)
    out_dir = args.out
    out_dir.mkdir(parents=True, exist_ok=True)
    if len(stream) == 0:
        print("warning: empty event stream, no depth maps produced", file=sys.stderr)
        _manifest(args, out_dir, {"num_windows": 0, "num_slices": 0, "timings_s": {}})
        return 0
    result = depth_pipeline(
        stream, rig, config,
        gap_threshold_us=args.gap_us,
        close_radius=args.close_radius,
        median_radius=args.median_radius,
        backend=args.backend,
        keep_intermediates=args.codes or args.disparity,
    )
    files = []
    for i, depth in enumerate(result.depth_maps):
        path = out_dir / f"depth_{i:04d}.txt"
        mapio.write_grid(depth, path)
        files.append(path.name)
        if args.png:
            mapio.write_depth_png(depth, out_dir / f"depth_{i:04d}.png")
        if args.disparity:
            mapio.write_grid(result.disparity_maps[i], out_dir / f"disparity_{i:04d}.txt")
        if args.codes:
            mapio.write_code_png(result.code_images[i], out_dir / f"codes_{i:04d}.png")
            mapio.write_code_grid(result.code_images[i], out_dir / f"codes_{i:04d}.txt")
    _manifest(args, out_dir, {
        "num_windows": len(result.depth_maps),
        "num_slices": result.num_slices,
        "window_slices": result.window_slices,
        "depth_files": files,
        "timings_s": result.timings_s,
    })
    print(f"decoded {result.num_slices} slices into {len(result.depth_maps)} depth maps "
          f"in {out_dir}")
    return 0


def _bench_code_images(rig, config) -> list[tuple[str, np.ndarray]]:
    h, w = rig.cam_shape
    c = config.num_columns
    xs = np.arange(w, dtype=np.int32)[None, :]
    images = []
    for name, disparity in (("plane_d64", 64), ("plane_d160", 160)):
        rel = xs - disparity - config.column_offset
        codes = np.where((rel >= 0) & (rel < c), rel, -1).astype(np.int32)
        images.append((name, np.broadcast_to(codes, (h, w)).copy()))
    rng = np.random.default_rng(12345)
    images.append(("random", rng.integers(0, c, size=(h, w), dtype=np.int32)))
    return images


def cmd_bench(args) -> int:
    rig = _rig(args)
    config = _code_config(args)
    backends = tuple(args.backends.split(",")) if args.backends else None
    report = run_bench(_bench_code_images(rig, config), rig, config,
                       repeats=args.repeats, backends=backends)
    text = format_bench(report)
    print(text)
    if args.out is not None:
        args.out.mkdir(parents=True, exist_ok=True)
        (args.out / "bench.txt").write_text(text + "\n")
        (args.out / "bench_keyvalues.txt").write_text(bench_keyvalues(report) + "\n")
        _manifest(args, args.out, {"entries": len(report.entries)})
    return 0


def cmd_metrics(args) -> int:
    for path in (args.candidate, args.reference):
        if not path.exists():
            raise ConfigurationError(f"depth map file not found: {path}")
    candidate = mapio.read_grid(args.candidate)
    reference = mapio.read_grid(args.reference)
    report = compute_metrics(candidate, reference, threshold_mm=args.threshold_mm)
    print(report_keyvalues(report) if args.keyvalues else format_report(report))
    return 0


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _splice_config(argv)
    except (ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 2 on usage errors
        return int(exc.code or 0)
    if args.backend:
        try:
            _backend.get_backend(args.backend)
        except ConfigurationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    try:
        return args.func(args)
    except (ConfigurationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc}", file=sys.stderr)
        return 2
    except (ParseError, IntegrityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except GraySLError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
