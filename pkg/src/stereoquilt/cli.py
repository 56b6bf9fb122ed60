"""Command-line front end: individual stages and the full stereo-to-native pipeline."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from .calib import load_calibration, reference_calibration_path
from .flow import FlowParams, estimate_flow, read_flo, write_flo
from .lightfield import render_native_direct
from .lut import apply_lut, apply_lut_parallel, benchmark, build_lut, load_lut, save_lut
from .morph import generate_views, load_views, save_gif, save_views
from .quilt import Quilt, QuiltLayout, assemble_quilt
from .raster import (
    StereoFrame,
    load_png,
    prepare_view,
    save_png,
    split_stereo,
    to_grayscale,
)

log = logging.getLogger("stereoquilt")

# View count -> (cols, rows) for the stock quilt layouts.
STANDARD_LAYOUTS = {32: (4, 8), 45: (5, 9)}


class PipelineError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input: Path
    out_dir: Path
    calibration: Path | None = None
    views: int = 32
    cols: int = 4
    rows: int = 8
    view_width: int = 512
    view_height: int = 256
    crop_top: int = 0
    forward_flo: Path | None = None
    backward_flo: Path | None = None
    use_lut: bool = True
    bands: int = 1
    keep_intermediates: bool = False
    gif: bool = False

    def __post_init__(self):
        if self.views != self.cols * self.rows:
            raise ValueError(
                f"{self.views} views do not match a {self.cols}x{self.rows} quilt"
            )
        if (self.forward_flo is None) != (self.backward_flo is None):
            raise ValueError("give both forward and backward .flo files, or neither")

    @property
    def layout(self) -> QuiltLayout:
        return QuiltLayout(self.cols, self.rows, self.view_width, self.view_height)


class _Stage:
    """Context manager that tags any failure with the stage name."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        log.info("stage %s", self.name)
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, PipelineError) and isinstance(exc, Exception):
            raise PipelineError(self.name, exc) from exc
        return False


def run_pipeline(config: PipelineConfig) -> dict[str, Path]:
    """Stereo capture -> views -> quilt -> native image. Returns the written paths."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: dict[str, Path] = {}
    keep = config.keep_intermediates

    with _Stage("calibration"):
        cal_path = config.calibration or reference_calibration_path()
        cal = load_calibration(cal_path)
        if cal.n_views != config.views:
            raise ValueError(
                f"{cal_path} describes {cal.n_views} views, pipeline is set to {config.views}"
            )

    with _Stage("split"):
        halves = split_stereo(load_png(config.input))

    with _Stage("prepare"):
        pair = StereoFrame(
            prepare_view(halves.left, config.view_width, config.view_height, config.crop_top),
            prepare_view(halves.right, config.view_width, config.view_height, config.crop_top),
        )
        if keep:
            written["left"] = out / "left.png"
            written["right"] = out / "right.png"
            save_png(pair.left, written["left"])
            save_png(pair.right, written["right"])

    with _Stage("flow"):
        if config.forward_flo is not None:
            forward = read_flo(config.forward_flo)
            backward = read_flo(config.backward_flo)
        else:
            gl, gr = to_grayscale(pair.left), to_grayscale(pair.right)
            forward = estimate_flow(gl, gr)
            backward = estimate_flow(gr, gl)
            if keep:
                written["forward"] = out / "forward.flo"
                written["backward"] = out / "backward.flo"
                write_flo(forward, written["forward"])
                write_flo(backward, written["backward"])

    with _Stage("morph"):
        views = generate_views(pair, forward, backward, config.views)
        if keep:
            save_views(views, out / "views")
            written["views"] = out / "views"
        if config.gif:
            written["gif"] = out / "morph.gif"
            save_gif(views, written["gif"])

    with _Stage("quilt"):
        quilt = assemble_quilt(views, config.layout)
        written["quilt"] = out / "quilt.png"
        save_png(quilt.image, written["quilt"])

    with _Stage("native"):
        if config.use_lut:
            lut = build_lut(cal, config.layout)
            if keep:
                written["lut"] = out / "table.lut"
                save_lut(lut, written["lut"])
            native = apply_lut_parallel(lut, quilt, config.bands)
        else:
            native = render_native_direct(quilt, cal)
        written["native"] = out / "native.png"
        save_png(native, written["native"])

    with _Stage("validate"):
        q = load_png(written["quilt"])
        n = load_png(written["native"])
        if q.size != (config.layout.width, config.layout.height):
            raise ValueError(f"quilt.png is {q.width}x{q.height}")
        if n.size != (cal.panel_width, cal.panel_height):
            raise ValueError(f"native.png is {n.width}x{n.height}")
    return written


def _layout_for(views: int, cols, rows):
    if cols is not None and rows is not None:
        return cols, rows
    if views in STANDARD_LAYOUTS:
        return STANDARD_LAYOUTS[views]
    raise ValueError(f"no standard quilt layout for {views} views; pass --cols and --rows")


def _load_quilt(path, views, cols, rows) -> Quilt:
    cols, rows = _layout_for(views, cols, rows)
    return Quilt.from_image(load_png(path), cols, rows)


def cmd_split(args):
    pair = split_stereo(load_png(args.input))
    save_png(pair.left, args.left)
    save_png(pair.right, args.right)


def cmd_prepare(args):
    image = prepare_view(load_png(args.input), args.width, args.height, args.crop_top)
    save_png(image, args.out)


def cmd_flow(args):
    source = to_grayscale(load_png(args.source))
    target = to_grayscale(load_png(args.target))
    write_flo(estimate_flow(source, target, FlowParams(lam=args.lam)), args.out)


def cmd_morph(args):
    pair = StereoFrame(load_png(args.left), load_png(args.right))
    if (args.fwd is None) != (args.bwd is None):
        raise ValueError("give both --fwd and --bwd, or neither")
    if args.fwd is not None:
        forward, backward = read_flo(args.fwd), read_flo(args.bwd)
    else:
        gl, gr = to_grayscale(pair.left), to_grayscale(pair.right)
        forward, backward = estimate_flow(gl, gr), estimate_flow(gr, gl)
    views = generate_views(pair, forward, backward, args.count)
    save_views(views, args.out_dir)
    if args.gif:
        save_gif(views, args.gif)


def cmd_quilt(args):
    views = load_views(args.views_dir)
    layout = QuiltLayout(args.cols, args.rows, *views.size)
    save_png(assemble_quilt(views, layout).image, args.out)


def cmd_native(args):
    cal = load_calibration(args.calibration)
    quilt = _load_quilt(args.quilt, cal.n_views, args.cols, args.rows)
    save_png(render_native_direct(quilt, cal), args.out)


def cmd_lut_build(args):
    cal = load_calibration(args.calibration)
    cols, rows = _layout_for(cal.n_views, args.cols, args.rows)
    lut = build_lut(cal, QuiltLayout(cols, rows, args.tile_width, args.tile_height))
    save_lut(lut, args.out)


def cmd_lut_apply(args):
    lut = load_lut(args.lut)
    quilt = load_png(args.quilt)
    native = apply_lut_parallel(lut, quilt, args.bands) if args.bands > 1 else apply_lut(lut, quilt)
    save_png(native, args.out)


def cmd_bench(args):
    cal = load_calibration(args.calibration)
    quilt = _load_quilt(args.quilt, cal.n_views, args.cols, args.rows)
    report = benchmark(cal, quilt.layout, quilt, args.reps, tuple(args.bands))
    print("\n".join(report.lines()))


def cmd_pipeline(args):
    cols, rows = _layout_for(args.views, args.cols, args.rows)
    config = PipelineConfig(
        input=Path(args.input),
        out_dir=Path(args.out_dir),
        calibration=Path(args.calibration) if args.calibration else None,
        views=args.views,
        cols=cols,
        rows=rows,
        view_width=args.width,
        view_height=args.height,
        crop_top=args.crop_top,
        forward_flo=args.fwd,
        backward_flo=args.bwd,
        use_lut=not args.direct,
        bands=args.bands,
        keep_intermediates=args.keep_intermediates,
        gif=args.gif,
    )
    for name, path in run_pipeline(config).items():
        print(f"{name}: {path}")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="stereoquilt",
        description="Turn a side-by-side stereo image into a lenticular native image.",
    )
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("split", help="cut a side-by-side image into left/right halves")
    s.add_argument("--input", required=True)
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.set_defaults(func=cmd_split)

    s = sub.add_parser("prepare", help="resize to a width, then crop rows")
    s.add_argument("--input", required=True)
    s.add_argument("--width", type=int, default=512)
    s.add_argument("--height", type=int, default=256)
    s.add_argument("--crop-top", type=int, default=0)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_prepare)

    s = sub.add_parser("flow", help="estimate optical flow and write a .flo file")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--lam", type=float, default=FlowParams.lam)
    s.set_defaults(func=cmd_flow)

    s = sub.add_parser("morph", help="generate intermediate views")
    s.add_argument("--left", required=True)
    s.add_argument("--right", required=True)
    s.add_argument("--fwd", help="precomputed left->right .flo")
    s.add_argument("--bwd", help="precomputed right->left .flo")
    s.add_argument("--count", type=int, default=32)
    s.add_argument("--out-dir", required=True)
    s.add_argument("--gif", help="also write an animated GIF here")
    s.set_defaults(func=cmd_morph)

    s = sub.add_parser("quilt", help="tile view_*.png files into a quilt")
    s.add_argument("--views-dir", required=True)
    s.add_argument("--cols", type=int, default=4)
    s.add_argument("--rows", type=int, default=8)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_quilt)

    s = sub.add_parser("native", help="render a native image directly from a quilt")
    s.add_argument("--quilt", required=True)
    s.add_argument("--calibration", required=True)
    s.add_argument("--cols", type=int)
    s.add_argument("--rows", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_native)

    s = sub.add_parser("lut", help="build or apply a lookup table")
    lut_sub = s.add_subparsers(dest="lut_command", required=True)
    b = lut_sub.add_parser("build")
    b.add_argument("--calibration", required=True)
    b.add_argument("--cols", type=int)
    b.add_argument("--rows", type=int)
    b.add_argument("--tile-width", type=int, default=512)
    b.add_argument("--tile-height", type=int, default=256)
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_lut_build)
    a = lut_sub.add_parser("apply")
    a.add_argument("--lut", required=True)
    a.add_argument("--quilt", required=True)
    a.add_argument("--out", required=True)
    a.add_argument("--bands", type=int, default=1)
    a.set_defaults(func=cmd_lut_apply)

    s = sub.add_parser("bench", help="time direct vs lookup-table rendering")
    s.add_argument("--calibration", required=True)
    s.add_argument("--quilt", required=True)
    s.add_argument("--cols", type=int)
    s.add_argument("--rows", type=int)
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--bands", type=int, nargs="+", default=[1, 2, 4])
    s.set_defaults(func=cmd_bench)

    s = sub.add_parser("pipeline", help="run every stage end to end")
    s.add_argument("--input", required=True, help="side-by-side stereo PNG")
    s.add_argument("--out-dir", required=True)
    s.add_argument("--calibration", help="calibration JSON (default: bundled reference)")
    s.add_argument("--views", type=int, default=32)
    s.add_argument("--cols", type=int)
    s.add_argument("--rows", type=int)
    s.add_argument("--width", type=int, default=512)
    s.add_argument("--height", type=int, default=256)
    s.add_argument("--crop-top", type=int, default=0)
    s.add_argument("--fwd", type=Path)
    s.add_argument("--bwd", type=Path)
    s.add_argument("--direct", action="store_true", help="skip the lookup table")
    s.add_argument("--bands", type=int, default=1)
    s.add_argument("--keep-intermediates", action="store_true")
    s.add_argument("--gif", action="store_true")
    s.set_defaults(func=cmd_pipeline)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        args.func(args)
    except PipelineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
