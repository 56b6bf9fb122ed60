"""Flow-guided view interpolation between the two stereo halves."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .flow import FlowField
from .raster import (
    RasterImage,
    StereoFrame,
    load_png,
    round_to_u8,
    sample_bilinear,
    save_png,
)


@dataclass(frozen=True)
class ViewSequence:
    """Ordered morphed views; ``views[0]`` is the left image, ``views[-1]`` the right."""

    views: tuple[RasterImage, ...]

    def __post_init__(self):
        object.__setattr__(self, "views", tuple(self.views))
        if not self.views:
            raise ValueError("a view sequence needs at least one view")
        size = self.views[0].size
        for k, view in enumerate(self.views):
            if view.size != size:
                raise ValueError(f"view {k} is {view.size}, expected {size}")

    @property
    def count(self) -> int:
        return len(self.views)

    @property
    def size(self) -> tuple[int, int]:
        return self.views[0].size

    def __len__(self):
        return len(self.views)

    def __getitem__(self, k):
        return self.views[k]

    def __iter__(self):
        return iter(self.views)


def _check_dims(image: RasterImage, field: FlowField):
    if image.size != (field.width, field.height):
        raise ValueError(
            f"image is {image.width}x{image.height} but flow is {field.width}x{field.height}"
        )


def _warp_float(image: RasterImage, field: FlowField, scale: float) -> np.ndarray:
    h, w = image.height, image.width
    if scale == 0.0:
        return image.data.astype(np.float64)
    gy, gx = np.mgrid[0:h, 0:w].astype(np.float64)
    xs = gx - scale * field.u.astype(np.float64)
    ys = gy - scale * field.v.astype(np.float64)
    return sample_bilinear(image.data, xs, ys)


def warp_image(image: RasterImage, field: FlowField, scale: float) -> RasterImage:
    """Backward warp: ``out(x, y) = image(x - scale*u, y - scale*v)``, bilinear, edge-clamped."""
    _check_dims(image, field)
    if not 0.0 <= scale <= 1.0:
        raise ValueError(f"scale must lie in [0, 1], got {scale}")
    return RasterImage(round_to_u8(_warp_float(image, field, scale)))


def morph_frame(
    left: RasterImage,
    right: RasterImage,
    forward: FlowField,
    backward: FlowField,
    t: float,
) -> RasterImage:
    """Intermediate view at ``t``: both ends warped towards ``t`` and cross-dissolved.

    The blend is accumulated in float and rounded once per channel.
    """
    if left.size != right.size:
        raise ValueError(f"left {left.size} and right {right.size} differ in size")
    _check_dims(left, forward)
    _check_dims(right, backward)
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"t must lie in [0, 1], got {t}")
    from_left = _warp_float(left, forward, t)
    from_right = _warp_float(right, backward, 1.0 - t)
    return RasterImage(round_to_u8((1.0 - t) * from_left + t * from_right))


def generate_views(
    frame: StereoFrame,
    forward: FlowField,
    backward: FlowField,
    count: int = 32,
    workers: int = 1,
) -> ViewSequence:
    """Produce ``count`` views at ``t = k / (count - 1)``, frame 0 being the left half."""
    if count < 2:
        raise ValueError(f"need at least 2 views, got {count}")

    def one(k):
        return morph_frame(frame.left, frame.right, forward, backward, k / (count - 1))

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            views = list(pool.map(one, range(count)))
    else:
        views = [one(k) for k in range(count)]
    return ViewSequence(tuple(views))


def save_views(views: ViewSequence, out_dir, prefix: str = "view_") -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    for k, view in enumerate(views):
        path = out_dir / f"{prefix}{k:03d}.png"
        save_png(view, path)
        paths.append(path)
    return paths


def load_views(in_dir, prefix: str = "view_") -> ViewSequence:
    paths = sorted(Path(in_dir).glob(f"{prefix}*.png"))
    if not paths:
        raise FileNotFoundError(f"no {prefix}*.png files in {in_dir}")
    return ViewSequence(tuple(load_png(p) for p in paths))


def save_gif(views: ViewSequence, path, frame_ms: int = 60, bounce: bool = True) -> None:
    """Animated GIF of the sequence, played left to right and back when ``bounce``."""
    # One palette for the whole animation, taken from the two end views.
    ends = np.concatenate([views[0].data, views[-1].data], axis=0)
    palette = Image.fromarray(ends, "RGB").quantize(256, method=Image.Quantize.FASTOCTREE)
    frames = [
        Image.fromarray(v.data, "RGB").quantize(palette=palette, dither=Image.Dither.NONE)
        for v in views
    ]
    if bounce and len(frames) > 2:
        frames = frames + frames[-2:0:-1]
    frames[0].save(
        Path(path), save_all=True, append_images=frames[1:], duration=frame_ms, loop=0
    )
