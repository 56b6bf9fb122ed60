"""RGB raster type, PNG I/O and stereo-pair ingestion."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)
PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


class RasterImage:
    """Immutable 8-bit RGB pixel grid, stored as a ``(height, width, 3)`` uint8 array.

    Rows are top-first everywhere in this package.
    """

    __slots__ = ("_data",)

    def __init__(self, data):
        arr = np.asarray(data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"expected (height, width, 3) samples, got shape {arr.shape}")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"raster must be at least 1x1, got {arr.shape[1]}x{arr.shape[0]}")
        if arr.dtype != np.uint8:
            if not np.issubdtype(arr.dtype, np.integer) or arr.min() < 0 or arr.max() > 255:
                raise ValueError("samples must be 8-bit unsigned integers")
            arr = arr.astype(np.uint8)
        arr = np.ascontiguousarray(arr)
        if arr.flags.writeable:
            arr = arr.copy()
            arr.flags.writeable = False
        self._data = arr

    @classmethod
    def solid(cls, width: int, height: int, color) -> "RasterImage":
        arr = np.empty((height, width, 3), np.uint8)
        arr[...] = np.asarray(color, np.uint8)
        return cls(arr)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def width(self) -> int:
        return self._data.shape[1]

    @property
    def height(self) -> int:
        return self._data.shape[0]

    @property
    def channels(self) -> int:
        return 3

    @property
    def size(self) -> tuple[int, int]:
        return self.width, self.height

    def __eq__(self, other):
        if not isinstance(other, RasterImage):
            return NotImplemented
        return self._data.shape == other._data.shape and np.array_equal(self._data, other._data)

    __hash__ = None

    def __repr__(self):
        return f"RasterImage({self.width}x{self.height})"


@dataclass(frozen=True)
class StereoFrame:
    left: RasterImage
    right: RasterImage

    def __post_init__(self):
        if self.left.size != self.right.size:
            raise ValueError(
                f"stereo halves differ in size: {self.left.size} vs {self.right.size}"
            )


def _png_bit_depth(path: Path) -> int:
    with open(path, "rb") as fh:
        head = fh.read(33)
    if len(head) < 33 or head[:8] != PNG_SIGNATURE or head[12:16] != b"IHDR":
        raise ValueError(f"malformed PNG {path}: missing signature or IHDR")
    return head[24]


def load_png(path) -> RasterImage:
    """Decode a PNG into RGB. Grey/palette inputs are expanded, alpha is dropped."""
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such image: {path}")
    depth = _png_bit_depth(path)
    if depth > 8:
        raise ValueError(f"{path}: unsupported bit depth {depth} (at most 8 per channel)")
    try:
        with Image.open(path) as im:
            im.load()
            return RasterImage(np.asarray(im.convert("RGB"), np.uint8))
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ValueError(f"malformed PNG {path}: {exc}") from exc


def save_png(image: RasterImage, path) -> None:
    Image.fromarray(image.data, "RGB").save(Path(path), format="PNG")


def split_stereo(frame: RasterImage) -> StereoFrame:
    """Cut a side-by-side capture into equal left and right halves."""
    if frame.width % 2:
        raise ValueError(f"cannot split odd width {frame.width} into equal halves")
    half = frame.width // 2
    return StereoFrame(RasterImage(frame.data[:, :half]), RasterImage(frame.data[:, half:]))


def join_stereo(pair: StereoFrame) -> RasterImage:
    return RasterImage(np.concatenate([pair.left.data, pair.right.data], axis=1))


def sample_bilinear(grid: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Bilinearly sample ``grid`` (H, W) or (H, W, C) at float coordinates.

    Coordinates outside the grid are clamped to the edge. Integer coordinates
    return the stored sample exactly.
    """
    h, w = grid.shape[:2]
    xs = np.clip(xs, 0.0, w - 1)
    ys = np.clip(ys, 0.0, h - 1)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    fx = xs - x0
    fy = ys - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    g = grid.astype(np.float64, copy=False)
    if g.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
    top = g[y0, x0] * (1.0 - fx) + g[y0, x1] * fx
    bottom = g[y1, x0] * (1.0 - fx) + g[y1, x1] * fx
    return top * (1.0 - fy) + bottom * fy


def resize_bilinear(grid: np.ndarray, width: int, height: int) -> np.ndarray:
    """Resample to ``width`` x ``height`` with pixel-centre-aligned bilinear weights."""
    h, w = grid.shape[:2]
    if (w, h) == (width, height):
        return grid.astype(np.float64)
    xs = (np.arange(width) + 0.5) * (w / width) - 0.5
    ys = (np.arange(height) + 0.5) * (h / height) - 0.5
    gx, gy = np.meshgrid(xs, ys)
    return sample_bilinear(grid, gx, gy)


def round_to_u8(values: np.ndarray) -> np.ndarray:
    """Round half up and clamp to 0..255."""
    return np.clip(np.floor(values + 0.5), 0, 255).astype(np.uint8)


def prepare_view(
    image: RasterImage, target_width: int, target_height: int, crop_top: int = 0
) -> RasterImage:
    """Scale to ``target_width`` keeping aspect ratio, then crop ``target_height`` rows.

    Call with the same ``crop_top`` for both halves of a stereo pair so they
    keep a common upper edge.
    """
    if target_width < 1 or target_height < 1:
        raise ValueError("target dimensions must be positive")
    if crop_top < 0:
        raise ValueError(f"crop_top must be non-negative, got {crop_top}")
    scaled_height = max(1, round(image.height * target_width / image.width))
    if crop_top + target_height > scaled_height:
        raise ValueError(
            f"crop window rows {crop_top}..{crop_top + target_height} exceeds "
            f"scaled height {scaled_height}"
        )
    if image.width == target_width and image.height == scaled_height:
        scaled = image.data
    else:
        scaled = round_to_u8(resize_bilinear(image.data, target_width, scaled_height))
    return RasterImage(scaled[crop_top : crop_top + target_height])


def to_grayscale(image: RasterImage) -> np.ndarray:
    """Rec.601 luma in [0, 1] as a float64 (H, W) grid."""
    wr, wg, wb = LUMA_WEIGHTS
    d = image.data.astype(np.float64)
    return (wr * d[..., 0] + wg * d[..., 1] + wb * d[..., 2]) / 255.0
