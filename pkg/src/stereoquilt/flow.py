"""Dense optical flow: a pyramidal Horn-Schunck baseline and the Middlebury ``.flo`` codec."""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.ndimage import convolve

from .raster import resize_bilinear, sample_bilinear

FLO_MAGIC = 202021.25
_FLO_HEADER = struct.Struct("<fii")

# Horn-Schunck neighbourhood average (weights sum to 1, centre excluded).
_HS_AVERAGE = np.array(
    [[1 / 12, 1 / 6, 1 / 12], [1 / 6, 0.0, 1 / 6], [1 / 12, 1 / 6, 1 / 12]]
)


class FloFormatError(ValueError):
    pass


class FlowField:
    """Per-pixel displacement ``(u, v)`` in pixels, float32, rows top-first.

    Convention: ``target(x + u, y + v) ~ source(x, y)``.
    """

    __slots__ = ("_u", "_v")

    def __init__(self, u, v):
        u = np.array(u, dtype=np.float32)
        v = np.array(v, dtype=np.float32)
        if u.ndim != 2 or u.shape != v.shape:
            raise ValueError(f"u and v must be equal 2-D grids, got {u.shape} and {v.shape}")
        if u.shape[0] < 1 or u.shape[1] < 1:
            raise ValueError("flow field must be at least 1x1")
        u.flags.writeable = False
        v.flags.writeable = False
        self._u, self._v = u, v

    @classmethod
    def zeros(cls, width: int, height: int) -> "FlowField":
        z = np.zeros((height, width), np.float32)
        return cls(z, z)

    @property
    def u(self) -> np.ndarray:
        return self._u

    @property
    def v(self) -> np.ndarray:
        return self._v

    @property
    def width(self) -> int:
        return self._u.shape[1]

    @property
    def height(self) -> int:
        return self._u.shape[0]

    def magnitude(self) -> np.ndarray:
        return np.hypot(self._u.astype(np.float64), self._v.astype(np.float64))

    def __eq__(self, other):
        if not isinstance(other, FlowField):
            return NotImplemented
        return (
            self._u.shape == other._u.shape
            and np.array_equal(self._u, other._u)
            and np.array_equal(self._v, other._v)
        )

    __hash__ = None

    def __repr__(self):
        return f"FlowField({self.width}x{self.height})"


@dataclass(frozen=True)
class FlowParams:
    """Solver settings for :func:`estimate_flow`.

    ``lam`` balances the brightness-constancy term against flow smoothness
    on intensities scaled to [0, 1]; the minimised energy is
    ``lam * (Ix u + Iy v + It)**2 + |grad u|**2 + |grad v|**2``.
    """

    scale_factor: float = 0.5
    min_size: int = 16
    max_levels: int = 5
    iterations: int = 100
    lam: float = 15.0


def _pyramid_shapes(shape: tuple[int, int], params: FlowParams) -> list[tuple[int, int]]:
    h, w = shape
    shapes = [(h, w)]
    while len(shapes) < params.max_levels:
        nh = int(round(shapes[-1][0] * params.scale_factor))
        nw = int(round(shapes[-1][1] * params.scale_factor))
        if min(nh, nw) < params.min_size:
            break
        shapes.append((nh, nw))
    return shapes[::-1]


def _horn_schunck_level(source, target, u, v, params: FlowParams):
    h, w = source.shape
    gy, gx = np.mgrid[0:h, 0:w].astype(np.float64)
    warped = sample_bilinear(target, gx + u, gy + v)

    # Derivatives averaged over both frames to centre the linearisation.
    ix = 0.5 * (np.gradient(source, axis=1) + np.gradient(warped, axis=1))
    iy = 0.5 * (np.gradient(source, axis=0) + np.gradient(warped, axis=0))
    it = warped - source

    u0, v0 = u, v
    denom = 1.0 / params.lam + ix * ix + iy * iy
    for _ in range(params.iterations):
        u_avg = convolve(u, _HS_AVERAGE, mode="nearest")
        v_avg = convolve(v, _HS_AVERAGE, mode="nearest")
        resid = (ix * (u_avg - u0) + iy * (v_avg - v0) + it) / denom
        u = u_avg - ix * resid
        v = v_avg - iy * resid
    return u, v


def estimate_flow(source: np.ndarray, target: np.ndarray, params: FlowParams | None = None) -> FlowField:
    """Coarse-to-fine Horn-Schunck flow from ``source`` to ``target`` luminance grids.

    At each level the target is warped towards the source by the current
    estimate (clamp-to-edge bilinear) and the increment is solved with Jacobi
    iterations. Flow is bilinearly upsampled and rescaled between levels.
    """
    params = params or FlowParams()
    source = np.asarray(source, np.float64)
    target = np.asarray(target, np.float64)
    if source.ndim != 2 or source.shape != target.shape:
        raise ValueError(
            f"source and target must be 2-D grids of equal size, got {source.shape} and {target.shape}"
        )
    if min(source.shape) < params.min_size:
        raise ValueError(
            f"image {source.shape[1]}x{source.shape[0]} is smaller than the "
            f"coarsest pyramid level ({params.min_size} px)"
        )

    shapes = _pyramid_shapes(source.shape, params)
    pyramid = [(source, target)]
    for h, w in reversed(shapes[:-1]):
        src, tgt = pyramid[-1]
        pyramid.append((resize_bilinear(src, w, h), resize_bilinear(tgt, w, h)))

    u = v = None
    for src, tgt in reversed(pyramid):
        h, w = src.shape
        if u is None:
            u = np.zeros((h, w))
            v = np.zeros((h, w))
        else:
            ph, pw = u.shape
            u = resize_bilinear(u, w, h) * (w / pw)
            v = resize_bilinear(v, w, h) * (h / ph)
        u, v = _horn_schunck_level(src, tgt, u, v, params)

    u = np.nan_to_num(u, nan=0.0, posinf=0.0, neginf=0.0)
    v = np.nan_to_num(v, nan=0.0, posinf=0.0, neginf=0.0)
    return FlowField(u, v)


def write_flo(field: FlowField, path) -> None:
    """Write Middlebury ``.flo``: magic, width, height, then interleaved float32 (u, v)."""
    if not (np.isfinite(field.u).all() and np.isfinite(field.v).all()):
        raise ValueError("flow field contains non-finite values")
    payload = np.empty((field.height, field.width, 2), "<f4")
    payload[..., 0] = field.u
    payload[..., 1] = field.v
    with open(Path(path), "wb") as fh:
        fh.write(_FLO_HEADER.pack(FLO_MAGIC, field.width, field.height))
        fh.write(payload.tobytes())


def read_flo(path) -> FlowField:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _FLO_HEADER.size:
        raise FloFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, width, height = _FLO_HEADER.unpack_from(raw)
    if magic != np.float32(FLO_MAGIC):
        raise FloFormatError(f"{path}: wrong magic {magic!r}, expected {FLO_MAGIC}")
    if width <= 0 or height <= 0:
        raise FloFormatError(f"{path}: nonpositive dimensions {width}x{height}")
    expected = _FLO_HEADER.size + width * height * 8
    if len(raw) != expected:
        kind = "truncated payload" if len(raw) < expected else "trailing bytes after payload"
        raise FloFormatError(f"{path}: {kind} ({len(raw)} bytes, expected {expected})")
    data = np.frombuffer(raw, "<f4", offset=_FLO_HEADER.size).reshape(height, width, 2)
    return FlowField(data[..., 0], data[..., 1])
