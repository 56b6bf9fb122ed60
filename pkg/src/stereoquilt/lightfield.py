"""Direct native-image rendering for a slanted lenticular panel.

Each RGB subpixel at panel column ``i = 3x + c`` and row ``j`` sees view

    N = n_views * ((i - i_off - 3 j tan(alpha)) mod pitch) / pitch

and takes its sample from that view's tile of the quilt. The fractional view
number is floored (views are discrete) and the within-tile position is the
panel position scaled down to the tile and floored, so every subpixel maps to
exactly one quilt sample.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .calib import Calibration
from .quilt import Quilt, QuiltLayout
from .raster import RasterImage

# Native images are ordinary rasters at panel resolution.
NativeImage = RasterImage

_ROW_BLOCK = 64


@dataclass(frozen=True)
class SubpixelAddress:
    x: int
    y: int
    c: int

    def __post_init__(self):
        if self.c not in (0, 1, 2):
            raise ValueError(f"channel must be 0, 1 or 2, got {self.c}")
        if self.x < 0 or self.y < 0:
            raise ValueError(f"negative panel position ({self.x}, {self.y})")

    @property
    def i(self) -> int:
        return 3 * self.x + self.c


def _check_address(addr: SubpixelAddress, cal: Calibration):
    if addr.x >= cal.panel_width or addr.y >= cal.panel_height:
        raise ValueError(
            f"address ({addr.x}, {addr.y}) outside {cal.panel_width}x{cal.panel_height} panel"
        )


def check_layout(cal: Calibration, layout: QuiltLayout) -> None:
    if layout.count != cal.n_views:
        raise ValueError(
            f"quilt layout {layout.cols}x{layout.rows} holds {layout.count} views, "
            f"calibration expects {cal.n_views}"
        )


def view_number(addr: SubpixelAddress, cal: Calibration) -> float:
    """Fractional view seen by a subpixel, in ``[0, n_views)``."""
    _check_address(addr, cal)
    phase = (addr.i - cal.i_off) - (3 * addr.y) * cal.slope_tan
    n = cal.n_views * (phase % cal.pitch_x) / cal.pitch_x
    # phase % pitch can round up to pitch itself for tiny negative phases
    return min(n, math.nextafter(cal.n_views, 0.0))


def map_subpixel(addr: SubpixelAddress, cal: Calibration, layout: QuiltLayout) -> tuple[int, int]:
    """Absolute quilt pixel ``(qx, qy)`` that feeds this subpixel."""
    check_layout(cal, layout)
    view = min(max(int(math.floor(view_number(addr, cal))), 0), cal.n_views - 1)
    x0, y0 = layout.tile_origin(view)
    qx = x0 + addr.x * layout.tile_width // cal.panel_width
    qy = y0 + addr.y * layout.tile_height // cal.panel_height
    return qx, qy


def view_numbers(cal: Calibration, rows: np.ndarray) -> np.ndarray:
    """Vectorised :func:`view_number` for whole panel rows, shape ``(len(rows), W, 3)``."""
    i = np.arange(3 * cal.panel_width, dtype=np.int64)
    j = np.asarray(rows, dtype=np.int64)
    phase = (i[None, :] - cal.i_off) - (3 * j)[:, None] * cal.slope_tan
    n = cal.n_views * np.mod(phase, cal.pitch_x) / cal.pitch_x
    np.minimum(n, math.nextafter(cal.n_views, 0.0), out=n)
    return n.reshape(len(j), cal.panel_width, 3)


class _TileGeometry:
    """Per-view tile origins and per-axis panel-to-tile scaling tables."""

    def __init__(self, cal: Calibration, layout: QuiltLayout):
        check_layout(cal, layout)
        origins = np.array([layout.tile_origin(k) for k in range(layout.count)], np.int64)
        self.x0 = origins[:, 0]
        self.y0 = origins[:, 1]
        self.local_x = np.arange(cal.panel_width, dtype=np.int64) * layout.tile_width // cal.panel_width
        self.local_y = np.arange(cal.panel_height, dtype=np.int64) * layout.tile_height // cal.panel_height

    def coords(self, cal: Calibration, rows: np.ndarray):
        views = np.floor(view_numbers(cal, rows)).astype(np.int64)
        np.clip(views, 0, cal.n_views - 1, out=views)
        qx = self.x0[views] + self.local_x[None, :, None]
        qy = self.y0[views] + self.local_y[rows][:, None, None]
        return qx, qy


def map_rows(cal: Calibration, layout: QuiltLayout, rows) -> tuple[np.ndarray, np.ndarray]:
    """Quilt coordinates for every subpixel of the given panel rows, each ``(len(rows), W, 3)``."""
    rows = np.asarray(rows, dtype=np.int64)
    return _TileGeometry(cal, layout).coords(cal, rows)


def render_native_direct(quilt: Quilt, cal: Calibration) -> RasterImage:
    """Evaluate the lenticular mapping for every subpixel and sample the quilt."""
    geometry = _TileGeometry(cal, quilt.layout)
    flat = quilt.image.data.reshape(-1)
    qw = quilt.layout.width
    channel = np.arange(3, dtype=np.int64)
    out = np.empty((cal.panel_height, cal.panel_width, 3), np.uint8)
    for start in range(0, cal.panel_height, _ROW_BLOCK):
        rows = np.arange(start, min(start + _ROW_BLOCK, cal.panel_height))
        qx, qy = geometry.coords(cal, rows)
        np.take(flat, (qy * qw + qx) * 3 + channel, out=out[rows[0] : rows[-1] + 1])
    out.flags.writeable = False
    return RasterImage(out)
