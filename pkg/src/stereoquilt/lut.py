"""Precomputed subpixel-to-quilt lookup table: build, persist, apply, benchmark.

Binary layout (little-endian)::

    8 bytes   magic b"SQLUT\\0\\0\\1"
    4 x u32   panel_width, panel_height, quilt_width, quilt_height
    3 planes  R, G, B; each panel_height rows of panel_width (qx: u16, qy: u16)

so a file is exactly ``24 + 3 * W * H * 4`` bytes.
"""

from __future__ import annotations

import statistics
import struct
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calib import Calibration
from .lightfield import map_rows, render_native_direct
from .quilt import Quilt, QuiltLayout
from .raster import RasterImage

LUT_MAGIC = b"SQLUT\x00\x00\x01"
_HEADER = struct.Struct("<8s4I")
_COORD_LIMIT = 1 << 16


class LutFormatError(ValueError):
    pass


class LookupTable:
    """Per-channel quilt coordinates for every panel pixel.

    ``coords`` has shape ``(3, panel_height, panel_width, 2)``, dtype uint16,
    holding ``(qx, qy)``. The flat gather index used by :func:`apply_lut` is
    derived once on first use and kept alongside.
    """

    __slots__ = ("coords", "quilt_width", "quilt_height", "_index")

    def __init__(self, coords: np.ndarray, quilt_width: int, quilt_height: int):
        coords = np.asarray(coords)
        if coords.ndim != 4 or coords.shape[0] != 3 or coords.shape[3] != 2:
            raise ValueError(f"coords must have shape (3, H, W, 2), got {coords.shape}")
        if coords.dtype != np.uint16:
            raise ValueError(f"coords must be uint16, got {coords.dtype}")
        if not (0 < quilt_width < _COORD_LIMIT and 0 < quilt_height < _COORD_LIMIT):
            raise ValueError(f"quilt {quilt_width}x{quilt_height} exceeds 16-bit coordinates")
        if coords.size and (
            coords[..., 0].max() >= quilt_width or coords[..., 1].max() >= quilt_height
        ):
            raise ValueError(
                f"lookup coordinates fall outside the {quilt_width}x{quilt_height} quilt"
            )
        coords.flags.writeable = False
        self.coords = coords
        self.quilt_width = int(quilt_width)
        self.quilt_height = int(quilt_height)
        self._index = None

    @property
    def panel_width(self) -> int:
        return self.coords.shape[2]

    @property
    def panel_height(self) -> int:
        return self.coords.shape[1]

    @property
    def nbytes(self) -> int:
        return self.coords.nbytes

    def gather_index(self) -> np.ndarray:
        """Flat offsets into an ``(qh, qw, 3)`` quilt buffer, shape ``(H, W, 3)``."""
        if self._index is None:
            qx = self.coords[..., 0].astype(np.intp)
            qy = self.coords[..., 1].astype(np.intp)
            idx = (qy * self.quilt_width + qx) * 3
            idx += np.arange(3, dtype=np.intp)[:, None, None]
            self._index = np.ascontiguousarray(idx.transpose(1, 2, 0))
        return self._index

    def __eq__(self, other):
        if not isinstance(other, LookupTable):
            return NotImplemented
        return (
            self.quilt_width == other.quilt_width
            and self.quilt_height == other.quilt_height
            and np.array_equal(self.coords, other.coords)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"LookupTable(panel {self.panel_width}x{self.panel_height}, "
            f"quilt {self.quilt_width}x{self.quilt_height})"
        )


def build_lut(cal: Calibration, layout: QuiltLayout) -> LookupTable:
    """Evaluate the subpixel mapping once for the whole panel."""
    if layout.width >= _COORD_LIMIT or layout.height >= _COORD_LIMIT:
        raise ValueError(
            f"quilt {layout.width}x{layout.height} too large for 16-bit lookup coordinates"
        )
    coords = np.empty((3, cal.panel_height, cal.panel_width, 2), np.uint16)
    step = 64
    for start in range(0, cal.panel_height, step):
        rows = np.arange(start, min(start + step, cal.panel_height))
        qx, qy = map_rows(cal, layout, rows)
        block = slice(rows[0], rows[-1] + 1)
        coords[:, block, :, 0] = qx.transpose(2, 0, 1)
        coords[:, block, :, 1] = qy.transpose(2, 0, 1)
    return LookupTable(coords, layout.width, layout.height)


def save_lut(lut: LookupTable, path) -> None:
    header = _HEADER.pack(
        LUT_MAGIC, lut.panel_width, lut.panel_height, lut.quilt_width, lut.quilt_height
    )
    with open(Path(path), "wb") as fh:
        fh.write(header)
        fh.write(lut.coords.astype("<u2", copy=False).tobytes())


def lut_file_size(panel_width: int, panel_height: int) -> int:
    return _HEADER.size + 3 * panel_width * panel_height * 4


def load_lut(path) -> LookupTable:
    path = Path(path)
    raw = path.read_bytes()
    if len(raw) < _HEADER.size:
        raise LutFormatError(f"{path}: truncated header ({len(raw)} bytes)")
    magic, pw, ph, qw, qh = _HEADER.unpack_from(raw)
    if magic != LUT_MAGIC:
        raise LutFormatError(f"{path}: bad magic {magic!r}")
    if pw < 1 or ph < 1 or qw < 1 or qh < 1:
        raise LutFormatError(f"{path}: zero dimension in header")
    expected = lut_file_size(pw, ph)
    if len(raw) != expected:
        raise LutFormatError(f"{path}: size {len(raw)} bytes, expected {expected}")
    coords = np.frombuffer(raw, "<u2", offset=_HEADER.size).reshape(3, ph, pw, 2)
    try:
        return LookupTable(coords.astype(np.uint16), qw, qh)
    except ValueError as exc:
        raise LutFormatError(f"{path}: {exc}") from exc


def _quilt_samples(lut: LookupTable, quilt) -> np.ndarray:
    image = quilt.image if isinstance(quilt, Quilt) else quilt
    if image.size != (lut.quilt_width, lut.quilt_height):
        raise ValueError(
            f"quilt is {image.width}x{image.height}, lookup table was built "
            f"for {lut.quilt_width}x{lut.quilt_height}"
        )
    return image.data.reshape(-1)


def apply_lut(lut: LookupTable, quilt: Quilt | RasterImage) -> RasterImage:
    """Native image by a single gather per subpixel.

    Only the quilt's pixel dimensions matter, so a bare raster is accepted too.
    """
    flat = _quilt_samples(lut, quilt)
    out = np.empty((lut.panel_height, lut.panel_width, 3), np.uint8)
    np.take(flat, lut.gather_index(), out=out)
    out.flags.writeable = False
    return RasterImage(out)


def band_bounds(height: int, bands: int) -> list[tuple[int, int]]:
    """Split ``height`` rows into ``bands`` contiguous, near-equal, disjoint ranges."""
    edges = np.linspace(0, height, bands + 1).round().astype(int)
    return [(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:]) if b > a]


def apply_lut_parallel(lut: LookupTable, quilt: Quilt | RasterImage, bands: int = 4) -> RasterImage:
    """As :func:`apply_lut`, with horizontal row bands gathered on separate threads.

    Bands write disjoint slices of one output buffer, so the result does not
    depend on scheduling.
    """
    if bands < 1:
        raise ValueError(f"bands must be at least 1, got {bands}")
    flat = _quilt_samples(lut, quilt)
    index = lut.gather_index()
    out = np.empty((lut.panel_height, lut.panel_width, 3), np.uint8)

    def gather(span):
        a, b = span
        np.take(flat, index[a:b], out=out[a:b])

    spans = band_bounds(lut.panel_height, bands)
    if len(spans) == 1:
        gather(spans[0])
    else:
        with ThreadPoolExecutor(len(spans)) as pool:
            list(pool.map(gather, spans))
    out.flags.writeable = False
    return RasterImage(out)


@dataclass
class BenchmarkReport:
    build_seconds: float
    direct_seconds: float
    lut_seconds: float
    parallel_seconds: dict[int, float] = field(default_factory=dict)
    repetitions: int = 0

    @property
    def speedup(self) -> float:
        return self.direct_seconds / self.lut_seconds

    def lines(self) -> list[str]:
        out = [
            f"repetitions        {self.repetitions}",
            f"lut build (once)   {self.build_seconds:.4f} s",
            f"direct median      {self.direct_seconds:.4f} s",
            f"lut median         {self.lut_seconds:.4f} s",
            f"speedup            {self.speedup:.2f}x",
        ]
        for bands, secs in sorted(self.parallel_seconds.items()):
            out.append(f"lut {bands} band(s)     {secs:.4f} s")
        return out


def _median_time(fn, repetitions: int) -> float:
    fn()  # warm-up, discarded
    times = []
    for _ in range(repetitions):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def benchmark(
    cal: Calibration,
    layout: QuiltLayout,
    quilt: Quilt,
    repetitions: int = 10,
    band_counts=(1, 2, 4),
) -> BenchmarkReport:
    """Median per-frame times of the direct and lookup paths.

    Table construction is timed once and reported separately, since it is
    paid only when the calibration changes.
    """
    if repetitions < 3:
        raise ValueError(f"need at least 3 repetitions, got {repetitions}")
    if quilt.layout != layout:
        raise ValueError("quilt layout does not match the benchmark layout")
    t0 = time.perf_counter()
    lut = build_lut(cal, layout)
    lut.gather_index()
    build = time.perf_counter() - t0

    direct = _median_time(lambda: render_native_direct(quilt, cal), repetitions)
    fast = _median_time(lambda: apply_lut(lut, quilt), repetitions)
    parallel = {
        b: _median_time(lambda b=b: apply_lut_parallel(lut, quilt, b), repetitions)
        for b in band_counts
    }
    return BenchmarkReport(build, direct, fast, parallel, repetitions)
