"""Packing views into a quilt and back.

View 0 sits in the bottom-left tile, views advance left to right along a
tile row, and tile rows advance upwards, so the last view lands top-right.
The quilt raster itself is stored top row first like every other raster.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .morph import ViewSequence
from .raster import RasterImage


@dataclass(frozen=True)
class QuiltLayout:
    cols: int
    rows: int
    tile_width: int
    tile_height: int

    def __post_init__(self):
        for name in ("cols", "rows", "tile_width", "tile_height"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def count(self) -> int:
        return self.cols * self.rows

    @property
    def width(self) -> int:
        return self.cols * self.tile_width

    @property
    def height(self) -> int:
        return self.rows * self.tile_height

    def tile_origin(self, view: int) -> tuple[int, int]:
        """Top-left pixel ``(x, y)`` of the tile holding ``view``."""
        if not 0 <= view < self.count:
            raise IndexError(f"view {view} outside 0..{self.count - 1}")
        col, row_from_bottom = view % self.cols, view // self.cols
        return self.tile_width * col, self.height - self.tile_height * (1 + row_from_bottom)


@dataclass(frozen=True)
class Quilt:
    image: RasterImage
    layout: QuiltLayout

    def __post_init__(self):
        if self.image.size != (self.layout.width, self.layout.height):
            raise ValueError(
                f"quilt image is {self.image.width}x{self.image.height}, layout needs "
                f"{self.layout.width}x{self.layout.height}"
            )

    @classmethod
    def from_image(cls, image: RasterImage, cols: int, rows: int) -> "Quilt":
        """Wrap an existing quilt raster, inferring tile size from the grid."""
        if image.width % cols or image.height % rows:
            raise ValueError(
                f"{image.width}x{image.height} quilt does not divide into {cols}x{rows} tiles"
            )
        return cls(image, QuiltLayout(cols, rows, image.width // cols, image.height // rows))


def assemble_quilt(views: ViewSequence, layout: QuiltLayout) -> Quilt:
    if views.count != layout.count:
        raise ValueError(
            f"{views.count} views do not fill a {layout.cols}x{layout.rows} quilt "
            f"({layout.count} tiles)"
        )
    if views.size != (layout.tile_width, layout.tile_height):
        raise ValueError(
            f"views are {views.size[0]}x{views.size[1]}, tiles are "
            f"{layout.tile_width}x{layout.tile_height}"
        )
    canvas = np.empty((layout.height, layout.width, 3), np.uint8)
    for k, view in enumerate(views):
        x, y = layout.tile_origin(k)
        canvas[y : y + layout.tile_height, x : x + layout.tile_width] = view.data
    return Quilt(RasterImage(canvas), layout)


def extract_views(quilt: Quilt) -> ViewSequence:
    layout = quilt.layout
    data = quilt.image.data
    views = []
    for k in range(layout.count):
        x, y = layout.tile_origin(k)
        views.append(RasterImage(data[y : y + layout.tile_height, x : x + layout.tile_width]))
    return ViewSequence(tuple(views))
