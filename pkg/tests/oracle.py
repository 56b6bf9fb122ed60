"""Scalar re-derivation of the subpixel mapping, kept separate from the library code."""

import math


def oracle_view_index(i, j, pitch, slope, offset, n_views):
    phase = (i - offset) - (3 * j) * slope
    r = math.fmod(phase, pitch)
    if r < 0:
        r += pitch
    if r >= pitch:
        return n_views - 1
    return min(int(math.floor(n_views * r / pitch)), n_views - 1)


def oracle_quilt_coord(x, y, c, cal, cols, rows, tile_w, tile_h):
    v = oracle_view_index(3 * x + c, y, cal.pitch_x, cal.slope_tan, cal.i_off, cal.n_views)
    col = v % cols
    row_from_top = rows - 1 - v // cols
    qx = col * tile_w + (x * tile_w) // cal.panel_width
    qy = row_from_top * tile_h + (y * tile_h) // cal.panel_height
    return qx, qy


def oracle_render(quilt_pixels, cal, cols, rows, tile_w, tile_h):
    """Nested-loop native image from a (qh, qw, 3) nested list/array."""
    out = [[[0, 0, 0] for _ in range(cal.panel_width)] for _ in range(cal.panel_height)]
    for y in range(cal.panel_height):
        for x in range(cal.panel_width):
            for c in range(3):
                qx, qy = oracle_quilt_coord(x, y, c, cal, cols, rows, tile_w, tile_h)
                out[y][x][c] = int(quilt_pixels[qy][qx][c])
    return out
