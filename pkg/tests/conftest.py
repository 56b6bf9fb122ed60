import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from stereoquilt.raster import RasterImage


def smooth_texture(height, width, seed=0, sigma=1.5):
    """Band-limited random texture scaled to [0, 1]."""
    rng = np.random.default_rng(seed)
    tex = gaussian_filter(rng.random((height, width)), sigma)
    return (tex - tex.min()) / (tex.max() - tex.min())


def rgb_texture(height, width, seed=0, sigma=1.5):
    planes = [smooth_texture(height, width, seed + k, sigma) for k in range(3)]
    return np.round(np.stack(planes, axis=-1) * 255).astype(np.uint8)


def shifted_pair(size=256, shift=3, seed=0, sigma=1.5, pad=8):
    """Grey pair where ``target(x) == source(x - shift)``, so true flow is (+shift, 0)."""
    big = smooth_texture(size + 2 * pad, size + 2 * pad, seed, sigma)
    source = big[pad : pad + size, pad : pad + size]
    target = big[pad : pad + size, pad - shift : pad - shift + size]
    return source, target


def stereo_scene(width, height, d_background=2, d_foreground=6, seed=0):
    """Rectified RGB stereo pair: a textured plane with a nearer textured rectangle.

    The right view sees a point of the left view at ``x - d``, so left-to-right
    flow is ``(-d, 0)`` and purely horizontal.
    """
    pad = d_foreground + 4
    bg = rgb_texture(height, width + 2 * pad, seed, sigma=1.5)
    fg = rgb_texture(height, width + 2 * pad, seed + 10, sigma=2.5)
    x = np.arange(width)
    x0, x1 = width // 3, 2 * width // 3
    y0, y1 = height // 4, 3 * height // 4

    def view(shift_bg, shift_fg):
        out = bg[:, pad + shift_bg : pad + shift_bg + width].copy()
        inside = (x + shift_fg >= x0) & (x + shift_fg < x1)
        fgv = fg[:, pad + shift_fg : pad + shift_fg + width]
        out[y0:y1][:, inside] = fgv[y0:y1][:, inside]
        return out

    return RasterImage(view(0, 0)), RasterImage(view(d_background, d_foreground))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
