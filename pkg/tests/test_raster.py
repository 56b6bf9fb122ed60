import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from PIL import Image

from stereoquilt.raster import (
    RasterImage,
    StereoFrame,
    join_stereo,
    load_png,
    prepare_view,
    save_png,
    split_stereo,
    to_grayscale,
)

from conftest import rgb_texture

rasters = st.tuples(st.integers(1, 12), st.integers(1, 12)).flatmap(
    lambda hw: arrays(np.uint8, (hw[0], hw[1], 3))
)


def test_raster_invariants():
    img = RasterImage(np.zeros((3, 5, 3), np.uint8))
    assert (img.width, img.height, img.channels) == (5, 3, 3)
    assert img.data.size == 5 * 3 * 3
    with pytest.raises(ValueError):
        RasterImage(np.zeros((0, 4, 3), np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.zeros((4, 4), np.uint8))
    with pytest.raises(ValueError):
        RasterImage(np.full((1, 1, 3), 300))


def test_raster_is_immutable():
    src = np.zeros((2, 2, 3), np.uint8)
    img = RasterImage(src)
    src[0, 0, 0] = 9
    assert img.data[0, 0, 0] == 0
    with pytest.raises(ValueError):
        img.data[0, 0, 0] = 1


def test_stereo_frame_requires_equal_halves():
    with pytest.raises(ValueError):
        StereoFrame(RasterImage.solid(2, 2, 0), RasterImage.solid(3, 2, 0))


def test_load_solid_red(tmp_path):
    path = tmp_path / "red.png"
    Image.new("RGB", (2, 2), (255, 0, 0)).save(path)
    img = load_png(path)
    assert img == RasterImage.solid(2, 2, (255, 0, 0))


def test_save_black_pixel(tmp_path):
    path = tmp_path / "black.png"
    save_png(RasterImage.solid(1, 1, (0, 0, 0)), path)
    with Image.open(path) as im:
        assert im.size == (1, 1) and im.mode == "RGB"
        assert im.getpixel((0, 0)) == (0, 0, 0)


@settings(max_examples=40, deadline=None)
@given(rasters)
def test_png_roundtrip_exact(tmp_path_factory, data):
    path = tmp_path_factory.mktemp("png") / "x.png"
    img = RasterImage(data)
    save_png(img, path)
    assert load_png(path) == img


@pytest.mark.parametrize("mode", ["L", "P", "RGBA", "LA"])
def test_load_expands_other_modes(tmp_path, mode):
    path = tmp_path / f"{mode}.png"
    Image.new("RGB", (3, 2), (10, 20, 30)).convert(mode).save(path)
    img = load_png(path)
    assert img.size == (3, 2)
    assert img.data.dtype == np.uint8


def test_load_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_png(tmp_path / "missing.png")
    bad = tmp_path / "bad.png"
    bad.write_bytes(b"not a png at all, definitely not")
    with pytest.raises(ValueError, match="malformed"):
        load_png(bad)


def test_load_rejects_16_bit(tmp_path):
    cv2 = pytest.importorskip("cv2")
    path = tmp_path / "deep.png"
    cv2.imwrite(str(path), np.full((2, 2, 3), 40000, np.uint16))
    with pytest.raises(ValueError, match="bit depth"):
        load_png(path)


def test_full_quilt_png_decodes_with_independent_reader(tmp_path):
    cv2 = pytest.importorskip("cv2")
    img = RasterImage(rgb_texture(2048, 2048, seed=3))
    path = tmp_path / "quilt.png"
    save_png(img, path)
    bgr = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    assert bgr.shape == (2048, 2048, 3)
    assert np.array_equal(bgr[..., ::-1], img.data)


def test_load_capture_sized_fixture(tmp_path):
    path = tmp_path / "capture.png"
    save_png(RasterImage(rgb_texture(960, 1280)), path)
    img = load_png(path)
    assert (img.width, img.height) == (1280, 960)


def test_split_capture_into_halves():
    pair = split_stereo(RasterImage(rgb_texture(960, 1280)))
    assert pair.left.size == (640, 960)
    assert pair.right.size == (640, 960)


def test_split_two_pixels():
    a, b = (1, 2, 3), (4, 5, 6)
    pair = split_stereo(RasterImage(np.array([[a, b]], np.uint8)))
    assert pair.left == RasterImage(np.array([[a]], np.uint8))
    assert pair.right == RasterImage(np.array([[b]], np.uint8))


def test_split_odd_width():
    with pytest.raises(ValueError, match="odd"):
        split_stereo(RasterImage.solid(3, 2, 0))


@settings(max_examples=40, deadline=None)
@given(rasters)
def test_split_then_join_is_identity(data):
    if data.shape[1] % 2:
        data = data[:, :-1] if data.shape[1] > 1 else np.concatenate([data, data], axis=1)
    img = RasterImage(data)
    assert join_stereo(split_stereo(img)) == img


def test_prepare_half_to_view_size():
    half = RasterImage(rgb_texture(960, 640))
    view = prepare_view(half, 512, 256, 0)
    assert view.size == (512, 256)


def test_prepare_identity():
    img = RasterImage(rgb_texture(256, 512))
    assert prepare_view(img, 512, 256, 0) == img


def test_prepare_solid_stays_solid():
    img = RasterImage.solid(640, 960, (12, 200, 77))
    assert prepare_view(img, 512, 256, 100) == RasterImage.solid(512, 256, (12, 200, 77))


def test_prepare_crop_offsets_match_scaled_rows():
    half = RasterImage(rgb_texture(960, 640))
    full = prepare_view(half, 512, 768, 0)
    cropped = prepare_view(half, 512, 256, 300)
    assert np.array_equal(cropped.data, full.data[300:556])


def test_prepare_crop_out_of_bounds():
    with pytest.raises(ValueError, match="exceeds"):
        prepare_view(RasterImage.solid(640, 960, 0), 512, 256, 600)


@settings(max_examples=30, deadline=None)
@given(rasters)
def test_prepare_idempotent_at_target_size(data):
    img = RasterImage(data)
    once = prepare_view(img, img.width, img.height, 0)
    assert once == img
    assert prepare_view(once, img.width, img.height, 0) == once


@pytest.mark.parametrize(
    "color, expected",
    [((255, 255, 255), 1.0), ((0, 0, 0), 0.0), ((255, 0, 0), 0.299)],
)
def test_grayscale(color, expected):
    g = to_grayscale(RasterImage.solid(1, 1, color))
    assert g.shape == (1, 1)
    assert abs(g[0, 0] - expected) <= 1e-6
