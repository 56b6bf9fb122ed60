import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stereoquilt.calib import (
    Calibration,
    CalibrationError,
    calibration_from_dict,
    load_calibration,
    reference_calibration_path,
    save_calibration,
)

FIXTURE = {
    "pitch": 20.3646,
    "slope": -0.1838,
    "center": 0.3719,
    "screenW": 2560,
    "screenH": 1600,
    "views": 32,
}


def write(tmp_path, doc, name="cal.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


def test_load_fixture(tmp_path):
    cal = load_calibration(write(tmp_path, FIXTURE))
    assert (cal.panel_width, cal.panel_height, cal.n_views) == (2560, 1600, 32)
    assert cal.pitch_x == 20.3646 and cal.slope_tan == -0.1838 and cal.i_off == 0.3719
    assert cal.view_cone_deg == 50.0
    assert cal.dpi is None


def test_bundled_reference():
    cal = load_calibration(reference_calibration_path())
    assert (cal.panel_width, cal.panel_height, cal.n_views) == (2560, 1600, 32)


def test_unknown_keys_ignored(tmp_path):
    cal = load_calibration(write(tmp_path, {**FIXTURE, "serial": "LKG-123", "invView": 1}))
    assert cal.n_views == 32


@pytest.mark.parametrize("key", ["pitch", "slope", "center", "views", "screenW", "screenH"])
def test_missing_field_is_named(tmp_path, key):
    doc = {k: v for k, v in FIXTURE.items() if k != key}
    with pytest.raises(CalibrationError, match=key):
        load_calibration(write(tmp_path, doc))


@pytest.mark.parametrize(
    "key, value", [("pitch", "20"), ("slope", None), ("views", 32.5), ("screenW", True), ("pitch", 0), ("pitch", -3.0), ("views", 1)]
)
def test_bad_values(tmp_path, key, value):
    with pytest.raises(CalibrationError, match=key):
        load_calibration(write(tmp_path, {**FIXTURE, key: value}))


def test_unparsable_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{pitch: 1")
    with pytest.raises(CalibrationError, match="invalid JSON"):
        load_calibration(path)


def test_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.json"):
        load_calibration(tmp_path / "nope.json")


def test_single_view_allowed_in_memory_only():
    Calibration(4.0, 0.0, 0.0, 1, 8, 8)
    with pytest.raises(CalibrationError):
        calibration_from_dict({**FIXTURE, "views": 1})


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1e-3, 1e4),
    finite,
    finite,
    st.integers(2, 200),
    st.integers(1, 10000),
    st.integers(1, 10000),
    st.one_of(st.none(), st.floats(1, 2000)),
    st.floats(1, 180),
)
def test_reserialisation_roundtrip(tmp_path_factory, pitch, slope, center, views, w, h, dpi, cone):
    cal = Calibration(pitch, slope, center, views, w, h, cone, dpi)
    path = tmp_path_factory.mktemp("cal") / "c.json"
    save_calibration(cal, path)
    assert load_calibration(path) == cal
