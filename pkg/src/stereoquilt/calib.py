"""Per-device lenticular calibration loaded from JSON.

Schema (all numbers; unknown keys are ignored)::

    pitch     lens pitch in subpixel columns            required, > 0
    slope     tangent of the lens slant                 required
    center    horizontal subpixel offset                required
    views     number of views                           required, integer >= 2
    screenW   panel width in pixels                     required, integer >= 1
    screenH   panel height in pixels                    required, integer >= 1
    dpi       panel dots per inch                       optional
    viewCone  view cone in degrees                      optional, default 50

Values are stored exactly as given. Converting a device's physical pitch
(lenses per inch) into subpixel columns is the producer's job.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

DEFAULT_VIEW_CONE = 50.0

_REQUIRED = ("pitch", "slope", "center", "views", "screenW", "screenH")


class CalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class Calibration:
    pitch_x: float
    slope_tan: float
    i_off: float
    n_views: int
    panel_width: int
    panel_height: int
    view_cone_deg: float = DEFAULT_VIEW_CONE
    dpi: float | None = None

    def __post_init__(self):
        if not (self.pitch_x > 0 and math.isfinite(self.pitch_x)):
            raise CalibrationError(f"pitch must be a positive finite number, got {self.pitch_x}")
        if not (math.isfinite(self.slope_tan) and math.isfinite(self.i_off)):
            raise CalibrationError("slope and center must be finite")
        # A single view is allowed in memory for degenerate test rigs; files need two.
        if self.n_views < 1:
            raise CalibrationError(f"views must be positive, got {self.n_views}")
        if self.panel_width < 1 or self.panel_height < 1:
            raise CalibrationError(
                f"panel must be at least 1x1, got {self.panel_width}x{self.panel_height}"
            )

    def to_dict(self) -> dict:
        out = {
            "pitch": self.pitch_x,
            "slope": self.slope_tan,
            "center": self.i_off,
            "views": self.n_views,
            "screenW": self.panel_width,
            "screenH": self.panel_height,
            "viewCone": self.view_cone_deg,
        }
        if self.dpi is not None:
            out["dpi"] = self.dpi
        return out


def _number(doc: dict, key: str, source) -> float:
    value = doc[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise CalibrationError(f"{source}: field {key!r} must be numeric, got {value!r}")
    return float(value)


def _integer(doc: dict, key: str, source) -> int:
    value = _number(doc, key, source)
    if not value.is_integer():
        raise CalibrationError(f"{source}: field {key!r} must be an integer, got {doc[key]!r}")
    return int(value)


def calibration_from_dict(doc: dict, source="calibration") -> Calibration:
    if not isinstance(doc, dict):
        raise CalibrationError(f"{source}: top level must be a JSON object")
    missing = [k for k in _REQUIRED if k not in doc]
    if missing:
        raise CalibrationError(f"{source}: missing required field(s): {', '.join(missing)}")
    views = _integer(doc, "views", source)
    if views < 2:
        raise CalibrationError(f"{source}: field 'views' must be at least 2, got {views}")
    return Calibration(
        pitch_x=_number(doc, "pitch", source),
        slope_tan=_number(doc, "slope", source),
        i_off=_number(doc, "center", source),
        n_views=views,
        panel_width=_integer(doc, "screenW", source),
        panel_height=_integer(doc, "screenH", source),
        view_cone_deg=_number(doc, "viewCone", source) if "viewCone" in doc else DEFAULT_VIEW_CONE,
        dpi=_number(doc, "dpi", source) if "dpi" in doc else None,
    )


def load_calibration(path) -> Calibration:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"calibration file not found: {path}")
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise CalibrationError(f"{path}: invalid JSON ({exc})") from exc
    return calibration_from_dict(doc, source=path)


def save_calibration(cal: Calibration, path) -> None:
    Path(path).write_text(json.dumps(cal.to_dict(), indent=2) + "\n")


def reference_calibration_path() -> Path:
    """Bundled 2560x1600, 32-view calibration used for defaults and tests."""
    return Path(__file__).parent / "data" / "reference_calibration.json"
