"""Stereo pair to multiview lenticular image conversion.

Pipeline: split and resize the stereo capture, estimate optical flow,
morph intermediate views, tile them into a quilt, and map the quilt onto
the panel subpixels either directly or through a precomputed lookup table.
"""

from .calib import Calibration, load_calibration
from .flow import FlowField, FlowParams, estimate_flow, read_flo, write_flo
from .lightfield import SubpixelAddress, map_subpixel, render_native_direct, view_number
from .lut import (
    LookupTable,
    apply_lut,
    apply_lut_parallel,
    benchmark,
    build_lut,
    load_lut,
    save_lut,
)
from .morph import ViewSequence, generate_views, morph_frame, warp_image
from .quilt import Quilt, QuiltLayout, assemble_quilt, extract_views
from .raster import (
    RasterImage,
    StereoFrame,
    load_png,
    prepare_view,
    save_png,
    split_stereo,
    to_grayscale,
)

__version__ = "0.1.0"
