"""Classical (non-learned) detector for all four inspection findings.

Works from the left/right side views: wheel color and window count from the
left view, engraving from the right view, scratches from both.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import render
from .color import DEFAULT_COLOR_RANGES, HsvRange, classify_wheel_color
from .image import ImageFrame
from .masks import Roi, bbox_iou, connected_components, edge_mask, suppress_car_color, window_masks

# Polished-aluminium body: near-achromatic mid gray.
DEFAULT_BODY_RANGE = HsvRange(s_hi=0.15, v_lo=0.45, v_hi=0.72)

WINDOW_BAND_ROI: Roi = (render.WINDOW_BAND[0] - 4, 48, render.WINDOW_BAND[1] + 4, 196)


@dataclass(frozen=True)
class BaselineParams:
    color_ranges: dict = field(default_factory=lambda: dict(DEFAULT_COLOR_RANGES))
    body_range: HsvRange = DEFAULT_BODY_RANGE
    wheel_roi: Roi = render.WHEEL_ROI
    scratch_roi: Roi = render.SCRATCH_ROI
    window_band_roi: Roi = WINDOW_BAND_ROI
    engraving_roi: Roi = render.ENGRAVING_ROI
    dark_v_hi: float = 0.35
    edge_threshold: float = 80.0 / 255.0
    tau_scratch: float = 0.004  # scratch-roi fraction
    tau_engraving: float = 0.05  # edge density in the engraving roi
    min_area: int = 120
    iou_max: float = 0.5


@dataclass(frozen=True)
class Detection:
    wheelColor: str
    engraving: bool
    windows: int
    scratch: bool


class WindowCountOutOfRange(Exception):
    def __init__(self, count: int):
        super().__init__(f"window count {count} outside [1, 3]")
        self.count = count


def _roi_fraction(img: ImageFrame, roi: Roi, params: BaselineParams) -> float:
    mask = suppress_car_color(img, params.body_range, roi)
    y0, x0, y1, x1 = roi
    area = (y1 - y0) * (x1 - x0)
    return mask.count() / area if area else 0.0


def detect_scratch(left: ImageFrame, right: ImageFrame, params: BaselineParams) -> bool:
    return (
        _roi_fraction(left, params.scratch_roi, params) > params.tau_scratch
        or _roi_fraction(right, params.scratch_roi, params) > params.tau_scratch
    )


def detect_engraving(right: ImageFrame, params: BaselineParams) -> bool:
    edges = edge_mask(right, params.edge_threshold)
    y0, x0, y1, x1 = params.engraving_roi
    region = edges.bits[y0:y1, x0:x1]
    density = float(region.mean()) if region.size else 0.0
    return density > params.tau_engraving


def count_windows(left: ImageFrame, params: BaselineParams) -> int:
    mask1, mask2 = window_masks(
        left,
        params.body_range,
        dark_v_hi=params.dark_v_hi,
        dark_rois=[params.window_band_roi, params.scratch_roi],
        scratch_roi=params.scratch_roi,
    )
    candidates = connected_components(mask1, min_area=params.min_area)
    defects = connected_components(mask2, min_area=1)
    count = 0
    for comp in candidates:
        if any(bbox_iou(comp.bbox, d.bbox) > params.iou_max for d in defects):
            continue  # a scratch, not a window
        count += 1
    return count


def baseline_detect(left: ImageFrame, right: ImageFrame, params: BaselineParams | None = None) -> Detection:
    """Full classical detection pass. Raises WindowCountOutOfRange when the
    window count leaves [1, 3]; other findings are total."""
    params = params or BaselineParams()
    color = classify_wheel_color(left, params.wheel_roi, params.color_ranges)
    windows = count_windows(left, params)
    detection = Detection(
        wheelColor=color,
        engraving=detect_engraving(right, params),
        windows=windows,
        scratch=detect_scratch(left, right, params),
    )
    if not 1 <= windows <= 3:
        raise WindowCountOutOfRange(windows)
    return detection
