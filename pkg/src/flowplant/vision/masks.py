"""Preprocessing masks for the inspection tasks and connected-component analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .color import HsvRange, _hsv_planes
from .image import ImageFrame, Mask

Roi = tuple[int, int, int, int]  # (y0, x0, y1, x1), exclusive ends


def _roi_window(bits_shape: tuple[int, int], roi: Roi | None) -> Roi:
    if roi is None:
        return (0, 0, bits_shape[0], bits_shape[1])
    return roi


def suppress_car_color(img: ImageFrame, body_range: HsvRange, roi: Roi | None = None) -> Mask:
    """Scratch-candidate mask: pixels inside roi whose color is NOT the car body's.

    The car body color is suppressed; whatever survives (dark marks, foreign
    color) is a candidate defect.
    """
    h, s, v = _hsv_planes(img.pixels)
    outside = ~body_range.contains_planes(h, s, v)
    bits = np.zeros(outside.shape, dtype=bool)
    y0, x0, y1, x1 = _roi_window(outside.shape, roi)
    bits[y0:y1, x0:x1] = outside[y0:y1, x0:x1]
    return Mask(bits)


_LUMA = np.array([0.299, 0.587, 0.114])

_SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64)
_SOBEL_Y = _SOBEL_X.T


def edge_mask(img: ImageFrame, threshold: float = 80.0 / 255.0) -> Mask:
    """Sobel gradient magnitude on the luma plane, thresholded.

    The magnitude is normalized by its maximum; a uniform image (zero max)
    yields an empty mask.
    """
    gray = img.pixels.astype(np.float64) @ _LUMA
    gx = ndimage.convolve(gray, _SOBEL_X, mode="nearest")
    gy = ndimage.convolve(gray, _SOBEL_Y, mode="nearest")
    magnitude = np.hypot(gx, gy)
    peak = magnitude.max()
    if peak <= 0:
        return Mask(np.zeros(gray.shape, dtype=bool))
    return Mask(magnitude / peak >= threshold)


def dark_mask(img: ImageFrame, v_hi: float, roi: Roi | None = None) -> Mask:
    """Pixels darker than v_hi within roi (windows and scratches are both dark)."""
    _, _, v = _hsv_planes(img.pixels)
    dark = v <= v_hi
    bits = np.zeros(dark.shape, dtype=bool)
    y0, x0, y1, x1 = _roi_window(dark.shape, roi)
    bits[y0:y1, x0:x1] = dark[y0:y1, x0:x1]
    return Mask(bits)


def window_masks(
    img: ImageFrame,
    body_range: HsvRange,
    dark_v_hi: float = 0.35,
    dark_rois: list[Roi] | None = None,
    scratch_roi: Roi | None = None,
) -> tuple[Mask, Mask]:
    """The window-count task's two masks.

    mask1 highlights windows and scratches (dark pixels inside the body area);
    mask2 highlights only the scratches (body color suppressed in the scratch
    area). Window components are those in mask1 with no counterpart in mask2.
    """
    if not dark_rois:
        mask1 = dark_mask(img, dark_v_hi, None)
    else:
        bits = np.zeros((img.height, img.width), dtype=bool)
        for roi in dark_rois:
            bits |= dark_mask(img, dark_v_hi, roi).bits
        mask1 = Mask(bits)
    mask2 = suppress_car_color(img, body_range, scratch_roi)
    return mask1, mask2


@dataclass(frozen=True)
class Component:
    area: int
    bbox: Roi  # (y0, x0, y1, x1), exclusive ends
    centroid: tuple[float, float]  # (y, x)


_FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


def connected_components(mask: Mask, min_area: int = 1) -> list[Component]:
    """4-connected components with area >= min_area, ordered by (bbox.y, bbox.x)."""
    labels, n = ndimage.label(mask.bits, structure=_FOUR_CONNECTED)
    if n == 0:
        return []
    components = []
    slices = ndimage.find_objects(labels)
    for index, slc in enumerate(slices, start=1):
        region = labels[slc] == index
        area = int(region.sum())
        if area < min_area:
            continue
        ys, xs = np.nonzero(region)
        y_off, x_off = slc[0].start, slc[1].start
        components.append(
            Component(
                area=area,
                bbox=(y_off, x_off, slc[0].stop, slc[1].stop),
                centroid=(float(ys.mean() + y_off), float(xs.mean() + x_off)),
            )
        )
    components.sort(key=lambda c: (c.bbox[0], c.bbox[1]))
    return components


def bbox_iou(a: Roi, b: Roi) -> float:
    ay0, ax0, ay1, ax1 = a
    by0, bx0, by1, bx1 = b
    iy0, ix0 = max(ay0, by0), max(ax0, bx0)
    iy1, ix1 = min(ay1, by1), min(ax1, bx1)
    inter = max(0, iy1 - iy0) * max(0, ix1 - ix0)
    if inter == 0:
        return 0.0
    union = (ay1 - ay0) * (ax1 - ax0) + (by1 - by0) * (bx1 - bx0) - inter
    return inter / union
