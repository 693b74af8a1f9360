"""Task-specific preprocessing: images to model input tensors.

Numpy-only reimplementation of the platform's mask definitions so the service
has no import dependency on the platform's vision code; the formulas (hexcone
HSV, Sobel magnitude normalized by its peak, body-color suppression, dark
thresholding) are kept numerically identical.
"""

from __future__ import annotations

import numpy as np

TASKS = ("scratch", "engraving", "windows")

CANVAS = 256
INPUT_SIZE = 64  # model input side; CANVAS / INPUT_SIZE must be an integer

# Scene geometry shared with the platform's synthetic renderer.
SCRATCH_ROI = (144, 36, 180, 188)
ENGRAVING_ROI = (148, 196, 180, 220)
WHEEL_ROI = (186, 58, 222, 94)
WINDOW_BAND_ROI = (100, 48, 140, 196)

BODY_S_HI = 0.15
BODY_V_LO = 0.45
BODY_V_HI = 0.72
DARK_V_HI = 0.35
EDGE_THRESHOLD = 80.0 / 255.0

# Wheel color ranges: (h_lo, h_hi, s_lo, v_lo); hue wraps for red.
COLOR_RANGES = {
    "red": (345.0, 15.0, 0.4, 0.25),
    "green": (90.0, 150.0, 0.4, 0.25),
    "yellow": (45.0, 75.0, 0.4, 0.25),
    "black": None,  # value-only: v <= 0.2
}
COLOR_ORDER = ("red", "green", "yellow", "black")


class MalformedImage(Exception):
    pass


def parse_ppm(data: bytes) -> np.ndarray:
    """Binary P6 bytes to an HxWx3 uint8 array."""
    try:
        if not data.startswith(b"P6"):
            raise ValueError("not a P6 header")
        parts = data.split(b"\n", 3)
        width, height = (int(tok) for tok in parts[1].split())
        maxval = int(parts[2])
        if maxval != 255:
            raise ValueError(f"unsupported maxval {maxval}")
        pixels = np.frombuffer(parts[3], dtype=np.uint8, count=width * height * 3)
        return pixels.reshape(height, width, 3).copy()
    except (IndexError, ValueError) as exc:
        raise MalformedImage(str(exc)) from exc


def hsv_planes(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Hexcone HSV: h in degrees [0, 360), s and v in [0, 1]."""
    rgb = pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.divide(c, v, out=np.zeros_like(v), where=v > 0)
    h = np.zeros_like(v)
    nonzero = c > 0
    rmax = nonzero & (v == r)
    gmax = nonzero & ~rmax & (v == g)
    bmax = nonzero & ~rmax & ~gmax
    with np.errstate(invalid="ignore", divide="ignore"):
        h[rmax] = (60.0 * (g[rmax] - b[rmax]) / c[rmax]) % 360.0
        h[gmax] = 60.0 * (b[gmax] - r[gmax]) / c[gmax] + 120.0
        h[bmax] = 60.0 * (r[bmax] - g[bmax]) / c[bmax] + 240.0
    return h, s, v


def _roi_only(bits: np.ndarray, roi) -> np.ndarray:
    out = np.zeros_like(bits)
    y0, x0, y1, x1 = roi
    out[y0:y1, x0:x1] = bits[y0:y1, x0:x1]
    return out


def suppression_mask(pixels: np.ndarray, roi=SCRATCH_ROI) -> np.ndarray:
    """Defect candidates: pixels inside roi that are NOT the car body color."""
    _, s, v = hsv_planes(pixels)
    body = (s <= BODY_S_HI) & (v >= BODY_V_LO) & (v <= BODY_V_HI)
    return _roi_only(~body, roi)


def dark_bits(pixels: np.ndarray, roi) -> np.ndarray:
    _, _, v = hsv_planes(pixels)
    return _roi_only(v <= DARK_V_HI, roi)


def edge_bits(pixels: np.ndarray, threshold: float = EDGE_THRESHOLD) -> np.ndarray:
    """Sobel gradient magnitude on luma, normalized by its peak."""
    gray = pixels.astype(np.float64) @ np.array([0.299, 0.587, 0.114])
    padded = np.pad(gray, 1, mode="edge")
    gx = (
        padded[:-2, 2:] + 2 * padded[1:-1, 2:] + padded[2:, 2:]
        - padded[:-2, :-2] - 2 * padded[1:-1, :-2] - padded[2:, :-2]
    )
    gy = (
        padded[2:, :-2] + 2 * padded[2:, 1:-1] + padded[2:, 2:]
        - padded[:-2, :-2] - 2 * padded[:-2, 1:-1] - padded[:-2, 2:]
    )
    magnitude = np.hypot(gx, gy)
    peak = magnitude.max()
    if peak <= 0:
        return np.zeros(gray.shape, dtype=bool)
    return magnitude / peak >= threshold


def window_mask_pair(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """mask1 highlights windows and scratches, mask2 only the scratches."""
    mask1 = dark_bits(pixels, WINDOW_BAND_ROI) | dark_bits(pixels, SCRATCH_ROI)
    mask2 = suppression_mask(pixels, SCRATCH_ROI)
    return mask1, mask2


def classify_wheel_color(pixels: np.ndarray, roi=WHEEL_ROI) -> str:
    """Non-learned wheel color classification on the wheel region."""
    y0, x0, y1, x1 = roi
    h, s, v = hsv_planes(pixels[y0:y1, x0:x1])
    best, best_fraction = None, 0.0
    for name in COLOR_ORDER:
        rng = COLOR_RANGES[name]
        if rng is None:
            inside = v <= 0.2
        else:
            h_lo, h_hi, s_lo, v_lo = rng
            if h_lo <= h_hi:
                hue_ok = (h >= h_lo) & (h <= h_hi)
            else:
                hue_ok = (h >= h_lo) | (h <= h_hi)
            inside = hue_ok & (s >= s_lo) & (v >= v_lo)
        fraction = float(inside.mean())
        if fraction > best_fraction:
            best, best_fraction = name, fraction
    if best is None or best_fraction < 0.10:
        raise MalformedImage("wheel color unrecognized")
    return best


def _downsample(bits: np.ndarray) -> np.ndarray:
    """Block-max a CANVAS-sized boolean mask to INPUT_SIZE x INPUT_SIZE.

    Max pooling keeps one-pixel-thin defects visible; mean pooling would
    dilute them to near zero.
    """
    if bits.shape != (CANVAS, CANVAS):
        raise MalformedImage(f"expected {CANVAS}x{CANVAS} frame, got {bits.shape}")
    factor = CANVAS // INPUT_SIZE
    return (
        bits.astype(np.float32)
        .reshape(INPUT_SIZE, factor, INPUT_SIZE, factor)
        .max(axis=(1, 3))
    )


def preprocess(task: str, pixels: np.ndarray) -> np.ndarray:
    """Image to the model input tensor (channels, INPUT_SIZE, INPUT_SIZE)."""
    if task == "scratch":
        return _downsample(suppression_mask(pixels))[None, :, :]
    if task == "engraving":
        return _downsample(_roi_only(edge_bits(pixels), ENGRAVING_ROI))[None, :, :]
    if task == "windows":
        mask1, mask2 = window_mask_pair(pixels)
        return np.stack([_downsample(mask1), _downsample(mask2)])
    raise ValueError(f"unknown task {task!r}")
