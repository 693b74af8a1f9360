"""HSV conversion and range thresholding.

Hue is in degrees [0, 360), saturation and value in [0, 1]. Achromatic pixels
(s == 0) report h == 0 so conversions stay deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .image import ImageFrame, Mask


def rgb_to_hsv(r: int, g: int, b: int) -> tuple[float, float, float]:
    """Hexcone conversion of one 8-bit pixel to (h, s, v)."""
    h, s, v = _hsv_planes(np.array([[[r, g, b]]], dtype=np.uint8))
    return float(h[0, 0]), float(s[0, 0]), float(v[0, 0])


def hsv_to_rgb(h: float, s: float, v: float) -> tuple[int, int, int]:
    hp = (h % 360.0) / 60.0
    c = v * s
    x = c * (1.0 - abs(hp % 2.0 - 1.0))
    m = v - c
    sector = int(hp) % 6
    rgb1 = [(c, x, 0), (x, c, 0), (0, c, x), (0, x, c), (x, 0, c), (c, 0, x)][sector]
    return tuple(int(round((ch + m) * 255.0)) for ch in rgb1)


def _hsv_planes(pixels: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized RGB8 -> HSV planes for a (h, w, 3) uint8 array."""
    rgb = pixels.astype(np.float64) / 255.0
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    mx = rgb.max(axis=-1)
    mn = rgb.min(axis=-1)
    delta = mx - mn
    chroma = delta > 0

    h = np.zeros_like(mx)
    with np.errstate(divide="ignore", invalid="ignore"):
        hr = np.mod((g - b) / delta, 6.0)
        hg = (b - r) / delta + 2.0
        hb = (r - g) / delta + 4.0
    h = np.where(chroma & (mx == r), hr, h)
    h = np.where(chroma & (mx == g) & (mx != r), hg, h)
    h = np.where(chroma & (mx == b) & (mx != r) & (mx != g), hb, h)
    h = np.where(chroma, h * 60.0 % 360.0, 0.0)

    s = np.where(mx > 0, delta / np.where(mx > 0, mx, 1.0), 0.0)
    return h, s, mx


@dataclass(frozen=True)
class HsvRange:
    """Inclusive HSV box; hue may wrap around 360 (h_lo > h_hi)."""

    h_lo: float = 0.0
    h_hi: float = 360.0
    s_lo: float = 0.0
    s_hi: float = 1.0
    v_lo: float = 0.0
    v_hi: float = 1.0

    def __post_init__(self):
        for bound in (self.s_lo, self.s_hi, self.v_lo, self.v_hi):
            if not 0.0 <= bound <= 1.0:
                raise ValueError(f"saturation/value bound {bound} outside [0, 1]")

    def contains_planes(self, h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
        if self.h_lo <= self.h_hi:
            h_ok = (h >= self.h_lo) & (h < self.h_hi) if self.h_hi < 360 else (h >= self.h_lo)
        else:  # wrap-around, e.g. red at 345..15
            h_ok = (h >= self.h_lo) | (h < self.h_hi)
        return (
            h_ok
            & (s >= self.s_lo)
            & (s <= self.s_hi)
            & (v >= self.v_lo)
            & (v <= self.v_hi)
        )


# Defaults for the four wheel colors; tunable via app.yaml options.
DEFAULT_COLOR_RANGES: dict[str, HsvRange] = {
    "red": HsvRange(h_lo=345.0, h_hi=15.0, s_lo=0.4, v_lo=0.25),
    "yellow": HsvRange(h_lo=45.0, h_hi=75.0, s_lo=0.4, v_lo=0.25),
    "green": HsvRange(h_lo=90.0, h_hi=150.0, s_lo=0.4, v_lo=0.25),
    "black": HsvRange(v_hi=0.2),
}

COLOR_ORDER = ("red", "green", "yellow", "black")  # fixed tie-break order


def threshold_range(img: ImageFrame, rng: HsvRange) -> tuple[Mask, float]:
    """Mask of pixels whose HSV lies inside rng, plus the set fraction."""
    h, s, v = _hsv_planes(img.pixels)
    bits = rng.contains_planes(h, s, v)
    mask = Mask(bits)
    return mask, mask.fraction()


class Unrecognized(Exception):
    """No color range covers at least 10% of the region of interest."""


def classify_wheel_color(
    img: ImageFrame,
    roi: tuple[int, int, int, int],
    ranges: dict[str, HsvRange] | None = None,
    min_fraction: float = 0.1,
) -> str:
    """Dominant color label within roi = (y0, x0, y1, x1), exclusive ends.

    Ties resolve in COLOR_ORDER. Raises Unrecognized when nothing dominates.
    """
    ranges = ranges if ranges is not None else DEFAULT_COLOR_RANGES
    y0, x0, y1, x1 = roi
    if not (0 <= y0 < y1 <= img.height and 0 <= x0 < x1 <= img.width):
        raise ValueError(f"roi {roi} outside image {img.width}x{img.height}")
    h, s, v = _hsv_planes(img.pixels[y0:y1, x0:x1])
    best_label, best_fraction = None, -1.0
    for label in COLOR_ORDER:
        if label not in ranges:
            continue
        fraction = float(ranges[label].contains_planes(h, s, v).mean())
        if fraction > best_fraction:
            best_label, best_fraction = label, fraction
    if best_label is None or best_fraction < min_fraction:
        raise Unrecognized(f"max color fraction {best_fraction:.3f} below {min_fraction}")
    return best_label
