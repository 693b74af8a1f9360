"""Synthetic toy-car renderer and dataset generator.

Produces left/right side views plus a tag image per product, with exact
pixel-level ground truth. The scene layout is fixed so the classical
detectors and the learned models share the same regions of interest.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import minitag
from .image import ImageFrame, write_ppm

CANVAS = 256

# Scene layout, (y0, x0, y1, x1) exclusive ends.
BODY_ROI = (96, 32, 192, 224)
WINDOW_BAND = (104, 136)  # rows
WINDOW_SLOTS = ((56, 88), (108, 140), (160, 192))  # cols, up to 3 windows
ENGRAVING_ROI = (148, 196, 180, 220)  # rows 148..180, cols 196..220
SCRATCH_ROI = (144, 36, 180, 188)  # rows 144..180, cols 36..188
WHEEL_CENTERS = ((204, 76), (204, 180))
WHEEL_RADIUS = 18
WHEEL_ROI = (186, 58, 222, 94)  # bbox of the left wheel disc

BG_GRAY = 230
BODY_GRAY = 150
BODY_NOISE = 4  # +/- luma
WINDOW_RGB = (25, 35, 80)
SCRATCH_RGB = (45, 45, 50)
ENGRAVING_GRAY = 80

WHEEL_RGB = {
    "red": (200, 30, 30),
    "green": (40, 160, 60),
    "yellow": (210, 200, 40),
    "black": (30, 30, 30),
}

COLORS = ("red", "green", "yellow", "black")


@dataclass(frozen=True)
class GroundTruth:
    wheelColor: str
    engraving: bool
    windows: int
    scratches: int
    scratchPixels: int

    def __post_init__(self):
        if self.wheelColor not in COLORS:
            raise ValueError(f"unknown wheel color {self.wheelColor!r}")
        if not 1 <= self.windows <= 3:
            raise ValueError("window count must be in [1, 3]")
        if self.scratches < 0 or self.scratchPixels < 0:
            raise ValueError("scratch counts must be non-negative")

    def to_json_dict(self) -> dict:
        return {
            "wheelColor": self.wheelColor,
            "engraving": self.engraving,
            "windows": self.windows,
            "scratches": self.scratches,
            "scratchPixels": self.scratchPixels,
        }


@dataclass(frozen=True)
class SceneSpec:
    """What to paint; ground truth follows from it."""

    wheel_color: str
    engraving: bool
    windows: int
    scratches: int
    fake_window_scratch: bool = False  # a rectangular defect that mimics a window


def _draw_body(pixels: np.ndarray, rng: np.random.Generator) -> None:
    y0, x0, y1, x1 = BODY_ROI
    noise = rng.integers(-BODY_NOISE, BODY_NOISE + 1, size=(y1 - y0, x1 - x0))
    luma = np.clip(BODY_GRAY + noise, 0, 255).astype(np.uint8)
    pixels[y0:y1, x0:x1] = luma[..., None]  # equal channels: pure luma noise


def _draw_windows(pixels: np.ndarray, count: int) -> None:
    r0, r1 = WINDOW_BAND
    for slot in WINDOW_SLOTS[:count]:
        pixels[r0:r1, slot[0] : slot[1]] = WINDOW_RGB


def _draw_engraving(pixels: np.ndarray) -> None:
    y0, x0, y1, x1 = ENGRAVING_ROI
    for col in range(x0, x1):
        if (col - x0) % 4 < 2:
            pixels[y0:y1, col] = ENGRAVING_GRAY


def _draw_wheels(pixels: np.ndarray, color: str) -> None:
    yy, xx = np.mgrid[0:CANVAS, 0:CANVAS]
    for cy, cx in WHEEL_CENTERS:
        disc = (yy - cy) ** 2 + (xx - cx) ** 2 <= WHEEL_RADIUS**2
        pixels[disc] = WHEEL_RGB[color]


def _draw_scratch(pixels: np.ndarray, rng: np.random.Generator, painted: np.ndarray) -> None:
    ry0, rx0, ry1, rx1 = SCRATCH_ROI
    y0, y1 = ry0 + 4, ry1 - 4
    x0, x1 = rx0 + 4, rx1 - 4
    length = int(rng.integers(50, 90))
    height = y1 - y0
    dy_total = int(rng.integers(-(height - 4), height - 3))
    dx_total = int(round(np.sqrt(max(length**2 - dy_total**2, 25))))
    sy = int(rng.integers(y0 + max(0, -dy_total), y1 - max(0, dy_total) - 1))
    sx = int(rng.integers(x0, max(x0 + 1, x1 - dx_total - 1)))
    steps = np.linspace(0.0, 1.0, length * 2)
    for t in steps:
        cy = int(round(sy + dy_total * t))
        cx = int(round(sx + dx_total * t))
        for dy in (0, 1):
            for dx in (0, 1):
                py, px = cy + dy, cx + dx
                if y0 <= py < y1 and x0 <= px < x1:
                    pixels[py, px] = SCRATCH_RGB
                    painted[py, px] = True


def _draw_fake_window(pixels: np.ndarray, painted: np.ndarray) -> None:
    # Rectangular dark defect in the scratch area, window-sized.
    y0, x0 = SCRATCH_ROI[0] + 4, SCRATCH_ROI[1] + 8
    y1, x1 = y0 + 28, x0 + 30
    pixels[y0:y1, x0:x1] = SCRATCH_RGB
    painted[y0:y1, x0:x1] = True


def render_side(scene: SceneSpec, side: str, rng: np.random.Generator) -> tuple[ImageFrame, int]:
    """Render one side view. Returns (frame, scratch pixel count painted).

    The left view carries windows and scratches, the right view the
    engraving; wheels appear on both.
    """
    pixels = np.full((CANVAS, CANVAS, 3), BG_GRAY, dtype=np.uint8)
    _draw_body(pixels, rng)
    _draw_wheels(pixels, scene.wheel_color)
    painted = np.zeros((CANVAS, CANVAS), dtype=bool)
    if side == "left":
        _draw_windows(pixels, scene.windows)
        for _ in range(scene.scratches):
            _draw_scratch(pixels, rng, painted)
        if scene.fake_window_scratch:
            _draw_fake_window(pixels, painted)
    elif side == "right":
        if scene.engraving:
            _draw_engraving(pixels)
    else:
        raise ValueError(f"unknown side {side!r}")
    frame = ImageFrame(pixels, meta={"position": side})
    return frame, int(painted.sum())


def render_sample(scene: SceneSpec, product_id: int, rng: np.random.Generator):
    """Full sample: (left, right, tag) frames plus ground truth."""
    left, scratch_pixels = render_side(scene, "left", rng)
    right, _ = render_side(scene, "right", rng)
    tag = minitag.render(product_id, module_px=8, canvas=CANVAS)
    tag.meta["position"] = "qr"
    truth = GroundTruth(
        wheelColor=scene.wheel_color,
        engraving=scene.engraving,
        windows=scene.windows,
        scratches=scene.scratches + (1 if scene.fake_window_scratch else 0),
        scratchPixels=scratch_pixels,
    )
    return left, right, tag, truth


def scene_for_index(index: int) -> SceneSpec:
    """Round-robin balanced lattice over color, engraving, windows, scratch.

    Period 48 covers every ground-truth combination exactly once.
    """
    color = COLORS[index % 4]
    engraving = (index // 4) % 2 == 1
    windows = (index // 8) % 3 + 1
    scratched = (index // 24) % 2 == 1
    return SceneSpec(
        wheel_color=color,
        engraving=engraving,
        windows=windows,
        scratches=2 if (scratched and index % 3 == 0) else (1 if scratched else 0),
    )


def _write_truth(path: Path, truth: GroundTruth, product_id: str, extra: dict | None = None) -> None:
    doc = {"productId": product_id, **truth.to_json_dict()}
    if extra:
        doc.update(extra)
    path.write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _augment_variants(frame: ImageFrame) -> list[tuple[str, ImageFrame]]:
    px = frame.pixels
    zoomed = px[16:240, 16:240]
    zoomed = np.repeat(np.repeat(zoomed, 8, axis=0), 8, axis=1)[::7, ::7][:CANVAS, :CANVAS]
    return [
        ("flip", ImageFrame(px[:, ::-1].copy(), dict(frame.meta))),
        ("rot90", ImageFrame(np.rot90(px).copy(), dict(frame.meta))),
        ("zoom", ImageFrame(zoomed.copy(), dict(frame.meta))),
    ]


def gen_dataset(n: int, seed: int, out_dir, augment: bool = False, start_id: int = 1) -> list[str]:
    """Generate n samples under out_dir; returns the product ids.

    Files per sample: <pid>.left.ppm, <pid>.right.ppm, <pid>.tag.ppm and the
    sidecar <pid>.truth.json. Deterministic for a fixed seed.
    """
    if n <= 0:
        raise ValueError("n must be positive")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    ids = []
    for index in range(n):
        numeric_id = start_id + index
        pid = f"{numeric_id:04d}"
        rng = np.random.default_rng(np.random.SeedSequence((seed, index)))
        scene = scene_for_index(index)
        left, right, tag, truth = render_sample(scene, numeric_id, rng)
        write_ppm(out / f"{pid}.left.ppm", left)
        write_ppm(out / f"{pid}.right.ppm", right)
        write_ppm(out / f"{pid}.tag.ppm", tag)
        _write_truth(out / f"{pid}.truth.json", truth, pid)
        if augment:
            for kind, variant in _augment_variants(left):
                write_ppm(out / f"{pid}.aug-{kind}.left.ppm", variant)
                _write_truth(
                    out / f"{pid}.aug-{kind}.truth.json",
                    truth,
                    pid,
                    extra={"derivedFrom": pid, "transform": kind},
                )
        ids.append(pid)
    return ids


def stage_dataset(dataset_dir, stage_dir, ids: list[str] | None = None) -> None:
    """Copy samples into the application's staged-image layout:
    stage/<productId>/{tag,left,right}.ppm."""
    src = Path(dataset_dir)
    dst = Path(stage_dir)
    if ids is None:
        ids = sorted(p.name.split(".")[0] for p in src.glob("*.truth.json") if "aug" not in p.name)
    for pid in ids:
        target = dst / pid
        target.mkdir(parents=True, exist_ok=True)
        for part in ("tag", "left", "right"):
            target.joinpath(f"{part}.ppm").write_bytes(src.joinpath(f"{pid}.{part}.ppm").read_bytes())


def load_truth(dataset_dir, pid: str) -> dict:
    return json.loads(Path(dataset_dir).joinpath(f"{pid}.truth.json").read_text())
