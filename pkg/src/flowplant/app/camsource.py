"""Cam Source: serves staged images for (current product, position).

Staged layout: <stage_dir>/<productId>/{tag,left,right}.ppm. Frames are
cached after first read; capture is rejected unless the cobot reports the
requested position.
"""

from __future__ import annotations

import threading
from pathlib import Path

from ..vision.image import ImageFrame, read_ppm

POSITION_FILES = {"qr": "tag.ppm", "left": "left.ppm", "right": "right.ppm"}


class NoImageStaged(Exception):
    pass


class NotAtPosition(Exception):
    pass


class CamSource:
    def __init__(self, stage_dir):
        self.stage_dir = Path(stage_dir)
        self._lock = threading.Lock()
        self._cache: dict[tuple[str, str], ImageFrame] = {}
        self.current_product: str | None = None

    def set_current_product(self, product_id: str | None) -> None:
        self.current_product = product_id

    def capture(self, position: str, at_position: str | None = None) -> ImageFrame:
        """at_position: where the cobot actually is; None skips the guard."""
        if position not in POSITION_FILES:
            raise ValueError(f"unknown position {position!r}")
        if at_position is not None and at_position != position:
            raise NotAtPosition(f"cobot at {at_position!r}, capture wants {position!r}")
        pid = self.current_product
        if pid is None:
            raise NoImageStaged("no product staged")
        key = (pid, position)
        with self._lock:
            frame = self._cache.get(key)
        if frame is None:
            path = self.stage_dir / pid / POSITION_FILES[position]
            if not path.exists():
                raise NoImageStaged(f"{path} missing")
            frame = read_ppm(path)
            with self._lock:
                self._cache[key] = frame
        out = ImageFrame(frame.pixels, meta=dict(frame.meta))
        out.meta["position"] = position
        out.meta["productHint"] = pid
        return out
