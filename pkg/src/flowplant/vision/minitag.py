"""MiniTag: a 12x12 matrix code carrying a CRC-protected 64-bit product id.

Geometry: solid black outer ring (finder), inner 10x10 grid = 100 bits read
row-major with black = 1. Bits 0..63 hold the id big-endian, bits 64..95 a
CRC-32 (IEEE polynomial, reflected, init and final xor 0xFFFFFFFF) over the
8 id bytes, bits 96..99 the version nibble 0001.
"""

from __future__ import annotations

import zlib

import numpy as np

from .image import ImageFrame

GRID = 12
INNER = 10
PAYLOAD_BITS = 100
VERSION_NIBBLE = (0, 0, 0, 1)


class TagNotFound(Exception):
    pass


class ChecksumMismatch(Exception):
    pass


def payload_bits(tag_id: int) -> list[int]:
    if not 0 <= tag_id < 2**64:
        raise ValueError("tag id must fit in 64 bits")
    id_bytes = tag_id.to_bytes(8, "big")
    crc = zlib.crc32(id_bytes) & 0xFFFFFFFF
    bits = []
    for byte in id_bytes:
        bits.extend((byte >> (7 - i)) & 1 for i in range(8))
    bits.extend((crc >> (31 - i)) & 1 for i in range(32))
    bits.extend(VERSION_NIBBLE)
    assert len(bits) == PAYLOAD_BITS
    return bits


def encode(tag_id: int) -> np.ndarray:
    """12x12 boolean module grid, True = black."""
    grid = np.zeros((GRID, GRID), dtype=bool)
    grid[0, :] = grid[-1, :] = grid[:, 0] = grid[:, -1] = True
    bits = payload_bits(tag_id)
    for index, bit in enumerate(bits):
        row, col = divmod(index, INNER)
        grid[row + 1, col + 1] = bool(bit)
    return grid


def render(tag_id: int, module_px: int = 8, margin_px: int = 16, canvas: int | None = None) -> ImageFrame:
    """Render the tag black-on-white, axis aligned, centered on the canvas."""
    grid = encode(tag_id)
    side = GRID * module_px
    size = canvas if canvas is not None else side + 2 * margin_px
    if size < side:
        raise ValueError("canvas smaller than tag")
    pixels = np.full((size, size, 3), 255, dtype=np.uint8)
    modules = np.kron(grid, np.ones((module_px, module_px), dtype=bool))
    y0 = (size - side) // 2
    x0 = (size - side) // 2
    pixels[y0 : y0 + side, x0 : x0 + side][modules] = 0
    return ImageFrame(pixels)


def _sample_grid(pixels: np.ndarray, bbox: tuple[int, int, int, int]) -> np.ndarray:
    y0, x0, y1, x1 = bbox
    grid = np.zeros((GRID, GRID), dtype=bool)
    for row in range(GRID):
        cy = y0 + (y1 - y0) * (2 * row + 1) / (2 * GRID)
        for col in range(GRID):
            cx = x0 + (x1 - x0) * (2 * col + 1) / (2 * GRID)
            luma = pixels[int(cy), int(cx)].astype(np.int32).sum() / 3
            grid[row, col] = luma < 128
    return grid


def decode(img: ImageFrame) -> str:
    """Decode to the id as a zero-padded 16-digit decimal string.

    Raises TagNotFound when no plausible finder ring exists, ChecksumMismatch
    when the ring is intact but CRC or version check fails.
    """
    gray = img.pixels.astype(np.int32).sum(axis=2) / 3
    ys, xs = np.nonzero(gray < 128)
    if ys.size == 0:
        raise TagNotFound("no dark pixels")
    bbox = (int(ys.min()), int(xs.min()), int(ys.max()) + 1, int(xs.max()) + 1)
    height = bbox[2] - bbox[0]
    width = bbox[3] - bbox[1]
    if height < GRID * 4 or width < GRID * 4:
        raise TagNotFound(f"dark region {width}x{height} too small for a tag")
    if abs(height - width) > max(height, width) * 0.2:
        raise TagNotFound("dark region is not square")
    grid = _sample_grid(img.pixels, bbox)
    ring = np.concatenate([grid[0, :], grid[-1, :], grid[:, 0], grid[:, -1]])
    if not ring.all():
        raise TagNotFound("finder ring incomplete")

    bits = [int(grid[1 + index // INNER, 1 + index % INNER]) for index in range(PAYLOAD_BITS)]
    if tuple(bits[96:100]) != VERSION_NIBBLE:
        raise ChecksumMismatch("unsupported version nibble")
    tag_id = 0
    for bit in bits[:64]:
        tag_id = (tag_id << 1) | bit
    crc_read = 0
    for bit in bits[64:96]:
        crc_read = (crc_read << 1) | bit
    crc_expect = zlib.crc32(tag_id.to_bytes(8, "big")) & 0xFFFFFFFF
    if crc_read != crc_expect:
        raise ChecksumMismatch(f"crc {crc_read:08x} != {crc_expect:08x}")
    return f"{tag_id:016d}"
