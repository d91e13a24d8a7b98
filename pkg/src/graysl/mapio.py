"""Disparity / depth / code image files.

Text grids are whitespace-separated floats with "nan" for invalid pixels, one
image row per line; they round-trip float32 exactly and are the lossless
interchange format. 16-bit grayscale PNGs are for inspection: depth is
quantized to whole millimeters (invalid = 0), code images store the code value
(invalid = 65535).
"""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ParseError

CODE_INVALID_PNG = 65535


def write_grid(arr: np.ndarray, path) -> None:
    buf = io.StringIO()
    np.savetxt(buf, np.asarray(arr, dtype=np.float64), fmt="%.10g")
    Path(path).write_text(buf.getvalue())


def read_grid(path) -> np.ndarray:
    path = Path(path)
    try:
        arr = np.loadtxt(path, dtype=np.float64, ndmin=2)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    return arr


def write_depth_png(depth: np.ndarray, path) -> None:
    """Millimeter-quantized 16-bit grayscale; invalid pixels stored as 0."""
    quant = np.where(np.isfinite(depth), np.clip(np.rint(depth), 1, 65535), 0)
    Image.fromarray(quant.astype(np.uint16)).save(path)


def write_code_png(codes: np.ndarray, path) -> None:
    """Code values as 16-bit grayscale; invalid pixels stored as 65535."""
    img = np.where(codes >= 0, codes, CODE_INVALID_PNG).astype(np.uint16)
    Image.fromarray(img).save(path)


def write_code_grid(codes: np.ndarray, path) -> None:
    """Code image in the float text-grid format (invalid -> nan)."""
    grid = np.where(codes >= 0, codes, np.nan).astype(np.float32)
    write_grid(grid, path)
