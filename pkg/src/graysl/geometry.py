"""Rectified stereo rig model: disparity-to-depth conversion and code rectification.

Conventions used throughout the package:
  * depth and baseline in millimeters; disparity and focal length in pixels
  * float maps (disparity, depth) mark invalid pixels with NaN
  * integer code / binary-slice images mark invalid pixels with -1
  * remap tables give, for each rectified pixel, the source (x, y) as float32;
    NaN entries are invalid
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, ParseError

REMAP_MAGIC = b"GRMP"

INVALID_CODE = -1


@dataclass(frozen=True, eq=False)
class RectifiedRig:
    focal_length_px: float
    baseline_mm: float
    cam_width: int
    cam_height: int
    proj_width: int
    proj_height: int
    cam_remap: np.ndarray | None = None  # (cam_height, cam_width, 2) float32
    proj_remap: np.ndarray | None = None  # (proj_height, proj_width, 2) float32

    def __post_init__(self):
        if self.focal_length_px <= 0:
            raise ConfigurationError(f"focal_length_px must be > 0, got {self.focal_length_px}")
        if self.baseline_mm <= 0:
            raise ConfigurationError(f"baseline_mm must be > 0, got {self.baseline_mm}")
        for name in ("cam_width", "cam_height", "proj_width", "proj_height"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"{name} must be > 0")
        _check_remap(self.cam_remap, self.cam_height, self.cam_width, "cam_remap")
        _check_remap(self.proj_remap, self.proj_height, self.proj_width, "proj_remap")

    @property
    def cam_shape(self) -> tuple[int, int]:
        return (self.cam_height, self.cam_width)

    @property
    def proj_shape(self) -> tuple[int, int]:
        return (self.proj_height, self.proj_width)


def _check_remap(remap, height, width, name):
    if remap is None:
        return
    if remap.shape != (height, width, 2):
        raise ConfigurationError(
            f"{name} shape {remap.shape} does not match ({height}, {width}, 2)"
        )


def default_rig() -> RectifiedRig:
    """Desk-scale pre-rectified rig: 1280x720 camera, 720x720 projector."""
    return RectifiedRig(
        focal_length_px=1000.0,
        baseline_mm=60.0,
        cam_width=1280,
        cam_height=720,
        proj_width=720,
        proj_height=720,
    )


def triangulate(disparity: np.ndarray, rig: RectifiedRig) -> np.ndarray:
    """Depth in millimeters: Z = f * b / d. Disparity <= 0 or NaN becomes NaN."""
    if disparity.shape != rig.cam_shape:
        raise ConfigurationError(
            f"disparity shape {disparity.shape} does not match camera {rig.cam_shape}"
        )
    d = disparity.astype(np.float64, copy=False)
    valid = np.isfinite(d) & (d > 0)
    depth = np.full(d.shape, np.nan, dtype=np.float64)
    depth[valid] = rig.focal_length_px * rig.baseline_mm / d[valid]
    return depth


def identity_remap(width: int, height: int) -> np.ndarray:
    """Remap table mapping every rectified pixel to itself."""
    xs, ys = np.meshgrid(np.arange(width, dtype=np.float32),
                         np.arange(height, dtype=np.float32))
    return np.stack([xs, ys], axis=-1)


def rectify_image(image: np.ndarray, remap: np.ndarray) -> np.ndarray:
    """Nearest-neighbor resample of a code or binary-slice image.

    Code values are categorical, so no interpolation: each output pixel copies
    the source pixel nearest to remap(x, y). Out-of-bounds or NaN remap entries
    produce invalid (-1) output pixels.
    """
    if remap is None:
        raise ConfigurationError("remap table absent and identity not declared")
    if remap.ndim != 3 or remap.shape[2] != 2:
        raise ConfigurationError(f"remap must have shape (H, W, 2), got {remap.shape}")
    src_h, src_w = image.shape
    sx = np.rint(remap[..., 0])
    sy = np.rint(remap[..., 1])
    ok = np.isfinite(sx) & np.isfinite(sy)
    ok &= (sx >= 0) & (sx < src_w) & (sy >= 0) & (sy < src_h)
    out = np.full(remap.shape[:2], INVALID_CODE, dtype=image.dtype)
    out[ok] = image[sy[ok].astype(np.intp), sx[ok].astype(np.intp)]
    return out


# --- file formats -----------------------------------------------------------

_RIG_KEYS = {"focal_length_px", "baseline_mm", "cam_width", "cam_height",
             "proj_width", "proj_height", "cam_remap", "proj_remap"}


def load_rig(path) -> RectifiedRig:
    """Read a rig from a key = value text file; remap paths are relative to it."""
    path = Path(path)
    values: dict[str, str] = {}
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _RIG_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = value.strip()
    try:
        kwargs = dict(
            focal_length_px=float(values["focal_length_px"]),
            baseline_mm=float(values["baseline_mm"]),
            cam_width=int(values["cam_width"]),
            cam_height=int(values["cam_height"]),
            proj_width=int(values["proj_width"]),
            proj_height=int(values["proj_height"]),
        )
    except KeyError as exc:
        raise ParseError(f"{path}: missing rig key {exc.args[0]!r}") from None
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from None
    for field in ("cam_remap", "proj_remap"):
        if field in values:
            kwargs[field] = load_remap(path.parent / values[field])
    return RectifiedRig(**kwargs)


def save_rig(rig: RectifiedRig, path) -> None:
    path = Path(path)
    lines = [
        f"focal_length_px = {rig.focal_length_px}",
        f"baseline_mm = {rig.baseline_mm}",
        f"cam_width = {rig.cam_width}",
        f"cam_height = {rig.cam_height}",
        f"proj_width = {rig.proj_width}",
        f"proj_height = {rig.proj_height}",
    ]
    for field in ("cam_remap", "proj_remap"):
        remap = getattr(rig, field)
        if remap is not None:
            remap_path = path.with_name(f"{path.stem}_{field}.bin")
            save_remap(remap, remap_path)
            lines.append(f"{field} = {remap_path.name}")
    path.write_text("\n".join(lines) + "\n")


def load_remap(path) -> np.ndarray:
    """Read a remap table: magic, u32 width/height, row-major float32 (x, y) pairs."""
    path = Path(path)
    data = path.read_bytes()
    if len(data) < 12 or data[:4] != REMAP_MAGIC:
        raise ParseError(f"{path}: not a remap file (bad magic)")
    width, height = struct.unpack_from("<II", data, 4)
    expected = 12 + width * height * 2 * 4
    if len(data) != expected:
        raise ParseError(f"{path}: expected {expected} bytes for {width}x{height}, got {len(data)}")
    table = np.frombuffer(data, dtype="<f4", offset=12).reshape(height, width, 2)
    return np.ascontiguousarray(table)


def save_remap(remap: np.ndarray, path) -> None:
    remap = np.asarray(remap, dtype=np.float32)
    if remap.ndim != 3 or remap.shape[2] != 2:
        raise ConfigurationError(f"remap must have shape (H, W, 2), got {remap.shape}")
    height, width = remap.shape[:2]
    with open(path, "wb") as fh:
        fh.write(REMAP_MAGIC)
        fh.write(struct.pack("<II", width, height))
        fh.write(remap.astype("<f4").tobytes())
