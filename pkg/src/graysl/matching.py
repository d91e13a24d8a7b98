"""Constant-time disparity lookup via the GX-map, plus the scanline search oracle.

The projector's rectified code image RP answers "which code sits at (y, x)";
inverting it row by row gives a dense table GX answering "which x carries code
v in row y". A camera pixel (x, y) decoding to v then matches projector column
GX(y, v) and its disparity is x - GX(y, v): one lookup instead of a row scan.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from .errors import ConfigurationError, IntegrityError
from .geometry import INVALID_CODE, RectifiedRig, rectify_image, triangulate
from .graycode import GrayCodeConfig
from .pipeline import (
    OverlapBuffer,
    binarize_slice,
    median_filter,
    morph_close,
    segment_stream,
)
from .simulator import EventStream

logger = logging.getLogger(__name__)


def make_projector_code_image(rig: RectifiedRig, config: GrayCodeConfig) -> np.ndarray:
    """RP for the pattern set: RP(y, x) = x - column_offset inside the covered
    range, invalid outside. Rectified with the rig's projector remap when present."""
    if config.column_offset + config.num_columns > rig.proj_width:
        raise ConfigurationError(
            f"covered range exceeds projector width {rig.proj_width}"
        )
    cols = np.arange(rig.proj_width, dtype=np.int32) - config.column_offset
    row = np.where((cols >= 0) & (cols < config.num_columns), cols, INVALID_CODE)
    rp = np.broadcast_to(row, (rig.proj_height, rig.proj_width)).copy()
    if rig.proj_remap is not None:
        rp = rectify_image(rp, rig.proj_remap)
    return rp


def build_gx_map(rp: np.ndarray, num_columns: int, on_duplicate: str = "error") -> np.ndarray:
    """Invert RP row-wise into a dense (rows, num_columns) table of x coordinates.

    Codes absent from a row are marked -1. Duplicate codes within a row violate
    per-row uniqueness: on_duplicate="error" raises naming the row, "first"
    keeps the leftmost column and logs a warning count.
    """
    if on_duplicate not in ("error", "first"):
        raise ValueError(f"on_duplicate must be 'error' or 'first', got {on_duplicate!r}")
    rows, _ = rp.shape
    valid = (rp >= 0) & (rp < num_columns)
    ys, xs = np.nonzero(valid)
    codes = rp[ys, xs].astype(np.int64)
    flat = ys.astype(np.int64) * num_columns + codes
    counts = np.bincount(flat, minlength=rows * num_columns)
    dup = counts > 1
    if np.any(dup):
        dup_rows = np.unique(np.flatnonzero(dup) // num_columns)
        if on_duplicate == "error":
            raise IntegrityError(
                f"duplicate code in projector row {int(dup_rows[0])} "
                f"(rows affected: {len(dup_rows)})"
            )
        logger.warning("GX-map build: %d rows contain duplicate codes; keeping leftmost",
                       len(dup_rows))
    gx = np.full((rows, num_columns), -1, dtype=np.int32)
    # reversed assignment order makes the leftmost (smallest x) entry win
    gx[ys[::-1], codes[::-1]] = xs[::-1].astype(np.int32)
    return gx


def query_disparity(cam_codes: np.ndarray, gx: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Disparity per pixel: d = x - GX(y, code). Invalid code, absent entry or
    negative disparity yields NaN."""
    if cam_codes.shape[0] > gx.shape[0]:
        raise ConfigurationError(
            f"code image has {cam_codes.shape[0]} rows but GX-map only {gx.shape[0]}"
        )
    kern = _backend.get_backend(backend)
    out = np.empty(cam_codes.shape, dtype=np.float32)
    neg = kern.query_disparity(
        np.ascontiguousarray(cam_codes, dtype=np.int32),
        np.ascontiguousarray(gx, dtype=np.int32),
        out,
    )
    if neg:
        logger.debug("query_disparity: %d pixels invalidated for negative disparity", neg)
    return out


def search_disparity(cam_codes: np.ndarray, rp: np.ndarray, backend: str | None = None) -> np.ndarray:
    """Oracle matcher: scan the full projector row for the pixel's code.

    Independent of the GX-map path; used to validate it and as the benchmark
    baseline. Raises IntegrityError if a row holds the same code twice.
    """
    if cam_codes.shape[0] > rp.shape[0]:
        raise ConfigurationError(
            f"code image has {cam_codes.shape[0]} rows but projector image only {rp.shape[0]}"
        )
    kern = _backend.get_backend(backend)
    out = np.empty(cam_codes.shape, dtype=np.float32)
    neg, dup_row = kern.search_disparity(
        np.ascontiguousarray(cam_codes, dtype=np.int32),
        np.ascontiguousarray(rp, dtype=np.int32),
        out,
    )
    if dup_row >= 0:
        raise IntegrityError(f"duplicate code in projector row {dup_row}")
    if neg:
        logger.debug("search_disparity: %d pixels invalidated for negative disparity", neg)
    return out


@dataclass
class PipelineResult:
    depth_maps: list[np.ndarray] = field(default_factory=list)
    disparity_maps: list[np.ndarray] = field(default_factory=list)
    code_images: list[np.ndarray] = field(default_factory=list)
    window_slices: list[tuple[int, int]] = field(default_factory=list)  # (first, last) per map
    num_slices: int = 0
    timings_s: dict[str, float] = field(default_factory=dict)


def depth_pipeline(stream: EventStream, rig: RectifiedRig, config: GrayCodeConfig,
                   gap_threshold_us: float | None = None,
                   close_radius: int = 0, median_radius: int = 0,
                   backend: str | None = None,
                   initial_state: str = "dark",
                   keep_intermediates: bool = False) -> PipelineResult:
    """Full decode: segment, binarize, window, match, triangulate.

    Emits one depth map per completed overlap window. The GX-map is built once
    up front and reused for every window.

    initial_state="dark" binarizes the first slice against the all-dark
    reference state that precedes the first projection. For any pixel that
    ever fires this is exact (its first positive event proves it sat at
    ambient before), and it makes every overlap window fully decodable from
    the first slice. Pixels that never fire at all are indistinguishable from
    unprojected background and are masked invalid in every window.
    initial_state="unknown" instead leaves silent pixels unknown until their
    first event, as a detector attaching mid-stream would.
    """
    if initial_state not in ("dark", "unknown"):
        raise ConfigurationError(f"initial_state must be 'dark' or 'unknown', got {initial_state!r}")
    if stream.num_bits and stream.num_bits != config.num_bits:
        raise ConfigurationError(
            f"stream carries {stream.num_bits}-bit codes but config expects {config.num_bits}"
        )
    if (stream.height, stream.width) != rig.cam_shape:
        raise ConfigurationError(
            f"stream resolution {stream.width}x{stream.height} does not match camera "
            f"{rig.cam_width}x{rig.cam_height}"
        )
    if gap_threshold_us is None:
        gap_threshold_us = stream.dark_interval_us / 2
    kern_name = backend
    result = PipelineResult()
    timings = result.timings_s

    t0 = time.perf_counter()
    rp = make_projector_code_image(rig, config)
    gx = build_gx_map(rp, config.num_columns,
                      on_duplicate="first" if rig.proj_remap is not None else "error")
    timings["gx_build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    slices = segment_stream(stream, gap_threshold_us)
    timings["segment"] = time.perf_counter() - t0
    result.num_slices = len(slices)
    if stream.num_slides and len(slices) != stream.num_slides:
        logger.warning("segmented %d slices but stream metadata says %d slides",
                       len(slices), stream.num_slides)

    buffer = OverlapBuffer(config, start_phase=stream.start_phase)
    shape = (stream.height, stream.width)
    prev_state = np.zeros(shape, dtype=np.int8) if initial_state == "dark" else None
    ever_active = np.zeros(shape, dtype=bool)
    kernels = _backend.get_backend(kern_name)
    for stage in ("binarize", "assemble", "rectify", "close", "query", "triangulate", "median"):
        timings.setdefault(stage, 0.0)
    for sl in slices:
        t0 = time.perf_counter()
        state = binarize_slice(sl, prev_state, shape=shape, kernels=kernels)
        prev_state = state
        if initial_state == "dark":
            ever_active[sl.y, sl.x] = True
        timings["binarize"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        codes = buffer.feed(state)
        timings["assemble"] += time.perf_counter() - t0
        if codes is None:
            continue
        if initial_state == "dark":
            # silent-forever pixels are unobserved background, not code 0
            codes[~ever_active] = -1

        if rig.cam_remap is not None:
            t0 = time.perf_counter()
            codes = rectify_image(codes, rig.cam_remap)
            timings["rectify"] += time.perf_counter() - t0
        if close_radius:
            t0 = time.perf_counter()
            codes = morph_close(codes, close_radius)
            timings["close"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        disparity = query_disparity(codes, gx, backend=kern_name)
        timings["query"] += time.perf_counter() - t0

        t0 = time.perf_counter()
        depth = triangulate(disparity, rig)
        timings["triangulate"] += time.perf_counter() - t0
        if median_radius:
            t0 = time.perf_counter()
            depth = median_filter(depth, median_radius)
            timings["median"] += time.perf_counter() - t0

        result.depth_maps.append(depth)
        result.window_slices.append((sl.index - config.num_bits + 1, sl.index))
        if keep_intermediates:
            result.disparity_maps.append(disparity)
            result.code_images.append(codes)
    return result
