"""Event stream to depth-encoded images.

Stages: cut the stream at event-free gaps (the projector's dark intervals),
binarize each slice with carry-over for silent pixels, then stack N bit-plane
slices into a code image. The sliding overlap window emits one code image per
incoming slice once warm, reusing the previous N-1 slices.

Binary slice states are int8: 1 lit, 0 dark, -1 unknown. Code images are
int32 with -1 invalid; a pixel with any unknown contributing bit is invalid.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from . import backend as _backend
from .errors import DomainError
from .graycode import GrayCodeConfig, decode_gray_array
from .simulator import EventStream

UNKNOWN = -1


@dataclass(frozen=True, eq=False)
class EventSlice:
    """Events of one segmentation window, in stream order."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    p: np.ndarray
    index: int

    def __len__(self) -> int:
        return len(self.t)


def segment_stream(stream: EventStream, gap_threshold_us: float) -> list[EventSlice]:
    """Cut wherever consecutive events are more than gap_threshold_us apart."""
    if gap_threshold_us <= 0:
        raise DomainError(f"gap_threshold_us must be > 0, got {gap_threshold_us}")
    if len(stream) == 0:
        return []
    gaps = np.diff(stream.t.astype(np.int64))
    cuts = np.flatnonzero(gaps > gap_threshold_us) + 1
    bounds = np.concatenate([[0], cuts, [len(stream)]])
    return [
        EventSlice(
            t=stream.t[a:b], x=stream.x[a:b], y=stream.y[a:b], p=stream.p[a:b],
            index=i,
        )
        for i, (a, b) in enumerate(zip(bounds[:-1], bounds[1:]))
    ]


def binarize_slice(events: EventSlice, prev: np.ndarray | None,
                   shape: tuple[int, int] | None = None,
                   kernels=None) -> np.ndarray:
    """Per-pixel state from the latest event in the slice.

    +1 maps to 1, -1 to 0; pixels without events inherit `prev`, or unknown
    when there is no previous slice. Events are applied in stream order, so
    ties at equal timestamps resolve to the later record.
    """
    if prev is not None:
        state = prev.copy()
    else:
        if shape is None:
            raise DomainError("shape is required when no previous slice is given")
        state = np.full(shape, UNKNOWN, dtype=np.int8)
    kern = kernels if kernels is not None else _backend.get_backend()
    kern.binarize_events(events.x, events.y, events.p, state)
    return state


def assemble_code(slices, config: GrayCodeConfig) -> np.ndarray:
    """Stack N binarized slices (bit-plane order) into a code image in [0, c).

    Any unknown contributing bit invalidates the pixel; holes are left to the
    morphological close step rather than guessed.
    """
    if len(slices) != config.num_bits:
        raise DomainError(f"expected {config.num_bits} slices, got {len(slices)}")
    shape = slices[0].shape
    packed = np.zeros(shape, dtype=np.int32)
    known = np.ones(shape, dtype=bool)
    for i, plane in enumerate(slices):
        if plane.shape != shape:
            raise DomainError("slice dimensions are inconsistent")
        known &= plane != UNKNOWN
        packed |= (plane == 1).astype(np.int32) << config.plane_bit(i)
    codes = decode_gray_array(packed, config.num_bits)
    codes[~known] = -1
    return codes


class OverlapBuffer:
    """Sliding window over binarized slices, one code image per slice once warm.

    Slices must arrive in projection order; slice i carries bit plane
    (start_phase + i) mod num_bits, so each arrival replaces the stalest
    occupant of its plane slot.
    """

    def __init__(self, config: GrayCodeConfig, start_phase: int = 0):
        self.config = config
        self._slots: list[np.ndarray | None] = [None] * config.num_bits
        self._phase = start_phase % config.num_bits
        self._count = 0

    @property
    def warmed_up(self) -> bool:
        return self._count >= self.config.num_bits

    def feed(self, binary_slice: np.ndarray) -> np.ndarray | None:
        """Push one slice; return a code image when N slices are buffered."""
        self._slots[self._phase] = binary_slice
        self._phase = (self._phase + 1) % self.config.num_bits
        self._count += 1
        if not self.warmed_up:
            return None
        return assemble_code(self._slots, self.config)


def morph_close(code_image: np.ndarray, radius: int) -> np.ndarray:
    """Fill invalid pixels surrounded by valid ones (close on the validity mask).

    Filled pixels take the lower median of the valid codes in their
    (2r+1)^2 neighborhood; codes are categorical so no averaging.
    """
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    if radius == 0:
        return code_image.copy()
    valid = code_image >= 0
    dilated = _window_any(valid, radius)
    closed = ~_window_any(~dilated, radius)  # erosion of the dilation
    fill = closed & ~valid
    out = code_image.copy()
    if not np.any(fill):
        return out
    values = code_image.astype(np.float32)
    values[~valid] = np.nan
    windows = _windows(values, radius, fill_value=np.nan)
    counts = np.sum(~np.isnan(windows), axis=-1)
    ordered = np.sort(windows, axis=-1)  # NaNs sort to the end
    kth = np.maximum(counts - 1, 0) // 2
    median = np.take_along_axis(ordered, kth[..., None], axis=-1)[..., 0]
    usable = fill & (counts > 0)
    out[usable] = median[usable].astype(code_image.dtype)
    return out


def median_filter(depth: np.ndarray, radius: int) -> np.ndarray:
    """Median over the valid pixels of each (2r+1)^2 neighborhood.

    Invalid (NaN) pixels stay invalid; this is post-processing smoothing,
    not hole filling.
    """
    if radius < 0:
        raise DomainError(f"radius must be >= 0, got {radius}")
    if radius == 0:
        return depth.copy()
    valid = np.isfinite(depth)
    windows = _windows(np.asarray(depth, dtype=np.float64), radius, fill_value=np.nan)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)  # all-NaN windows
        med = np.nanmedian(windows, axis=-1)
    return np.where(valid, med, np.nan)


def _windows(arr: np.ndarray, radius: int, fill_value) -> np.ndarray:
    """(H, W, (2r+1)^2) view of each pixel's neighborhood, edge-padded with fill."""
    k = 2 * radius + 1
    padded = np.pad(arr, radius, mode="constant", constant_values=fill_value)
    win = np.lib.stride_tricks.sliding_window_view(padded, (k, k))
    return win.reshape(arr.shape[0], arr.shape[1], k * k)


def _window_any(mask: np.ndarray, radius: int) -> np.ndarray:
    k = 2 * radius + 1
    padded = np.pad(mask, radius, mode="constant", constant_values=False)
    win = np.lib.stride_tricks.sliding_window_view(padded, (k, k))
    return win.any(axis=(-2, -1))
