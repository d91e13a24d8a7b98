"""Binary-reflected Gray codes and stripe pattern stacks.

A projected code covers `num_columns = 2**num_bits` projector columns starting
at `column_offset`; plane k of the pattern stack carries one bit of the Gray
code of the column index, so every covered column has a unique temporal bit
sequence and adjacent columns differ in exactly one plane.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigurationError, DomainError


@dataclass(frozen=True)
class GrayCodeConfig:
    num_bits: int
    num_columns: int
    column_offset: int = 0
    msb_first: bool = True

    def __post_init__(self):
        if not 1 <= self.num_bits <= 16:
            raise ConfigurationError(f"num_bits must be in [1, 16], got {self.num_bits}")
        if self.num_columns != 1 << self.num_bits:
            raise ConfigurationError(
                f"num_columns must be 2**num_bits = {1 << self.num_bits}, got {self.num_columns}"
            )
        if self.column_offset < 0:
            raise ConfigurationError(f"column_offset must be >= 0, got {self.column_offset}")

    @classmethod
    def for_columns(cls, num_columns: int, column_offset: int = 0, msb_first: bool = True):
        """Config for a power-of-two column count; bit depth is log2(num_columns)."""
        num_bits = int(num_columns).bit_length() - 1
        if num_bits < 1 or (1 << num_bits) != num_columns:
            raise ConfigurationError(f"num_columns must be a power of two >= 2, got {num_columns}")
        return cls(num_bits=num_bits, num_columns=num_columns,
                   column_offset=column_offset, msb_first=msb_first)

    def plane_bit(self, plane_index: int) -> int:
        """Bit position carried by pattern plane `plane_index`."""
        return self.num_bits - 1 - plane_index if self.msb_first else plane_index


@dataclass(frozen=True, eq=False)
class PatternSet:
    """Ordered stack of binary stripe images, one per bit plane."""

    config: GrayCodeConfig
    patterns: np.ndarray  # (num_bits, proj_height, proj_width) uint8 in {0, 1}

    @property
    def num_planes(self) -> int:
        return self.patterns.shape[0]


def encode_gray(index: int, num_bits: int) -> int:
    """Binary-reflected Gray code of `index`; adjacent indices differ in one bit."""
    if not 0 <= index < (1 << num_bits):
        raise DomainError(f"index {index} outside [0, {1 << num_bits})")
    return index ^ (index >> 1)


def decode_gray(code: int, num_bits: int) -> int:
    """Exact inverse of encode_gray."""
    if not 0 <= code < (1 << num_bits):
        raise DomainError(f"code {code} outside [0, {1 << num_bits})")
    value = code
    shift = 1
    while shift < num_bits:
        value ^= value >> shift
        shift <<= 1
    return value


def decode_gray_array(codes: np.ndarray, num_bits: int) -> np.ndarray:
    """Vectorized decode_gray over an integer array (values assumed in range)."""
    value = codes.astype(np.int32, copy=True)
    shift = 1
    while shift < num_bits:
        value ^= value >> shift
        shift <<= 1
    return value


def make_pattern_set(config: GrayCodeConfig, proj_width: int, proj_height: int) -> PatternSet:
    """Build the bit-plane stripe images for a projector of the given size.

    Plane order follows config.msb_first (coarsest stripes first by default);
    columns outside [column_offset, column_offset + num_columns) are dark in
    every plane.
    """
    if config.column_offset + config.num_columns > proj_width:
        raise ConfigurationError(
            f"covered range [{config.column_offset}, "
            f"{config.column_offset + config.num_columns}) exceeds projector width {proj_width}"
        )
    cols = np.arange(proj_width, dtype=np.int32)
    rel = cols - config.column_offset
    covered = (rel >= 0) & (rel < config.num_columns)
    rel_safe = np.where(covered, rel, 0)
    codes = rel_safe ^ (rel_safe >> 1)
    planes = np.empty((config.num_bits, proj_height, proj_width), dtype=np.uint8)
    for i in range(config.num_bits):
        bit = (codes >> config.plane_bit(i)) & 1
        row = (bit & covered).astype(np.uint8)
        planes[i] = row[None, :]
    return PatternSet(config=config, patterns=planes)


def stack_to_code(bits, config: GrayCodeConfig):
    """Pack N binary values (scalars or images) into a column index in [0, num_columns).

    `bits` must be in the same plane order as the pattern set; the packed Gray
    code is decoded back to a column index relative to column_offset.
    """
    if len(bits) != config.num_bits:
        raise DomainError(f"expected {config.num_bits} bit planes, got {len(bits)}")
    stack = [np.asarray(b) for b in bits]
    packed = np.zeros_like(stack[0], dtype=np.int32)
    for i, plane in enumerate(stack):
        if np.any((plane != 0) & (plane != 1)):
            raise DomainError(f"plane {i} contains non-binary values")
        packed |= plane.astype(np.int32) << config.plane_bit(i)
    decoded = decode_gray_array(packed, config.num_bits)
    if decoded.ndim == 0:
        return int(decoded)
    return decoded


def write_pattern_images(patterns: PatternSet, directory) -> list[Path]:
    """Export each bit plane as a numbered 1-bit portable bitmap (P4)."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i in range(patterns.num_planes):
        plane = patterns.patterns[i]
        path = directory / f"pattern_{i:02d}.pbm"
        header = f"P4\n{plane.shape[1]} {plane.shape[0]}\n".encode("ascii")
        path.write_bytes(header + np.packbits(plane, axis=1).tobytes())
        paths.append(path)
    return paths
