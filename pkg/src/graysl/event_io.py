"""Event stream files: '#'-headed text records and a packed binary variant.

Text layout::

    # graysl-events 1
    # width 1280
    # height 720
    # slide_period_us 400
    # dark_interval_us 80
    # num_slides 9
    # num_bits 9
    # start_phase 0
    180 12 34 1
    ...

one "t_us x y p" record per line, sorted by t_us, p in {1, -1}. The binary
variant stores the same header (without '#') behind a 4-byte magic and a u32
header length, followed by packed little-endian records
(u64 timestamp, u16 x, u16 y, i8 polarity).
"""

from __future__ import annotations

import io
import struct
from pathlib import Path

import numpy as np

from .errors import ParseError
from .simulator import EVENT_DTYPE, EventStream

BINARY_MAGIC = b"GEVB"

_REQUIRED_KEYS = ("width", "height", "slide_period_us", "dark_interval_us", "num_slides")
_OPTIONAL_KEYS = ("num_bits", "start_phase")


def _header_pairs(stream: EventStream) -> list[tuple[str, int]]:
    return [
        ("width", stream.width),
        ("height", stream.height),
        ("slide_period_us", stream.slide_period_us),
        ("dark_interval_us", stream.dark_interval_us),
        ("num_slides", stream.num_slides),
        ("num_bits", stream.num_bits),
        ("start_phase", stream.start_phase),
    ]


def write_events(stream: EventStream, path, binary: bool = True) -> None:
    """Write a stream losslessly; binary by default, text when binary=False."""
    path = Path(path)
    if binary:
        _write_binary(stream, path)
    else:
        _write_text(stream, path)


def read_events(path) -> EventStream:
    """Read either format back, detecting the binary magic."""
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(4)
    if magic == BINARY_MAGIC:
        return _read_binary(path)
    return _read_text(path)


def _write_text(stream: EventStream, path: Path) -> None:
    buf = io.StringIO()
    buf.write("# graysl-events 1\n")
    for key, value in _header_pairs(stream):
        buf.write(f"# {key} {value}\n")
    if len(stream):
        table = np.empty((len(stream), 4), dtype=np.int64)
        table[:, 0] = stream.t.astype(np.int64)
        table[:, 1] = stream.x
        table[:, 2] = stream.y
        table[:, 3] = stream.p
        np.savetxt(buf, table, fmt="%d")
    path.write_text(buf.getvalue())


def _write_binary(stream: EventStream, path: Path) -> None:
    header = "".join(f"{key} {value}\n" for key, value in _header_pairs(stream)).encode("ascii")
    records = np.empty(len(stream), dtype=EVENT_DTYPE)
    records["t"] = stream.t
    records["x"] = stream.x
    records["y"] = stream.y
    records["p"] = stream.p
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(struct.pack("<I", len(header)))
        fh.write(header)
        fh.write(records.tobytes())


def _parse_header(lines: list[tuple[int, str]], path: Path) -> dict[str, int]:
    meta: dict[str, int] = {}
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 2:
            if parts and parts[0] == "graysl-events":
                continue
            raise ParseError(f"{path}:{lineno}: malformed header line {line!r}")
        key, value = parts
        if key == "graysl-events":
            continue
        if key not in _REQUIRED_KEYS and key not in _OPTIONAL_KEYS:
            raise ParseError(f"{path}:{lineno}: unknown header key {key!r}")
        try:
            meta[key] = int(value)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: header value for {key!r} is not an integer") from None
    for key in _REQUIRED_KEYS:
        if key not in meta:
            raise ParseError(f"{path}: missing header key {key!r}")
    return meta


def _build_stream(meta: dict[str, int], t, x, y, p, path: Path) -> EventStream:
    if len(t) and np.any(np.diff(t.astype(np.int64)) < 0):
        bad = int(np.argmax(np.diff(t.astype(np.int64)) < 0)) + 1
        raise ParseError(f"{path}: record {bad}: timestamps not sorted")
    if len(p) and not np.all(np.isin(p, (-1, 1))):
        bad = int(np.argmax(~np.isin(p, (-1, 1))))
        raise ParseError(f"{path}: record {bad}: polarity must be 1 or -1")
    if len(x) and (int(x.max()) >= meta["width"] or int(y.max()) >= meta["height"]):
        raise ParseError(f"{path}: event coordinates outside {meta['width']}x{meta['height']}")
    return EventStream(
        t=t, x=x, y=y, p=p,
        width=meta["width"], height=meta["height"],
        slide_period_us=meta["slide_period_us"],
        dark_interval_us=meta["dark_interval_us"],
        num_slides=meta["num_slides"],
        num_bits=meta.get("num_bits", 0),
        start_phase=meta.get("start_phase", 0),
    )


def _read_text(path: Path) -> EventStream:
    header_lines: list[tuple[int, str]] = []
    records: list[tuple[int, str]] = []
    for lineno, raw in enumerate(path.read_text().splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            header_lines.append((lineno, line[1:].strip()))
        else:
            records.append((lineno, line))
    meta = _parse_header(header_lines, path)
    n = len(records)
    t = np.empty(n, dtype=np.uint64)
    x = np.empty(n, dtype=np.uint16)
    y = np.empty(n, dtype=np.uint16)
    p = np.empty(n, dtype=np.int8)
    for i, (lineno, line) in enumerate(records):
        parts = line.split()
        if len(parts) != 4:
            raise ParseError(f"{path}:{lineno}: expected 't x y p', got {line!r}")
        try:
            ti, xi, yi, pi = (int(v) for v in parts)
        except ValueError:
            raise ParseError(f"{path}:{lineno}: non-integer field in {line!r}") from None
        if pi not in (1, -1):
            raise ParseError(f"{path}:{lineno}: polarity must be 1 or -1, got {pi}")
        if ti < 0 or xi < 0 or yi < 0:
            raise ParseError(f"{path}:{lineno}: negative field in {line!r}")
        t[i], x[i], y[i], p[i] = ti, xi, yi, pi
    return _build_stream(meta, t, x, y, p, path)


def _read_binary(path: Path) -> EventStream:
    data = path.read_bytes()
    if len(data) < 8 or data[:4] != BINARY_MAGIC:
        raise ParseError(f"{path}: not an event file (bad magic)")
    (header_len,) = struct.unpack_from("<I", data, 4)
    header_end = 8 + header_len
    if header_end > len(data):
        raise ParseError(f"{path}: truncated header")
    header_lines = [(i + 1, line) for i, line in
                    enumerate(data[8:header_end].decode("ascii").splitlines()) if line.strip()]
    meta = _parse_header(header_lines, path)
    body = data[header_end:]
    if len(body) % EVENT_DTYPE.itemsize:
        raise ParseError(
            f"{path}: record section is {len(body)} bytes, "
            f"not a multiple of {EVENT_DTYPE.itemsize}"
        )
    records = np.frombuffer(body, dtype=EVENT_DTYPE)
    return _build_stream(meta, records["t"].copy(), records["x"].copy(),
                         records["y"].copy(), records["p"].copy(), path)
