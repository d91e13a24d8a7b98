"""Pure-numpy implementations of the hot kernels.

Used when the compiled graysl._native extension is unavailable; every function
matches the extension's signature and semantics bit for bit.
"""

import numpy as np


def query_disparity(cam_codes: np.ndarray, gx: np.ndarray, out: np.ndarray) -> int:
    """Constant-time per-pixel lookup: d = x - GX[y, code].

    Invalid codes, absent table entries and negative disparities map to NaN.
    Returns the number of pixels invalidated for negative disparity.
    """
    h, w = cam_codes.shape
    ncodes = gx.shape[1]
    valid = (cam_codes >= 0) & (cam_codes < ncodes)
    safe = np.where(valid, cam_codes, 0)
    xp = gx[np.arange(h)[:, None], safe]
    d = np.arange(w, dtype=np.int32)[None, :] - xp
    found = valid & (xp >= 0)
    neg = int(np.count_nonzero(found & (d < 0)))
    good = found & (d >= 0)
    out[...] = np.where(good, d, np.nan)
    return neg


def search_disparity(cam_codes: np.ndarray, rp: np.ndarray, out: np.ndarray):
    """Baseline matcher: full linear scan of the projector row per pixel.

    Returns (negative_disparity_count, first_row_with_duplicate_codes);
    the duplicate row is -1 when per-row uniqueness holds.
    """
    h, w = cam_codes.shape
    xs = np.arange(w)
    out[...] = np.nan
    neg = 0
    for y in range(h):
        codes = cam_codes[y]
        valid = codes >= 0
        eq = codes[:, None] == rp[y][None, :]
        eq[~valid] = False
        counts = eq.sum(axis=1)
        if np.any(counts > 1):
            return neg, y
        found = counts == 1
        col = eq.argmax(axis=1)
        d = xs - col
        neg += int(np.count_nonzero(found & (d < 0)))
        good = found & (d >= 0)
        out[y, good] = d[good]
    return neg, -1


def binarize_events(xs: np.ndarray, ys: np.ndarray, ps: np.ndarray, state: np.ndarray) -> None:
    """Scatter events into a state image in stream order; the last write wins."""
    # numpy fancy assignment applies duplicates in index order: last wins.
    state[ys, xs] = (ps > 0).astype(np.int8)
