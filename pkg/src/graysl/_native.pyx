# cython: boundscheck=False, wraparound=False, nonecheck=False, cdivision=True
"""Compiled inner loops: disparity lookup, epipolar row scan, event scatter.

Signatures mirror graysl._fallback exactly; graysl.backend picks one at import.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport NAN

cnp.import_array()


def query_disparity(const cnp.int32_t[:, ::1] cam_codes,
                    const cnp.int32_t[:, ::1] gx,
                    cnp.float32_t[:, ::1] out):
    """Constant-time per-pixel lookup: d = x - GX[y, code].

    Invalid codes, absent table entries and negative disparities map to NaN.
    Returns the number of pixels invalidated for negative disparity.
    """
    cdef Py_ssize_t h = cam_codes.shape[0]
    cdef Py_ssize_t w = cam_codes.shape[1]
    cdef Py_ssize_t ncodes = gx.shape[1]
    cdef Py_ssize_t x, y
    cdef cnp.int32_t v, xp
    cdef long long neg = 0
    with nogil:
        for y in range(h):
            for x in range(w):
                v = cam_codes[y, x]
                if v < 0 or v >= ncodes:
                    out[y, x] = NAN
                    continue
                xp = gx[y, v]
                if xp < 0:
                    out[y, x] = NAN
                elif x < xp:
                    out[y, x] = NAN
                    neg += 1
                else:
                    out[y, x] = <cnp.float32_t> (x - xp)
    return int(neg)


def search_disparity(const cnp.int32_t[:, ::1] cam_codes,
                     const cnp.int32_t[:, ::1] rp,
                     cnp.float32_t[:, ::1] out):
    """Baseline matcher: full linear scan of the projector row per pixel.

    Returns (negative_disparity_count, first_row_with_duplicate_codes);
    the duplicate row is -1 when per-row uniqueness holds.
    """
    cdef Py_ssize_t h = cam_codes.shape[0]
    cdef Py_ssize_t w = cam_codes.shape[1]
    cdef Py_ssize_t pw = rp.shape[1]
    cdef Py_ssize_t x, y, i, match_col, nmatch
    cdef cnp.int32_t v
    cdef long long neg = 0
    cdef Py_ssize_t dup_row = -1
    with nogil:
        for y in range(h):
            for x in range(w):
                v = cam_codes[y, x]
                if v < 0:
                    out[y, x] = NAN
                    continue
                nmatch = 0
                match_col = -1
                for i in range(pw):
                    if rp[y, i] == v:
                        nmatch += 1
                        match_col = i
                if nmatch == 0:
                    out[y, x] = NAN
                elif nmatch > 1:
                    dup_row = y
                    break
                elif x < match_col:
                    out[y, x] = NAN
                    neg += 1
                else:
                    out[y, x] = <cnp.float32_t> (x - match_col)
            if dup_row >= 0:
                break
    return int(neg), int(dup_row)


def binarize_events(const cnp.uint16_t[::1] xs,
                    const cnp.uint16_t[::1] ys,
                    const cnp.int8_t[::1] ps,
                    cnp.int8_t[:, ::1] state):
    """Scatter events into a state image in stream order; the last write wins."""
    cdef Py_ssize_t n = xs.shape[0]
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            state[ys[i], xs[i]] = 1 if ps[i] > 0 else 0
