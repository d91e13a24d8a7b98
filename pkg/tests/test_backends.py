"""The compiled extension and the numpy fallback must agree bit for bit."""

import numpy as np
import pytest

from graysl import backend as backend_mod

pytestmark = pytest.mark.skipif(
    "native" not in backend_mod.available_backends(),
    reason="compiled extension not built",
)


def random_case(seed, h=37, w=61, pw=53, ncodes=32):
    rng = np.random.default_rng(seed)
    cam = rng.integers(-1, ncodes, size=(h, w)).astype(np.int32)
    rp = np.full((h, pw), -1, dtype=np.int32)
    for y in range(h):
        cols = rng.choice(pw, size=ncodes, replace=False)
        rp[y, cols] = rng.permutation(ncodes)
    return cam, rp, ncodes


@pytest.mark.parametrize("seed", range(4))
def test_query_parity(seed):
    from graysl.matching import build_gx_map

    cam, rp, ncodes = random_case(seed)
    gx = build_gx_map(rp, ncodes)
    native = backend_mod.get_backend("native")
    python = backend_mod.get_backend("python")
    out_n = np.empty(cam.shape, dtype=np.float32)
    out_p = np.empty(cam.shape, dtype=np.float32)
    neg_n = native.query_disparity(cam, gx, out_n)
    neg_p = python.query_disparity(cam, gx, out_p)
    assert neg_n == neg_p
    assert np.array_equal(out_n, out_p, equal_nan=True)


@pytest.mark.parametrize("seed", range(4))
def test_search_parity(seed):
    cam, rp, _ = random_case(seed)
    native = backend_mod.get_backend("native")
    python = backend_mod.get_backend("python")
    out_n = np.empty(cam.shape, dtype=np.float32)
    out_p = np.empty(cam.shape, dtype=np.float32)
    res_n = native.search_disparity(cam, rp, out_n)
    res_p = python.search_disparity(cam, rp, out_p)
    assert res_n == res_p
    assert np.array_equal(out_n, out_p, equal_nan=True)


def test_search_parity_on_duplicate_rows():
    cam = np.array([[2, 1]], dtype=np.int32)
    rp = np.array([[1, 1, 2]], dtype=np.int32)
    native = backend_mod.get_backend("native")
    python = backend_mod.get_backend("python")
    out = np.empty(cam.shape, dtype=np.float32)
    assert native.search_disparity(cam, rp, out)[1] == 0
    assert python.search_disparity(cam, rp, out)[1] == 0


@pytest.mark.parametrize("seed", range(3))
def test_binarize_parity(seed):
    rng = np.random.default_rng(seed)
    n = 500
    xs = rng.integers(0, 31, size=n).astype(np.uint16)
    ys = rng.integers(0, 17, size=n).astype(np.uint16)
    ps = rng.choice([-1, 1], size=n).astype(np.int8)
    state_n = np.full((17, 31), -1, dtype=np.int8)
    state_p = state_n.copy()
    backend_mod.get_backend("native").binarize_events(xs, ys, ps, state_n)
    backend_mod.get_backend("python").binarize_events(xs, ys, ps, state_p)
    assert np.array_equal(state_n, state_p)


def test_backend_selection_api():
    assert backend_mod.active_backend_name() in backend_mod.available_backends()
    with pytest.raises(Exception):
        backend_mod.get_backend("gpu")


def test_backend_env_var_forces_fallback():
    import os
    import subprocess
    import sys

    env = dict(os.environ, GRAYSL_BACKEND="python")
    out = subprocess.run(
        [sys.executable, "-c", "import graysl; print(graysl.active_backend_name())"],
        capture_output=True, text=True, env=env, check=True,
    )
    assert out.stdout.strip() == "python"
