import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graysl import (
    ConfigurationError,
    GrayCodeConfig,
    IntegrityError,
    SensorModel,
    build_gx_map,
    depth_pipeline,
    generate_events,
    make_pattern_set,
    make_projector_code_image,
    query_disparity,
    search_disparity,
)
from graysl.simulator import EventStream
from tests.conftest import flat_scene


def test_gx_map_toy_example():
    """Row 3, column 2 carries code 1, so the table answers GX(3, 1) = 2."""
    rp = np.full((5, 4), -1, dtype=np.int32)
    rp[3, 2] = 1
    gx = build_gx_map(rp, num_columns=4)
    assert gx[3, 1] == 2
    # querying a camera pixel at x=5 on that row: d = 5 - GX(3, 1) = 3
    cam = np.full((4, 8), -1, dtype=np.int32)
    cam[3, 5] = 1
    disparity = query_disparity(cam, gx)
    assert disparity[3, 5] == 3.0
    assert np.all(np.isnan(disparity[cam == -1]))


def test_gx_identity_image():
    rp = np.tile(np.arange(6, dtype=np.int32), (3, 1))
    gx = build_gx_map(rp, num_columns=6)
    for v in range(6):
        assert np.all(gx[:, v] == v)


def test_gx_inversion_property(small_rig, config5):
    rp = make_projector_code_image(small_rig, config5)
    gx = build_gx_map(rp, config5.num_columns)
    ys, xs = np.nonzero(rp >= 0)
    assert np.all(gx[ys, rp[ys, xs]] == xs)


def test_gx_absent_code_reports_absent():
    rp = np.tile(np.arange(4, dtype=np.int32), (2, 1))
    gx = build_gx_map(rp, num_columns=8)  # codes 4..7 never appear
    assert np.all(gx[:, 4:] == -1)
    cam = np.full((2, 4), 5, dtype=np.int32)
    assert np.all(np.isnan(query_disparity(cam, gx)))


def test_gx_duplicate_raises_with_row():
    rp = np.tile(np.arange(4, dtype=np.int32), (3, 1))
    rp[1, 3] = 0  # code 0 twice in row 1
    with pytest.raises(IntegrityError, match="row 1"):
        build_gx_map(rp, num_columns=4)


def test_gx_duplicate_keep_first_keeps_leftmost():
    rp = np.array([[2, 0, 0, 1]], dtype=np.int32)
    gx = build_gx_map(rp, num_columns=4, on_duplicate="first")
    assert gx[0, 0] == 1  # leftmost of the duplicate pair
    assert gx[0, 2] == 0 and gx[0, 1] == 3


def test_search_duplicate_raises():
    rp = np.array([[0, 1, 1]], dtype=np.int32)
    cam = np.array([[1]], dtype=np.int32)
    with pytest.raises(IntegrityError, match="row 0"):
        search_disparity(cam, rp)


def test_query_row_range_precondition():
    gx = np.zeros((2, 4), dtype=np.int32)
    cam = np.zeros((3, 4), dtype=np.int32)
    with pytest.raises(ConfigurationError):
        query_disparity(cam, gx)
    with pytest.raises(ConfigurationError):
        search_disparity(cam, np.zeros((2, 4), dtype=np.int32))


def test_zero_disparity_scene_all_zero(small_rig, config5):
    rp = make_projector_code_image(small_rig, config5)
    gx = build_gx_map(rp, config5.num_columns)
    cam = rp.copy()  # camera sees exactly the projector image
    d = query_disparity(cam, gx)
    valid = cam >= 0
    assert np.all(d[valid] == 0.0)
    assert np.all(np.isnan(d[~valid]))
    s = search_disparity(cam, rp)
    assert np.array_equal(np.isnan(d), np.isnan(s))
    assert np.array_equal(d[valid], s[valid])


def test_negative_disparity_invalidated_both_paths():
    rp = np.tile(np.arange(8, dtype=np.int32), (1, 1))
    gx = build_gx_map(rp, num_columns=8)
    cam = np.full((1, 4), 6, dtype=np.int32)  # code 6 sits at column 6, right of all pixels
    assert np.all(np.isnan(query_disparity(cam, gx)))
    assert np.all(np.isnan(search_disparity(cam, rp)))


def random_code_image(rng, h, w, ncodes, invalid_frac=0.2):
    codes = rng.integers(0, ncodes, size=(h, w)).astype(np.int32)
    codes[rng.random((h, w)) < invalid_frac] = -1
    return codes


@pytest.mark.parametrize("seed", range(5))
def test_oracle_equivalence_randomized(seed, small_rig, config5):
    """The module's central law: lookup and scan agree pixel for pixel."""
    rng = np.random.default_rng(seed)
    rp = make_projector_code_image(small_rig, config5)
    gx = build_gx_map(rp, config5.num_columns)
    cam = random_code_image(rng, small_rig.cam_height, small_rig.cam_width,
                            config5.num_columns)
    q = query_disparity(cam, gx)
    s = search_disparity(cam, rp)
    assert np.array_equal(np.isnan(q), np.isnan(s))
    m = ~np.isnan(q)
    assert np.array_equal(q[m], s[m])


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31 - 1), st.integers(2, 4), st.integers(4, 30), st.integers(3, 12))
def test_oracle_equivalence_property(seed, bits, width, height):
    rng = np.random.default_rng(seed)
    ncodes = 1 << bits
    pw = max(width - 2, ncodes)
    # random row-unique projector image: a shuffled subset of codes per row
    rp = np.full((height, pw), -1, dtype=np.int32)
    for y in range(height):
        cols = rng.choice(pw, size=min(ncodes, pw), replace=False)
        codes = rng.permutation(ncodes)[: len(cols)]
        rp[y, cols] = codes
    gx = build_gx_map(rp, ncodes)
    cam = random_code_image(rng, height, width, ncodes, invalid_frac=0.3)
    q = query_disparity(cam, gx)
    s = search_disparity(cam, rp)
    assert np.array_equal(np.isnan(q), np.isnan(s))
    m = ~np.isnan(q)
    assert np.array_equal(q[m], s[m])


def test_repeated_queries_never_mutate_map(small_rig, config5):
    rp = make_projector_code_image(small_rig, config5)
    gx = build_gx_map(rp, config5.num_columns)
    snapshot = gx.copy()
    cam = random_code_image(np.random.default_rng(3), small_rig.cam_height,
                            small_rig.cam_width, config5.num_columns)
    for _ in range(3):
        query_disparity(cam, gx)
    assert np.array_equal(gx, snapshot)


# --- end-to-end pipeline ----------------------------------------------------------


def test_pipeline_plane_recovers_exact_depth(small_rig, config5, patterns5, timing):
    scene = flat_scene(small_rig.cam_shape, 12.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(rng_seed=0),
                             timing, num_slides=5)
    result = depth_pipeline(stream, small_rig, config5, keep_intermediates=True)
    assert len(result.depth_maps) == 1
    depth = result.depth_maps[0]
    expected = small_rig.focal_length_px * small_rig.baseline_mm / 12.0
    valid = np.isfinite(depth)
    assert np.all(depth[valid] == expected)
    # the valid set is exactly the pixels whose column is covered and ever lit
    xs = np.arange(small_rig.cam_width)[None, :]
    cols = xs - 12
    should_be_valid = (cols >= 1) & (cols < config5.num_columns)
    should_be_valid = np.broadcast_to(should_be_valid, depth.shape)
    assert np.array_equal(valid, should_be_valid)


def test_pipeline_never_lit_column_invalid_not_wrong(small_rig, config5, patterns5, timing):
    """The all-zero Gray code column receives no light in any pattern: the
    decoder must report it missing rather than guess."""
    scene = flat_scene(small_rig.cam_shape, 12.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(rng_seed=0),
                             timing, num_slides=5)
    result = depth_pipeline(stream, small_rig, config5, keep_intermediates=True)
    codes = result.code_images[0]
    col0_x = 12 + config5.column_offset  # camera pixel observing projector column offset+0
    assert np.all(codes[:, col0_x] == -1)


def test_pipeline_seven_slices_four_identical_maps(small_rig, timing):
    config = GrayCodeConfig(num_bits=4, num_columns=16)
    patterns = make_pattern_set(config, small_rig.proj_width, small_rig.proj_height)
    scene = flat_scene(small_rig.cam_shape, 9.0)
    stream = generate_events(scene, patterns, small_rig, SensorModel(rng_seed=1),
                             timing, num_slides=7)
    result = depth_pipeline(stream, small_rig, config)
    assert result.num_slices == 7
    assert len(result.depth_maps) == 4
    first = result.depth_maps[0]
    for depth in result.depth_maps[1:]:
        assert np.array_equal(np.isnan(first), np.isnan(depth))
        assert np.array_equal(first[np.isfinite(first)], depth[np.isfinite(depth)])


def test_pipeline_empty_stream(small_rig, config5):
    stream = EventStream.empty(small_rig.cam_width, small_rig.cam_height, 400, 80,
                               num_bits=5)
    result = depth_pipeline(stream, small_rig, config5)
    assert result.depth_maps == []
    assert result.num_slices == 0


def test_pipeline_fewer_slices_than_bits_yields_no_maps(small_rig, config5, patterns5, timing):
    scene = flat_scene(small_rig.cam_shape, 9.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(), timing,
                             num_slides=3)
    result = depth_pipeline(stream, small_rig, config5)
    assert result.num_slices == 3
    assert result.depth_maps == []  # window never warms up


def test_pipeline_backends_agree(small_rig, config5, patterns5, timing):
    from graysl import available_backends

    scene = flat_scene(small_rig.cam_shape, 9.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(), timing,
                             num_slides=5)
    maps = {}
    for backend in available_backends():
        maps[backend] = depth_pipeline(stream, small_rig, config5, backend=backend).depth_maps[0]
    values = list(maps.values())
    for other in values[1:]:
        assert np.array_equal(values[0], other, equal_nan=True)


def test_pipeline_bits_mismatch_raises(small_rig, config5, patterns5, timing):
    scene = flat_scene(small_rig.cam_shape, 4.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(), timing)
    with pytest.raises(ConfigurationError):
        depth_pipeline(stream, small_rig, GrayCodeConfig(num_bits=4, num_columns=16))


def test_pipeline_unknown_initial_state_mode(small_rig, config5, patterns5, timing):
    """Literal composition: silent pixels stay unknown until their first event,
    so the first windows are only decodable where the MSB plane lit them."""
    scene = flat_scene(small_rig.cam_shape, 12.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(rng_seed=0),
                             timing, num_slides=5)
    strict = depth_pipeline(stream, small_rig, config5, initial_state="unknown",
                            keep_intermediates=True)
    informed = depth_pipeline(stream, small_rig, config5, keep_intermediates=True)
    strict_valid = strict.code_images[0] >= 0
    informed_valid = informed.code_images[0] >= 0
    assert strict_valid.sum() < informed_valid.sum()
    # wherever the strict mode does decode, both agree
    assert np.array_equal(strict.code_images[0][strict_valid],
                          informed.code_images[0][strict_valid])


def test_pipeline_with_identity_remaps_matches_bare(small_rig, config5, patterns5, timing):
    from dataclasses import replace

    from graysl import identity_remap

    scene = flat_scene(small_rig.cam_shape, 12.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(rng_seed=0),
                             timing, num_slides=5)
    rig_remap = replace(
        small_rig,
        cam_remap=identity_remap(small_rig.cam_width, small_rig.cam_height),
        proj_remap=identity_remap(small_rig.proj_width, small_rig.proj_height),
    )
    bare = depth_pipeline(stream, small_rig, config5)
    remapped = depth_pipeline(stream, rig_remap, config5)
    a, b = bare.depth_maps[0], remapped.depth_maps[0]
    assert np.array_equal(np.isnan(a), np.isnan(b))
    assert np.array_equal(a[np.isfinite(a)], b[np.isfinite(b)])


@pytest.mark.parametrize("offset,msb_first,start_phase", [
    (6, True, 0),
    (0, False, 0),
    (3, True, 2),
    (5, False, 3),
])
def test_pipeline_exact_under_offset_bit_order_and_phase(small_rig, timing,
                                                         offset, msb_first, start_phase):
    """Column offset, plane ordering and starting phase must all round-trip."""
    config = GrayCodeConfig(num_bits=5, num_columns=32, column_offset=offset,
                            msb_first=msb_first)
    patterns = make_pattern_set(config, small_rig.proj_width, small_rig.proj_height)
    scene = flat_scene(small_rig.cam_shape, 11.0)
    stream = generate_events(scene, patterns, small_rig, SensorModel(rng_seed=4),
                             timing, num_slides=7, start_phase=start_phase)
    assert stream.start_phase == start_phase
    result = depth_pipeline(stream, small_rig, config, keep_intermediates=True)
    assert len(result.depth_maps) == 3
    xs = np.arange(small_rig.cam_width)[None, :]
    cols = xs - 11
    illuminated = (cols - offset >= 1) & (cols - offset < 32)
    illuminated = np.broadcast_to(illuminated, small_rig.cam_shape)
    for disparity in result.disparity_maps:
        assert np.all(disparity[illuminated] == 11.0)
    for codes in result.code_images:
        assert np.array_equal(codes[illuminated],
                              np.broadcast_to(cols - offset, codes.shape)[illuminated])


def test_pipeline_with_shifting_cam_remap(small_rig, config5, patterns5, timing):
    """A +1-column camera remap makes rectified pixel x carry pixel x+1's code,
    shrinking every disparity by exactly one pixel."""
    from dataclasses import replace

    from graysl import identity_remap

    remap = identity_remap(small_rig.cam_width, small_rig.cam_height)
    remap[..., 0] += 1.0
    rig = replace(small_rig, cam_remap=remap)
    scene = flat_scene(small_rig.cam_shape, 12.0)
    stream = generate_events(scene, patterns5, small_rig, SensorModel(rng_seed=0),
                             timing, num_slides=5)
    result = depth_pipeline(stream, rig, config5, keep_intermediates=True)
    disparity = result.disparity_maps[0]
    valid = np.isfinite(disparity)
    assert np.any(valid)
    assert np.all(disparity[valid] == 11.0)


def test_pipeline_moving_scene_emits_per_slide_maps(small_rig, timing):
    from graysl.scenes import translating_plane

    config = GrayCodeConfig(num_bits=4, num_columns=16)
    patterns = make_pattern_set(config, small_rig.proj_width, small_rig.proj_height)
    scene = translating_plane(small_rig.cam_shape, 9.0, dx_per_slide=1)
    stream = generate_events(scene, patterns, small_rig, SensorModel(rng_seed=1),
                             timing, num_slides=8)
    result = depth_pipeline(stream, small_rig, config)
    assert len(result.depth_maps) == 5  # 8 - 4 + 1
