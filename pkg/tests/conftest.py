import numpy as np
import pytest

from graysl import GrayCodeConfig, ProjectionTiming, RectifiedRig, SensorModel, make_pattern_set


@pytest.fixture
def small_rig() -> RectifiedRig:
    """64x24 camera, 40-column projector: everything fits in a glance."""
    return RectifiedRig(
        focal_length_px=500.0,
        baseline_mm=40.0,
        cam_width=64,
        cam_height=24,
        proj_width=40,
        proj_height=24,
    )


@pytest.fixture
def config5() -> GrayCodeConfig:
    return GrayCodeConfig(num_bits=5, num_columns=32)


@pytest.fixture
def patterns5(small_rig, config5):
    return make_pattern_set(config5, small_rig.proj_width, small_rig.proj_height)


@pytest.fixture
def timing() -> ProjectionTiming:
    return ProjectionTiming(slide_period_us=400, dark_interval_us=80)


@pytest.fixture
def quiet_sensor() -> SensorModel:
    return SensorModel(rng_seed=0, jitter_bound_us=0)


def flat_scene(shape, disparity):
    from graysl import Scene

    return Scene(disparity=np.full(shape, float(disparity), dtype=np.float32))
