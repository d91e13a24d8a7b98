"""Synthetic event streams from projected stripe patterns.

The virtual projector runs a fixed slide period with a dark interval between
consecutive slides; slide k's illumination starts at

    onset_k = dark_interval_us + k * slide_period_us.

Per pixel and slide the intensity steps from its previous illuminated value
down to ambient (the dark interval) and then up to the new illuminated value.
Each log-intensity step that crosses a sensor threshold emits one event; all
events of a slide are stamped at its illumination onset plus a bounded,
seeded timestamp jitter. The dark step and the relighting step of one pixel
share the slide's per-pixel jitter draw and are emitted negative-first, so
the decoded result depends only on slice membership, never on jitter values.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .geometry import INVALID_CODE, RectifiedRig
from .graycode import PatternSet

EVENT_DTYPE = np.dtype([("t", "<u8"), ("x", "<u2"), ("y", "<u2"), ("p", "i1")])


@dataclass(frozen=True, eq=False)
class Scene:
    """Ground truth observed by the virtual camera.

    disparity: (cam_height, cam_width) float, NaN invalid, else in [0, proj_width)
    albedo:    per-pixel reflectance in (0, 1]; None means 1 everywhere
    motion_per_slide: (dx, dy) whole-pixel translation applied between slides
    """

    disparity: np.ndarray
    albedo: np.ndarray | None = None
    motion_per_slide: tuple[int, int] = (0, 0)

    def __post_init__(self):
        d = self.disparity
        finite = np.isfinite(d)
        if np.any(d[finite] < 0):
            raise ConfigurationError("scene disparities must be >= 0")
        if self.albedo is not None:
            if self.albedo.shape != d.shape:
                raise ConfigurationError("albedo shape must match disparity shape")
            if np.any((self.albedo <= 0) | (self.albedo > 1)):
                raise ConfigurationError("albedo values must lie in (0, 1]")

    def state_at(self, slide_index: int) -> tuple[np.ndarray, np.ndarray]:
        """(disparity, albedo) after `slide_index` motion steps; exposed pixels invalid."""
        albedo = self.albedo if self.albedo is not None else np.ones_like(self.disparity, dtype=np.float32)
        dx, dy = self.motion_per_slide
        if slide_index == 0 or (dx == 0 and dy == 0):
            return self.disparity, albedo
        shift = (dx * slide_index, dy * slide_index)
        return (_shift2d(self.disparity, *shift, fill=np.nan),
                _shift2d(albedo, *shift, fill=np.nan))


def _shift2d(arr: np.ndarray, dx: int, dy: int, fill) -> np.ndarray:
    out = np.full_like(arr, fill)
    h, w = arr.shape
    src_x = slice(max(0, -dx), min(w, w - dx))
    dst_x = slice(max(0, dx), min(w, w + dx))
    src_y = slice(max(0, -dy), min(h, h - dy))
    dst_y = slice(max(0, dy), min(h, h + dy))
    out[dst_y, dst_x] = arr[src_y, src_x]
    return out


@dataclass(frozen=True)
class SensorModel:
    """Event camera response: log-intensity thresholds plus timestamp jitter."""

    c_positive: float = 0.2
    c_negative: float = -0.2
    jitter_bound_us: int = 0
    ambient_level: float = 0.1
    projector_on_level: float = 1.0
    rng_seed: int = 0

    def __post_init__(self):
        if self.c_positive <= 0:
            raise ConfigurationError("c_positive must be > 0")
        if self.c_negative >= 0:
            raise ConfigurationError("c_negative must be < 0")
        if self.jitter_bound_us < 0:
            raise ConfigurationError("jitter_bound_us must be >= 0")
        if self.ambient_level < 0:
            raise ConfigurationError("ambient_level must be >= 0")
        if self.projector_on_level <= self.ambient_level:
            raise ConfigurationError("projector_on_level must exceed ambient_level")


@dataclass(frozen=True)
class ProjectionTiming:
    slide_period_us: int = 400
    dark_interval_us: int = 80  # default 20% of the slide period

    def __post_init__(self):
        if self.slide_period_us <= self.dark_interval_us:
            raise ConfigurationError("slide_period_us must exceed dark_interval_us")
        if self.dark_interval_us <= 0:
            raise ConfigurationError("dark_interval_us must be > 0")


@dataclass(frozen=True, eq=False)
class EventStream:
    """Time-sorted event arrays plus the projection metadata needed to decode them."""

    t: np.ndarray  # (n,) uint64 microseconds, nondecreasing
    x: np.ndarray  # (n,) uint16
    y: np.ndarray  # (n,) uint16
    p: np.ndarray  # (n,) int8, +1 or -1
    width: int
    height: int
    slide_period_us: int
    dark_interval_us: int
    num_slides: int
    num_bits: int = 0  # 0 = unknown
    start_phase: int = 0

    def __post_init__(self):
        for name, dtype in (("t", np.uint64), ("x", np.uint16), ("y", np.uint16), ("p", np.int8)):
            arr = np.ascontiguousarray(getattr(self, name), dtype=dtype)
            object.__setattr__(self, name, arr)
        n = len(self.t)
        if not (len(self.x) == len(self.y) == len(self.p) == n):
            raise ConfigurationError("event arrays must have equal length")
        if n:
            if np.any(np.diff(self.t.astype(np.int64)) < 0):
                raise ConfigurationError("timestamps must be nondecreasing")
            if int(self.x.max()) >= self.width or int(self.y.max()) >= self.height:
                raise ConfigurationError("event coordinates outside sensor bounds")
            if not np.all(np.isin(np.unique(self.p), (-1, 1))):
                raise ConfigurationError("polarity values must be +1 or -1")

    def __len__(self) -> int:
        return len(self.t)

    @classmethod
    def empty(cls, width, height, slide_period_us, dark_interval_us,
              num_slides=0, num_bits=0, start_phase=0):
        return cls(
            t=np.empty(0, np.uint64), x=np.empty(0, np.uint16),
            y=np.empty(0, np.uint16), p=np.empty(0, np.int8),
            width=width, height=height,
            slide_period_us=slide_period_us, dark_interval_us=dark_interval_us,
            num_slides=num_slides, num_bits=num_bits, start_phase=start_phase,
        )


def project_slide(scene: Scene, pattern: np.ndarray, rig: RectifiedRig,
                  slide_index: int = 0) -> np.ndarray:
    """Warp one projector bit plane into the camera view.

    In rectified geometry a camera pixel (x, y) with disparity d observes
    projector pixel (x - d, y). Returns int8 {1, 0} with -1 where the scene
    is invalid or the source column/row falls outside the projector.
    """
    disparity, _ = scene.state_at(slide_index)
    if disparity.shape != rig.cam_shape:
        raise ConfigurationError(
            f"scene disparity shape {disparity.shape} does not match camera {rig.cam_shape}"
        )
    h, w = disparity.shape
    finite = np.isfinite(disparity)
    d = np.rint(np.where(finite, disparity, 0)).astype(np.int64)
    xs = np.arange(w, dtype=np.int64)[None, :]
    src_col = xs - d
    ys = np.arange(h, dtype=np.int64)[:, None]
    ok = finite & (src_col >= 0) & (src_col < rig.proj_width) & (ys < rig.proj_height)
    out = np.full((h, w), INVALID_CODE, dtype=np.int8)
    yy = np.broadcast_to(ys, (h, w))
    out[ok] = pattern[yy[ok], src_col[ok]]
    return out


def generate_events(scene: Scene, patterns: PatternSet, rig: RectifiedRig,
                    sensor: SensorModel, timing: ProjectionTiming = ProjectionTiming(),
                    num_slides: int | None = None, start_phase: int = 0) -> EventStream:
    """Simulate the projector/camera loop and return the time-sorted stream.

    Slide k projects bit plane (start_phase + k) mod num_bits, so streams
    longer than one code cycle repeat the plane sequence.
    """
    if sensor.jitter_bound_us * 2 >= timing.dark_interval_us:
        raise ConfigurationError(
            f"jitter_bound_us {sensor.jitter_bound_us} must be < dark_interval_us/2 "
            f"({timing.dark_interval_us / 2:g}); events could cross segmentation boundaries"
        )
    num_bits = patterns.config.num_bits
    if num_slides is None:
        num_slides = num_bits
    h, w = rig.cam_shape
    rng = np.random.default_rng(sensor.rng_seed)
    jb = int(sensor.jitter_bound_us)
    amb = sensor.ambient_level
    on = sensor.projector_on_level

    parts_t, parts_x, parts_y, parts_p = [], [], [], []
    prev_refires = np.zeros((h, w), dtype=bool)
    for k in range(num_slides):
        plane = (start_phase + k) % num_bits
        lit = project_slide(scene, patterns.patterns[plane], rig, slide_index=k) == 1
        _, albedo = scene.state_at(k)
        level = np.where(lit, amb + np.nan_to_num(albedo, nan=0.0) * (on - amb), amb)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_step = np.log(level / amb) if amb > 0 else np.where(level > 0, np.inf, np.nan)
        log_step = np.nan_to_num(log_step, nan=0.0, posinf=np.inf)
        fires_pos = log_step > sensor.c_positive
        fires_neg = log_step > -sensor.c_negative  # log(amb/level) < c_negative

        if jb > 0:
            sigma = rng.integers(-jb, jb + 1, size=(h, w), dtype=np.int64)
        else:
            sigma = None
        onset = timing.dark_interval_us + k * timing.slide_period_us

        slide_t, slide_x, slide_y, slide_p = [], [], [], []
        for mask, polarity in ((prev_refires, -1), (fires_pos, 1)):
            ys, xs = np.nonzero(mask)
            if len(ys) == 0:
                continue
            t = np.full(len(ys), onset, dtype=np.int64)
            if sigma is not None:
                t += sigma[ys, xs]
            slide_t.append(t)
            slide_x.append(xs.astype(np.uint16))
            slide_y.append(ys.astype(np.uint16))
            slide_p.append(np.full(len(ys), polarity, dtype=np.int8))
        if slide_t:
            # sort the slide block by timestamp, keeping emission order for
            # ties: a pixel's dark-step event stays ahead of its relighting
            t_blk = np.concatenate(slide_t)
            order = np.argsort(t_blk, kind="stable")
            parts_t.append(t_blk[order])
            parts_x.append(np.concatenate(slide_x)[order])
            parts_y.append(np.concatenate(slide_y)[order])
            parts_p.append(np.concatenate(slide_p)[order])

        prev_refires = lit & fires_neg

    if parts_t:
        t = np.concatenate(parts_t).astype(np.uint64)
        x = np.concatenate(parts_x)
        y = np.concatenate(parts_y)
        p = np.concatenate(parts_p)
    else:
        t = np.empty(0, np.uint64)
        x = np.empty(0, np.uint16)
        y = np.empty(0, np.uint16)
        p = np.empty(0, np.int8)
    return EventStream(
        t=t, x=x, y=y, p=p, width=w, height=h,
        slide_period_us=timing.slide_period_us,
        dark_interval_us=timing.dark_interval_us,
        num_slides=num_slides, num_bits=num_bits, start_phase=start_phase,
    )
