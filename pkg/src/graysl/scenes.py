"""Built-in ground-truth scenes: planes, steps, ramps, sphere caps, moving planes.

Disparities are integer-valued floats so noise-free decoding is exact; all
generators take the camera shape (height, width) and produce disparities well
inside [0, proj_width).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigurationError
from .simulator import Scene

SCENE_KINDS = ("plane", "step", "ramp", "sphere", "moving-plane")


def plane(shape: tuple[int, int], disparity: float) -> Scene:
    return Scene(disparity=np.full(shape, float(round(disparity)), dtype=np.float32))


def step(shape: tuple[int, int], d_near: float, d_far: float,
         split: float = 0.5, vertical_edge: bool = True) -> Scene:
    """Two fronto-parallel planes separated by a straight edge."""
    h, w = shape
    d = np.full(shape, float(round(d_far)), dtype=np.float32)
    if vertical_edge:
        d[:, int(w * split):] = round(d_near)
    else:
        d[int(h * split):, :] = round(d_near)
    return Scene(disparity=d)


def ramp(shape: tuple[int, int], d_min: float, d_max: float, horizontal: bool = True) -> Scene:
    """Disparity sweeps linearly from d_min to d_max, quantized to whole pixels."""
    h, w = shape
    n = w if horizontal else h
    line = np.rint(np.linspace(d_min, d_max, n)).astype(np.float32)
    d = np.tile(line, (h, 1)) if horizontal else np.tile(line[:, None], (1, w))
    return Scene(disparity=d)


def sphere_cap(shape: tuple[int, int], d_background: float, d_peak: float,
               radius: float | None = None,
               center: tuple[float, float] | None = None) -> Scene:
    """Spherical bulge on a flat background (disparity-space approximation)."""
    h, w = shape
    if radius is None:
        radius = 0.35 * min(h, w)
    if center is None:
        center = (w / 2.0, h / 2.0)
    ys, xs = np.mgrid[0:h, 0:w]
    r2 = ((xs - center[0]) ** 2 + (ys - center[1]) ** 2) / radius**2
    cap = np.sqrt(np.clip(1.0 - r2, 0.0, 1.0))
    d = np.rint(d_background + (d_peak - d_background) * cap).astype(np.float32)
    return Scene(disparity=d)


def translating_plane(shape: tuple[int, int], disparity: float,
                      dx_per_slide: int = 1, dy_per_slide: int = 0) -> Scene:
    """Plane that shifts by whole pixels between consecutive slides."""
    return Scene(
        disparity=np.full(shape, float(round(disparity)), dtype=np.float32),
        motion_per_slide=(dx_per_slide, dy_per_slide),
    )


def with_albedo_dropouts(scene: Scene, rng: np.random.Generator,
                         fraction: float = 0.005, low_albedo: float = 0.01) -> Scene:
    """Scatter isolated underexposed pixels whose log step stays below threshold."""
    albedo = (scene.albedo if scene.albedo is not None
              else np.ones_like(scene.disparity, dtype=np.float32)).copy()
    mask = rng.random(albedo.shape) < fraction
    albedo[mask] = low_albedo
    return Scene(disparity=scene.disparity, albedo=albedo,
                 motion_per_slide=scene.motion_per_slide)


def random_scene(kind: str, shape: tuple[int, int], rng: np.random.Generator,
                 d_min: int = 20, d_max: int = 200) -> Scene:
    """Randomized scene of the given kind with integer disparities in [d_min, d_max]."""
    if kind == "plane":
        return plane(shape, rng.integers(d_min, d_max + 1))
    if kind == "step":
        lo, hi = sorted(rng.integers(d_min, d_max + 1, size=2))
        return step(shape, d_near=hi, d_far=lo,
                    split=float(rng.uniform(0.25, 0.75)),
                    vertical_edge=bool(rng.integers(0, 2)))
    if kind == "ramp":
        lo, hi = sorted(rng.integers(d_min, d_max + 1, size=2))
        return ramp(shape, d_min=lo, d_max=hi, horizontal=bool(rng.integers(0, 2)))
    if kind == "sphere":
        lo, hi = sorted(rng.integers(d_min, d_max + 1, size=2))
        return sphere_cap(shape, d_background=lo, d_peak=hi)
    raise ConfigurationError(f"unknown scene kind {kind!r}")


def make_scene(kind: str, shape: tuple[int, int], d0: float, d1: float,
               motion_dx: int = 1) -> Scene:
    """CLI-facing factory; d0/d1 parameterize each kind."""
    if kind == "plane":
        return plane(shape, d0)
    if kind == "step":
        return step(shape, d_near=max(d0, d1), d_far=min(d0, d1))
    if kind == "ramp":
        return ramp(shape, d_min=min(d0, d1), d_max=max(d0, d1))
    if kind == "sphere":
        return sphere_cap(shape, d_background=min(d0, d1), d_peak=max(d0, d1))
    if kind == "moving-plane":
        return translating_plane(shape, d0, dx_per_slide=motion_dx)
    raise ConfigurationError(f"unknown scene kind {kind!r} (choose from {SCENE_KINDS})")
