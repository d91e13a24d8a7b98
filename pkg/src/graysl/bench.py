"""Runtime benchmark: GX-map lookup versus linear epipolar search.

Both matchers consume identical code images with the same single-threaded
inner-loop setting, so the reported ratio measures the algorithmic difference.
Map construction is excluded from per-query timing and reported separately.
Every available kernel backend (compiled and pure-python) is measured, which
doubles as the compiled-versus-fallback comparison.
"""

from __future__ import annotations

import platform
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from . import backend as _backend
from .geometry import RectifiedRig
from .graycode import GrayCodeConfig
from .matching import build_gx_map, make_projector_code_image, query_disparity, search_disparity


@dataclass(frozen=True)
class BenchEntry:
    scene: str
    backend: str
    query_s: float
    search_s: float
    pixels: int
    valid_pixels: int

    @property
    def speedup(self) -> float:
        return self.search_s / self.query_s


@dataclass
class BenchReport:
    entries: list[BenchEntry] = field(default_factory=list)
    gx_build_s: float = 0.0
    repeats: int = 5
    environment: dict[str, str] = field(default_factory=dict)

    def speedups(self, backend: str) -> list[float]:
        return [e.speedup for e in self.entries if e.backend == backend]


def _cpu_model() -> str:
    try:
        with open("/proc/cpuinfo") as fh:
            for line in fh:
                if line.lower().startswith("model name"):
                    return line.split(":", 1)[1].strip()
    except OSError:
        pass
    return platform.processor() or "unknown"


def collect_environment() -> dict[str, str]:
    return {
        "cpu": _cpu_model(),
        "platform": platform.platform(),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "kernel_backends": ",".join(_backend.available_backends()),
        "default_backend": _backend.active_backend_name(),
    }


def _median_time(fn, repeats: int) -> float:
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times)


def run_bench(code_images: list[tuple[str, np.ndarray]], rig: RectifiedRig,
              config: GrayCodeConfig, repeats: int = 5,
              backends: tuple[str, ...] | None = None) -> BenchReport:
    """Time both disparity methods on each code image; median of `repeats` runs."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    report = BenchReport(repeats=repeats, environment=collect_environment())
    t0 = time.perf_counter()
    rp = make_projector_code_image(rig, config)
    gx = build_gx_map(rp, config.num_columns)
    report.gx_build_s = time.perf_counter() - t0
    if backends is None:
        backends = _backend.available_backends()
    for backend in backends:
        for name, codes in code_images:
            codes = np.ascontiguousarray(codes, dtype=np.int32)
            query_s = _median_time(lambda: query_disparity(codes, gx, backend=backend), repeats)
            search_s = _median_time(lambda: search_disparity(codes, rp, backend=backend), repeats)
            report.entries.append(BenchEntry(
                scene=name, backend=backend,
                query_s=query_s, search_s=search_s,
                pixels=int(codes.size),
                valid_pixels=int(np.count_nonzero(codes >= 0)),
            ))
    return report


def format_bench(report: BenchReport) -> str:
    lines = []
    env = report.environment
    lines.append(f"cpu: {env.get('cpu', 'unknown')}")
    lines.append(f"platform: {env.get('platform', 'unknown')}  python {env.get('python', '?')}"
                 f"  numpy {env.get('numpy', '?')}")
    lines.append(f"kernel backends: {env.get('kernel_backends', '?')}"
                 f" (default {env.get('default_backend', '?')})")
    lines.append(f"gx-map build: {report.gx_build_s * 1e3:.2f} ms (once per configuration)")
    lines.append(f"timings: median of {report.repeats} runs, single-threaded")
    header = f"{'scene':<16} {'backend':<8} {'query [s]':>12} {'search [s]':>12} {'speedup':>9}"
    lines.append(header)
    lines.append("-" * len(header))
    for e in report.entries:
        lines.append(f"{e.scene:<16} {e.backend:<8} {e.query_s:>12.6f} "
                     f"{e.search_s:>12.4f} {e.speedup:>8.1f}x")
    return "\n".join(lines)


def bench_keyvalues(report: BenchReport) -> str:
    lines = [
        f"gx_build_s={report.gx_build_s!r}",
        f"repeats={report.repeats}",
    ]
    for key, value in report.environment.items():
        lines.append(f"env_{key}={value}")
    for e in report.entries:
        prefix = f"{e.backend}.{e.scene}"
        lines.append(f"{prefix}.query_s={e.query_s!r}")
        lines.append(f"{prefix}.search_s={e.search_s!r}")
        lines.append(f"{prefix}.speedup={e.speedup!r}")
    return "\n".join(lines)
