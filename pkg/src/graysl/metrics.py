"""Depth map evaluation: RMSE over solid regions and fill rate.

The error threshold defaults to 1% of the reference map's mean depth. Solid
region = pixels where both maps report depth and agree within the threshold;
RMSE is computed there. Fill rate = solid pixels / reference valid pixels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError


@dataclass(frozen=True)
class MetricReport:
    rmse_mm: float  # NaN when no solid pixels exist
    fill_rate: float
    solid_pixel_count: int
    threshold_mm: float
    mean_depth_mm: float

    @property
    def rmse_defined(self) -> bool:
        return self.solid_pixel_count > 0


def compute_metrics(candidate: np.ndarray, reference: np.ndarray,
                    threshold_mm: float | None = None) -> MetricReport:
    """Compare a candidate depth map against a reference.

    threshold_mm=None selects the automatic 1%-of-mean-reference-depth rule.
    """
    if candidate.shape != reference.shape:
        raise ConfigurationError(
            f"candidate shape {candidate.shape} != reference shape {reference.shape}"
        )
    ref_valid = np.isfinite(reference)
    ref_count = int(np.count_nonzero(ref_valid))
    mean_depth = float(reference[ref_valid].mean()) if ref_count else math.nan
    if threshold_mm is None:
        threshold_mm = 0.01 * mean_depth if ref_count else math.nan
    both = ref_valid & np.isfinite(candidate)
    err = np.abs(candidate.astype(np.float64) - reference.astype(np.float64))
    solid = both & (err <= threshold_mm)
    solid_count = int(np.count_nonzero(solid))
    if solid_count:
        rmse = float(np.sqrt(np.mean(err[solid] ** 2)))
    else:
        rmse = math.nan
    fill_rate = solid_count / ref_count if ref_count else 0.0
    return MetricReport(
        rmse_mm=rmse,
        fill_rate=fill_rate,
        solid_pixel_count=solid_count,
        threshold_mm=float(threshold_mm),
        mean_depth_mm=mean_depth,
    )


def format_report(report: MetricReport) -> str:
    lines = [
        f"mean depth      : {report.mean_depth_mm:.3f} mm",
        f"error threshold : {report.threshold_mm:.3f} mm",
        f"solid pixels    : {report.solid_pixel_count}",
        f"fill rate       : {report.fill_rate:.4f}",
    ]
    if report.rmse_defined:
        lines.append(f"rmse (solid)    : {report.rmse_mm:.4f} mm")
    else:
        lines.append("rmse (solid)    : undefined (no solid pixels)")
    return "\n".join(lines)


def report_keyvalues(report: MetricReport) -> str:
    """Machine-readable key=value lines for CI assertions."""
    return "\n".join([
        f"rmse_mm={report.rmse_mm!r}",
        f"rmse_defined={int(report.rmse_defined)}",
        f"fill_rate={report.fill_rate!r}",
        f"solid_pixel_count={report.solid_pixel_count}",
        f"threshold_mm={report.threshold_mm!r}",
        f"mean_depth_mm={report.mean_depth_mm!r}",
    ])
