"""Gaze-to-hazard hit testing and dwell segmentation.

"Looking at" a hazard means the gaze ray passes within a small angular
cone of the AOI center, with the center in front of the eye.  The cone
test is scale-free: only the angle decides, never the distance.  When
several hazards fall inside the cone the nearest center wins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .scene import TrialLayout

DEFAULT_CONE_HALF_ANGLE_DEG = 2.0
# Bridges one or two dropped frames at a 120 Hz gaze rate.
DEFAULT_GAP_TOLERANCE = 0.100

_UNIT_TOL = 1e-6


@dataclass(frozen=True)
class GazeSample:
    """One gaze ray: eye position and unit view direction."""

    t: float
    origin: tuple[float, float, float]
    direction: tuple[float, float, float]

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > _UNIT_TOL:
            raise ValueError(f"gaze direction must be unit length, |d|={norm!r}")


@dataclass(frozen=True)
class GazeHit:
    """Hit-test outcome for one sample; hazard_id is None on a miss."""

    t: float
    hazard_id: Optional[int]
    distance: Optional[float]


@dataclass(frozen=True)
class Dwell:
    """A maximal run of consecutive hits on one hazard."""

    hazard_id: int
    start: float
    end: float
    sample_count: int

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError("dwell end before start")
        if self.sample_count < 1:
            raise ValueError("dwell needs at least one sample")


def cast_gaze_track(
    times: np.ndarray,
    origins: np.ndarray,
    directions: np.ndarray,
    layout: TrialLayout,
    cone_half_angle_deg: float = DEFAULT_CONE_HALF_ANGLE_DEG,
) -> tuple[np.ndarray, np.ndarray]:
    """Hit-test a whole gaze track against one trial layout.

    times: (n,), origins: (n, 3) or (3,), directions: (n, 3).
    Returns (hazard_ids, distances): hazard_ids is (n,) int64 with the
    1-based hazard id or -1 for a miss; distances is (n,) float64
    (origin-to-center, nan on miss).
    """
    if not (0.0 < cone_half_angle_deg <= 10.0):
        raise ValueError(f"cone half-angle must be in (0, 10] degrees, got {cone_half_angle_deg}")
    times = np.asarray(times, dtype=np.float64)
    directions = np.asarray(directions, dtype=np.float64)
    origins = np.asarray(origins, dtype=np.float64)
    if origins.ndim == 1:
        origins = np.broadcast_to(origins, directions.shape)
    cos_half = math.cos(math.radians(cone_half_angle_deg))
    idx, dist = _kernels.cast_rays(origins, directions, layout.centers(), cos_half)
    ids = np.where(idx >= 0, idx + 1, -1).astype(np.int64)
    return ids, dist


def cast_gaze_sample(
    sample: GazeSample,
    layout: TrialLayout,
    cone_half_angle_deg: float = DEFAULT_CONE_HALF_ANGLE_DEG,
) -> GazeHit:
    """Hit-test a single gaze sample (misses return hazard_id=None)."""
    ids, dist = cast_gaze_track(
        np.array([sample.t]),
        np.array([sample.origin]),
        np.array([sample.direction]),
        layout,
        cone_half_angle_deg,
    )
    if ids[0] < 0:
        return GazeHit(t=sample.t, hazard_id=None, distance=None)
    return GazeHit(t=sample.t, hazard_id=int(ids[0]), distance=float(dist[0]))


def segment_dwells(
    hits: Sequence[GazeHit],
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE,
) -> list[Dwell]:
    """Group a time-sorted hit sequence into dwells.

    Consecutive hits on the same hazard merge while the gap between them
    stays within gap_tolerance; a hazard change or a larger gap starts a
    new dwell.  Misses never join a dwell (they break one only through
    the time gap they create).
    """
    ids = np.array([h.hazard_id if h.hazard_id is not None else -1 for h in hits], dtype=np.int64)
    times = np.array([h.t for h in hits], dtype=np.float64)
    return segment_dwell_arrays(ids, times, gap_tolerance)


def segment_dwell_arrays(
    ids: np.ndarray,
    times: np.ndarray,
    gap_tolerance: float = DEFAULT_GAP_TOLERANCE,
) -> list[Dwell]:
    """Array-level dwell segmentation (ids use -1 for misses)."""
    run_ids, start_t, end_t, counts = _kernels.segment_runs(ids, times, gap_tolerance)
    return [
        Dwell(hazard_id=int(h), start=float(s), end=float(e), sample_count=int(c))
        for h, s, e, c in zip(run_ids, start_t, end_t, counts)
    ]
