"""Numpy implementations of the hot kernels.

Drop-in fallback for the compiled extension.  Both backends must produce
bit-identical outputs: the arithmetic below is written so every float op
(order of sums, comparisons without division) matches the C loops.
"""

from __future__ import annotations

import numpy as np

BACKEND = "pure"

# Below this origin-to-center distance a hazard cannot be hit (direction
# to the center is undefined).
MIN_HIT_DISTANCE = 1e-9


def cast_rays(origins, directions, centers, cos_half_angle):
    """Classify each gaze ray against a set of sphere-center AOIs.

    origins: (n, 3) ray origins, meters.
    directions: (n, 3) unit ray directions.
    centers: (h, 3) AOI centers.
    cos_half_angle: cosine of the acceptance cone half-angle.

    Returns (hit, dist): hit is (n,) int64 with the 0-based index of the
    nearest accepted center or -1; dist is (n,) float64 origin-to-center
    distance for hits, nan for misses.  A center is accepted when it lies
    in front of the origin and the ray-to-center angle is within the cone
    (tested as dot >= cos * d to avoid a division).  Distance ties go to
    the lower center index.
    """
    origins = np.ascontiguousarray(origins, dtype=np.float64)
    directions = np.ascontiguousarray(directions, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    n = origins.shape[0]
    hit = np.full(n, -1, dtype=np.int64)
    dist = np.full(n, np.nan, dtype=np.float64)
    if n == 0 or centers.shape[0] == 0:
        return hit, dist

    # (n, h, 3) relative vectors; sums over the last axis of length 3 are
    # spelled out as ((x + y) + z), the same order as the compiled loop
    # (einsum makes no such ordering promise).
    rel = centers[np.newaxis, :, :] - origins[:, np.newaxis, :]
    rx, ry, rz = rel[..., 0], rel[..., 1], rel[..., 2]
    ux = directions[:, np.newaxis, 0]
    uy = directions[:, np.newaxis, 1]
    uz = directions[:, np.newaxis, 2]
    dot = (rx * ux + ry * uy) + rz * uz
    d = np.sqrt((rx * rx + ry * ry) + rz * rz)
    ok = (d > MIN_HIT_DISTANCE) & (dot > 0.0) & (dot >= cos_half_angle * d)

    cand = np.where(ok, d, np.inf)
    best = np.argmin(cand, axis=1)
    rows = np.arange(n)
    found = np.isfinite(cand[rows, best])
    hit[found] = best[found]
    dist[found] = d[rows[found], best[found]]
    return hit, dist


def segment_runs(ids, times, gap_tolerance):
    """Split a hit sequence into maximal same-id runs.

    ids: (n,) int64, AOI index per sample, -1 for a miss.
    times: (n,) float64, non-decreasing sample times.
    gap_tolerance: max gap (seconds) between consecutive hits of one run.

    Misses are skipped: they never join a run and never break one by
    themselves (a long stretch of misses breaks a run via the time gap).
    Returns (run_ids, start_t, end_t, counts), one entry per run.
    """
    ids = np.ascontiguousarray(ids, dtype=np.int64)
    times = np.ascontiguousarray(times, dtype=np.float64)
    keep = ids >= 0
    hid = ids[keep]
    ht = times[keep]
    m = hid.shape[0]
    if m == 0:
        return (
            np.empty(0, dtype=np.int64),
            np.empty(0, dtype=np.float64),
            np.empty(0, dtype=np.float64),
            np.empty(0, dtype=np.int64),
        )
    new_run = np.empty(m, dtype=bool)
    new_run[0] = True
    new_run[1:] = (hid[1:] != hid[:-1]) | (ht[1:] - ht[:-1] > gap_tolerance)
    starts = np.flatnonzero(new_run)
    ends = np.empty_like(starts)
    ends[:-1] = starts[1:]
    ends[-1] = m
    return hid[starts], ht[starts], ht[ends - 1], (ends - starts).astype(np.int64)


def latest_in_window(press_times, hit_times, window):
    """For each press, index of the latest hit in [t_press - window, t_press].

    hit_times must be sorted ascending (hazard hits only, misses already
    removed).  Returns (p,) int64 indices into hit_times, -1 when the
    window holds no hit.  Both window ends are closed.
    """
    press_times = np.ascontiguousarray(press_times, dtype=np.float64)
    hit_times = np.ascontiguousarray(hit_times, dtype=np.float64)
    idx = np.searchsorted(hit_times, press_times, side="right") - 1
    out = idx.astype(np.int64)
    valid = idx >= 0
    in_window = np.zeros_like(valid)
    in_window[valid] = hit_times[idx[valid]] >= press_times[valid] - window
    out[~in_window] = -1
    return out
