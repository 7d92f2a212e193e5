"""Kernel backends: contracts, parity, and agreement with trig oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hazsync import _kernels
from hazsync._kernels import available_backends, get_backend

from oracles import oracle_cast, oracle_dwells, oracle_label

BACKENDS = [get_backend(name) for name in available_backends()]
BACKEND_IDS = available_backends()


def test_native_backend_is_built_and_selected():
    assert "native" in available_backends()
    assert _kernels.BACKEND == "native"


@pytest.fixture(params=BACKENDS, ids=BACKEND_IDS)
def kern(request):
    return request.param


# --- cast_rays -------------------------------------------------------------


def test_cast_rays_hit_and_miss(kern):
    origins = np.zeros((3, 3))
    directions = np.array(
        [
            [1.0, 0.0, 0.0],  # straight at center 0
            [0.0, 1.0, 0.0],  # at nothing
            [-1.0, 0.0, 0.0],  # center 0 is behind
        ]
    )
    centers = np.array([[5.0, 0.0, 0.0]])
    cos_half = np.cos(np.radians(2.0))
    hit, dist = kern.cast_rays(origins, directions, centers, cos_half)
    assert hit.tolist() == [0, -1, -1]
    assert dist[0] == 5.0
    assert np.isnan(dist[1]) and np.isnan(dist[2])


def test_cast_rays_prefers_nearest_accepted_center(kern):
    origins = np.zeros((1, 3))
    directions = np.array([[1.0, 0.0, 0.0]])
    centers = np.array([[9.0, 0.0, 0.0], [4.0, 0.0, 0.0]])
    hit, dist = kern.cast_rays(origins, directions, centers, np.cos(np.radians(2.0)))
    assert hit[0] == 1
    assert dist[0] == 4.0


def test_cast_rays_distance_tie_goes_to_lower_index(kern):
    # Two centers mirrored around the ray at equal distance, both inside
    # a wide cone.
    origins = np.zeros((1, 3))
    directions = np.array([[1.0, 0.0, 0.0]])
    centers = np.array([[5.0, 0.1, 0.0], [5.0, -0.1, 0.0]])
    hit, _ = kern.cast_rays(origins, directions, centers, np.cos(np.radians(5.0)))
    assert hit[0] == 0


def test_cast_rays_degenerate_distance_is_a_miss(kern):
    origins = np.zeros((1, 3))
    directions = np.array([[1.0, 0.0, 0.0]])
    centers = np.zeros((1, 3))  # center on the origin
    hit, _ = kern.cast_rays(origins, directions, centers, np.cos(np.radians(2.0)))
    assert hit[0] == -1


def test_cast_rays_cone_boundary_inclusive(kern):
    # Ray exactly on the cone edge: dot == cos * d accepts.
    angle = np.radians(2.0)
    origins = np.zeros((1, 3))
    directions = np.array([[np.cos(angle), np.sin(angle), 0.0]])
    centers = np.array([[10.0, 0.0, 0.0]])
    cos_half = np.cos(angle)
    rel = centers[0]
    d = np.sqrt((rel[0] * rel[0] + rel[1] * rel[1]) + rel[2] * rel[2])
    dot = (rel[0] * directions[0, 0] + rel[1] * directions[0, 1]) + rel[2] * directions[0, 2]
    assume_boundary = dot >= cos_half * d
    hit, _ = kern.cast_rays(origins, directions, centers, cos_half)
    assert (hit[0] == 0) == assume_boundary


def test_cast_rays_empty_inputs(kern):
    hit, dist = kern.cast_rays(np.zeros((0, 3)), np.zeros((0, 3)), np.zeros((4, 3)), 0.999)
    assert hit.shape == (0,) and dist.shape == (0,)
    hit, dist = kern.cast_rays(np.zeros((2, 3)), np.ones((2, 3)), np.zeros((0, 3)), 0.999)
    assert hit.tolist() == [-1, -1]


def _random_cast_instance(seed: int):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 200))
    h = int(rng.integers(1, 12))
    origins = rng.uniform(-2.0, 2.0, (n, 3))
    directions = rng.normal(size=(n, 3))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)
    centers = rng.uniform(-10.0, 10.0, (h, 3))
    cone = float(rng.uniform(0.5, 9.5))
    return origins, directions, centers, cone


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cast_rays_backends_bit_identical(seed):
    origins, directions, centers, cone = _random_cast_instance(seed)
    cos_half = np.cos(np.radians(cone))
    results = [k.cast_rays(origins, directions, centers, cos_half) for k in BACKENDS]
    for hit, dist in results[1:]:
        np.testing.assert_array_equal(hit, results[0][0])
        np.testing.assert_array_equal(
            dist.view(np.uint64), results[0][1].view(np.uint64)
        )  # bitwise, nan included


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_cast_rays_matches_trig_oracle(seed):
    origins, directions, centers, cone = _random_cast_instance(seed)
    oracle_ids, oracle_d = oracle_cast(origins, directions, centers, cone)
    # Skip rays whose best candidate sits numerically on the cone edge;
    # the oracle uses acos while the kernel compares dot products, and
    # on the edge the two roundings may disagree.
    rel = centers[None, :, :] - origins[:, None, :]
    d = np.linalg.norm(rel, axis=2)
    with np.errstate(invalid="ignore", divide="ignore"):
        cosang = np.einsum("nhk,nk->nh", rel, directions) / np.where(d > 0, d, np.nan)
    angles = np.degrees(np.arccos(np.clip(cosang, -1.0, 1.0)))
    clear = np.all(np.abs(angles - cone) > 1e-6, axis=1)

    for kern in BACKENDS:
        ids, dist = kern.cast_rays(origins, directions, centers, np.cos(np.radians(cone)))
        np.testing.assert_array_equal(ids[clear], oracle_ids[clear])
        np.testing.assert_allclose(dist[clear], oracle_d[clear], rtol=1e-12, equal_nan=True)


# --- segment_runs ----------------------------------------------------------


def test_segment_runs_basic(kern):
    ids = np.array([1, 1, -1, 1, 2, 2], dtype=np.int64)
    times = np.array([0.0, 0.05, 0.10, 0.15, 0.20, 0.24])
    run_ids, start_t, end_t, counts = kern.segment_runs(ids, times, 0.1)
    # The miss at 0.10 leaves a 0.10 gap (0.05 -> 0.15), still within
    # tolerance, so hazard 1 stays one dwell.
    assert run_ids.tolist() == [1, 2]
    assert start_t.tolist() == [0.0, 0.20]
    assert end_t.tolist() == [0.15, 0.24]
    assert counts.tolist() == [3, 2]


def test_segment_runs_gap_splits(kern):
    ids = np.array([3, 3], dtype=np.int64)
    times = np.array([0.0, 0.2001])
    run_ids, *_ = kern.segment_runs(ids, times, 0.2)
    assert run_ids.tolist() == [3, 3]


def test_segment_runs_gap_boundary_merges(kern):
    ids = np.array([3, 3], dtype=np.int64)
    times = np.array([0.0, 0.2])
    run_ids, start_t, end_t, counts = kern.segment_runs(ids, times, 0.2)
    assert run_ids.tolist() == [3]
    assert counts.tolist() == [2]


def test_segment_runs_empty(kern):
    run_ids, start_t, end_t, counts = kern.segment_runs(
        np.empty(0, dtype=np.int64), np.empty(0), 0.1
    )
    assert run_ids.size == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_segment_runs_matches_oracle_and_backends_agree(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(0, 300))
    times = np.sort(rng.uniform(0.0, 10.0, n))
    times = np.unique(times)
    ids = rng.integers(-1, 4, times.size).astype(np.int64)
    gap = float(rng.uniform(0.01, 1.0))
    expected = oracle_dwells(list(zip(times.tolist(), ids.tolist())), gap)
    for kern in BACKENDS:
        run_ids, start_t, end_t, counts = kern.segment_runs(ids, times, gap)
        got = list(zip(run_ids.tolist(), start_t.tolist(), end_t.tolist(), counts.tolist()))
        assert got == expected


# --- latest_in_window ------------------------------------------------------


def test_latest_in_window_edges(kern):
    hits = np.array([1.0, 2.0, 3.0])
    presses = np.array([3.0, 4.0, 4.0001, 0.5])
    idx = kern.latest_in_window(presses, hits, 1.0)
    # press 3.0: hit at 3.0 qualifies (closed upper edge)
    # press 4.0: hit at 3.0 qualifies (closed lower edge, 4.0 - 1.0)
    # press 4.0001: window (3.0001..4.0001] has no hits
    # press 0.5: nothing before it
    assert idx.tolist() == [2, 2, -1, -1]


def test_latest_in_window_empty_inputs(kern):
    assert kern.latest_in_window(np.empty(0), np.array([1.0]), 1.0).size == 0
    idx = kern.latest_in_window(np.array([1.0]), np.empty(0), 1.0)
    assert idx.tolist() == [-1]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_latest_in_window_matches_scan_and_backends_agree(seed):
    rng = np.random.default_rng(seed)
    hits = np.sort(rng.uniform(0.0, 50.0, int(rng.integers(0, 200))))
    presses = rng.uniform(-1.0, 51.0, int(rng.integers(0, 50)))
    window = float(rng.uniform(0.05, 5.0))
    expected = []
    for p in presses:
        best = -1
        for i, t in enumerate(hits):
            if p - window <= t <= p:
                best = i
        expected.append(best)
    for kern in BACKENDS:
        idx = kern.latest_in_window(presses, hits, window)
        assert idx.tolist() == expected


def test_oracle_label_consistency_smoke():
    # The labeling oracle itself against a tiny worked example.
    detections, false_alarms = oracle_label(
        presses=[(5.0, 1), (9.0, 1)],
        hits=[(4.2, 3), (4.8, 7), (8.9, -1)],
        window=1.0,
    )
    assert detections == [("p", 1, 7, 5.0, 4.8)]
    assert false_alarms == [("p", 1, 9.0)]
