"""Detection-ratio analytics and report assembly."""

from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest

from hazsync.analytics import (
    CATEGORY_ORDER,
    build_report,
    category_rollup,
    count_by_hazard,
    detection_ratio,
)
from hazsync.errors import NoDetections
from hazsync.labeling import DetectionEvent, FalseAlarm
from hazsync.scene import CATEGORY_MEMBERS, HazardCategory
from hazsync.timeline import ClockModel

from oracles import oracle_shares


def _events(counts: dict[int, int]) -> list[DetectionEvent]:
    events = []
    k = 0
    for hazard_id, count in counts.items():
        for _ in range(count):
            events.append(
                DetectionEvent(
                    participant_id=f"p{k % 7}",
                    trial_id=k % 10 + 1,
                    hazard_id=hazard_id,
                    t_press=float(k),
                    t_gaze=float(k) - 0.5,
                )
            )
            k += 1
    return events


def test_ratio_matches_fraction_oracle():
    counts = {1: 5, 2: 0, 3: 7, 4: 1, 5: 0, 6: 2, 7: 9, 8: 4, 9: 0, 10: 2}
    ratios = detection_ratio(_events(counts))
    shares = oracle_shares({i: c for i, c in counts.items() if True})
    for i in range(1, 11):
        assert ratios[i] == pytest.approx(float(shares[i]), abs=1e-15)
    assert set(ratios) == set(range(1, 11))


def test_ratio_empty_raises():
    with pytest.raises(NoDetections):
        detection_ratio([])


def test_count_by_hazard_covers_all_ids():
    counts = count_by_hazard(_events({3: 2}))
    assert counts[3] == 2
    assert sum(counts.values()) == 2
    assert set(counts) == set(range(1, 11))


def test_rollup_sums_members():
    ratios = {i: 0.0 for i in range(1, 11)}
    ratios[5], ratios[8], ratios[9] = 0.1, 0.2, 0.3
    roll = category_rollup(ratios)
    assert roll[HazardCategory.CHEMICAL] == pytest.approx(0.6)
    assert roll[HazardCategory.PRESSURE] == 0.0
    assert list(roll) == list(CATEGORY_ORDER)


def test_rollup_of_shares_sums_to_one():
    rng = np.random.default_rng(3)
    counts = {i: int(c) for i, c in enumerate(rng.integers(1, 100, 10), start=1)}
    ratios = detection_ratio(_events(counts))
    roll = category_rollup(ratios)
    assert sum(roll.values()) == pytest.approx(1.0, abs=1e-12)


def test_build_report_shape_and_totals():
    counts = {i: i for i in range(1, 11)}  # 55 events
    events = _events(counts)
    false_alarms = [FalseAlarm(participant_id="p0", trial_id=1, t_press=1.0)]
    models = {
        "p0": {
            "eeg01": ClockModel(scale=1.0003, offset=5.25, residual_rms=1e-4, n_markers=50)
        }
    }
    report = build_report(events, false_alarms, models=models)
    assert report.n_detections == 55
    assert report.false_alarm_count == 1
    assert report.opportunities == 7 * 10  # 7 participants x 10 trials
    assert report.per_hazard_counts[10] == 10
    assert sum(report.per_hazard_ratio.values()) == pytest.approx(1.0, abs=1e-12)
    assert report.per_opportunity_rate[10] == pytest.approx(10 / 70)
    payload = report.to_json_dict()
    assert payload["per_hazard"]["10"]["count"] == 10
    assert payload["per_category_ratio"]["Pressure"] == pytest.approx(10 / 55)
    assert payload["sync_diagnostics"]["p0"]["eeg01"]["scale"] == 1.0003


def test_build_report_session_meta_controls_opportunities():
    events = _events({1: 3})
    report = build_report(events, session_meta=[("s1", 10), ("s2", 10), ("s3", 10)])
    assert report.opportunities == 30


def test_build_report_empty_raises():
    with pytest.raises(NoDetections):
        build_report([])


def test_category_members_consistent_with_rollup():
    # every hazard contributes to exactly one category
    seen = []
    for cat in CATEGORY_ORDER:
        seen.extend(CATEGORY_MEMBERS[cat])
    assert sorted(seen) == list(range(1, 11))
