"""Bundled reference fixture for the published per-hazard detection shares.

The study behind those shares never published raw counts, so the fixture
encodes them as integer counts via largest-remainder apportionment over a
configurable total.  The printed column has two decimals and sums to
100.01%, so its natural exact encoding is one event per basis point:
total 10001 reproduces every printed figure to well under 0.01 pp.

The materialized fixture (a labeled-session style directory under
``hazsync/data/reference_fixture``) is generated by this module and
shipped with the package; ``report`` can run on it directly.
"""

from __future__ import annotations

from fractions import Fraction
from importlib import resources
from pathlib import Path

from .labeling import DetectionEvent
from .scene import HAZARD_IDS

# Published per-hazard detection shares, percent, in integer basis points.
REFERENCE_SHARES_BP: dict[int, int] = {
    1: 2065,
    2: 818,
    3: 577,
    4: 699,
    5: 558,
    6: 605,
    7: 997,
    8: 633,
    9: 1163,
    10: 1886,
}

DEFAULT_FIXTURE_TOTAL = sum(REFERENCE_SHARES_BP.values())  # 10001

FIXTURE_TRIALS_PER_PARTICIPANT = 10
_TRIAL_PERIOD = 90.0  # 30 s trial + 60 s rest


def reference_shares() -> dict[int, float]:
    """The published shares as fractions in [0, 1] (of a 100.01% column)."""
    return {i: bp / 10000.0 for i, bp in REFERENCE_SHARES_BP.items()}


def largest_remainder_counts(weights: dict[int, int], total: int) -> dict[int, int]:
    """Apportion `total` integer counts proportionally to `weights`.

    Exact Fraction arithmetic: floor the quotas, then hand the remaining
    units to the largest fractional remainders (ties to the lower id).
    """
    if total < 1:
        raise ValueError("total must be >= 1")
    s = sum(weights.values())
    quotas = {k: Fraction(w * total, s) for k, w in weights.items()}
    counts = {k: int(q) for k, q in quotas.items()}
    leftover = total - sum(counts.values())
    by_remainder = sorted(weights, key=lambda k: (counts[k] - quotas[k], k))
    for k in by_remainder[:leftover]:
        counts[k] += 1
    return counts


def reference_counts(total: int = DEFAULT_FIXTURE_TOTAL) -> dict[int, int]:
    """Integer detection counts encoding the published shares."""
    return largest_remainder_counts(REFERENCE_SHARES_BP, total)


def reference_detection_events(total: int = DEFAULT_FIXTURE_TOTAL) -> list[DetectionEvent]:
    """Synthetic detection events realizing the reference counts.

    Events are spread over synthetic participants (10 trials each) so no
    (participant, trial, hazard) triple repeats, matching the labeling
    dedup invariant.  Timestamps are schematic but satisfy the
    0 <= t_press - t_gaze <= 1 s window invariant.
    """
    counts = reference_counts(total)
    n_participants = -(-max(counts.values()) // FIXTURE_TRIALS_PER_PARTICIPANT)
    events: list[DetectionEvent] = []
    for hazard_id in HAZARD_IDS:
        for k in range(counts[hazard_id]):
            participant = k // FIXTURE_TRIALS_PER_PARTICIPANT + 1
            trial = k % FIXTURE_TRIALS_PER_PARTICIPANT + 1
            trial_start = (trial - 1) * _TRIAL_PERIOD
            t_press = trial_start + 3.0 + 2.0 * hazard_id
            events.append(
                DetectionEvent(
                    participant_id=f"fx{participant:03d}",
                    trial_id=trial,
                    hazard_id=hazard_id,
                    t_press=t_press,
                    t_gaze=t_press - 0.4,
                )
            )
    events.sort(key=lambda e: (e.participant_id, e.trial_id, e.t_press, e.hazard_id))
    assert len(events) == total and n_participants >= 1
    return events


def fixture_participants(total: int = DEFAULT_FIXTURE_TOTAL) -> list[str]:
    counts = reference_counts(total)
    n = -(-max(counts.values()) // FIXTURE_TRIALS_PER_PARTICIPANT)
    return [f"fx{p:03d}" for p in range(1, n + 1)]


def write_reference_fixture(out_dir: Path, total: int = DEFAULT_FIXTURE_TOTAL) -> Path:
    """Materialize the fixture as a labeled-session style directory."""
    from .session_io import write_detections  # local import, avoids a cycle

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_detections(
        out_dir,
        detections=reference_detection_events(total),
        false_alarms=[],
        params={"source": "reference-share fixture", "total": total},
        participants=fixture_participants(total),
        n_trials=FIXTURE_TRIALS_PER_PARTICIPANT,
    )
    return out_dir


def bundled_fixture_dir() -> Path:
    """Path of the fixture directory shipped inside the package."""
    return Path(resources.files("hazsync.data") / "reference_fixture")
