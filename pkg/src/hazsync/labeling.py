"""Button-press attribution: the one-second gaze lookback rule.

A press counts as recognizing a hazard when the participant was looking
at it at some point within the window (default 1.0 s) before the press;
the latest qualifying hit decides which hazard.  Presses with no
qualifying hit are false alarms.  Repeated recognitions of one hazard
within one trial collapse to the earliest press.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .gaze import GazeHit

DEFAULT_WINDOW = 1.0


@dataclass(frozen=True)
class ButtonPress:
    """A controller press on the reference timeline."""

    t: float
    trial_id: int
    participant_id: str


@dataclass(frozen=True)
class DetectionEvent:
    """One recognized hazard: press plus the gaze hit that earned it."""

    participant_id: str
    trial_id: int
    hazard_id: int
    t_press: float
    t_gaze: float


@dataclass(frozen=True)
class FalseAlarm:
    """A press with no qualifying gaze hit in the lookback window."""

    participant_id: str
    trial_id: int
    t_press: float


def label_detections(
    presses: Sequence[ButtonPress],
    hits: Sequence[GazeHit],
    window: float = DEFAULT_WINDOW,
) -> tuple[list[DetectionEvent], list[FalseAlarm]]:
    """Apply the lookback rule to every press.

    hits must be time-sorted; misses (hazard_id None) are ignored.  For a
    press at t_p the qualifying hits are those with t in the closed
    interval [t_p - window, t_p]; the latest one names the hazard.  After
    all presses are labeled, duplicate (participant, trial, hazard)
    detections collapse to the earliest press.
    """
    if window <= 0.0:
        raise ValueError(f"window must be > 0, got {window!r}")
    hit_t = np.array(
        [h.t for h in hits if h.hazard_id is not None], dtype=np.float64
    )
    hit_id = np.array(
        [h.hazard_id for h in hits if h.hazard_id is not None], dtype=np.int64
    )
    press_t = np.array([p.t for p in presses], dtype=np.float64)

    idx = _kernels.latest_in_window(press_t, hit_t, window)

    detections: list[DetectionEvent] = []
    false_alarms: list[FalseAlarm] = []
    for p, k in zip(presses, idx):
        if k >= 0:
            detections.append(
                DetectionEvent(
                    participant_id=p.participant_id,
                    trial_id=p.trial_id,
                    hazard_id=int(hit_id[k]),
                    t_press=p.t,
                    t_gaze=float(hit_t[k]),
                )
            )
        else:
            false_alarms.append(
                FalseAlarm(participant_id=p.participant_id, trial_id=p.trial_id, t_press=p.t)
            )

    detections = dedupe_detections(detections)
    false_alarms.sort(key=lambda f: (f.participant_id, f.trial_id, f.t_press))
    return detections, false_alarms


def dedupe_detections(events: Sequence[DetectionEvent]) -> list[DetectionEvent]:
    """Keep the earliest press per (participant, trial, hazard)."""
    best: dict[tuple[str, int, int], DetectionEvent] = {}
    for e in events:
        key = (e.participant_id, e.trial_id, e.hazard_id)
        cur = best.get(key)
        if cur is None or e.t_press < cur.t_press:
            best[key] = e
    out = list(best.values())
    out.sort(key=lambda e: (e.participant_id, e.trial_id, e.t_press, e.hazard_id))
    return out
