"""Detection-ratio analytics.

The headline statistic is each hazard's share of all recognitions pooled
over participants (ratios over the ten hazard ids, summing to 1), plus
the rollup of those shares into the five hazard categories.  A
per-opportunity rate (recognitions / participant-trials) is reported
alongside, since "detection rate" is often read that way; only the share
is the replication target.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

from .errors import NoDetections
from .labeling import DetectionEvent, FalseAlarm
from .scene import CATEGORY_MEMBERS, HAZARD_IDS, HazardCategory
from .timeline import ClockModel

CATEGORY_ORDER = (
    HazardCategory.FALL,
    HazardCategory.ELECTRICAL,
    HazardCategory.TRIP,
    HazardCategory.CHEMICAL,
    HazardCategory.PRESSURE,
)


def detection_ratio(events: Sequence[DetectionEvent]) -> dict[int, float]:
    """Each hazard's share of all detections, over all ten ids.

    Zero-count hazards appear with ratio 0.0; the shares sum to 1.
    Raises NoDetections on empty input.
    """
    if not events:
        raise NoDetections("cannot compute ratios over zero detections")
    counts = count_by_hazard(events)
    total = sum(counts.values())
    return {i: counts[i] / total for i in HAZARD_IDS}


def count_by_hazard(events: Sequence[DetectionEvent]) -> dict[int, int]:
    counts = {i: 0 for i in HAZARD_IDS}
    for e in events:
        counts[e.hazard_id] += 1
    return counts


def category_rollup(per_hazard_ratio: Mapping[int, float]) -> dict[HazardCategory, float]:
    """Sum member-hazard ratios into the five category shares."""
    return {
        cat: sum(per_hazard_ratio.get(i, 0.0) for i in CATEGORY_MEMBERS[cat])
        for cat in CATEGORY_ORDER
    }


@dataclass
class DetectionReport:
    """Aggregated study results over one or more labeled sessions."""

    per_hazard_counts: dict[int, int]
    per_hazard_ratio: dict[int, float]
    per_category_ratio: dict[HazardCategory, float]
    per_participant: dict[str, dict[int, int]]
    opportunities: int
    per_opportunity_rate: dict[int, float]
    false_alarm_count: int
    n_detections: int
    sync_diagnostics: dict[str, dict[str, dict[str, float]]] = field(default_factory=dict)

    def to_json_dict(self) -> dict:
        """JSON-ready dict with string keys in deterministic order."""
        return {
            "n_detections": self.n_detections,
            "false_alarm_count": self.false_alarm_count,
            "opportunities": self.opportunities,
            "per_hazard": {
                str(i): {
                    "count": self.per_hazard_counts[i],
                    "ratio": self.per_hazard_ratio[i],
                    "per_opportunity_rate": self.per_opportunity_rate[i],
                }
                for i in HAZARD_IDS
            },
            "per_category_ratio": {
                cat.value: self.per_category_ratio[cat] for cat in CATEGORY_ORDER
            },
            "per_participant": {
                pid: {str(i): c for i, c in sorted(counts.items())}
                for pid, counts in sorted(self.per_participant.items())
            },
            "sync_diagnostics": {
                pid: {dev: dict(vals) for dev, vals in sorted(devices.items())}
                for pid, devices in sorted(self.sync_diagnostics.items())
            },
        }


def build_report(
    events: Sequence[DetectionEvent],
    false_alarms: Sequence[FalseAlarm] = (),
    models: Optional[Mapping[str, Mapping[str, ClockModel]]] = None,
    session_meta: Optional[Sequence[tuple[str, int]]] = None,
) -> DetectionReport:
    """Assemble the full report from labeled-session outputs.

    models maps participant -> device -> fitted ClockModel (diagnostics
    only).  session_meta lists one (participant_id, n_trials) entry per
    ingested session; opportunities is the sum of its trial counts.  When
    omitted, participants are taken from the events with 10 trials each.
    """
    if not events:
        raise NoDetections("cannot build a report with zero detections")
    counts = count_by_hazard(events)
    ratios = detection_ratio(events)

    if session_meta is None:
        participants = sorted({e.participant_id for e in events} | {f.participant_id for f in false_alarms})
        session_meta = [(p, 10) for p in participants]
    opportunities = sum(n for _, n in session_meta)

    per_participant: dict[str, dict[int, int]] = {}
    for e in events:
        per_participant.setdefault(e.participant_id, {i: 0 for i in HAZARD_IDS})
        per_participant[e.participant_id][e.hazard_id] += 1

    diagnostics: dict[str, dict[str, dict[str, float]]] = {}
    for pid, devices in (models or {}).items():
        diagnostics[pid] = {
            dev: {
                "scale": m.scale,
                "offset": m.offset,
                "residual_rms": m.residual_rms,
                "n_markers": m.n_markers,
            }
            for dev, m in devices.items()
        }

    return DetectionReport(
        per_hazard_counts=counts,
        per_hazard_ratio=ratios,
        per_category_ratio=category_rollup(ratios),
        per_participant=per_participant,
        opportunities=opportunities,
        per_opportunity_rate={i: counts[i] / opportunities for i in HAZARD_IDS},
        false_alarm_count=len(false_alarms),
        n_detections=len(events),
        sync_diagnostics=diagnostics,
    )
