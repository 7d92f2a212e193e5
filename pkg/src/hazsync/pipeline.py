"""End-to-end processing: fit clocks, align streams, label detections.

The same core runs on an in-memory SessionRecording (tests, batch
studies) and on a session directory read back from disk (CLI).  In
both cases nothing simulator-private is consulted: clock models come
from the shared markers alone, and detections from the realigned gaze
and press streams.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Sequence

import numpy as np

from .errors import SessionFormatError
from .gaze import DEFAULT_CONE_HALF_ANGLE_DEG, GazeHit, cast_gaze_track
from .labeling import (
    DEFAULT_WINDOW,
    ButtonPress,
    DetectionEvent,
    FalseAlarm,
    label_detections,
)
from .scene import TrialLayout
from .session_io import LoadedSession
from .simulator import SessionRecording
from .timeline import ClockModel, Marker, fit_clock_map, match_markers

# Slack when deciding which trial a realigned sample belongs to; covers
# residual clock-fit error at trial edges without reaching into rests.
TRIAL_EDGE_TOLERANCE = 1e-3


def fit_session_models(
    marker_streams: Mapping[str, tuple[np.ndarray, np.ndarray]],
    reference_id: str,
) -> dict[str, ClockModel]:
    """Fit one clock model per device from shared markers.

    marker_streams maps device_id -> (seqs, t_device) and must include
    the reference stream.  Sync errors are re-raised with the offending
    device named.
    """
    if reference_id not in marker_streams:
        raise SessionFormatError(f"no marker stream for reference {reference_id!r}")
    ref_seqs, ref_times = marker_streams[reference_id]
    reference = [Marker(seq=int(s), t_device=float(t)) for s, t in zip(ref_seqs, ref_times)]
    models: dict[str, ClockModel] = {}
    for device_id in sorted(marker_streams):
        if device_id == reference_id:
            continue
        seqs, times = marker_streams[device_id]
        device = [Marker(seq=int(s), t_device=float(t)) for s, t in zip(seqs, times)]
        try:
            pairs = match_markers(device, reference)
            models[device_id] = fit_clock_map(pairs)
        except Exception as exc:
            exc.args = (f"device {device_id!r}: {exc}",) + exc.args[1:]
            raise
    return models


def _marker_arrays(streams) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    return {d: (m.seqs, m.t_device) for d, m in streams.items()}


def map_to_reference(model: ClockModel, times: np.ndarray) -> np.ndarray:
    """Vectorized device-to-reference map (same arithmetic as to_reference)."""
    return model.scale * np.asarray(times, dtype=np.float64) + model.offset


def assign_trials(
    times: np.ndarray,
    trial_windows: Sequence[tuple[float, float]],
    tolerance: float = TRIAL_EDGE_TOLERANCE,
) -> np.ndarray:
    """Trial index (0-based) per reference time, -1 when in no trial."""
    starts = np.array([w[0] for w in trial_windows], dtype=np.float64)
    ends = np.array([w[1] for w in trial_windows], dtype=np.float64)
    idx = np.searchsorted(starts, times + tolerance, side="right") - 1
    idx_clipped = np.clip(idx, 0, len(trial_windows) - 1)
    ok = (idx >= 0) & (times <= ends[idx_clipped] + tolerance)
    return np.where(ok, idx, -1)


@dataclass
class LabelResult:
    """Labeled detections plus the sync context they were produced under."""

    detections: list[DetectionEvent]
    false_alarms: list[FalseAlarm]
    models: dict[str, ClockModel]
    params: dict
    n_gaze_hits: int


def _label_core(
    participant_id: str,
    trial_windows: Sequence[tuple[float, float]],
    layouts: Sequence[TrialLayout],
    gaze_t_ref: np.ndarray,
    gaze_origins: np.ndarray,
    gaze_dirs: np.ndarray,
    press_t_ref: np.ndarray,
    window: float,
    cone_half_angle_deg: float,
) -> tuple[list[DetectionEvent], list[FalseAlarm], int]:
    gaze_trials = assign_trials(gaze_t_ref, trial_windows)
    hits: list[GazeHit] = []
    single_origin = gaze_origins.ndim == 1
    for k, layout in enumerate(layouts):
        mask = gaze_trials == k
        if not mask.any():
            continue
        ids, _ = cast_gaze_track(
            gaze_t_ref[mask],
            gaze_origins if single_origin else gaze_origins[mask],
            gaze_dirs[mask],
            layout,
            cone_half_angle_deg,
        )
        hit_mask = ids > 0
        hits.extend(
            GazeHit(t=float(t), hazard_id=int(h), distance=None)
            for t, h in zip(gaze_t_ref[mask][hit_mask], ids[hit_mask])
        )
    hits.sort(key=lambda h: h.t)

    press_trials = assign_trials(press_t_ref, trial_windows)
    if np.any(press_trials < 0):
        bad = float(press_t_ref[int(np.argmin(press_trials))])
        raise SessionFormatError(f"press at reference time {bad!r} falls in no trial")
    presses = [
        ButtonPress(t=float(t), trial_id=int(k) + 1, participant_id=participant_id)
        for t, k in zip(press_t_ref, press_trials)
    ]
    detections, false_alarms = label_detections(presses, hits, window)
    return detections, false_alarms, len(hits)


def label_recording(
    recording: SessionRecording,
    window: float = DEFAULT_WINDOW,
    cone_half_angle_deg: float = DEFAULT_CONE_HALF_ANGLE_DEG,
) -> LabelResult:
    """Run sync + labeling on an in-memory recording."""
    models = fit_session_models(
        _marker_arrays(recording.markers), SessionRecording.REFERENCE_ID
    )
    gaze_model = models[recording.gaze_device]
    input_model = models[recording.input_device]
    detections, false_alarms, n_hits = _label_core(
        recording.plan.participant_id,
        recording.trial_windows(),
        list(recording.plan.trials),
        map_to_reference(gaze_model, recording.gaze_t_device),
        recording.gaze_origin,
        recording.gaze_directions,
        map_to_reference(input_model, recording.press_t_device),
        window,
        cone_half_angle_deg,
    )
    return LabelResult(
        detections=detections,
        false_alarms=false_alarms,
        models=models,
        params={"window": window, "cone_half_angle_deg": cone_half_angle_deg},
        n_gaze_hits=n_hits,
    )


def label_loaded(
    session: LoadedSession,
    window: float = DEFAULT_WINDOW,
    cone_half_angle_deg: float = DEFAULT_CONE_HALF_ANGLE_DEG,
) -> LabelResult:
    """Run sync + labeling on a session directory's parsed contents."""
    models = fit_session_models(_marker_arrays(session.markers), session.reference_id)
    gaze_dev = session.device_of_kind("gaze")
    input_dev = session.device_of_kind("input")
    origins = gaze_dev.origins
    if origins is None or gaze_dev.directions is None:
        raise SessionFormatError(f"{session.path}: gaze device has no parsed rays")
    # A constant origin is the common case; collapse it so the cast can
    # broadcast instead of copying per trial.
    if origins.size and np.all(origins == origins[0]):
        origins = origins[0]
    detections, false_alarms, n_hits = _label_core(
        session.participant_id,
        session.trial_windows,
        session.layouts,
        map_to_reference(models[gaze_dev.device_id], gaze_dev.times),
        origins,
        gaze_dev.directions,
        map_to_reference(models[input_dev.device_id], input_dev.times),
        window,
        cone_half_angle_deg,
    )
    return LabelResult(
        detections=detections,
        false_alarms=false_alarms,
        models=models,
        params={"window": window, "cone_half_angle_deg": cone_half_angle_deg},
        n_gaze_hits=n_hits,
    )


_KIND_RANK = {"eeg": 0, "gaze": 0, "press": 0, "marker": 1}


def align_loaded(
    session: LoadedSession,
) -> tuple[list[tuple[float, str, str, str]], dict, dict[str, ClockModel]]:
    """Merge all streams onto the reference clock.

    Returns (records, diagnostics, models) where records are
    (t_reference, device_id, kind, raw_line) sorted by reference time,
    ties broken by device id, then samples before markers, then the
    original line order.
    """
    models = fit_session_models(_marker_arrays(session.markers), session.reference_id)

    t_parts: list[np.ndarray] = []
    meta: list[tuple[str, str, str]] = []

    def add(times: np.ndarray, device_id: str, kind: str, lines: Sequence[str]) -> None:
        t_parts.append(np.asarray(times, dtype=np.float64))
        meta.extend((device_id, kind, raw) for raw in lines)

    for device_id in sorted(session.devices):
        dev = session.devices[device_id]
        kind = "press" if dev.kind == "input" else dev.kind
        add(map_to_reference(models[device_id], dev.times), device_id, kind, dev.raw_lines)
    for device_id in sorted(session.markers):
        m = session.markers[device_id]
        if device_id == session.reference_id:
            t_ref = m.t_device
        else:
            t_ref = map_to_reference(models[device_id], m.t_device)
        add(t_ref, device_id, "marker", m.raw_lines)

    times = np.concatenate(t_parts) if t_parts else np.empty(0)
    dev_ids = sorted({d for d, _, _ in meta})
    dev_rank = {d: i for i, d in enumerate(dev_ids)}
    dev_codes = np.array([dev_rank[d] for d, _, _ in meta], dtype=np.int64)
    kind_ranks = np.array([_KIND_RANK[k] for _, k, _ in meta], dtype=np.int64)
    index = np.arange(len(meta), dtype=np.int64)
    order = np.lexsort((index, kind_ranks, dev_codes, times))

    records = [(float(times[i]), meta[i][0], meta[i][1], meta[i][2]) for i in order]
    diagnostics = {
        "reference": session.reference_id,
        "devices": {
            device_id: {
                "scale": m.scale,
                "offset": m.offset,
                "residual_rms": m.residual_rms,
                "n_markers": m.n_markers,
            }
            for device_id, m in models.items()
        },
    }
    return records, diagnostics, models
