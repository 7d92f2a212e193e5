"""On-disk session format: layout, serialization, and parsing.

A session directory holds one manifest plus JSON Lines streams:

    manifest.json             protocol, devices, trial layouts, marker causes
    samples_<device>.jsonl    gaze {"t","o","d"} / eeg {"t","ch"} records
    presses.jsonl             input-device presses {"t","trial"}
    markers_<device>.jsonl    {"t","seq"} as observed on that device
    markers_stim.jsonl        the same markers on the reference clock
    ground_truth.json         planned detections + true device clocks
                              (simulator output only, never read by the
                              pipeline)

Alignment and labeling add aligned.jsonl, sync_diagnostics.json and
detections.json.  All writers are byte-deterministic: sorted keys, LF
line endings, and a fixed time format (shortest exact decimal, padded
to at least nine significant digits, so every written time parses back
to the identical float).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from .errors import SessionFormatError
from .gaze import DEFAULT_CONE_HALF_ANGLE_DEG, DEFAULT_GAP_TOLERANCE
from .labeling import DEFAULT_WINDOW, DetectionEvent, FalseAlarm
from .scene import HazardAoi, HazardCategory, TrialLayout
from .simulator import SessionRecording

FORMAT_VERSION = 1
MANIFEST_NAME = "manifest.json"
GROUND_TRUTH_NAME = "ground_truth.json"
ALIGNED_NAME = "aligned.jsonl"
DIAGNOSTICS_NAME = "sync_diagnostics.json"
DETECTIONS_NAME = "detections.json"
PRESSES_NAME = "presses.jsonl"

MIN_SIG_DIGITS = 9


def fmt_time(t: float) -> str:
    """Serialize a time so it parses back to the identical float.

    Uses the shortest exact decimal form, zero-padded to at least nine
    significant digits (padding with trailing zeros never changes the
    parsed value).
    """
    t = float(t)
    if not math.isfinite(t):
        raise ValueError(f"times must be finite, got {t!r}")
    s = repr(t)
    if "e" in s:
        mant, _, exp = s.partition("e")
        sign = ""
        if mant[0] == "-":
            sign, mant = "-", mant[1:]
        pad = MIN_SIG_DIGITS - len(mant.replace(".", ""))
        if "." not in mant:
            mant += "."
        return f"{sign}{mant}{'0' * max(0, pad)}e{exp}"
    sign = ""
    body = s
    if body[0] == "-":
        sign, body = "-", body[1:]
    digits = body.replace(".", "").lstrip("0")
    if not digits:
        return sign + "0." + "0" * MIN_SIG_DIGITS
    pad = MIN_SIG_DIGITS - len(digits)
    if pad <= 0:
        return s
    if "." not in body:
        body += "."
    return f"{sign}{body}{'0' * pad}"


def _fmt_vec(values: Iterable[float]) -> str:
    return "[" + ", ".join(repr(float(v)) for v in values) + "]"


def _fmt_channels(values: Iterable[float]) -> str:
    return "[" + ", ".join(format(float(v), ".6g") for v in values) + "]"


def gaze_line(t: float, origin: Iterable[float], direction: Iterable[float]) -> str:
    return f'{{"t": {fmt_time(t)}, "o": {_fmt_vec(origin)}, "d": {_fmt_vec(direction)}}}'


def eeg_line(t: float, channels: Iterable[float]) -> str:
    return f'{{"t": {fmt_time(t)}, "ch": {_fmt_channels(channels)}}}'


def marker_line(t: float, seq: int) -> str:
    return f'{{"t": {fmt_time(t)}, "seq": {int(seq)}}}'


def press_line(t: float, trial: int) -> str:
    return f'{{"t": {fmt_time(t)}, "trial": {int(trial)}}}'


def _write_text(path: Path, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _write_lines(path: Path, lines: Iterable[str]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for line in lines:
            fh.write(line)
            fh.write("\n")


def write_json(path: Path, obj) -> None:
    _write_text(Path(path), json.dumps(obj, indent=2, sort_keys=True) + "\n")


def samples_filename(device_id: str, kind: str) -> str:
    return PRESSES_NAME if kind == "input" else f"samples_{device_id}.jsonl"


def markers_filename(device_id: str) -> str:
    return f"markers_{device_id}.jsonl"


def _layout_dict(layout: TrialLayout) -> dict:
    return {
        "layout_seed": layout.layout_seed,
        "hazards": [
            {
                "id": aoi.id,
                "category": aoi.category.value,
                "description": aoi.description,
                "center": [float(c) for c in aoi.center],
                "radius": float(aoi.radius),
            }
            for aoi in sorted(layout.placements, key=lambda a: a.id)
        ],
    }


def _layout_from_dict(trial_id: int, data: dict, path: Path) -> TrialLayout:
    try:
        placements = tuple(
            HazardAoi(
                id=h["id"],
                category=HazardCategory(h["category"]),
                description=h["description"],
                center=tuple(float(c) for c in h["center"]),
                radius=float(h["radius"]),
            )
            for h in data["hazards"]
        )
        return TrialLayout(trial_id=trial_id, placements=placements, layout_seed=data["layout_seed"])
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionFormatError(f"{path}: bad trial layout: {exc}") from exc


def detection_dict(e: DetectionEvent) -> dict:
    return {
        "participant": e.participant_id,
        "trial": e.trial_id,
        "hazard": e.hazard_id,
        "t_press": float(e.t_press),
        "t_gaze": float(e.t_gaze),
    }


def false_alarm_dict(f: FalseAlarm) -> dict:
    return {"participant": f.participant_id, "trial": f.trial_id, "t_press": float(f.t_press)}


def detection_from_dict(d: dict) -> DetectionEvent:
    return DetectionEvent(
        participant_id=d["participant"],
        trial_id=int(d["trial"]),
        hazard_id=int(d["hazard"]),
        t_press=float(d["t_press"]),
        t_gaze=float(d["t_gaze"]),
    )


def false_alarm_from_dict(d: dict) -> FalseAlarm:
    return FalseAlarm(
        participant_id=d["participant"], trial_id=int(d["trial"]), t_press=float(d["t_press"])
    )


def write_session(
    recording: SessionRecording,
    out_dir: str | Path,
    labeling_defaults: Optional[dict] = None,
    config: Optional[dict] = None,
) -> Path:
    """Write a simulated session as a session directory."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    plan = recording.plan
    labeling_defaults = labeling_defaults or {
        "window": DEFAULT_WINDOW,
        "cone_half_angle_deg": DEFAULT_CONE_HALF_ANGLE_DEG,
        "gap_tolerance": DEFAULT_GAP_TOLERANCE,
    }

    devices_meta = []
    for device_id in sorted(recording.profiles):
        p = recording.profiles[device_id]
        entry = {
            "device_id": p.device_id,
            "kind": p.kind,
            "nominal_rate": p.nominal_rate,
            "samples_file": samples_filename(p.device_id, p.kind),
            "markers_file": markers_filename(p.device_id),
        }
        if p.kind == "eeg":
            entry["channel_count"] = p.channel_count
        devices_meta.append(entry)

    manifest = {
        "format_version": FORMAT_VERSION,
        "session": {
            "participant_id": plan.participant_id,
            "age": plan.age,
            "seed": recording.seed,
        },
        "calibration": {
            "eye_tracker": "5-point",
            "eeg": "impedance-checked",
        },
        "protocol": {
            "n_trials": len(plan.trials),
            "trial_duration": plan.trial_duration,
            "rest_duration": plan.rest_duration,
        },
        "scene": {"viewpoint": [float(v) for v in recording.gaze_origin]},
        "reference": {
            "clock_id": SessionRecording.REFERENCE_ID,
            "markers_file": markers_filename(SessionRecording.REFERENCE_ID),
        },
        "devices": devices_meta,
        "trials": [
            {
                "trial_id": layout.trial_id,
                "start": plan.trial_start(layout.trial_id),
                "end": plan.trial_start(layout.trial_id) + plan.trial_duration,
                "layout": _layout_dict(layout),
            }
            for layout in plan.trials
        ],
        "markers": {
            "note": (
                "trial_start/trial_end markers are synthetic scheduling additions; "
                "press markers mirror controller presses"
            ),
            "causes": [
                {"seq": m.seq, "cause": m.cause, "trial_id": m.trial_id}
                for m in recording.schedule
            ],
        },
        "labeling_defaults": dict(labeling_defaults),
    }
    if config is not None:
        manifest["config"] = config
    write_json(out_dir / MANIFEST_NAME, manifest)

    _write_lines(
        out_dir / samples_filename(recording.gaze_device, "gaze"),
        (
            gaze_line(t, recording.gaze_origin, d)
            for t, d in zip(recording.gaze_t_device, recording.gaze_directions)
        ),
    )
    _write_lines(
        out_dir / samples_filename(recording.eeg_device, "eeg"),
        (
            eeg_line(t, row)
            for t, row in zip(recording.eeg_t_device, recording.eeg_channels)
        ),
    )
    _write_lines(
        out_dir / PRESSES_NAME,
        (
            press_line(t, trial)
            for t, trial in zip(recording.press_t_device, recording.press_trials)
        ),
    )
    for device_id, obs in recording.markers.items():
        _write_lines(
            out_dir / markers_filename(device_id),
            (marker_line(t, seq) for seq, t in zip(obs.seqs, obs.t_device)),
        )

    ground_truth = {
        "window": recording.options.ground_truth_window,
        "detections": [detection_dict(e) for e in recording.ground_truth],
        "false_alarms": [false_alarm_dict(f) for f in recording.ground_truth_false_alarms],
        "device_clocks": {
            device_id: {
                "clock_scale": p.clock_scale,
                "clock_offset": p.clock_offset,
                "marker_jitter_sigma": p.marker_jitter_sigma,
                "marker_drop_prob": p.marker_drop_prob,
            }
            for device_id, p in sorted(recording.profiles.items())
        },
    }
    write_json(out_dir / GROUND_TRUTH_NAME, ground_truth)
    return out_dir


@dataclass
class MarkerData:
    """One device's marker stream as read from disk."""

    device_id: str
    seqs: np.ndarray
    t_device: np.ndarray
    raw_lines: list[str]


@dataclass
class LoadedDevice:
    """One device's sample stream as read from disk."""

    device_id: str
    kind: str
    nominal_rate: float
    times: np.ndarray
    raw_lines: list[str]
    channel_count: Optional[int] = None
    origins: Optional[np.ndarray] = None
    directions: Optional[np.ndarray] = None
    press_trials: Optional[np.ndarray] = None


@dataclass
class LoadedSession:
    """Everything the pipeline needs, parsed from a session directory."""

    path: Path
    manifest: dict
    participant_id: str
    trial_windows: list[tuple[float, float]]
    layouts: list[TrialLayout]
    reference_id: str
    devices: dict[str, LoadedDevice]
    markers: dict[str, MarkerData] = field(default_factory=dict)

    @property
    def n_trials(self) -> int:
        return len(self.layouts)

    def device_of_kind(self, kind: str) -> LoadedDevice:
        for dev in self.devices.values():
            if dev.kind == kind:
                return dev
        raise SessionFormatError(f"{self.path}: no device of kind {kind!r} in manifest")


def _read_jsonl(path: Path) -> tuple[list[str], list[dict]]:
    if not path.exists():
        raise SessionFormatError(f"missing stream file: {path}")
    raw: list[str] = []
    parsed: list[dict] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SessionFormatError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            if not isinstance(obj, dict):
                raise SessionFormatError(f"{path}:{lineno}: record must be a JSON object")
            raw.append(line)
            parsed.append(obj)
    return raw, parsed


def _times_of(parsed: list[dict], path: Path) -> np.ndarray:
    try:
        times = np.array([rec["t"] for rec in parsed], dtype=np.float64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionFormatError(f"{path}: record missing numeric 't': {exc}") from exc
    if times.size > 1 and np.any(np.diff(times) <= 0.0):
        raise SessionFormatError(f"{path}: times are not strictly increasing")
    return times


def _read_marker_file(path: Path, device_id: str) -> MarkerData:
    raw, parsed = _read_jsonl(path)
    times = _times_of(parsed, path)
    try:
        seqs = np.array([rec["seq"] for rec in parsed], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionFormatError(f"{path}: marker record missing integer 'seq': {exc}") from exc
    return MarkerData(device_id=device_id, seqs=seqs, t_device=times, raw_lines=raw)


def read_session(session_dir: str | Path) -> LoadedSession:
    """Parse and validate a session directory."""
    session_dir = Path(session_dir)
    manifest_path = session_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise SessionFormatError(f"missing manifest: {manifest_path}")
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"{manifest_path}: invalid JSON: {exc}") from exc

    try:
        participant_id = manifest["session"]["participant_id"]
        reference = manifest["reference"]
        device_entries = manifest["devices"]
        trial_entries = manifest["trials"]
    except (KeyError, TypeError) as exc:
        raise SessionFormatError(f"{manifest_path}: missing required key: {exc}") from exc

    layouts: list[TrialLayout] = []
    windows: list[tuple[float, float]] = []
    for entry in trial_entries:
        try:
            trial_id = int(entry["trial_id"])
            windows.append((float(entry["start"]), float(entry["end"])))
            layout_data = entry["layout"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionFormatError(f"{manifest_path}: bad trial entry: {exc}") from exc
        layouts.append(_layout_from_dict(trial_id, layout_data, manifest_path))

    devices: dict[str, LoadedDevice] = {}
    markers: dict[str, MarkerData] = {}
    for entry in device_entries:
        try:
            device_id = entry["device_id"]
            kind = entry["kind"]
            rate = float(entry["nominal_rate"])
            samples_file = entry["samples_file"]
            markers_file = entry["markers_file"]
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionFormatError(f"{manifest_path}: bad device entry: {exc}") from exc
        samples_path = session_dir / samples_file
        raw, parsed = _read_jsonl(samples_path)
        times = _times_of(parsed, samples_path)
        dev = LoadedDevice(
            device_id=device_id,
            kind=kind,
            nominal_rate=rate,
            times=times,
            raw_lines=raw,
            channel_count=entry.get("channel_count"),
        )
        try:
            if kind == "gaze":
                dev.origins = np.array([rec["o"] for rec in parsed], dtype=np.float64)
                dev.directions = np.array([rec["d"] for rec in parsed], dtype=np.float64)
                if dev.directions.ndim != 2 or dev.directions.shape[1] != 3:
                    raise ValueError("gaze 'd' must be a 3-vector")
            elif kind == "input":
                dev.press_trials = np.array([rec["trial"] for rec in parsed], dtype=np.int64)
        except (KeyError, TypeError, ValueError) as exc:
            raise SessionFormatError(f"{samples_path}: bad {kind} record: {exc}") from exc
        devices[device_id] = dev
        markers[device_id] = _read_marker_file(session_dir / markers_file, device_id)

    reference_id = reference.get("clock_id", "stim")
    markers[reference_id] = _read_marker_file(
        session_dir / reference.get("markers_file", markers_filename(reference_id)),
        reference_id,
    )

    return LoadedSession(
        path=session_dir,
        manifest=manifest,
        participant_id=participant_id,
        trial_windows=windows,
        layouts=layouts,
        reference_id=reference_id,
        devices=devices,
        markers=markers,
    )


def write_aligned(
    session_dir: str | Path,
    records: Sequence[tuple[float, str, str, str]],
    diagnostics: dict,
) -> None:
    """Write aligned.jsonl (pre-sorted records) and sync_diagnostics.json.

    records entries are (t_reference, device_id, kind, raw_payload_line);
    payloads are embedded verbatim so original records pass through
    byte-identically.
    """
    session_dir = Path(session_dir)
    _write_lines(
        session_dir / ALIGNED_NAME,
        (
            f'{{"data": {raw}, "device": "{device_id}", "kind": "{kind}", "t": {fmt_time(t)}}}'
            for t, device_id, kind, raw in records
        ),
    )
    write_json(session_dir / DIAGNOSTICS_NAME, diagnostics)


@dataclass
class DetectionsFile:
    """Contents of a detections.json artifact."""

    params: dict
    participants: list[str]
    n_trials: int
    detections: list[DetectionEvent]
    false_alarms: list[FalseAlarm]


def write_detections(
    out_dir: str | Path,
    detections: Sequence[DetectionEvent],
    false_alarms: Sequence[FalseAlarm],
    params: dict,
    participants: Sequence[str],
    n_trials: int,
) -> Path:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {
        "params": dict(params),
        "participants": list(participants),
        "n_trials": int(n_trials),
        "detections": [detection_dict(e) for e in detections],
        "false_alarms": [false_alarm_dict(f) for f in false_alarms],
    }
    path = out_dir / DETECTIONS_NAME
    write_json(path, payload)
    return path


def read_detections(path: str | Path) -> DetectionsFile:
    """Read a detections.json (or a directory containing one)."""
    path = Path(path)
    if path.is_dir():
        path = path / DETECTIONS_NAME
    if not path.exists():
        raise SessionFormatError(f"missing detections file: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise SessionFormatError(f"{path}: invalid JSON: {exc}") from exc
    try:
        return DetectionsFile(
            params=data.get("params", {}),
            participants=list(data["participants"]),
            n_trials=int(data["n_trials"]),
            detections=[detection_from_dict(d) for d in data["detections"]],
            false_alarms=[false_alarm_from_dict(d) for d in data.get("false_alarms", [])],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SessionFormatError(f"{path}: bad detections payload: {exc}") from exc


def read_ground_truth(session_dir: str | Path) -> dict:
    path = Path(session_dir) / GROUND_TRUTH_NAME
    if not path.exists():
        raise SessionFormatError(f"missing ground truth file: {path}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def report_csv(report) -> str:
    """Flat per-hazard CSV rendering of a DetectionReport."""
    import csv
    import io

    from .scene import _CATALOG, category_of

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        [
            "hazard_id",
            "category",
            "description",
            "count",
            "ratio",
            "ratio_percent",
            "category_ratio_percent",
            "per_opportunity_rate",
        ]
    )
    for hazard_id in sorted(report.per_hazard_counts):
        category, description = _CATALOG[hazard_id]
        writer.writerow(
            [
                hazard_id,
                category.value,
                description,
                report.per_hazard_counts[hazard_id],
                repr(report.per_hazard_ratio[hazard_id]),
                repr(report.per_hazard_ratio[hazard_id] * 100.0),
                repr(report.per_category_ratio[category_of(hazard_id)] * 100.0),
                repr(report.per_opportunity_rate[hazard_id]),
            ]
        )
    return buf.getvalue()


def write_report_files(report, out_dir: str | Path, fmt: str = "json") -> list[Path]:
    """Write report.json and/or report.csv; returns the written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    if fmt in ("json", "both"):
        path = out_dir / "report.json"
        write_json(path, report.to_json_dict())
        written.append(path)
    if fmt in ("csv", "both"):
        path = out_dir / "report.csv"
        _write_text(path, report_csv(report))
        written.append(path)
    return written
