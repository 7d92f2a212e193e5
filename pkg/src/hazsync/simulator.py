"""Deterministic synthesis of complete multi-device recording sessions.

A session plan fixes the protocol (ten 30 s trials with one-minute rests,
re-randomized hazard layouts) and the participant's scripted behavior per
trial: intervals of looking at a specific hazard, optionally followed by
a button press.  Simulation turns the plan into per-device data:

  * every stimulation-side event (trial start/end, press) becomes one
    sequence-numbered marker delivered to every device through that
    device's clock transform, jitter, and dropout;
  * the gaze device records eye rays (aimed during behaviors, an idle
    scan path elsewhere) on its own clock;
  * the EEG device records colored noise (timing matters, content does
    not); the input device records the presses.

Everything is a pure function of (plan, profiles, seed).  Ground truth
(which detections an ideal labeler would produce) is derived from the
plan itself and stored with the recording: with zero jitter and zero
dropout the full sync+label pipeline must reproduce it exactly, clock
drift or not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import InvalidPlan
from .labeling import DetectionEvent, FalseAlarm, dedupe_detections
from .scene import TrialLayout
from .timeline import ClockModel, to_device

DEVICE_KINDS = ("eeg", "gaze", "input")
PROTOCOL_TRIALS = 10
DEFAULT_TRIAL_DURATION = 30.0
DEFAULT_REST_DURATION = 60.0
DEFAULT_EEG_CHANNELS = 14

MARKER_CAUSES = ("trial_start", "trial_end", "press")

# Sub-stream tags for seeding independent generators off one session seed.
_RNG_MARKERS = 37
_RNG_FIXATIONS = 29
_RNG_JITTER = 31
_RNG_EEG = 23


@dataclass(frozen=True)
class DeviceProfile:
    """Static description of one recording device, including its clock.

    The device clock relates to the reference clock as
    t_reference = clock_scale * t_device + clock_offset.
    """

    device_id: str
    kind: str
    nominal_rate: float
    clock_scale: float = 1.0
    clock_offset: float = 0.0
    marker_jitter_sigma: float = 0.0
    marker_drop_prob: float = 0.0
    channel_count: Optional[int] = None

    def __post_init__(self):
        if self.kind not in DEVICE_KINDS:
            raise ValueError(f"unknown device kind {self.kind!r}")
        if self.nominal_rate <= 0.0:
            raise ValueError("nominal_rate must be > 0")
        if self.clock_scale <= 0.0:
            raise ValueError("clock_scale must be > 0")
        if self.marker_jitter_sigma < 0.0:
            raise ValueError("marker_jitter_sigma must be >= 0")
        if not (0.0 <= self.marker_drop_prob < 1.0):
            raise ValueError("marker_drop_prob must be in [0, 1)")
        if self.kind == "eeg" and self.channel_count is None:
            object.__setattr__(self, "channel_count", DEFAULT_EEG_CHANNELS)
        if self.channel_count is not None and self.channel_count < 1:
            raise ValueError("channel_count must be >= 1")

    def clock_model(self) -> ClockModel:
        """The true device clock as a ClockModel (simulation-side view)."""
        return ClockModel(
            scale=self.clock_scale, offset=self.clock_offset, residual_rms=0.0, n_markers=2
        )


@dataclass(frozen=True)
class PlannedBehavior:
    """One scripted act: look at a hazard, possibly press the button.

    Times are seconds relative to the trial start.  press_time=None
    means the participant looks without pressing.
    """

    hazard_id: int
    gaze_onset: float
    gaze_duration: float
    press_time: Optional[float] = None

    @property
    def gaze_end(self) -> float:
        return self.gaze_onset + self.gaze_duration


@dataclass(frozen=True)
class SessionPlan:
    """Full scripted protocol for one participant."""

    participant_id: str
    trials: tuple[TrialLayout, ...]
    behaviors: tuple[tuple[PlannedBehavior, ...], ...]
    trial_duration: float = DEFAULT_TRIAL_DURATION
    rest_duration: float = DEFAULT_REST_DURATION
    age: float = 25.1

    def trial_start(self, trial_id: int) -> float:
        return (trial_id - 1) * (self.trial_duration + self.rest_duration)

    def trial_starts(self) -> list[float]:
        return [self.trial_start(t.trial_id) for t in self.trials]


@dataclass(frozen=True)
class ScheduledMarker:
    """One stimulation-side event on the reference clock."""

    seq: int
    t_reference: float
    cause: str
    trial_id: int


@dataclass
class MarkerObservation:
    """Markers as recorded on one device's clock (post jitter/dropout)."""

    device_id: str
    seqs: np.ndarray
    t_device: np.ndarray


@dataclass
class SessionRecording:
    """Everything one simulated session produced, in memory."""

    plan: SessionPlan
    profiles: dict[str, DeviceProfile]
    seed: int
    options: "SimOptions"
    schedule: list[ScheduledMarker]
    markers: dict[str, MarkerObservation]  # includes the reference stream
    gaze_device: str
    gaze_t_device: np.ndarray
    gaze_t_reference: np.ndarray
    gaze_origin: np.ndarray
    gaze_directions: np.ndarray
    eeg_device: str
    eeg_t_device: np.ndarray
    eeg_channels: np.ndarray
    input_device: str
    press_t_device: np.ndarray
    press_trials: np.ndarray
    ground_truth: list[DetectionEvent] = field(default_factory=list)
    ground_truth_false_alarms: list[FalseAlarm] = field(default_factory=list)

    REFERENCE_ID = "stim"

    def true_clocks(self) -> dict[str, tuple[float, float]]:
        return {d: (p.clock_scale, p.clock_offset) for d, p in self.profiles.items()}

    def trial_windows(self) -> list[tuple[float, float]]:
        return [
            (self.plan.trial_start(t.trial_id), self.plan.trial_start(t.trial_id) + self.plan.trial_duration)
            for t in self.plan.trials
        ]


@dataclass(frozen=True)
class SimOptions:
    """Behavioral knobs that are not part of any device profile."""

    viewpoint: tuple[float, float, float] = (0.0, 0.0, 1.7)
    gaze_jitter_deg: float = 0.5
    # Idle gaze keeps at least this angle from every hazard center, so an
    # idle scan never reads as "looking at" a hazard at the default cone.
    avoid_margin_deg: float = 8.0
    fixation_min: float = 0.25
    fixation_max: float = 0.8
    eeg_amplitude: float = 20.0
    ground_truth_window: float = 1.0


def sample_count(duration: float, rate: float) -> int:
    """Number of grid samples in [0, duration) at the given rate."""
    return int(math.floor(duration * rate * (1.0 - 1e-12))) + 1


def sample_ticks(duration: float, rate: float) -> np.ndarray:
    """Trial-relative sample times n/rate covering [0, duration)."""
    n = sample_count(duration, rate)
    return np.arange(n, dtype=np.float64) / rate


def behavior_mask(ticks: np.ndarray, behavior: PlannedBehavior) -> np.ndarray:
    """Which trial-relative ticks fall inside the behavior's gaze interval."""
    return (ticks >= behavior.gaze_onset) & (ticks < behavior.gaze_end)


def validate_plan(plan: SessionPlan) -> None:
    """Raise InvalidPlan on any protocol violation."""
    if len(plan.trials) != PROTOCOL_TRIALS:
        raise InvalidPlan(f"protocol requires {PROTOCOL_TRIALS} trials, plan has {len(plan.trials)}")
    if len(plan.behaviors) != len(plan.trials):
        raise InvalidPlan("behaviors must have one entry per trial")
    if plan.trial_duration <= 0.0 or plan.rest_duration < 0.0:
        raise InvalidPlan("trial_duration must be > 0 and rest_duration >= 0")
    seen_ids = [t.trial_id for t in plan.trials]
    if seen_ids != list(range(1, len(plan.trials) + 1)):
        raise InvalidPlan(f"trial ids must be 1..{len(plan.trials)} in order, got {seen_ids}")
    for layout, trial_behaviors in zip(plan.trials, plan.behaviors):
        hazard_ids = {p.id for p in layout.placements}
        prev_end = -math.inf
        for b in sorted(trial_behaviors, key=lambda b: b.gaze_onset):
            if b.hazard_id not in hazard_ids:
                raise InvalidPlan(f"trial {layout.trial_id}: unknown hazard {b.hazard_id}")
            if b.gaze_duration <= 0.0 or b.gaze_onset < 0.0 or b.gaze_end > plan.trial_duration:
                raise InvalidPlan(
                    f"trial {layout.trial_id}: gaze interval "
                    f"[{b.gaze_onset}, {b.gaze_end}] outside the trial"
                )
            if b.gaze_onset < prev_end:
                raise InvalidPlan(f"trial {layout.trial_id}: overlapping gaze intervals")
            prev_end = b.gaze_end
            if b.press_time is not None and not (0.0 < b.press_time <= plan.trial_duration):
                raise InvalidPlan(
                    f"trial {layout.trial_id}: press at {b.press_time} outside (0, trial_duration]"
                )


def marker_schedule(plan: SessionPlan) -> list[ScheduledMarker]:
    """All stimulation-side events, seq-numbered densely in time order.

    One marker per trial start, trial end, and press.  Identical event
    times make the schedule ill-defined and raise InvalidPlan.
    """
    validate_plan(plan)
    events: list[tuple[float, str, int]] = []
    for layout, trial_behaviors in zip(plan.trials, plan.behaviors):
        start = plan.trial_start(layout.trial_id)
        events.append((start, "trial_start", layout.trial_id))
        events.append((start + plan.trial_duration, "trial_end", layout.trial_id))
        for b in trial_behaviors:
            if b.press_time is not None:
                events.append((start + b.press_time, "press", layout.trial_id))
    events.sort(key=lambda e: (e[0], MARKER_CAUSES.index(e[1])))
    for a, b in zip(events, events[1:]):
        if b[0] <= a[0]:
            raise InvalidPlan(f"marker events at identical reference time {a[0]!r}")
    return [
        ScheduledMarker(seq=i, t_reference=t, cause=cause, trial_id=trial)
        for i, (t, cause, trial) in enumerate(events)
    ]


def planned_outcomes(
    plan: SessionPlan,
    gaze_rate: float,
    window: float = 1.0,
) -> tuple[list[DetectionEvent], list[FalseAlarm]]:
    """Apply the lookback rule to the plan itself (ground truth).

    Mirrors exactly what an ideal pipeline sees: gaze hits exist at the
    sample-grid ticks inside behavior intervals, and nowhere else (idle
    gaze avoids hazards by construction).  For each planned press the
    latest such tick inside the closed window names the hazard; no tick
    means a false alarm.  Duplicate (trial, hazard) detections collapse
    to the earliest press, as in the labeler.
    """
    validate_plan(plan)
    ticks = sample_ticks(plan.trial_duration, gaze_rate)
    # Absolute hit times per trial per behavior, computed with the same
    # float expressions the gaze synthesizer uses.
    trial_hits: list[list[tuple[np.ndarray, int]]] = []
    for layout, trial_behaviors in zip(plan.trials, plan.behaviors):
        start = plan.trial_start(layout.trial_id)
        abs_times = start + ticks
        hits = [
            (abs_times[behavior_mask(ticks, b)], b.hazard_id)
            for b in trial_behaviors
        ]
        trial_hits.append(hits)

    detections: list[DetectionEvent] = []
    false_alarms: list[FalseAlarm] = []
    for layout, trial_behaviors in zip(plan.trials, plan.behaviors):
        start = plan.trial_start(layout.trial_id)
        for b in trial_behaviors:
            if b.press_time is None:
                continue
            t_press = start + b.press_time
            best_t = -math.inf
            best_hazard = None
            for hits in trial_hits:  # windows may span trials when rests are short
                for times, hazard_id in hits:
                    if times.size == 0:
                        continue
                    in_window = times[(times >= t_press - window) & (times <= t_press)]
                    if in_window.size and in_window[-1] > best_t:
                        best_t = float(in_window[-1])
                        best_hazard = hazard_id
            if best_hazard is None:
                false_alarms.append(
                    FalseAlarm(
                        participant_id=plan.participant_id,
                        trial_id=layout.trial_id,
                        t_press=t_press,
                    )
                )
            else:
                detections.append(
                    DetectionEvent(
                        participant_id=plan.participant_id,
                        trial_id=layout.trial_id,
                        hazard_id=best_hazard,
                        t_press=t_press,
                        t_gaze=best_t,
                    )
                )
    detections = dedupe_detections(detections)
    false_alarms.sort(key=lambda f: (f.participant_id, f.trial_id, f.t_press))
    return detections, false_alarms


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _band_direction(rng: np.random.Generator) -> np.ndarray:
    """Uniform direction within the idle-gaze elevation band."""
    az = rng.uniform(-math.pi, math.pi)
    sin_lo, sin_hi = math.sin(math.radians(-35.0)), math.sin(math.radians(15.0))
    s = rng.uniform(sin_lo, sin_hi)
    c = math.sqrt(1.0 - s * s)
    return np.array([c * math.cos(az), c * math.sin(az), s])


def _idle_direction(
    rng: np.random.Generator,
    hazard_dirs: np.ndarray,
    margin_cos: float,
    tries: int = 10_000,
) -> np.ndarray:
    for _ in range(tries):
        d = _band_direction(rng)
        if np.all(hazard_dirs @ d < margin_cos):
            return d
    raise InvalidPlan("could not sample an idle gaze direction away from all hazards")


def _tangent_basis(dirs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-direction orthonormal tangent vectors (for angular jitter)."""
    up = np.zeros_like(dirs)
    up[:, 2] = 1.0
    near_pole = np.abs(dirs[:, 2]) > 0.99
    up[near_pole] = (1.0, 0.0, 0.0)
    e1 = np.cross(up, dirs)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(dirs, e1)
    return e1, e2


def _trial_gaze_directions(
    layout: TrialLayout,
    trial_behaviors: Sequence[PlannedBehavior],
    ticks: np.ndarray,
    viewpoint: np.ndarray,
    options: SimOptions,
    rng_fix: np.random.Generator,
    rng_jit: np.random.Generator,
) -> np.ndarray:
    n = ticks.shape[0]
    hazard_dirs = layout.centers() - viewpoint
    hazard_dirs /= np.linalg.norm(hazard_dirs, axis=1, keepdims=True)
    margin_cos = math.cos(math.radians(options.avoid_margin_deg))

    # Idle scan path: piecewise-constant fixations with saccade jumps.
    dirs = np.empty((n, 3), dtype=np.float64)
    t_cursor = 0.0
    duration = float(ticks[-1]) + 1.0 if n else 0.0
    start_idx = 0
    while start_idx < n:
        seg = rng_fix.uniform(options.fixation_min, options.fixation_max)
        d = _idle_direction(rng_fix, hazard_dirs, margin_cos)
        t_cursor += seg
        end_idx = int(np.searchsorted(ticks, min(t_cursor, duration), side="left"))
        end_idx = max(end_idx, start_idx + 1)
        dirs[start_idx:end_idx] = d
        start_idx = end_idx

    # Behavior intervals override the idle path with direct aims.
    for b in trial_behaviors:
        mask = behavior_mask(ticks, b)
        if mask.any():
            aoi = layout.aoi(b.hazard_id)
            dirs[mask] = _unit(np.asarray(aoi.center, dtype=np.float64) - viewpoint)

    if options.gaze_jitter_deg > 0.0:
        sigma = math.radians(options.gaze_jitter_deg)
        e1, e2 = _tangent_basis(dirs)
        g = rng_jit.standard_normal((n, 2)) * sigma
        dirs = dirs + e1 * g[:, :1] + e2 * g[:, 1:]
        dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    return dirs


def _colored_noise(rng: np.random.Generator, n: int, channels: int, rate: float, amplitude: float) -> np.ndarray:
    """Pink-ish noise: white noise shaped by 1/sqrt(f) above a 1 Hz knee."""
    white = rng.standard_normal((n, channels))
    spectrum = np.fft.rfft(white, axis=0)
    freqs = np.fft.rfftfreq(n, d=1.0 / rate)
    weights = 1.0 / np.sqrt(np.maximum(freqs, 1.0))
    weights[0] = 0.0
    shaped = np.fft.irfft(spectrum * weights[:, np.newaxis], n=n, axis=0)
    std = shaped.std(axis=0)
    std[std == 0.0] = 1.0
    return shaped / std * amplitude


def _observe_markers(
    schedule: Sequence[ScheduledMarker],
    profile: DeviceProfile,
    rng: np.random.Generator,
) -> MarkerObservation:
    seqs = np.array([m.seq for m in schedule], dtype=np.int64)
    t_ref = np.array([m.t_reference for m in schedule], dtype=np.float64)
    t_dev = (t_ref - profile.clock_offset) / profile.clock_scale
    jitter = rng.normal(0.0, 1.0, seqs.shape[0])
    drops = rng.random(seqs.shape[0])
    if profile.marker_jitter_sigma > 0.0:
        t_dev = t_dev + jitter * profile.marker_jitter_sigma
    keep = drops >= profile.marker_drop_prob
    t_dev, seqs = t_dev[keep], seqs[keep]
    if np.any(np.diff(t_dev) <= 0.0):
        raise InvalidPlan(
            f"marker jitter on {profile.device_id!r} reordered markers; "
            "plan events are too close together for this jitter level"
        )
    return MarkerObservation(device_id=profile.device_id, seqs=seqs, t_device=t_dev)


def simulate_session(
    plan: SessionPlan,
    profiles: Sequence[DeviceProfile],
    seed: int,
    options: Optional[SimOptions] = None,
) -> SessionRecording:
    """Produce a full session recording, deterministic in (plan, profiles, seed)."""
    options = options or SimOptions()
    validate_plan(plan)

    by_kind: dict[str, DeviceProfile] = {}
    for p in profiles:
        if p.kind in by_kind:
            raise InvalidPlan(f"duplicate device kind {p.kind!r}")
        by_kind[p.kind] = p
    missing = [k for k in DEVICE_KINDS if k not in by_kind]
    if missing:
        raise InvalidPlan(f"missing device kinds: {missing}")
    ids = [p.device_id for p in profiles]
    if len(set(ids)) != len(ids) or SessionRecording.REFERENCE_ID in ids:
        raise InvalidPlan("device ids must be unique and must not shadow the reference id")

    schedule = marker_schedule(plan)
    markers: dict[str, MarkerObservation] = {
        SessionRecording.REFERENCE_ID: MarkerObservation(
            device_id=SessionRecording.REFERENCE_ID,
            seqs=np.array([m.seq for m in schedule], dtype=np.int64),
            t_device=np.array([m.t_reference for m in schedule], dtype=np.float64),
        )
    }
    for i, p in enumerate(sorted(profiles, key=lambda p: p.device_id)):
        markers[p.device_id] = _observe_markers(
            schedule, p, np.random.default_rng([seed, _RNG_MARKERS, i])
        )

    gaze_p = by_kind["gaze"]
    eeg_p = by_kind["eeg"]
    input_p = by_kind["input"]
    viewpoint = np.asarray(options.viewpoint, dtype=np.float64)

    gaze_ticks = sample_ticks(plan.trial_duration, gaze_p.nominal_rate)
    eeg_ticks = sample_ticks(plan.trial_duration, eeg_p.nominal_rate)

    gaze_ref_parts: list[np.ndarray] = []
    gaze_dir_parts: list[np.ndarray] = []
    eeg_ref_parts: list[np.ndarray] = []
    eeg_val_parts: list[np.ndarray] = []
    for layout, trial_behaviors in zip(plan.trials, plan.behaviors):
        start = plan.trial_start(layout.trial_id)
        gaze_ref_parts.append(start + gaze_ticks)
        gaze_dir_parts.append(
            _trial_gaze_directions(
                layout,
                trial_behaviors,
                gaze_ticks,
                viewpoint,
                options,
                np.random.default_rng([seed, _RNG_FIXATIONS, layout.trial_id]),
                np.random.default_rng([seed, _RNG_JITTER, layout.trial_id]),
            )
        )
        eeg_ref_parts.append(start + eeg_ticks)
        eeg_val_parts.append(
            _colored_noise(
                np.random.default_rng([seed, _RNG_EEG, layout.trial_id]),
                eeg_ticks.shape[0],
                eeg_p.channel_count,
                eeg_p.nominal_rate,
                options.eeg_amplitude,
            )
        )

    gaze_t_ref = np.concatenate(gaze_ref_parts)
    gaze_dirs = np.concatenate(gaze_dir_parts)
    eeg_t_ref = np.concatenate(eeg_ref_parts)
    eeg_vals = np.concatenate(eeg_val_parts)

    press_ref: list[float] = []
    press_trials: list[int] = []
    for m in schedule:
        if m.cause == "press":
            press_ref.append(m.t_reference)
            press_trials.append(m.trial_id)

    def dev(profile: DeviceProfile, t_ref: np.ndarray) -> np.ndarray:
        return (t_ref - profile.clock_offset) / profile.clock_scale

    detections, false_alarms = planned_outcomes(
        plan, gaze_p.nominal_rate, options.ground_truth_window
    )

    recording = SessionRecording(
        plan=plan,
        profiles={p.device_id: p for p in profiles},
        seed=seed,
        options=options,
        schedule=schedule,
        markers=markers,
        gaze_device=gaze_p.device_id,
        gaze_t_device=dev(gaze_p, gaze_t_ref),
        gaze_t_reference=gaze_t_ref,
        gaze_origin=viewpoint,
        gaze_directions=gaze_dirs,
        eeg_device=eeg_p.device_id,
        eeg_t_device=dev(eeg_p, eeg_t_ref),
        eeg_channels=eeg_vals,
        input_device=input_p.device_id,
        press_t_device=dev(input_p, np.array(press_ref, dtype=np.float64)),
        press_trials=np.array(press_trials, dtype=np.int64),
        ground_truth=detections,
        ground_truth_false_alarms=false_alarms,
    )
    _check_strictly_increasing(recording)
    return recording


def _check_strictly_increasing(rec: SessionRecording) -> None:
    for name, arr in (
        ("gaze", rec.gaze_t_device),
        ("eeg", rec.eeg_t_device),
        ("presses", rec.press_t_device),
    ):
        if arr.size > 1 and np.any(np.diff(arr) <= 0.0):
            raise InvalidPlan(f"{name} stream is not strictly increasing in device time")


def true_to_device(profile: DeviceProfile, t_reference: float) -> float:
    """Reference-to-device transform using the profile's true clock."""
    return to_device(profile.clock_model(), t_reference)
