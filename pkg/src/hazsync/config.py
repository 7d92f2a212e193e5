"""Run configuration: JSON schema, defaults, and plan generation.

A config file is a JSON object; any omitted key falls back to the
default below, and unknown keys are rejected so typos fail loudly.
The resolved config fully determines a simulated session together
with the seed.
"""

from __future__ import annotations

import copy
import json
from pathlib import Path
from typing import Any, Optional

import numpy as np

from .errors import InvalidConfig
from .gaze import DEFAULT_CONE_HALF_ANGLE_DEG, DEFAULT_GAP_TOLERANCE
from .labeling import DEFAULT_WINDOW
from .scene import (
    DEFAULT_AOI_RADIUS,
    DEFAULT_MIN_SEPARATION,
    DEFAULT_SITE_BOUNDS,
    generate_trial_layout,
)
from .simulator import (
    DEFAULT_REST_DURATION,
    DEFAULT_TRIAL_DURATION,
    PROTOCOL_TRIALS,
    DeviceProfile,
    PlannedBehavior,
    SessionPlan,
    SimOptions,
)

_RNG_BEHAVIORS = 17

DEFAULT_CONFIG: dict[str, Any] = {
    "participant": {"id": "p001", "age": 25.1},
    "seed": 0,
    "protocol": {
        "n_trials": PROTOCOL_TRIALS,
        "trial_duration": DEFAULT_TRIAL_DURATION,
        "rest_duration": DEFAULT_REST_DURATION,
    },
    "scene": {
        "site_bounds": [list(DEFAULT_SITE_BOUNDS[0]), list(DEFAULT_SITE_BOUNDS[1])],
        "min_separation": DEFAULT_MIN_SEPARATION,
        "aoi_radius": DEFAULT_AOI_RADIUS,
        "min_view_angle_deg": 12.0,
        "min_view_distance": 1.5,
        "viewpoint": [0.0, 0.0, 1.7],
    },
    "behaviors": {
        "per_trial_min": 2,
        "per_trial_max": 5,
        "press_prob": 0.8,
        "false_alarm_prob": 0.1,
    },
    "gaze": {
        "jitter_deg": 0.5,
        "avoid_margin_deg": 8.0,
        "fixation_min": 0.25,
        "fixation_max": 0.8,
    },
    "devices": [
        {
            "device_id": "eeg01",
            "kind": "eeg",
            "nominal_rate": 128.0,
            "channel_count": 14,
            "clock_scale": 1.0003,
            "clock_offset": 5.25,
            "marker_jitter_sigma": 0.0005,
            "marker_drop_prob": 0.02,
        },
        {
            "device_id": "gaze01",
            "kind": "gaze",
            "nominal_rate": 120.0,
            "clock_scale": 0.99985,
            "clock_offset": -3.75,
            "marker_jitter_sigma": 0.0005,
            "marker_drop_prob": 0.02,
        },
        {
            "device_id": "input01",
            "kind": "input",
            "nominal_rate": 1000.0,
            "clock_scale": 1.00005,
            "clock_offset": 1.5,
            "marker_jitter_sigma": 0.0002,
            "marker_drop_prob": 0.01,
        },
    ],
    "labeling": {
        "window": DEFAULT_WINDOW,
        "cone_half_angle_deg": DEFAULT_CONE_HALF_ANGLE_DEG,
        "gap_tolerance": DEFAULT_GAP_TOLERANCE,
    },
}

_DEVICE_KEYS = set(DEFAULT_CONFIG["devices"][0]) | {"channel_count"}


def _merge(base: dict, override: dict, path: str) -> dict:
    out = copy.deepcopy(base)
    for key, value in override.items():
        if key not in base:
            raise InvalidConfig(f"unknown config key {path + key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, dict):
                raise InvalidConfig(f"config key {path + key!r} must be an object")
            out[key] = _merge(base[key], value, path + key + ".")
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(overrides: Optional[dict] = None) -> dict[str, Any]:
    """Defaults merged with overrides, then validated."""
    if overrides is None:
        overrides = {}
    if not isinstance(overrides, dict):
        raise InvalidConfig("config root must be a JSON object")
    cfg = _merge(DEFAULT_CONFIG, overrides, "")
    _validate(cfg)
    return cfg


def load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise InvalidConfig(f"config file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise InvalidConfig(f"config file {path} is not valid JSON: {exc}") from exc
    return resolve_config(data)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise InvalidConfig(message)


def _validate(cfg: dict[str, Any]) -> None:
    proto = cfg["protocol"]
    _require(proto["n_trials"] == PROTOCOL_TRIALS, f"protocol.n_trials must be {PROTOCOL_TRIALS}")
    _require(proto["trial_duration"] > 0, "protocol.trial_duration must be > 0")
    _require(proto["rest_duration"] >= 0, "protocol.rest_duration must be >= 0")

    beh = cfg["behaviors"]
    _require(1 <= beh["per_trial_min"] <= beh["per_trial_max"], "behaviors.per_trial_min/max invalid")
    _require(0.0 <= beh["press_prob"] <= 1.0, "behaviors.press_prob must be in [0, 1]")
    _require(0.0 <= beh["false_alarm_prob"] <= 1.0, "behaviors.false_alarm_prob must be in [0, 1]")
    _require(beh["press_prob"] + beh["false_alarm_prob"] <= 1.0,
             "behaviors.press_prob + false_alarm_prob must be <= 1")

    gaze = cfg["gaze"]
    _require(gaze["jitter_deg"] >= 0.0, "gaze.jitter_deg must be >= 0")
    _require(gaze["avoid_margin_deg"] > 0.0, "gaze.avoid_margin_deg must be > 0")
    _require(0.0 < gaze["fixation_min"] <= gaze["fixation_max"], "gaze.fixation_min/max invalid")

    lab = cfg["labeling"]
    _require(lab["window"] > 0.0, "labeling.window must be > 0")
    _require(0.0 < lab["cone_half_angle_deg"] <= 10.0, "labeling.cone_half_angle_deg must be in (0, 10]")
    _require(lab["gap_tolerance"] >= 0.0, "labeling.gap_tolerance must be >= 0")

    devices = cfg["devices"]
    _require(isinstance(devices, list) and devices, "devices must be a non-empty list")
    kinds = []
    for entry in devices:
        _require(isinstance(entry, dict), "each device must be an object")
        unknown = set(entry) - _DEVICE_KEYS
        _require(not unknown, f"unknown device keys {sorted(unknown)}")
        _require("device_id" in entry and "kind" in entry, "device needs device_id and kind")
        kinds.append(entry["kind"])
    for kind in ("eeg", "gaze", "input"):
        _require(kinds.count(kind) == 1, f"config needs exactly one {kind!r} device")

    try:
        device_profiles(cfg)
    except ValueError as exc:
        raise InvalidConfig(f"invalid device profile: {exc}") from exc


def device_profiles(cfg: dict[str, Any]) -> list[DeviceProfile]:
    profiles = []
    for entry in cfg["devices"]:
        kwargs = dict(entry)
        profiles.append(DeviceProfile(**kwargs))
    return profiles


def sim_options(cfg: dict[str, Any]) -> SimOptions:
    gaze = cfg["gaze"]
    return SimOptions(
        viewpoint=tuple(cfg["scene"]["viewpoint"]),
        gaze_jitter_deg=gaze["jitter_deg"],
        avoid_margin_deg=gaze["avoid_margin_deg"],
        fixation_min=gaze["fixation_min"],
        fixation_max=gaze["fixation_max"],
        ground_truth_window=cfg["labeling"]["window"],
    )


def build_session_plan(cfg: dict[str, Any], seed: Optional[int] = None) -> SessionPlan:
    """Generate the scripted protocol for one session.

    Layouts are re-randomized per trial; behaviors are drawn so that a
    press always lands while (or just after) its hazard is being looked
    at, and a deliberate late press lands long enough after any gaze
    that the lookback window is empty (a planned false alarm).
    """
    if seed is None:
        seed = cfg["seed"]
    scene = cfg["scene"]
    proto = cfg["protocol"]
    beh = cfg["behaviors"]
    duration = float(proto["trial_duration"])

    bounds = (tuple(scene["site_bounds"][0]), tuple(scene["site_bounds"][1]))
    layouts = tuple(
        generate_trial_layout(
            trial_id,
            layout_seed=seed,
            site_bounds=bounds,
            min_separation=scene["min_separation"],
            aoi_radius=scene["aoi_radius"],
            viewpoint=tuple(scene["viewpoint"]),
            min_view_angle_deg=scene["min_view_angle_deg"],
            min_view_distance=scene["min_view_distance"],
        )
        for trial_id in range(1, proto["n_trials"] + 1)
    )

    rng = np.random.default_rng([seed, _RNG_BEHAVIORS])
    window = float(cfg["labeling"]["window"])
    trials_behaviors: list[tuple[PlannedBehavior, ...]] = []
    for _ in layouts:
        count = int(rng.integers(beh["per_trial_min"], beh["per_trial_max"] + 1))
        behaviors: list[PlannedBehavior] = []
        cursor = rng.uniform(0.5, 1.5)
        for _ in range(count):
            onset = float(cursor)
            gaze_duration = float(rng.uniform(0.8, 2.5))
            end = onset + gaze_duration
            if end > duration - 2.0 * window - 1.5:
                break
            hazard_id = int(rng.integers(1, 11))
            roll = rng.random()
            press: Optional[float] = None
            if roll < beh["press_prob"]:
                # In or shortly after the gaze interval: always detectable.
                press = float(rng.uniform(onset + 0.3, end + 0.5 * window))
            elif roll < beh["press_prob"] + beh["false_alarm_prob"]:
                # Far enough past the gaze interval that the window is empty.
                press = float(end + window + rng.uniform(0.2, 0.8))
            behaviors.append(
                PlannedBehavior(
                    hazard_id=hazard_id,
                    gaze_onset=onset,
                    gaze_duration=gaze_duration,
                    press_time=press,
                )
            )
            cursor = max(end, press if press is not None else end) + rng.uniform(0.4, 1.0)
        trials_behaviors.append(tuple(behaviors))

    return SessionPlan(
        participant_id=cfg["participant"]["id"],
        trials=layouts,
        behaviors=tuple(trials_behaviors),
        trial_duration=duration,
        rest_duration=float(proto["rest_duration"]),
        age=float(cfg["participant"]["age"]),
    )


def public_config(cfg: dict[str, Any]) -> dict[str, Any]:
    """Config echo safe to store beside recorded data.

    Device clock parameters are what the sync stage must recover, so
    they are stripped here and live only in the ground-truth file.
    """
    cfg = copy.deepcopy(cfg)
    hidden = ("clock_scale", "clock_offset", "marker_jitter_sigma", "marker_drop_prob")
    for entry in cfg["devices"]:
        for key in hidden:
            entry.pop(key, None)
    return cfg
