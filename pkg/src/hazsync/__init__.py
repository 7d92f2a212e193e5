"""hazsync: deterministic multi-device session sync and hazard labeling.

Simulates drifting sensor streams (EEG-like, gaze, button input) tied
together by shared sequence-numbered markers, recovers per-device affine
clock maps from those markers, realigns everything onto the reference
timeline, labels button presses with the hazard gazed at within a
one-second lookback window, and aggregates detection-ratio analytics.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from ._kernels import available_backends
from .analytics import (
    CATEGORY_ORDER,
    DetectionReport,
    build_report,
    category_rollup,
    count_by_hazard,
    detection_ratio,
)
from .config import (
    DEFAULT_CONFIG,
    build_session_plan,
    device_profiles,
    load_config,
    resolve_config,
    sim_options,
)
from .errors import (
    DegenerateFit,
    HazSyncError,
    InsufficientMarkers,
    InvalidConfig,
    InvalidPlan,
    MissingModel,
    NoCommonMarkers,
    NoDetections,
    OutOfRange,
    PlacementInfeasible,
    SessionFormatError,
)
from .gaze import (
    DEFAULT_CONE_HALF_ANGLE_DEG,
    DEFAULT_GAP_TOLERANCE,
    Dwell,
    GazeHit,
    GazeSample,
    cast_gaze_sample,
    cast_gaze_track,
    segment_dwells,
)
from .labeling import (
    DEFAULT_WINDOW,
    ButtonPress,
    DetectionEvent,
    FalseAlarm,
    dedupe_detections,
    label_detections,
)
from .pipeline import LabelResult, align_loaded, fit_session_models, label_loaded, label_recording
from .scene import (
    CATEGORY_MEMBERS,
    HAZARD_IDS,
    HazardAoi,
    HazardCategory,
    TrialLayout,
    category_of,
    generate_trial_layout,
    hazard_catalog,
)
from .session_io import read_detections, read_session, write_detections, write_session
from .simulator import (
    DeviceProfile,
    PlannedBehavior,
    ScheduledMarker,
    SessionPlan,
    SessionRecording,
    SimOptions,
    marker_schedule,
    planned_outcomes,
    simulate_session,
)
from .timeline import (
    AlignedRecord,
    ClockModel,
    Marker,
    MarkerPair,
    Timestamp,
    align_streams,
    fit_clock_map,
    interpolate_at,
    match_markers,
    to_device,
    to_reference,
)

__version__ = "0.1.0"

__all__ = [
    "AlignedRecord",
    "ButtonPress",
    "CATEGORY_MEMBERS",
    "CATEGORY_ORDER",
    "ClockModel",
    "DEFAULT_CONE_HALF_ANGLE_DEG",
    "DEFAULT_CONFIG",
    "DEFAULT_GAP_TOLERANCE",
    "DEFAULT_WINDOW",
    "DegenerateFit",
    "DetectionEvent",
    "DetectionReport",
    "DeviceProfile",
    "Dwell",
    "FalseAlarm",
    "GazeHit",
    "GazeSample",
    "HAZARD_IDS",
    "HazSyncError",
    "HazardAoi",
    "HazardCategory",
    "InsufficientMarkers",
    "InvalidConfig",
    "InvalidPlan",
    "KERNEL_BACKEND",
    "LabelResult",
    "Marker",
    "MarkerPair",
    "MissingModel",
    "NoCommonMarkers",
    "NoDetections",
    "OutOfRange",
    "PlacementInfeasible",
    "PlannedBehavior",
    "ScheduledMarker",
    "SessionFormatError",
    "SessionPlan",
    "SessionRecording",
    "SimOptions",
    "Timestamp",
    "TrialLayout",
    "align_loaded",
    "align_streams",
    "available_backends",
    "build_report",
    "build_session_plan",
    "cast_gaze_sample",
    "cast_gaze_track",
    "category_of",
    "category_rollup",
    "count_by_hazard",
    "dedupe_detections",
    "detection_ratio",
    "device_profiles",
    "fit_clock_map",
    "fit_session_models",
    "generate_trial_layout",
    "hazard_catalog",
    "interpolate_at",
    "label_detections",
    "label_loaded",
    "label_recording",
    "load_config",
    "marker_schedule",
    "match_markers",
    "planned_outcomes",
    "read_detections",
    "read_session",
    "resolve_config",
    "sim_options",
    "simulate_session",
    "to_device",
    "to_reference",
    "write_detections",
    "write_session",
]
