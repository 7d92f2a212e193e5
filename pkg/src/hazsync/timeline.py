"""Reference-timeline reconstruction from shared event markers.

Every device records its samples on its own clock.  The stimulation side
emits sequence-numbered markers that each device logs on arrival; pairing
the per-device marker log with the reference log by sequence number gives
(t_device, t_reference) points, and an ordinary least-squares line through
them is the device's clock model.  All samples are then mapped onto the
reference timeline through that affine model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

from .errors import (
    DegenerateFit,
    InsufficientMarkers,
    MissingModel,
    NoCommonMarkers,
    OutOfRange,
)


@dataclass(frozen=True)
class Timestamp:
    """A point in time expressed on one specific clock.

    Ordering is only defined between timestamps on the same clock;
    comparing across clocks raises ValueError.
    """

    value: float
    clock_id: str

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"timestamp must be finite, got {self.value!r}")

    def _check_clock(self, other: "Timestamp") -> None:
        if not isinstance(other, Timestamp):
            raise TypeError(f"cannot compare Timestamp with {type(other).__name__}")
        if other.clock_id != self.clock_id:
            raise ValueError(
                f"cannot compare timestamps on different clocks: "
                f"{self.clock_id!r} vs {other.clock_id!r}"
            )

    def __lt__(self, other):
        self._check_clock(other)
        return self.value < other.value

    def __le__(self, other):
        self._check_clock(other)
        return self.value <= other.value

    def __gt__(self, other):
        self._check_clock(other)
        return self.value > other.value

    def __ge__(self, other):
        self._check_clock(other)
        return self.value >= other.value


@dataclass(frozen=True)
class Marker:
    """One synchronization event as observed on one device's clock."""

    seq: int
    t_device: float

    def __post_init__(self):
        if self.seq < 0:
            raise ValueError(f"marker seq must be >= 0, got {self.seq}")
        if not math.isfinite(self.t_device):
            raise ValueError(f"marker time must be finite, got {self.t_device!r}")


@dataclass(frozen=True)
class MarkerPair:
    """A marker observed on both the device and the reference clock."""

    seq: int
    t_device: float
    t_reference: float


@dataclass(frozen=True)
class ClockModel:
    """Affine map t_reference = scale * t_device + offset."""

    scale: float
    offset: float
    residual_rms: float
    n_markers: int

    def __post_init__(self):
        if not (self.scale > 0.0):
            raise DegenerateFit(f"clock scale must be > 0, got {self.scale!r}")
        if self.residual_rms < 0.0:
            raise ValueError("residual_rms must be >= 0")
        if self.n_markers < 2:
            raise ValueError("a clock model needs at least 2 markers")


@dataclass(frozen=True)
class AlignedRecord:
    """One sample mapped onto the reference timeline.

    ``index`` is the record's position in its original stream; together
    with ``device_id`` it defines the stable tie order of the merge.
    """

    t_reference: float
    device_id: str
    index: int
    payload: Any


def _check_marker_stream(markers: Sequence[Marker], name: str) -> None:
    for a, b in zip(markers, markers[1:]):
        if b.seq <= a.seq:
            raise ValueError(f"{name} markers not strictly increasing in seq")
        if b.t_device <= a.t_device:
            raise ValueError(f"{name} markers not strictly increasing in time")


def match_markers(
    device_markers: Sequence[Marker],
    reference_markers: Sequence[Marker],
) -> list[MarkerPair]:
    """Pair device and reference markers by sequence number.

    Markers present on only one side (dropped on the other) are skipped.
    Raises NoCommonMarkers when the seq intersection is empty.
    """
    _check_marker_stream(device_markers, "device")
    _check_marker_stream(reference_markers, "reference")
    pairs: list[MarkerPair] = []
    i = j = 0
    while i < len(device_markers) and j < len(reference_markers):
        ds, rs = device_markers[i].seq, reference_markers[j].seq
        if ds == rs:
            pairs.append(
                MarkerPair(
                    seq=ds,
                    t_device=device_markers[i].t_device,
                    t_reference=reference_markers[j].t_device,
                )
            )
            i += 1
            j += 1
        elif ds < rs:
            i += 1
        else:
            j += 1
    if not pairs:
        raise NoCommonMarkers("no common marker sequence numbers between streams")
    return pairs


def fit_clock_map(pairs: Sequence[MarkerPair]) -> ClockModel:
    """Least-squares affine fit of t_reference on t_device.

    Uses the centered closed form, so noiseless collinear input recovers
    the exact line (residual at float rounding level).
    """
    n = len(pairs)
    if n < 2:
        raise InsufficientMarkers(f"need >= 2 marker pairs, got {n}")
    xs = [p.t_device for p in pairs]
    ys = [p.t_reference for p in pairs]
    x_mean = math.fsum(xs) / n
    y_mean = math.fsum(ys) / n
    sxx = math.fsum((x - x_mean) ** 2 for x in xs)
    if sxx == 0.0:
        raise DegenerateFit("all device marker times are equal")
    sxy = math.fsum((x - x_mean) * (y - y_mean) for x, y in zip(xs, ys))
    scale = sxy / sxx
    if scale <= 0.0:
        raise DegenerateFit(f"fitted scale {scale!r} is not positive")
    offset = y_mean - scale * x_mean
    rss = math.fsum((y - (scale * x + offset)) ** 2 for x, y in zip(xs, ys))
    return ClockModel(
        scale=scale,
        offset=offset,
        residual_rms=math.sqrt(rss / n),
        n_markers=n,
    )


def to_reference(model: ClockModel, t: float) -> float:
    """Map a device-clock time onto the reference clock."""
    return model.scale * t + model.offset


def to_device(model: ClockModel, t: float) -> float:
    """Map a reference-clock time onto the device clock."""
    return (t - model.offset) / model.scale


def align_streams(
    streams: Mapping[str, Sequence[tuple[float, Any]]],
    models: Mapping[str, ClockModel],
) -> list[AlignedRecord]:
    """Merge per-device (t_device, payload) streams onto the reference clock.

    Output is sorted by reference time with ties broken by device id then
    original stream index; payloads pass through untouched.
    """
    out: list[AlignedRecord] = []
    for device_id in streams:
        if device_id not in models:
            raise MissingModel(f"no clock model for device {device_id!r}")
        model = models[device_id]
        for idx, (t, payload) in enumerate(streams[device_id]):
            out.append(AlignedRecord(to_reference(model, t), device_id, idx, payload))
    out.sort(key=lambda r: (r.t_reference, r.device_id, r.index))
    return out


def interpolate_at(stream: Sequence[tuple[float, float]], t: float) -> float:
    """Linearly interpolate a time-sorted scalar channel at time t.

    t must lie within [first, last] sample time; an exact sample time
    returns that sample's value.
    """
    if not stream:
        raise OutOfRange("cannot interpolate an empty stream")
    if t < stream[0][0] or t > stream[-1][0]:
        raise OutOfRange(
            f"t={t!r} outside sampled range [{stream[0][0]!r}, {stream[-1][0]!r}]"
        )
    # bisect over the time column
    lo, hi = 0, len(stream) - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if stream[mid][0] <= t:
            lo = mid
        else:
            hi = mid
    t0, v0 = stream[lo]
    if t == t0:
        return v0
    t1, v1 = stream[hi]
    if t == t1:
        return v1
    frac = (t - t0) / (t1 - t0)
    return v0 + frac * (v1 - v0)
