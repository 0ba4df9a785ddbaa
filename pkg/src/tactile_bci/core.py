"""Domain types shared by every stage of the pipeline.

A :class:`Recording` is continuous multi-channel data with cue events, an
:class:`EpochSet` is the trials x channels x samples tensor cut out of it.
Both are frozen dataclasses holding read-only float64 arrays.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "TactileBciError",
    "DomainError",
    "Event",
    "Recording",
    "EpochSet",
    "Violation",
    "validate_recording",
    "Montage",
    "STANDARD_64",
    "DEMO_LABELS",
]

DEMO_LABELS = ("fabric", "glass", "paper", "fur")


class TactileBciError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TactileBciError, ValueError):
    """An argument lies outside the domain an operation accepts."""


def _frozen_array(values, name: str, ndim: int) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != ndim:
        raise DomainError(f"{name} must be {ndim}-D, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Event:
    """A cue marker: sample index of the onset and the class label."""

    onset_sample: int
    label: str

    def __post_init__(self):
        if int(self.onset_sample) != self.onset_sample or self.onset_sample < 0:
            raise DomainError(f"onset_sample must be a non-negative integer, got {self.onset_sample!r}")
        object.__setattr__(self, "onset_sample", int(self.onset_sample))


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by :func:`validate_recording`."""

    kind: str
    message: str
    channel: str | None = None
    index: int | None = None


@dataclass(frozen=True, eq=False)
class Recording:
    """Continuous EEG in microvolts, shape ``(n_channels, n_samples)``.

    Construction checks every invariant and raises :class:`DomainError` on the
    first violation. Use ``Recording.unchecked`` plus :func:`validate_recording`
    to get the full list instead.
    """

    sample_rate_hz: float
    channel_labels: tuple[str, ...]
    data: np.ndarray
    events: tuple[Event, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))
        object.__setattr__(self, "data", _frozen_array(self.data, "data", 2))
        object.__setattr__(self, "events", tuple(self.events))
        if not getattr(self, "_skip_checks", False):
            problems = validate_recording(self)
            if problems:
                raise DomainError(problems[0].message)

    @classmethod
    def unchecked(cls, sample_rate_hz, channel_labels, data, events=()) -> "Recording":
        """Build without raising, so a defective recording can be inspected."""
        obj = object.__new__(cls)
        object.__setattr__(obj, "_skip_checks", True)
        cls.__init__(obj, sample_rate_hz, channel_labels, data, events)
        return obj

    @property
    def n_channels(self) -> int:
        return self.data.shape[0]

    @property
    def n_samples(self) -> int:
        return self.data.shape[1]

    @property
    def duration_s(self) -> float:
        return self.n_samples / self.sample_rate_hz

    def channel_index(self, label: str) -> int:
        try:
            return self.channel_labels.index(label)
        except ValueError:
            raise DomainError(
                f"channel {label!r} not found; available: {', '.join(self.channel_labels)}"
            ) from None


def validate_recording(rec: Recording) -> list[Violation]:
    """Return every invariant violation of ``rec`` (empty when valid)."""
    out: list[Violation] = []
    labels = list(rec.channel_labels)
    n_ch, n_s = rec.data.shape
    if n_ch != len(labels):
        out.append(Violation("channel_count", f"{n_ch} data rows but {len(labels)} channel labels"))
    seen: set[str] = set()
    for i, lab in enumerate(labels):
        if lab in seen:
            out.append(Violation("duplicate_label", f"duplicate channel label {lab!r}", channel=lab, index=i))
        seen.add(lab)
    if not (rec.sample_rate_hz > 0 and np.isfinite(rec.sample_rate_hz)):
        out.append(Violation("sample_rate", f"sample rate must be positive, got {rec.sample_rate_hz}"))
    bad = np.argwhere(~np.isfinite(rec.data))
    for ch, s in bad:
        name = labels[ch] if ch < len(labels) else str(ch)
        out.append(Violation("non_finite", f"non-finite sample on channel {name} at index {s}",
                             channel=name, index=int(s)))
    prev = -1
    for i, ev in enumerate(rec.events):
        if ev.onset_sample < prev:
            out.append(Violation("events_unsorted", f"events not sorted at index {i}", index=i))
        prev = max(prev, ev.onset_sample)
        if not 0 <= ev.onset_sample < n_s:
            out.append(Violation("event_out_of_range",
                                 f"event {i} onset {ev.onset_sample} outside [0, {n_s})", index=i))
    return out


@dataclass(frozen=True, eq=False)
class EpochSet:
    """Cue-aligned trials, shape ``(n_trials, n_channels, n_samples)``.

    ``t0_ms`` is the time of the first sample relative to the cue. ``n_dropped``
    counts events discarded because their window left the recording.
    """

    data: np.ndarray
    labels: tuple[str, ...]
    sample_rate_hz: float
    t0_ms: float
    channel_labels: tuple[str, ...]
    n_dropped: int = 0
    label_set: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "data", _frozen_array(self.data, "epoch data", 3))
        object.__setattr__(self, "labels", tuple(str(x) for x in self.labels))
        object.__setattr__(self, "channel_labels", tuple(self.channel_labels))
        object.__setattr__(self, "sample_rate_hz", float(self.sample_rate_hz))
        object.__setattr__(self, "t0_ms", float(self.t0_ms))
        if not self.label_set:
            ordered = tuple(dict.fromkeys(self.labels))
            object.__setattr__(self, "label_set", ordered)
        else:
            object.__setattr__(self, "label_set", tuple(self.label_set))
        n_tr, n_ch, _ = self.data.shape
        if n_tr != len(self.labels):
            raise DomainError(f"{n_tr} trials but {len(self.labels)} labels")
        if n_ch != len(self.channel_labels):
            raise DomainError(f"{n_ch} channels but {len(self.channel_labels)} channel labels")
        if self.sample_rate_hz <= 0:
            raise DomainError("sample rate must be positive")
        if not np.all(np.isfinite(self.data)):
            raise DomainError("epoch data contains non-finite samples")
        unknown = set(self.labels) - set(self.label_set)
        if unknown:
            raise DomainError(f"labels {sorted(unknown)} not in label set {self.label_set}")

    @property
    def n_trials(self) -> int:
        return self.data.shape[0]

    @property
    def n_channels(self) -> int:
        return self.data.shape[1]

    @property
    def n_samples(self) -> int:
        return self.data.shape[2]

    @property
    def times_ms(self) -> np.ndarray:
        return self.t0_ms + 1000.0 * np.arange(self.n_samples) / self.sample_rate_hz

    @property
    def label_array(self) -> np.ndarray:
        return np.array(self.labels, dtype=object)

    def channel_index(self, label: str) -> int:
        try:
            return self.channel_labels.index(label)
        except ValueError:
            raise DomainError(
                f"channel {label!r} not found; available: {', '.join(self.channel_labels)}"
            ) from None

    def select(self, index) -> "EpochSet":
        """Subset of trials (boolean mask or integer indices), order preserved."""
        idx = np.arange(self.n_trials)[index]
        return EpochSet(self.data[idx], [self.labels[i] for i in idx], self.sample_rate_hz,
                        self.t0_ms, self.channel_labels, label_set=self.label_set)

    def with_data(self, data: np.ndarray) -> "EpochSet":
        return EpochSet(data, self.labels, self.sample_rate_hz, self.t0_ms,
                        self.channel_labels, self.n_dropped, self.label_set)

    def of_class(self, label: str) -> "EpochSet":
        return self.select(self.label_array == label)


# 64-channel 10/20 (10-10) layout without FCz (reference) and Fpz (ground).
STANDARD_64 = (
    "Fp1", "Fp2", "AF7", "AF3", "AFz", "AF4", "AF8",
    "F7", "F5", "F3", "F1", "Fz", "F2", "F4", "F6", "F8",
    "FT9", "FT7", "FC5", "FC3", "FC1", "FC2", "FC4", "FC6", "FT8", "FT10",
    "T7", "C5", "C3", "C1", "Cz", "C2", "C4", "C6", "T8",
    "TP9", "TP7", "CP5", "CP3", "CP1", "CPz", "CP2", "CP4", "CP6", "TP8", "TP10",
    "P7", "P5", "P3", "P1", "Pz", "P2", "P4", "P6", "P8",
    "PO7", "PO3", "POz", "PO4", "PO8",
    "O1", "Oz", "O2", "Iz",
)

# Row prefix -> position along the midline (vertex = 0, polar angle / 90 deg)
# and the azimuth where that row meets the Fpz-T7-Oz circle.
_ROWS = {
    "Fp": (0.8, 18.0), "AF": (0.6, 36.0), "F": (0.4, 54.0), "FC": (0.2, 72.0),
    "FT": (0.2, 72.0), "C": (0.0, 90.0), "T": (0.0, 90.0), "CP": (-0.2, 108.0),
    "TP": (-0.2, 108.0), "P": (-0.4, 126.0), "PO": (-0.6, 144.0), "O": (-0.8, 162.0),
}
_RING_RADIUS = 0.8


def _position(label: str) -> tuple[float, float]:
    if label == "Iz":
        return 0.0, -0.95
    prefix = label.rstrip("z0123456789")
    suffix = label[len(prefix):]
    mid_y, ring_az = _ROWS[prefix]
    if suffix == "z":
        return 0.0, mid_y
    num = int(suffix)
    side = -1.0 if num % 2 else 1.0
    step = (num + 1) // 2  # 1,2 -> 1; 3,4 -> 2; ...; 9,10 -> 5
    if prefix in ("Fp", "O"):
        step = 4  # these rows only have their ring electrodes
    az = np.deg2rad(ring_az)
    ring = np.array([side * _RING_RADIUS * np.sin(az), _RING_RADIUS * np.cos(az)])
    mid = np.array([0.0, mid_y])
    x, y = mid + (step / 4.0) * (ring - mid)
    return float(x), float(y)


@dataclass(frozen=True)
class Montage:
    """Channel label -> (x, y) on the unit disc; +y is nose, +x is right ear."""

    positions: dict

    @classmethod
    def standard_64(cls) -> "Montage":
        return cls({lab: _position(lab) for lab in STANDARD_64})

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self.positions)

    def xy(self, labels: Sequence[str]) -> np.ndarray:
        try:
            return np.array([self.positions[lab] for lab in labels], dtype=float)
        except KeyError as exc:
            raise DomainError(f"channel {exc.args[0]!r} has no montage position") from None
