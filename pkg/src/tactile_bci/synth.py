"""Synthetic EEG with known class-specific desynchronisation.

Every trial is a rest phase followed by a task phase. Each channel carries
pink background noise plus band-limited oscillatory sources spread over the
scalp by a Gaussian profile around a region electrode. All sources run in
every trial; in trials of class ``c`` the sources belonging to ``c`` are
scaled by ``sqrt(1 - erd_depth)`` from ``onset_ms`` for ``duration_ms`` after
the cue, so their power drops by ``erd_depth``.

Trials are synthesised independently from ``(seed, trial_index)`` and joined
with power-complementary (sine/cosine) cross-fades inside the rest phase, so
the second-order statistics stay stationary across trial boundaries.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import DEMO_LABELS, STANDARD_64, DomainError, Event, Montage, Recording

__all__ = [
    "SourceDef",
    "ClassDef",
    "GeneratorConfig",
    "GroundTruth",
    "default_class_defs",
    "generate",
    "describe_ground_truth",
    "parse_ground_truth",
    "pink_noise",
    "band_noise",
]


@dataclass(frozen=True)
class SourceDef:
    region: str
    band_hz: tuple
    erd_depth: float
    onset_ms: float = 0.0
    duration_ms: float = 5000.0
    amplitude_uv: float = 4.0


@dataclass(frozen=True)
class ClassDef:
    label: str
    sources: tuple


def default_class_defs(erd_depth: float = 0.6) -> tuple:
    """Four classes, each desynchronising alpha and beta around its own electrode near C3."""
    regions = ("C3", "FC3", "CP3", "C5")
    return tuple(
        ClassDef(label, (SourceDef(region, (8.0, 13.0), erd_depth),
                         SourceDef(region, (13.0, 30.0), erd_depth, amplitude_uv=3.0)))
        for label, region in zip(DEMO_LABELS, regions)
    )


@dataclass(frozen=True, kw_only=True)
class GeneratorConfig:
    seed: int
    n_channels: int = 64
    sample_rate_hz: float = 250.0
    n_trials_per_class: int = 50
    class_defs: tuple = field(default_factory=default_class_defs)
    noise_uv: float = 5.0
    mixing_spread: float = 0.12
    rest_ms: float = 3000.0
    task_ms: float = 5000.0
    crossfade_ms: float = 250.0

    def __post_init__(self):
        if isinstance(self.seed, bool) or int(self.seed) != self.seed:
            raise DomainError(f"seed must be an integer, got {self.seed!r}")
        if not 1 <= self.n_channels <= len(STANDARD_64):
            raise DomainError(f"n_channels must lie in [1, {len(STANDARD_64)}]")
        if self.sample_rate_hz <= 0:
            raise DomainError("sample rate must be positive")
        if self.n_trials_per_class < 1:
            raise DomainError("n_trials_per_class must be >= 1")
        if not self.class_defs:
            raise DomainError("at least one class definition is required")
        names = [c.label for c in self.class_defs]
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate class labels in {names}")
        channels = set(self.channel_labels)
        nyq = self.sample_rate_hz / 2
        for c in self.class_defs:
            for s in c.sources:
                if not 0.0 <= s.erd_depth <= 1.0:
                    raise DomainError(f"erd_depth must lie in [0, 1], got {s.erd_depth} for {c.label}")
                lo, hi = s.band_hz
                if not 0 < lo < hi < nyq:
                    raise DomainError(f"source band {s.band_hz} Hz must lie below Nyquist ({nyq} Hz)")
                if s.region not in channels:
                    raise DomainError(f"source region {s.region!r} is not among the generated channels")
        if self.noise_uv < 0 or self.mixing_spread <= 0:
            raise DomainError("noise amplitude must be >= 0 and mixing spread > 0")
        if not 0 <= self.crossfade_ms < self.rest_ms or self.task_ms <= 0:
            raise DomainError("need 0 <= crossfade_ms < rest_ms and task_ms > 0")

    @property
    def channel_labels(self) -> tuple:
        return STANDARD_64[: self.n_channels]

    @property
    def labels(self) -> tuple:
        return tuple(c.label for c in self.class_defs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["class_defs"] = [
            {"label": c.label, "sources": [{**asdict(s), "band_hz": list(s.band_hz)} for s in c.sources]}
            for c in self.class_defs
        ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorConfig":
        d = dict(d)
        if "class_defs" in d:
            d["class_defs"] = tuple(
                ClassDef(c["label"], tuple(SourceDef(**{**s, "band_hz": tuple(s["band_hz"])})
                                           for s in c["sources"]))
                for c in d["class_defs"]
            )
        try:
            return cls(**d)
        except TypeError as exc:
            raise DomainError(f"invalid generator config: {exc}") from None


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """What the generator did: trial order, onsets, source placement and per-trial scaling."""

    config: GeneratorConfig
    trial_labels: tuple
    onsets: tuple
    source_owner: tuple
    source_gains: np.ndarray  # (n_channels, n_sources)
    trial_factors: np.ndarray  # (n_trials, n_sources) amplitude factor during the ERD window

    def __eq__(self, other):
        if not isinstance(other, GroundTruth):
            return NotImplemented
        return (self.config == other.config and self.trial_labels == other.trial_labels
                and self.onsets == other.onsets and self.source_owner == other.source_owner
                and np.array_equal(self.source_gains, other.source_gains)
                and np.array_equal(self.trial_factors, other.trial_factors))


def _ms(ms: float, fs: float) -> int:
    return int(round(ms * fs / 1000.0))


def _shaped(rng, n: int, fs: float, weight) -> np.ndarray:
    freqs = np.fft.rfftfreq(n, 1.0 / fs)
    w = weight(freqs)
    # Parseval: output variance of irfft(rfft(white) * w) for unit white noise
    two_sided = w[0] ** 2 + 2.0 * np.sum(w[1:] ** 2)
    if n % 2 == 0:
        two_sided -= w[-1] ** 2
    scale = np.sqrt(n / two_sided) if two_sided > 0 else 0.0
    white = rng.standard_normal(n)
    return np.fft.irfft(np.fft.rfft(white) * w * scale, n)


def pink_noise(rng, n: int, fs: float) -> np.ndarray:
    """Unit-variance noise with power proportional to 1/f (DC removed)."""
    def weight(f):
        w = np.zeros_like(f)
        w[1:] = 1.0 / np.sqrt(f[1:])
        return w
    return _shaped(rng, n, fs, weight)


def band_noise(rng, n: int, fs: float, band_hz) -> np.ndarray:
    """Unit-variance noise with a flat spectrum inside ``band_hz`` and none outside."""
    lo, hi = band_hz
    return _shaped(rng, n, fs, lambda f: ((f >= lo) & (f <= hi)).astype(float))


def _mixing(config: GeneratorConfig, regions) -> np.ndarray:
    xy = Montage.standard_64().xy(config.channel_labels)
    centers = Montage.standard_64().xy(regions)
    d2 = ((xy[:, None, :] - centers[None, :, :]) ** 2).sum(axis=-1)
    return np.exp(-d2 / (2.0 * config.mixing_spread**2))


def generate(config: GeneratorConfig) -> tuple[Recording, GroundTruth]:
    """Synthesise a recording with one cue event per trial, plus its ground truth."""
    fs = config.sample_rate_hz
    n_rest, n_task, n_fade = _ms(config.rest_ms, fs), _ms(config.task_ms, fs), _ms(config.crossfade_ms, fs)
    n_trial = n_rest + n_task
    sources = [(c.label, s) for c in config.class_defs for s in c.sources]
    gains = _mixing(config, [s.region for _, s in sources]) if sources else np.zeros((config.n_channels, 0))

    order_rng = np.random.default_rng(np.random.SeedSequence([config.seed, 0xC1A55]))
    labels = np.repeat(np.array(config.labels, dtype=object), config.n_trials_per_class)
    labels = labels[order_rng.permutation(labels.size)]
    n_trials = labels.size

    data = np.zeros((config.n_channels, n_trials * n_trial + n_fade))
    fade_in = np.sin(0.5 * np.pi * (np.arange(n_fade) + 0.5) / max(n_fade, 1))
    fade_out = np.cos(0.5 * np.pi * (np.arange(n_fade) + 0.5) / max(n_fade, 1))
    factors = np.ones((n_trials, len(sources)))
    onsets = []
    seg_len = n_trial + n_fade
    for i, label in enumerate(labels):
        rng = np.random.default_rng(np.random.SeedSequence([config.seed, i]))
        seg = config.noise_uv * np.stack([pink_noise(rng, seg_len, fs) for _ in range(config.n_channels)])
        for j, (owner, src) in enumerate(sources):
            wave = src.amplitude_uv * band_noise(rng, seg_len, fs, src.band_hz)
            if owner == label and src.erd_depth > 0:
                factors[i, j] = np.sqrt(1.0 - src.erd_depth)
                a = n_rest + _ms(src.onset_ms, fs)
                b = min(a + _ms(src.duration_ms, fs), n_trial)
                wave[max(a, 0):b] *= factors[i, j]
            seg += np.outer(gains[:, j], wave)
        if n_fade:
            if i > 0:
                seg[:, :n_fade] *= fade_in
            if i < n_trials - 1:
                seg[:, -n_fade:] *= fade_out
        start = i * n_trial
        data[:, start:start + seg_len] += seg
        onsets.append(start + n_rest)

    events = [Event(o, lab) for o, lab in zip(onsets, labels)]
    rec = Recording(fs, config.channel_labels, data, events)
    truth = GroundTruth(config, tuple(labels), tuple(onsets), tuple(o for o, _ in sources), gains, factors)
    return rec, truth


def describe_ground_truth(gt: GroundTruth) -> str:
    """Deterministic JSON text of the ground truth (round-trips via :func:`parse_ground_truth`)."""
    classes = []
    for c in gt.config.class_defs:
        classes.append({
            "label": c.label,
            "regions": sorted({s.region for s in c.sources}),
            "sources": [{"region": s.region, "band_hz": list(s.band_hz), "erd_depth": s.erd_depth,
                         "onset_ms": s.onset_ms, "duration_ms": s.duration_ms,
                         "amplitude_uv": s.amplitude_uv} for s in c.sources],
        })
    doc = {
        "format": "tactile-bci-ground-truth",
        "format_version": 1,
        "seed": gt.config.seed,
        "config": gt.config.to_dict(),
        "classes": classes,
        "trials": [{"label": lab, "onset_sample": int(o), "source_factors": [float(v) for v in f]}
                   for lab, o, f in zip(gt.trial_labels, gt.onsets, gt.trial_factors)],
        "source_owner": list(gt.source_owner),
        "source_gains": [[float(v) for v in row] for row in gt.source_gains],
    }
    return json.dumps(doc, indent=1) + "\n"


def parse_ground_truth(text: str) -> GroundTruth:
    doc = json.loads(text)
    if doc.get("format") != "tactile-bci-ground-truth" or doc.get("format_version") != 1:
        raise DomainError("not a version-1 ground-truth document")
    config = GeneratorConfig.from_dict(doc["config"])
    trials = doc["trials"]
    n_src = len(doc["source_owner"])
    return GroundTruth(
        config,
        tuple(t["label"] for t in trials),
        tuple(t["onset_sample"] for t in trials),
        tuple(doc["source_owner"]),
        np.array(doc["source_gains"], dtype=float).reshape(config.n_channels, n_src),
        np.array([t["source_factors"] for t in trials], dtype=float).reshape(len(trials), n_src),
    )
