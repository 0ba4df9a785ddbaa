"""Event-related spectral perturbation.

Power comes from a sliding Hann-windowed Fourier transform (1 s window by
default) evaluated directly at the requested frequencies, averaged over
trials, divided by the trial-averaged baseline power and expressed in dB.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import DomainError, EpochSet

__all__ = ["ErspMap", "compute_ersp", "export_ersp_csv", "read_ersp_csv", "stft_power"]

DEFAULT_FREQS = tuple(float(f) for f in range(1, 31))
CSV_HEADER = ("channel", "freq_hz", "time_ms", "ersp_db")


@dataclass(frozen=True, eq=False)
class ErspMap:
    """Baseline-normalised log power of one channel, ``values_db[freq, time]``.

    ``flagged_freqs_hz`` lists frequencies whose period is longer than the
    baseline interval, where the baseline estimate rests on less than one cycle.
    """

    channel: str
    freqs_hz: np.ndarray
    times_ms: np.ndarray
    values_db: np.ndarray
    baseline_ms: tuple | None
    flagged_freqs_hz: tuple = field(default=())

    def __post_init__(self):
        f = np.asarray(self.freqs_hz, dtype=float)
        t = np.asarray(self.times_ms, dtype=float)
        v = np.asarray(self.values_db, dtype=float)
        if v.shape != (f.size, t.size):
            raise DomainError(f"values shape {v.shape} does not match {f.size} freqs x {t.size} times")
        if np.any(np.diff(f) <= 0) or np.any(np.diff(t) <= 0):
            raise DomainError("frequencies and times must be strictly increasing")
        if not np.all(np.isfinite(v)):
            raise DomainError("ERSP values must be finite")
        object.__setattr__(self, "freqs_hz", f)
        object.__setattr__(self, "times_ms", t)
        object.__setattr__(self, "values_db", v)


def _hann(n: int) -> np.ndarray:
    # periodic Hann; integer-Hz lines with a 1 s window sit on exact DFT bins
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def stft_power(x, fs: float, freqs, window_samples: int, hop: int) -> tuple[np.ndarray, np.ndarray]:
    """Hann-windowed short-time power of ``x`` (..., samples).

    Returns ``(power, centers)`` with power shaped ``(..., n_freqs, n_frames)``
    and frame centres in samples from the start of ``x``.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if window_samples > n:
        raise DomainError(f"analysis window of {window_samples} samples longer than data ({n})")
    starts = np.arange(0, n - window_samples + 1, hop)
    w = _hann(window_samples)
    t = np.arange(window_samples) / fs
    kernel = w * np.exp(-2j * np.pi * np.asarray(freqs, dtype=float)[:, None] * t)
    frames = np.lib.stride_tricks.sliding_window_view(x, window_samples, axis=-1)[..., starts, :]
    coef = frames @ kernel.T  # (..., frames, freqs)
    power = (coef.real**2 + coef.imag**2) / np.sum(w**2)
    centers = starts + window_samples / 2.0
    return np.swapaxes(power, -1, -2), centers


def compute_ersp(epochs: EpochSet, baseline, channel: str, freqs=DEFAULT_FREQS, n_times: int = 200,
                 window_s: float = 1.0) -> ErspMap:
    """ERSP of ``channel`` relative to a baseline.

    ``baseline`` is either a ``(start_ms, end_ms)`` interval of the epoch time
    axis or a separate :class:`EpochSet` of rest data. With an interval, a
    frame counts as baseline when its analysis window ends inside the
    interval, so no data after the interval end enters the baseline.
    """
    if epochs.n_trials == 0:
        raise DomainError("no epochs")
    ch = epochs.channel_index(channel)
    fs = epochs.sample_rate_hz
    freqs = np.asarray(freqs, dtype=float)
    if freqs.size == 0 or np.any(freqs <= 0) or np.any(freqs >= fs / 2):
        raise DomainError(f"frequencies must lie in (0, {fs / 2}) Hz")
    win = int(round(window_s * fs))
    n = epochs.n_samples
    if win > n:
        raise DomainError(f"epochs of {n} samples are shorter than the {win}-sample analysis window")
    if n_times < 2:
        raise DomainError("need at least 2 output time points")
    hop = max(1, (n - win) // (n_times - 1))
    power, centers = stft_power(epochs.data[:, ch, :], fs, freqs, win, hop)
    mean_power = power.mean(axis=0)
    frame_ms = epochs.t0_ms + 1000.0 * centers / fs
    win_ms = 1000.0 * win / fs

    if isinstance(baseline, EpochSet):
        if baseline.sample_rate_hz != fs:
            raise DomainError("baseline epochs use a different sample rate")
        bch = baseline.channel_index(channel)
        if baseline.n_samples < win:
            raise DomainError("baseline epochs are shorter than the analysis window")
        b_hop = max(1, min(hop, baseline.n_samples - win))
        b_power, _ = stft_power(baseline.data[:, bch, :], fs, freqs, win, b_hop)
        base = b_power.mean(axis=(0, 2))
        base_ms = None
        base_len = 1000.0 * baseline.n_samples / fs
    else:
        b0, b1 = map(float, baseline)
        if not b0 < b1:
            raise DomainError(f"baseline window ({b0}, {b1}) ms is empty")
        span = (epochs.t0_ms, epochs.t0_ms + 1000.0 * n / fs)
        if b0 < span[0] - 1e-9 or b1 > span[1] + 1e-9:
            raise DomainError(f"baseline window ({b0}, {b1}) ms out of range of epochs {span} ms")
        ends = frame_ms + win_ms / 2.0
        sel = (ends > b0 + 1e-9) & (ends <= b1 + 1e-9)
        if not sel.any():
            raise DomainError(f"baseline window ({b0}, {b1}) ms out of range: no analysis frame "
                              f"ends inside it (epochs start at {epochs.t0_ms} ms, window {win_ms} ms)")
        base = mean_power[:, sel].mean(axis=1)
        base_ms = (b0, b1)
        base_len = b1 - b0
    if np.any(base <= 0):
        raise DomainError("baseline power is zero at some frequency")

    times = np.linspace(frame_ms[0], frame_ms[-1], n_times)
    resampled = np.stack([np.interp(times, frame_ms, row) for row in mean_power])
    values = 10.0 * np.log10(resampled / base[:, None])
    flagged = tuple(float(f) for f in freqs if 1000.0 / f > base_len + 1e-9)
    return ErspMap(channel, freqs, times, values, base_ms, flagged)


def _fmt(v: float) -> str:
    return f"{v:.6g}"


def export_ersp_csv(maps, path) -> None:
    """Long-format CSV ``channel,freq_hz,time_ms,ersp_db`` ordered channel -> freq -> time."""
    path = Path(path)
    try:
        with path.open("w", newline="", encoding="utf-8") as fh:
            fh.write(",".join(CSV_HEADER) + "\n")
            for m in maps:
                for i, f in enumerate(m.freqs_hz):
                    fs = _fmt(f)
                    fh.write("".join(f"{m.channel},{fs},{_fmt(t)},{_fmt(v)}\n"
                                     for t, v in zip(m.times_ms, m.values_db[i])))
    except OSError as exc:
        raise OSError(f"cannot write ERSP CSV {path}: {exc}") from exc


def read_ersp_csv(path) -> list[ErspMap]:
    """Parse a CSV written by :func:`export_ersp_csv` (values at printed precision)."""
    rows: dict[str, dict[float, dict[float, float]]] = {}
    with Path(path).open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if tuple(header or ()) != CSV_HEADER:
            raise DomainError(f"{path}: unexpected ERSP CSV header {header}")
        for line_no, row in enumerate(reader, start=2):
            try:
                ch, f, t, v = row[0], float(row[1]), float(row[2]), float(row[3])
            except (ValueError, IndexError):
                raise DomainError(f"{path}: malformed row at line {line_no}") from None
            rows.setdefault(ch, {}).setdefault(f, {})[t] = v
    maps = []
    for ch, by_f in rows.items():
        freqs = sorted(by_f)
        times = sorted(by_f[freqs[0]])
        values = np.array([[by_f[f][t] for t in times] for f in freqs])
        maps.append(ErspMap(ch, np.array(freqs), np.array(times), values, None))
    return maps
