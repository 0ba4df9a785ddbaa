"""IIR filter design and zero-phase application, decimation, epoching.

Designs start from the analog Butterworth prototype, are transformed in the
s-plane (lowpass or bandpass) and mapped to z with the bilinear transform,
pre-warping the corner frequencies so the digital -3 dB points land exactly
where requested. Filters keep their zeros/poles/gain; application runs as a
cascade of second-order sections because high-order polynomial forms lose
precision when the corners are far below Nyquist (1 Hz at 2500 Hz).
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import signal

from .core import DomainError, EpochSet, Event, Recording

__all__ = [
    "IirFilter",
    "design_butterworth_bandpass",
    "design_butterworth_lowpass",
    "design_notch",
    "filtfilt",
    "min_filtfilt_length",
    "decimate",
    "extract_epochs",
]

MAX_ORDER = 8


@dataclass(frozen=True, eq=False)
class IirFilter:
    """Digital IIR filter.

    ``b`` and ``a`` are the transfer-function polynomials in descending powers
    of ``z`` (``a[0] == 1``); ``zeros``, ``poles`` and ``gain`` describe the same
    filter and are what :func:`filtfilt` actually uses.
    """

    b: np.ndarray
    a: np.ndarray
    zeros: np.ndarray
    poles: np.ndarray
    gain: float
    design_meta: dict = field(default_factory=dict)

    @classmethod
    def from_zpk(cls, z, p, k, **meta) -> "IirFilter":
        z = np.asarray(z, dtype=complex)
        p = np.asarray(p, dtype=complex)
        b = np.real(k * np.poly(z)) if z.size else np.array([float(np.real(k))])
        a = np.real(np.poly(p))
        b, a = b / a[0], a / a[0]
        return cls(b, a, z, p, float(np.real(k)), dict(meta))

    @property
    def sos(self) -> np.ndarray:
        return signal.zpk2sos(self.zeros, self.poles, self.gain)

    @property
    def max_pole_modulus(self) -> float:
        return float(np.max(np.abs(self.poles))) if self.poles.size else 0.0

    def response(self, freqs_hz, fs_hz: float | None = None) -> np.ndarray:
        """Complex frequency response at ``freqs_hz`` evaluated from the factored form."""
        fs = fs_hz if fs_hz is not None else self.design_meta["fs_hz"]
        zz = np.exp(2j * np.pi * np.asarray(freqs_hz, dtype=float) / fs)
        num = np.prod(zz[..., None] - self.zeros, axis=-1) if self.zeros.size else 1.0
        den = np.prod(zz[..., None] - self.poles, axis=-1)
        return self.gain * num / den


def _check_order(order: int):
    if int(order) != order or not 1 <= order <= MAX_ORDER:
        raise DomainError(f"filter order must be an integer in [1, {MAX_ORDER}], got {order}")


def _check_corner(name: str, hz: float, fs_hz: float):
    if fs_hz <= 0:
        raise DomainError(f"sample rate must be positive, got {fs_hz}")
    if not 0 < hz < fs_hz / 2:
        raise DomainError(f"{name} {hz} Hz must lie in (0, {fs_hz / 2}) (Nyquist at fs={fs_hz} Hz)")


def _butter_prototype(order: int) -> np.ndarray:
    # left-half-plane poles of the unit-cutoff analog Butterworth lowpass
    m = np.arange(-order + 1, order, 2)
    return -np.exp(1j * np.pi * m / (2 * order))


def _prewarp(hz: float, fs_hz: float) -> float:
    return 2.0 * fs_hz * np.tan(np.pi * hz / fs_hz)


def _bilinear(z_a, p_a, k_a, fs_hz):
    fs2 = 2.0 * fs_hz
    z_a = np.asarray(z_a, dtype=complex)
    p_a = np.asarray(p_a, dtype=complex)
    z_d = (fs2 + z_a) / (fs2 - z_a)
    p_d = (fs2 + p_a) / (fs2 - p_a)
    # analog zeros at infinity land on z = -1
    z_d = np.concatenate([z_d, -np.ones(p_a.size - z_a.size)])
    k_d = k_a * np.real(np.prod(fs2 - z_a) / np.prod(fs2 - p_a))
    return z_d, p_d, k_d


def design_butterworth_bandpass(order: int, low_hz: float, high_hz: float, fs_hz: float) -> IirFilter:
    """Butterworth bandpass of prototype order ``order`` (digital order ``2*order``).

    The single-pass magnitude is -3.01 dB at both corners.

    Examples
    --------
    >>> f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    >>> round(20 * np.log10(abs(f.response(50.0))), 2)
    -3.01
    """
    _check_order(order)
    _check_corner("low corner", low_hz, fs_hz)
    _check_corner("high corner", high_hz, fs_hz)
    if not low_hz < high_hz:
        raise DomainError(f"low corner {low_hz} Hz must be below high corner {high_hz} Hz")
    w_lo, w_hi = _prewarp(low_hz, fs_hz), _prewarp(high_hz, fs_hz)
    bw = w_hi - w_lo
    w0_sq = w_lo * w_hi
    proto = _butter_prototype(order)
    # s -> (s^2 + w0^2) / (bw * s): each prototype pole splits into a pair
    half = proto * bw / 2.0
    disc = np.sqrt(half**2 - w0_sq + 0j)
    poles = np.concatenate([half + disc, half - disc])
    zeros = np.zeros(order, dtype=complex)
    k = bw**order
    z, p, kd = _bilinear(zeros, poles, k, fs_hz)
    return IirFilter.from_zpk(z, p, kd, kind="bandpass", order=order,
                              corner_hz=(float(low_hz), float(high_hz)), fs_hz=float(fs_hz))


def design_butterworth_lowpass(order: int, corner_hz: float, fs_hz: float) -> IirFilter:
    _check_order(order)
    _check_corner("corner", corner_hz, fs_hz)
    wc = _prewarp(corner_hz, fs_hz)
    z, p, kd = _bilinear([], wc * _butter_prototype(order), wc**order, fs_hz)
    return IirFilter.from_zpk(z, p, kd, kind="lowpass", order=order,
                              corner_hz=float(corner_hz), fs_hz=float(fs_hz))


def design_notch(center_hz: float, q: float = 35.0, fs_hz: float = 250.0) -> IirFilter:
    """Second-order notch with -3 dB bandwidth ``center_hz / q`` and unity DC gain."""
    _check_corner("notch center", center_hz, fs_hz)
    if not q > 0:
        raise DomainError(f"notch quality factor must be positive, got {q}")
    w0 = 2.0 * np.pi * center_hz / fs_hz
    g = 1.0 / (1.0 + np.tan(w0 / q / 2.0))
    zeros = np.exp([1j * w0, -1j * w0])
    poles = np.roots([1.0, -2.0 * g * np.cos(w0), 2.0 * g - 1.0])
    return IirFilter.from_zpk(zeros, poles, g, kind="notch", order=2, corner_hz=float(center_hz),
                              q=float(q), fs_hz=float(fs_hz))


def min_filtfilt_length(f: IirFilter) -> int:
    """Smallest signal length :func:`filtfilt` accepts (exclusive bound plus one)."""
    return 3 * max(len(f.a), len(f.b)) + 1


def filtfilt(f: IirFilter, x, axis: int = -1, padlen: int | None = None) -> np.ndarray:
    """Zero-phase forward-backward filtering along ``axis``.

    The signal is extended at both ends by an odd (point) reflection of
    ``padlen`` samples (default ``3 * max(len(a), len(b))``) and each pass
    starts from the filter's steady state for the edge value, which keeps edge
    transients small. Narrow bands ring longer; pass a longer ``padlen`` there.
    """
    x = np.asarray(x, dtype=np.float64)
    pad = 3 * max(len(f.a), len(f.b)) if padlen is None else int(padlen)
    if pad < 0:
        raise DomainError(f"padlen must be non-negative, got {padlen}")
    n = x.shape[axis]
    if n <= pad:
        raise DomainError(f"signal of length {n} too short for filtfilt; need at least {pad + 1} samples")
    x = np.moveaxis(x, axis, -1)
    left = 2.0 * x[..., :1] - x[..., pad:0:-1]
    right = 2.0 * x[..., -1:] - x[..., -2:-pad - 2:-1]
    ext = np.concatenate([left, x, right], axis=-1)
    sos = f.sos
    zi = signal.sosfilt_zi(sos)
    shape = (zi.shape[0],) + (1,) * (ext.ndim - 1) + (2,)
    zi = zi.reshape(shape)
    y, _ = signal.sosfilt(sos, ext, axis=-1, zi=zi * ext[None, ..., :1])
    y = y[..., ::-1]
    y, _ = signal.sosfilt(sos, y, axis=-1, zi=zi * y[None, ..., :1])
    y = y[..., ::-1][..., pad:pad + n]
    return np.ascontiguousarray(np.moveaxis(y, -1, axis))


def decimate(rec: Recording, factor: int) -> Recording:
    """Anti-alias (order-8 Butterworth, zero-phase) and keep every ``factor``-th sample."""
    if int(factor) != factor or factor < 1:
        raise DomainError(f"decimation factor must be an integer >= 1, got {factor}")
    factor = int(factor)
    if factor == 1:
        return rec
    if rec.n_samples // factor < 1:
        raise DomainError(f"recording of {rec.n_samples} samples too short to decimate by {factor}")
    new_fs = rec.sample_rate_hz / factor
    lp = design_butterworth_lowpass(8, 0.4 * new_fs / 2.0, rec.sample_rate_hz)
    data = filtfilt(lp, rec.data)[:, ::factor]
    events = [Event(ev.onset_sample // factor, ev.label) for ev in rec.events]
    return Recording(new_fs, rec.channel_labels, data, events)


def _ms_to_samples(ms: float, fs_hz: float) -> int:
    return int(round(ms * fs_hz / 1000.0))


def extract_epochs(rec: Recording, window_ms, label_set) -> EpochSet:
    """Cut ``[onset + start, onset + end)`` around every event whose label is in ``label_set``.

    Events whose window does not fit inside the recording are dropped with a
    warning; the count is kept in ``EpochSet.n_dropped``.
    """
    start_ms, end_ms = window_ms
    if not start_ms < end_ms:
        raise DomainError(f"epoch window start {start_ms} ms must precede end {end_ms} ms")
    label_set = tuple(label_set)
    if not label_set:
        raise DomainError("label set must not be empty")
    fs = rec.sample_rate_hz
    off = _ms_to_samples(start_ms, fs)
    length = _ms_to_samples(end_ms - start_ms, fs)
    if length < 1:
        raise DomainError(f"epoch window {window_ms} ms is shorter than one sample")
    wanted = set(label_set)
    trials, labels, dropped = [], [], 0
    for ev in rec.events:
        if ev.label not in wanted:
            continue
        s = ev.onset_sample + off
        if s < 0 or s + length > rec.n_samples:
            dropped += 1
            continue
        trials.append(rec.data[:, s:s + length])
        labels.append(ev.label)
    if dropped:
        warnings.warn(f"dropped {dropped} event(s) whose epoch window exceeds the recording",
                      stacklevel=2)
    if not trials:
        raise DomainError("no epochs extracted")
    return EpochSet(np.stack(trials), labels, fs, off * 1000.0 / fs, rec.channel_labels,
                    n_dropped=dropped, label_set=label_set)
