"""Common spatial patterns and band-power features.

CSP solves ``C_a w = lambda (C_a + C_b) w`` for trace-normalised class-mean
covariances by whitening the composite covariance and diagonalising the
whitened class-a covariance. Multi-class problems are reduced one-vs-rest.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, EpochSet, Montage, TactileBciError
from .dsp import design_butterworth_bandpass, filtfilt

__all__ = [
    "DEFAULT_BANDS",
    "RankDeficientError",
    "DegenerateFeatureError",
    "CspModel",
    "FeatureMatrix",
    "trial_covariance",
    "mean_covariance",
    "fit_csp_covariances",
    "fit_csp_pair",
    "fit_csp_ovr",
    "csp_features",
    "band_filter_epochs",
    "multiband_csp_features",
    "band_power_topography",
]

DEFAULT_BANDS = {"alpha": (8.0, 13.0), "beta": (13.0, 30.0)}
REGULARIZATION = 1e-9


class RankDeficientError(TactileBciError, np.linalg.LinAlgError):
    pass


class DegenerateFeatureError(TactileBciError, ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CspModel:
    """Spatial filters kept from both ends of the CSP spectrum.

    ``filters`` rows are spatial filters ordered by descending eigenvalue;
    ``patterns`` columns are the matching activation patterns.
    ``full_filters`` keeps the complete (square) filter matrix for checks.
    """

    filters: np.ndarray
    patterns: np.ndarray
    eigenvalues: np.ndarray
    n_per_side: int
    channel_labels: tuple = ()
    band_hz: tuple | None = None
    full_filters: np.ndarray | None = None
    full_eigenvalues: np.ndarray | None = None

    @property
    def n_components(self) -> int:
        return self.filters.shape[0]

    @property
    def n_channels(self) -> int:
        return self.filters.shape[1]


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    labels: tuple
    feature_names: tuple

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise DomainError(f"feature values must be 2-D, got shape {values.shape}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if values.shape[0] != len(self.labels):
            raise DomainError(f"{values.shape[0]} feature rows but {len(self.labels)} labels")
        if self.feature_names and values.shape[1] != len(self.feature_names):
            raise DomainError(f"{values.shape[1]} features but {len(self.feature_names)} names")
        if not np.all(np.isfinite(values)):
            raise DomainError("feature values must be finite")

    @property
    def n_features(self) -> int:
        return self.values.shape[1]


def trial_covariance(trial) -> np.ndarray:
    """Trace-normalised spatial covariance ``X X^T / trace(X X^T)``."""
    x = np.asarray(trial, dtype=np.float64)
    if x.ndim != 2:
        raise DomainError(f"trial must be 2-D (channels, samples), got shape {x.shape}")
    c = x @ x.T
    tr = np.trace(c)
    if not tr > 0:
        raise DomainError("degenerate covariance: trial is all zeros")
    c = c / tr
    return 0.5 * (c + c.T)


def mean_covariance(data) -> np.ndarray:
    """Average of :func:`trial_covariance` over the trials of a 3-D array."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim != 3 or data.shape[0] == 0:
        raise DomainError(f"expected (trials, channels, samples) with at least one trial, got {data.shape}")
    c = data @ data.transpose(0, 2, 1)
    tr = np.trace(c, axis1=1, axis2=2)
    if np.any(tr <= 0):
        raise DomainError("degenerate covariance: a trial is all zeros")
    c = (c / tr[:, None, None]).mean(axis=0)
    return 0.5 * (c + c.T)


def _fix_signs(w: np.ndarray) -> np.ndarray:
    # largest-magnitude coefficient of each row made positive
    idx = np.argmax(np.abs(w), axis=1)
    signs = np.sign(w[np.arange(w.shape[0]), idx])
    signs[signs == 0] = 1.0
    return w * signs[:, None]


def fit_csp_covariances(cov_a, cov_b, n_per_side: int, channel_labels=(), band_hz=None) -> CspModel:
    """CSP from two class-mean covariance matrices."""
    cov_a = np.asarray(cov_a, dtype=np.float64)
    cov_b = np.asarray(cov_b, dtype=np.float64)
    n_ch = cov_a.shape[0]
    if cov_a.shape != (n_ch, n_ch) or cov_b.shape != (n_ch, n_ch):
        raise DomainError(f"covariances must be square and equal-sized, got {cov_a.shape} and {cov_b.shape}")
    if int(n_per_side) != n_per_side or n_per_side < 1 or 2 * n_per_side > n_ch:
        raise DomainError(f"n_per_side must satisfy 1 <= n_per_side <= {n_ch // 2}, got {n_per_side}")
    composite = cov_a + cov_b
    d, u = np.linalg.eigh(composite)
    floor = REGULARIZATION * np.trace(composite)
    if d[0] < -floor:
        raise RankDeficientError(
            f"composite covariance is not positive semidefinite (smallest eigenvalue {d[0]:.3e})")
    if d[0] < floor:
        # guard rank deficiency (e.g. after filtering) with a tiny ridge
        composite = composite + floor * np.eye(n_ch)
        d, u = np.linalg.eigh(composite)
        if d[0] <= 0:
            raise RankDeficientError(
                f"composite covariance rank deficient beyond regularization (smallest eigenvalue {d[0]:.3e})")
    whiten = (u / np.sqrt(d)).T
    s_a = whiten @ cov_a @ whiten.T
    lam, v = np.linalg.eigh(0.5 * (s_a + s_a.T))
    order = np.argsort(lam, kind="stable")[::-1]
    lam = lam[order]
    w_full = _fix_signs(v[:, order].T @ whiten)
    keep = np.r_[0:n_per_side, n_ch - n_per_side:n_ch]
    patterns = np.linalg.inv(w_full)[:, keep]
    return CspModel(
        filters=w_full[keep],
        patterns=patterns,
        eigenvalues=lam[keep],
        n_per_side=int(n_per_side),
        channel_labels=tuple(channel_labels),
        band_hz=None if band_hz is None else tuple(band_hz),
        full_filters=w_full,
        full_eigenvalues=lam,
    )


def _check_pair(a: EpochSet, b: EpochSet):
    if a.channel_labels != b.channel_labels:
        raise DomainError("epoch sets differ in channel order")
    if a.n_trials < 2 or b.n_trials < 2:
        raise DomainError(f"each class needs at least 2 trials, got {a.n_trials} and {b.n_trials}")


def fit_csp_pair(epochs_a: EpochSet, epochs_b: EpochSet, n_per_side: int = 3, band_hz=None) -> CspModel:
    """Two-class CSP; the first filters maximise class-a variance."""
    _check_pair(epochs_a, epochs_b)
    return fit_csp_covariances(mean_covariance(epochs_a.data), mean_covariance(epochs_b.data),
                               n_per_side, epochs_a.channel_labels, band_hz)


def fit_csp_ovr(epochs: EpochSet, n_per_side: int = 3, band_hz=None) -> list[tuple[str, CspModel]]:
    """One CSP model per class, each fit as that class against all others.

    Models are returned in label-set order.
    """
    present = [lab for lab in epochs.label_set if lab in set(epochs.labels)]
    if len(present) < 2:
        raise DomainError(f"one-vs-rest CSP needs at least 2 classes, got {present}")
    labels = epochs.label_array
    covs = epochs.data @ epochs.data.transpose(0, 2, 1)
    tr = np.trace(covs, axis1=1, axis2=2)
    if np.any(tr <= 0):
        raise DomainError("degenerate covariance: a trial is all zeros")
    covs = covs / tr[:, None, None]
    out = []
    for lab in present:
        mask = labels == lab
        if mask.sum() < 2 or (~mask).sum() < 2:
            raise DomainError(f"class {lab!r} needs at least 2 trials on each side of the split")
        c_in = covs[mask].mean(axis=0)
        c_out = covs[~mask].mean(axis=0)
        model = fit_csp_covariances(0.5 * (c_in + c_in.T), 0.5 * (c_out + c_out.T), n_per_side,
                                    epochs.channel_labels, band_hz)
        out.append((lab, model))
    return out


def _log_normalized_variance(filters: np.ndarray, data: np.ndarray) -> np.ndarray:
    proj = filters @ data
    var = np.einsum("tks,tks->tk", proj, proj)
    total = var.sum(axis=1, keepdims=True)
    if np.any(var <= 0) or np.any(total <= 0):
        raise DegenerateFeatureError("zero projected variance: log of zero in CSP feature")
    return np.log(var / total)


def csp_features(models, epochs: EpochSet, band_name: str | None = None) -> FeatureMatrix:
    """Log normalised variance of every kept filter of every model.

    ``models`` is a :class:`CspModel` or the list returned by :func:`fit_csp_ovr`.
    Variances are normalised over the filters of each model separately.
    """
    if isinstance(models, CspModel):
        models = [("", models)]
    blocks, names = [], []
    for lab, model in models:
        if model.n_channels != epochs.n_channels:
            raise DomainError(
                f"shape mismatch: model has {model.n_channels} channels, epochs have {epochs.n_channels}")
        if model.channel_labels and tuple(model.channel_labels) != epochs.channel_labels:
            raise DomainError("channel labels of epochs do not match the CSP model")
        blocks.append(_log_normalized_variance(model.filters, epochs.data))
        prefix = ":".join(p for p in (band_name, lab) if p)
        names += [f"{prefix}:csp{i}" if prefix else f"csp{i}" for i in range(model.n_components)]
    return FeatureMatrix(np.hstack(blocks), epochs.labels, names)


def band_filter_epochs(epochs: EpochSet, band_hz, order: int = 3, padlen: int | None = None) -> EpochSet:
    """Zero-phase Butterworth bandpass applied to every trial and channel."""
    f = design_butterworth_bandpass(order, band_hz[0], band_hz[1], epochs.sample_rate_hz)
    return epochs.with_data(filtfilt(f, epochs.data, axis=-1, padlen=padlen))


def multiband_csp_features(band_models: dict, band_epochs: dict) -> FeatureMatrix:
    """Concatenate :func:`csp_features` over bands; names are tagged with the band."""
    parts = [csp_features(band_models[name], band_epochs[name], band_name=name) for name in band_models]
    return FeatureMatrix(np.hstack([p.values for p in parts]), parts[0].labels,
                         sum((p.feature_names for p in parts), ()))


def band_power_topography(epochs: EpochSet, band_hz, windows_ms, montage: Montage | None = None,
                          order: int = 3) -> dict:
    """Trial-averaged mean squared band-filtered amplitude per window and channel.

    Returns ``{"windows_ms": [...], "power": array (n_windows, n_channels),
    "channel_labels": ..., "xy": array (n_channels, 2) or None}``.
    """
    low, high = band_hz
    if not 0 < low < high < epochs.sample_rate_hz / 2:
        raise DomainError(f"band {band_hz} Hz must lie within (0, {epochs.sample_rate_hz / 2})")
    # one second of reflection keeps filter ringing out of the edge windows
    pad = min(epochs.n_samples - 1, int(round(epochs.sample_rate_hz)))
    filtered = band_filter_epochs(epochs, band_hz, order, padlen=pad).data
    times = epochs.times_ms
    step = 1000.0 / epochs.sample_rate_hz
    rows = []
    for start, end in windows_ms:
        if not start < end:
            raise DomainError(f"empty window ({start}, {end}) ms")
        if start < times[0] - 1e-9 or end > times[-1] + step + 1e-9:
            raise DomainError(f"window ({start}, {end}) ms outside epoch span "
                              f"[{times[0]}, {times[-1] + step}) ms")
        mask = (times >= start - 1e-9) & (times < end - 1e-9)
        if not mask.any():
            raise DomainError(f"window ({start}, {end}) ms contains no samples")
        rows.append(np.mean(filtered[:, :, mask] ** 2, axis=(0, 2)))
    xy = None
    if montage is not None:
        xy = montage.xy(epochs.channel_labels)
    return {
        "windows_ms": [tuple(map(float, w)) for w in windows_ms],
        "power": np.array(rows),
        "channel_labels": epochs.channel_labels,
        "xy": xy,
    }
