import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import signal

from tactile_bci.core import DomainError, Event, Recording
from tactile_bci.dsp import (decimate, design_butterworth_bandpass, design_butterworth_lowpass, design_notch,
                             extract_epochs, filtfilt, min_filtfilt_length)


def db(h):
    with np.errstate(divide="ignore"):
        return 20 * np.log10(np.abs(h))


def steady_amplitude(y, fs, f, skip):
    """Least-squares amplitude of a known-frequency sinusoid after ``skip`` samples."""
    t = np.arange(y.size) / fs
    basis = np.column_stack([np.sin(2 * np.pi * f * t), np.cos(2 * np.pi * f * t)])[skip:-skip or None]
    coef, *_ = np.linalg.lstsq(basis, y[skip:-skip or None], rcond=None)
    return np.hypot(*coef)


def test_bandpass_corners_and_passband():
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    assert db(f.response([1.0, 50.0])) == pytest.approx([-3.01, -3.01], abs=0.3)
    assert db(f.response(25.0)) > -1.0


def test_bandpass_matches_reference_design():
    for order, lo, hi, fs in [(3, 1, 50, 250), (3, 1, 45, 250), (4, 8, 13, 250), (2, 13, 30, 1000)]:
        ours = design_butterworth_bandpass(order, lo, hi, fs)
        sos = signal.butter(order, [lo, hi], btype="bandpass", fs=fs, output="sos")
        freqs = np.linspace(0.1, fs / 2 - 0.1, 400)
        _, ref = signal.sosfreqz(sos, worN=freqs, fs=fs)
        assert np.allclose(ours.response(freqs), ref, atol=1e-9)


def test_lowpass_matches_reference_design():
    ours = design_butterworth_lowpass(8, 10.0, 2500.0)
    sos = signal.butter(8, 10.0, fs=2500.0, output="sos")
    freqs = np.linspace(0, 100, 300)
    _, ref = signal.sosfreqz(sos, worN=freqs, fs=2500.0)
    assert np.allclose(ours.response(freqs), ref, atol=1e-8)


def test_notch_matches_reference_design():
    ours = design_notch(60.0, 35.0, 2500.0)
    b, a = signal.iirnotch(60.0, 35.0, fs=2500.0)
    assert np.allclose(ours.b, b, atol=1e-12) and np.allclose(ours.a, a, atol=1e-12)


def test_45hz_band_rejects_mains():
    f = design_butterworth_bandpass(3, 1.0, 45.0, 250.0)
    assert db(f.response(60.0)) < -10
    assert db(f.response(20.0)) > -0.5


@settings(max_examples=40, deadline=None)
@given(order=st.integers(1, 8), lo=st.floats(0.5, 40), width=st.floats(1, 60), fs=st.sampled_from([250.0, 500.0]))
def test_any_bandpass_is_stable_and_rejects_dc(order, lo, width, fs):
    hi = min(lo + width, 0.45 * fs)
    f = design_butterworth_bandpass(order, lo, hi, fs)
    assert f.max_pole_modulus < 1 - 1e-9
    assert db(f.response(0.0)) < -60


@pytest.mark.parametrize("args", [(3, 1, 125, 250), (3, 1, 200, 250), (0, 1, 50, 250), (9, 1, 50, 250),
                                  (3, 0, 50, 250), (3, 30, 20, 250)])
def test_bandpass_domain_errors(args):
    with pytest.raises(DomainError):
        design_butterworth_bandpass(*args)


def test_notch_attenuates_mains_and_keeps_alpha():
    fs = 2500.0
    f = design_notch(60.0, 35.0, fs)
    t = np.arange(int(4 * fs)) / fs
    skip = int(1.5 * fs)
    # single-pass, steady state after the transient
    y60 = signal.sosfilt(f.sos, np.sin(2 * np.pi * 60 * t))
    assert steady_amplitude(y60, fs, 60.0, skip) < 0.03
    y10 = signal.sosfilt(f.sos, np.sin(2 * np.pi * 10 * t))
    assert steady_amplitude(y10, fs, 10.0, skip) == pytest.approx(1.0, abs=0.01)
    assert abs(f.response(0.0)) == pytest.approx(1.0, abs=0.01)
    assert f.max_pole_modulus < 1 - 1e-9


def test_filtfilt_matches_reference_zero_phase():
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    x = np.random.default_rng(0).standard_normal(2000)
    ref = signal.sosfiltfilt(f.sos, x, padtype="odd", padlen=3 * max(len(f.a), len(f.b)))
    assert np.allclose(filtfilt(f, x), ref, atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31 - 1), a=st.floats(-5, 5), b=st.floats(-5, 5))
def test_filtfilt_linearity(seed, a, b):
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 500))
    lhs = filtfilt(f, a * x + b * y)
    rhs = a * filtfilt(f, x) + b * filtfilt(f, y)
    assert np.allclose(lhs, rhs, rtol=1e-9, atol=1e-9 * np.abs(rhs).max())


def test_filtfilt_sinusoids_pass_and_stop():
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    fs = 250.0
    t = np.arange(2500) / fs
    x10 = np.sin(2 * np.pi * 10 * t)
    y = filtfilt(f, x10)
    mid = slice(500, 2000)
    assert np.max(np.abs(y[mid])) == pytest.approx(1.0, rel=0.02)
    lags = np.arange(-5, 6)
    xc = [np.dot(y[mid], np.roll(x10, k)[mid]) for k in lags]
    assert lags[int(np.argmax(xc))] == 0
    y100 = filtfilt(f, np.sin(2 * np.pi * 100 * t))
    assert np.max(np.abs(y100[mid])) < 0.05


def test_filtfilt_along_axis_and_short_input():
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    x = np.random.default_rng(1).standard_normal((3, 400))
    assert np.allclose(filtfilt(f, x.T, axis=0).T, filtfilt(f, x))
    n = min_filtfilt_length(f)
    filtfilt(f, np.ones(n))
    with pytest.raises(DomainError, match=str(n)):
        filtfilt(f, np.ones(n - 1))


def test_decimate_identity_and_errors(small_recording):
    assert decimate(small_recording, 1) is small_recording
    with pytest.raises(DomainError):
        decimate(small_recording, 0)


def test_decimate_by_ten():
    fs = 2500.0
    t = np.arange(50_000) / fs
    rec = Recording(fs, ("C3",), np.sin(2 * np.pi * 5 * t)[None], [Event(12_500, "a")])
    out = decimate(rec, 10)
    assert out.sample_rate_hz == 250.0
    assert out.n_samples == 5000
    assert out.events[0].onset_sample == 1250
    ref = np.sin(2 * np.pi * 5 * np.arange(5000) / 250.0)
    mid = slice(500, 4500)
    assert steady_amplitude(out.data[0], 250.0, 5.0, 500) == pytest.approx(1.0, rel=0.02)
    assert np.max(np.abs(out.data[0, mid] - ref[mid])) < 0.02


def _rec(n_samples, onsets, fs=250.0):
    return Recording(fs, ("C3", "C4"), np.zeros((2, n_samples)), [Event(o, "a") for o in onsets])


def test_epoch_length_and_drop_at_tail():
    with pytest.warns(UserWarning, match="dropped 1"):
        ep = extract_epochs(_rec(5000, [0, 1000, 4000]), (500, 4500), ["a"])
    assert ep.n_samples == 1000
    assert ep.n_trials == 2 and ep.n_dropped == 1
    assert ep.t0_ms == 500.0


def test_four_hundred_events_all_kept():
    onsets = [i * 1000 for i in range(400)]
    ep = extract_epochs(_rec(401_000, onsets), (500, 4500), ["a"])
    assert ep.n_trials == 400 and ep.n_dropped == 0


def test_no_epochs_is_explicit_error():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        with pytest.raises(DomainError, match="no epochs extracted"):
            extract_epochs(_rec(500, [100]), (500, 4500), ["a"])


def test_filtfilt_passband_idempotent():
    f = design_butterworth_bandpass(3, 1.0, 50.0, 250.0)
    x = np.sin(2 * np.pi * 10 * np.arange(2500) / 250.0)
    once = filtfilt(f, x)
    twice = filtfilt(f, once)
    mid = slice(500, 2000)
    assert np.max(np.abs(twice[mid])) == pytest.approx(np.max(np.abs(once[mid])), rel=0.05)


def test_decimate_commutes_with_epoching():
    fs = 2500.0
    rng = np.random.default_rng(4)
    t = np.arange(100_000) / fs
    x = np.sin(2 * np.pi * 6 * t + 0.3) + 0.5 * np.sin(2 * np.pi * 11 * t)
    onsets = [10_000 * k + 5_000 + int(rng.integers(0, 10)) * 10 for k in range(9)]
    rec = Recording(fs, ("C3",), x[None], [Event(o, "a") for o in onsets])
    a = extract_epochs(decimate(rec, 10), (0, 2000), ["a"])
    ep = extract_epochs(rec, (-400, 2400), ["a"])
    per_trial = []
    for trial in ep.data:
        r = decimate(Recording(fs, ("C3",), trial), 10)
        per_trial.append(r.data[:, 100:600])
    b = np.stack(per_trial)
    assert np.max(np.abs(a.data - b)) < 0.02 * np.max(np.abs(a.data))


def test_epochs_copy_source_samples_in_event_order():
    rng = np.random.default_rng(5)
    data = rng.standard_normal((2, 3000))
    events = [Event(100, "b"), Event(900, "a"), Event(1500, "b"), Event(2960, "a")]
    rec = Recording(250.0, ("C3", "C4"), data, events)
    with pytest.warns(UserWarning):
        ep = extract_epochs(rec, (-100, 200), ["a", "b"])
    kept = [e for e in events if e.onset_sample - 25 >= 0 and e.onset_sample + 50 <= 3000]
    assert ep.labels == tuple(e.label for e in kept)
    for trial, e in zip(ep.data, kept):
        assert np.array_equal(trial, data[:, e.onset_sample - 25:e.onset_sample + 50])
