"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line; the lines are printed
at the end of the pytest run and when this file is executed directly.
"""
import time
import warnings

import numpy as np
import pytest
from scipy import signal

from tactile_bci.cli import main as cli_main
from tactile_bci.clf import fit_lda, predict, predict_scores
from tactile_bci.core import EpochSet
from tactile_bci.dsp import (design_butterworth_bandpass, design_butterworth_lowpass, design_notch,
                             extract_epochs, filtfilt)
from tactile_bci.ersp import compute_ersp
from tactile_bci.evaluation import (PipelineConfig, cross_validate, fit_pipeline, format_accuracy, iter_folds)
from tactile_bci.features import FeatureMatrix, band_filter_epochs, fit_csp_covariances
from tactile_bci.synth import GeneratorConfig, default_class_defs, generate

RESULTS: dict[int, str] = {}
CHANCE_BAND = (0.18, 0.32)


def record(n: int, ok: bool, detail: str) -> None:
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    RESULTS[n] = line
    print(line)


def synthetic_epochs(erd_depth: float, seed: int = 0) -> EpochSet:
    config = GeneratorConfig(seed=seed, n_trials_per_class=50, class_defs=default_class_defs(erd_depth))
    rec, _ = generate(config)
    return extract_epochs(rec, (500.0, 4500.0), config.labels)


@pytest.fixture(scope="module")
def high_snr():
    return synthetic_epochs(0.6)


def test_criterion_1_table_formatting():
    cases = [((0.7095, 0.0150), "70.95(±1.50)%"), ((0.6807, 0.040), "68.07(±4.00)%"),
             ((0.5755, 0.0183), "57.55(±1.83)%")]
    got = [format_accuracy(*args) for args, _ in cases]
    ok = got == [want for _, want in cases]
    record(1, ok, f"formatter output {got}")
    assert ok


def test_criterion_2_end_to_end(high_snr):
    t0 = time.perf_counter()
    strong = cross_validate(synthetic_epochs(0.6), seed=0)
    runtime = time.perf_counter() - t0
    null = cross_validate(synthetic_epochs(0.0), seed=0)
    ok = (strong.mean_accuracy >= 0.90 and CHANCE_BAND[0] <= null.mean_accuracy <= CHANCE_BAND[1]
          and runtime < 60.0)
    record(2, ok, f"depth 0.6 -> {strong.summary} (need >= 90%), depth 0 -> {null.summary} "
                  f"(need 18-32%), synth+epoch+5x5 CV {runtime:.1f} s (need < 60 s)")
    assert ok


def test_criterion_3_label_permutation(high_snr):
    labels = np.array(high_snr.labels, dtype=object)
    shuffled = labels[np.random.default_rng(2024).permutation(labels.size)]
    permuted = EpochSet(high_snr.data, shuffled, high_snr.sample_rate_hz, high_snr.t0_ms,
                        high_snr.channel_labels, label_set=high_snr.label_set)
    rep = cross_validate(permuted, seed=0)
    ok = CHANCE_BAND[0] <= rep.mean_accuracy <= CHANCE_BAND[1]
    record(3, ok, f"permuted-label accuracy {rep.summary} (need 18-32%)")
    assert ok


def _lag_samples(x, y):
    """Sub-sample lag of ``y`` relative to ``x`` from the cross-correlation peak."""
    xc = signal.correlate(y, x, mode="full")
    k = int(np.argmax(xc))
    a, b, c = xc[k - 1], xc[k], xc[k + 1]
    return (k - (x.size - 1)) + 0.5 * (a - c) / (a - 2 * b + c)


def test_criterion_4_filters():
    fs = 250.0
    f = design_butterworth_bandpass(3, 1.0, 50.0, fs)
    corners_db = 20 * np.log10(np.abs(f.response([1.0, 50.0])))
    t = np.arange(int(8 * fs)) / fs
    burst = np.sin(2 * np.pi * 10 * t) * np.exp(-0.5 * ((t - 4.0) / 0.3) ** 2)
    lag = _lag_samples(burst, filtfilt(f, burst))
    designs = [f, design_butterworth_bandpass(3, 1.0, 45.0, fs), design_butterworth_bandpass(3, 8.0, 13.0, fs),
               design_butterworth_bandpass(3, 13.0, 30.0, fs), design_notch(60.0, 35.0, fs),
               design_notch(60.0, 35.0, 2500.0), design_butterworth_lowpass(8, 10.0, 2500.0)]
    designs += [design_butterworth_bandpass(order, lo, hi, fs)
                for order in range(1, 9) for lo, hi in [(0.5, 4.0), (1.0, 50.0), (30.0, 120.0)]]
    max_pole = max(d.max_pole_modulus for d in designs)
    ok = bool(np.all(np.abs(corners_db + 3.01) <= 0.3)) and abs(lag) < 1.0 and max_pole < 1 - 1e-9
    record(4, ok, f"corners {corners_db.round(3).tolist()} dB (need -3.01 +/- 0.3), 10 Hz burst lag "
                  f"{lag:+.4f} samples (need < 1), max pole modulus {max_pole:.9f} over {len(designs)} designs")
    assert ok


def _random_spd(rng, n):
    a = rng.standard_normal((n, n + 2))
    c = a @ a.T
    return c / np.trace(c)


def test_criterion_5_csp():
    worst_rayleigh = worst_white = 0.0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        ca, cb = _random_spd(rng, 6), _random_spd(rng, 6)
        m = fit_csp_covariances(ca, cb, 3)
        w = m.full_filters
        rq = np.einsum("ki,ij,kj->k", w, ca, w) / np.einsum("ki,ij,kj->k", w, ca + cb, w)
        worst_rayleigh = max(worst_rayleigh, float(np.max(np.abs(rq - m.full_eigenvalues))))
        worst_white = max(worst_white, float(np.max(np.abs(w @ (ca + cb) @ w.T - np.eye(6)))))
    ca = np.diag([1.0, 0.01, 0.01, 0.01, 0.01, 0.01])
    cb = np.diag([0.01, 1.0, 0.01, 0.01, 0.01, 0.01])
    m = fit_csp_covariances(ca / np.trace(ca), cb / np.trace(cb), 1)
    cosines = [abs(m.filters[0, 0]) / np.linalg.norm(m.filters[0]), abs(m.filters[1, 1]) / np.linalg.norm(m.filters[1])]
    ok = worst_rayleigh < 1e-8 and worst_white < 1e-8 and min(cosines) > 0.99
    record(5, ok, f"100 seeds: max Rayleigh error {worst_rayleigh:.2e}, max whitening error {worst_white:.2e} "
                  f"(need < 1e-8); diagonal case |cos| {min(cosines):.6f} (need > 0.99)")
    assert ok


def _closed_form(x_train, labels, x_test, lam):
    classes = list(dict.fromkeys(labels))
    labels = np.asarray(labels)
    n, d = x_train.shape
    means = np.array([x_train[labels == c].mean(axis=0) for c in classes])
    s = sum((x_train[labels == c] - m).T @ (x_train[labels == c] - m) for c, m in zip(classes, means))
    s = s / (n - len(classes))
    s = (1 - lam) * s + lam * np.trace(s) / d * np.eye(d)
    inv = np.linalg.inv(s)
    priors = np.array([np.mean(labels == c) for c in classes])
    return x_test @ (inv @ means.T) - 0.5 * np.einsum("kd,de,ke->k", means, inv, means) + np.log(priors)


def test_criterion_6_lda():
    rng = np.random.default_rng(6)
    labels = [c for c in "abcd" for _ in range(40)]
    centers = rng.standard_normal((4, 24))
    x = np.repeat(centers, 40, axis=0) + rng.standard_normal((160, 24))
    test = rng.standard_normal((100, 24))
    worst = 0.0
    for lam in (0.0, 0.05):
        ours = predict_scores(fit_lda(FeatureMatrix(x, labels, ()), lam), test)
        worst = max(worst, float(np.max(np.abs(ours - _closed_form(x, labels, test, lam)))))
    base = predict(fit_lda(FeatureMatrix(x, labels, ()), 0.0), test)
    agree = 0
    for _ in range(20):
        a = rng.standard_normal((24, 24))
        moved = predict(fit_lda(FeatureMatrix(x @ a.T, labels, ()), 0.0), test @ a.T)
        agree += moved == base
    ok = worst < 1e-8 and agree == 20
    record(6, ok, f"max |score - closed form| {worst:.2e} (need < 1e-8); argmax unchanged on {agree}/20 transforms")
    assert ok


def _sine_epochs(rng, n_trials=50):
    fs = 250.0
    t = -1.0 + np.arange(int(6 * fs)) / fs
    amp = np.where(t >= 0, np.sqrt(0.5), 1.0)
    phase = rng.uniform(0, 2 * np.pi, n_trials)
    x = amp * np.sin(2 * np.pi * 10 * t + phase[:, None]) + 0.1 * rng.standard_normal((n_trials, t.size))
    return EpochSet(x[:, None, :], ["a"] * n_trials, fs, -1000.0, ("C3",))


def _stationary_epochs(rng, n_trials=50):
    # pink background as produced by the generator, no sources, same process before and after the cue
    config = GeneratorConfig(seed=int(rng.integers(2**31)), n_channels=64, n_trials_per_class=n_trials,
                             class_defs=(default_class_defs(0.0)[0],), noise_uv=5.0)
    rec, _ = generate(config)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return extract_epochs(rec, (-1500.0, 5000.0), config.labels)


def test_criterion_7_ersp():
    rng = np.random.default_rng(7)
    halved = compute_ersp(_sine_epochs(rng), (-500.0, 0.0), "C3")
    k = list(halved.freqs_hz).index(10.0)
    post = halved.values_db[k, halved.times_ms >= 500.0]
    halved_ok = bool(np.all(np.abs(post + 3.0103) <= 0.5))
    stationary = compute_ersp(_stationary_epochs(rng), (-1000.0, 0.0), "C3")
    worst = float(np.max(np.abs(stationary.values_db)))
    grid_ok = halved.values_db.shape == (30, 200) and stationary.values_db.shape == (30, 200)
    ok = halved_ok and worst < 1.5 and grid_ok
    record(7, ok, f"halved 10 Hz post-onset {post.min():.2f}..{post.max():.2f} dB (need -3.01 +/- 0.5); "
                  f"stationary max |ERSP| {worst:.2f} dB at 50 trials (need < 1.5); "
                  f"grid {halved.values_db.shape[1]} times x {halved.values_db.shape[0]} freqs")
    assert ok


def _params(model):
    arrays = [model.lda.class_means, model.lda.pooled_covariance, model.lda.weights, model.lda.biases]
    for band in model.csp.values():
        for _, m in band:
            arrays += [m.filters, m.patterns, m.eigenvalues]
    return arrays


def test_criterion_8_leakage(high_snr):
    config = PipelineConfig()
    rng = np.random.default_rng(8)
    checked = identical = 0
    for res in iter_folds(high_snr, config, n_folds=5, n_repetitions=5, seed=0):
        data = high_snr.data.copy()
        data[res.test_index] = 50.0 * rng.standard_normal(data[res.test_index].shape)
        perturbed = high_snr.with_data(data)
        # refit on the perturbed data with the same split; the per-trial band filters are applied first
        bands = {n: band_filter_epochs(perturbed, b, config.band_order).select(res.train_index)
                 for n, b in config.bands.items()}
        refit = fit_pipeline(bands, config, high_snr.label_set)
        checked += 1
        identical += all(np.array_equal(a, b) for a, b in zip(_params(res.model), _params(refit)))
    ok = identical == checked == 25
    record(8, ok, f"{identical}/{checked} folds with bit-identical CSP and LDA parameters after test-fold perturbation")
    assert ok


def test_criterion_9_determinism(tmp_path, capsys):
    for run in ("a", "b"):
        d = tmp_path / run
        d.mkdir()
        assert cli_main(["synth", "--out", str(d / "rec"), "--seed", "9"]) == 0
        assert cli_main(["preprocess", "--in", str(d / "rec"), "--out", str(d / "ep")]) == 0
        assert cli_main(["evaluate", "--epochs", str(d / "ep"), "--seed", "9", "--report", str(d / "report.json")]) == 0
    capsys.readouterr()
    names = ["rec.json", "rec.f32", "rec.events.csv", "rec.truth.json", "report.json"]
    same = [n for n in names if (tmp_path / "a" / n).read_bytes() == (tmp_path / "b" / n).read_bytes()]
    ok = same == names
    record(9, ok, f"byte-identical across two runs: {len(same)}/{len(names)} files ({', '.join(names)})")
    assert ok


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
