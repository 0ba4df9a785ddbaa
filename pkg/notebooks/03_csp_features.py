"""One-vs-rest common spatial patterns on the synthetic data.

Fits one CSP model per texture in the alpha and beta bands and shows where
each class's strongest activation pattern sits on the scalp.

Run: python notebooks/03_csp_features.py
"""
import numpy as np

from tactile_bci.dsp import extract_epochs
from tactile_bci.features import DEFAULT_BANDS, band_filter_epochs, fit_csp_ovr, multiband_csp_features
from tactile_bci.synth import GeneratorConfig, generate

config = GeneratorConfig(seed=0)
rec, truth = generate(config)
epochs = extract_epochs(rec, (500.0, 4500.0), config.labels)

band_epochs = {name: band_filter_epochs(epochs, band) for name, band in DEFAULT_BANDS.items()}
models = {name: fit_csp_ovr(ep, 3, band_hz=DEFAULT_BANDS[name]) for name, ep in band_epochs.items()}

print("alpha band, one model per class:")
for (label, model), cls in zip(models["alpha"], config.class_defs):
    # the bottom filter keeps the variance the class loses during its desynchronization
    pattern = np.abs(model.patterns[:, -1])
    top = [epochs.channel_labels[i] for i in np.argsort(pattern)[::-1][:3]]
    print(f"  {label:<7} eigenvalues {np.round(model.eigenvalues, 3)}  strongest pattern at {top}"
          f"  (source region {cls.sources[0].region})")

features = multiband_csp_features(models, band_epochs)
print(f"\nfeature matrix: {features.values.shape[0]} trials x {features.n_features} features")
print("first names:", features.feature_names[:4])
