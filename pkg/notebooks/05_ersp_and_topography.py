"""Time-frequency and scalp views of the desynchronization.

Computes the ERSP at C3 for the class whose sources sit there and the 8-30 Hz
power in five 1 s windows after the cue, then writes both as CSV.

Run: python notebooks/05_ersp_and_topography.py [output_dir]
"""
import sys
import warnings
from pathlib import Path

import numpy as np

from tactile_bci.core import Montage
from tactile_bci.dsp import extract_epochs
from tactile_bci.ersp import compute_ersp, export_ersp_csv
from tactile_bci.features import band_power_topography
from tactile_bci.io import export_topography_csv
from tactile_bci.synth import GeneratorConfig, generate

out = Path(sys.argv[1] if len(sys.argv) > 1 else "ersp_out")
out.mkdir(exist_ok=True)

config = GeneratorConfig(seed=0)
rec, _ = generate(config)
with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    epochs = extract_epochs(rec, (-1500.0, 5500.0), config.labels)
fabric = epochs.of_class("fabric")

ersp = compute_ersp(fabric, (-1000.0, 0.0), "C3")
task = (ersp.times_ms >= 0) & (ersp.times_ms <= 5000)
alpha_beta = (ersp.freqs_hz >= 8) & (ersp.freqs_hz <= 30)
print(f"ERSP grid {ersp.values_db.shape[0]} freqs x {ersp.values_db.shape[1]} times")
print(f"mean 8-30 Hz ERSP at C3 during the task: {ersp.values_db[alpha_beta][:, task].mean():.2f} dB")
export_ersp_csv([ersp], out / "fabric_C3.ersp.csv")

windows = [(0, 1000), (1000, 2000), (2000, 3000), (3000, 4000), (4000, 5000)]
rest = band_power_topography(fabric, (8, 30), [(-1000, 0)])["power"][0]
topo = band_power_topography(fabric, (8, 30), windows, Montage.standard_64())
ratio_db = 10 * np.log10(topo["power"] / rest)
for (a, b), row in zip(windows, ratio_db):
    i = int(np.argmin(row))
    print(f"  {a:>4}-{b:<4} ms  strongest drop {row[i]:6.2f} dB at {epochs.channel_labels[i]}")
export_topography_csv(topo, out / "fabric.topomap.csv")
print(f"wrote CSVs to {out}/")
