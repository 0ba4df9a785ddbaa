"""Repeated stratified cross-validation of band-filter -> CSP -> LDA.

Compares a dataset with class-specific desynchronization against one where
the classes are identical, and a label-permuted copy of the first.

Run: python notebooks/04_cross_validation.py
"""
import numpy as np

from tactile_bci.core import EpochSet
from tactile_bci.dsp import extract_epochs
from tactile_bci.evaluation import cross_validate, summarize
from tactile_bci.synth import GeneratorConfig, default_class_defs, generate


def epochs_for(depth):
    config = GeneratorConfig(seed=0, class_defs=default_class_defs(depth))
    rec, _ = generate(config)
    return extract_epochs(rec, (500.0, 4500.0), config.labels)


strong = epochs_for(0.6)
print(summarize(cross_validate(strong, seed=0), "ERD depth 0.6"))
print(summarize(cross_validate(epochs_for(0.0), seed=0), "ERD depth 0"))

shuffled = np.array(strong.labels, dtype=object)[np.random.default_rng(1).permutation(strong.n_trials)]
permuted = EpochSet(strong.data, shuffled, strong.sample_rate_hz, strong.t0_ms, strong.channel_labels,
                    label_set=strong.label_set)
print(summarize(cross_validate(permuted, seed=0), "permuted labels"))
