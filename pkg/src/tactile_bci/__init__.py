"""Offline EEG decoding toolkit for tactile perception and touch imagery.

Band-pass filtering and epoching, one-vs-rest common spatial patterns,
shrinkage LDA, repeated stratified cross-validation, ERSP maps and band-power
topographies, plus a synthetic EEG generator with known ground truth.
"""
from .core import (DEMO_LABELS, STANDARD_64, DomainError, EpochSet, Event, Montage, Recording,
                   TactileBciError, validate_recording)
from .clf import LdaModel, fit_lda, predict, predict_scores
from .dsp import (IirFilter, decimate, design_butterworth_bandpass, design_butterworth_lowpass,
                  design_notch, extract_epochs, filtfilt)
from .ersp import ErspMap, compute_ersp, export_ersp_csv
from .evaluation import EvaluationReport, PipelineConfig, cross_validate, format_accuracy, summarize
from .features import (CspModel, FeatureMatrix, band_power_topography, csp_features, fit_csp_ovr,
                       fit_csp_pair, trial_covariance)
from .synth import GeneratorConfig, generate

__version__ = "0.1.0"
