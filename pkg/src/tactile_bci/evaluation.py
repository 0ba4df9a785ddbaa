"""Repeated stratified k-fold evaluation of the band-filter -> CSP -> LDA pipeline.

Only per-trial operations (the fixed band-pass filters) touch held-out data
before the split; CSP and LDA are refit inside every training fold.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Iterator

import numpy as np

from .clf import LdaModel, fit_lda, predict
from .core import DomainError, EpochSet
from .features import DEFAULT_BANDS, band_filter_epochs, fit_csp_ovr, multiband_csp_features

__all__ = [
    "PipelineConfig",
    "PipelineModel",
    "FoldResult",
    "EvaluationReport",
    "stratified_folds",
    "fit_pipeline",
    "predict_pipeline",
    "iter_folds",
    "cross_validate",
    "format_accuracy",
    "summarize",
]

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class PipelineConfig:
    bands: dict = field(default_factory=lambda: dict(DEFAULT_BANDS))
    band_order: int = 3
    n_per_side: int = 3
    shrinkage: float = 0.05

    def to_dict(self) -> dict:
        return {
            "bands": {k: [float(v[0]), float(v[1])] for k, v in self.bands.items()},
            "band_order": self.band_order,
            "n_per_side": self.n_per_side,
            "shrinkage": self.shrinkage,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        d = dict(d)
        if "bands" in d:
            d["bands"] = {k: tuple(v) for k, v in d["bands"].items()}
        return cls(**d)


@dataclass(frozen=True, eq=False)
class PipelineModel:
    csp: dict  # band name -> list of (label, CspModel)
    lda: LdaModel


@dataclass(frozen=True, eq=False)
class FoldResult:
    repetition: int
    fold: int
    train_index: np.ndarray
    test_index: np.ndarray
    model: PipelineModel
    predictions: tuple
    n_correct: int

    @property
    def accuracy(self) -> float:
        return self.n_correct / len(self.test_index)


@dataclass(frozen=True)
class EvaluationReport:
    fold_accuracies: tuple
    mean_accuracy: float
    std_accuracy: float
    repetition_std: float
    per_class_recall: dict
    confusion: tuple
    labels: tuple
    chance_level: float
    seed: int
    n_folds: int
    n_repetitions: int
    config_echo: dict
    schema_version: int = REPORT_SCHEMA_VERSION

    @property
    def summary(self) -> str:
        return format_accuracy(self.mean_accuracy, self.std_accuracy)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fold_accuracies"] = list(self.fold_accuracies)
        d["labels"] = list(self.labels)
        d["confusion"] = [list(r) for r in self.confusion]
        d["summary"] = self.summary
        return d


def stratified_folds(labels, n_folds: int, rng: np.random.Generator, label_order=None) -> np.ndarray:
    """Fold index per trial; every class is spread evenly over the folds.

    Each class's trials are shuffled, the classes are concatenated in label
    order and fold numbers are dealt round-robin over that sequence.
    """
    labels = np.asarray(labels, dtype=object)
    order = tuple(label_order) if label_order is not None else tuple(dict.fromkeys(labels.tolist()))
    fold_of = np.empty(labels.size, dtype=int)
    pos = 0
    for lab in order:
        idx = np.flatnonzero(labels == lab)
        idx = idx[rng.permutation(idx.size)]
        fold_of[idx] = (pos + np.arange(idx.size)) % n_folds
        pos += idx.size
    return fold_of


def _band_epochs(epochs: EpochSet, config: PipelineConfig) -> dict:
    return {name: band_filter_epochs(epochs, band, config.band_order) for name, band in config.bands.items()}


def fit_pipeline(band_epochs: dict, config: PipelineConfig, label_order=None) -> PipelineModel:
    """Fit one-vs-rest CSP per band and LDA on the concatenated features."""
    csp = {name: fit_csp_ovr(ep, config.n_per_side, band_hz=config.bands[name]) for name, ep in band_epochs.items()}
    feats = multiband_csp_features(csp, band_epochs)
    first = next(iter(band_epochs.values()))
    return PipelineModel(csp, fit_lda(feats, config.shrinkage, label_order or first.label_set))


def predict_pipeline(model: PipelineModel, band_epochs: dict) -> list[str]:
    return predict(model.lda, multiband_csp_features(model.csp, band_epochs))


def _check_epochs(epochs: EpochSet, n_folds: int):
    if epochs.n_trials == 0:
        raise DomainError("no epochs to evaluate")
    if n_folds < 2:
        raise DomainError(f"need at least 2 folds, got {n_folds}")
    labels = epochs.label_array
    for lab in epochs.label_set:
        n = int(np.sum(labels == lab))
        if 0 < n < n_folds:
            raise DomainError(f"class {lab!r} has {n} trials, fewer than the {n_folds} folds requested")


def iter_folds(epochs: EpochSet, config: PipelineConfig | None = None, n_folds: int = 5,
               n_repetitions: int = 5, seed: int = 0) -> Iterator[FoldResult]:
    """Yield one :class:`FoldResult` per (repetition, fold), in that order."""
    config = config or PipelineConfig()
    _check_epochs(epochs, n_folds)
    labels = epochs.label_array
    label_order = tuple(lab for lab in epochs.label_set if np.any(labels == lab))
    filtered = _band_epochs(epochs, config)
    for rep in range(n_repetitions):
        rng = np.random.default_rng(np.random.SeedSequence([seed, rep]))
        fold_of = stratified_folds(labels, n_folds, rng, label_order)
        for k in range(n_folds):
            train = np.flatnonzero(fold_of != k)
            test = np.flatnonzero(fold_of == k)
            model = fit_pipeline({n: ep.select(train) for n, ep in filtered.items()}, config, label_order)
            pred = predict_pipeline(model, {n: ep.select(test) for n, ep in filtered.items()})
            correct = int(np.sum(np.array(pred, dtype=object) == labels[test]))
            yield FoldResult(rep, k, train, test, model, tuple(pred), correct)


def cross_validate(epochs: EpochSet, config: PipelineConfig | None = None, n_folds: int = 5,
                   n_repetitions: int = 5, seed: int = 0) -> EvaluationReport:
    """Repeated stratified k-fold accuracy of the full pipeline."""
    config = config or PipelineConfig()
    labels = epochs.label_array
    classes = tuple(lab for lab in epochs.label_set if np.any(labels == lab))
    pos = {lab: i for i, lab in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    accs = []
    for res in iter_folds(epochs, config, n_folds, n_repetitions, seed):
        accs.append(res.accuracy)
        for true, guess in zip(labels[res.test_index], res.predictions):
            confusion[pos[true], pos[guess]] += 1
    accs = np.array(accs)
    rep_means = accs.reshape(n_repetitions, n_folds).mean(axis=1)
    counts = np.array([np.sum(labels == lab) for lab in classes])
    chance = 1.0 / len(classes) if np.all(counts == counts[0]) else float(counts.max() / counts.sum())
    recall = {lab: float(confusion[i, i] / confusion[i].sum()) for i, lab in enumerate(classes)}
    return EvaluationReport(
        fold_accuracies=tuple(float(a) for a in accs),
        mean_accuracy=float(np.mean(accs)),
        std_accuracy=float(np.std(accs, ddof=1)) if accs.size > 1 else 0.0,
        repetition_std=float(np.std(rep_means, ddof=1)) if n_repetitions > 1 else 0.0,
        per_class_recall=recall,
        confusion=tuple(tuple(int(v) for v in row) for row in confusion),
        labels=classes,
        chance_level=float(chance),
        seed=int(seed),
        n_folds=int(n_folds),
        n_repetitions=int(n_repetitions),
        config_echo=config.to_dict(),
    )


def format_accuracy(mean: float, std: float) -> str:
    """Percent with two decimals, e.g. ``70.95(±1.50)%``."""
    return f"{100.0 * mean:.2f}(±{100.0 * std:.2f})%"


def summarize(report: EvaluationReport, condition: str | None = None) -> str:
    head = f"{len(report.labels)}-class accuracy ({report.n_repetitions}-by-{report.n_folds}-fold cross-validation)"
    if condition:
        head = f"{condition}: {head}"
    lines = [f"{head}: {report.summary}",
             f"chance level: {100.0 * report.chance_level:.2f}%",
             "per-class recall:"]
    width = max(len(lab) for lab in report.labels)
    for lab in report.labels:
        r = report.per_class_recall[lab]
        lines.append(f"  {lab:<{width}}  {r:.4f}  {100.0 * r:.2f}%")
    return "\n".join(lines) + "\n"
