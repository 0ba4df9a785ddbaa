"""File formats.

Recording ``<prefix>``:

* ``<prefix>.json``: header (format_version, sample_rate_hz, channel_labels,
  n_samples, byte_order="little-endian", sample_encoding="float32")
* ``<prefix>.f32``: raw little-endian float32, channel-major
* ``<prefix>.events.csv``: ``onset_sample,label`` with one header line

Epochs ``<prefix>``: ``<prefix>.epochs.json`` header with labels and time axis,
``<prefix>.epochs.f32`` payload in (trial, channel, sample) order.

Reports and models are JSON with a fixed key order. Floats in JSON keep
Python's shortest round-trip repr; CSV outputs use 6 significant digits.
Readers are reentrant; concurrent writers to the same path are not supported.
"""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path

import numpy as np

from .clf import LdaModel
from .core import DomainError, EpochSet, Event, Recording, TactileBciError
from .evaluation import REPORT_SCHEMA_VERSION, EvaluationReport
from .features import CspModel

__all__ = [
    "FormatError",
    "recording_paths",
    "epochs_paths",
    "read_recording",
    "write_recording",
    "read_epochs",
    "write_epochs",
    "write_report",
    "read_report",
    "report_to_json",
    "csp_model_to_dict",
    "csp_model_from_dict",
    "write_csp_models",
    "read_csp_models",
    "lda_model_to_dict",
    "lda_model_from_dict",
    "write_lda_model",
    "read_lda_model",
    "export_topography_csv",
    "read_topography_csv",
]

FORMAT_VERSION = 1
_LABEL_RE = re.compile(r"^[A-Za-z0-9_.\-]+$")
_DTYPE = np.dtype("<f4")


class FormatError(TactileBciError, ValueError):
    """A file does not follow the documented format."""


def recording_paths(prefix) -> tuple[Path, Path, Path]:
    p = str(prefix)
    return Path(p + ".json"), Path(p + ".f32"), Path(p + ".events.csv")


def epochs_paths(prefix) -> tuple[Path, Path]:
    p = str(prefix)
    return Path(p + ".epochs.json"), Path(p + ".epochs.f32")


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _write_text(path, text: str):
    path = Path(path)
    try:
        path.write_text(text, encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _write_bytes(path, data: bytes):
    path = Path(path)
    try:
        path.write_bytes(data)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _load_json(path) -> dict:
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def _check_labels(labels, path) -> tuple:
    labels = tuple(labels)
    seen = set()
    for lab in labels:
        if not isinstance(lab, str) or not lab:
            raise FormatError(f"{path}: header error: channel labels must be non-empty strings")
        if lab in seen:
            raise FormatError(f"{path}: header error: duplicate channel label {lab!r}")
        seen.add(lab)
    return labels


def _read_payload(path, n_values: int) -> np.ndarray:
    path = Path(path)
    size = path.stat().st_size
    if size != n_values * _DTYPE.itemsize:
        raise FormatError(f"{path}: payload size inconsistent with header "
                          f"({size} bytes, expected {n_values * _DTYPE.itemsize})")
    return np.fromfile(path, dtype=_DTYPE).astype(np.float64)


def _read_events(path, n_samples: int) -> list[Event]:
    path = Path(path)
    events = []
    with path.open(newline="", encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines or lines[0].strip() != "onset_sample,label":
        raise FormatError(f"{path}: line 1: expected header 'onset_sample,label'")
    prev = -1
    for line_no, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise FormatError(f"{path}: line {line_no}: expected 'onset_sample,label'")
        onset_s, label = parts[0].strip(), parts[1].strip()
        if not onset_s.isdigit():
            raise FormatError(f"{path}: line {line_no}: onset {onset_s!r} is not a non-negative integer")
        if not _LABEL_RE.match(label):
            raise FormatError(f"{path}: line {line_no}: label {label!r} uses characters outside [A-Za-z0-9_.-]")
        onset = int(onset_s)
        if onset >= n_samples:
            raise FormatError(f"{path}: line {line_no}: onset {onset} out of range for {n_samples} samples")
        if onset < prev:
            raise FormatError(f"{path}: line {line_no}: events not sorted by onset")
        prev = onset
        events.append(Event(onset, label))
    return events


def read_recording(header_path, data_path=None, events_path=None) -> Recording:
    """Read a recording; with one argument it is taken as the file prefix."""
    if data_path is None and events_path is None:
        header_path, data_path, events_path = recording_paths(header_path)
    head = _load_json(header_path)
    if head.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{header_path}: unsupported format_version {head.get('format_version')!r}")
    if head.get("byte_order") != "little-endian" or head.get("sample_encoding") != "float32":
        raise FormatError(f"{header_path}: header error: only little-endian float32 payloads are supported")
    try:
        fs = float(head["sample_rate_hz"])
        labels = _check_labels(head["channel_labels"], header_path)
        n = int(head["n_samples"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{header_path}: header error: missing or invalid field {exc}") from None
    data = _read_payload(data_path, len(labels) * n).reshape(len(labels), n)
    events = _read_events(events_path, n) if events_path is not None and Path(events_path).exists() else []
    return Recording(fs, labels, data, events)


def write_recording(rec: Recording, header_path, data_path=None, events_path=None) -> None:
    """Write a recording; with one path argument it is taken as the file prefix."""
    if data_path is None and events_path is None:
        header_path, data_path, events_path = recording_paths(header_path)
    header = {
        "format_version": FORMAT_VERSION,
        "sample_rate_hz": rec.sample_rate_hz,
        "channel_labels": list(rec.channel_labels),
        "n_samples": rec.n_samples,
        "byte_order": "little-endian",
        "sample_encoding": "float32",
    }
    _write_text(header_path, _dump(header))
    _write_bytes(data_path, np.ascontiguousarray(rec.data, dtype=_DTYPE).tobytes())
    events = sorted(rec.events, key=lambda e: e.onset_sample)
    _write_text(events_path, "onset_sample,label\n" + "".join(f"{e.onset_sample},{e.label}\n" for e in events))


def write_epochs(epochs: EpochSet, prefix) -> None:
    head_path, data_path = epochs_paths(prefix)
    header = {
        "format_version": FORMAT_VERSION,
        "kind": "epochs",
        "sample_rate_hz": epochs.sample_rate_hz,
        "t0_ms": epochs.t0_ms,
        "channel_labels": list(epochs.channel_labels),
        "n_trials": epochs.n_trials,
        "n_samples": epochs.n_samples,
        "label_set": list(epochs.label_set),
        "labels": list(epochs.labels),
        "n_dropped": epochs.n_dropped,
        "byte_order": "little-endian",
        "sample_encoding": "float32",
    }
    _write_text(head_path, _dump(header))
    _write_bytes(data_path, np.ascontiguousarray(epochs.data, dtype=_DTYPE).tobytes())


def read_epochs(prefix) -> EpochSet:
    head_path, data_path = epochs_paths(prefix)
    head = _load_json(head_path)
    if head.get("format_version") != FORMAT_VERSION or head.get("kind") != "epochs":
        raise FormatError(f"{head_path}: not a version-{FORMAT_VERSION} epochs header")
    labels = _check_labels(head["channel_labels"], head_path)
    n_tr, n_s = int(head["n_trials"]), int(head["n_samples"])
    data = _read_payload(data_path, n_tr * len(labels) * n_s).reshape(n_tr, len(labels), n_s)
    return EpochSet(data, head["labels"], head["sample_rate_hz"], head["t0_ms"], labels,
                    n_dropped=int(head.get("n_dropped", 0)), label_set=tuple(head["label_set"]))


def report_to_json(report: EvaluationReport) -> str:
    d = report.to_dict()
    order = ["schema_version", "summary", "labels", "n_folds", "n_repetitions", "seed", "fold_accuracies",
             "mean_accuracy", "std_accuracy", "repetition_std", "per_class_recall", "confusion",
             "chance_level", "config_echo"]
    doc = {k: d[k] for k in order}
    doc["per_class_recall"] = {lab: d["per_class_recall"][lab] for lab in report.labels}
    return _dump(doc)


def write_report(report: EvaluationReport, path) -> None:
    _write_text(path, report_to_json(report))


def read_report(path) -> EvaluationReport:
    doc = _load_json(path)
    version = doc.get("schema_version")
    if version != REPORT_SCHEMA_VERSION:
        raise FormatError(f"{path}: report schema version {version!r} does not match "
                          f"supported version {REPORT_SCHEMA_VERSION}")
    try:
        return EvaluationReport(
            fold_accuracies=tuple(doc["fold_accuracies"]),
            mean_accuracy=doc["mean_accuracy"],
            std_accuracy=doc["std_accuracy"],
            repetition_std=doc["repetition_std"],
            per_class_recall=dict(doc["per_class_recall"]),
            confusion=tuple(tuple(r) for r in doc["confusion"]),
            labels=tuple(doc["labels"]),
            chance_level=doc["chance_level"],
            seed=doc["seed"],
            n_folds=doc["n_folds"],
            n_repetitions=doc["n_repetitions"],
            config_echo=doc["config_echo"],
            schema_version=version,
        )
    except KeyError as exc:
        raise FormatError(f"{path}: report is missing field {exc}") from None


def _mat(a) -> list:
    return np.asarray(a, dtype=float).tolist()


def csp_model_to_dict(model: CspModel) -> dict:
    return {
        "n_per_side": model.n_per_side,
        "channel_labels": list(model.channel_labels),
        "band_hz": None if model.band_hz is None else list(model.band_hz),
        "eigenvalues": _mat(model.eigenvalues),
        "filters": _mat(model.filters),
        "patterns": _mat(model.patterns),
    }


def csp_model_from_dict(d: dict, channel_labels=None) -> CspModel:
    labels = tuple(d["channel_labels"])
    if channel_labels is not None and tuple(channel_labels) != labels:
        raise DomainError("CSP model channel labels do not match the data")
    filters = np.array(d["filters"], dtype=float)
    patterns = np.array(d["patterns"], dtype=float)
    eig = np.array(d["eigenvalues"], dtype=float)
    n_comp = 2 * int(d["n_per_side"])
    if filters.shape[0] != n_comp or eig.size != n_comp or patterns.shape != filters.T.shape:
        raise FormatError("CSP model arrays have inconsistent shapes")
    if labels and filters.shape[1] != len(labels):
        raise FormatError("CSP filter width does not match the channel labels")
    band = d.get("band_hz")
    return CspModel(filters, patterns, eig, int(d["n_per_side"]), labels, None if band is None else tuple(band))


def write_csp_models(models, path) -> None:
    """Write a list of ``(label, CspModel)`` pairs."""
    doc = {"format_version": FORMAT_VERSION, "kind": "csp",
           "models": [{"label": lab, **csp_model_to_dict(m)} for lab, m in models]}
    _write_text(path, _dump(doc))


def read_csp_models(path, channel_labels=None) -> list:
    doc = _load_json(path)
    if doc.get("kind") != "csp" or doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{path}: not a version-{FORMAT_VERSION} CSP model file")
    return [(m["label"], csp_model_from_dict(m, channel_labels)) for m in doc["models"]]


def lda_model_to_dict(model: LdaModel) -> dict:
    return {
        "class_labels": list(model.class_labels),
        "shrinkage_lambda": model.shrinkage_lambda,
        "priors": _mat(model.priors),
        "class_means": _mat(model.class_means),
        "pooled_covariance": _mat(model.pooled_covariance),
        "weights": _mat(model.weights),
        "biases": _mat(model.biases),
    }


def lda_model_from_dict(d: dict) -> LdaModel:
    model = LdaModel(
        tuple(d["class_labels"]),
        np.array(d["class_means"], dtype=float),
        np.array(d["pooled_covariance"], dtype=float),
        np.array(d["weights"], dtype=float),
        np.array(d["biases"], dtype=float),
        float(d["shrinkage_lambda"]),
        np.array(d["priors"], dtype=float),
    )
    model.check()
    return model


def write_lda_model(model: LdaModel, path) -> None:
    _write_text(path, _dump({"format_version": FORMAT_VERSION, "kind": "lda", **lda_model_to_dict(model)}))


def read_lda_model(path) -> LdaModel:
    doc = _load_json(path)
    if doc.get("kind") != "lda" or doc.get("format_version") != FORMAT_VERSION:
        raise FormatError(f"{path}: not a version-{FORMAT_VERSION} LDA model file")
    return lda_model_from_dict(doc)


def export_topography_csv(topo: dict, path) -> None:
    """CSV ``window_start_ms,window_end_ms,channel,x,y,power``; one row per window and channel."""
    xy = topo.get("xy")
    lines = ["window_start_ms,window_end_ms,channel,x,y,power\n"]
    for (start, end), row in zip(topo["windows_ms"], topo["power"]):
        for i, ch in enumerate(topo["channel_labels"]):
            x, y = ("", "") if xy is None else (f"{xy[i, 0]:.6g}", f"{xy[i, 1]:.6g}")
            lines.append(f"{start:.6g},{end:.6g},{ch},{x},{y},{row[i]:.6g}\n")
    _write_text(path, "".join(lines))


def read_topography_csv(path) -> list[dict]:
    with Path(path).open(newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))
