"""Command-line entry point: ``tactile-bci <command> [flags]``.

Exit codes: 0 success, 2 usage or domain error, 1 internal error.
"""
from __future__ import annotations

import argparse
import json
import sys
import traceback
import warnings
from pathlib import Path

from . import io
from .core import DEMO_LABELS, Montage, Recording, TactileBciError
from .dsp import decimate, design_butterworth_bandpass, design_notch, extract_epochs, filtfilt
from .ersp import compute_ersp, export_ersp_csv
from .evaluation import PipelineConfig, cross_validate, summarize
from .features import band_power_topography
from .synth import GeneratorConfig, describe_ground_truth, generate

TASK_WINDOWS = "0:1000,1000:2000,2000:3000,3000:4000,4000:5000"


class UsageError(TactileBciError):
    pass


def _pair(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected START:END (e.g. 500:4500), got {text!r}") from None
    return lo, hi


def _windows(text: str) -> list[tuple[float, float]]:
    try:
        return [_pair(part) for part in text.split(",")]
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(
            f"expected comma-separated START:END windows (e.g. {TASK_WINDOWS}), got {text!r}") from None


def _label_order(labels) -> tuple:
    present = tuple(dict.fromkeys(labels))
    if set(present) <= set(DEMO_LABELS):
        return tuple(lab for lab in DEMO_LABELS if lab in present)
    return present


def cmd_synth(args) -> int:
    if args.config is not None:
        path = Path(args.config)
        if not path.is_file():
            raise UsageError(f"config not found: {path}")
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"config {path} is not valid JSON: {exc.msg}") from None
        if "seed" not in doc and args.seed is None:
            raise UsageError(f"config {path} has no seed; add one or pass --seed")
    else:
        doc = {}
    if args.seed is not None:
        doc["seed"] = args.seed
    doc.setdefault("seed", 0)
    config = GeneratorConfig.from_dict(doc)
    rec, truth = generate(config)
    io.write_recording(rec, args.out)
    truth_path = Path(str(args.out) + ".truth.json")
    truth_path.write_text(describe_ground_truth(truth), encoding="utf-8")
    for p in (*io.recording_paths(args.out), truth_path):
        print(f"wrote {p}")
    return 0


def cmd_preprocess(args) -> int:
    rec = io.read_recording(args.inp)
    fs = rec.sample_rate_hz
    data = rec.data
    if args.notch:
        data = filtfilt(design_notch(args.notch, args.notch_q, fs), data)
    data = filtfilt(design_butterworth_bandpass(args.order, args.band[0], args.band[1], fs), data)
    rec = decimate(Recording(fs, rec.channel_labels, data, rec.events), args.decim)
    labels = tuple(args.labels.split(",")) if args.labels else _label_order(e.label for e in rec.events)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        epochs = extract_epochs(rec, args.epoch, labels)
    io.write_epochs(epochs, args.out)
    print(f"dropped events: {epochs.n_dropped}")
    print(f"trials: {epochs.n_trials}, samples per trial: {epochs.n_samples} at {epochs.sample_rate_hz:g} Hz")
    for p in io.epochs_paths(args.out):
        print(f"wrote {p}")
    return 0


def cmd_evaluate(args) -> int:
    epochs = io.read_epochs(args.epochs)
    config = PipelineConfig(n_per_side=args.csp_per_side, shrinkage=args.shrinkage)
    report = cross_validate(epochs, config, n_folds=args.folds, n_repetitions=args.reps, seed=args.seed)
    if args.report:
        io.write_report(report, args.report)
    sys.stdout.write(summarize(report, args.condition))
    return 0


def _select_label(epochs, label):
    if label is None:
        return epochs
    if label not in epochs.labels:
        raise UsageError(f"label {label!r} not found; available: {', '.join(epochs.label_set)}")
    return epochs.of_class(label)


def cmd_ersp(args) -> int:
    epochs = _select_label(io.read_epochs(args.epochs), args.label)
    try:
        baseline = _pair(args.baseline)
    except argparse.ArgumentTypeError:
        baseline = _select_label(io.read_epochs(args.baseline), args.label)
    freqs = [float(f) for f in range(int(args.fmin), int(args.fmax) + 1)]
    maps = [compute_ersp(epochs, baseline, ch, freqs, args.n_times) for ch in args.channel.split(",")]
    export_ersp_csv(maps, args.out)
    for m in maps:
        if m.flagged_freqs_hz:
            print(f"note: {m.channel}: baseline shorter than one cycle at "
                  f"{', '.join(f'{f:g}' for f in m.flagged_freqs_hz)} Hz", file=sys.stderr)
    print(f"wrote {args.out} ({len(maps)} map(s), {len(maps[0].freqs_hz)} freqs x {len(maps[0].times_ms)} times)")
    return 0


def cmd_topomap(args) -> int:
    epochs = _select_label(io.read_epochs(args.epochs), args.label)
    topo = band_power_topography(epochs, args.band, args.windows, Montage.standard_64()
                                 if set(epochs.channel_labels) <= set(Montage.standard_64().labels) else None)
    io.export_topography_csv(topo, args.out)
    print(f"wrote {args.out} ({len(topo['windows_ms'])} windows x {len(topo['channel_labels'])} channels)")
    return 0


def cmd_demo(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    raw, cls, long = out / "demo", out / "demo_cls", out / "demo_ersp"
    steps = [
        ["synth", "--out", str(raw), "--seed", str(args.seed)],
        ["preprocess", "--in", str(raw), "--band", "1:45", "--notch", "60", "--epoch", "500:4500",
         "--out", str(cls)],
        ["evaluate", "--epochs", str(cls), "--seed", str(args.seed), "--report", str(out / "demo.report.json")],
        ["preprocess", "--in", str(raw), "--band", "1:50", "--notch", "60", "--epoch=-1500:5500",
         "--out", str(long)],
        ["ersp", "--epochs", str(long), "--baseline=-500:0", "--channel", "C3",
         "--out", str(out / "demo_C3.ersp.csv")],
        ["topomap", "--epochs", str(long), "--band", "8:30", "--windows", TASK_WINDOWS,
         "--out", str(out / "demo.topomap.csv")],
    ]
    for step in steps:
        print(f"$ tactile-bci {' '.join(step)}")
        code = main(step)
        if code:
            return code
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tactile-bci", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic recording with ground truth")
    p.add_argument("--config", help="generator config (JSON); defaults when omitted")
    p.add_argument("--out", required=True, help="output file prefix")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", help="notch, bandpass, decimate and epoch a recording")
    p.add_argument("--in", dest="inp", required=True, help="recording prefix")
    p.add_argument("--band", type=_pair, default=(1.0, 45.0), help="bandpass LO:HI in Hz (default 1:45)")
    p.add_argument("--order", type=int, default=3, help="Butterworth prototype order (default 3)")
    p.add_argument("--notch", type=float, default=60.0, help="notch centre in Hz, 0 disables (default 60)")
    p.add_argument("--notch-q", type=float, default=35.0)
    p.add_argument("--decim", type=int, default=1, help="decimation factor (default 1)")
    p.add_argument("--epoch", type=_pair, default=(500.0, 4500.0), help="window START:END in ms")
    p.add_argument("--labels", help="comma-separated label set (default: labels found in the events)")
    p.add_argument("--out", required=True, help="epochs output prefix")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("evaluate", help="repeated stratified k-fold CSP+LDA evaluation")
    p.add_argument("--epochs", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csp-per-side", type=int, default=3)
    p.add_argument("--shrinkage", type=float, default=0.05)
    p.add_argument("--condition", help="condition name printed in the summary")
    p.add_argument("--report", help="report JSON path")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ersp", help="ERSP maps as long-format CSV")
    p.add_argument("--epochs", required=True)
    p.add_argument("--baseline", required=True, help="START:END ms window or a baseline epochs prefix")
    p.add_argument("--channel", default="C3", help="channel label(s), comma-separated")
    p.add_argument("--label", help="restrict to trials of this class")
    p.add_argument("--fmin", type=float, default=1.0)
    p.add_argument("--fmax", type=float, default=30.0)
    p.add_argument("--n-times", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ersp)

    p = sub.add_parser("topomap", help="band power per time window and channel as CSV")
    p.add_argument("--epochs", required=True)
    p.add_argument("--band", type=_pair, default=(8.0, 30.0))
    p.add_argument("--windows", type=_windows, default=_windows(TASK_WINDOWS))
    p.add_argument("--label", help="restrict to trials of this class")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_topomap)

    p = sub.add_parser("demo", help="synth -> preprocess -> evaluate -> ersp -> topomap")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (TactileBciError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception:
        traceback.print_exc()
        return 1


if __name__ == "__main__":
    sys.exit(main())
