"""porebench command line: generate, segment, detect, evaluate, psd,
import, manifest.

Exit codes: 0 success, 2 argument error, 3 I/O error, 4 validation
failure.  Errors print one machine-parsable line to stderr:
``porebench: error code=N msg=...``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import assembly, dataset, detector, evaluation, noise, physics

log = logging.getLogger("porebench")

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_IO = 3
EXIT_VALIDATION = 4


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _configure_logging() -> None:
    level = os.environ.get("POREBENCH_LOG", "info").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="porebench",
        description="Nanopore translocation trace synthesizer and benchmark")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a labeled dataset")
    p.add_argument("--snr", type=float, required=True,
                   help="signal-to-noise ratio (dimensionless)")
    p.add_argument("--seed", type=int, required=True,
                   help="master seed (mandatory; no wall-clock default)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--dnp", type=_floats, default=None,
                   help="sphere diameters, nm (comma list; default 3..17)")
    p.add_argument("--cnp", type=_floats, default=None,
                   help="concentrations, nmol/L (comma list; default 20 "
                        "log-spaced in [0.01, 1])")
    p.add_argument("--durations", type=_floats, default=None,
                   help="event durations, ms (comma list; default "
                        "0.5,1,1.5,3,5)")
    p.add_argument("--windows", type=_floats, default=[60000, 30000, 30000],
                   help="train,val,test window counts "
                        "(default 60000,30000,30000)")
    p.add_argument("--trace-seconds", type=float, default=10.0,
                   help="trace length, s (default 10)")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="parallel workers (output independent of N)")

    p = sub.add_parser("segment", help="cut a trace file into 0.5 s windows")
    p.add_argument("--in", dest="infile", required=True,
                   help="input trace (.f32le, pA)")
    p.add_argument("--sample-rate", type=float, default=10_000.0,
                   help="input sample rate, Hz")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("detect", help="run the prominence-threshold detector")
    p.add_argument("--in", dest="indir", required=True,
                   help="dataset directory")
    p.add_argument("--multiple", type=float, required=True,
                   help="threshold in noise-RMS multiples (4..25 in use)")
    p.add_argument("--rms", choices=["clean", "estimate"], default="estimate",
                   help="noise RMS source: oracle (noisy - clean) or robust "
                        "estimate")
    p.add_argument("--split", default="test",
                   help="which split's traces to process (default test)")
    p.add_argument("--out", required=True, help="prediction CSV path")

    p = sub.add_parser("evaluate", help="score predictions against labels")
    p.add_argument("--labels", required=True, help="ground-truth window CSV")
    p.add_argument("--pred", required=True, help="prediction window CSV")
    p.add_argument("--manifest", default=None,
                   help="manifest.json (default: inferred from labels path)")
    p.add_argument("--out", required=True, help="report JSON path")

    p = sub.add_parser("psd", help="emit the noise PSD model as CSV")
    p.add_argument("--snr", type=float, default=None,
                   help="optional SNR; scales the model for the default "
                        "10 nm sphere amplitude")
    p.add_argument("--welch", action="store_true",
                   help="also emit a Welch estimate of a realization")
    p.add_argument("--seed", type=int, default=None,
                   help="seed for the realization (required with --welch)")
    p.add_argument("--out", required=True, help="output CSV path")

    p = sub.add_parser("import", help="import an external trace (pA)")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--format", choices=["f32le", "csv"], default="f32le")
    p.add_argument("--sample-rate", type=float, required=True,
                   help="input sample rate, Hz")
    p.add_argument("--out", required=True,
                   help="output .f32le resampled to 10 kHz")

    p = sub.add_parser("manifest", help="summarize a dataset manifest")
    p.add_argument("dir", help="dataset directory")
    p.add_argument("--json", action="store_true", dest="as_json",
                   help="byte-stable JSON output")
    return parser


def cmd_generate(args) -> int:
    kwargs = {"snr": args.snr}
    if args.dnp is not None:
        kwargs["dnp_values"] = tuple(v * 1e-9 for v in args.dnp)
    if args.cnp is not None:
        kwargs["cnp_values"] = tuple(args.cnp)
    if args.durations is not None:
        kwargs["duration_values"] = tuple(v * 1e-3 for v in args.durations)
    if args.snr <= 0:
        raise CliError(EXIT_ARGS, "--snr must be > 0")
    if len(args.windows) != 3:
        raise CliError(EXIT_ARGS, "--windows needs train,val,test")
    try:
        grid = dataset.GridSpec(**kwargs)
        splits = {"train": int(args.windows[0]), "val": int(args.windows[1]),
                  "test": int(args.windows[2])}
        base = assembly.TraceConfig(snr=args.snr,
                                    trace_seconds=args.trace_seconds)
        manifest = dataset.generate_dataset(grid, args.seed, args.out,
                                            splits, base,
                                            threads=args.threads)
    except dataset.DatasetError as exc:
        raise CliError(EXIT_VALIDATION, str(exc))
    log.info("generated %d traces into %s", len(manifest["traces"]), args.out)
    return EXIT_OK


def cmd_segment(args) -> int:
    trace = dataset.import_external_trace(args.infile, args.sample_rate,
                                          "f32le")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    windows = dataset.segment_windows(trace, Path(args.infile).stem)
    for samples, label in windows:
        dataset.write_samples(
            out / f"{label.trace_id}.w{label.window_index:04d}.f32le",
            samples)
    log.info("wrote %d windows to %s", len(windows), out)
    return EXIT_OK


def cmd_detect(args) -> int:
    if args.multiple <= 0:
        raise CliError(EXIT_ARGS, "--multiple must be > 0")
    indir = Path(args.indir)
    manifest = dataset.read_manifest(indir)
    trace_recs = [t for t in manifest["traces"]
                  if args.split in ("all", t["split"])]
    if not trace_recs:
        raise CliError(EXIT_VALIDATION,
                       f"no traces in split {args.split!r}")
    sample_rate = manifest["sample_rate"]
    window_samples = round(manifest["window_seconds"] * sample_rate)
    config = detector.DetectorConfig(
        threshold_multiple=args.multiple,
        rms_source="oracle" if args.rms == "clean" else "estimated")
    rows = []
    for rec in trace_recs:
        noisy = dataset.read_samples(indir / "traces" / f"{rec['id']}.f32le")
        if config.rms_source == "oracle":
            clean = dataset.read_samples(
                indir / "traces" / f"{rec['id']}.clean.f32le")
            rms = float(np.sqrt(np.mean((noisy - clean) ** 2)))
        else:
            rms = detector.estimate_noise_rms(noisy)
        dets = detector.detect_events(noisy, rms, config, sample_rate)
        n_windows = noisy.size // window_samples
        rows.extend(detector.aggregate_windows(
            dets, n_windows, window_samples, rec["id"],
            amplitude_unit=1e12))
    _write_pred_csv(args.out, rows)
    log.info("wrote %d window predictions to %s", len(rows), args.out)
    return EXIT_OK


def _write_pred_csv(path, rows: list[dict]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.WINDOWS_HEADER)
        for r in rows:
            writer.writerow([r["trace_id"], r["window_index"], r["count"],
                             repr(r["avg_amplitude_pA"]),
                             repr(r["avg_duration_ms"])])


def cmd_evaluate(args) -> int:
    labels = dataset.read_windows_csv(Path(args.labels))
    preds = dataset.read_windows_csv(Path(args.pred))
    manifest_path = (Path(args.manifest) if args.manifest
                     else Path(args.labels).parent.parent / "manifest.json")
    if not manifest_path.exists():
        raise CliError(EXIT_IO, f"manifest not found at {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_VALIDATION,
                           f"corrupt manifest: {exc}")
    try:
        records = evaluation.score_predictions(preds, labels)
        report = evaluation.aggregate(records, manifest)
    except evaluation.EvaluationError as exc:
        raise CliError(EXIT_VALIDATION, str(exc))
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for feature in evaluation.FEATURES:
        log.info("total %s error: mean=%.4g std=%.4g", feature,
                 report["totals"][feature]["mean"],
                 report["totals"][feature]["std"])
    return EXIT_OK


def cmd_psd(args) -> int:
    if args.welch and args.seed is None:
        raise CliError(EXIT_ARGS, "--welch requires --seed")
    pore = physics.open_pore_current(physics.PoreGeometry(),
                                     physics.ElectrolyteConfig(),
                                     physics.BiasConfig())
    n_c = noise.carrier_count(physics.PoreGeometry(), 100.0)
    model = noise.NoisePsdModel(params=noise.NoiseParams(),
                                open_pore_current=pore.open_pore_current,
                                resistance=pore.resistance, carrier_count=n_c)
    if args.snr:
        amplitude = physics.blockage_amplitude(pore.open_pore_current,
                                               10e-9, 20e-9)
        rms = noise.model_rms(model, 0.1)
        model = noise.NoisePsdModel(
            params=model.params, open_pore_current=model.open_pore_current,
            resistance=model.resistance, carrier_count=model.carrier_count,
            scale=noise.snr_scale_factor(amplitude, args.snr, rms))
    header = ["f_hz", "s_i_a2_per_hz"]
    if args.welch:
        from scipy import signal as sps
        rng = assembly.derive_rng(args.seed, 0, assembly.STREAM_NOISE)
        samples = noise.synthesize_colored_noise(model, 1_000_000, 10_000.0,
                                                 rng)
        freqs, pxx = sps.welch(samples, fs=10_000.0, nperseg=8192)
        keep = freqs > 0
        freqs, pxx = freqs[keep], pxx[keep]
        model_vals = model.scale ** 2 * noise.psd_total(freqs, model)
        header.append("welch_a2_per_hz")
        rows = zip(freqs, model_vals, pxx)
    else:
        freqs = np.logspace(0, np.log10(model.bandwidth), 200)
        rows = zip(freqs, model.scale ** 2 * noise.psd_total(freqs, model))
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(float(v)) for v in row])
    return EXIT_OK


def cmd_import(args) -> int:
    try:
        trace = dataset.import_external_trace(args.infile, args.sample_rate,
                                              args.format)
    except dataset.TraceParseError as exc:
        raise CliError(EXIT_VALIDATION, str(exc))
    dataset.write_samples(Path(args.out), trace.noisy)
    log.info("imported %d samples at 10 kHz to %s", trace.noisy.size,
             args.out)
    return EXIT_OK


def cmd_manifest(args) -> int:
    path = Path(args.dir) / "manifest.json"
    if not path.exists():
        raise CliError(EXIT_IO, f"no manifest.json in {args.dir}")
    with open(path, encoding="utf-8") as fh:
        try:
            manifest = json.load(fh)
        except json.JSONDecodeError as exc:
            raise CliError(EXIT_VALIDATION,
                           f"corrupt manifest at line {exc.lineno}: "
                           f"{exc.msg}")
    if args.as_json:
        summary = {k: manifest[k] for k in sorted(manifest) if k != "traces"}
        summary["n_traces"] = len(manifest["traces"])
        print(json.dumps(summary, indent=2, sort_keys=True))
    else:
        grid = manifest["grid"]
        print(f"snr={manifest['snr']} master_seed={manifest['master_seed']} "
              f"generator={manifest['generator_version']}")
        print(f"grid: {len(grid['dnp_m'])} diameters x "
              f"{len(grid['cnp_nM'])} concentrations x "
              f"{len(grid['duration_s'])} durations")
        for split, info in manifest["splits"].items():
            print(f"{split}: {info['windows']} windows "
                  f"({info['traces']} traces)")
    return EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "segment": cmd_segment,
    "detect": cmd_detect,
    "evaluate": cmd_evaluate,
    "psd": cmd_psd,
    "import": cmd_import,
    "manifest": cmd_manifest,
}


def run(argv: list[str]) -> int:
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ARGS if exc.code not in (0, None) else EXIT_OK
    log.debug("resolved config: %s", vars(args))
    try:
        return COMMANDS[args.command](args)
    except CliError as exc:
        print(f"porebench: error code={exc.code} msg={exc}", file=sys.stderr)
        return exc.code
    except FileNotFoundError as exc:
        print(f"porebench: error code={EXIT_IO} msg={exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"porebench: error code={EXIT_IO} msg={exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError) as exc:
        print(f"porebench: error code={EXIT_VALIDATION} msg={exc}",
              file=sys.stderr)
        return EXIT_VALIDATION


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
