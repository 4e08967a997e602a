"""Dataset generation, window labeling, and file I/O.

Directory layout::

    manifest.json
    traces/<id>.f32le            noisy samples, little-endian float32, pA
    traces/<id>.clean.f32le      noiseless companion
    traces/<id>.events.csv       start_s,end_s,duration_ms,amplitude_pA
    windows/<split>.csv          trace_id,window_index,count,avg_amplitude_pA,avg_duration_ms

Sample files are raw binary32 in pA; labels and event tables are UTF-8
CSV; the manifest is JSON written last.
"""

from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import shutil
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import product
from pathlib import Path

import numpy as np

from .assembly import SEED_DERIVATION_ID, Trace, TraceConfig, assemble_trace
from .events import SpikeEvent

SCHEMA_VERSION = 1
GENERATOR_VERSION = "porebench-0.1.0"
WINDOW_SECONDS = 0.5

EVENTS_HEADER = ["start_s", "end_s", "duration_ms", "amplitude_pA"]
WINDOWS_HEADER = ["trace_id", "window_index", "count",
                  "avg_amplitude_pA", "avg_duration_ms"]


class DatasetError(RuntimeError):
    """Raised for invalid dataset layouts or infeasible requests."""


def _default_cnp_values() -> tuple:
    return tuple(np.logspace(math.log10(0.01), math.log10(1.0), 20).tolist())


@dataclass(frozen=True)
class GridSpec:
    """Parameter grid swept by the generator (one SNR per dataset)."""

    dnp_values: tuple = tuple(d * 1e-9 for d in range(3, 18))   # m
    cnp_values: tuple = dataclasses.field(default_factory=_default_cnp_values)  # nmol/L
    duration_values: tuple = (0.5e-3, 1e-3, 1.5e-3, 3e-3, 5e-3)  # s
    snr: float = 4.0

    def __post_init__(self):
        for name, vals in (("dnp_values", self.dnp_values),
                           ("cnp_values", self.cnp_values),
                           ("duration_values", self.duration_values)):
            if len(vals) == 0:
                raise DatasetError(f"{name} must be non-empty")
            if any(b <= a for a, b in zip(vals, vals[1:])):
                raise DatasetError(f"{name} must be strictly increasing")

    def cells(self) -> list[tuple[float, float, float]]:
        """Cartesian product (dnp, cnp, duration) in grid order."""
        return list(product(self.dnp_values, self.cnp_values,
                            self.duration_values))


@dataclass(frozen=True)
class WindowLabel:
    """Ground-truth triple for one 0.5 s window."""

    trace_id: str
    window_index: int
    count: int
    avg_amplitude_pa: float
    avg_duration_ms: float


def segment_windows(trace: Trace, trace_id: str = "trace",
                    window_seconds: float = WINDOW_SECONDS
                    ) -> list[tuple[np.ndarray, WindowLabel]]:
    """Cut a trace into consecutive windows and label each one.

    An event belongs to the window containing its start sample.  A final
    partial window (imported traces only) is dropped with a warning.
    """
    window_samples = round(window_seconds * trace.sample_rate)
    n_windows, remainder = divmod(trace.noisy.size, window_samples)
    if remainder:
        warnings.warn(
            f"trace length {trace.noisy.size} not divisible by window "
            f"({window_samples}); dropping final {remainder} samples",
            stacklevel=2)

    per_window: dict[int, list[SpikeEvent]] = {}
    for event in trace.events:
        idx = round(event.start_time * trace.sample_rate)
        w = idx // window_samples
        if w < n_windows:
            per_window.setdefault(w, []).append(event)

    out = []
    for w in range(n_windows):
        evs = per_window.get(w, [])
        if evs:
            label = WindowLabel(
                trace_id, w, len(evs),
                float(np.mean([e.amplitude for e in evs])) * 1e12,
                float(np.mean([e.duration for e in evs])) * 1e3)
        else:
            label = WindowLabel(trace_id, w, 0, 0.0, 0.0)
        samples = trace.noisy[w * window_samples:(w + 1) * window_samples]
        out.append((samples, label))
    return out


# ---------------------------------------------------------------------------
# file primitives

def write_samples(path: Path, samples_a: np.ndarray) -> None:
    """Write current samples (ampere) as little-endian float32 pA."""
    (np.asarray(samples_a) * 1e12).astype("<f4").tofile(path)


def read_samples(path: Path) -> np.ndarray:
    """Read a .f32le file back to float64 ampere."""
    return np.fromfile(path, dtype="<f4").astype(float) * 1e-12


def write_events_csv(path: Path, events: list[SpikeEvent]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(EVENTS_HEADER)
        for e in events:
            writer.writerow([repr(e.start_time),
                             repr(e.start_time + e.duration),
                             repr(e.duration * 1e3),
                             repr(e.amplitude * 1e12)])


def read_events_csv(path: Path) -> list[dict]:
    with open(path, newline="", encoding="utf-8") as fh:
        return [{k: float(v) for k, v in row.items()}
                for row in csv.DictReader(fh)]


def write_windows_csv(path: Path, labels: list[WindowLabel]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(WINDOWS_HEADER)
        for lab in labels:
            writer.writerow([lab.trace_id, lab.window_index, lab.count,
                             repr(lab.avg_amplitude_pa),
                             repr(lab.avg_duration_ms)])


def read_windows_csv(path: Path) -> list[dict]:
    """Read a window CSV (labels or predictions) into plain dicts."""
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            rows.append({
                "trace_id": row["trace_id"],
                "window_index": int(row["window_index"]),
                "count": int(round(float(row["count"]))),
                "avg_amplitude_pA": float(row["avg_amplitude_pA"]),
                "avg_duration_ms": float(row["avg_duration_ms"]),
            })
    return rows


# ---------------------------------------------------------------------------
# dataset generation

@dataclass(frozen=True)
class TraceSpec:
    """One planned trace: grid cell, split, and global index (seed input)."""

    index: int
    trace_id: str
    split: str
    dnp: float
    cnp: float
    duration: float


def plan_traces(grid: GridSpec, split_windows: dict[str, int],
                windows_per_trace: int) -> list[TraceSpec]:
    """Allocate whole traces round-robin over grid cells, split by split."""
    cells = grid.cells()
    specs: list[TraceSpec] = []
    index = 0
    for split, n_windows in split_windows.items():
        n_traces, rem = divmod(n_windows, windows_per_trace)
        if rem:
            raise DatasetError(
                f"split '{split}' wants {n_windows} windows, not a multiple "
                f"of {windows_per_trace} windows per trace")
        for i in range(n_traces):
            dnp, cnp, dur = cells[i % len(cells)]
            specs.append(TraceSpec(index, f"t{index:06d}", split,
                                   dnp, cnp, dur))
            index += 1
    return specs


def _generate_one(args) -> list[WindowLabel]:
    """Worker: build one trace, write its files, return window labels."""
    spec, base, master_seed, out_dir = args
    config = dataclasses.replace(base, sphere_diameter=spec.dnp,
                                 concentration=spec.cnp,
                                 event_duration=spec.duration)
    trace = assemble_trace(config, master_seed, spec.index)
    traces_dir = Path(out_dir) / "traces"
    write_samples(traces_dir / f"{spec.trace_id}.f32le", trace.noisy)
    write_samples(traces_dir / f"{spec.trace_id}.clean.f32le", trace.clean)
    write_events_csv(traces_dir / f"{spec.trace_id}.events.csv", trace.events)
    return [label for _, label in segment_windows(trace, spec.trace_id)]


def generate_dataset(grid: GridSpec, master_seed: int, out_dir,
                     split_windows: dict[str, int] | None = None,
                     base_config: TraceConfig | None = None,
                     threads: int = 1) -> dict:
    """Generate the full dataset and return the manifest dict.

    Fully deterministic for a fixed master seed, regardless of thread
    count: every trace depends only on (master_seed, trace_index).
    """
    if split_windows is None:
        split_windows = {"train": 60_000, "val": 30_000, "test": 30_000}
    base = base_config or TraceConfig(snr=grid.snr)
    if base.snr != grid.snr:
        base = dataclasses.replace(base, snr=grid.snr)

    windows_per_trace = round(base.trace_seconds / WINDOW_SECONDS)
    specs = plan_traces(grid, split_windows, windows_per_trace)

    out_dir = Path(out_dir)
    (out_dir / "traces").mkdir(parents=True, exist_ok=True)
    (out_dir / "windows").mkdir(parents=True, exist_ok=True)

    jobs = [(spec, base, master_seed, str(out_dir)) for spec in specs]
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            all_labels = list(pool.map(_generate_one, jobs, chunksize=4))
    else:
        all_labels = [_generate_one(job) for job in jobs]

    for split in split_windows:
        labels = [lab for spec, labs in zip(specs, all_labels)
                  if spec.split == split for lab in labs]
        write_windows_csv(out_dir / "windows" / f"{split}.csv", labels)

    manifest = {
        "schema_version": SCHEMA_VERSION,
        "generator_version": GENERATOR_VERSION,
        "master_seed": master_seed,
        "seed_derivation": SEED_DERIVATION_ID,
        "sample_rate": base.sample_rate,
        "window_seconds": WINDOW_SECONDS,
        "windows_per_trace": windows_per_trace,
        "trace_seconds": base.trace_seconds,
        "snr": grid.snr,
        "open_pore_current_pA": _nominal_i0_pa(base),
        "grid": {
            "dnp_m": list(grid.dnp_values),
            "cnp_nM": list(grid.cnp_values),
            "duration_s": list(grid.duration_values),
            "snr": grid.snr,
        },
        "splits": {split: {"windows": n,
                           "traces": n // windows_per_trace}
                   for split, n in split_windows.items()},
        "traces": [{"id": s.trace_id, "index": s.index, "split": s.split,
                    "dnp_m": s.dnp, "cnp_nM": s.cnp, "duration_s": s.duration}
                   for s in specs],
    }
    write_manifest(out_dir / "manifest.json", manifest)
    return manifest


def _nominal_i0_pa(config: TraceConfig) -> float:
    from .physics import open_pore_current
    return open_pore_current(config.geometry, config.electrolyte,
                             config.bias,
                             config.constants).open_pore_current * 1e12


def write_manifest(path: Path, manifest: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_manifest(dataset_dir) -> dict:
    path = Path(dataset_dir) / "manifest.json"
    if not path.exists():
        raise FileNotFoundError(f"no manifest.json in {dataset_dir}")
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# public database export

def export_database(dataset_dir, db_dir) -> dict:
    """Copy a dataset into the public per-trace layout; idempotent."""
    dataset_dir = Path(dataset_dir)
    db_dir = Path(db_dir)
    manifest = read_manifest(dataset_dir)
    db_dir.mkdir(parents=True, exist_ok=True)
    index = {"schema_version": SCHEMA_VERSION, "traces": []}
    for rec in manifest["traces"]:
        tid = rec["id"]
        tdir = db_dir / tid
        tdir.mkdir(exist_ok=True)
        src = dataset_dir / "traces"
        shutil.copyfile(src / f"{tid}.f32le", tdir / "noisy.f32le")
        shutil.copyfile(src / f"{tid}.clean.f32le", tdir / "clean.f32le")
        shutil.copyfile(src / f"{tid}.events.csv", tdir / "events.csv")
        conditions = {
            "sample_rate": manifest["sample_rate"],
            "snr": manifest["snr"],
            "dnp_m": rec["dnp_m"],
            "cnp_nM": rec["cnp_nM"],
            "duration_s": rec["duration_s"],
            "trace_seconds": manifest["trace_seconds"],
        }
        with open(tdir / "conditions.json", "w", encoding="utf-8") as fh:
            json.dump(conditions, fh, indent=2, sort_keys=True)
            fh.write("\n")
        index["traces"].append(tid)
    with open(db_dir / "index.json", "w", encoding="utf-8") as fh:
        json.dump(index, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return {"traces": len(index["traces"]), "dir": str(db_dir)}


# ---------------------------------------------------------------------------
# external trace import

class TraceParseError(ValueError):
    """Raised for malformed external trace files."""


def import_external_trace(path, sample_rate: float,
                          fmt: str = "f32le") -> Trace:
    """Load an external current trace (pA) and resample it to 10 kHz.

    No ground truth is attached; provenance marks the trace external.
    """
    if sample_rate <= 0:
        raise ValueError("sample_rate must be > 0")
    path = Path(path)
    if fmt == "f32le":
        samples = np.fromfile(path, dtype="<f4").astype(float)
    elif fmt == "csv":
        samples = _read_csv_samples(path)
    else:
        raise ValueError(f"unknown format {fmt!r}")

    bad = np.flatnonzero(~np.isfinite(samples))
    if bad.size:
        raise TraceParseError(
            f"{path}: non-finite sample at index {int(bad[0])}")

    target_rate = 10_000.0
    if sample_rate != target_rate:
        t_src = np.arange(samples.size) / sample_rate
        n_out = int(math.floor(t_src[-1] * target_rate)) + 1
        t_out = np.arange(n_out) / target_rate
        samples = np.interp(t_out, t_src, samples)

    return Trace(sample_rate=target_rate, noisy=samples * 1e-12,
                 clean=samples * 1e-12, events=[],
                 provenance={"source": "external", "path": str(path),
                             "original_sample_rate": sample_rate})


def _read_csv_samples(path: Path) -> np.ndarray:
    values = []
    with open(path, newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            try:
                values.append(float(row[0]))
            except ValueError:
                raise TraceParseError(
                    f"{path}: non-numeric value {row[0]!r} at row {lineno}")
    return np.array(values, dtype=float)
