"""Dataset generation, window labeling, file round-trips, import/export."""

import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from porebench import assembly as asm
from porebench import dataset as ds
from porebench.events import SpikeEvent

MINI_GRID = ds.GridSpec(dnp_values=(8e-9, 12e-9), cnp_values=(0.1, 0.5),
                        duration_values=(1e-3, 3e-3), snr=4.0)
MINI_SPLITS = {"train": 8, "val": 4, "test": 4}
BASE = asm.TraceConfig(snr=4.0, trace_seconds=2.0)


@pytest.fixture(scope="module")
def mini_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("mini")
    manifest = ds.generate_dataset(MINI_GRID, 2024, out, MINI_SPLITS, BASE)
    return out, manifest


def tree_digest(root: Path) -> dict:
    digest = {}
    for path in sorted(root.rglob("*")):
        if path.is_file():
            digest[str(path.relative_to(root))] = hashlib.sha256(
                path.read_bytes()).hexdigest()
    return digest


class TestSegmentWindows:
    def test_zero_events_all_zero_labels(self):
        trace = asm.Trace(10_000.0, np.zeros(20_000), np.zeros(20_000), [])
        labels = [lab for _, lab in ds.segment_windows(trace, "t")]
        assert len(labels) == 4
        assert all(l.count == 0 and l.avg_amplitude_pa == 0.0
                   and l.avg_duration_ms == 0.0 for l in labels)

    def test_arithmetic_mean_labels(self):
        evs = [SpikeEvent(0.01, 1e-3, 100e-12, 1e-9),
               SpikeEvent(0.02, 3e-3, 200e-12, 1e-9)]
        trace = asm.Trace(10_000.0, np.zeros(5_000), np.zeros(5_000), evs)
        (_, label), = ds.segment_windows(trace, "t")
        assert label.count == 2
        assert label.avg_amplitude_pa == pytest.approx(150.0)
        assert label.avg_duration_ms == pytest.approx(2.0)

    def test_window_count(self):
        trace = asm.Trace(10_000.0, np.zeros(100_000), np.zeros(100_000), [])
        assert len(ds.segment_windows(trace, "t")) == 20

    def test_partial_window_dropped_with_warning(self):
        trace = asm.Trace(10_000.0, np.zeros(5_100), np.zeros(5_100), [])
        with pytest.warns(UserWarning, match="dropping"):
            windows = ds.segment_windows(trace, "t")
        assert len(windows) == 1

    def test_boundary_attribution_by_start(self):
        # event starting in window 0 but ending in window 1 counts in 0
        evs = [SpikeEvent(0.4999, 3e-3, 100e-12, 1e-9)]
        trace = asm.Trace(10_000.0, np.zeros(10_000), np.zeros(10_000), evs)
        labels = [lab for _, lab in ds.segment_windows(trace, "t")]
        assert labels[0].count == 1
        assert labels[1].count == 0


class TestGeneration:
    def test_grid_coverage(self, mini_dataset):
        _, manifest = mini_dataset
        cells = {(t["dnp_m"], t["cnp_nM"], t["duration_s"])
                 for t in manifest["traces"]}
        assert cells == set(MINI_GRID.cells())

    def test_split_allocation(self, mini_dataset):
        _, manifest = mini_dataset
        assert manifest["splits"]["train"]["traces"] == 2
        assert manifest["splits"]["val"]["traces"] == 1
        assert manifest["windows_per_trace"] == 4

    def test_default_grid_is_1500_cells(self):
        assert len(ds.GridSpec().cells()) == 1500

    def test_infeasible_split_rejected(self):
        with pytest.raises(ds.DatasetError, match="multiple"):
            ds.plan_traces(MINI_GRID, {"train": 7}, 4)

    def test_label_consistency(self, mini_dataset):
        out, manifest = mini_dataset
        fs = manifest["sample_rate"]
        wsamp = round(manifest["window_seconds"] * fs)
        for split in MINI_SPLITS:
            labels = ds.read_windows_csv(out / "windows" / f"{split}.csv")
            by_trace = {}
            for row in labels:
                by_trace.setdefault(row["trace_id"], []).append(row)
            for tid, rows in by_trace.items():
                events = ds.read_events_csv(out / "traces"
                                            / f"{tid}.events.csv")
                for row in rows:
                    w = row["window_index"]
                    evs = [e for e in events
                           if round(e["start_s"] * fs) // wsamp == w]
                    assert row["count"] == len(evs)
                    if evs:
                        amp = np.mean([e["amplitude_pA"] for e in evs])
                        dur = np.mean([e["duration_ms"] for e in evs])
                        assert row["avg_amplitude_pA"] == pytest.approx(
                            amp, rel=1e-9)
                        assert row["avg_duration_ms"] == pytest.approx(
                            dur, rel=1e-9)

    def test_sample_round_trip_float32(self, mini_dataset, tmp_path):
        out, manifest = mini_dataset
        tid = manifest["traces"][0]["id"]
        samples = ds.read_samples(out / "traces" / f"{tid}.f32le")
        ds.write_samples(tmp_path / "copy.f32le", samples)
        again = ds.read_samples(tmp_path / "copy.f32le")
        assert np.array_equal(samples, again)

    def test_determinism_and_thread_independence(self, mini_dataset,
                                                 tmp_path):
        out, _ = mini_dataset
        serial = tree_digest(out)
        redo = tmp_path / "redo"
        ds.generate_dataset(MINI_GRID, 2024, redo, MINI_SPLITS, BASE,
                            threads=3)
        assert tree_digest(redo) == serial

    def test_different_seed_differs(self, mini_dataset, tmp_path):
        out, _ = mini_dataset
        other = tmp_path / "other"
        ds.generate_dataset(MINI_GRID, 2025, other, MINI_SPLITS, BASE)
        assert tree_digest(other) != tree_digest(out)


class TestExport:
    def test_layout_and_idempotence(self, mini_dataset, tmp_path):
        out, manifest = mini_dataset
        db = tmp_path / "db"
        ds.export_database(out, db)
        tid = manifest["traces"][0]["id"]
        for name in ("noisy.f32le", "clean.f32le", "events.csv",
                     "conditions.json"):
            assert (db / tid / name).exists()
        index = json.loads((db / "index.json").read_text())
        assert len(index["traces"]) == len(manifest["traces"])
        first = tree_digest(db)
        ds.export_database(out, db)
        assert tree_digest(db) == first

    def test_events_header_order(self, mini_dataset):
        out, manifest = mini_dataset
        tid = manifest["traces"][0]["id"]
        header = (out / "traces" / f"{tid}.events.csv").read_text().splitlines()[0]
        assert header == "start_s,end_s,duration_ms,amplitude_pA"


class TestImport:
    def test_decimation_preserves_shared_instants(self, tmp_path):
        rng = np.random.default_rng(0)
        samples = rng.normal(size=2_000)
        path = tmp_path / "ext.f32le"
        samples.astype("<f4").tofile(path)
        trace = ds.import_external_trace(path, 20_000.0, "f32le")
        assert trace.noisy.size == 1_000
        want = samples.astype("<f4").astype(float)[::2] * 1e-12
        assert trace.noisy == pytest.approx(want, rel=1e-6)
        assert trace.events == []
        assert trace.provenance["source"] == "external"

    def test_constant_fixed_point(self, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("\n".join(["5.0"] * 100))
        trace = ds.import_external_trace(path, 20_000.0, "csv")
        assert np.all(trace.noisy == 5.0e-12)

    def test_csv_parse_error_names_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("1.0\n2.0\nnot-a-number\n")
        with pytest.raises(ds.TraceParseError, match="row 3"):
            ds.import_external_trace(path, 10_000.0, "csv")

    def test_nonfinite_rejected_with_index(self, tmp_path):
        samples = np.array([1.0, 2.0, np.nan, 4.0], dtype="<f4")
        path = tmp_path / "nan.f32le"
        samples.tofile(path)
        with pytest.raises(ds.TraceParseError, match="index 2"):
            ds.import_external_trace(path, 10_000.0, "f32le")

    def test_no_resample_at_10khz(self, tmp_path):
        samples = np.arange(100, dtype="<f4")
        path = tmp_path / "same.f32le"
        samples.tofile(path)
        trace = ds.import_external_trace(path, 10_000.0, "f32le")
        assert trace.noisy == pytest.approx(np.arange(100) * 1e-12)
