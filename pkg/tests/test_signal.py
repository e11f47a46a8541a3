"""Tests for signals, datasets, ingestion, segmentation and MUAP synthesis."""

import json

import numpy as np
import pytest
from scipy.io import wavfile

from downsample_audit.core.metrics import peak_count
from downsample_audit.core.signal import (
    LabeledDataset, MuapSpec, Signal, imbalance_factor, load_dataset, muap_wavelet,
    segment, segment_dataset, synth_dataset, synth_muap_signal, write_dataset,
)
from downsample_audit.utils.errors import (
    ConfigError, DataError, EmptyResultError, FormatError, IngestionError,
)


class TestSignal:
    def test_rejects_empty_values(self):
        with pytest.raises(DataError):
            Signal([], 100.0)

    def test_rejects_non_positive_rate(self):
        with pytest.raises(DataError):
            Signal([1.0, 2.0], 0.0)

    def test_source_indices_must_increase(self):
        with pytest.raises(DataError):
            Signal([1.0, 2.0, 3.0], 10.0, source_indices=[0, 2, 2], parent_length=5)

    def test_source_indices_within_parent(self):
        with pytest.raises(DataError):
            Signal([1.0, 2.0], 10.0, source_indices=[0, 5], parent_length=5)

    def test_values_are_read_only(self):
        sig = Signal([1.0, 2.0], 10.0)
        with pytest.raises(ValueError):
            sig.values[0] = 5.0

    def test_positions_from_decimation_factor(self):
        sig = Signal([1.0, 2.0, 3.0], 10.0, decimation_factor=4, parent_length=12)
        assert sig.positions().tolist() == [0.0, 4.0, 8.0]
        assert sig.is_downsampled


class TestLabeledDataset:
    def test_class_names_default_to_sorted_labels(self):
        ds = LabeledDataset([Signal([1.0], 5.0)] * 3, ['b', 'a', 'b'])
        assert ds.class_names == ('a', 'b')
        assert ds.class_counts() == {'a': 1, 'b': 2}

    def test_label_count_mismatch(self):
        with pytest.raises(DataError):
            LabeledDataset([Signal([1.0], 5.0)], ['a', 'b'])

    def test_mixed_rates_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset([Signal([1.0], 5.0), Signal([1.0], 6.0)], ['a', 'b'])

    def test_unknown_label_rejected(self):
        with pytest.raises(DataError):
            LabeledDataset([Signal([1.0], 5.0)], ['c'], class_names=('a', 'b'))


class TestIngestion:
    def test_csv_three_rows(self, tmp_path):
        path = tmp_path / 'signals.csv'
        path.write_text("A,1,2,3,4\nB,5,6,7,8\nA,0,0,1,1\n")
        ds = load_dataset(path, 'csv', sample_rate_hz=100.0)
        assert len(ds) == 3
        assert ds.class_names == ('A', 'B')
        assert all(len(s) == 4 for s in ds.signals)
        assert ds.signals[1].values.tolist() == [5.0, 6.0, 7.0, 8.0]

    def test_csv_nan_names_row_and_column(self, tmp_path):
        path = tmp_path / 'signals.csv'
        path.write_text("A,1,2,3\nB,4,NaN,6\n")
        with pytest.raises(DataError, match=r"row 2, column 3"):
            load_dataset(path, 'csv', sample_rate_hz=100.0)

    def test_csv_empty_cell_names_row_and_column(self, tmp_path):
        path = tmp_path / 'signals.csv'
        path.write_text("A,1,2,3\nB,4,,6\n")
        with pytest.raises(DataError, match=r"empty sample at row 2, column 3"):
            load_dataset(path, 'csv', sample_rate_hz=100.0)

    def test_csv_trailing_blanks_are_padding(self, tmp_path):
        path = tmp_path / 'signals.csv'
        path.write_text("A,1,2,3,4\nB,5,6,,\n")
        ds = load_dataset(path, 'csv', sample_rate_hz=100.0)
        assert [len(s) for s in ds.signals] == [4, 2]

    def test_csv_without_rate_is_format_error(self, tmp_path):
        path = tmp_path / 'signals.csv'
        path.write_text("A,1,2,3\n")
        with pytest.raises(FormatError):
            load_dataset(path, 'csv')

    def test_raw_f64le_preserves_samples(self, tmp_path, rng):
        values = rng.standard_normal(262124)
        (tmp_path / 'rec.f64').write_bytes(values.astype('<f8').tobytes())
        (tmp_path / 'manifest.json').write_text(json.dumps({
            'format': 'raw-f64le', 'sample_rate_hz': 23437.5,
            'files': [{'path': 'rec.f64', 'label': 'control'}],
        }))
        ds = load_dataset(tmp_path, 'raw-f64le')
        assert len(ds) == 1
        sig = ds.signals[0]
        assert len(sig) == 262124
        assert sig.sample_rate_hz == 23437.5
        assert sig.values.astype('<f8').tobytes() == values.astype('<f8').tobytes()

    def test_wav_pcm16_is_scaled(self, tmp_path):
        data = np.array([0, 16384, -32768, 32767], dtype=np.int16)
        wavfile.write(tmp_path / 'a.wav', 8000, data)
        (tmp_path / 'manifest.json').write_text(json.dumps({
            'format': 'wav-pcm16', 'files': [{'path': 'a.wav', 'label': 'x'}],
        }))
        ds = load_dataset(tmp_path, 'wav-pcm16')
        assert ds.signals[0].values.tolist() == [0.0, 0.5, -1.0, 32767 / 32768]
        assert ds.sample_rate_hz == 8000.0

    def test_missing_label_is_ingestion_error(self, tmp_path):
        (tmp_path / 'rec.f64').write_bytes(np.zeros(4).tobytes())
        (tmp_path / 'manifest.json').write_text(json.dumps({
            'sample_rate_hz': 10.0, 'files': [{'path': 'rec.f64'}],
        }))
        with pytest.raises(IngestionError):
            load_dataset(tmp_path, 'raw-f64le')

    def test_malformed_manifest_is_format_error(self, tmp_path):
        (tmp_path / 'manifest.json').write_text("{not json")
        with pytest.raises(FormatError):
            load_dataset(tmp_path, 'raw-f64le')

    def test_unknown_format(self, tmp_path):
        with pytest.raises(ConfigError):
            load_dataset(tmp_path, 'flac')

    def test_write_then_load_raw(self, tmp_path, separable_dataset):
        write_dataset(separable_dataset, tmp_path / 'out', 'raw-f64le')
        loaded = load_dataset(tmp_path / 'out', 'raw-f64le')
        assert loaded.labels == separable_dataset.labels
        for a, b in zip(loaded.signals, separable_dataset.signals):
            assert np.array_equal(a.values, b.values)

    def test_write_csv_with_provenance(self, tmp_path, separable_dataset):
        written = write_dataset(separable_dataset, tmp_path / 'out', 'csv',
                                provenance={'algorithm': 'LTTB', 'factor': 1})
        assert (tmp_path / 'out' / 'downsample.json') in written
        loaded = load_dataset(tmp_path / 'out' / 'signals.csv', 'csv')
        assert len(loaded) == len(separable_dataset)
        assert np.array_equal(loaded.signals[0].values, separable_dataset.signals[0].values)


class TestSegmentation:
    def test_recording_into_two_second_segments(self):
        sig = Signal(np.zeros(262124), 23437.5)
        pieces = segment(sig, 2.0)
        assert len(pieces) == 5
        assert all(len(p) == 46875 for p in pieces)
        assert all(p.sample_rate_hz == 23437.5 for p in pieces)

    def test_small_signal(self):
        pieces = segment(Signal([1.0, 2.0, 3.0, 4.0], 2.0), 1.0)
        assert [p.values.tolist() for p in pieces] == [[1.0, 2.0], [3.0, 4.0]]

    def test_segment_longer_than_signal(self):
        with pytest.raises(EmptyResultError):
            segment(Signal([1.0, 2.0, 3.0], 1.0), 5.0)

    def test_segment_too_short(self):
        with pytest.raises(ConfigError):
            segment(Signal([1.0, 2.0, 3.0], 1.0), 1.0)

    def test_concatenation_reproduces_prefix(self, rng):
        values = rng.standard_normal(1003)
        pieces = segment(Signal(values, 100.0), 0.5)
        joined = np.concatenate([p.values for p in pieces])
        assert np.array_equal(joined, values[:joined.size])
        assert joined.size == 50 * len(pieces)

    def test_segments_keep_parent_group(self):
        ds = LabeledDataset([Signal(np.arange(8.0), 4.0), Signal(np.arange(8.0), 4.0)], ['a', 'b'])
        seg = segment_dataset(ds, 1.0)
        assert len(seg) == 4
        assert seg.groups == ('0', '0', '1', '1')
        assert seg.labels == ('a', 'a', 'b', 'b')


class TestSynthesis:
    def test_noise_free_peak_bound(self):
        spec = MuapSpec(n_phases=2, peak_amplitude=1.0, phase_width_s=0.002,
                        firing_rate_hz=10.0, noise_std=0.0, duration_s=1.0)
        values = synth_muap_signal(spec, 10000.0).values
        assert 0.9 <= values.max() <= 1.1
        assert -1.1 <= values.min() <= -0.9

    def test_deterministic(self, muap_spec):
        a = synth_muap_signal(muap_spec, 10000.0).values
        b = synth_muap_signal(muap_spec, 10000.0).values
        assert np.array_equal(a, b)

    def test_peak_count_covers_firings(self):
        spec = MuapSpec(n_phases=3, peak_amplitude=1.0, phase_width_s=0.002,
                        firing_rate_hz=10.0, noise_std=0.0, duration_s=1.0)
        assert peak_count(synth_muap_signal(spec, 10000.0).values) >= 10

    def test_too_few_samples(self):
        spec = MuapSpec(n_phases=2, peak_amplitude=1.0, phase_width_s=0.002,
                        firing_rate_hz=10.0, noise_std=0.0, duration_s=0.001)
        with pytest.raises(ConfigError):
            synth_muap_signal(spec, 10000.0)

    def test_invalid_spec(self):
        with pytest.raises(ConfigError):
            MuapSpec(n_phases=0, peak_amplitude=1.0, phase_width_s=0.002,
                     firing_rate_hz=10.0, noise_std=0.0, duration_s=1.0)

    def test_wavelet_lobes_alternate(self):
        w = muap_wavelet(3, 10.0)
        assert np.max(np.abs(w)) == pytest.approx(1.0, abs=0.01)
        # Second derivative of a Gaussian: negative centre, positive side lobes
        assert w[w.size // 2] < 0
        assert w[w.size // 2 + 17] > 0

    def test_balanced_dataset(self, muap_spec):
        ds = synth_dataset({'a': muap_spec, 'b': muap_spec, 'c': muap_spec}, 10, 2000.0, seed=1)
        assert len(ds) == 30
        assert ds.class_counts() == {'a': 10, 'b': 10, 'c': 10}
        # Spawned seeds differ per signal
        assert not np.array_equal(ds.signals[0].values, ds.signals[1].values)

    def test_imbalance_factor(self):
        spec = MuapSpec(n_phases=1, peak_amplitude=1.0, phase_width_s=0.002,
                        firing_rate_hz=10.0, noise_std=0.1, duration_s=0.01)
        ds = synth_dataset({'control': spec, 'myopathic': spec, 'als': spec},
                           {'control': 270, 'myopathic': 107, 'als': 98}, 10000.0, seed=0)
        assert round(imbalance_factor(ds), 2) == 2.76
