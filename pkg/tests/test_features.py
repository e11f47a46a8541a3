"""Tests for feature extraction."""

import numpy as np
import pytest

from downsample_audit.core.downsamplers import lttb
from downsample_audit.core.features import (
    FEATURE_NAMES, benchmark_extraction, extract_features, feature_table, quantile_change,
    smoothed_peak_count, spectral_shape,
)
from downsample_audit.core.signal import Signal
from downsample_audit.utils.errors import ConfigError, SignalLengthError


def test_feature_names_are_unique():
    assert len(FEATURE_NAMES) == 16
    assert len(set(FEATURE_NAMES)) == 16


def test_sine_features(sine):
    vector, elapsed = extract_features(sine)
    features = vector.as_dict()
    assert elapsed >= 0
    assert features['mean'] == pytest.approx(0.0, abs=1e-9)
    assert features['rms'] == pytest.approx(np.sqrt(0.5), abs=1e-9)
    assert features['peak_to_peak'] == pytest.approx(2.0, abs=1e-3)
    assert features['peak_count'] == 20
    assert features['spectral_centroid'] == pytest.approx(10.0, abs=1e-6)
    assert features['spectral_rolloff_85'] == pytest.approx(10.0)


def test_constant_signal_is_finite():
    vector, _ = extract_features(Signal(np.full(64, 2.0), 100.0))
    assert np.all(np.isfinite(vector.values))
    assert vector.non_finite == ()
    features = vector.as_dict()
    assert features['std'] == 0.0
    assert features['smoothed_peak_count_w5'] == 0
    assert features['spectral_centroid'] == 0.0


def test_too_short():
    with pytest.raises(SignalLengthError):
        extract_features(Signal(np.arange(10.0), 100.0))


def test_smoothing_removes_narrow_peaks():
    values = np.zeros(200)
    values[50] = 5.0
    values[120:131] = 5.0
    assert smoothed_peak_count(values, 1) == 2
    assert smoothed_peak_count(values, 5) == 1


def test_wide_peaks_survive_smoothing_but_not_lttb(firing_rate_dataset):
    for sig in firing_rate_dataset.signals:
        assert smoothed_peak_count(sig.values, 5) > 0
        reduced = lttb(sig, 25).values
        assert smoothed_peak_count(reduced, 5) == 0
        assert smoothed_peak_count(reduced, 1) > 0


def test_quantile_change_on_ramp():
    values = np.arange(100.0)
    for lo, hi in ((0.0, 0.2), (0.4, 0.6), (0.8, 1.0)):
        assert quantile_change(values, lo, hi) == 1.0


def test_spectral_shape_of_silence():
    assert spectral_shape(np.zeros(32), 10.0) == (0.0, 0.0)


def test_table_shape(separable_dataset):
    table = feature_table(separable_dataset)
    assert table.matrix.shape == (30, len(FEATURE_NAMES))
    assert table.labels.tolist() == list(separable_dataset.labels)
    assert table.extraction_times.shape == (30,)
    assert table.groups is None


def test_benchmark(separable_dataset):
    assert benchmark_extraction(separable_dataset, warmup=0, repeats=1) > 0
    with pytest.raises(ConfigError):
        benchmark_extraction(separable_dataset, repeats=0)
