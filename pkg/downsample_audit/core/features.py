#!/usr/bin/env python3
"""
Compact time-series feature set with timed extraction.
"""

import logging
import statistics
import time
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import grey_opening, uniform_filter1d
from scipy.signal import find_peaks

from .metrics import (
    peak_count, population_kurtosis, population_skewness, zero_crossing_rate,
)
from ..utils.errors import ConfigError, SignalLengthError

logger = logging.getLogger(__name__)

MIN_FEATURE_LENGTH = 16
QUANTILE_BANDS = ((0.0, 0.2), (0.4, 0.6), (0.8, 1.0))
ROLLOFF_FRACTION = 0.85

FEATURE_NAMES = (
    'mean', 'std', 'skewness', 'kurtosis', 'rms', 'peak_to_peak', 'zcr',
    'peak_count', 'smoothed_peak_count_w1', 'smoothed_peak_count_w5',
    'quantile_change_0_20', 'quantile_change_40_60', 'quantile_change_80_100',
    'spectral_centroid', 'spectral_rolloff_85', 'mean_abs_change',
)


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    feature_names: tuple = FEATURE_NAMES
    non_finite: tuple = ()

    def as_dict(self):
        return dict(zip(self.feature_names, self.values.tolist()))


@dataclass(frozen=True, eq=False)
class FeatureTable:
    """Feature matrix of a dataset plus what cross-validation needs."""

    matrix: np.ndarray
    labels: np.ndarray
    class_names: tuple
    groups: np.ndarray = None
    extraction_times: np.ndarray = None
    feature_names: tuple = FEATURE_NAMES


def smoothed_peak_count(values, width):
    """Peaks that persist for at least ``width`` samples above mean + 1 std.

    A grey opening of ``width`` removes excursions narrower than ``width``,
    a moving average of the same width smooths what remains, and the peaks
    of that series reaching the threshold are counted.
    """
    std = values.std()
    if std == 0:
        return 0
    smoothed = values
    if width > 1:
        smoothed = uniform_filter1d(grey_opening(values, size=width), size=width, mode='nearest')
    peaks, _ = find_peaks(smoothed, height=values.mean() + std)
    return peaks.size


def quantile_change(values, lower, upper):
    """Mean |successive difference| over pairs lying inside a quantile band."""
    lo, hi = np.quantile(values, [lower, upper])
    inside = (values >= lo) & (values <= hi)
    both = inside[1:] & inside[:-1]
    if not both.any():
        return 0.0
    return float(np.abs(np.diff(values))[both].mean())


def spectral_shape(values, sample_rate_hz):
    """(centroid, 85% rolloff) of the power spectrum in Hz."""
    power = np.abs(np.fft.rfft(values - values.mean())) ** 2
    total = power.sum()
    if total == 0:
        return 0.0, 0.0
    freqs = np.fft.rfftfreq(values.size, d=1.0 / sample_rate_hz)
    centroid = float(np.sum(freqs * power) / total)
    rolloff = float(freqs[np.searchsorted(np.cumsum(power), ROLLOFF_FRACTION * total)])
    return centroid, rolloff


def _compute(values, sample_rate_hz):
    centroid, rolloff = spectral_shape(values, sample_rate_hz)
    return [
        values.mean(),
        values.std(),
        population_skewness(values),
        population_kurtosis(values),
        np.sqrt(np.mean(values ** 2)),
        np.ptp(values),
        zero_crossing_rate(values),
        peak_count(values),
        smoothed_peak_count(values, 1),
        smoothed_peak_count(values, 5),
        *(quantile_change(values, lo, hi) for lo, hi in QUANTILE_BANDS),
        centroid,
        rolloff,
        np.mean(np.abs(np.diff(values))),
    ]


def extract_features(signal):
    """Feature vector of ``signal`` and the wall time its extraction took."""
    if len(signal) < MIN_FEATURE_LENGTH:
        raise SignalLengthError(f"feature extraction needs >= {MIN_FEATURE_LENGTH} "
                                f"samples, got {len(signal)}")
    start = time.perf_counter()
    values = np.array(_compute(signal.values, signal.sample_rate_hz), dtype=np.float64)
    elapsed = time.perf_counter() - start

    bad = ~np.isfinite(values)
    flagged = ()
    if bad.any():
        flagged = tuple(name for name, b in zip(FEATURE_NAMES, bad) if b)
        logger.warning("non-finite features replaced by 0: %s", ', '.join(flagged))
        values[bad] = 0.0
    return FeatureVector(values, FEATURE_NAMES, flagged), elapsed


def feature_table(dataset):
    """Extract every signal of ``dataset`` serially."""
    rows, times = [], []
    for sig in dataset.signals:
        vector, elapsed = extract_features(sig)
        rows.append(vector.values)
        times.append(elapsed)
    return FeatureTable(
        matrix=np.vstack(rows),
        labels=dataset.label_array(),
        class_names=dataset.class_names,
        groups=np.array(dataset.groups) if dataset.groups else None,
        extraction_times=np.array(times),
    )


def benchmark_extraction(dataset, warmup=3, repeats=5):
    """Median wall time to extract features from the whole dataset.

    Runs on the calling thread; ``warmup`` passes are discarded.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    for _ in range(warmup):
        for sig in dataset.signals:
            extract_features(sig)
    totals = []
    for _ in range(repeats):
        totals.append(sum(extract_features(sig)[1] for sig in dataset.signals))
    return statistics.median(totals)
