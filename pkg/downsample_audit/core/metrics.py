#!/usr/bin/env python3
"""
Distortion metrics between an original signal and its downsampled version.

Pointwise and envelope metrics compare the original against the downsampled
signal linearly interpolated back onto the original grid. Scalar,
distributional, spectral and compression metrics see the raw downsampled
samples. Every metric is a distance: lower means more similar.
"""

import gzip
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from functools import lru_cache

import numpy as np
from scipy.signal import find_peaks, hilbert, welch
from scipy.spatial.distance import jensenshannon
from scipy.stats import kurtosis, pearsonr, skew, spearmanr

from ..utils.errors import (
    AlignmentError, DataError, EmptyResultError, MetricError, SignalLengthError,
)

logger = logging.getLogger(__name__)

WELCH_MAX_SEGMENT = 256
JSD_BINS = 64
JSD_EPSILON = 1e-12
GZIP_LEVEL = 6
NCD_MAX = 1.1
SIZE_CACHE_ENTRIES = 256


@dataclass(frozen=True)
class MetricVector:
    rmse: float
    nmse: float
    pcc_dist: float
    scc_dist: float
    env_pcc_dist: float
    env_scc_dist: float
    zcr_delta: float
    peak_count_delta: float
    skew_delta: float
    kurt_delta: float
    psd_euclidean: float
    ncd: float
    jsd: float

    @classmethod
    def from_array(cls, values):
        return cls(*(float(v) for v in values))

    @classmethod
    def zeros(cls):
        return cls.from_array(np.zeros(len(METRIC_NAMES)))

    def to_array(self):
        return np.array([getattr(self, name) for name in METRIC_NAMES], dtype=np.float64)

    def as_dict(self):
        return {name: getattr(self, name) for name in METRIC_NAMES}


METRIC_NAMES = tuple(f.name for f in fields(MetricVector))


@dataclass(frozen=True)
class ConfigMetricSummary:
    config: object
    mean_metrics: MetricVector
    std_metrics: MetricVector
    n_pairs: int
    n_excluded: int = 0


# ------------------------------------------------------------------ alignment

def align(original, downsampled):
    """Both series on the original grid, the downsampled one linearly interpolated.

    Samples outside the retained span are held at the nearest retained value.
    """
    positions = downsampled.positions()
    if positions is None:
        raise AlignmentError("downsampled signal carries no source indices or stride")
    grid = np.arange(len(original), dtype=np.float64)
    return original.values, np.interp(grid, positions, downsampled.values)


# ----------------------------------------------------------------- components

def _correlation_distance(x, y, metric, rank=False):
    """1 - r; a constant x is an error, a constant y gives r = 0."""
    if np.ptp(x) == 0:
        raise MetricError(metric, "reference series has zero variance")
    if np.ptp(y) == 0:
        return 1.0
    r = spearmanr(x, y).statistic if rank else pearsonr(x, y).statistic
    return 1.0 - float(np.clip(r, -1.0, 1.0))


def pointwise_metrics(x, y):
    """(rmse, nmse, pcc_dist, scc_dist) for equal-length series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size != y.size or x.size < 2:
        raise SignalLengthError(f"pointwise metrics need equal lengths >= 2, got {x.size}/{y.size}")
    residual = x - y
    rmse = math.sqrt(np.mean(residual ** 2))
    spread = np.sum((x - x.mean()) ** 2)
    if spread == 0:
        raise MetricError('nmse', "reference series has zero variance")
    nmse = float(np.sum(residual ** 2) / spread)
    return (rmse, nmse,
            _correlation_distance(x, y, 'pcc_dist'),
            _correlation_distance(x, y, 'scc_dist', rank=True))


def envelope(values):
    """Magnitude of the FFT-based analytic signal."""
    return np.abs(hilbert(np.asarray(values, dtype=np.float64)))


def envelope_metrics(x, y):
    """(env_pcc_dist, env_scc_dist) between Hilbert envelopes."""
    if len(x) != len(y) or len(x) < 8:
        raise SignalLengthError(f"envelope metrics need equal lengths >= 8, got {len(x)}/{len(y)}")
    ex, ey = envelope(x), envelope(y)
    return (_correlation_distance(ex, ey, 'env_pcc_dist'),
            _correlation_distance(ex, ey, 'env_scc_dist', rank=True))


def zero_crossing_rate(values):
    """Fraction of transitions where s(x) = [x >= 0] changes."""
    signs = np.asarray(values) >= 0
    return float(np.count_nonzero(signs[1:] != signs[:-1]) / (signs.size - 1))


def peak_count(values):
    """Strict local maxima; a raised plateau counts once."""
    peaks, _ = find_peaks(np.asarray(values, dtype=np.float64))
    return peaks.size


def population_skewness(values):
    values = np.asarray(values, dtype=np.float64)
    if np.ptp(values) == 0:
        return 0.0
    return float(skew(values, bias=True))


def population_kurtosis(values):
    """Non-excess kurtosis; 0 for a constant series."""
    values = np.asarray(values, dtype=np.float64)
    if np.ptp(values) == 0:
        return 0.0
    return float(kurtosis(values, fisher=False, bias=True))


def scalar_deltas(x, y):
    """Absolute differences of (ZCR, peak count, skewness, kurtosis).

    x and y may differ in length.
    """
    if len(x) < 4 or len(y) < 4:
        raise SignalLengthError(f"scalar deltas need >= 4 samples, got {len(x)}/{len(y)}")
    return (abs(zero_crossing_rate(x) - zero_crossing_rate(y)),
            float(abs(peak_count(x) - peak_count(y))),
            abs(population_skewness(x) - population_skewness(y)),
            abs(population_kurtosis(x) - population_kurtosis(y)))


def normalized_psd(values, sample_rate_hz):
    """Welch PSD (Hann, 50% overlap) scaled to sum 1."""
    nperseg = min(WELCH_MAX_SEGMENT, len(values) // 2)
    freqs, power = welch(np.asarray(values, dtype=np.float64), fs=sample_rate_hz,
                         window='hann', nperseg=nperseg, noverlap=nperseg // 2)
    total = power.sum()
    return freqs, (power / total if total > 0 else power)


def _bin_edges(freqs):
    step = freqs[1] - freqs[0]
    return np.concatenate(([freqs[0] - step / 2], freqs + step / 2))


def transfer_psd(target_freqs, freqs, psd):
    """Mass of ``psd`` falling inside each bin centred on ``target_freqs``.

    The cumulative PSD is linearly interpolated at the target bin edges, so
    resolution differences keep the mass comparable and target bins above
    the source Nyquist receive nothing.
    """
    cumulative = np.concatenate(([0.0], np.cumsum(psd)))
    at_edges = np.interp(_bin_edges(target_freqs), _bin_edges(freqs), cumulative)
    return np.diff(at_edges)


def psd_distance(x, y):
    """Euclidean distance between normalized Welch PSDs at native rates.

    The spectrum of `y` is transferred onto the frequency grid of `x`, whichever
    of the two is finer.
    """
    if len(x) < 32 or len(y) < 32:
        raise SignalLengthError(f"PSD distance needs >= 32 samples, got {len(x)}/{len(y)}")
    fx, px = normalized_psd(x.values, x.sample_rate_hz)
    fy, py = normalized_psd(y.values, y.sample_rate_hz)
    if fx.size == fy.size and np.array_equal(fx, fy):
        q = py
    else:
        q = transfer_psd(fx, fy, py)
    return float(np.sqrt(np.sum((px - q) ** 2)))


def _as_bytes(values):
    return np.ascontiguousarray(values, dtype='<f8').tobytes()


@lru_cache(maxsize=SIZE_CACHE_ENTRIES)
def compressed_size(data):
    """gzip size of `data`; recently seen byte strings are served from an LRU cache."""
    return len(gzip.compress(data, compresslevel=GZIP_LEVEL, mtime=0))


def ncd(x, y):
    """Normalized compression distance of the float64 byte streams."""
    bx, by = _as_bytes(x), _as_bytes(y)
    if not bx or not by:
        raise EmptyResultError("NCD needs non-empty inputs")
    if bx == by:
        return 0.0
    zx, zy = compressed_size(bx), compressed_size(by)
    zxy = len(gzip.compress(bx + by, compresslevel=GZIP_LEVEL, mtime=0))
    value = (zxy - min(zx, zy)) / max(zx, zy)
    return float(min(max(value, 0.0), NCD_MAX))


def histogram_pair(x, y, bins=JSD_BINS, epsilon=JSD_EPSILON):
    """Smoothed probability histograms of x and y over their joint range."""
    lo = min(np.min(x), np.min(y))
    hi = max(np.max(x), np.max(y))
    p, _ = np.histogram(x, bins=bins, range=(lo, hi))
    q, _ = np.histogram(y, bins=bins, range=(lo, hi))
    p = p / p.sum() + epsilon
    q = q / q.sum() + epsilon
    return p / p.sum(), q / q.sum()


def jsd(x, y):
    """Jensen-Shannon divergence (log base 2) of 64-bin histograms."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size == 0 or y.size == 0:
        raise EmptyResultError("JSD needs non-empty inputs")
    if min(x.min(), y.min()) == max(x.max(), y.max()):
        return 0.0
    p, q = histogram_pair(x, y)
    # scipy returns the distance, the square root of the divergence
    return float(min(max(jensenshannon(p, q, base=2) ** 2, 0.0), 1.0))


# -------------------------------------------------------------------- profile

def _tagged(metric, func, *args):
    try:
        return func(*args)
    except MetricError:
        raise
    except DataError as e:
        raise MetricError(metric, str(e))


def metric_profile(original, downsampled):
    """All thirteen distances for one original/downsampled pair."""
    x, y_aligned = _tagged('alignment', align, original, downsampled)
    rmse, nmse, pcc_dist, scc_dist = _tagged('pointwise', pointwise_metrics, x, y_aligned)
    env_pcc, env_scc = _tagged('envelope', envelope_metrics, x, y_aligned)
    zcr_d, peaks_d, skew_d, kurt_d = _tagged('scalar', scalar_deltas, x, downsampled.values)
    return MetricVector(
        rmse=rmse, nmse=nmse, pcc_dist=pcc_dist, scc_dist=scc_dist,
        env_pcc_dist=env_pcc, env_scc_dist=env_scc,
        zcr_delta=zcr_d, peak_count_delta=peaks_d, skew_delta=skew_d, kurt_delta=kurt_d,
        psd_euclidean=_tagged('psd_euclidean', psd_distance, original, downsampled),
        ncd=_tagged('ncd', ncd, x, downsampled.values),
        jsd=_tagged('jsd', jsd, x, downsampled.values),
    )


def _profile_or_none(pair):
    original, downsampled = pair
    try:
        return metric_profile(original, downsampled)
    except MetricError as e:
        logger.warning("metric pair excluded: %s", e)
        return None


def profile_dataset(original, downsampled, workers=1):
    """Profiles for every signal pair in order; excluded pairs are None."""
    if len(original) != len(downsampled):
        raise DataError(f"{len(original)} originals but {len(downsampled)} downsampled signals")
    pairs = list(zip(original.signals, downsampled.signals))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            return list(executor.map(_profile_or_none, pairs))
    return [_profile_or_none(pair) for pair in pairs]


def summarize_config(profiles, config):
    """Elementwise mean and population std; None entries count as excluded."""
    kept = [p for p in profiles if p is not None]
    excluded = len(profiles) - len(kept)
    if not kept:
        raise EmptyResultError(f"no metric profiles to summarize for {config}")
    matrix = np.array([p.to_array() for p in kept])
    n = len(kept)
    # fsum keeps the reduction independent of pair order
    means = np.array([math.fsum(col) / n for col in matrix.T])
    stds = np.array([math.sqrt(math.fsum((col - m) ** 2) / n)
                     for col, m in zip(matrix.T, means)])
    return ConfigMetricSummary(config, MetricVector.from_array(means),
                               MetricVector.from_array(stds), n, excluded)
