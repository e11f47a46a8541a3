#!/usr/bin/env python3
"""
The five downsampling algorithms and grid application across a dataset.

A factor k targets an output of about N / k points for every algorithm:
MinMax uses groups of 2k samples, M4 groups of 4k, LTTB buckets of k.
Factor 1 is the identity for all of them.
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.signal import filtfilt, firwin

from .signal import Signal
from ..utils.errors import (
    ConfigError, DownsampleAuditError, FactorTooLargeError, SignalLengthError,
)

logger = logging.getLogger(__name__)

MAX_DECIMATION_STAGE = 13
FIR_ORDER_PER_FACTOR = 20
DEFAULT_PRESELECT_RATIO = 4


class Algorithm(str, Enum):
    DECIMATE = 'Decimate'
    MINMAX = 'MinMax'
    M4 = 'M4'
    LTTB = 'LTTB'
    MINMAXLTTB = 'MinMaxLTTB'
    # The non-downsampled treatment; never part of a grid
    ORIGINAL = 'Original'

    @classmethod
    def parse(cls, name):
        for member in cls:
            if member.value.lower() == str(name).strip().lower():
                return member
        raise ConfigError(f"unknown algorithm {name!r}")


GRID_ALGORITHMS = (Algorithm.DECIMATE, Algorithm.MINMAX, Algorithm.M4,
                   Algorithm.LTTB, Algorithm.MINMAXLTTB)


@dataclass(frozen=True)
class DownsampleConfig:
    algorithm: Algorithm
    factor: int = 1
    preselect_ratio: int = DEFAULT_PRESELECT_RATIO

    def __post_init__(self):
        object.__setattr__(self, 'algorithm', Algorithm.parse(self.algorithm))
        if int(self.factor) != self.factor or self.factor < 1:
            raise ConfigError(f"factor must be an integer >= 1, got {self.factor}")
        object.__setattr__(self, 'factor', int(self.factor))
        if self.algorithm is Algorithm.MINMAXLTTB and self.preselect_ratio < 2:
            raise ConfigError(f"preselect_ratio must be >= 2, got {self.preselect_ratio}")
        if self.algorithm is Algorithm.ORIGINAL and self.factor != 1:
            raise ConfigError("the Original configuration has factor 1")

    @classmethod
    def original(cls):
        return cls(Algorithm.ORIGINAL, 1)

    @property
    def is_original(self):
        return self.algorithm is Algorithm.ORIGINAL

    @property
    def label(self):
        if self.is_original:
            return 'Original'
        return f"{self.algorithm.value}({self.factor})"

    def sort_key(self):
        return (self.algorithm.value, self.factor)

    def to_dict(self):
        data = {'algorithm': self.algorithm.value, 'factor': self.factor}
        if self.algorithm is Algorithm.MINMAXLTTB:
            data['preselect_ratio'] = self.preselect_ratio
        return data

    @classmethod
    def from_dict(cls, data):
        return cls(data['algorithm'], int(data.get('factor', 1)),
                   int(data.get('preselect_ratio', DEFAULT_PRESELECT_RATIO)))

    def __str__(self):
        return self.label


def build_grid(algorithms, factors, preselect_ratio=DEFAULT_PRESELECT_RATIO):
    """Every (algorithm, factor) cell, algorithm-major in the given order."""
    return [DownsampleConfig(algorithm, factor, preselect_ratio)
            for algorithm in algorithms for factor in factors]


@dataclass(frozen=True, eq=False)
class GridResult:
    config: DownsampleConfig
    dataset: object
    wall_time_s: float
    error: str = None

    @property
    def ok(self):
        return self.error is None


def _identity(signal):
    n = len(signal)
    return Signal(signal.values, signal.sample_rate_hz,
                  source_indices=np.arange(n), parent_length=n)


def _selection(signal, indices, k):
    return Signal(signal.values[indices], signal.sample_rate_hz / k,
                  source_indices=indices, parent_length=len(signal))


# ------------------------------------------------------------------- decimate

def decimation_stages(k):
    """Greedy largest-stage-first split of k into stages of at most 13.

    Returns None when k has a prime factor above 13.
    """
    stages, remaining = [], k
    while remaining > 1:
        stage = next((d for d in range(min(remaining, MAX_DECIMATION_STAGE), 1, -1)
                      if remaining % d == 0), None)
        if stage is None:
            return None
        stages.append(stage)
        remaining //= stage
    return stages


def _fir_stage(values, k, order):
    """Zero-phase Hamming FIR low-pass at 1/k of Nyquist, then keep every k-th."""
    if values.size < order + 1:
        raise SignalLengthError(f"decimation stage of order {order} needs "
                                f">= {order + 1} samples, got {values.size}")
    taps = firwin(order + 1, 1.0 / k, window='hamming')
    filtered = filtfilt(taps, [1.0], values, padtype='even', padlen=order)
    return filtered[::k]


def decimate(signal, k):
    """Anti-aliased decimation; output has ceil(N / k) samples at rate / k."""
    if k < 1:
        raise ConfigError(f"factor must be >= 1, got {k}")
    n = len(signal)
    if k == 1:
        return Signal(signal.values, signal.sample_rate_hz,
                      decimation_factor=1, parent_length=n)

    stages = decimation_stages(k)
    values = signal.values
    if stages is None:
        values = _fir_stage(values, k, FIR_ORDER_PER_FACTOR * MAX_DECIMATION_STAGE)
    else:
        for stage in stages:
            values = _fir_stage(values, stage, FIR_ORDER_PER_FACTOR * stage)
    return Signal(values, signal.sample_rate_hz / k, decimation_factor=k, parent_length=n)


# ------------------------------------------------------------ group selectors

def _group_extremes(values, size):
    """argmin/argmax (earliest on ties) of consecutive groups of ``size``."""
    n = values.size
    n_full = n // size
    picks = []
    if n_full:
        block = values[:n_full * size].reshape(n_full, size)
        starts = np.arange(n_full) * size
        picks += [starts + block.argmin(axis=1), starts + block.argmax(axis=1)]
    if n % size:
        tail = values[n_full * size:]
        start = n_full * size
        picks.append(np.array([start + tail.argmin(), start + tail.argmax()]))
    return picks


def minmax_indices(values, k):
    if k == 1:
        return np.arange(values.size)
    return np.unique(np.concatenate(_group_extremes(values, 2 * k)))


def m4_indices(values, k):
    if k == 1:
        return np.arange(values.size)
    size = 4 * k
    n = values.size
    firsts = np.arange(0, n, size)
    lasts = np.minimum(firsts + size, n) - 1
    return np.unique(np.concatenate([firsts, lasts] + _group_extremes(values, size)))


def minmax(signal, k):
    """Min and max of every group of 2k samples, in time order."""
    if len(signal) < 2 * k:
        raise SignalLengthError(f"MinMax({k}) needs >= {2 * k} samples, got {len(signal)}")
    if k == 1:
        return _identity(signal)
    return _selection(signal, minmax_indices(signal.values, k), k)


def m4(signal, k):
    """First, last, min and max of every group of 4k samples, de-duplicated."""
    if len(signal) < 4 * k:
        raise SignalLengthError(f"M4({k}) needs >= {4 * k} samples, got {len(signal)}")
    if k == 1:
        return _identity(signal)
    return _selection(signal, m4_indices(signal.values, k), k)


# ----------------------------------------------------------------------- LTTB

def bucket_offsets(n, n_out):
    """Start offsets of the n_out - 2 interior buckets, plus the end bound."""
    n_buckets = n_out - 2
    return 1 + (np.arange(n_buckets + 1) * (n - 2)) // n_buckets


def lttb_indices(x, y, n_out):
    """Largest-triangle-three-buckets selection over points (x, y).

    First and last points are always kept. In each interior bucket the point
    forming the largest triangle with the previously kept point and the mean
    point of the next bucket is kept; the final bucket uses the last point
    instead of a mean.
    """
    n = y.size
    if n_out >= n:
        return np.arange(n)
    if n_out == 2:
        return np.array([0, n - 1])

    offsets = bucket_offsets(n, n_out)
    n_buckets = n_out - 2
    selected = np.empty(n_out, dtype=np.int64)
    selected[0], selected[-1] = 0, n - 1

    a = 0
    for i in range(n_buckets):
        lo, hi = offsets[i], offsets[i + 1]
        if i < n_buckets - 1:
            nxt = slice(offsets[i + 1], offsets[i + 2])
            cx, cy = x[nxt].mean(), y[nxt].mean()
        else:
            cx, cy = x[n - 1], y[n - 1]
        ax, ay = x[a], y[a]
        area = np.abs((ax - cx) * (y[lo:hi] - ay) - (ax - x[lo:hi]) * (cy - ay))
        a = lo + int(area.argmax())
        selected[i + 1] = a
    return selected


def _lttb_output_size(signal, k):
    n_out = len(signal) // k
    if n_out < 2:
        raise FactorTooLargeError(f"factor {k} leaves {n_out} points from {len(signal)}")
    return n_out


def lttb(signal, k):
    n_out = _lttb_output_size(signal, k)
    if k == 1:
        return _identity(signal)
    x = np.arange(len(signal), dtype=np.float64)
    return _selection(signal, lttb_indices(x, signal.values, n_out), k)


def minmax_preselect(values, n_out, ratio):
    """Endpoints plus min/max of ratio * n_out / 2 equal interior bins."""
    n = values.size
    n_bins = max(1, (ratio * n_out) // 2)
    bounds = 1 + (np.arange(n_bins + 1) * (n - 2)) // n_bins
    picks = [0, n - 1]
    for lo, hi in zip(bounds[:-1], bounds[1:]):
        if hi > lo:
            chunk = values[lo:hi]
            picks += [lo + int(chunk.argmin()), lo + int(chunk.argmax())]
    return np.unique(np.array(picks))


def minmaxlttb(signal, k, ratio=DEFAULT_PRESELECT_RATIO):
    """LTTB over a MinMax pre-selection of ratio * n_out points."""
    if ratio < 2:
        raise ConfigError(f"preselect ratio must be >= 2, got {ratio}")
    n_out = _lttb_output_size(signal, k)
    if k == 1:
        return _identity(signal)
    if ratio * n_out >= len(signal):
        return lttb(signal, k)

    candidates = minmax_preselect(signal.values, n_out, ratio)
    chosen = lttb_indices(candidates.astype(np.float64), signal.values[candidates], n_out)
    return _selection(signal, candidates[chosen], k)


# ----------------------------------------------------------------------- grid

def downsample(signal, config):
    """Apply one configuration to one signal."""
    algorithm, k = config.algorithm, config.factor
    if algorithm is Algorithm.ORIGINAL:
        return _identity(signal)
    if algorithm is Algorithm.DECIMATE:
        return decimate(signal, k)
    if algorithm is Algorithm.MINMAX:
        return minmax(signal, k)
    if algorithm is Algorithm.M4:
        return m4(signal, k)
    if algorithm is Algorithm.LTTB:
        return lttb(signal, k)
    return minmaxlttb(signal, k, config.preselect_ratio)


def _run_config(dataset, config):
    start = time.perf_counter()
    try:
        signals = [downsample(s, config) for s in dataset.signals]
    except DownsampleAuditError as e:
        logger.warning("config %s failed: %s", config.label, e)
        return GridResult(config, None, 0.0, error=f"{config.label}: {e}")
    elapsed = time.perf_counter() - start
    return GridResult(config, dataset.with_signals(signals), elapsed)


def _time_config(dataset, config):
    start = time.perf_counter()
    for s in dataset.signals:
        downsample(s, config)
    return time.perf_counter() - start


def apply_grid(dataset, configs, workers=1):
    """One GridResult per config, in config order.

    A config that fails on any signal yields a result with ``error`` set
    and no dataset; the others proceed. With ``workers`` > 1 the cells are
    computed in a thread pool and then re-timed one at a time on the calling
    thread so wall times stay comparable.
    """
    configs = list(configs)
    if workers <= 1 or len(configs) < 2:
        results = [_run_config(dataset, config) for config in configs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(lambda c: _run_config(dataset, c), configs))
        results = [GridResult(r.config, r.dataset, _time_config(dataset, r.config))
                   if r.ok else r for r in results]

    failed = sum(1 for r in results if not r.ok)
    logger.info("applied %d configs (%d failed)", len(results), failed)
    return results
