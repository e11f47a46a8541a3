#!/usr/bin/env python3
"""
Signal representation, dataset ingestion, segmentation and synthetic
MUAP-like waveform generation.
"""

import csv
import json
import logging
import math
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from numpy.polynomial.hermite_e import hermeval
from scipy.io import wavfile

from ..utils.errors import (
    ConfigError, DataError, EmptyResultError, FormatError, IngestionError,
)

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'raw-f64le', 'wav-pcm16')
MANIFEST_NAME = 'manifest.json'
PROVENANCE_NAME = 'downsample.json'


def _frozen_array(values, dtype):
    array = np.array(values, dtype=dtype, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Signal:
    """Uniformly sampled series, optionally carrying provenance into a parent.

    ``source_indices`` is set by the point-selecting downsamplers.
    ``decimation_factor`` is set by ``decimate``: sample i sits at parent
    index i * factor.
    """

    values: np.ndarray
    sample_rate_hz: float
    source_indices: np.ndarray = None
    decimation_factor: int = None
    parent_length: int = None

    def __post_init__(self):
        values = _frozen_array(self.values, np.float64)
        if values.ndim != 1 or values.size == 0:
            raise DataError("signal values must be a non-empty 1-D sequence")
        if not self.sample_rate_hz > 0:
            raise DataError(f"sample rate must be positive, got {self.sample_rate_hz}")
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'sample_rate_hz', float(self.sample_rate_hz))

        if self.source_indices is not None:
            indices = _frozen_array(self.source_indices, np.int64)
            if indices.shape != values.shape:
                raise DataError("source_indices must match values in length")
            if indices.size > 1 and np.any(np.diff(indices) <= 0):
                raise DataError("source_indices must be strictly increasing")
            if indices[0] < 0 or (self.parent_length is not None
                                  and indices[-1] >= self.parent_length):
                raise DataError("source_indices out of parent range")
            object.__setattr__(self, 'source_indices', indices)

        if self.decimation_factor is not None and self.decimation_factor < 1:
            raise DataError("decimation_factor must be >= 1")

    def __len__(self):
        return self.values.size

    @property
    def duration_s(self):
        return self.values.size / self.sample_rate_hz

    @property
    def is_downsampled(self):
        return self.source_indices is not None or self.decimation_factor is not None

    def positions(self):
        """Parent-grid positions of every sample, or None without provenance."""
        if self.source_indices is not None:
            return self.source_indices.astype(np.float64)
        if self.decimation_factor is not None:
            return np.arange(self.values.size, dtype=np.float64) * self.decimation_factor
        return None


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    signals: tuple
    labels: tuple
    class_names: tuple = None
    groups: tuple = None

    def __post_init__(self):
        signals = tuple(self.signals)
        labels = tuple(str(label) for label in self.labels)
        if not signals:
            raise DataError("dataset must contain at least one signal")
        if len(signals) != len(labels):
            raise DataError(f"{len(signals)} signals but {len(labels)} labels")

        class_names = tuple(self.class_names) if self.class_names is not None \
            else tuple(sorted(set(labels)))
        unknown = set(labels) - set(class_names)
        if unknown:
            raise DataError(f"labels not in class_names: {sorted(unknown)}")
        if len(set(class_names)) != len(class_names):
            raise DataError("class_names must be unique")

        rates = {s.sample_rate_hz for s in signals}
        if len(rates) != 1:
            raise DataError(f"signals must share one sample rate, got {sorted(rates)}")

        groups = None
        if self.groups is not None:
            groups = tuple(str(g) for g in self.groups)
            if len(groups) != len(signals):
                raise DataError("groups must have one entry per signal")

        object.__setattr__(self, 'signals', signals)
        object.__setattr__(self, 'labels', labels)
        object.__setattr__(self, 'class_names', class_names)
        object.__setattr__(self, 'groups', groups)

    def __len__(self):
        return len(self.signals)

    @property
    def sample_rate_hz(self):
        return self.signals[0].sample_rate_hz

    def label_array(self):
        return np.array(self.labels)

    def class_counts(self):
        counts = Counter(self.labels)
        return {name: counts.get(name, 0) for name in self.class_names}

    def with_signals(self, signals):
        """Same labels, classes and groups over a new signal sequence."""
        return LabeledDataset(signals, self.labels, self.class_names, self.groups)


@dataclass(frozen=True)
class MuapSpec:
    """Template for a synthetic motor-unit action potential train.

    ``amplitude_jitter`` scales each signal by a gain drawn from
    N(1, amplitude_jitter); ``timing_jitter`` shifts each firing by up to
    half that fraction of the firing period.
    """

    n_phases: int
    peak_amplitude: float
    phase_width_s: float
    firing_rate_hz: float
    noise_std: float
    duration_s: float
    seed: int = 0
    amplitude_jitter: float = 0.0
    timing_jitter: float = 0.1

    def __post_init__(self):
        if int(self.n_phases) != self.n_phases or self.n_phases < 1:
            raise ConfigError(f"n_phases must be an integer >= 1, got {self.n_phases}")
        for name in ('peak_amplitude', 'phase_width_s', 'firing_rate_hz', 'duration_s'):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ('noise_std', 'amplitude_jitter', 'timing_jitter'):
            if getattr(self, name) < 0:
                raise ConfigError(f"{name} must be non-negative, got {getattr(self, name)}")
        if self.timing_jitter > 1:
            raise ConfigError("timing_jitter is a fraction of the firing period (<= 1)")

    @classmethod
    def from_dict(cls, data):
        try:
            return cls(**data)
        except TypeError as e:
            raise ConfigError(f"invalid MUAP spec {data}: {e}")

    def to_dict(self):
        return {name: getattr(self, name) for name in self.__dataclass_fields__}


# ----------------------------------------------------------------- synthesis

def muap_wavelet(n_phases, sigma_samples):
    """Sampled MUAP wavelet with unit peak magnitude.

    The wavelet is the (n_phases - 1)-th derivative of a Gaussian,
    He_{n-1}(u) * exp(-u^2 / 2) with u = t / sigma, whose lobes alternate in
    sign; n_phases = 1 is the Gaussian itself. It is truncated at
    |u| <= 4 + n_phases / 2 and scaled so that the continuous maximum of
    |w| equals 1.
    """
    coefficients = np.zeros(n_phases)
    coefficients[-1] = 1.0
    half_width = 4.0 + n_phases / 2.0

    fine = np.linspace(-half_width, half_width, 20001)
    norm = np.max(np.abs(hermeval(fine, coefficients) * np.exp(-fine ** 2 / 2)))

    reach = int(math.ceil(half_width * sigma_samples))
    u = np.arange(-reach, reach + 1) / sigma_samples
    return hermeval(u, coefficients) * np.exp(-u ** 2 / 2) / norm


def synth_muap_signal(spec, sample_rate_hz):
    """Deterministic MUAP train for ``spec`` sampled at ``sample_rate_hz``."""
    if not sample_rate_hz > 0:
        raise ConfigError(f"sample rate must be positive, got {sample_rate_hz}")
    n_samples = int(math.floor(spec.duration_s * sample_rate_hz + 1e-9))
    if n_samples < 64:
        raise ConfigError(f"duration {spec.duration_s}s at {sample_rate_hz} Hz gives "
                          f"{n_samples} samples, need >= 64")

    rng = np.random.default_rng(spec.seed)
    gain = max(0.1, 1.0 + spec.amplitude_jitter * rng.standard_normal()) \
        if spec.amplitude_jitter > 0 else 1.0

    period = 1.0 / spec.firing_rate_hz
    n_firings = int(math.floor(spec.duration_s * spec.firing_rate_hz + 1e-9))
    offsets = rng.uniform(-0.5, 0.5, size=n_firings) * spec.timing_jitter * period
    firing_times = (np.arange(n_firings) + 0.5) * period + offsets

    # sigma is half the phase width
    wavelet = muap_wavelet(spec.n_phases, spec.phase_width_s / 2.0 * sample_rate_hz)
    reach = wavelet.size // 2

    values = np.zeros(n_samples)
    for t in firing_times:
        centre = int(round(t * sample_rate_hz))
        lo, hi = centre - reach, centre + reach + 1
        w_lo, w_hi = max(0, -lo), wavelet.size - max(0, hi - n_samples)
        if w_lo >= w_hi:
            continue
        values[max(lo, 0):min(hi, n_samples)] += wavelet[w_lo:w_hi]

    values *= spec.peak_amplitude * gain
    if spec.noise_std > 0:
        values += rng.normal(0.0, spec.noise_std, size=n_samples)
    return Signal(values, sample_rate_hz)


def synth_dataset(class_specs, n_per_class, sample_rate_hz, seed):
    """Labeled dataset of MUAP trains, class-major order.

    ``n_per_class`` is either one count for every class or a mapping
    class -> count. Per-signal seeds are spawned from ``seed``.
    """
    if not class_specs:
        raise ConfigError("at least one class spec is required")
    if isinstance(n_per_class, dict):
        counts = {name: int(n_per_class[name]) for name in class_specs}
    else:
        counts = {name: int(n_per_class) for name in class_specs}
    if any(count < 1 for count in counts.values()):
        raise ConfigError(f"every class needs >= 1 signal, got {counts}")

    children = np.random.SeedSequence(seed).spawn(sum(counts.values()))
    signals, labels = [], []
    child = iter(children)
    for name, template in class_specs.items():
        for _ in range(counts[name]):
            signal_seed = int(next(child).generate_state(1)[0])
            signals.append(synth_muap_signal(replace(template, seed=signal_seed), sample_rate_hz))
            labels.append(name)

    logger.debug("synthesized %d signals over %d classes", len(signals), len(class_specs))
    return LabeledDataset(signals, labels, tuple(str(n) for n in class_specs))


def imbalance_factor(dataset):
    """Largest class count over smallest class count."""
    counts = [c for c in dataset.class_counts().values()]
    if min(counts) == 0:
        return math.inf
    return max(counts) / min(counts)


# --------------------------------------------------------------- segmentation

def segment(signal, segment_seconds):
    """Non-overlapping segments of floor(segment_seconds * rate) samples.

    A trailing remainder shorter than one segment is dropped.
    """
    seg_len = int(math.floor(segment_seconds * signal.sample_rate_hz + 1e-9))
    if seg_len < 2:
        raise ConfigError(f"segment of {segment_seconds}s holds {seg_len} samples, need >= 2")
    n_segments = len(signal) // seg_len
    if n_segments == 0:
        raise EmptyResultError(f"segment of {seg_len} samples is longer than the "
                               f"{len(signal)}-sample signal")
    return [Signal(signal.values[i * seg_len:(i + 1) * seg_len], signal.sample_rate_hz)
            for i in range(n_segments)]


def segment_dataset(dataset, segment_seconds):
    """Segment every signal; segments keep their parent's label and group."""
    signals, labels, groups = [], [], []
    for index, (sig, label) in enumerate(zip(dataset.signals, dataset.labels)):
        parent = dataset.groups[index] if dataset.groups else str(index)
        pieces = segment(sig, segment_seconds)
        signals.extend(pieces)
        labels.extend([label] * len(pieces))
        groups.extend([parent] * len(pieces))
    logger.info("segmented %d signals into %d segments", len(dataset), len(signals))
    return LabeledDataset(signals, labels, dataset.class_names, groups)


# ------------------------------------------------------------------ ingestion

def _check_finite(values, where):
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise DataError(f"non-finite sample in {where} at index {int(bad[0])}")


def read_manifest(path):
    path = Path(path)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            manifest = json.load(f)
    except FileNotFoundError:
        raise FormatError(f"manifest not found: {path}")
    except json.JSONDecodeError as e:
        raise FormatError(f"malformed manifest {path}: {e}")

    if not isinstance(manifest, dict):
        raise FormatError(f"malformed manifest {path}: top level must be an object")
    rate = manifest.get('sample_rate_hz')
    if rate is not None and (not isinstance(rate, (int, float)) or rate <= 0):
        raise FormatError(f"malformed manifest {path}: bad sample_rate_hz {rate!r}")
    files = manifest.get('files', [])
    if not isinstance(files, list):
        raise FormatError(f"malformed manifest {path}: 'files' must be a list")
    for entry in files:
        if not isinstance(entry, dict) or 'path' not in entry:
            raise FormatError(f"malformed manifest {path}: file entry without 'path'")
        if entry.get('label') is None:
            raise IngestionError(f"no label for file {entry['path']} in {path}")
    return manifest


def _locate_manifest(path):
    path = Path(path)
    if path.is_dir():
        return path / MANIFEST_NAME
    if path.name == MANIFEST_NAME:
        return path
    return path.parent / MANIFEST_NAME


def _load_csv(path, sample_rate_hz):
    signals, labels = [], []
    with open(path, 'r', encoding='utf-8', newline='') as f:
        for row_no, row in enumerate(csv.reader(f), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            label, cells = row[0].strip(), row[1:]
            if not label:
                raise IngestionError(f"{path}: row {row_no} has no label")
            # trailing blanks pad ragged rows; a blank inside a row is a missing sample
            while cells and not cells[-1].strip():
                cells.pop()
            blank = [i for i, c in enumerate(cells) if not c.strip()]
            if blank:
                raise DataError(f"{path}: empty sample at row {row_no}, column {blank[0] + 2}")
            try:
                values = np.array([float(c) for c in cells])
            except ValueError as e:
                raise FormatError(f"{path}: row {row_no}: {e}")
            bad = np.flatnonzero(~np.isfinite(values))
            if bad.size:
                raise DataError(f"{path}: non-finite sample at row {row_no}, "
                                f"column {int(bad[0]) + 2}")
            if values.size == 0:
                raise FormatError(f"{path}: row {row_no} has no samples")
            signals.append(Signal(values, sample_rate_hz))
            labels.append(label)
    return signals, labels


def load_dataset(path, format, sample_rate_hz=None):
    """Load a labeled dataset.

    ``csv``: ``path`` is the CSV file; the rate comes from ``sample_rate_hz``
    or a manifest.json next to it. ``raw-f64le`` / ``wav-pcm16``: ``path`` is
    the data directory (or its manifest.json), whose manifest lists
    ``files`` with ``path`` and ``label`` and, optionally, ``group``.
    """
    if format not in FORMATS:
        raise ConfigError(f"unknown format {format!r}, expected one of {FORMATS}")
    path = Path(path)
    if not path.exists():
        raise DataError(f"path does not exist: {path}")
    manifest_path = _locate_manifest(path)

    if format == 'csv':
        csv_path = path if path.is_file() else path / 'signals.csv'
        rate = sample_rate_hz
        if rate is None and manifest_path.exists():
            rate = read_manifest(manifest_path).get('sample_rate_hz')
        if rate is None:
            raise FormatError(f"no sample rate for {csv_path}: pass one or add {MANIFEST_NAME}")
        signals, labels = _load_csv(csv_path, rate)
        if not signals:
            raise EmptyResultError(f"{csv_path} contains no signals")
        logger.info("loaded %d signals from %s", len(signals), csv_path)
        return LabeledDataset(signals, labels)

    manifest = read_manifest(manifest_path)
    declared = manifest.get('format')
    if declared is not None and declared != format:
        raise FormatError(f"{manifest_path} declares format {declared!r}, not {format!r}")
    if not manifest.get('files'):
        raise FormatError(f"{manifest_path} lists no files")
    rate = sample_rate_hz or manifest.get('sample_rate_hz')
    if format == 'raw-f64le' and rate is None:
        raise FormatError(f"{manifest_path} has no sample_rate_hz for raw data")

    base = manifest_path.parent
    signals, labels, groups = [], [], []
    for entry in manifest['files']:
        file_path = base / entry['path']
        if not file_path.exists():
            raise IngestionError(f"listed file missing: {file_path}")
        if format == 'raw-f64le':
            raw = file_path.read_bytes()
            if len(raw) % 8:
                raise FormatError(f"{file_path}: size {len(raw)} is not a multiple of 8")
            values = np.frombuffer(raw, dtype='<f8').astype(np.float64)
            file_rate = rate
        else:
            try:
                file_rate, data = wavfile.read(file_path)
            except ValueError as e:
                raise FormatError(f"{file_path}: {e}")
            if data.dtype != np.int16 or data.ndim != 1:
                raise FormatError(f"{file_path}: expected mono PCM16, got {data.dtype} "
                                  f"with shape {data.shape}")
            if rate is not None and not math.isclose(file_rate, rate):
                raise FormatError(f"{file_path}: rate {file_rate} disagrees with manifest {rate}")
            values = data.astype(np.float64) / 32768.0
        if values.size == 0:
            raise FormatError(f"{file_path} holds no samples")
        _check_finite(values, str(file_path))
        signals.append(Signal(values, file_rate))
        labels.append(entry['label'])
        groups.append(entry.get('group'))

    logger.info("loaded %d %s signals from %s", len(signals), format, base)
    return LabeledDataset(signals, labels,
                          groups=groups if all(g is not None for g in groups) else None)


def write_dataset(dataset, directory, format, provenance=None):
    """Persist ``dataset`` in ``format`` with its manifest.

    ``provenance`` (a mapping describing the downsampling config) adds a
    downsample.json sidecar holding the config and each file's retained
    parent positions. Returns the list of written paths.
    """
    if format not in ('csv', 'raw-f64le'):
        raise ConfigError(f"cannot write format {format!r}")
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    manifest = {'format': format, 'sample_rate_hz': dataset.sample_rate_hz}
    names = []

    if format == 'csv':
        csv_path = directory / 'signals.csv'
        with open(csv_path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f)
            for sig, label in zip(dataset.signals, dataset.labels):
                writer.writerow([label] + [repr(float(v)) for v in sig.values])
        written.append(csv_path)
        names = ['signals.csv'] * len(dataset)
    else:
        files = []
        for index, (sig, label) in enumerate(zip(dataset.signals, dataset.labels)):
            name = f"signal_{index:05d}.f64"
            (directory / name).write_bytes(sig.values.astype('<f8').tobytes())
            entry = {'path': name, 'label': label}
            if dataset.groups:
                entry['group'] = dataset.groups[index]
            files.append(entry)
            names.append(name)
            written.append(directory / name)
        manifest['files'] = files

    manifest_path = directory / MANIFEST_NAME
    with open(manifest_path, 'w', encoding='utf-8') as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
    written.append(manifest_path)

    if provenance is not None:
        entries = []
        for row, (name, sig) in enumerate(zip(names, dataset.signals)):
            entry = {'path': name, 'row': row}
            if sig.source_indices is not None:
                entry['source_indices'] = sig.source_indices.tolist()
            elif sig.decimation_factor is not None:
                entry['decimation_factor'] = sig.decimation_factor
            entries.append(entry)
        sidecar = directory / PROVENANCE_NAME
        with open(sidecar, 'w', encoding='utf-8') as f:
            json.dump({'config': dict(provenance), 'files': entries}, f, indent=2, sort_keys=True)
        written.append(sidecar)

    return written
