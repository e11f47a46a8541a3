#!/usr/bin/env python3
"""
Workflow configuration.

Precedence, lowest first: built-in defaults, the JSON config file, the
DOWNSAMPLE_AUDIT_THREADS environment variable, command-line flags.
"""

import json
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from ..core.downsamplers import DEFAULT_PRESELECT_RATIO, GRID_ALGORITHMS, Algorithm
from ..core.signal import FORMATS, MuapSpec
from ..core.statistics import NEMENYI_Q05
from ..utils.errors import ConfigError

THREADS_ENV = 'DOWNSAMPLE_AUDIT_THREADS'
# The critical-difference table covers the Original plus this many factors
MAX_FACTORS = len(NEMENYI_Q05)

DEFAULT_FACTORS = (2, 5) + tuple(range(10, 100, 5)) + (100, 200, 300, 400, 500, 1000)

# Three MUAP morphologies at 10 kHz: normal, short polyphasic
# (myopathic-like) and large long-duration (neuropathic-like) units.
DEFAULT_SYNTH = {
    'sample_rate_hz': 10000.0,
    'n_per_class': 20,
    'classes': {
        'normal': {'n_phases': 3, 'peak_amplitude': 1.0, 'phase_width_s': 0.002,
                   'firing_rate_hz': 12.0, 'noise_std': 0.05, 'duration_s': 1.0,
                   'amplitude_jitter': 0.15},
        'myopathic': {'n_phases': 5, 'peak_amplitude': 0.5, 'phase_width_s': 0.0008,
                      'firing_rate_hz': 18.0, 'noise_std': 0.05, 'duration_s': 1.0,
                      'amplitude_jitter': 0.15},
        'neuropathic': {'n_phases': 4, 'peak_amplitude': 2.5, 'phase_width_s': 0.004,
                        'firing_rate_hz': 8.0, 'noise_std': 0.05, 'duration_s': 1.0,
                        'amplitude_jitter': 0.15},
    },
}


def _env_threads():
    raw = os.getenv(THREADS_ENV)
    if raw is None or raw.strip() == '':
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be an integer, got {raw!r}")


@dataclass
class WorkflowConfig:
    """Everything one workflow run depends on.

    ``dataset`` is either ``{"path": ..., "format": ..., "sample_rate_hz": ...}``
    for recorded data or ``{"synth": {...}}`` with ``sample_rate_hz``,
    ``n_per_class`` and ``classes`` (name -> MUAP spec).
    """

    dataset: dict = field(default_factory=lambda: {'synth': json.loads(json.dumps(DEFAULT_SYNTH))})
    algorithms: tuple = tuple(a.value for a in GRID_ALGORITHMS)
    factors: tuple = DEFAULT_FACTORS
    segment_seconds: float = None
    folds: int = 10
    seed: int = 0
    lambdas: tuple = (5.0, 10.0, 20.0)
    output_dir: str = 'audit_output'
    threads: int = 1
    ranker_l2: float = 1.0
    ranker_folds: int = 5
    k_range: tuple = (2, 10)
    mds_dims: int = 3
    preselect_ratio: int = DEFAULT_PRESELECT_RATIO
    bench_warmup: int = 3
    bench_repeats: int = 5
    verbose: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        algorithms = []
        for name in self.algorithms:
            algorithm = Algorithm.parse(name)
            if algorithm is Algorithm.ORIGINAL:
                raise ConfigError("Original is always evaluated; it is not a grid algorithm")
            if algorithm.value not in algorithms:
                algorithms.append(algorithm.value)
        if not algorithms:
            raise ConfigError("at least one algorithm is required")
        self.algorithms = tuple(algorithms)

        try:
            factors = sorted({int(f) for f in self.factors})
        except (TypeError, ValueError):
            raise ConfigError(f"factors must be integers, got {self.factors!r}")
        if any(int(f) != f for f in self.factors):
            raise ConfigError(f"factors must be integers, got {self.factors!r}")
        # factor 1 is the identity cell; Original is still evaluated separately
        if not factors or factors[0] < 1:
            raise ConfigError(f"need >= 1 factor, all >= 1, got {list(self.factors)}")
        if len(factors) > MAX_FACTORS:
            raise ConfigError(f"at most {MAX_FACTORS} factors per algorithm, got {len(factors)}")
        self.factors = tuple(factors)

        if int(self.folds) < 2:
            raise ConfigError(f"folds must be >= 2, got {self.folds}")
        if int(self.threads) < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.segment_seconds is not None and not self.segment_seconds > 0:
            raise ConfigError(f"segment_seconds must be positive, got {self.segment_seconds}")
        if not self.lambdas or any(lam < 0 for lam in self.lambdas):
            raise ConfigError(f"lambdas must be non-negative, got {self.lambdas}")
        self.lambdas = tuple(float(lam) for lam in self.lambdas)
        if self.ranker_l2 < 0:
            raise ConfigError(f"ranker_l2 must be >= 0, got {self.ranker_l2}")
        if int(self.ranker_folds) < 2:
            raise ConfigError(f"ranker_folds must be >= 2, got {self.ranker_folds}")
        if len(self.k_range) != 2 or not 2 <= self.k_range[0] <= self.k_range[1]:
            raise ConfigError(f"k_range must be [low, high] with 2 <= low <= high, got {self.k_range}")
        self.k_range = tuple(int(k) for k in self.k_range)
        if self.mds_dims not in (2, 3):
            raise ConfigError(f"mds_dims must be 2 or 3, got {self.mds_dims}")
        if self.bench_repeats < 1 or self.bench_warmup < 0:
            raise ConfigError("bench_repeats must be >= 1 and bench_warmup >= 0")
        self._validate_dataset()

    def _validate_dataset(self):
        if not isinstance(self.dataset, dict):
            raise ConfigError("dataset must be an object")
        if 'synth' in self.dataset:
            synth = self.dataset['synth']
            if not synth.get('classes'):
                raise ConfigError("synth dataset needs >= 1 class")
            if not synth.get('sample_rate_hz', 0) > 0:
                raise ConfigError("synth dataset needs a positive sample_rate_hz")
            self.class_specs()
        elif 'path' in self.dataset:
            if self.dataset.get('format', 'raw-f64le') not in FORMATS:
                raise ConfigError(f"dataset format must be one of {FORMATS}")
        else:
            raise ConfigError("dataset needs either 'path' or 'synth'")

    @property
    def is_synthetic(self):
        return 'synth' in self.dataset

    def class_specs(self):
        classes = self.dataset['synth']['classes']
        return {str(name): MuapSpec.from_dict(spec) for name, spec in classes.items()}

    @property
    def k_values(self):
        return range(self.k_range[0], self.k_range[1] + 1)

    @classmethod
    def from_dict(cls, data):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        data = dict(data)
        for key in ('algorithms', 'factors', 'lambdas', 'k_range'):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data)

    @classmethod
    def from_file(cls, path):
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"config file not found: {path}")
        try:
            with open(path, 'r', encoding='utf-8') as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: invalid JSON: {e}")
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        for key in ('algorithms', 'factors', 'lambdas', 'k_range'):
            data[key] = list(data[key])
        return data

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied and re-validated."""
        changes = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **changes)


def load_config(path=None, **overrides):
    """Defaults < file < environment < ``overrides`` (CLI flags)."""
    config = WorkflowConfig.from_file(path) if path else WorkflowConfig()
    env_threads = _env_threads()
    if env_threads is not None:
        config = config.with_overrides(threads=env_threads)
    return config.with_overrides(**overrides)
