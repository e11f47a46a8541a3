"""Shared fixtures for the downsample_audit test suite."""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the repository root to the path, as the wrapper script does
sys.path.insert(0, str(Path(__file__).parent.parent))

from downsample_audit.core.signal import MuapSpec, Signal, synth_dataset, synth_muap_signal


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def sine():
    """10 Hz unit sine sampled at 1 kHz for 2 s."""
    t = np.arange(2000) / 1000.0
    return Signal(np.sin(2 * np.pi * 10 * t), 1000.0)


@pytest.fixture
def muap_spec():
    """Triphasic wavelets narrow enough that their energy sits above most decimation cutoffs."""
    return MuapSpec(n_phases=3, peak_amplitude=1.0, phase_width_s=0.0004,
                    firing_rate_hz=10.0, noise_std=0.05, duration_s=1.0, seed=4)


@pytest.fixture
def muap_signal(muap_spec):
    return synth_muap_signal(muap_spec, 10000.0)


@pytest.fixture
def separable_dataset():
    """Three MUAP classes that differ only in amplitude."""
    base = dict(n_phases=3, phase_width_s=0.002, firing_rate_hz=12.0,
                noise_std=0.05, duration_s=0.4)
    specs = {
        'small': MuapSpec(peak_amplitude=0.5, **base),
        'medium': MuapSpec(peak_amplitude=1.0, **base),
        'large': MuapSpec(peak_amplitude=2.0, **base),
    }
    return synth_dataset(specs, 10, 5000.0, seed=3)


@pytest.fixture
def firing_rate_dataset():
    """Three monophasic MUAP classes that differ only in firing rate."""
    base = dict(n_phases=1, peak_amplitude=1.0, phase_width_s=0.004,
                noise_std=0.01, duration_s=1.0)
    specs = {
        'slow': MuapSpec(firing_rate_hz=8.0, **base),
        'medium': MuapSpec(firing_rate_hz=16.0, **base),
        'fast': MuapSpec(firing_rate_hz=24.0, **base),
    }
    return synth_dataset(specs, 10, 10000.0, seed=5)
