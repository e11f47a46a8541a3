"""
Downsample Audit - information-loss auditing for time-series downsampling.

This package applies a grid of downsampling configurations to labeled
signals, profiles their shape distortion, measures what a feature-based
classifier loses, learns to rank configurations from distortion alone and
analyzes the resulting speed/accuracy trade-offs.
"""

__version__ = "1.0.0"
__author__ = "Downsample Audit Contributors"

# Import main classes for convenience
try:
    from .core.signal import LabeledDataset, MuapSpec, Signal
    from .core.downsamplers import Algorithm, DownsampleConfig
    from .core.metrics import ConfigMetricSummary, MetricVector
    from .core.pipeline import ConfigEvaluation
    from .core.ranking import RankerModel
    from .cli.config import WorkflowConfig
except ImportError:
    # The numeric stack might not be installed
    pass

__all__ = [
    'Signal',
    'LabeledDataset',
    'MuapSpec',
    'Algorithm',
    'DownsampleConfig',
    'MetricVector',
    'ConfigMetricSummary',
    'ConfigEvaluation',
    'RankerModel',
    'WorkflowConfig',
]
