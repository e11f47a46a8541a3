"""
Core functionality for Downsample Audit.

This module contains the processing components:
- Signals, datasets, MUAP synthesis and ingestion
- The five downsamplers and the configuration grid
- Shape-distortion metric profiles
- Feature extraction and the cross-validated classifier
- The pairwise configuration ranker
- Statistics, trade-offs and feature-space analysis
"""

# Import main classes
try:
    from .signal import LabeledDataset, MuapSpec, Signal
    from .downsamplers import Algorithm, DownsampleConfig, GridResult
    from .metrics import ConfigMetricSummary, MetricVector
    from .features import FeatureTable, FeatureVector
    from .pipeline import ConfigEvaluation, FoldResults
    from .ranking import PairSample, RankerModel
    from .statistics import CriticalFactorResult, FriedmanResult
    from .tradeoff import ParetoPoint, SpeedupRecord
    from .feature_space import ClusteringResult, Embedding, ImportanceVector
except ImportError:
    # Handle missing dependencies gracefully
    pass

__all__ = [
    'Signal',
    'LabeledDataset',
    'MuapSpec',
    'Algorithm',
    'DownsampleConfig',
    'GridResult',
    'MetricVector',
    'ConfigMetricSummary',
    'FeatureVector',
    'FeatureTable',
    'FoldResults',
    'ConfigEvaluation',
    'PairSample',
    'RankerModel',
    'FriedmanResult',
    'CriticalFactorResult',
    'SpeedupRecord',
    'ParetoPoint',
    'ImportanceVector',
    'ClusteringResult',
    'Embedding',
]
