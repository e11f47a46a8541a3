"""
Error hierarchy for Downsample Audit.
Every error carries the process exit code the CLI reports for it.
"""


class DownsampleAuditError(Exception):
    """Base class for all errors raised by the package."""

    exit_code = 4


class ConfigError(DownsampleAuditError):
    """Invalid workflow configuration or command-line flags."""

    exit_code = 2


class DataError(DownsampleAuditError):
    """Input data violates a precondition."""

    exit_code = 3


class FormatError(DataError):
    """Malformed manifest or data file."""


class IngestionError(DataError):
    """A data file could not be matched to a label."""


class SignalLengthError(DataError):
    """Signal too short for a filter, segment or group."""


class FactorTooLargeError(SignalLengthError):
    """Downsampling factor leaves fewer than two output points."""


class EmptyResultError(DataError):
    """An operation would produce nothing."""


class AlignmentError(DataError):
    """A downsampled signal carries no provenance to align on."""


class MetricError(DataError):
    """A distortion metric is undefined for one signal pair."""

    def __init__(self, metric, message):
        self.metric = metric
        super().__init__(f"{metric}: {message}")


class StratificationError(DataError):
    """Folds cannot be stratified with the available class counts."""


class InsufficientPairsError(DataError):
    """Not enough configuration pairs to train or evaluate a ranker."""


class ClusteringError(DataError):
    """Importance vectors are degenerate for clustering."""


class EmbeddingError(DataError):
    """Importance vectors are degenerate for an embedding."""


class PipelineError(DownsampleAuditError):
    """Internal failure inside the classification harness."""


class StepError(DownsampleAuditError):
    """Wraps a failure with the workflow step and grid cell it happened in."""

    def __init__(self, step, error, cell=None):
        self.step = step
        self.cell = cell
        self.error = error
        self.exit_code = getattr(error, 'exit_code', 4)
        where = f"{step} [{cell}]" if cell else step
        super().__init__(f"{where}: {error}")
