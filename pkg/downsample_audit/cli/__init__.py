"""
Command-line interface for Downsample Audit.

This module provides the main CLI entry point and the workflow config.
"""

# Import CLI classes
try:
    from .config import WorkflowConfig
    from .main import DownsampleAuditCLI
except ImportError:
    # Handle missing dependencies gracefully
    pass

__all__ = [
    'DownsampleAuditCLI',
    'WorkflowConfig',
]
