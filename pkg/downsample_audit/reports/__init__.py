"""
Report output for Downsample Audit.

- Artifact writer with the run manifest
- Row and document layouts of the artifacts
- SVG plots
"""

from . import records, svg
from .writer import ArtifactWriter

__all__ = [
    'ArtifactWriter',
    'records',
    'svg',
]
