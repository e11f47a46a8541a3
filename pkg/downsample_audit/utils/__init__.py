"""
Utility functions and helpers for Downsample Audit.

This module contains shared utilities:
- Console utilities for cross-platform compatibility
- The error hierarchy and its exit codes
"""

from . import console_utils, errors

__all__ = [
    'console_utils',
    'errors',
]
