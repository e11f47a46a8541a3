#!/usr/bin/env python3
"""
Console utilities shared by the CLI.
Handles encoding issues, banners and logging setup.
"""

import sys
import locale
import logging


def setup_console_encoding():
    """Reconfigure stdout/stderr to UTF-8 where the platform allows it."""
    for stream in (sys.stdout, sys.stderr):
        try:
            stream.reconfigure(encoding='utf-8', errors='replace')
        except (AttributeError, OSError, ValueError):
            # Captured or already-detached streams
            pass


def safe_print(*args, **kwargs):
    """Print function that handles encoding errors gracefully."""
    try:
        print(*args, **kwargs)
    except UnicodeEncodeError:
        safe_args = []
        for arg in args:
            text = arg if isinstance(arg, str) else str(arg)
            safe_args.append(text.encode('ascii', 'replace').decode('ascii'))
        print(*safe_args, **kwargs)


def print_banner(title, width=50):
    """Print a section title underlined with '='."""
    safe_print(title)
    safe_print("=" * width)


def print_step(number, text):
    safe_print(f"\nStep {number}: {text}...")


def setup_logging(verbose=False):
    """Configure the root logger once; DEBUG when verbose, WARNING otherwise."""
    level = logging.DEBUG if verbose else logging.WARNING
    root = logging.getLogger()
    if not root.handlers:
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
        root.addHandler(handler)
    root.setLevel(level)


def init_console():
    """Initialize console with proper encoding."""
    setup_console_encoding()

    try:
        locale.setlocale(locale.LC_ALL, '')
    except locale.Error:
        pass
