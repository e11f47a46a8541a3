#!/usr/bin/env python3
"""
Downsample Audit - Master script for downsampling information-loss audits.
Simple wrapper that imports the main CLI functionality from the package.
"""

import sys
from pathlib import Path

# Add the current directory to Python path for package imports
sys.path.insert(0, str(Path(__file__).parent))


def main():
    """Main entry point that delegates to the CLI package."""
    try:
        from downsample_audit.cli.main import main as cli_main
    except ImportError as e:
        print(f"ERROR: Failed to import CLI module: {e}")
        print("Please install the requirements: pip install -r requirements.txt")
        sys.exit(1)
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
