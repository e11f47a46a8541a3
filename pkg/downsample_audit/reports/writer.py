#!/usr/bin/env python3
"""
Artifact writer: CSV/JSON/text outputs of a workflow run and the
manifest.json that lists every emitted file with its SHA-256.
"""

import csv
import hashlib
import io
import json
import logging
from pathlib import Path

import numpy as np

from ..utils.errors import DataError, FormatError

logger = logging.getLogger(__name__)

MANIFEST_NAME = 'manifest.json'
TIMING_DIR = 'timing'


def _plain(value):
    """numpy scalars/arrays to plain Python for csv and json."""
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"cannot serialize {type(value).__name__}")


def _cell(value):
    if value is None:
        return ''
    if isinstance(value, (np.generic, np.ndarray)):
        value = _plain(value)
    return value


def dump_json(data):
    return json.dumps(data, sort_keys=True, indent=2, default=_plain, allow_nan=False) + '\n'


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for chunk in iter(lambda: f.read(1 << 16), b''):
            digest.update(chunk)
    return digest.hexdigest()


class ArtifactWriter:
    """Writes into one output directory and keeps its manifest current.

    An existing manifest is extended, so separate subcommands pointed at
    the same directory share one manifest. Files under ``timing/`` hold
    measured wall times and are flagged as such.
    """

    def __init__(self, out_dir):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest_path = self.out_dir / MANIFEST_NAME
        self.entries = self._load_manifest()

    def _load_manifest(self):
        if not self.manifest_path.exists():
            return {}
        try:
            with open(self.manifest_path, 'r', encoding='utf-8') as f:
                return dict(json.load(f).get('files', {}))
        except (json.JSONDecodeError, AttributeError) as e:
            raise FormatError(f"{self.manifest_path}: unreadable manifest: {e}") from e

    def path(self, relpath):
        target = self.out_dir / relpath
        target.parent.mkdir(parents=True, exist_ok=True)
        return target

    def record(self, relpath):
        relpath = Path(relpath).as_posix()
        self.entries[relpath] = {
            'sha256': sha256_file(self.out_dir / relpath),
            'timing': relpath.startswith(TIMING_DIR + '/'),
        }
        logger.debug("wrote %s", relpath)
        return self.out_dir / relpath

    def write_text(self, relpath, text):
        with open(self.path(relpath), 'w', encoding='utf-8', newline='\n') as f:
            f.write(text)
        return self.record(relpath)

    def write_csv(self, relpath, fieldnames, rows):
        buffer = io.StringIO(newline='')
        writer = csv.DictWriter(buffer, fieldnames=list(fieldnames), lineterminator='\n')
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _cell(row.get(key)) for key in fieldnames})
        return self.write_text(relpath, buffer.getvalue())

    def write_json(self, relpath, data):
        return self.write_text(relpath, dump_json(data))

    def record_tree(self, relpath):
        """Record every file below a directory written by someone else."""
        root = self.out_dir / relpath
        for path in sorted(p for p in root.rglob('*') if p.is_file()):
            self.record(path.relative_to(self.out_dir))

    def save_manifest(self):
        entries = {path: entry for path, entry in sorted(self.entries.items())
                   if (self.out_dir / path).exists()}
        with open(self.manifest_path, 'w', encoding='utf-8', newline='\n') as f:
            f.write(dump_json({'files': entries}))
        return self.manifest_path

    def structured_files(self):
        """Recorded CSV/JSON paths that carry no measured times."""
        return sorted(path for path, entry in self.entries.items()
                      if not entry['timing'] and path.endswith(('.csv', '.json')))


def require(directory, relpath):
    path = Path(directory) / relpath
    if not path.is_file():
        raise DataError(f"missing artifact: {path}")
    return path


def read_csv(directory, relpath):
    with open(require(directory, relpath), 'r', encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def read_json(directory, relpath):
    path = require(directory, relpath)
    try:
        with open(path, 'r', encoding='utf-8') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: invalid JSON: {e}") from e
