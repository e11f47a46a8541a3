#!/usr/bin/env python3
"""
Extraction-time speedup, Pareto front of time vs accuracy, and the
per-algorithm trade-off summary.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np

from ..utils.errors import DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpeedupRecord:
    t_orig: float
    t_ds: float
    S: float


@dataclass(frozen=True)
class ParetoPoint:
    config: object
    extraction_time_s: float
    mean_accuracy: float
    dominated: bool = False

    def __post_init__(self):
        if not self.extraction_time_s > 0:
            raise DataError(f"{self.config}: extraction time must be positive, "
                            f"got {self.extraction_time_s}")


def speedup(t_orig, t_ds):
    """S = t_orig / t_ds."""
    if not t_orig > 0 or not t_ds > 0:
        raise DataError(f"times must be positive, got t_orig={t_orig}, t_ds={t_ds}")
    return SpeedupRecord(float(t_orig), float(t_ds), float(t_orig) / float(t_ds))


def mark_dominated(points):
    """Every point, flagged dominated iff another is no slower and no less
    accurate, and strictly better in one of the two."""
    points = list(points)
    if not points:
        return []
    times = np.array([p.extraction_time_s for p in points])
    accs = np.array([p.mean_accuracy for p in points])
    order = np.lexsort((-accs, times))

    flags = np.zeros(len(points), dtype=bool)
    best_before = -np.inf
    start = 0
    while start < len(order):
        stop = start
        while stop < len(order) and times[order[stop]] == times[order[start]]:
            stop += 1
        group = order[start:stop]
        group_best = accs[group].max()
        for i in group:
            flags[i] = best_before >= accs[i] or group_best > accs[i]
        best_before = max(best_before, group_best)
        start = stop
    return [replace(p, dominated=bool(f)) for p, f in zip(points, flags)]


def pareto_front(points):
    """Non-dominated points, fastest first."""
    points = list(points)
    if not points:
        raise DataError("Pareto front needs >= 1 point")
    front = [p for p in mark_dominated(points) if not p.dominated]
    return sorted(front, key=lambda p: (p.extraction_time_s, -p.mean_accuracy))


@dataclass(frozen=True)
class TradeoffRow:
    algorithm: str
    factor: int
    critical_factor: int
    accuracy: tuple
    f1: tuple
    precision: tuple
    recall: tuple
    roc_auc: tuple
    speedup: float


def _pair(evaluation, field):
    return (evaluation.mean_of(field), evaluation.std_of(field))


def tradeoff_summary(evaluations, critical_factors, speedups):
    """One row per algorithm at its largest factor below the critical factor.

    ``evaluations`` includes the Original; ``critical_factors`` maps
    algorithm -> factor or None (then the largest evaluated factor is used);
    ``speedups`` maps config -> SpeedupRecord. The Original row comes first.
    """
    rows = []
    by_algorithm = {}
    original = None
    for evaluation in evaluations:
        if evaluation.config.is_original:
            original = evaluation
        else:
            by_algorithm.setdefault(evaluation.config.algorithm.value, []).append(evaluation)

    def row(evaluation, critical):
        record = speedups.get(evaluation.config)
        return TradeoffRow(
            algorithm=evaluation.config.algorithm.value,
            factor=evaluation.config.factor,
            critical_factor=critical,
            accuracy=_pair(evaluation, 'accuracy'),
            f1=_pair(evaluation, 'f1_macro'),
            precision=_pair(evaluation, 'precision_macro'),
            recall=_pair(evaluation, 'recall_macro'),
            roc_auc=_pair(evaluation, 'roc_auc_ovr'),
            speedup=record.S if record else None,
        )

    if original is not None:
        rows.append(row(original, None))
    for algorithm in sorted(by_algorithm):
        candidates = sorted(by_algorithm[algorithm], key=lambda e: e.config.factor)
        critical = critical_factors.get(algorithm)
        below = [e for e in candidates if critical is None or e.config.factor < critical]
        if not below:
            logger.info("%s degrades at its smallest factor", algorithm)
            continue
        rows.append(row(below[-1], critical))
    return rows
