#!/usr/bin/env python3
"""
Friedman test, Nemenyi critical difference and critical-factor detection.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, rankdata

from ..utils.errors import ConfigError, DataError

logger = logging.getLogger(__name__)

# Studentized range q_0.05(K, inf) / sqrt(2) for K = 2..30, from the
# standard studentized-range tables.
NEMENYI_Q05 = (
    1.959964, 2.343700, 2.569032, 2.727775, 2.849705, 2.948320, 3.030879,
    3.102158, 3.164291, 3.219222, 3.268355, 3.312739, 3.353180, 3.390308,
    3.424619, 3.456518, 3.486314, 3.514264, 3.540582, 3.565460, 3.589044,
    3.611454, 3.632795, 3.653160, 3.672629, 3.691274, 3.709156, 3.726335,
    3.742856,
)


@dataclass(frozen=True)
class FriedmanResult:
    statistic: float
    p_value: float
    mean_ranks: tuple


@dataclass(frozen=True)
class CriticalFactorResult:
    factor: int
    statistic: float
    p_value: float
    critical_difference: float
    rank_gaps: dict

    @property
    def significant(self):
        return self.factor is not None


def _as_matrix(matrix):
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 2 or matrix.shape[1] < 2:
        raise DataError(f"accuracy matrix needs >= 2 folds and >= 2 treatments, "
                        f"got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise DataError("accuracy matrix has missing entries")
    return matrix


def friedman_statistic(matrix):
    """Tie-corrected Friedman chi-square and the mean rank of every column."""
    n, k = matrix.shape
    ranks = rankdata(matrix, axis=1)
    mean_ranks = ranks.mean(axis=0)
    rank_sums = ranks.sum(axis=0)

    ties = 0.0
    for row in ranks:
        _, counts = np.unique(row, return_counts=True)
        ties += float(np.sum(counts ** 3 - counts))
    correction = 1.0 - ties / (n * k * (k * k - 1))
    if correction <= 0:
        return 0.0, mean_ranks

    statistic = 12.0 / (n * k * (k + 1)) * np.sum(rank_sums ** 2) - 3.0 * n * (k + 1)
    return max(float(statistic / correction), 0.0), mean_ranks


def friedman_test(matrix):
    """Friedman test over rows = folds, columns = treatments."""
    matrix = _as_matrix(matrix)
    statistic, mean_ranks = friedman_statistic(matrix)
    if statistic == 0.0:
        return FriedmanResult(0.0, 1.0, tuple(mean_ranks.tolist()))
    p_value = float(chi2.sf(statistic, matrix.shape[1] - 1))
    return FriedmanResult(statistic, p_value, tuple(mean_ranks.tolist()))


def friedman_permutation_p(matrix, n_permutations=10000, seed=0):
    """Monte-Carlo p-value of the Friedman statistic, permuting within rows."""
    matrix = _as_matrix(matrix)
    observed, _ = friedman_statistic(matrix)
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(n_permutations):
        shuffled = rng.permuted(matrix, axis=1)
        if friedman_statistic(shuffled)[0] >= observed - 1e-12:
            hits += 1
    return hits / n_permutations


def nemenyi_critical_difference(k, n, alpha=0.05):
    """CD = q_alpha(K) * sqrt(K (K + 1) / (6 n))."""
    if alpha != 0.05:
        raise ConfigError(f"only alpha = 0.05 is tabulated, got {alpha}")
    if not 2 <= k <= len(NEMENYI_Q05) + 1:
        raise DataError(f"Nemenyi table covers 2..{len(NEMENYI_Q05) + 1} treatments, got {k}")
    if n < 1:
        raise DataError(f"need >= 1 fold, got {n}")
    return NEMENYI_Q05[k - 2] * math.sqrt(k * (k + 1) / (6.0 * n))


def critical_factor_test(per_algorithm, original, alpha=0.05):
    """Friedman over {Original} and one algorithm's factors, then Nemenyi.

    ``per_algorithm`` maps factor -> per-fold accuracies. When the Friedman
    test is significant, the first factor (ascending) whose mean-rank gap to
    the Original exceeds the critical difference is reported.
    """
    factors = sorted(per_algorithm)
    if not factors:
        raise DataError("critical factor needs >= 1 factor")
    columns = [np.asarray(original, dtype=np.float64)]
    columns += [np.asarray(per_algorithm[f], dtype=np.float64) for f in factors]
    if len({c.size for c in columns}) != 1:
        raise DataError("every treatment needs the same number of folds")
    matrix = _as_matrix(np.column_stack(columns))

    result = friedman_test(matrix)
    n, k = matrix.shape
    cd = nemenyi_critical_difference(k, n, alpha)
    ranks = np.array(result.mean_ranks)
    gaps = {f: float(abs(ranks[i + 1] - ranks[0])) for i, f in enumerate(factors)}

    factor = None
    if result.p_value < alpha:
        factor = next((f for f in factors if gaps[f] > cd), None)
    return CriticalFactorResult(factor, result.statistic, result.p_value, cd, gaps)


def critical_factor(per_algorithm, original, alpha=0.05):
    """First factor significantly different from the Original, or None."""
    return critical_factor_test(per_algorithm, original, alpha).factor
