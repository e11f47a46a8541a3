#!/usr/bin/env python3
"""
Pairwise ranking of downsampling configurations from their metric summaries.

Each pair of configurations becomes one sample: the difference of their mean
metric vectors and whether the first configuration classified better. A
regularized logistic model learns which distortions predict accuracy loss;
configurations are then ranked by how many pairwise comparisons they win.
"""

import logging
import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.special import expit
from scipy.stats import kendalltau
from sklearn.linear_model import LogisticRegression
from sklearn.model_selection import KFold

from .metrics import METRIC_NAMES
from ..utils.errors import ConfigError, DataError, EmptyResultError, InsufficientPairsError

logger = logging.getLogger(__name__)

DEFAULT_LAMBDAS = (5.0, 10.0, 20.0)
MIN_TRAINING_PAIRS = 10


@dataclass(frozen=True, eq=False)
class PairSample:
    config_a: object
    config_b: object
    metric_delta: np.ndarray
    label: int
    accuracy_delta: float


@dataclass(frozen=True, eq=False)
class PairSet:
    pairs: tuple
    dropped_ties: int = 0

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def __getitem__(self, index):
        return self.pairs[index]

    def deltas(self):
        return np.array([p.metric_delta for p in self.pairs])

    def labels(self):
        return np.array([p.label for p in self.pairs])


@dataclass(frozen=True, eq=False)
class RankerModel:
    weights: np.ndarray
    bias: float
    delta_mean: np.ndarray
    delta_std: np.ndarray
    metric_names: tuple = METRIC_NAMES

    def standardize(self, deltas):
        return (np.asarray(deltas, dtype=np.float64) - self.delta_mean) / self.delta_std

    def score(self, deltas):
        return self.standardize(deltas) @ self.weights + self.bias

    def predict_proba(self, deltas):
        """Probability that the first configuration of each pair wins."""
        return expit(self.score(deltas))

    def to_dict(self):
        return {
            'metric_names': list(self.metric_names),
            'weights': self.weights.tolist(),
            'bias': self.bias,
            'delta_mean': self.delta_mean.tolist(),
            'delta_std': self.delta_std.tolist(),
        }

    @classmethod
    def from_dict(cls, data):
        return cls(np.array(data['weights']), float(data['bias']),
                   np.array(data['delta_mean']), np.array(data['delta_std']),
                   tuple(data.get('metric_names', METRIC_NAMES)))


@dataclass(frozen=True)
class RankedConfig:
    """A configuration and the value it is ordered by (wins or accuracy)."""

    config: object
    value: float


@dataclass(frozen=True)
class RankEvaluation:
    kendall_tau: float
    weighted_accuracy: dict
    plain_accuracy: float
    n_pairs: int = 0
    dropped_ties: int = 0


def _keyed(items, what):
    keyed = {}
    for item in items:
        if item.config in keyed:
            raise DataError(f"duplicate configuration {item.config} in {what}")
        keyed[item.config] = item
    return keyed


def build_pairs(summaries, evaluations):
    """Every unordered configuration pair, first member in summary order.

    Pairs whose mean accuracies are exactly equal are dropped and counted.
    """
    by_summary = _keyed(summaries, 'metric summaries')
    by_evaluation = _keyed(evaluations, 'evaluations')
    if set(by_summary) != set(by_evaluation):
        missing = set(by_summary) ^ set(by_evaluation)
        raise DataError(f"summaries and evaluations cover different configurations: "
                        f"{sorted(str(c) for c in missing)}")
    if len(by_summary) < 2:
        raise InsufficientPairsError("pairing needs >= 2 configurations")

    configs = [s.config for s in summaries]
    pairs, ties = [], 0
    for a, b in combinations(configs, 2):
        acc_a = by_evaluation[a].mean_accuracy
        acc_b = by_evaluation[b].mean_accuracy
        if acc_a == acc_b:
            ties += 1
            continue
        delta = by_summary[a].mean_metrics.to_array() - by_summary[b].mean_metrics.to_array()
        pairs.append(PairSample(a, b, delta, int(acc_a > acc_b), abs(acc_a - acc_b)))

    if ties:
        logger.info("dropped %d tied configuration pairs", ties)
    return PairSet(tuple(pairs), ties)


def train_ranker(pairs, l2=1.0, seed=0, fit_bias=True):
    """L2-regularized logistic model on standardized metric deltas.

    Every pair is mirrored, (delta, label) and (-delta, 1 - label), so the
    deltas are centred on zero and the learned score is antisymmetric up to
    the bias. Optimized with lbfgs from a zero start.
    """
    pairs = list(pairs)
    if len(pairs) < MIN_TRAINING_PAIRS:
        raise InsufficientPairsError(f"ranker needs >= {MIN_TRAINING_PAIRS} pairs, got {len(pairs)}")
    labels = np.array([p.label for p in pairs])
    if labels.min() == labels.max():
        raise InsufficientPairsError("ranker needs pairs with both outcomes")
    if l2 < 0:
        raise ConfigError(f"l2 must be >= 0, got {l2}")

    deltas = np.array([p.metric_delta for p in pairs], dtype=np.float64)
    mean = np.zeros(deltas.shape[1])
    std = np.sqrt(np.mean(deltas ** 2, axis=0))
    std[std == 0] = 1.0

    z = deltas / std
    x = np.vstack([z, -z])
    y = np.concatenate([labels, 1 - labels])

    learner = LogisticRegression(
        penalty='l2' if l2 > 0 else None,
        C=1.0 / l2 if l2 > 0 else 1.0,
        fit_intercept=fit_bias,
        tol=1e-8,
        max_iter=10000,
        solver='lbfgs',
        random_state=seed,
    )
    learner.fit(x, y)
    bias = float(learner.intercept_[0]) if fit_bias else 0.0
    return RankerModel(learner.coef_[0].astype(np.float64), bias, mean, std)


def rank_by_wins(model, summaries):
    """Configurations by descending pairwise wins; ties by (algorithm, factor).

    Every configuration meets every other once; a probability of exactly
    0.5 is a draw and scores no win.
    """
    summaries = list(summaries)
    if len(summaries) < 2:
        raise InsufficientPairsError("ranking needs >= 2 configurations")
    means = np.array([s.mean_metrics.to_array() for s in summaries])
    wins = np.zeros(len(summaries), dtype=int)
    for i, j in combinations(range(len(summaries)), 2):
        p = model.predict_proba(means[i] - means[j])
        if p > 0.5:
            wins[i] += 1
        elif p < 0.5:
            wins[j] += 1
    ranked = [RankedConfig(s.config, int(w)) for s, w in zip(summaries, wins)]
    return sorted(ranked, key=lambda r: (-r.value, r.config.sort_key()))


def true_ranking(evaluations):
    """Configurations by descending mean accuracy."""
    ranked = [RankedConfig(e.config, e.mean_accuracy) for e in evaluations]
    return sorted(ranked, key=lambda r: (-r.value, r.config.sort_key()))


def _rank_values(ranking):
    """Config -> orderable value; plain configs are valued by position."""
    values = {}
    for position, item in enumerate(ranking):
        if isinstance(item, RankedConfig):
            values[item.config] = float(item.value)
        else:
            values[item] = -float(position)
    return values


def kendall_tau(rank_a, rank_b):
    """Tau-b between two rankings of the same configurations.

    Rankings are sequences of configurations (best first) or of
    RankedConfig, whose values carry ties.
    """
    a, b = _rank_values(rank_a), _rank_values(rank_b)
    if set(a) != set(b):
        raise DataError("rankings cover different configurations")
    order = list(a)
    tau = kendalltau([a[c] for c in order], [b[c] for c in order], variant='b').statistic
    if tau is None or math.isnan(tau):
        return 0.0
    return float(tau)


def weighted_accuracy(predictions, lam):
    """sum(w * C) / sum(w) with w = exp(-lam * delta) over (C, delta) pairs."""
    predictions = list(predictions)
    if not predictions:
        raise EmptyResultError("weighted accuracy needs >= 1 prediction")
    if lam < 0:
        raise ConfigError(f"lambda must be >= 0, got {lam}")
    correct = np.array([c for c, _ in predictions], dtype=np.float64)
    weights = np.exp(-lam * np.array([d for _, d in predictions], dtype=np.float64))
    return float(np.sum(weights * correct) / np.sum(weights))


def attribution(model, pair):
    """Exact additive contribution of every metric to the pair's score.

    The contributions sum to score - bias.
    """
    delta = pair.metric_delta if isinstance(pair, PairSample) else pair
    contributions = model.weights * model.standardize(delta)
    return dict(zip(model.metric_names, contributions.tolist()))


def mean_abs_attribution(model, pairs):
    """Mean |contribution| per metric over ``pairs``."""
    deltas = np.array([p.metric_delta for p in pairs])
    if deltas.size == 0:
        raise EmptyResultError("attribution summary needs >= 1 pair")
    contributions = np.abs(model.standardize(deltas) * model.weights)
    return dict(zip(model.metric_names, contributions.mean(axis=0).tolist()))


def evaluate_ranker(pairs, summaries, evaluations, lambdas=DEFAULT_LAMBDAS,
                    folds=5, seed=0, l2=1.0, fit_bias=True):
    """Held-out pair accuracy by k-fold over pairs, plus tau of the full fit.

    Plain and weighted accuracy come from models trained on the other folds;
    Kendall's tau compares the win ranking of a model fit on every pair with
    the ranking by measured accuracy.
    """
    pair_list = list(pairs)
    n = len(pair_list)
    if n < folds or folds < 2:
        raise InsufficientPairsError(f"{n} pairs cannot fill {folds} folds")

    outcomes = []
    splitter = KFold(n_splits=folds, shuffle=True, random_state=seed)
    for train_idx, test_idx in splitter.split(np.zeros(n)):
        model = train_ranker([pair_list[i] for i in train_idx], l2=l2, seed=seed, fit_bias=fit_bias)
        test = [pair_list[i] for i in test_idx]
        proba = model.predict_proba(np.array([p.metric_delta for p in test]))
        for p, prob in zip(test, np.atleast_1d(proba)):
            outcomes.append((int((prob > 0.5) == bool(p.label)), p.accuracy_delta))

    full = train_ranker(pair_list, l2=l2, seed=seed, fit_bias=fit_bias)
    tau = kendall_tau(rank_by_wins(full, summaries), true_ranking(evaluations))
    return RankEvaluation(
        kendall_tau=tau,
        weighted_accuracy={float(lam): weighted_accuracy(outcomes, lam) for lam in lambdas},
        plain_accuracy=float(np.mean([c for c, _ in outcomes])),
        n_pairs=n,
        dropped_ties=getattr(pairs, 'dropped_ties', 0),
    )
