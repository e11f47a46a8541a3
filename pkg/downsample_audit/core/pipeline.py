#!/usr/bin/env python3
"""
Cross-validated classification harness.

Per fold: ANOVA F-score feature selection on the train split, z-scoring
with train statistics, a distance-weighted 5-NN classifier, macro metrics,
per-class sensitivity/specificity and permutation importance on the
validation split.
"""

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from sklearn.feature_selection import f_classif
from sklearn.inspection import permutation_importance
from sklearn.metrics import (
    accuracy_score, confusion_matrix, f1_score, precision_score, recall_score, roc_auc_score,
)
from sklearn.model_selection import StratifiedGroupKFold, StratifiedKFold
from sklearn.neighbors import KNeighborsClassifier
from sklearn.pipeline import make_pipeline
from sklearn.preprocessing import StandardScaler

from ..utils.errors import StratificationError

logger = logging.getLogger(__name__)

MIN_SELECTED = 4
N_NEIGHBORS = 5
PERMUTATION_REPEATS = 5


@dataclass(frozen=True, eq=False)
class FoldResults:
    fold_id: int
    accuracy: float
    f1_macro: float
    precision_macro: float
    recall_macro: float
    per_class: dict
    selected_features: frozenset
    feature_importances: dict
    extraction_time_s: float
    confusion: np.ndarray = None
    roc_auc_ovr: float = None
    undefined_rates: tuple = ()
    # validation predictions, in val_idx order
    predictions: tuple = ()


@dataclass(frozen=True, eq=False)
class ConfigEvaluation:
    config: object
    folds: tuple
    mean_accuracy: float
    std_accuracy: float

    @property
    def accuracies(self):
        return np.array([f.accuracy for f in self.folds])

    @property
    def extraction_time_s(self):
        return float(sum(f.extraction_time_s for f in self.folds))

    def mean_of(self, field):
        values = [getattr(f, field) for f in self.folds]
        if any(v is None for v in values):
            return None
        return float(np.mean(values))

    def std_of(self, field):
        values = [getattr(f, field) for f in self.folds]
        if any(v is None for v in values):
            return None
        return float(np.std(values))


def select_features(train_features, train_labels, feature_names, minimum=MIN_SELECTED):
    """Names whose F-score exceeds the median F-score, at least ``minimum``.

    Ties rank by name. Constant features score 0.
    """
    if len(np.unique(train_labels)) < 2:
        raise StratificationError("feature selection needs >= 2 classes in the train split")
    with warnings.catch_warnings(), np.errstate(divide='ignore', invalid='ignore'):
        warnings.simplefilter('ignore')
        scores, _ = f_classif(train_features, train_labels)
    scores = np.nan_to_num(scores, nan=0.0, posinf=np.finfo(np.float64).max)

    median = np.median(scores)
    order = sorted(range(len(feature_names)), key=lambda i: (-scores[i], feature_names[i]))
    chosen = [i for i in order if scores[i] > median]
    if len(chosen) < minimum:
        chosen = order[:min(minimum, len(order))]
    return frozenset(feature_names[i] for i in chosen)


def class_rates(confusion):
    """Per-class (sensitivity, specificity) by index, and the indices where
    either rate was 0/0."""
    confusion = np.asarray(confusion, dtype=np.float64)
    total = confusion.sum()
    rates, undefined = [], []
    for c in range(confusion.shape[0]):
        tp = confusion[c, c]
        fn = confusion[c, :].sum() - tp
        fp = confusion[:, c].sum() - tp
        tn = total - tp - fn - fp
        sens = tp / (tp + fn) if tp + fn > 0 else 0.0
        spec = tn / (tn + fp) if tn + fp > 0 else 0.0
        if tp + fn == 0 or tn + fp == 0:
            undefined.append(c)
        rates.append((float(sens), float(spec)))
    return rates, undefined


def per_class_rates(confusion, class_names=None):
    """Map class -> (sensitivity, specificity); rows of ``confusion`` are truth.

    0/0 rates are reported as 0 and logged.
    """
    confusion = np.asarray(confusion)
    if confusion.ndim != 2 or confusion.shape[0] != confusion.shape[1]:
        raise ValueError(f"confusion matrix must be square, got shape {confusion.shape}")
    names = list(class_names) if class_names is not None else list(range(confusion.shape[0]))
    rates, undefined = class_rates(confusion)
    if undefined:
        logger.info("undefined rates set to 0 for classes %s", [names[i] for i in undefined])
    return {name: rate for name, rate in zip(names, rates)}


def _roc_auc(model, features, labels):
    classes = model.classes_
    if len(np.unique(labels)) != len(classes):
        return None
    proba = model.predict_proba(features)
    if len(classes) == 2:
        return float(roc_auc_score(labels == classes[1], proba[:, 1]))
    return float(roc_auc_score(labels, proba, multi_class='ovr', average='macro', labels=classes))


def run_fold(table, train_idx, val_idx, fold_id, seed):
    """Evaluate one train/validation split of ``table``."""
    names = table.feature_names
    x_train, y_train = table.matrix[train_idx], table.labels[train_idx]
    x_val, y_val = table.matrix[val_idx], table.labels[val_idx]

    selected = select_features(x_train, y_train, names)
    columns = [i for i, name in enumerate(names) if name in selected]

    model = make_pipeline(
        StandardScaler(),
        KNeighborsClassifier(n_neighbors=min(N_NEIGHBORS, len(train_idx)), weights='distance'),
    )
    model.fit(x_train[:, columns], y_train)
    predicted = model.predict(x_val[:, columns])

    labels = list(table.class_names)
    confusion = confusion_matrix(y_val, predicted, labels=labels)
    rates, undefined = class_rates(confusion)

    importance = permutation_importance(
        model, x_val[:, columns], y_val, scoring='accuracy',
        n_repeats=PERMUTATION_REPEATS, random_state=seed + fold_id,
    ).importances_mean
    importances = {name: 0.0 for name in names}
    for column, value in zip(columns, importance):
        importances[names[column]] = max(0.0, float(value))

    times = table.extraction_times
    return FoldResults(
        fold_id=fold_id,
        accuracy=float(accuracy_score(y_val, predicted)),
        f1_macro=float(f1_score(y_val, predicted, labels=labels, average='macro', zero_division=0)),
        precision_macro=float(precision_score(y_val, predicted, labels=labels,
                                              average='macro', zero_division=0)),
        recall_macro=float(recall_score(y_val, predicted, labels=labels,
                                        average='macro', zero_division=0)),
        per_class=dict(zip(labels, rates)),
        selected_features=selected,
        feature_importances=importances,
        extraction_time_s=float(times[val_idx].sum()) if times is not None else 0.0,
        confusion=confusion,
        roc_auc_ovr=_roc_auc(model, x_val[:, columns], y_val),
        undefined_rates=tuple(labels[i] for i in undefined),
        predictions=tuple(predicted.tolist()),
    )


def fold_splits(table, folds, seed):
    """Deterministic stratified splits; group-aware when groups are known."""
    if folds < 2:
        raise StratificationError(f"need >= 2 folds, got {folds}")
    counts = {name: int(np.sum(table.labels == name)) for name in table.class_names}
    short = {name: count for name, count in counts.items() if count < folds}
    if short:
        raise StratificationError(f"classes with fewer than {folds} members: {short}")

    placeholder = np.zeros(len(table.labels))
    if table.groups is not None and len(np.unique(table.groups)) < len(table.labels):
        if len(np.unique(table.groups)) < folds:
            raise StratificationError(f"{len(np.unique(table.groups))} groups cannot fill {folds} folds")
        splitter = StratifiedGroupKFold(n_splits=folds, shuffle=True, random_state=seed)
        return list(splitter.split(placeholder, table.labels, table.groups))
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(placeholder, table.labels))


def cross_validate(table, folds, seed, config=None, workers=1):
    """Stratified k-fold evaluation of one feature table."""
    splits = fold_splits(table, folds, seed)

    def evaluate(args):
        fold_id, (train_idx, val_idx) = args
        return run_fold(table, train_idx, val_idx, fold_id, seed)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            results = list(executor.map(evaluate, enumerate(splits)))
    else:
        results = [evaluate(item) for item in enumerate(splits)]

    accuracies = np.array([r.accuracy for r in results])
    evaluation = ConfigEvaluation(config, tuple(results), float(accuracies.mean()),
                                  float(accuracies.std()))
    logger.debug("%s: accuracy %.3f +/- %.3f", config, evaluation.mean_accuracy,
                 evaluation.std_accuracy)
    return evaluation
