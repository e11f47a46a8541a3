#!/usr/bin/env python3
"""
Row and document layouts of the run artifacts, and their readers.

Measured times never enter these layouts; they go to timing/ only, so
every file built here is a deterministic function of config and seed.
"""

import numpy as np

from ..core.downsamplers import DownsampleConfig
from ..core.metrics import METRIC_NAMES, ConfigMetricSummary, MetricVector
from ..core.pipeline import ConfigEvaluation, FoldResults
from ..utils.errors import FormatError

CONFIG_FIELDS = ('algorithm', 'factor')
SUMMARY_FIELDS = (CONFIG_FIELDS + ('preselect_ratio', 'n_pairs', 'n_excluded')
                  + tuple(f"mean_{m}" for m in METRIC_NAMES)
                  + tuple(f"std_{m}" for m in METRIC_NAMES))
FOLD_FIELDS = CONFIG_FIELDS + ('fold', 'accuracy', 'f1_macro', 'precision_macro',
                               'recall_macro', 'roc_auc_ovr', 'n_selected')
PER_CLASS_FIELDS = CONFIG_FIELDS + ('fold', 'class', 'sensitivity', 'specificity', 'undefined')
CONFUSION_FIELDS = CONFIG_FIELDS + ('fold', 'true_class', 'predicted_class', 'count')
ACCURACY_FIELDS = CONFIG_FIELDS + ('label', 'mean_accuracy', 'std_accuracy')


def config_cells(config):
    return {'algorithm': config.algorithm.value, 'factor': config.factor}


def summary_row(summary):
    row = config_cells(summary.config)
    row['preselect_ratio'] = summary.config.preselect_ratio
    row['n_pairs'] = summary.n_pairs
    row['n_excluded'] = summary.n_excluded
    for name, value in summary.mean_metrics.as_dict().items():
        row[f"mean_{name}"] = value
    for name, value in summary.std_metrics.as_dict().items():
        row[f"std_{name}"] = value
    return row


def summary_from_row(row):
    try:
        config = DownsampleConfig(row['algorithm'], int(row['factor']),
                                  int(row.get('preselect_ratio') or 4))
        means = MetricVector.from_array([float(row[f"mean_{m}"]) for m in METRIC_NAMES])
        stds = MetricVector.from_array([float(row[f"std_{m}"]) for m in METRIC_NAMES])
        return ConfigMetricSummary(config, means, stds, int(row['n_pairs']),
                                   int(row.get('n_excluded') or 0))
    except (KeyError, ValueError) as e:
        raise FormatError(f"bad metric summary row: {e}") from e


def fold_document(fold):
    return {
        'fold': fold.fold_id,
        'accuracy': fold.accuracy,
        'f1_macro': fold.f1_macro,
        'precision_macro': fold.precision_macro,
        'recall_macro': fold.recall_macro,
        'roc_auc_ovr': fold.roc_auc_ovr,
        'per_class': {str(name): list(rates) for name, rates in fold.per_class.items()},
        'undefined_rates': [str(name) for name in fold.undefined_rates],
        'selected_features': sorted(fold.selected_features),
        'feature_importances': dict(fold.feature_importances),
        'confusion': np.asarray(fold.confusion).tolist() if fold.confusion is not None else None,
    }


def evaluation_document(evaluation):
    doc = evaluation.config.to_dict()
    doc['preselect_ratio'] = evaluation.config.preselect_ratio
    doc['mean_accuracy'] = evaluation.mean_accuracy
    doc['std_accuracy'] = evaluation.std_accuracy
    doc['folds'] = [fold_document(f) for f in evaluation.folds]
    return doc


def evaluation_from_document(doc, extraction_times=None):
    """Rebuild a ConfigEvaluation; fold extraction times come from ``extraction_times``
    (fold -> seconds) when given, else 0."""
    extraction_times = extraction_times or {}
    try:
        config = DownsampleConfig.from_dict(doc)
        folds = tuple(
            FoldResults(
                fold_id=int(f['fold']),
                accuracy=float(f['accuracy']),
                f1_macro=float(f['f1_macro']),
                precision_macro=float(f['precision_macro']),
                recall_macro=float(f['recall_macro']),
                per_class={name: tuple(rates) for name, rates in f['per_class'].items()},
                selected_features=frozenset(f['selected_features']),
                feature_importances=dict(f['feature_importances']),
                extraction_time_s=float(extraction_times.get(int(f['fold']), 0.0)),
                confusion=np.array(f['confusion']) if f.get('confusion') is not None else None,
                roc_auc_ovr=f.get('roc_auc_ovr'),
                undefined_rates=tuple(f.get('undefined_rates', ())),
            )
            for f in doc['folds']
        )
        return ConfigEvaluation(config, folds, float(doc['mean_accuracy']),
                                float(doc['std_accuracy']))
    except (KeyError, TypeError, ValueError) as e:
        raise FormatError(f"bad evaluation document: {e}") from e


def fold_rows(evaluation):
    for fold in evaluation.folds:
        row = config_cells(evaluation.config)
        row.update(fold=fold.fold_id, accuracy=fold.accuracy, f1_macro=fold.f1_macro,
                   precision_macro=fold.precision_macro, recall_macro=fold.recall_macro,
                   roc_auc_ovr=fold.roc_auc_ovr, n_selected=len(fold.selected_features))
        yield row


def per_class_rows(evaluation):
    for fold in evaluation.folds:
        undefined = set(fold.undefined_rates)
        for name, (sensitivity, specificity) in fold.per_class.items():
            row = config_cells(evaluation.config)
            row.update(fold=fold.fold_id, sensitivity=sensitivity, specificity=specificity,
                       undefined=int(name in undefined))
            row['class'] = name
            yield row


def confusion_rows(evaluation, class_names):
    for fold in evaluation.folds:
        if fold.confusion is None:
            continue
        for i, truth in enumerate(class_names):
            for j, predicted in enumerate(class_names):
                row = config_cells(evaluation.config)
                row.update(fold=fold.fold_id, true_class=truth, predicted_class=predicted,
                           count=int(fold.confusion[i][j]))
                yield row


def accuracy_row(evaluation):
    row = config_cells(evaluation.config)
    row.update(label=evaluation.config.label, mean_accuracy=evaluation.mean_accuracy,
               std_accuracy=evaluation.std_accuracy)
    return row
