"""Tests for the artifact writer, row layouts and SVG plots."""

import json

import numpy as np
import pytest
from bs4 import BeautifulSoup

from downsample_audit.core.downsamplers import DownsampleConfig
from downsample_audit.core.metrics import METRIC_NAMES, ConfigMetricSummary, MetricVector
from downsample_audit.core.pipeline import ConfigEvaluation, FoldResults
from downsample_audit.core.tradeoff import ParetoPoint, mark_dominated
from downsample_audit.reports.records import (
    SUMMARY_FIELDS, evaluation_document, evaluation_from_document, summary_from_row, summary_row,
)
from downsample_audit.reports.svg import (
    accuracy_plot, pareto_plot, per_class_heatmap, trajectory_plot,
)
from downsample_audit.reports.writer import (
    MANIFEST_NAME, ArtifactWriter, read_csv, read_json, require, sha256_file,
)
from downsample_audit.utils.errors import DataError, EmptyResultError, FormatError


def parse(svg):
    return BeautifulSoup(svg, 'html.parser')


def accuracy_rows():
    rows = [{'algorithm': 'Original', 'factor': 1, 'mean_accuracy': 0.9, 'std_accuracy': 0.02}]
    for algorithm in ('LTTB', 'M4'):
        for factor, acc in ((2, 0.89), (10, 0.85), (50, 0.6)):
            rows.append({'algorithm': algorithm, 'factor': factor,
                         'mean_accuracy': acc, 'std_accuracy': 0.01})
    return rows


class TestArtifactWriter:
    def test_manifest_hashes_and_timing_flag(self, tmp_path):
        writer = ArtifactWriter(tmp_path)
        writer.write_csv('accuracy.csv', ['a', 'b'], [{'a': 1, 'b': None}])
        writer.write_json('timing/extraction.json', {'t': 0.5})
        writer.save_manifest()

        manifest = json.loads((tmp_path / MANIFEST_NAME).read_text())['files']
        assert set(manifest) == {'accuracy.csv', 'timing/extraction.json'}
        assert manifest['accuracy.csv']['sha256'] == sha256_file(tmp_path / 'accuracy.csv')
        assert manifest['accuracy.csv']['timing'] is False
        assert manifest['timing/extraction.json']['timing'] is True
        assert (tmp_path / 'accuracy.csv').read_text() == 'a,b\n1,\n'
        assert writer.structured_files() == ['accuracy.csv']

    def test_manifest_is_extended(self, tmp_path):
        first = ArtifactWriter(tmp_path)
        first.write_text('notes.txt', 'x\n')
        first.save_manifest()
        second = ArtifactWriter(tmp_path)
        second.write_json('more.json', {'n': np.int64(3)})
        second.save_manifest()
        manifest = read_json(tmp_path, MANIFEST_NAME)['files']
        assert set(manifest) == {'notes.txt', 'more.json'}
        assert read_json(tmp_path, 'more.json') == {'n': 3}

    def test_json_is_sorted_and_rejects_nan(self, tmp_path):
        writer = ArtifactWriter(tmp_path)
        writer.write_json('doc.json', {'b': 1, 'a': [0.5]})
        assert (tmp_path / 'doc.json').read_text().index('"a"') < \
            (tmp_path / 'doc.json').read_text().index('"b"')
        with pytest.raises(ValueError):
            writer.write_json('bad.json', {'x': float('nan')})

    def test_unreadable_manifest(self, tmp_path):
        (tmp_path / MANIFEST_NAME).write_text('{not json')
        with pytest.raises(FormatError):
            ArtifactWriter(tmp_path)

    def test_missing_and_invalid_artifacts(self, tmp_path):
        with pytest.raises(DataError):
            require(tmp_path, 'absent.csv')
        (tmp_path / 'broken.json').write_text('[1,')
        with pytest.raises(FormatError):
            read_json(tmp_path, 'broken.json')

    def test_csv_round_trip(self, tmp_path):
        writer = ArtifactWriter(tmp_path)
        writer.write_csv('rows.csv', ['name', 'value'], [{'name': 'x', 'value': np.float64(0.25)}])
        assert read_csv(tmp_path, 'rows.csv') == [{'name': 'x', 'value': '0.25'}]


class TestRecords:
    def test_summary_row_round_trip(self, tmp_path):
        config = DownsampleConfig('MinMaxLTTB', 10, 6)
        means = MetricVector.from_array(np.linspace(0.0, 1.2, len(METRIC_NAMES)))
        stds = MetricVector.from_array(np.full(len(METRIC_NAMES), 0.1))
        summary = ConfigMetricSummary(config, means, stds, 30, 2)

        writer = ArtifactWriter(tmp_path)
        writer.write_csv('metrics.csv', SUMMARY_FIELDS, [summary_row(summary)])
        (row,) = read_csv(tmp_path, 'metrics.csv')
        restored = summary_from_row(row)
        assert restored.config == config
        assert (restored.n_pairs, restored.n_excluded) == (30, 2)
        assert np.allclose(restored.mean_metrics.to_array(), means.to_array())

    def test_bad_summary_row(self):
        with pytest.raises(FormatError):
            summary_from_row({'algorithm': 'LTTB', 'factor': '2'})

    def test_evaluation_document_round_trip(self):
        fold = FoldResults(fold_id=0, accuracy=0.8, f1_macro=0.75, precision_macro=0.7,
                           recall_macro=0.8, per_class={'a': (1.0, 0.5)},
                           selected_features=frozenset({'rms', 'ptp'}),
                           feature_importances={'rms': 0.1}, extraction_time_s=0.2,
                           confusion=np.array([[2, 0], [1, 2]]), roc_auc_ovr=0.9)
        evaluation = ConfigEvaluation(DownsampleConfig('LTTB', 5), (fold,), 0.8, 0.0)
        doc = json.loads(json.dumps(evaluation_document(evaluation)))
        assert 'extraction_time_s' not in json.dumps(doc)
        restored = evaluation_from_document(doc, {0: 0.2})
        assert restored.config == evaluation.config
        (back,) = restored.folds
        assert back.selected_features == fold.selected_features
        assert back.per_class == {'a': (1.0, 0.5)}
        assert back.confusion.tolist() == [[2, 0], [1, 2]]
        assert back.extraction_time_s == 0.2

    def test_bad_evaluation_document(self):
        with pytest.raises(FormatError):
            evaluation_from_document({'algorithm': 'LTTB', 'factor': 2})


class TestAccuracyPlot:
    def test_elements(self):
        soup = parse(accuracy_plot(accuracy_rows(), {'LTTB': 50}))
        assert len(soup.find_all(class_='original-band')) == 1
        (reference,) = soup.find_all(class_='original-reference')
        assert reference['stroke-dasharray'] == '6,4'
        lines = soup.find_all('polyline', class_='accuracy-line')
        assert sorted(line['data-algorithm'] for line in lines) == ['LTTB', 'M4']
        assert len(soup.find_all(class_='accuracy-point')) == 6
        assert len(soup.find_all(class_='critical-factor')) == 1

    def test_higher_accuracy_is_higher_on_the_page(self):
        soup = parse(accuracy_plot(accuracy_rows()))
        points = {p.title.string: float(p['cy']) for p in soup.find_all(class_='accuracy-point')}
        assert points['LTTB(2): 0.890'] < points['LTTB(50): 0.600']

    def test_deterministic(self):
        assert accuracy_plot(accuracy_rows()) == accuracy_plot(accuracy_rows())

    def test_only_original(self):
        with pytest.raises(EmptyResultError):
            accuracy_plot(accuracy_rows()[:1])


class TestOtherPlots:
    def test_pareto(self):
        points = mark_dominated([
            ParetoPoint(DownsampleConfig.original(), 10.0, 0.9),
            ParetoPoint(DownsampleConfig('LTTB', 10), 1.0, 0.92),
            ParetoPoint(DownsampleConfig('M4', 2), 0.5, 0.8),
        ])
        soup = parse(pareto_plot(points))
        assert len(soup.find_all('circle', class_='dominated')) == 1
        assert len(soup.find_all('circle', class_='non-dominated')) == 2
        assert len(soup.find_all(class_='pareto-front')) == 1
        with pytest.raises(EmptyResultError):
            pareto_plot([])

    def test_heatmap(self):
        cells = {('LTTB(2)', 'a'): 0.9, ('LTTB(2)', 'b'): 0.1}
        soup = parse(per_class_heatmap(cells, ['LTTB(2)', 'M4(2)'], ['a', 'b']))
        rects = soup.find_all('rect', class_='cell')
        assert len(rects) == 4
        assert rects[2].title.string == 'M4(2) / a: n/a'
        with pytest.raises(EmptyResultError):
            per_class_heatmap({}, [], ['a'])

    def test_trajectories(self):
        trajectories = [
            {'algorithm': 'LTTB', 'fold': None, 'vertices': [[0, 0], [1, 0], [2, 1]]},
            {'algorithm': 'M4', 'fold': None, 'vertices': [[0, 0], [0, 1]]},
        ]
        soup = parse(trajectory_plot(trajectories))
        lines = soup.find_all('polyline', class_='trajectory')
        assert [line['data-algorithm'] for line in lines] == ['LTTB', 'M4']
        assert len(lines[0]['points'].split()) == 3
        assert len(soup.find_all(class_='trajectory-start')) == 2
        with pytest.raises(EmptyResultError):
            trajectory_plot([])
