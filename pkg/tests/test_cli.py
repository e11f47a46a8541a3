"""End-to-end tests of the command-line workflow on a tiny synthetic config."""

import json

import pytest

from downsample_audit.cli.config import THREADS_ENV, WorkflowConfig, load_config
from downsample_audit.cli.main import main
from downsample_audit.reports.writer import MANIFEST_NAME, read_csv
from downsample_audit.utils.errors import ConfigError

STRUCTURED = (
    'metric_summaries.csv', 'grid_errors.csv', 'evaluations.json', 'fold_metrics.csv',
    'per_class.csv', 'confusion_matrices.csv', 'accuracy.csv', 'ranker_model.json',
    'ranking.csv', 'rank_evaluation.json', 'attribution.csv', 'friedman.csv',
    'critical_factors.csv', 'stability.csv', 'selection_frequency.csv',
    'importance_clusters.csv', 'silhouettes.csv', 'cluster_trajectories.csv',
    'embedding.csv', 'trajectories.json', 'analysis_status.json',
)
TIMING = (
    'timing/grid_timing.csv', 'timing/extraction_timing.csv', 'timing/speedup.csv',
    'timing/pareto.csv', 'timing/tradeoff_summary.csv',
)


def tiny_config(out_dir, duration_s=0.4, n_per_class=12):
    unit = {'n_phases': 3, 'phase_width_s': 0.002, 'firing_rate_hz': 12.0,
            'noise_std': 0.05, 'duration_s': duration_s}
    return {
        'dataset': {'synth': {
            'sample_rate_hz': 5000.0,
            'n_per_class': n_per_class,
            'classes': {
                'small': dict(unit, peak_amplitude=0.5),
                'medium': dict(unit, peak_amplitude=1.0),
                'large': dict(unit, peak_amplitude=2.0),
            },
        }},
        'algorithms': ['LTTB', 'Decimate'],
        'factors': [2, 10, 30],
        'folds': 3,
        'seed': 0,
        'k_range': [2, 3],
        'output_dir': str(out_dir),
    }


def write_config(directory, data):
    path = directory / 'config.json'
    path.write_text(json.dumps(data))
    return path


# Long enough that extraction cost, not per-call overhead, drives the timings
RUN_SIZE = {'duration_s': 8.0, 'n_per_class': 8}


def manifest(out_dir):
    return json.loads((out_dir / MANIFEST_NAME).read_text())['files']


@pytest.fixture(autouse=True)
def no_thread_env(monkeypatch):
    monkeypatch.delenv(THREADS_ENV, raising=False)


@pytest.fixture(scope='module')
def run_output(tmp_path_factory):
    root = tmp_path_factory.mktemp('run')
    out_dir = root / 'out'
    code = main(['run', '--config', str(write_config(root, tiny_config(out_dir, **RUN_SIZE)))])
    return code, out_dir


class TestRun:
    def test_exit_code_and_artifacts(self, run_output):
        code, out_dir = run_output
        assert code == 0
        files = manifest(out_dir)
        for name in STRUCTURED:
            assert files[name]['timing'] is False, name
        for name in TIMING:
            assert files[name]['timing'] is True, name
        assert (out_dir / 'plots' / 'accuracy.svg').is_file()
        assert (out_dir / 'plots' / 'pareto.svg').is_file()

    def test_evaluations_cover_the_grid(self, run_output):
        _, out_dir = run_output
        document = json.loads((out_dir / 'evaluations.json').read_text())
        labels = {(e['algorithm'], e['factor']) for e in document['evaluations']}
        assert labels == {('Original', 1)} | {(a, k) for a in ('LTTB', 'Decimate') for k in (2, 10, 30)}
        assert all(len(e['folds']) == 3 for e in document['evaluations'])
        assert sorted(document['class_names']) == ['large', 'medium', 'small']

    def test_original_is_dominated(self, run_output):
        _, out_dir = run_output
        rows = read_csv(out_dir, 'timing/pareto.csv')
        assert len(rows) == 7
        (original,) = [r for r in rows if r['algorithm'] == 'Original']
        assert original['dominated'] == '1'
        assert any(r['dominated'] == '0' for r in rows)

    def test_speedup_at_factor_thirty(self, run_output):
        _, out_dir = run_output
        rows = read_csv(out_dir, 'timing/speedup.csv')
        assert {(r['algorithm'], r['factor']) for r in rows} == \
            {(a, str(k)) for a in ('LTTB', 'Decimate') for k in (2, 10, 30)}
        for row in rows:
            if row['factor'] == '30':
                assert float(row['speedup']) >= 5, row

    def test_structured_files_are_reproducible(self, run_output, tmp_path):
        _, first = run_output
        second = tmp_path / 'again'
        assert main(['run', '--config', str(write_config(tmp_path, tiny_config(second, **RUN_SIZE)))]) == 0
        a, b = manifest(first), manifest(second)
        for name in STRUCTURED:
            assert a[name]['sha256'] == b[name]['sha256'], name

    def test_plot_rerenders_from_artifacts(self, run_output):
        _, out_dir = run_output
        before = (out_dir / 'plots' / 'accuracy.svg').read_text()
        code = main(['plot', '--out', str(out_dir)])
        if code == 0:
            assert (out_dir / 'plots' / 'accuracy.svg').read_text() == before
        else:
            # strict plotting fails only when the embedding was skipped
            status = json.loads((out_dir / 'trajectories.json').read_text())
            assert code == 3 and status['status'] == 'skipped'


class TestSubcommands:
    def test_synth_writes_dataset(self, tmp_path):
        out_dir = tmp_path / 'synth'
        path = write_config(tmp_path, tiny_config(out_dir))
        assert main(['synth', '--config', str(path)]) == 0
        data_manifest = json.loads((out_dir / 'dataset' / 'manifest.json').read_text())
        assert len(data_manifest['files']) == 36
        assert data_manifest['sample_rate_hz'] == 5000.0
        assert 'dataset/manifest.json' in manifest(out_dir)

    def test_metrics_on_synthesized_files(self, tmp_path):
        synth_out = tmp_path / 'synth'
        assert main(['synth', '--config', str(write_config(tmp_path, tiny_config(synth_out)))]) == 0
        config = tiny_config(tmp_path / 'metrics')
        config['dataset'] = {'path': str(synth_out / 'dataset'), 'format': 'raw-f64le'}
        assert main(['metrics', '--config', str(write_config(tmp_path, config))]) == 0
        files = manifest(tmp_path / 'metrics')
        assert 'metric_summaries.csv' in files
        assert 'evaluations.json' not in files

    def test_bench_writes_timing_only(self, tmp_path):
        out_dir = tmp_path / 'bench'
        config = dict(tiny_config(out_dir), bench_warmup=0, bench_repeats=1)
        assert main(['bench', '--config', str(write_config(tmp_path, config))]) == 0
        files = manifest(out_dir)
        assert files['timing/bench.csv']['timing'] is True
        rows = (out_dir / 'timing' / 'bench.csv').read_text().splitlines()
        assert rows[0] == 'algorithm,factor,t_orig,t_ds,speedup'
        assert len(rows) == 7

    def test_bench_identity_factor(self, tmp_path):
        out_dir = tmp_path / 'bench'
        config = dict(tiny_config(out_dir), algorithms=['LTTB'], factors=[1],
                      bench_warmup=1, bench_repeats=5)
        assert main(['bench', '--config', str(write_config(tmp_path, config))]) == 0
        (row,) = read_csv(out_dir, 'timing/bench.csv')
        assert (row['algorithm'], row['factor']) == ('LTTB', '1')
        assert 0.5 < float(row['speedup']) < 2.0

    def test_no_command_prints_help(self, capsys):
        assert main([]) == 0
        assert 'usage' in capsys.readouterr().out


class TestExitCodes:
    def test_unknown_config_key(self, tmp_path):
        data = tiny_config(tmp_path / 'out')
        data['colour'] = 'blue'
        assert main(['run', '--config', str(write_config(tmp_path, data))]) == 2

    def test_invalid_flag_value(self, tmp_path):
        path = write_config(tmp_path, tiny_config(tmp_path / 'out'))
        assert main(['run', '--config', str(path), '--folds', '1']) == 2

    def test_unparseable_flag(self):
        with pytest.raises(SystemExit) as excinfo:
            main(['run', '--factors', 'two,ten'])
        assert excinfo.value.code == 2

    def test_missing_config_file(self, tmp_path):
        assert main(['run', '--config', str(tmp_path / 'absent.json')]) == 2

    def test_missing_data_path(self, tmp_path):
        data = tiny_config(tmp_path / 'out')
        data['dataset'] = {'path': str(tmp_path / 'nowhere'), 'format': 'raw-f64le',
                           'sample_rate_hz': 1000.0}
        assert main(['run', '--config', str(write_config(tmp_path, data))]) == 3

    def test_plot_without_artifacts(self, tmp_path):
        assert main(['plot', '--out', str(tmp_path / 'empty')]) == 3

    def test_rank_without_artifacts(self, tmp_path):
        assert main(['rank', '--out', str(tmp_path / 'empty')]) == 3


class TestConfig:
    def test_precedence(self, tmp_path, monkeypatch):
        path = write_config(tmp_path, dict(tiny_config(tmp_path / 'out'), threads=2))
        assert load_config(path).threads == 2
        monkeypatch.setenv(THREADS_ENV, '3')
        assert load_config(path).threads == 3
        assert load_config(path, threads=4).threads == 4

    def test_bad_environment(self, monkeypatch):
        monkeypatch.setenv(THREADS_ENV, 'many')
        with pytest.raises(ConfigError):
            load_config()

    def test_factors_sorted_and_deduplicated(self):
        config = WorkflowConfig(factors=(30, 2, 10, 2))
        assert config.factors == (2, 10, 30)

    def test_identity_factor_is_allowed(self):
        assert WorkflowConfig(factors=(10, 1)).factors == (1, 10)
        with pytest.raises(ConfigError):
            WorkflowConfig(factors=(0, 2))

    def test_original_is_not_a_grid_algorithm(self):
        with pytest.raises(ConfigError):
            WorkflowConfig(algorithms=('Original',))

    def test_round_trip(self):
        config = WorkflowConfig(factors=(2, 5), algorithms=('m4', 'LTTB'))
        assert WorkflowConfig.from_dict(config.to_dict()) == config
        assert config.algorithms == ('M4', 'LTTB')
