#!/usr/bin/env python3
"""
Downsample Audit - Master CLI for the downsampling information-loss workflow.
Runs the grid, metric profiles, classification harness, ranker and
analyses, and writes every artifact into one output directory.
"""

import argparse
import logging
import sys
from contextlib import contextmanager
from pathlib import Path

import numpy as np

# Add parent directory to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from downsample_audit.cli.config import load_config
from downsample_audit.core.downsamplers import (
    Algorithm, DownsampleConfig, apply_grid, build_grid, downsample,
)
from downsample_audit.core.feature_space import (
    cluster_importances, cluster_trajectories, importance_vectors, jaccard_stability,
    mds_embed, mean_trajectory_distance, selection_frequency, trajectory_export,
)
from downsample_audit.core.features import FEATURE_NAMES, benchmark_extraction, feature_table
from downsample_audit.core.metrics import (
    METRIC_NAMES, ConfigMetricSummary, MetricVector, profile_dataset, summarize_config,
)
from downsample_audit.core.pipeline import cross_validate
from downsample_audit.core.ranking import (
    build_pairs, evaluate_ranker, mean_abs_attribution, rank_by_wins, train_ranker, true_ranking,
)
from downsample_audit.core.signal import (
    imbalance_factor, load_dataset, segment_dataset, synth_dataset, write_dataset,
)
from downsample_audit.core.statistics import critical_factor_test
from downsample_audit.core.tradeoff import ParetoPoint, mark_dominated, speedup, tradeoff_summary
from downsample_audit.reports import records, svg
from downsample_audit.reports.writer import ArtifactWriter, read_csv, read_json
from downsample_audit.utils.console_utils import (
    init_console, print_banner, print_step, safe_print, setup_logging,
)
from downsample_audit.utils.errors import (
    ConfigError, DataError, DownsampleAuditError, StepError,
)

init_console()

logger = logging.getLogger(__name__)

GRID_ERROR_FIELDS = ('step', 'algorithm', 'factor', 'error')
TRAJECTORY_CHECK = ('LTTB', 'MinMaxLTTB', 'Decimate')


@contextmanager
def stage(step, cell=None):
    """Tag library failures with the workflow step and grid cell."""
    try:
        yield
    except StepError:
        raise
    except DownsampleAuditError as e:
        raise StepError(step, e, cell) from e


def _sorted_configs(configs):
    return sorted(configs, key=lambda c: (not c.is_original, c.sort_key()))


class DownsampleAuditCLI:
    def __init__(self, config):
        self.config = config
        self.out_dir = Path(config.output_dir)
        self.writer = ArtifactWriter(self.out_dir)
        self.workers = config.threads
        self.grid_errors = []

    # ------------------------------------------------------------- inputs

    def load_input(self):
        """The dataset the config names, segmented when requested."""
        config = self.config
        with stage('load'):
            if config.is_synthetic:
                synth = config.dataset['synth']
                dataset = synth_dataset(config.class_specs(), synth.get('n_per_class', 20),
                                        float(synth['sample_rate_hz']), config.seed)
            else:
                dataset = load_dataset(config.dataset['path'],
                                       config.dataset.get('format', 'raw-f64le'),
                                       config.dataset.get('sample_rate_hz'))
            if config.segment_seconds:
                dataset = segment_dataset(dataset, config.segment_seconds)
        counts = dataset.class_counts()
        safe_print(f"Signals: {len(dataset)} over {len(counts)} classes "
                   f"(imbalance {imbalance_factor(dataset):.2f})")
        return dataset

    def grid_configs(self):
        algorithms = [Algorithm.parse(a) for a in self.config.algorithms]
        return build_grid(algorithms, self.config.factors, self.config.preselect_ratio)

    def _grid_error(self, step, config, error):
        logger.warning("%s failed at %s: %s", config.label, step, error)
        self.grid_errors.append({'step': step, 'algorithm': config.algorithm.value,
                                 'factor': config.factor, 'error': str(error)})

    # --------------------------------------------------------------- steps

    def apply_grid_step(self, dataset):
        with stage('downsample'):
            results = apply_grid(dataset, self.grid_configs(), self.workers)
        cells = []
        for result in results:
            if result.ok:
                cells.append(result)
            else:
                self._grid_error('downsample', result.config, result.error)
        self.writer.write_csv('timing/grid_timing.csv', ('algorithm', 'factor', 'wall_time_s'),
                              [dict(records.config_cells(r.config), wall_time_s=r.wall_time_s)
                               for r in cells])
        safe_print(f"OK: {len(cells)} of {len(results)} grid cells downsampled")
        return cells

    def metrics_step(self, dataset, cells):
        """Metric summaries of the Original and every surviving cell."""
        original = DownsampleConfig.original()
        summaries = [ConfigMetricSummary(original, MetricVector.zeros(), MetricVector.zeros(),
                                         len(dataset), 0)]
        kept = []
        for cell in cells:
            with stage('metrics', cell.config.label):
                profiles = profile_dataset(dataset, cell.dataset, self.workers)
                try:
                    summaries.append(summarize_config(profiles, cell.config))
                except DataError as e:
                    self._grid_error('metrics', cell.config, e)
                    continue
            kept.append(cell)
        self.write_summaries(summaries)
        safe_print(f"OK: metric profiles for {len(summaries)} configurations")
        return summaries, kept

    def write_summaries(self, summaries):
        self.writer.write_csv('metric_summaries.csv', records.SUMMARY_FIELDS,
                              [records.summary_row(s) for s in summaries])

    def write_grid_errors(self):
        self.writer.write_csv('grid_errors.csv', GRID_ERROR_FIELDS, self.grid_errors)

    def evaluate_step(self, dataset, cells):
        """Cross-validated evaluation of the Original and every cell."""
        config = self.config
        with stage('evaluate', 'Original'):
            table = feature_table(dataset)
            evaluations = [cross_validate(table, config.folds, config.seed,
                                          DownsampleConfig.original(), self.workers)]
        class_names = table.class_names

        for cell in cells:
            try:
                cell_table = feature_table(cell.dataset)
            except DataError as e:
                self._grid_error('features', cell.config, e)
                continue
            with stage('evaluate', cell.config.label):
                evaluations.append(cross_validate(cell_table, config.folds, config.seed,
                                                  cell.config, self.workers))

        self.write_evaluations(evaluations, class_names)
        original = evaluations[0]
        safe_print(f"OK: {len(evaluations)} configurations evaluated "
                   f"(Original accuracy {original.mean_accuracy:.3f} +/- {original.std_accuracy:.3f})")
        return evaluations, class_names

    def write_evaluations(self, evaluations, class_names):
        writer = self.writer
        writer.write_json('evaluations.json', {
            'class_names': [str(c) for c in class_names],
            'feature_names': list(FEATURE_NAMES),
            'evaluations': [records.evaluation_document(e) for e in evaluations],
        })
        writer.write_csv('fold_metrics.csv', records.FOLD_FIELDS,
                         [row for e in evaluations for row in records.fold_rows(e)])
        writer.write_csv('per_class.csv', records.PER_CLASS_FIELDS,
                         [row for e in evaluations for row in records.per_class_rows(e)])
        writer.write_csv('confusion_matrices.csv', records.CONFUSION_FIELDS,
                         [row for e in evaluations for row in records.confusion_rows(e, class_names)])
        writer.write_csv('accuracy.csv', records.ACCURACY_FIELDS,
                         [records.accuracy_row(e) for e in evaluations])
        writer.write_csv('timing/extraction_timing.csv',
                         records.CONFIG_FIELDS + ('fold', 'extraction_time_s'),
                         [dict(records.config_cells(e.config), fold=f.fold_id,
                               extraction_time_s=f.extraction_time_s)
                          for e in evaluations for f in e.folds])

    def rank_step(self, summaries, evaluations):
        """Train the pairwise ranker on every pair and evaluate it by k-fold."""
        config = self.config
        evaluated = {e.config for e in evaluations}
        summaries = [s for s in summaries if s.config in evaluated]
        with stage('rank'):
            pairs = build_pairs(summaries, evaluations)
            model = train_ranker(pairs, l2=config.ranker_l2, seed=config.seed)
            ranking = rank_by_wins(model, summaries)
            result = evaluate_ranker(pairs, summaries, evaluations, config.lambdas,
                                     folds=config.ranker_folds, seed=config.seed, l2=config.ranker_l2)
            attributions = mean_abs_attribution(model, pairs)

        truth = {r.config: (position + 1, r.value) for position, r in enumerate(true_ranking(evaluations))}
        rows = []
        for position, ranked in enumerate(ranking, start=1):
            true_rank, accuracy = truth[ranked.config]
            row = records.config_cells(ranked.config)
            row.update(rank=position, label=ranked.config.label, wins=ranked.value,
                       true_rank=true_rank, mean_accuracy=accuracy)
            rows.append(row)

        weights = dict(zip(model.metric_names, model.weights.tolist()))
        writer = self.writer
        writer.write_json('ranker_model.json', model.to_dict())
        writer.write_csv('ranking.csv', ('rank',) + records.CONFIG_FIELDS
                         + ('label', 'wins', 'true_rank', 'mean_accuracy'), rows)
        writer.write_json('rank_evaluation.json', {
            'status': 'ok',
            'kendall_tau': result.kendall_tau,
            'plain_accuracy': result.plain_accuracy,
            'weighted_accuracy': {f"{lam:g}": value for lam, value in result.weighted_accuracy.items()},
            'n_pairs': result.n_pairs,
            'dropped_ties': result.dropped_ties,
        })
        writer.write_csv('attribution.csv', ('metric', 'weight', 'mean_abs_attribution'),
                         [{'metric': m, 'weight': weights[m], 'mean_abs_attribution': attributions[m]}
                          for m in METRIC_NAMES])
        safe_print(f"OK: ranker trained on {len(pairs)} pairs, Kendall tau {result.kendall_tau:.3f}")
        return attributions

    def skip_rank(self, error):
        logger.warning("ranking skipped: %s", error)
        safe_print(f"WARNING: ranking skipped: {error}")
        writer = self.writer
        writer.write_json('ranker_model.json', {'status': 'skipped'})
        writer.write_csv('ranking.csv', ('rank',) + records.CONFIG_FIELDS
                         + ('label', 'wins', 'true_rank', 'mean_accuracy'), [])
        writer.write_json('rank_evaluation.json', {'status': 'skipped', 'reason': str(error)})
        writer.write_csv('attribution.csv', ('metric', 'weight', 'mean_abs_attribution'), [])

    def statistics_step(self, evaluations):
        """Per-algorithm Friedman test and critical factor."""
        original = evaluations[0]
        friedman_rows, critical_rows, critical = [], [], {}
        for algorithm in self.config.algorithms:
            per_factor = {e.config.factor: e.accuracies for e in evaluations
                          if e.config.algorithm.value == algorithm}
            if not per_factor:
                continue
            with stage('statistics', algorithm):
                result = critical_factor_test(per_factor, original.accuracies)
            critical[algorithm] = result.factor
            critical_rows.append({
                'algorithm': algorithm, 'n_folds': len(original.folds),
                'n_treatments': len(per_factor) + 1, 'statistic': result.statistic,
                'p_value': result.p_value, 'critical_difference': result.critical_difference,
                'critical_factor': result.factor,
            })
            for factor in sorted(per_factor):
                friedman_rows.append({'algorithm': algorithm, 'factor': factor,
                                      'rank_gap': result.rank_gaps[factor],
                                      'exceeds_cd': int(result.rank_gaps[factor] > result.critical_difference)})
        self.writer.write_csv('friedman.csv', ('algorithm', 'factor', 'rank_gap', 'exceeds_cd'),
                              friedman_rows)
        self.writer.write_csv('critical_factors.csv',
                              ('algorithm', 'n_folds', 'n_treatments', 'statistic', 'p_value',
                               'critical_difference', 'critical_factor'), critical_rows)
        for algorithm, factor in critical.items():
            safe_print(f"  {algorithm}: critical factor {factor if factor else 'none'}")
        return critical

    def stability_step(self, evaluations):
        stability, frequency = [], []
        for e in evaluations:
            sets = [f.selected_features for f in e.folds]
            cells = records.config_cells(e.config)
            stability.append(dict(cells, jaccard=jaccard_stability(sets)))
            for feature, rate in selection_frequency(sets, FEATURE_NAMES).items():
                frequency.append(dict(cells, feature=feature, frequency=rate))
        self.writer.write_csv('stability.csv', records.CONFIG_FIELDS + ('jaccard',), stability)
        self.writer.write_csv('selection_frequency.csv',
                              records.CONFIG_FIELDS + ('feature', 'frequency'), frequency)

    def clustering_step(self, evaluations):
        """Cluster features by their importance across configurations."""
        columns = [importance_vectors(e, FEATURE_NAMES)[0].values for e in evaluations]
        matrix = np.column_stack(columns)
        assignment_rows, silhouette_rows, trajectory_rows = [], [], []
        try:
            result = cluster_importances(matrix, self.config.k_values, self.config.seed)
        except DataError as e:
            status = {'status': 'skipped', 'reason': str(e)}
            logger.warning("importance clustering skipped: %s", e)
            safe_print(f"WARNING: importance clustering skipped: {e}")
        else:
            status = {'status': 'ok', 'chosen_k': result.chosen_k}
            assignment_rows = [{'feature': f, 'cluster': int(c)}
                               for f, c in zip(FEATURE_NAMES, result.assignment)]
            silhouette_rows = [{'k': k, 'silhouette': s} for k, s in sorted(result.silhouettes.items())]
            for cluster, means in cluster_trajectories(matrix, result.assignment).items():
                for e, value in zip(evaluations, means):
                    trajectory_rows.append(dict(records.config_cells(e.config), cluster=cluster,
                                                mean_importance=value))
        self.writer.write_csv('importance_clusters.csv', ('feature', 'cluster'), assignment_rows)
        self.writer.write_csv('silhouettes.csv', ('k', 'silhouette'), silhouette_rows)
        self.writer.write_csv('cluster_trajectories.csv',
                              ('cluster',) + records.CONFIG_FIELDS + ('mean_importance',),
                              trajectory_rows)
        return status

    def embedding_step(self, evaluations):
        """SMACOF embedding of per-fold importance vectors and their trajectories."""
        dims = self.config.mds_dims
        vectors = [v for e in evaluations for v in importance_vectors(e, FEATURE_NAMES, per_fold=True)]
        dim_fields = tuple(f"dim_{i + 1}" for i in range(dims))
        try:
            embedding = mds_embed(vectors, dims, self.config.seed)
            keys = [(v.config, v.fold) for v in vectors]
            trajectories = trajectory_export(embedding.points, keys)
        except DataError as e:
            logger.warning("embedding skipped: %s", e)
            safe_print(f"WARNING: embedding skipped: {e}")
            self.writer.write_csv('embedding.csv', records.CONFIG_FIELDS + ('fold',) + dim_fields, [])
            self.writer.write_json('trajectories.json', {'status': 'skipped', 'reason': str(e),
                                                         'trajectories': []})
            return {'status': 'skipped', 'reason': str(e)}, []

        rows = []
        for v, point in zip(vectors, embedding.points):
            row = dict(records.config_cells(v.config), fold=v.fold)
            row.update(zip(dim_fields, point.tolist()))
            rows.append(row)
        self.writer.write_csv('embedding.csv', records.CONFIG_FIELDS + ('fold',) + dim_fields, rows)
        self.writer.write_json('trajectories.json', {
            'status': 'ok',
            'start': embedding.start,
            'stress': embedding.stress,
            'stress_history': list(embedding.stress_history),
            'pearson_fidelity': embedding.pearson_fidelity,
            'spearman_fidelity': embedding.spearman_fidelity,
            'trajectories': [{'algorithm': t.algorithm, 'fold': t.fold, 'labels': list(t.labels),
                              'vertices': t.vertices.tolist()} for t in trajectories],
        })
        status = {'status': 'ok', 'start': embedding.start,
                  'pearson_fidelity': embedding.pearson_fidelity}
        return status, trajectories

    def tradeoff_step(self, evaluations, critical):
        """Speedup, Pareto front and trade-off summary; all measured, all under timing/."""
        original = evaluations[0]
        speedups, speedup_rows, points = {}, [], []
        for e in evaluations:
            points.append(ParetoPoint(e.config, e.extraction_time_s, e.mean_accuracy))
            if e.config.is_original:
                continue
            record = speedup(original.extraction_time_s, e.extraction_time_s)
            speedups[e.config] = record
            speedup_rows.append(dict(records.config_cells(e.config), t_orig=record.t_orig,
                                     t_ds=record.t_ds, speedup=record.S))
        marked = mark_dominated(points)
        rows = tradeoff_summary(evaluations, critical, speedups)

        writer = self.writer
        writer.write_csv('timing/speedup.csv', records.CONFIG_FIELDS + ('t_orig', 't_ds', 'speedup'),
                         speedup_rows)
        writer.write_csv('timing/pareto.csv',
                         records.CONFIG_FIELDS + ('label', 'extraction_time_s', 'mean_accuracy', 'dominated'),
                         [dict(records.config_cells(p.config), label=p.config.label,
                               extraction_time_s=p.extraction_time_s, mean_accuracy=p.mean_accuracy,
                               dominated=int(p.dominated)) for p in marked])
        summary_fields = ('algorithm', 'factor', 'critical_factor')
        metric_fields = ('accuracy', 'f1', 'precision', 'recall', 'roc_auc')
        table = []
        for row in rows:
            cells = {'algorithm': row.algorithm, 'factor': row.factor,
                     'critical_factor': row.critical_factor, 'speedup': row.speedup}
            for name in metric_fields:
                mean, std = getattr(row, name)
                cells[f"{name}_mean"], cells[f"{name}_std"] = mean, std
            table.append(cells)
        writer.write_csv('timing/tradeoff_summary.csv',
                         summary_fields + tuple(f"{n}_{s}" for n in metric_fields for s in ('mean', 'std'))
                         + ('speedup',), table)

        original_point = next(p for p in marked if p.config.is_original)
        if original_point.dominated:
            safe_print("OK: Original is dominated on the time/accuracy plane")
        else:
            safe_print("WARNING: Original is on the Pareto front")
        return marked

    def analysis_step(self, evaluations, attributions):
        """Statistics, stability, clustering, embedding and the soft checks."""
        critical = self.statistics_step(evaluations)
        self.stability_step(evaluations)
        clustering = self.clustering_step(evaluations)
        embedding, trajectories = self.embedding_step(evaluations)

        checks = {'env_pcc_dist_in_top3_attribution': None, 'lttb_minmaxlttb_trajectories_closest': None}
        if attributions:
            top = sorted(attributions, key=lambda m: (-attributions[m], m))[:3]
            checks['env_pcc_dist_in_top3_attribution'] = 'env_pcc_dist' in top
        present = {t.algorithm for t in trajectories}
        if all(a in present for a in TRAJECTORY_CHECK):
            try:
                pair = mean_trajectory_distance(trajectories, 'LTTB', 'MinMaxLTTB')
                to_decimate = min(mean_trajectory_distance(trajectories, 'LTTB', 'Decimate'),
                                  mean_trajectory_distance(trajectories, 'MinMaxLTTB', 'Decimate'))
                checks['lttb_minmaxlttb_trajectories_closest'] = pair < to_decimate
            except DataError as e:
                logger.info("trajectory check not applicable: %s", e)
        for name, passed in checks.items():
            if passed is False:
                safe_print(f"WARNING: soft check failed: {name}")

        self.writer.write_json('analysis_status.json', {
            'clustering': clustering,
            'embedding': embedding,
            'checks': checks,
        })
        self.tradeoff_step(evaluations, critical)

    def plot_step(self, strict=True):
        """Render plots/*.svg from the artifacts in the output directory."""
        out = self.out_dir
        writer = self.writer
        with stage('plot'):
            accuracy = [dict(r, factor=int(r['factor']), mean_accuracy=float(r['mean_accuracy']),
                             std_accuracy=float(r['std_accuracy']))
                        for r in read_csv(out, 'accuracy.csv')]
            critical = {r['algorithm']: int(r['critical_factor'])
                        for r in read_csv(out, 'critical_factors.csv') if r['critical_factor']}
            writer.write_text('plots/accuracy.svg', svg.accuracy_plot(accuracy, critical))

            cells, labels, classes = {}, [], []
            sensitivity = {}
            for r in read_csv(out, 'per_class.csv'):
                config = DownsampleConfig(r['algorithm'], int(r['factor']))
                sensitivity.setdefault((config, r['class']), []).append(float(r['sensitivity']))
                if r['class'] not in classes:
                    classes.append(r['class'])
            configs = _sorted_configs({config for config, _ in sensitivity})
            labels = [c.label for c in configs]
            for (config, name), values in sensitivity.items():
                cells[(config.label, name)] = float(np.mean(values))
            writer.write_text('plots/per_class_sensitivity.svg',
                              svg.per_class_heatmap(cells, labels, classes))

            points = [ParetoPoint(DownsampleConfig(r['algorithm'], int(r['factor'])),
                                  float(r['extraction_time_s']), float(r['mean_accuracy']),
                                  bool(int(r['dominated'])))
                      for r in read_csv(out, 'timing/pareto.csv')]
            writer.write_text('plots/pareto.svg', svg.pareto_plot(points))

            document = read_json(out, 'trajectories.json')
            if document.get('trajectories'):
                writer.write_text('plots/trajectories.svg',
                                  svg.trajectory_plot(document['trajectories']))
            elif strict:
                raise DataError(f"{out / 'trajectories.json'}: no trajectories to plot")
            else:
                safe_print("WARNING: no trajectories to plot")
        safe_print("OK: plots written to " + str(out / 'plots'))

    # ------------------------------------------------------------ commands

    def banner(self, title):
        print_banner(f"Downsample Audit - {title}")
        safe_print(f"Output: {self.out_dir}")
        safe_print(f"Seed: {self.config.seed}")
        safe_print(f"Workers: {self.workers}")

    def cmd_run(self):
        """Execute the complete workflow."""
        self.banner("Full Workflow")
        safe_print(f"Algorithms: {', '.join(self.config.algorithms)}")
        safe_print(f"Factors: {', '.join(str(f) for f in self.config.factors)}")

        print_step(1, "Preparing dataset")
        dataset = self.load_input()

        print_step(2, "Applying downsampling grid")
        cells = self.apply_grid_step(dataset)

        print_step(3, "Computing metric profiles")
        summaries, cells = self.metrics_step(dataset, cells)

        print_step(4, "Evaluating classification pipeline")
        evaluations, _ = self.evaluate_step(dataset, cells)
        self.write_grid_errors()

        print_step(5, "Ranking configurations")
        try:
            attributions = self.rank_step(summaries, evaluations)
        except StepError as e:
            if e.exit_code != 3:
                raise
            self.skip_rank(e)
            attributions = None

        print_step(6, "Analyzing results")
        self.analysis_step(evaluations, attributions)

        print_step(7, "Rendering plots")
        self.plot_step(strict=False)

        manifest = self.writer.save_manifest()
        safe_print(f"\nWorkflow completed! Manifest: {manifest}")

    def cmd_synth(self):
        """Write the configured synthetic dataset as raw-f64le."""
        self.banner("Synthetic Dataset")
        if not self.config.is_synthetic:
            raise ConfigError("synth needs a config with a 'synth' dataset")
        dataset = self.load_input()
        with stage('synth'):
            write_dataset(dataset, self.out_dir / 'dataset', 'raw-f64le')
        self.writer.record_tree('dataset')
        self.writer.save_manifest()
        safe_print(f"OK: {len(dataset)} signals written to {self.out_dir / 'dataset'}")

    def cmd_metrics(self):
        """Downsampling grid and metric summaries only."""
        self.banner("Metric Profiles")
        print_step(1, "Preparing dataset")
        dataset = self.load_input()
        print_step(2, "Applying downsampling grid")
        cells = self.apply_grid_step(dataset)
        print_step(3, "Computing metric profiles")
        self.metrics_step(dataset, cells)
        self.write_grid_errors()
        self.writer.save_manifest()

    def cmd_rank(self):
        """Ranker training and evaluation from existing summaries and evaluations."""
        self.banner("Ranking")
        with stage('rank'):
            summaries = [records.summary_from_row(r) for r in read_csv(self.out_dir, 'metric_summaries.csv')]
            document = read_json(self.out_dir, 'evaluations.json')
            evaluations = [records.evaluation_from_document(d) for d in document.get('evaluations', [])]
        self.rank_step(summaries, evaluations)
        self.writer.save_manifest()

    def cmd_plot(self):
        self.banner("Plots")
        self.plot_step(strict=True)
        self.writer.save_manifest()

    def cmd_bench(self):
        """Isolated single-threaded extraction timing per configuration."""
        self.banner("Extraction Benchmark")
        config = self.config
        dataset = self.load_input()
        with stage('bench', 'Original'):
            t_orig = benchmark_extraction(dataset, config.bench_warmup, config.bench_repeats)
        safe_print(f"Original: {t_orig:.4f}s")

        rows = []
        for cell in self.grid_configs():
            try:
                reduced = dataset.with_signals([downsample(s, cell) for s in dataset.signals])
                t_ds = benchmark_extraction(reduced, config.bench_warmup, config.bench_repeats)
            except DataError as e:
                self._grid_error('bench', cell, e)
                continue
            record = speedup(t_orig, t_ds)
            rows.append(dict(records.config_cells(cell), t_orig=record.t_orig, t_ds=record.t_ds,
                             speedup=record.S))
            safe_print(f"  {cell.label}: {t_ds:.4f}s (speedup {record.S:.1f}x)")
        self.writer.write_csv('timing/bench.csv', records.CONFIG_FIELDS + ('t_orig', 't_ds', 'speedup'),
                              rows)
        self.writer.save_manifest()

    COMMANDS = {
        'run': cmd_run,
        'synth': cmd_synth,
        'metrics': cmd_metrics,
        'rank': cmd_rank,
        'plot': cmd_plot,
        'bench': cmd_bench,
    }

    def execute(self, command):
        self.COMMANDS[command](self)


def _int_list(text):
    try:
        return tuple(int(part) for part in text.split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _name_list(text):
    return tuple(part.strip() for part in text.split(',') if part.strip())


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='workflow config (JSON)')
    common.add_argument('--out', help='output directory')
    common.add_argument('--seed', type=int)
    common.add_argument('--folds', type=int)
    common.add_argument('--algorithms', type=_name_list, help='comma-separated, e.g. LTTB,Decimate')
    common.add_argument('--factors', type=_int_list, help='comma-separated, e.g. 2,10,30')
    common.add_argument('--threads', type=int, help='worker pool size')
    common.add_argument('--verbose', action='store_true', default=None)

    parser = argparse.ArgumentParser(
        prog='downsample_audit',
        description='Audit the information lost by time-series downsampling.',
        epilog='Environment: DOWNSAMPLE_AUDIT_THREADS sets the worker pool size. '
               'Precedence: defaults < --config < environment < flags.')
    commands = parser.add_subparsers(dest='command', metavar='<command>')
    commands.add_parser('run', parents=[common], help='full workflow: grid, metrics, evaluation, ranking, analysis, plots')
    commands.add_parser('synth', parents=[common], help='write the configured synthetic dataset')
    commands.add_parser('metrics', parents=[common], help='downsampling grid and metric summaries')
    commands.add_parser('rank', parents=[common], help='train and evaluate the ranker on existing artifacts')
    commands.add_parser('plot', parents=[common], help='render SVG plots from existing artifacts')
    commands.add_parser('bench', parents=[common], help='isolated feature-extraction timing per configuration')
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if not args.command:
        parser.print_help()
        return 0

    setup_logging(bool(args.verbose))
    try:
        config = load_config(args.config, output_dir=args.out, seed=args.seed, folds=args.folds,
                             algorithms=args.algorithms, factors=args.factors,
                             threads=args.threads, verbose=args.verbose)
        DownsampleAuditCLI(config).execute(args.command)
    except DownsampleAuditError as e:
        safe_print(f"ERROR: {e}", file=sys.stderr)
        return e.exit_code
    except Exception as e:
        logger.debug("internal error", exc_info=True)
        safe_print(f"ERROR: internal error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
