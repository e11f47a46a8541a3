#!/usr/bin/env python3
"""
Feature-space analysis: selection stability, importance clustering and
SMACOF embedding of importance vectors with per-algorithm trajectories.
"""

import logging
from dataclasses import dataclass
from itertools import combinations

import numpy as np
from scipy.spatial.distance import pdist, squareform
from scipy.stats import pearsonr, spearmanr
from sklearn.cluster import KMeans
from sklearn.metrics import silhouette_score

from ..utils.errors import ClusteringError, ConfigError, DataError, EmbeddingError

logger = logging.getLogger(__name__)

DEFAULT_K_RANGE = range(2, 11)
KMEANS_RESTARTS = 10
SMACOF_MAX_ITER = 300
SMACOF_EPS = 1e-6


@dataclass(frozen=True, eq=False)
class ImportanceVector:
    """Feature importances of one configuration; ``fold`` None means fold-averaged."""

    config: object
    values: np.ndarray
    feature_names: tuple
    fold: int = None


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    assignment: np.ndarray
    chosen_k: int
    silhouettes: dict
    centers: np.ndarray


@dataclass(frozen=True, eq=False)
class Embedding:
    points: np.ndarray
    pearson_fidelity: float
    spearman_fidelity: float
    stress: float
    stress_history: tuple
    start: str


@dataclass(frozen=True, eq=False)
class Trajectory:
    algorithm: str
    fold: int
    labels: tuple
    vertices: np.ndarray


# ------------------------------------------------------------------ stability

def jaccard(a, b):
    a, b = set(a), set(b)
    if not a and not b:
        return 1.0
    return len(a & b) / len(a | b)


def jaccard_stability(fold_feature_sets):
    """Mean pairwise Jaccard index over all fold pairs."""
    sets = [set(s) for s in fold_feature_sets]
    if len(sets) < 2:
        raise DataError("stability needs >= 2 feature sets")
    return float(np.mean([jaccard(a, b) for a, b in combinations(sets, 2)]))


def selection_frequency(fold_feature_sets, feature_names):
    """Fraction of folds that selected each feature."""
    sets = [set(s) for s in fold_feature_sets]
    if not sets:
        raise DataError("selection frequency needs >= 1 feature set")
    return {name: sum(name in s for s in sets) / len(sets) for name in feature_names}


# ---------------------------------------------------------------- importances

def importance_vectors(evaluation, feature_names, per_fold=False):
    """Fold-averaged importance vector of one evaluation, or one per fold."""
    rows = np.array([[fold.feature_importances.get(name, 0.0) for name in feature_names]
                     for fold in evaluation.folds])
    if per_fold:
        return [ImportanceVector(evaluation.config, row, tuple(feature_names), fold.fold_id)
                for fold, row in zip(evaluation.folds, rows)]
    return [ImportanceVector(evaluation.config, rows.mean(axis=0), tuple(feature_names))]


def _stack(vectors):
    if isinstance(vectors, np.ndarray):
        return np.asarray(vectors, dtype=np.float64)
    return np.array([v.values if isinstance(v, ImportanceVector) else v for v in vectors],
                    dtype=np.float64)


# ----------------------------------------------------------------- clustering

def cluster_importances(vectors, k_range=DEFAULT_K_RANGE, seed=0):
    """k-means++ with 10 restarts per k; k chosen by best mean silhouette.

    Ties in silhouette keep the smaller k.
    """
    data = _stack(vectors)
    k_values = sorted(k_range)
    if not k_values or k_values[0] < 2:
        raise ConfigError(f"k range must start at >= 2, got {list(k_range)}")
    if data.shape[0] < k_values[-1] + 1:
        raise ClusteringError(f"{data.shape[0]} vectors cannot support k up to {k_values[-1]}")
    if np.all(data == data[0]):
        raise ClusteringError("all importance vectors are identical; silhouette is undefined")

    silhouettes, fits = {}, {}
    for k in k_values:
        model = KMeans(n_clusters=k, init='k-means++', n_init=KMEANS_RESTARTS, random_state=seed)
        labels = model.fit_predict(data)
        if len(np.unique(labels)) < 2:
            continue
        silhouettes[k] = float(silhouette_score(data, labels))
        fits[k] = model

    if not silhouettes:
        raise ClusteringError("no k in range produced two distinct clusters")
    chosen = max(silhouettes, key=lambda k: (silhouettes[k], -k))
    model = fits[chosen]
    logger.debug("chose k=%d (silhouette %.3f)", chosen, silhouettes[chosen])
    return ClusteringResult(model.labels_.copy(), chosen, silhouettes, model.cluster_centers_)


def cluster_trajectories(matrix, assignment):
    """Mean row of every cluster; rows are features, columns configurations."""
    matrix = _stack(matrix)
    assignment = np.asarray(assignment)
    return {int(c): matrix[assignment == c].mean(axis=0) for c in np.unique(assignment)}


# ------------------------------------------------------------------------ MDS

def classical_scaling(dissimilarities, dims):
    """Torgerson scaling: top eigenvectors of the double-centred squared distances."""
    n = dissimilarities.shape[0]
    centering = np.eye(n) - np.ones((n, n)) / n
    gram = -0.5 * centering @ (dissimilarities ** 2) @ centering
    eigvals, eigvecs = np.linalg.eigh(gram)
    top = np.argsort(eigvals)[::-1][:dims]
    return eigvecs[:, top] * np.sqrt(np.maximum(eigvals[top], 0.0))


def raw_stress(dissimilarities, points):
    d = squareform(pdist(points))
    return float(np.sum(np.triu(dissimilarities - d, 1) ** 2))


def guttman_transform(dissimilarities, points):
    n = points.shape[0]
    d = squareform(pdist(points))
    with np.errstate(divide='ignore', invalid='ignore'):
        ratio = np.where(d > 0, dissimilarities / d, 0.0)
    b = -ratio
    np.fill_diagonal(b, 0.0)
    np.fill_diagonal(b, -b.sum(axis=1))
    return b @ points / n


def smacof(dissimilarities, init, max_iter=SMACOF_MAX_ITER, eps=SMACOF_EPS):
    """Stress majorization from ``init``.

    Stops when the relative stress decrease falls below ``eps``. Returns the
    points and the normalized stress (raw stress over the sum of squared
    dissimilarities) before every iteration and at the end.
    """
    normalizer = float(np.sum(np.triu(dissimilarities, 1) ** 2))
    points = np.array(init, dtype=np.float64)
    stress = raw_stress(dissimilarities, points)
    history = [stress / normalizer]
    for _ in range(max_iter):
        if stress == 0.0:
            break
        points = guttman_transform(dissimilarities, points)
        new_stress = raw_stress(dissimilarities, points)
        history.append(new_stress / normalizer)
        converged = (stress - new_stress) <= eps * stress
        stress = new_stress
        if converged:
            break
    return points, history


def mds_embed(vectors, dims=3, seed=0, max_iter=SMACOF_MAX_ITER, eps=SMACOF_EPS):
    """SMACOF embedding on Euclidean distances, best of a classical and a
    seeded random start (ties keep the classical start)."""
    if dims not in (2, 3):
        raise ConfigError(f"embedding dims must be 2 or 3, got {dims}")
    data = _stack(vectors)
    if data.shape[0] < dims + 2:
        raise EmbeddingError(f"{data.shape[0]} vectors are too few for a {dims}-D embedding")
    condensed = pdist(data)
    if np.all(condensed == 0):
        raise EmbeddingError("all importance vectors are identical")
    dissimilarities = squareform(condensed)

    rng = np.random.default_rng(seed)
    starts = (
        ('classical', classical_scaling(dissimilarities, dims)),
        ('random', rng.standard_normal((data.shape[0], dims)) * condensed.mean()),
    )
    best = None
    for name, init in starts:
        points, history = smacof(dissimilarities, init, max_iter, eps)
        if best is None or history[-1] < best[2][-1]:
            best = (name, points, history)

    name, points, history = best
    embedded = pdist(points)
    if np.ptp(embedded) == 0:
        pearson = spearman = 0.0
    else:
        pearson = float(pearsonr(condensed, embedded).statistic)
        spearman = float(spearmanr(condensed, embedded).statistic)
    return Embedding(points, pearson, spearman, history[-1], tuple(history), name)


# --------------------------------------------------------------- trajectories

def trajectory_export(points, keys):
    """Polylines per (algorithm, fold) from the Original through ascending factors.

    ``keys`` holds one (config, fold) per embedded point; fold may be None.
    """
    points = np.asarray(points, dtype=np.float64)
    if len(keys) != points.shape[0]:
        raise DataError(f"{len(keys)} keys for {points.shape[0]} embedded points")
    originals, members = {}, {}
    for (config, fold), point in zip(keys, points):
        if config.is_original:
            originals[fold] = point
        else:
            members.setdefault((config.algorithm.value, fold), []).append((config.factor, point))

    trajectories = []
    for (algorithm, fold) in sorted(members, key=lambda key: (key[0], -1 if key[1] is None else key[1])):
        if fold not in originals:
            raise DataError(f"no Original point for fold {fold}")
        ordered = sorted(members[(algorithm, fold)], key=lambda item: item[0])
        labels = ('Original',) + tuple(f"{algorithm}({factor})" for factor, _ in ordered)
        vertices = np.vstack([originals[fold]] + [p for _, p in ordered])
        trajectories.append(Trajectory(algorithm, fold, labels, vertices))
    return trajectories


def mean_trajectory_distance(trajectories, algorithm_a, algorithm_b):
    """Mean distance between matching vertices of two algorithms' trajectories."""
    by_key = {(t.algorithm, t.fold): t for t in trajectories}
    distances = []
    for (algorithm, fold), traj in by_key.items():
        if algorithm != algorithm_a or (algorithm_b, fold) not in by_key:
            continue
        other = by_key[(algorithm_b, fold)]
        shared = [label.split('(')[1] for label in traj.labels[1:]]
        other_index = {label.split('(')[1]: i + 1 for i, label in enumerate(other.labels[1:])}
        for i, factor in enumerate(shared, start=1):
            if factor in other_index:
                distances.append(np.linalg.norm(traj.vertices[i] - other.vertices[other_index[factor]]))
    if not distances:
        raise DataError(f"no shared factors between {algorithm_a} and {algorithm_b}")
    return float(np.mean(distances))
