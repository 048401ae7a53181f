"""Multi-label tagging and multi-class classification on top of the banded solver.

Every tag (or every class, one-vs-rest) gets its own banded regression on a
0/1 target. All regressions share the grouping and the feature scaling.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import em
from .core import (
    Dataset,
    EmBandedConfig,
    GroupPartition,
    MultiClass,
    MultiLabel,
    Standardization,
    column_stats,
)
from .errors import DegenerateTargetError, DimensionMismatch
from .grouping import GroupSpecDocument


def task_of(labels):
    if isinstance(labels, MultiLabel):
        return "multilabel"
    if isinstance(labels, MultiClass):
        return "multiclass"
    return "regression"


@dataclass(frozen=True)
class TaggingModel:
    task: str
    target_names: tuple
    fits: tuple  # FitResult, or None for a skipped target
    partition: GroupPartition
    record: Standardization
    config: EmBandedConfig
    skipped: dict = field(default_factory=dict)

    @property
    def feature_names(self):
        return self.partition.feature_names

    @property
    def group_names(self):
        return self.partition.names

    def fitted(self):
        """(index, name, FitResult) for targets that were not skipped."""
        return [(t, n, f) for t, (n, f) in enumerate(zip(self.target_names, self.fits)) if f is not None]

    def weight_matrix(self):
        W = np.zeros((self.partition.total_columns, len(self.target_names)))
        for t, _, f in self.fitted():
            W[:, t] = f.weights
        return W


def _resolve(dataset, grouping):
    if isinstance(grouping, GroupSpecDocument):
        partition = grouping.to_partition(dataset.feature_names)
    else:
        partition = grouping
    if partition.feature_names is not None:
        if tuple(partition.feature_names) != dataset.feature_names:
            dataset = dataset.select(partition.feature_names)
    elif partition.total_columns != dataset.n_features:
        raise DimensionMismatch(
            f"partition covers {partition.total_columns} columns, dataset has {dataset.n_features}"
        )
    return dataset, partition


def fit_tagger(dataset: Dataset, grouping, config: EmBandedConfig | None = None,
               n_jobs: int = 1) -> TaggingModel:
    """Fit one banded regression per tag or class.

    Parameters
    ----------
    dataset : Dataset
    grouping : GroupPartition or GroupSpecDocument
        A document is resolved against the dataset's feature names; features
        it leaves out are dropped only if the document says ``drop_unlisted``.
    config : EmBandedConfig, optional
        With ``standardize=False`` features are centered but not scaled.
    n_jobs : int
        Threads used for the per-target fits. Results do not depend on it.

    Targets whose labels are all equal are skipped and listed in
    ``model.skipped``; if every target is degenerate
    :class:`DegenerateTargetError` is raised.
    """
    config = config or EmBandedConfig()
    dataset, partition = _resolve(dataset, grouping)
    mean, scale = column_stats(dataset.X)
    if not config.standardize:
        scale = np.ones_like(scale)
    Y = dataset.targets()
    record = Standardization(mean, scale, Y.mean(axis=0))
    Z = record.transform(dataset.X)

    names = tuple(dataset.target_names)
    skipped = {}
    todo = []
    for t, name in enumerate(names):
        col = Y[:, t]
        if np.all(col == col[0]):
            skipped[name] = f"all labels equal to {col[0]:g}"
        else:
            todo.append(t)
    if not todo:
        raise DegenerateTargetError(f"every target is constant: {sorted(skipped)}")

    def run(t):
        return em.fit(Z, Y[:, t] - record.target_mean[t], partition, config)

    if n_jobs > 1 and len(todo) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(run, todo))
    else:
        results = [run(t) for t in todo]
    fits = [None] * len(names)
    for t, r in zip(todo, results):
        fits[t] = r
    return TaggingModel(task_of(dataset.labels), names, tuple(fits), partition, record, config, skipped)


def score(model: TaggingModel, rows) -> np.ndarray:
    """Unthresholded scores, one column per tag or class.

    ``rows`` is a raw feature matrix over ``model.feature_names`` or a
    :class:`Dataset` (columns are then selected by name).
    """
    if isinstance(rows, Dataset):
        rows = rows.select(model.feature_names).X if model.feature_names else rows.X
    Z = model.record.transform(np.atleast_2d(np.asarray(rows, dtype=float)))
    return Z @ model.weight_matrix() + model.record.target_mean


def classify(model: TaggingModel, rows) -> np.ndarray:
    """Class with the highest score; ties go to the lowest class index."""
    return np.argmax(score(model, rows), axis=1)


def aggregate_importances(model: TaggingModel):
    """Global group importances and the per-target breakdown.

    The global vector is the unweighted mean over fitted targets,
    renormalized to sum to one.
    """
    per_target = {name: f.importances for _, name, f in model.fitted()}
    mean = np.mean(list(per_target.values()), axis=0)
    return mean / mean.sum(), per_target


def mean_lambdas(model: TaggingModel) -> np.ndarray:
    return np.mean([f.lambdas for _, _, f in model.fitted()], axis=0)
