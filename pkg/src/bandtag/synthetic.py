"""Synthetic data with planted group structure.

True weights are nonzero only on the columns of the chosen active groups, so
a fit's group importances can be checked against known ground truth.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, MultiClass, MultiLabel, Regression
from .errors import InvalidSpec
from .grouping import GroupSpecDocument

TASKS = ("regression", "multilabel", "multiclass")


@dataclass(frozen=True)
class PlantedSpec:
    """Parameters of a planted-structure problem.

    ``n_targets`` is the tag count T for multilabel and the class count C
    for multiclass; regression always has a single target. With
    ``correlated=True`` every group shares a latent factor and each column
    is ``sqrt(mixing) * latent + sqrt(1 - mixing) * noise`` (unit variance,
    within-group correlation ``mixing``).
    """

    n_samples: int = 500
    group_sizes: tuple = (10, 10, 10, 10, 10)
    active_groups: tuple = (0,)
    weight_scale: float = 1.0
    noise_sd: float = 0.1
    task: str = "regression"
    n_targets: int = 3
    seed: int = 0
    correlated: bool = False
    mixing: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "group_sizes", tuple(int(s) for s in self.group_sizes))
        object.__setattr__(self, "active_groups", tuple(int(a) for a in self.active_groups))
        if self.n_samples < 1:
            raise InvalidSpec("n_samples must be positive")
        if not self.group_sizes or min(self.group_sizes) < 1:
            raise InvalidSpec("group sizes must be positive")
        if not self.active_groups:
            raise InvalidSpec("at least one group must be active")
        if any(not 0 <= a < len(self.group_sizes) for a in self.active_groups):
            raise InvalidSpec(f"active groups {self.active_groups} outside 0..{len(self.group_sizes) - 1}")
        if not self.weight_scale > 0:
            raise InvalidSpec("weight_scale must be positive")
        if not self.noise_sd >= 0:
            raise InvalidSpec("noise_sd must be non-negative")
        if self.task not in TASKS:
            raise InvalidSpec(f"task must be one of {TASKS}")
        if self.task == "multilabel" and self.n_targets < 1:
            raise InvalidSpec("multilabel needs at least one tag")
        if self.task == "multiclass" and self.n_targets < 2:
            raise InvalidSpec("multiclass needs at least two classes")
        if not 0 <= self.mixing < 1:
            raise InvalidSpec("mixing must lie in [0, 1)")

    @property
    def n_features(self):
        return sum(self.group_sizes)


def group_names(spec: PlantedSpec):
    return [f"group_{j + 1}" for j in range(len(spec.group_sizes))]


def feature_names(spec: PlantedSpec):
    return [
        f"group_{j + 1}_x{k + 1:02d}"
        for j, size in enumerate(spec.group_sizes)
        for k in range(size)
    ]


def generate(spec: PlantedSpec):
    """Draw a dataset.

    Returns
    -------
    dataset : Dataset
    weights : ndarray
        Shape (D,) for regression, (D, T) otherwise; exactly zero outside
        the active groups.
    grouping : GroupSpecDocument
        The planted (correct) grouping.
    """
    rng = np.random.default_rng(spec.seed)
    n, d = spec.n_samples, spec.n_features
    names = feature_names(spec)
    gnames = group_names(spec)
    col_group = np.repeat(np.arange(len(spec.group_sizes)), spec.group_sizes)

    X = rng.standard_normal((n, d))
    if spec.correlated:
        latent = rng.standard_normal((n, len(spec.group_sizes)))
        X = np.sqrt(spec.mixing) * latent[:, col_group] + np.sqrt(1.0 - spec.mixing) * X

    n_out = 1 if spec.task == "regression" else spec.n_targets
    active = np.isin(col_group, spec.active_groups)
    W = np.zeros((d, n_out))
    W[active] = spec.weight_scale * rng.standard_normal((int(active.sum()), n_out))
    Y = X @ W + spec.noise_sd * rng.standard_normal((n, n_out))

    if spec.task == "regression":
        labels = Regression("target", Y[:, 0])
        W = W[:, 0]
    elif spec.task == "multilabel":
        labels = MultiLabel([f"tag_{t + 1}" for t in range(n_out)], (Y > 0).astype(np.int8))
    else:
        labels = MultiClass([f"class_{c + 1}" for c in range(n_out)], np.argmax(Y, axis=1))

    ids = [f"s{i:05d}" for i in range(n)]
    grouping = GroupSpecDocument(
        "planted",
        {g: [names[c] for c in np.flatnonzero(col_group == j)] for j, g in enumerate(gnames)},
    )
    return Dataset(ids, names, X, labels), W, grouping
