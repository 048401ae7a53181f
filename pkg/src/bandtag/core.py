"""Model objects: feature partitions, datasets, solver configuration.

All containers are frozen; arrays stored on them are made read-only so a
fitted object can be shared between threads.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence, Union

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyGroupError,
    GapError,
    InvalidConfig,
    LabelDomainError,
    OverlapError,
    PartitionError,
    UnknownFeatureError,
)


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint assignment of ``total_columns`` design columns to named groups.

    Parameters
    ----------
    groups : sequence of (name, column indices)
        Group order is significant: it fixes the order of lambdas and
        importances everywhere downstream.
    total_columns : int
        Width D of the design matrix.
    feature_names : sequence of str, optional
        Names of the D columns, when known.
    """

    groups: tuple
    total_columns: int
    feature_names: tuple | None = None

    def __post_init__(self):
        groups = tuple((str(name), tuple(int(c) for c in cols)) for name, cols in self.groups)
        object.__setattr__(self, "groups", groups)
        if self.feature_names is not None:
            object.__setattr__(self, "feature_names", tuple(self.feature_names))
            if len(self.feature_names) != self.total_columns:
                raise DimensionMismatch(
                    f"{len(self.feature_names)} feature names for {self.total_columns} columns"
                )
        if not groups:
            raise PartitionError("a partition needs at least one group")
        names = [g[0] for g in groups]
        if len(set(names)) != len(names):
            raise PartitionError(f"duplicate group names in {names}")
        owner = {}
        for name, cols in groups:
            if not cols:
                raise EmptyGroupError(f"group {name!r} is empty")
            for c in cols:
                if not 0 <= c < self.total_columns:
                    raise UnknownFeatureError(f"group {name!r} references column {c}")
                if c in owner:
                    raise OverlapError(
                        f"column {self._label(c)} is in both {owner[c]!r} and {name!r}"
                    )
                owner[c] = name
        if len(owner) != self.total_columns:
            missing = sorted(set(range(self.total_columns)) - owner.keys())
            raise GapError(f"columns not assigned to any group: {[self._label(c) for c in missing]}")

    def _label(self, c):
        return repr(self.feature_names[c]) if self.feature_names else str(c)

    @property
    def names(self) -> list[str]:
        return [g[0] for g in self.groups]

    @property
    def n_groups(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> np.ndarray:
        return np.array([len(g[1]) for g in self.groups])

    def indices(self, j) -> np.ndarray:
        return np.array(self.groups[j][1], dtype=int)

    def column_groups(self) -> np.ndarray:
        """Group index of every column."""
        out = np.empty(self.total_columns, dtype=int)
        for j, (_, cols) in enumerate(self.groups):
            out[list(cols)] = j
        return out

    @classmethod
    def contiguous(cls, sizes, names=None):
        """Partition where group j owns the next ``sizes[j]`` columns."""
        sizes = [int(s) for s in sizes]
        names = names or [f"g{j}" for j in range(len(sizes))]
        start = np.concatenate([[0], np.cumsum(sizes)]).astype(int)
        groups = [(n, range(start[j], start[j + 1])) for j, n in enumerate(names)]
        return cls(groups, int(start[-1]))

    def permuted(self, perm) -> "GroupPartition":
        """Partition for the design ``X[:, perm]``."""
        perm = np.asarray(perm)
        inverse = np.empty_like(perm)
        inverse[perm] = np.arange(len(perm))
        groups = [(n, sorted(int(inverse[c]) for c in cols)) for n, cols in self.groups]
        names = None if self.feature_names is None else [self.feature_names[p] for p in perm]
        return GroupPartition(groups, self.total_columns, names)

    def reordered(self, order) -> "GroupPartition":
        """Same columns, groups listed in ``order``."""
        return replace(self, groups=tuple(self.groups[j] for j in order))


def validate_partition(
    groups: Mapping[str, Sequence[str]],
    feature_names: Sequence[str],
    drop_unlisted: bool = False,
) -> GroupPartition:
    """Resolve a name-based grouping against the columns of a dataset.

    Parameters
    ----------
    groups : mapping of group name to feature names
    feature_names : sequence of str
        Dataset column names.
    drop_unlisted : bool
        When True, features that no group mentions are left out of the
        partition instead of raising :class:`GapError`.

    Returns
    -------
    GroupPartition
        Indexed over the retained features, which keep their dataset order
        and are listed in ``partition.feature_names``.
    """
    feature_names = list(feature_names)
    position = {f: i for i, f in enumerate(feature_names)}
    owner = {}
    for gname, members in groups.items():
        if len(members) == 0:
            raise EmptyGroupError(f"group {gname!r} is empty")
        for f in members:
            if f not in position:
                raise UnknownFeatureError(f"group {gname!r} references unknown feature {f!r}")
            if f in owner:
                raise OverlapError(f"feature {f!r} is in both {owner[f]!r} and {gname!r}")
            owner[f] = gname
    unlisted = [f for f in feature_names if f not in owner]
    if unlisted and not drop_unlisted:
        raise GapError(f"features not assigned to any group: {unlisted}")
    kept = [f for f in feature_names if f in owner]
    new_pos = {f: i for i, f in enumerate(kept)}
    indexed = [(g, sorted(new_pos[f] for f in members)) for g, members in groups.items()]
    return GroupPartition(indexed, len(kept), kept)


def build_prior_covariance(partition: GroupPartition, lambdas) -> np.ndarray:
    """Per-column prior variance, i.e. the diagonal of the block prior.

    With identity within-group covariance the prior over the weights is
    ``diag(lambda_{g(c)})``. A zero lambda marks a pruned group; its columns
    get variance 0.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.shape != (partition.n_groups,):
        raise DimensionMismatch(
            f"expected {partition.n_groups} lambdas, got shape {lambdas.shape}"
        )
    if np.any(lambdas < 0) or not np.all(np.isfinite(lambdas)):
        raise ValueError("lambdas must be finite and non-negative")
    return lambdas[partition.column_groups()]


def prior_covariance_matrix(partition: GroupPartition, lambdas, omegas=None) -> np.ndarray:
    """Dense block-diagonal prior ``blockdiag(lambda_j * Omega_j)``.

    ``omegas`` is an optional sequence of per-group SPD matrices; ``None``
    (or a ``None`` entry) means identity.
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if omegas is None:
        return np.diag(build_prior_covariance(partition, lambdas))
    if len(omegas) != partition.n_groups:
        raise DimensionMismatch(f"expected {partition.n_groups} omega blocks")
    out = np.zeros((partition.total_columns, partition.total_columns))
    for j in range(partition.n_groups):
        idx = partition.indices(j)
        om = np.eye(len(idx)) if omegas[j] is None else np.asarray(omegas[j], dtype=float)
        if om.shape != (len(idx), len(idx)):
            raise DimensionMismatch(f"omega block {j} has shape {om.shape}, need {len(idx)}")
        out[np.ix_(idx, idx)] = lambdas[j] * om
    return out


# -- datasets ---------------------------------------------------------------


@dataclass(frozen=True)
class MultiLabel:
    tag_names: tuple
    matrix: np.ndarray  # N x T, entries in {0, 1}

    def __post_init__(self):
        object.__setattr__(self, "tag_names", tuple(self.tag_names))
        m = np.asarray(self.matrix)
        if m.ndim != 2 or m.shape[1] != len(self.tag_names):
            raise DimensionMismatch(f"label matrix shape {m.shape} vs {len(self.tag_names)} tags")
        bad = np.argwhere((m != 0) & (m != 1))
        if len(bad):
            r, c = bad[0]
            raise LabelDomainError(f"row {r}, tag {self.tag_names[c]!r}: value {m[r, c]!r} not in {{0,1}}")
        object.__setattr__(self, "matrix", _frozen(m, dtype=np.int8))

    @property
    def target_names(self):
        return list(self.tag_names)

    def targets(self):
        return self.matrix.astype(float)

    def take(self, rows):
        return MultiLabel(self.tag_names, self.matrix[rows])


@dataclass(frozen=True)
class MultiClass:
    class_names: tuple
    ids: np.ndarray  # length N, entries in 0..C-1

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        ids = np.asarray(self.ids)
        if ids.ndim != 1:
            raise DimensionMismatch("class ids must be one-dimensional")
        if ids.size and (ids.min() < 0 or ids.max() >= len(self.class_names)):
            raise LabelDomainError(f"class ids must lie in 0..{len(self.class_names) - 1}")
        object.__setattr__(self, "ids", _frozen(ids, dtype=int))

    @property
    def target_names(self):
        return list(self.class_names)

    def targets(self):
        """One-vs-rest indicator matrix."""
        out = np.zeros((len(self.ids), len(self.class_names)))
        out[np.arange(len(self.ids)), self.ids] = 1.0
        return out

    def take(self, rows):
        return MultiClass(self.class_names, self.ids[rows])


@dataclass(frozen=True)
class Regression:
    target_name: str
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _frozen(np.ravel(self.values)))

    @property
    def target_names(self):
        return [self.target_name]

    def targets(self):
        return self.values[:, None].copy()

    def take(self, rows):
        return Regression(self.target_name, self.values[rows])


Labels = Union[MultiLabel, MultiClass, Regression]


def _n_label_rows(labels):
    if isinstance(labels, MultiLabel):
        return labels.matrix.shape[0]
    if isinstance(labels, MultiClass):
        return len(labels.ids)
    return len(labels.values)


@dataclass(frozen=True)
class Dataset:
    sample_ids: tuple
    feature_names: tuple
    X: np.ndarray
    labels: Labels

    def __post_init__(self):
        object.__setattr__(self, "sample_ids", tuple(str(s) for s in self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))
        X = _frozen(self.X)
        object.__setattr__(self, "X", X)
        if X.ndim != 2:
            raise DimensionMismatch("X must be a matrix")
        n, d = X.shape
        if n < 1 or d < 1:
            raise DimensionMismatch("need at least one row and one column")
        if len(self.sample_ids) != n or _n_label_rows(self.labels) != n:
            raise DimensionMismatch(
                f"{n} feature rows, {len(self.sample_ids)} ids, {_n_label_rows(self.labels)} label rows"
            )
        if len(self.feature_names) != d:
            raise DimensionMismatch(f"{len(self.feature_names)} names for {d} columns")
        if len(set(self.feature_names)) != d:
            raise DimensionMismatch("feature names must be unique")

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def target_names(self):
        return self.labels.target_names

    def targets(self) -> np.ndarray:
        return self.labels.targets()

    def take(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(
            [self.sample_ids[r] for r in rows], self.feature_names, self.X[rows], self.labels.take(rows)
        )

    def select(self, feature_names) -> "Dataset":
        pos = {f: i for i, f in enumerate(self.feature_names)}
        cols = [pos[f] for f in feature_names]
        return replace(self, feature_names=tuple(feature_names), X=self.X[:, cols])


# -- configuration ----------------------------------------------------------


@dataclass(frozen=True)
class EmBandedConfig:
    """Hyperpriors and iteration controls for the banded EM solver.

    ``eta``/``tau`` are shape/scale of the Inverse-Gamma prior on every group
    variance, ``kappa``/``phi`` the same for the noise variance.
    """

    eta: float = 1e-4
    tau: float = 1e-4
    kappa: float = 1e-4
    phi: float = 1e-4
    max_iterations: int = 200
    relative_tolerance: float = 1e-8
    lambda_init: float = 1.0
    nu_init: float = 1.0
    prune_threshold: float = 1e-10
    learn_lambdas: bool = True
    learn_nu: bool = True
    standardize: bool = True

    def __post_init__(self):
        for name in ("eta", "tau", "kappa", "phi", "lambda_init", "nu_init", "relative_tolerance"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidConfig(f"{name} must be a positive finite number, got {v!r}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidConfig(f"max_iterations must be a positive integer, got {self.max_iterations!r}")
        if not self.prune_threshold >= 0:
            raise InvalidConfig("prune_threshold must be non-negative")

    def to_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


# -- standardization --------------------------------------------------------


@dataclass(frozen=True)
class Standardization:
    """Column means/scales and per-target means used to map between spaces."""

    feature_mean: np.ndarray
    feature_scale: np.ndarray
    target_mean: np.ndarray = field(default_factory=lambda: np.zeros(0))

    def __post_init__(self):
        for name in ("feature_mean", "feature_scale", "target_mean"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @classmethod
    def identity(cls, n_features, n_targets=0):
        return cls(np.zeros(n_features), np.ones(n_features), np.zeros(n_targets))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(self.feature_mean):
            raise DimensionMismatch(
                f"rows have width {X.shape[-1]}, model expects {len(self.feature_mean)}"
            )
        return (X - self.feature_mean) / self.feature_scale

    def raw_coefficients(self, weights, target=0):
        """(slopes, intercept) of the same predictor expressed on raw features."""
        weights = np.asarray(weights, dtype=float)
        slopes = weights / self.feature_scale
        return slopes, self.target_mean[target] - self.feature_mean @ slopes


def column_stats(X):
    """Population mean and scale; constant columns get scale 1."""
    X = np.asarray(X, dtype=float)
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    constant = sd <= 1e-12 * np.maximum(1.0, np.abs(mean))
    return mean, np.where(constant, 1.0, sd)


def standardize(dataset: Dataset) -> tuple[Dataset, Standardization]:
    """Center and scale every feature column; record target means.

    Uses the population standard deviation. Labels are returned untouched
    (binary and class labels have no centered representation); the target
    means needed to center regression targets are in the returned record.
    """
    if dataset.n_samples < 2:
        raise DimensionMismatch("standardization needs at least two rows")
    mean, scale = column_stats(dataset.X)
    record = Standardization(mean, scale, dataset.targets().mean(axis=0))
    return replace(dataset, X=(dataset.X - mean) / scale), record
