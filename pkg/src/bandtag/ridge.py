"""Ridge regression with one shared penalty, the non-banded comparator."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import InvalidConfig, NumericalError

DEFAULT_GRID = tuple(10.0 ** k for k in range(-3, 4))


@dataclass(frozen=True)
class RidgeConfig:
    """Either a fixed ``penalty`` or a ``grid`` searched by K-fold CV."""

    penalty: float | None = 1.0
    grid: tuple | None = None
    folds: int = 5

    def __post_init__(self):
        if self.grid is None:
            if self.penalty is None or not self.penalty > 0:
                raise InvalidConfig(f"penalty must be positive, got {self.penalty!r}")
        else:
            if not self.grid or any(not g > 0 for g in self.grid):
                raise InvalidConfig("grid penalties must be positive")
            if self.folds < 2:
                raise InvalidConfig("cross-validation needs at least 2 folds")

    @classmethod
    def cross_validated(cls, grid=DEFAULT_GRID, folds=5):
        return cls(penalty=None, grid=tuple(grid), folds=folds)


def _solve(F, y, penalty):
    A = F.T @ F + penalty * np.eye(F.shape[1])
    try:
        c = scipy.linalg.cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"ridge system not positive definite at penalty {penalty:g}") from exc
    return scipy.linalg.cho_solve(c, F.T @ y)


def contiguous_folds(n, k):
    """Index arrays of ``k`` contiguous, unshuffled folds."""
    return np.array_split(np.arange(n), k)


def cv_error(F, y, penalty, folds=5):
    """Mean held-out squared error over contiguous folds."""
    errs = []
    for test in contiguous_folds(len(y), folds):
        train = np.setdiff1d(np.arange(len(y)), test)
        w = _solve(F[train], y[train], penalty)
        errs.append(np.mean((y[test] - F[test] @ w) ** 2))
    return float(np.mean(errs))


def ridge_fit(F, y, config: RidgeConfig | None = None, return_penalty=False):
    """Ridge weights ``(F'F + penalty I)^-1 F'y``.

    With a grid the penalty with the smallest cross-validated MSE is used
    (first one on ties).
    """
    config = config or RidgeConfig()
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    if config.grid is None:
        penalty = float(config.penalty)
    else:
        scores = [cv_error(F, y, p, config.folds) for p in config.grid]
        penalty = float(config.grid[int(np.argmin(scores))])
    w = _solve(F, y, penalty)
    return (w, penalty) if return_penalty else w
