"""Banded ridge regression fitted by MAP expectation-maximization.

Model::

    y = F w + e,            e ~ N(0, nu I)
    w ~ N(0, Lambda),       Lambda = blockdiag(lambda_j * Omega_j)
    lambda_j ~ InvGamma(eta, tau),   nu ~ InvGamma(kappa, phi)

The weights are the latent variables. The E-step computes their Gaussian
posterior (mu, Sigma) given (lambda, nu); the M-step maximizes the expected
complete-data log posterior in closed form::

    lambda_j <- (mu_j' Omega_j^-1 mu_j + tr(Omega_j^-1 Sigma_jj) + 2 tau) / (D_j + 2 eta + 2)
    nu       <- (|y - F mu|^2 + tr(Sigma F'F) + 2 phi) / (N + 2 kappa + 2)

Each iteration cannot decrease ``log p(y | lambda, nu) + log p(lambda) + log p(nu)``,
which is recorded in ``objective_trace``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from .core import EmBandedConfig, GroupPartition, Standardization
from .errors import DegenerateError, DimensionMismatch, NumericalError

_LOG_2PI = np.log(2.0 * np.pi)


@dataclass
class FitState:
    """Solver state after an E-step at (lambdas, nu)."""

    mu: np.ndarray
    sigma: np.ndarray
    lambdas: np.ndarray
    nu: float
    iteration: int = 0
    objective_trace: list = field(default_factory=list)


@dataclass(frozen=True)
class FitResult:
    weights: np.ndarray
    lambdas: np.ndarray
    importances: np.ndarray
    nu: float
    converged: bool
    iterations_used: int
    pruned_groups: tuple
    group_names: tuple
    objective_trace: tuple = ()

    def as_dict(self):
        return {
            "weights": [float(v) for v in self.weights],
            "lambdas": dict(zip(self.group_names, map(float, self.lambdas))),
            "importances": dict(zip(self.group_names, map(float, self.importances))),
            "nu": float(self.nu),
            "converged": bool(self.converged),
            "iterations_used": int(self.iterations_used),
            "pruned_groups": list(self.pruned_groups),
        }


def log_inv_gamma(x, shape, scale):
    """Log density of InvGamma(shape, scale) at x > 0."""
    x = np.asarray(x, dtype=float)
    return shape * np.log(scale) - gammaln(shape) - (shape + 1.0) * np.log(x) - scale / x


def _cholesky(A):
    """Lower Cholesky factor, retrying once with diagonal jitter."""
    if not np.all(np.isfinite(A)):
        raise NumericalError("non-finite entries in the system matrix")
    try:
        return scipy.linalg.cholesky(A, lower=True)
    except np.linalg.LinAlgError:
        pass
    jitter = 1e-10 * np.trace(A) / A.shape[0]
    try:
        return scipy.linalg.cholesky(A + jitter * np.eye(A.shape[0]), lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"matrix not positive definite even with jitter {jitter:g}") from exc


def _chol_inverse(L):
    inv = scipy.linalg.cho_solve((L, True), np.eye(L.shape[0]))
    return 0.5 * (inv + inv.T)


def _active_mask(partition, lambdas):
    return lambdas[partition.column_groups()] > 0


def _prior_blocks(partition, lambdas, active, omegas):
    """Prior covariance and precision restricted to active columns.

    Returns diagonal vectors when ``omegas`` is None, dense matrices otherwise.
    """
    groups = partition.column_groups()
    if omegas is None:
        var = lambdas[groups][active]
        return var, 1.0 / var
    d = partition.total_columns
    cov = np.zeros((d, d))
    prec = np.zeros((d, d))
    for j in range(partition.n_groups):
        if lambdas[j] <= 0:
            continue
        idx = partition.indices(j)
        om = np.eye(len(idx)) if omegas[j] is None else np.asarray(omegas[j], dtype=float)
        cov[np.ix_(idx, idx)] = lambdas[j] * om
        prec[np.ix_(idx, idx)] = np.linalg.inv(om) / lambdas[j]
    return cov[np.ix_(active, active)], prec[np.ix_(active, active)]


def _as_matrix(a):
    return np.diag(a) if a.ndim == 1 else a


def _posterior(F, y, lambdas, nu, partition, omegas=None, FtF=None, Fty=None):
    """Posterior over the weights plus the log marginal likelihood of y."""
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    n, d = F.shape
    if y.shape != (n,):
        raise DimensionMismatch(f"y has shape {y.shape}, F has {n} rows")
    if partition.total_columns != d:
        raise DimensionMismatch(f"partition covers {partition.total_columns} columns, F has {d}")
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.shape != (partition.n_groups,):
        raise DimensionMismatch(f"expected {partition.n_groups} lambdas")
    if not nu > 0:
        raise ValueError("noise variance must be positive")

    active = _active_mask(partition, lambdas)
    mu = np.zeros(d)
    sigma = np.zeros((d, d))
    da = int(active.sum())
    if da == 0:
        quad = y @ y / nu
        logdet = n * np.log(nu)
        return mu, sigma, -0.5 * (n * _LOG_2PI + logdet + quad)

    cov, prec = _prior_blocks(partition, lambdas, active, omegas)
    Fa = F[:, active]
    if da <= n:
        FtF_a = (Fa.T @ Fa) if FtF is None else FtF[np.ix_(active, active)]
        Fty_a = (Fa.T @ y) if Fty is None else Fty[active]
        P = FtF_a / nu + _as_matrix(prec)
        L = _cholesky(P)
        sig_a = _chol_inverse(L)
        mu_a = scipy.linalg.cho_solve((L, True), Fty_a / nu)
        # |nu I + F Lam F'| = nu^N |Lam| |Lam^-1 + F'F/nu|
        if cov.ndim == 1:
            logdet_prior = np.sum(np.log(cov))
        else:
            logdet_prior = np.linalg.slogdet(cov)[1]
        logdet = n * np.log(nu) + logdet_prior + 2.0 * np.sum(np.log(np.diag(L)))
        resid = y - Fa @ mu_a
        pen = mu_a @ (prec * mu_a) if prec.ndim == 1 else mu_a @ prec @ mu_a
        quad = resid @ resid / nu + pen
    else:
        K = (Fa * cov).T if cov.ndim == 1 else cov @ Fa.T  # Lam F'
        C = Fa @ K + nu * np.eye(n)
        L = _cholesky(C)
        alpha = scipy.linalg.cho_solve((L, True), y)
        mu_a = K @ alpha
        V = scipy.linalg.solve_triangular(L, K.T, lower=True)
        sig_a = _as_matrix(cov) - V.T @ V
        sig_a = 0.5 * (sig_a + sig_a.T)
        logdet = 2.0 * np.sum(np.log(np.diag(L)))
        quad = y @ alpha

    mu[active] = mu_a
    sigma[np.ix_(active, active)] = sig_a
    return mu, sigma, -0.5 * (n * _LOG_2PI + logdet + quad)


def e_step(F, y, lambdas, nu, partition: GroupPartition, omegas=None):
    """Posterior mean and covariance of the weights.

    ``Sigma = (F'F / nu + Lambda^-1)^-1`` and ``mu = Sigma F'y / nu`` over the
    columns of unpruned groups (lambda_j > 0); pruned columns get zero mean
    and zero covariance. Uses a D x D Cholesky solve when the active width
    is at most N and the N x N Woodbury form otherwise.
    """
    mu, sigma, _ = _posterior(F, y, lambdas, nu, partition, omegas)
    return mu, sigma


def log_posterior(F, y, lambdas, nu, partition, config: EmBandedConfig, omegas=None):
    """Unnormalized log posterior of the hyperparameters.

    Evaluates ``log N(y | 0, nu I + F Lambda F') + sum_j log IG(lambda_j) + log IG(nu)``;
    pruned groups (lambda_j = 0) contribute no hyperprior term.
    """
    _, _, log_ev = _posterior(F, y, lambdas, nu, partition, omegas)
    return log_ev + _log_hyperprior(lambdas, nu, config)


def _log_hyperprior(lambdas, nu, config):
    lambdas = np.asarray(lambdas, dtype=float)
    live = lambdas[lambdas > 0]
    return float(
        np.sum(log_inv_gamma(live, config.eta, config.tau))
        + log_inv_gamma(nu, config.kappa, config.phi)
    )


def m_step(mu, sigma, F, y, partition: GroupPartition, config: EmBandedConfig,
           omegas=None, FtF=None):
    """Closed-form hyperparameter update given the weight posterior.

    Every group is updated by the formula, pruned or not; :func:`fit`
    decides which groups stay frozen at zero.
    """
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    n = F.shape[0]
    if FtF is None:
        FtF = F.T @ F
    lambdas = np.empty(partition.n_groups)
    for j in range(partition.n_groups):
        idx = partition.indices(j)
        m = mu[idx]
        s = sigma[np.ix_(idx, idx)]
        if omegas is None or omegas[j] is None:
            second = m @ m + np.trace(s)
        else:
            om_inv = np.linalg.inv(np.asarray(omegas[j], dtype=float))
            second = m @ om_inv @ m + np.sum(om_inv * s)
        lambdas[j] = (second + 2.0 * config.tau) / (len(idx) + 2.0 * config.eta + 2.0)
    resid = y - F @ mu
    expected_sq = resid @ resid + np.sum(sigma * FtF)
    nu = (expected_sq + 2.0 * config.phi) / (n + 2.0 * config.kappa + 2.0)
    return lambdas, float(nu)


def group_importances(lambdas) -> np.ndarray:
    """Normalize group variances to importances that sum to one.

    >>> group_importances([3.0, 1.0])
    array([0.75, 0.25])
    """
    lambdas = np.asarray(lambdas, dtype=float)
    if np.any(lambdas < 0) or not np.all(np.isfinite(lambdas)):
        raise ValueError("lambdas must be finite and non-negative")
    total = lambdas.sum()
    if not total > 0:
        raise DegenerateError("every group is pruned; importances are undefined")
    return lambdas / total


def fit(F, y, partition: GroupPartition, config: EmBandedConfig | None = None,
        omegas=None, lambdas_init=None, callback=None) -> FitResult:
    """Run MAP-EM from the configured initial point.

    Parameters
    ----------
    F : ndarray, shape (N, D)
        Design matrix; already standardized if that is wanted.
    y : ndarray, shape (N,)
        Target, already centered if that is wanted.
    partition : GroupPartition
    config : EmBandedConfig, optional
    omegas : sequence of ndarray or None, optional
        Within-group prior covariance shapes; identity when omitted.
    lambdas_init : array_like, optional
        Per-group starting variances, overriding ``config.lambda_init``.
    callback : callable, optional
        Called with a :class:`FitState` after every E-step.

    Returns
    -------
    FitResult
        ``weights`` is the posterior mean at the final hyperparameters.
    """
    config = config or EmBandedConfig()
    F = np.asarray(F, dtype=float)
    y = np.asarray(y, dtype=float)
    if F.ndim != 2 or y.shape != (F.shape[0],):
        raise DimensionMismatch(f"F shape {F.shape} incompatible with y shape {y.shape}")
    if partition.total_columns != F.shape[1]:
        raise DimensionMismatch(f"partition covers {partition.total_columns} columns, F has {F.shape[1]}")
    FtF = F.T @ F
    Fty = F.T @ y

    if lambdas_init is None:
        lambdas = np.full(partition.n_groups, float(config.lambda_init))
    else:
        lambdas = np.array(lambdas_init, dtype=float)
        if lambdas.shape != (partition.n_groups,):
            raise DimensionMismatch(f"expected {partition.n_groups} initial lambdas")
    nu = float(config.nu_init)
    pruned = lambdas <= 0
    trace = []
    converged = False
    iterations = 0

    for _ in range(config.max_iterations):
        mu, sigma, log_ev = _posterior(F, y, lambdas, nu, partition, omegas, FtF, Fty)
        trace.append(log_ev + _log_hyperprior(lambdas, nu, config))
        if callback is not None:
            callback(FitState(mu, sigma, lambdas.copy(), nu, iterations, list(trace)))
        new_lambdas, new_nu = m_step(mu, sigma, F, y, partition, config, omegas, FtF)
        iterations += 1
        if not config.learn_lambdas:
            new_lambdas = lambdas.copy()
        if not config.learn_nu:
            new_nu = nu
        new_lambdas[pruned] = 0.0
        newly = (~pruned) & (new_lambdas < config.prune_threshold)
        new_lambdas[newly] = 0.0
        pruned = pruned | newly

        live = ~pruned
        change = abs(new_nu - nu) / nu
        if np.any(live):
            change = max(change, float(np.max(np.abs(new_lambdas[live] - lambdas[live]) / lambdas[live])))
        if np.any(newly):
            change = np.inf
        lambdas, nu = new_lambdas, new_nu
        if change < config.relative_tolerance:
            converged = True
            break

    mu, sigma, log_ev = _posterior(F, y, lambdas, nu, partition, omegas, FtF, Fty)
    trace.append(log_ev + _log_hyperprior(lambdas, nu, config))
    names = tuple(partition.names)
    return FitResult(
        weights=mu,
        lambdas=lambdas,
        importances=group_importances(lambdas),
        nu=nu,
        converged=converged,
        iterations_used=iterations,
        pruned_groups=tuple(n for n, p in zip(names, pruned) if p),
        group_names=names,
        objective_trace=tuple(float(t) for t in trace),
    )


def predict(weights, record: Standardization, X, target: int = 0) -> np.ndarray:
    """Scores for raw feature rows: standardize, project, add the target mean."""
    weights = np.asarray(weights, dtype=float)
    Z = record.transform(np.atleast_2d(X))
    if Z.shape[1] != weights.shape[0]:
        raise DimensionMismatch(f"rows have width {Z.shape[1]}, weights have {weights.shape[0]}")
    offset = record.target_mean[target] if record.target_mean.size else 0.0
    return Z @ weights + offset
