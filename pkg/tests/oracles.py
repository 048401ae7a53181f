"""Reference computations that share no code path with the package."""
import itertools
import math

import numpy as np


def random_instance(rng, n, d, j):
    """Design, target and a random contiguous partition's group sizes."""
    F = rng.standard_normal((n, d))
    w = rng.standard_normal(d) * rng.uniform(0.0, 1.5, size=d)
    y = F @ w + rng.uniform(0.1, 1.0) * rng.standard_normal(n)
    cuts = np.sort(rng.choice(np.arange(1, d), size=j - 1, replace=False)) if j > 1 else []
    sizes = np.diff(np.concatenate([[0], cuts, [d]])).astype(int)
    return F, y, sizes


def log_joint_direct(F, y, col_var, nu, lambdas, eta, tau, kappa, phi):
    """log N(y | 0, nu I + F diag(col_var) F') + inverse-gamma terms, via an N x N solve."""
    n = len(y)
    C = nu * np.eye(n) + (F * col_var) @ F.T
    sign, logdet = np.linalg.slogdet(C)
    assert sign > 0
    quad = y @ np.linalg.solve(C, y)
    out = -0.5 * (n * math.log(2 * math.pi) + logdet + quad)

    def lig(x, a, b):
        return a * math.log(b) - math.lgamma(a) - (a + 1) * math.log(x) - b / x

    out += sum(lig(l, eta, tau) for l in lambdas if l > 0)
    return out + lig(nu, kappa, phi)


def golden_max(f, lo, hi, tol=1e-13, iters=400):
    """Maximize a unimodal function on [lo, hi] by golden-section search."""
    g = (math.sqrt(5) - 1) / 2
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (a + b) / 2


def auc_pairs(scores, labels):
    """Fraction of positive/negative pairs ranked correctly, ties count 1/2."""
    pos = [s for s, l in zip(scores, labels) if l == 1]
    neg = [s for s, l in zip(scores, labels) if l != 1]
    wins = sum(1.0 if p > q else 0.5 if p == q else 0.0 for p in pos for q in neg)
    return wins / (len(pos) * len(neg))


def is_set_partition(groups, universe):
    members = [x for g in groups for x in g]
    return (
        all(len(g) > 0 for g in groups)
        and len(members) == len(set(members))
        and set(members) == set(universe)
    )


def all_rank_lists(names):
    for perm in itertools.permutations(range(1, len(names) + 1)):
        yield dict(zip(names, perm))
