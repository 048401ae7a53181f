"""Command line front-end: ``bandtag {fit,compare,synth}``.

Exit codes: 0 success, 2 usage error, 3 format/join/domain error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import sys

from . import __version__
from .core import EmBandedConfig
from .errors import BandtagError
from .io import TASKS, run_compare, run_fit, run_synth
from .synthetic import PlantedSpec


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def build_parser():
    p = argparse.ArgumentParser(prog="bandtag", description="Fit banded group-shrinkage tagging models and compare group rankings.")
    p.add_argument("--version", action="version", version=f"bandtag {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a banded tagging model and write a run report")
    f.add_argument("--features", required=True)
    f.add_argument("--labels", required=True)
    f.add_argument("--groups", required=True, help="group-spec JSON")
    f.add_argument("--task", required=True, choices=TASKS)
    f.add_argument("--test-features")
    f.add_argument("--test-labels")
    f.add_argument("--holdout-fraction", type=float)
    f.add_argument("--seed", type=int, default=0)
    d = EmBandedConfig()
    f.add_argument("--eta", type=float, default=d.eta)
    f.add_argument("--tau", type=float, default=d.tau)
    f.add_argument("--kappa", type=float, default=d.kappa)
    f.add_argument("--phi", type=float, default=d.phi)
    f.add_argument("--max-iter", type=int, default=d.max_iterations)
    f.add_argument("--tol", type=float, default=d.relative_tolerance)
    f.add_argument("--no-standardize", action="store_true", help="center features without scaling")
    f.add_argument("--fixed-lambdas", action="store_true", help="keep group variances at their initial value")
    f.add_argument("--n-jobs", type=int, default=1)
    f.add_argument("--micro-auc", action="store_true", help="also report pooled micro-averaged AUC (multilabel)")
    f.add_argument("--out", required=True)
    f.add_argument("--importances-out")

    c = sub.add_parser("compare", help="absolute rank distance to a reference ranking")
    c.add_argument("--ranks", nargs="+", required=True, help="rank files or run reports")
    c.add_argument("--reference", required=True)
    c.add_argument("--out")

    s = sub.add_parser("synth", help="write a planted-structure dataset")
    s.add_argument("--n", type=int, default=500)
    s.add_argument("--groups-sizes", type=_int_list, default=[10] * 5)
    s.add_argument("--active", type=_int_list, default=[0])
    s.add_argument("--weight-scale", type=float, default=1.0)
    s.add_argument("--noise-sd", type=float, default=0.1)
    s.add_argument("--task", choices=TASKS, default="regression")
    s.add_argument("--n-targets", type=int, default=3, help="tags (multilabel) or classes (multiclass)")
    s.add_argument("--correlated", action="store_true")
    s.add_argument("--random-groups", type=int, help="also write a random grouping with this many groups")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    return p


def _fit(a):
    config = EmBandedConfig(
        eta=a.eta, tau=a.tau, kappa=a.kappa, phi=a.phi,
        max_iterations=a.max_iter, relative_tolerance=a.tol,
        learn_lambdas=not a.fixed_lambdas, standardize=not a.no_standardize,
    )
    report = run_fit(
        a.features, a.labels, a.groups, a.task, a.out, a.importances_out, config,
        test_features=a.test_features, test_labels=a.test_labels,
        holdout_fraction=a.holdout_fraction, seed=a.seed, n_jobs=a.n_jobs, micro_auc=a.micro_auc,
    )
    imp = report["importances"]["global"]
    for g in report["groups"]:
        print(f"{g}\t{imp[g]:.4f}")


def _compare(a):
    for name, _, dist in run_compare(a.ranks, a.reference, a.out):
        print(f"{name}\t{dist}")


def _synth(a):
    spec = PlantedSpec(
        n_samples=a.n, group_sizes=tuple(a.groups_sizes), active_groups=tuple(a.active),
        weight_scale=a.weight_scale, noise_sd=a.noise_sd, task=a.task,
        n_targets=a.n_targets, seed=a.seed, correlated=a.correlated,
    )
    run_synth(spec, a.out_dir, a.random_groups)


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"fit": _fit, "compare": _compare, "synth": _synth}[args.command]
    try:
        handler(args)
    except BandtagError as exc:
        print(f"bandtag {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        if exc.exit_code == 2:
            print(f"see 'bandtag {args.command} --help' for usage", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
