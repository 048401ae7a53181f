"""Reading and writing datasets, run reports and rank tables.

CSV dialect: UTF-8, comma separated, header row whose first column is
``id``, LF line endings, reals written with 17 significant digits so a
write/read/write cycle is byte-stable.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import __version__, metrics, tagging
from .core import Dataset, EmBandedConfig, MultiClass, MultiLabel, Regression
from .errors import FormatError, JoinError, LabelDomainError, UsageError
from .grouping import load_group_spec, random_grouping, serialize_group_spec
from .synthetic import PlantedSpec, generate

TASKS = ("multilabel", "multiclass", "regression")


def fmt(x) -> str:
    return format(float(x), ".17g")


def sha256(path) -> str:
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


def _read_table(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise FormatError(f"{path}: not UTF-8 ({exc})") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    if not rows:
        raise FormatError(f"{path}: empty file, header row required")
    header = rows[0]
    if not header or header[0] != "id":
        raise FormatError(f"{path}: first header column must be 'id', got {header[:1]}")
    if len(set(header)) != len(header):
        raise FormatError(f"{path}: duplicate column names in header")
    body = {}
    order = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(header):
            raise FormatError(f"{path}:{lineno}: {len(row)} fields, header has {len(header)}")
        if row[0] in body:
            raise FormatError(f"{path}:{lineno}: duplicate id {row[0]!r}")
        body[row[0]] = (lineno, row[1:])
        order.append(row[0])
    if not order:
        raise FormatError(f"{path}: no data rows")
    return header[1:], order, body


def _float(path, lineno, column, text):
    try:
        return float(text)
    except ValueError:
        raise FormatError(f"{path}:{lineno}: column {column!r}: {text!r} is not a number") from None


def load_dataset(features_path, labels_path, task: str) -> Dataset:
    """Join a features CSV and a labels CSV on their ``id`` column.

    Row order follows the features file. Every id must appear in both files.
    """
    if task not in TASKS:
        raise UsageError(f"task must be one of {TASKS}")
    fnames, ids, fbody = _read_table(features_path)
    lnames, lids, lbody = _read_table(labels_path)
    only_f = [i for i in ids if i not in lbody]
    only_l = [i for i in lids if i not in fbody]
    if only_f or only_l:
        raise JoinError(
            f"ids missing from labels: {only_f[:10]}; ids missing from features: {only_l[:10]}"
        )
    X = np.array(
        [[_float(features_path, fbody[i][0], c, v) for c, v in zip(fnames, fbody[i][1])] for i in ids]
    ).reshape(len(ids), len(fnames))

    if task == "multilabel":
        M = np.empty((len(ids), len(lnames)), dtype=np.int8)
        for r, i in enumerate(ids):
            lineno, cells = lbody[i]
            for c, (tag, cell) in enumerate(zip(lnames, cells)):
                if cell not in ("0", "1"):
                    raise LabelDomainError(
                        f"{labels_path}:{lineno}: row {i!r}, tag {tag!r}: {cell!r} is not 0 or 1"
                    )
                M[r, c] = int(cell)
        labels = MultiLabel(lnames, M)
    else:
        if len(lnames) != 1:
            raise FormatError(f"{labels_path}: {task} labels need exactly one column after 'id'")
        cells = [lbody[i][1][0] for i in ids]
        if task == "multiclass":
            classes = sorted(set(cells))
            pos = {c: k for k, c in enumerate(classes)}
            labels = MultiClass(classes, [pos[c] for c in cells])
        else:
            labels = Regression(
                lnames[0], [_float(labels_path, lbody[i][0], lnames[0], v) for i, v in zip(ids, cells)]
            )
    return Dataset(ids, fnames, X, labels)


def _csv_bytes(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue().encode("utf-8")


def features_csv(dataset: Dataset) -> bytes:
    rows = ([sid] + [fmt(v) for v in row] for sid, row in zip(dataset.sample_ids, dataset.X))
    return _csv_bytes(["id", *dataset.feature_names], rows)


def labels_csv(dataset: Dataset) -> bytes:
    lab = dataset.labels
    ids = dataset.sample_ids
    if isinstance(lab, MultiLabel):
        rows = ([sid] + [str(int(v)) for v in row] for sid, row in zip(ids, lab.matrix))
        return _csv_bytes(["id", *lab.tag_names], rows)
    if isinstance(lab, MultiClass):
        return _csv_bytes(["id", "class"], ([sid, lab.class_names[c]] for sid, c in zip(ids, lab.ids)))
    return _csv_bytes(["id", lab.target_name], ([sid, fmt(v)] for sid, v in zip(ids, lab.values)))


def _write(path, blob: bytes):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(blob)


def json_bytes(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")


def align_labels(test: Dataset, train: Dataset) -> Dataset:
    """Re-express ``test`` labels over the tag/class names of ``train``."""
    a, b = test.labels, train.labels
    if isinstance(b, MultiClass):
        pos = {c: k for k, c in enumerate(b.class_names)}
        unknown = sorted(set(a.class_names[i] for i in a.ids) - pos.keys())
        if unknown:
            raise LabelDomainError(f"test classes not seen in training: {unknown}")
        return replace(test, labels=MultiClass(b.class_names, [pos[a.class_names[i]] for i in a.ids]))
    if isinstance(b, MultiLabel) and a.tag_names != b.tag_names:
        if set(a.tag_names) != set(b.tag_names):
            raise FormatError(f"test tags {a.tag_names} differ from training tags {b.tag_names}")
        cols = [a.tag_names.index(t) for t in b.tag_names]
        return replace(test, labels=MultiLabel(b.tag_names, a.matrix[:, cols]))
    return test


# -- splits and evaluation ----------------------------------------------------


def holdout_split(n, fraction, seed):
    """Train/test row indices; the test rows are one contiguous block.

    The block start is drawn from a Philox stream seeded with ``seed``.
    """
    if not 0 < fraction < 1:
        raise UsageError(f"holdout fraction must lie strictly between 0 and 1, got {fraction}")
    n_test = min(max(int(round(fraction * n)), 1), n - 1)
    if n_test < 1:
        raise UsageError("dataset too small to hold out any rows")
    rng = np.random.Generator(np.random.Philox(seed))
    start = int(rng.integers(0, n - n_test + 1))
    test = np.arange(start, start + n_test)
    train = np.concatenate([np.arange(0, start), np.arange(start + n_test, n)])
    return train, test


def evaluate(model: tagging.TaggingModel, dataset: Dataset, micro_auc=False) -> dict:
    """Metrics for one split. Multilabel runs can add a pooled ``micro_auc``."""
    S = tagging.score(model, dataset)
    lab = dataset.labels
    if isinstance(lab, MultiLabel):
        Y = lab.matrix
        out = {"per_target_auc": dict(zip(lab.tag_names, metrics.per_tag_auc(S, Y)))}
        try:
            out["macro_auc"], out["skipped_targets"] = metrics.macro_auc(S, Y)
        except metrics.DegenerateError:
            out["macro_auc"], out["skipped_targets"] = None, Y.shape[1]
        if micro_auc:
            out["micro_auc"] = metrics.macro_auc(S, Y, average="micro")[0] if 0 < Y.sum() < Y.size else None
        return out
    if isinstance(lab, MultiClass):
        pred = np.argmax(S, axis=1)
        Y = lab.targets()
        return {
            "accuracy": metrics.accuracy(pred, lab.ids),
            "per_target_auc": dict(zip(lab.class_names, metrics.per_tag_auc(S, Y))),
        }
    y = lab.values
    resid = y - S[:, 0]
    sst = float(np.sum((y - y.mean()) ** 2))
    return {
        "mse": float(np.mean(resid ** 2)),
        "r2": None if sst == 0 else float(1.0 - resid @ resid / sst),
    }


def build_report(model, train, test, config, inputs, extra_config=None, micro_auc=False) -> dict:
    groups = model.group_names
    global_imp, per_target = tagging.aggregate_importances(model)
    lam = tagging.mean_lambdas(model)
    report = {
        "name": "EM-banded",
        "tool": {"name": "bandtag", "version": __version__},
        "inputs": inputs,
        "config": {**config.to_dict(), **(extra_config or {})},
        "dataset": {
            "task": model.task,
            "n_samples": train.n_samples + (test.n_samples if test is not None else 0),
            "n_train": train.n_samples,
            "n_test": test.n_samples if test is not None else 0,
            "n_features": model.partition.total_columns,
            "n_groups": model.partition.n_groups,
            "targets": list(model.target_names),
        },
        "groups": list(groups),
        "importances": {
            "global": dict(zip(groups, map(float, global_imp))),
            "per_target": {t: dict(zip(groups, map(float, v))) for t, v in per_target.items()},
        },
        "lambdas": {
            "global_mean": dict(zip(groups, map(float, lam))),
            "per_target": {n: dict(zip(groups, map(float, f.lambdas))) for _, n, f in model.fitted()},
        },
        "ranks": metrics.importances_to_ranks(global_imp, groups),
        "metrics": {"train": evaluate(model, train, micro_auc)},
        "diagnostics": {
            "targets": {
                n: {
                    "converged": f.converged,
                    "iterations": f.iterations_used,
                    "pruned_groups": list(f.pruned_groups),
                    "nu": float(f.nu),
                }
                for _, n, f in model.fitted()
            },
            "skipped_targets": dict(model.skipped),
        },
    }
    if test is not None:
        report["metrics"]["test"] = evaluate(model, test, micro_auc)
    return report


def importance_table(report) -> bytes:
    """Flat ``scope,group,lambda,importance`` rows, global first."""
    rows = []
    for g in report["groups"]:
        rows.append(["global", g, fmt(report["lambdas"]["global_mean"][g]),
                     fmt(report["importances"]["global"][g])])
    for t, imp in report["importances"]["per_target"].items():
        for g in report["groups"]:
            rows.append([t, g, fmt(report["lambdas"]["per_target"][t][g]), fmt(imp[g])])
    return _csv_bytes(["scope", "group", "lambda", "importance"], rows)


# -- commands -------------------------------------------------------------------


def run_fit(features, labels, groups, task, out, importances_out=None, config=None,
            test_features=None, test_labels=None, holdout_fraction=None, seed=0, n_jobs=1, micro_auc=False):
    """Fit, evaluate and write the run report (and the importance table).

    Returns the report dictionary.
    """
    config = config or EmBandedConfig()
    if (test_features is None) != (test_labels is None):
        raise UsageError("--test-features and --test-labels must be given together")
    if test_features is not None and holdout_fraction is not None:
        raise UsageError("use either a test file pair or --holdout-fraction, not both")
    data = load_dataset(features, labels, task)
    doc = load_group_spec(groups)
    inputs = {"features": sha256(features), "labels": sha256(labels), "groups": sha256(groups)}
    extra = {"task": task, "grouping": doc.name}
    if micro_auc:
        extra["micro_auc"] = True
    if test_features is not None:
        test = align_labels(load_dataset(test_features, test_labels, task), data)
        train = data
        inputs["test_features"] = sha256(test_features)
        inputs["test_labels"] = sha256(test_labels)
    elif holdout_fraction is not None:
        tr, te = holdout_split(data.n_samples, holdout_fraction, seed)
        train, test = data.take(tr), data.take(te)
        extra.update(holdout_fraction=float(holdout_fraction), seed=int(seed))
    else:
        train, test = data, None
    model = tagging.fit_tagger(train, doc, config, n_jobs=n_jobs)
    report = build_report(model, train, test, config, inputs, extra, micro_auc)
    _write(out, json_bytes(report))
    if importances_out:
        _write(importances_out, importance_table(report))
    return report


def load_ranks(path):
    """(name, ranks) from a rank file or a run report."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror or exc}") from exc
    if not isinstance(raw, dict) or not isinstance(raw.get("ranks"), dict):
        raise FormatError(f"{path}: expected an object with a 'ranks' mapping")
    ranks = {str(g): int(r) for g, r in raw["ranks"].items()}
    try:
        metrics.check_ranks(ranks)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from None
    return str(raw.get("name") or Path(path).stem), ranks


def run_compare(rank_paths, reference, out=None):
    """Absolute rank distance of every rank list to the reference.

    Returns ``[(name, ranks, distance), ...]`` and writes a CSV table with one
    column per group (reference order) plus ``abs_distance``.
    """
    _, ref = load_ranks(reference)
    rows = []
    for p in rank_paths:
        name, ranks = load_ranks(p)
        rows.append((name, ranks, metrics.rank_abs_distance(ranks, ref)))
    groups = list(ref)
    if out:
        table = [[n, *(str(r[g]) for g in groups), str(d)] for n, r, d in rows]
        _write(out, _csv_bytes(["method", *groups, "abs_distance"], table))
    return rows


def run_synth(spec: PlantedSpec, out_dir, random_groups=None):
    """Write features.csv, labels.csv, groups.json and truth.json to ``out_dir``.

    With ``random_groups=J`` a seeded random J-group grouping of the same
    features is also written to random_groups.json.
    """
    dataset, weights, grouping = generate(spec)
    random_doc = None
    if random_groups is not None:
        random_doc = random_grouping(dataset.feature_names, random_groups, spec.seed)
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    _write(out_dir / "features.csv", features_csv(dataset))
    _write(out_dir / "labels.csv", labels_csv(dataset))
    _write(out_dir / "groups.json", serialize_group_spec(grouping))
    if random_doc is not None:
        _write(out_dir / "random_groups.json", serialize_group_spec(random_doc))
    W = np.atleast_2d(weights.T).T
    truth = {
        "spec": {k: getattr(spec, k) for k in spec.__dataclass_fields__},
        "targets": list(dataset.target_names) if spec.task != "regression" else ["target"],
        "weights": {f: [float(v) for v in row] for f, row in zip(dataset.feature_names, W)},
    }
    truth["spec"]["group_sizes"] = list(spec.group_sizes)
    truth["spec"]["active_groups"] = list(spec.active_groups)
    _write(out_dir / "truth.json", json_bytes(truth))
    return dataset, weights, grouping
