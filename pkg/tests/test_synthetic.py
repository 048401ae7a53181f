import numpy as np
import pytest

from bandtag import metrics
from bandtag.core import GroupPartition
from bandtag.errors import InvalidSpec
from bandtag.synthetic import PlantedSpec, generate
from bandtag.tagging import fit_tagger, score


def test_noiseless_target_in_span_of_active_columns():
    ds, w, _ = generate(PlantedSpec(n_samples=40, noise_sd=0.0, seed=3))
    Xa = ds.X[:, :10]
    coef, *_ = np.linalg.lstsq(Xa, ds.labels.values, rcond=None)
    np.testing.assert_allclose(Xa @ coef, ds.labels.values, atol=1e-10)


@pytest.mark.parametrize("task", ["regression", "multilabel", "multiclass"])
def test_weights_zero_outside_active_groups(task):
    _, w, _ = generate(PlantedSpec(task=task, active_groups=(1, 3), seed=2))
    W = np.atleast_2d(w.T).T
    col_group = np.repeat(np.arange(5), 10)
    assert np.all(W[~np.isin(col_group, [1, 3])] == 0)
    assert np.all(W[np.isin(col_group, [1, 3])] != 0)


@pytest.mark.parametrize("task", ["regression", "multilabel", "multiclass"])
def test_same_seed_identical_bytes(task):
    a = generate(PlantedSpec(task=task, seed=5))
    b = generate(PlantedSpec(task=task, seed=5))
    assert a[0].X.tobytes() == b[0].X.tobytes()
    assert a[0].targets().tobytes() == b[0].targets().tobytes()
    assert a[1].tobytes() == b[1].tobytes()


def test_vanishing_weights_give_chance_auc():
    aucs = []
    for seed in range(20):
        spec = PlantedSpec(n_samples=200, weight_scale=1e-12, noise_sd=1.0, task="multilabel", seed=seed)
        ds, _, doc = generate(spec)
        train, test = ds.take(np.arange(100)), ds.take(np.arange(100, 200))
        model = fit_tagger(train, doc)
        aucs.append(metrics.macro_auc(score(model, test), test.labels.matrix)[0])
    assert abs(np.mean(aucs) - 0.5) < 0.1


def test_column_moments_at_n1000():
    means = np.mean([generate(PlantedSpec(n_samples=1000, seed=s))[0].X.mean(0) for s in range(5)], axis=0)
    sds = np.mean([generate(PlantedSpec(n_samples=1000, seed=s))[0].X.std(0) for s in range(5)], axis=0)
    assert np.all(np.abs(means) < 0.2)
    assert np.all(np.abs(sds - 1) < 0.2)


def test_correlated_mode_within_group_correlation():
    ds, _, _ = generate(PlantedSpec(n_samples=20000, correlated=True, seed=0))
    C = np.corrcoef(ds.X.T)
    assert abs(C[0, 1] - 0.5) < 0.05
    assert abs(C[0, 15]) < 0.05
    np.testing.assert_allclose(ds.X.std(0), 1.0, atol=0.05)


def test_planted_grouping_matches_columns():
    ds, _, doc = generate(PlantedSpec(group_sizes=(2, 3)))
    p = doc.to_partition(ds.feature_names)
    assert p.groups == GroupPartition.contiguous([2, 3], ["group_1", "group_2"]).groups


def test_multiclass_labels_are_argmax():
    ds, w, _ = generate(PlantedSpec(task="multiclass", n_targets=4, noise_sd=0.0, seed=1))
    np.testing.assert_array_equal(ds.labels.ids, np.argmax(ds.X @ w, axis=1))


@pytest.mark.parametrize(
    "kwargs",
    [dict(active_groups=()), dict(active_groups=(7,)), dict(group_sizes=(0, 3)),
     dict(noise_sd=-1.0), dict(weight_scale=0.0), dict(task="ranking"),
     dict(task="multiclass", n_targets=1), dict(n_samples=0)],
)
def test_invalid_spec(kwargs):
    with pytest.raises(InvalidSpec):
        PlantedSpec(**kwargs)
