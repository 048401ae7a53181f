import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bandtag.errors import DegenerateError, DimensionMismatch, EmptyInput, MismatchedGroups
from bandtag.metrics import (
    accuracy,
    importances_to_ranks,
    macro_auc,
    rank_abs_distance,
    roc_auc,
    uniformity_gap,
)
from oracles import all_rank_lists, auc_pairs


def test_auc_perfect():
    assert roc_auc([0.9, 0.1], [1, 0]) == 1.0


def test_auc_all_ties():
    assert roc_auc([0.3] * 4, [1, 0, 1, 0]) == 0.5


@pytest.mark.parametrize("seed", range(20))
def test_auc_equals_pair_counting(seed):
    rng = np.random.default_rng(seed)
    labels = rng.integers(0, 2, 50)
    labels[:2] = [0, 1]
    scores = rng.integers(0, 8, 50).astype(float)  # plenty of ties
    assert roc_auc(scores, labels) == auc_pairs(scores, labels)


def test_auc_degenerate():
    with pytest.raises(DegenerateError):
        roc_auc([0.1, 0.2], [1, 1])


def test_auc_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        roc_auc([0.1, 0.2, 0.3], [1, 0])


labelled = st.integers(2, 40).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=n, max_size=n),
        st.lists(st.integers(0, 1), min_size=n, max_size=n).filter(lambda l: 0 < sum(l) < len(l)),
    )
)


@settings(max_examples=100, deadline=None)
@given(labelled, st.sampled_from([np.exp, np.arctan, lambda x: x ** 3 + x, lambda x: 2 * x - 7]))
def test_auc_invariant_to_increasing_maps(data, f):
    scores, labels = data
    s = np.asarray(scores) / 100.0
    t = f(s)
    # only compare when the map did not create or break ties in floating point
    if len(np.unique(t)) == len(np.unique(s)) and np.all(np.argsort(t, kind="stable") == np.argsort(s, kind="stable")):
        assert roc_auc(t, labels) == pytest.approx(roc_auc(s, labels), abs=1e-15)


@settings(max_examples=100, deadline=None)
@given(labelled)
def test_auc_of_negated_scores(data):
    scores, labels = data
    if len(set(scores)) == len(scores):
        assert roc_auc(-np.asarray(scores), labels) == pytest.approx(1 - roc_auc(scores, labels), abs=1e-12)


def test_macro_auc_mean():
    S = np.array([[0.9, 0.5], [0.1, 0.5]])
    Y = np.array([[1, 1], [0, 0]])
    assert macro_auc(S, Y) == (0.75, 0)


def test_macro_auc_skips_degenerate_tag():
    S = np.array([[0.9, 0.2], [0.1, 0.4], [0.5, 0.3]])
    Y = np.array([[1, 1], [0, 1], [1, 1]])
    auc, skipped = macro_auc(S, Y)
    assert skipped == 1 and auc == roc_auc(S[:, 0], Y[:, 0])


def test_macro_auc_all_degenerate():
    with pytest.raises(DegenerateError):
        macro_auc(np.zeros((2, 2)), np.ones((2, 2), dtype=int))


def test_micro_auc_pools_cells():
    S = np.array([[0.9, 0.2], [0.1, 0.4]])
    Y = np.array([[1, 0], [0, 1]])
    assert macro_auc(S, Y, average="micro")[0] == roc_auc(S.ravel(), Y.ravel())


@pytest.mark.parametrize(
    "pred,truth,expected",
    [([0, 1, 2], [0, 1, 2], 1.0), ([0, 0], [1, 1], 0.0), ([0, 1, 2, 2], [0, 1, 1, 2], 0.75)],
)
def test_accuracy(pred, truth, expected):
    assert accuracy(pred, truth) == expected


def test_accuracy_empty():
    with pytest.raises(EmptyInput):
        accuracy([], [])


GROUPS = ["Brightness, Sharpness", "Danceability, Rhythm", "Tension, Complexity",
          "Acoustic Smoothness", "Lyrical"]


def _user_friendly_ranks(name):
    blob = resources.files("bandtag.data").joinpath(f"user_friendly_{name}.ranks.json").read_text()
    return json.loads(blob)["ranks"]


def test_user_friendly_rank_distances():
    human = _user_friendly_ranks("human")
    assert rank_abs_distance(_user_friendly_ranks("em_banded"), human) == 8
    assert rank_abs_distance(_user_friendly_ranks("xgboost"), human) == 12
    assert rank_abs_distance(human, human) == 0


def test_user_friendly_rank_fixtures():
    assert [_user_friendly_ranks("em_banded")[g] for g in GROUPS] == [1, 5, 3, 2, 4]
    assert [_user_friendly_ranks("xgboost")[g] for g in GROUPS] == [5, 4, 1, 3, 2]
    assert [_user_friendly_ranks("human")[g] for g in GROUPS] == [3, 1, 4, 2, 5]


def test_rank_distance_mismatched_groups():
    with pytest.raises(MismatchedGroups):
        rank_abs_distance({"a": 1, "b": 2}, {"a": 1, "c": 2})


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 6).flatmap(lambda j: st.tuples(*[st.permutations(range(1, j + 1))] * 3)))
def test_rank_distance_is_pseudometric(perms):
    names = [f"g{i}" for i in range(len(perms[0]))]
    a, b, c = (dict(zip(names, p)) for p in perms)
    assert rank_abs_distance(a, a) == 0
    assert rank_abs_distance(a, b) == rank_abs_distance(b, a)
    assert rank_abs_distance(a, c) <= rank_abs_distance(a, b) + rank_abs_distance(b, c)


def test_rank_distance_brute_force_maximum():
    names = ["a", "b", "c", "d"]
    ref = {"a": 1, "b": 2, "c": 3, "d": 4}
    assert max(rank_abs_distance(r, ref) for r in all_rank_lists(names)) == 8


@pytest.mark.parametrize(
    "imp,expected",
    [([0.5, 0.3, 0.2], [1, 2, 3]), ([0.4, 0.4, 0.2], [1, 2, 3]), ([0.2] * 5, [1, 2, 3, 4, 5]),
     ([0.1, 0.6, 0.3], [3, 1, 2])],
)
def test_importances_to_ranks(imp, expected):
    names = [f"g{i}" for i in range(len(imp))]
    assert importances_to_ranks(imp, names) == dict(zip(names, expected))


@pytest.mark.parametrize(
    "imp,gap", [([0.2] * 5, 0.0), ([0.4, 0.3, 0.1, 0.1, 0.1], 0.2)],
)
def test_uniformity_gap(imp, gap):
    assert uniformity_gap(imp) == pytest.approx(gap, abs=1e-15)
