import json
from pathlib import Path

import numpy as np
import pytest

from bandtag import io
from bandtag.cli import main
from bandtag.errors import FormatError, JoinError, LabelDomainError
from bandtag.synthetic import PlantedSpec

DATA = Path(__file__).resolve().parents[1] / "src" / "bandtag" / "data"


def write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def test_load_small_dataset(tmp_path):
    f = write(tmp_path / "f.csv", "id,a,b\nx,1,2\ny,3,4\nz,5,6\n")
    l = write(tmp_path / "l.csv", "id,t1,t2\nz,0,1\nx,1,0\ny,1,1\n")
    ds = io.load_dataset(f, l, "multilabel")
    assert ds.n_samples == 3 and ds.sample_ids == ("x", "y", "z")
    np.testing.assert_array_equal(ds.labels.matrix, [[1, 0], [1, 1], [0, 1]])


def test_join_error_names_missing_id(tmp_path):
    f = write(tmp_path / "f.csv", "id,a\nx,1\ny,2\nz,3\n")
    l = write(tmp_path / "l.csv", "id,t\nx,1\ny,0\n")
    with pytest.raises(JoinError, match="'z'"):
        io.load_dataset(f, l, "multilabel")


def test_label_domain_error_reports_position(tmp_path):
    f = write(tmp_path / "f.csv", "id,a\nx,1\ny,2\n")
    l = write(tmp_path / "l.csv", "id,t\nx,1\ny,2\n")
    with pytest.raises(LabelDomainError, match=r"l.csv:3: row 'y', tag 't'"):
        io.load_dataset(f, l, "multilabel")


@pytest.mark.parametrize(
    "text", ["", "name,a\nx,1\n", "id,a\nx,1,2\n", "id,a\nx,oops\n", "id,a\nx,1\nx,2\n", "id,a,a\nx,1,2\n"],
)
def test_format_errors(tmp_path, text):
    f = write(tmp_path / "f.csv", text)
    l = write(tmp_path / "l.csv", "id,target\nx,1\n")
    with pytest.raises(FormatError):
        io.load_dataset(f, l, "regression")


def test_multiclass_names_sorted(tmp_path):
    f = write(tmp_path / "f.csv", "id,a\nx,1\ny,2\nz,3\n")
    l = write(tmp_path / "l.csv", "id,class\nx,rock\ny,jazz\nz,rock\n")
    ds = io.load_dataset(f, l, "multiclass")
    assert ds.labels.class_names == ("jazz", "rock")
    np.testing.assert_array_equal(ds.labels.ids, [1, 0, 1])


@pytest.mark.parametrize("task", ["regression", "multilabel", "multiclass"])
def test_synth_roundtrip_bytes(tmp_path, task):
    io.run_synth(PlantedSpec(n_samples=50, task=task, seed=3), tmp_path)
    ds = io.load_dataset(tmp_path / "features.csv", tmp_path / "labels.csv", task)
    assert io.features_csv(ds) == (tmp_path / "features.csv").read_bytes()
    assert io.labels_csv(ds) == (tmp_path / "labels.csv").read_bytes()


def test_synth_cli_deterministic(tmp_path):
    args = ["synth", "--n", "40", "--task", "multilabel", "--seed", "9", "--random-groups", "5"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    for name in ["features.csv", "labels.csv", "groups.json", "random_groups.json", "truth.json"]:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_synth_invalid_j_exit_code(tmp_path, capsys):
    assert main(["synth", "--groups-sizes", "2,2", "--random-groups", "5", "--out-dir", str(tmp_path)]) == 2
    assert "InvalidJ" in capsys.readouterr().err


def test_synth_truth_file(tmp_path):
    io.run_synth(PlantedSpec(n_samples=20, seed=1), tmp_path)
    truth = json.loads((tmp_path / "truth.json").read_text())
    assert truth["spec"]["active_groups"] == [0]
    assert all(v == [0.0] for k, v in truth["weights"].items() if not k.startswith("group_1_"))


def _synth_fit(tmp_path, *extra):
    io.run_synth(PlantedSpec(n_samples=300, task="multilabel", seed=2), tmp_path)
    out = tmp_path / "report.json"
    args = ["fit", "--features", str(tmp_path / "features.csv"), "--labels", str(tmp_path / "labels.csv"),
            "--groups", str(tmp_path / "groups.json"), "--task", "multilabel",
            "--out", str(out), "--importances-out", str(tmp_path / "imp.csv"), *extra]
    return main(args), out


def test_fit_report_contents(tmp_path):
    code, out = _synth_fit(tmp_path, "--holdout-fraction", "0.3", "--seed", "4")
    assert code == 0
    rep = json.loads(out.read_text())
    assert rep["dataset"]["n_test"] == 90 and rep["dataset"]["n_train"] == 210
    assert rep["importances"]["global"]["group_1"] > 0.8
    assert rep["ranks"]["group_1"] == 1
    assert rep["metrics"]["test"]["macro_auc"] > 0.9
    assert rep["config"]["holdout_fraction"] == 0.3 and rep["tool"]["version"]
    assert set(rep["inputs"]) == {"features", "labels", "groups"}
    lines = (tmp_path / "imp.csv").read_text().splitlines()
    assert lines[0] == "scope,group,lambda,importance" and lines[1].startswith("global,group_1,")
    assert len(lines) == 1 + 5 * 4


def test_fit_twice_byte_identical(tmp_path):
    _, out = _synth_fit(tmp_path)
    first = out.read_bytes()
    _, out = _synth_fit(tmp_path)
    assert out.read_bytes() == first


def test_fit_with_explicit_test_files(tmp_path):
    io.run_synth(PlantedSpec(n_samples=200, task="multiclass", seed=1), tmp_path / "train")
    io.run_synth(PlantedSpec(n_samples=100, task="multiclass", seed=2), tmp_path / "test")
    rep = io.run_fit(tmp_path / "train/features.csv", tmp_path / "train/labels.csv",
                     tmp_path / "train/groups.json", "multiclass", tmp_path / "r.json",
                     test_features=tmp_path / "test/features.csv", test_labels=tmp_path / "test/labels.csv")
    assert 0.0 <= rep["metrics"]["test"]["accuracy"] <= 1.0
    assert "test_features" in rep["inputs"]


@pytest.mark.parametrize("extra", [["--test-features", "x.csv"],
                                   ["--test-features", "a", "--test-labels", "b", "--holdout-fraction", "0.2"],
                                   ["--holdout-fraction", "1.5"]])
def test_fit_usage_errors(tmp_path, extra):
    code, _ = _synth_fit(tmp_path, *extra)
    assert code == 2


def test_fit_format_error_exit_code(tmp_path):
    io.run_synth(PlantedSpec(n_samples=30, seed=1), tmp_path)
    write(tmp_path / "bad.csv", "id,target\ns00000,1\n")
    code = main(["fit", "--features", str(tmp_path / "features.csv"), "--labels", str(tmp_path / "bad.csv"),
                 "--groups", str(tmp_path / "groups.json"), "--task", "regression", "--out", str(tmp_path / "r")])
    assert code == 3


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_fit_numerical_failure_exit_code(tmp_path):
    io.run_synth(PlantedSpec(n_samples=30, seed=1), tmp_path)
    text = (tmp_path / "features.csv").read_text().splitlines()
    text[1] = text[1].split(",")[0] + ",inf" + "".join("," + v for v in text[1].split(",")[2:])
    write(tmp_path / "features.csv", "\n".join(text) + "\n")
    code = main(["fit", "--features", str(tmp_path / "features.csv"), "--labels", str(tmp_path / "labels.csv"),
                 "--groups", str(tmp_path / "groups.json"), "--task", "regression", "--out", str(tmp_path / "r")])
    assert code == 4


def test_argparse_usage_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--features", "x"])
    assert exc.value.code == 2


def test_compare_user_friendly_ranks(tmp_path, capsys):
    ranks = [str(DATA / f"user_friendly_{m}.ranks.json") for m in ("em_banded", "xgboost", "human")]
    out = tmp_path / "table.csv"
    assert main(["compare", "--ranks", *ranks, "--reference", ranks[2], "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0].endswith(",abs_distance")
    assert [r.split(",")[-1] for r in rows[1:]] == ["8", "12", "0"]
    assert "EM-banded\t8" in capsys.readouterr().out


def test_compare_accepts_run_report(tmp_path):
    _, out = _synth_fit(tmp_path)
    rows = io.run_compare([out], out)
    assert rows[0][2] == 0


def test_compare_mismatched_groups_exit_code(tmp_path):
    other = write(tmp_path / "o.json", json.dumps({"name": "x", "ranks": {"a": 1, "b": 2}}))
    code = main(["compare", "--ranks", str(other), "--reference", str(DATA / "user_friendly_human.ranks.json")])
    assert code == 3


def test_compare_rejects_non_permutation(tmp_path):
    bad = write(tmp_path / "b.json", json.dumps({"ranks": {"a": 1, "b": 1}}))
    with pytest.raises(FormatError):
        io.load_ranks(bad)


def test_holdout_split_is_contiguous_and_seeded():
    tr, te = io.holdout_split(100, 0.3, 7)
    assert len(te) == 30 and np.all(np.diff(te) == 1)
    np.testing.assert_array_equal(np.sort(np.concatenate([tr, te])), np.arange(100))
    tr2, te2 = io.holdout_split(100, 0.3, 7)
    np.testing.assert_array_equal(te, te2)


def test_micro_auc_flag(tmp_path):
    code, out = _synth_fit(tmp_path, "--holdout-fraction", "0.3", "--micro-auc")
    assert code == 0
    rep = json.loads(out.read_text())
    assert 0.5 < rep["metrics"]["test"]["micro_auc"] <= 1.0
    assert rep["config"]["micro_auc"] is True
    _, out = _synth_fit(tmp_path)
    assert "micro_auc" not in json.loads(out.read_text())["metrics"]["train"]
