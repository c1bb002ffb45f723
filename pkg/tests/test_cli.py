"""Command-line interface: subcommands, report structure, exit codes."""

import json

import pytest

from fairsim.cli import run
from fairsim.datagen import DEFAULT_GROUP_SPEC, synthetic_cv
from fairsim.dataset import save_dataset


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    save_dataset(synthetic_cv(n=60, seed=3), d / "cv.csv")
    save_dataset(synthetic_cv(n=60, seed=3, missing_rate=0.15), d / "cv_missing.csv")
    (d / "groups.json").write_text(json.dumps(DEFAULT_GROUP_SPEC.to_json()))
    return d


def _args(workdir, out, *extra, data="cv.csv"):
    return list(extra) + ["--data", str(workdir / data), "--out", str(out),
                          "--model", "knn", "--folds", "4"]


def _report(out):
    with open(out, encoding="utf-8") as fh:
        return json.load(fh)


class TestSubcommands:
    def test_similarity(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "similarity")) == 0
        rep = _report(out)
        assert rep["sections"]["similarity"]["n"] == 60
        assert (tmp_path / "similarity.csv").exists()

    def test_kernel(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "kernel")) == 0
        assert _report(out)["sections"]["kernel"]["kind"] == "Ek"
        assert (tmp_path / "kernel_Ek.csv").exists()

    def test_kernel_rwk(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "kernel", "--repr", "SGD+RWk")) == 0
        assert _report(out)["sections"]["kernel"]["kind"] == "RWk"

    def test_network(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "network", "--policy", "quantile:0.9")) == 0
        section = _report(out)["sections"]["network"]
        assert section["n_nodes"] == 60
        assert section["n_edges"] > 0
        assert (tmp_path / "network.txt").exists()

    def test_complexity_accumulates_representations(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "complexity", "--repr", "original")) == 0
        assert run(_args(workdir, out, "complexity", "--repr", "SGD")) == 0
        section = _report(out)["sections"]["complexity"]
        assert set(section) == {"original", "SGD"}
        assert "C2" in section["original"]["report"]["measures"]

    def test_classify(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "classify", "--repr", "SGD")) == 0
        result = _report(out)["sections"]["classification"]["SGD"]["result"]
        assert len(result["per_fold_f1"]) == 4
        assert 0.0 <= result["mean"] <= 1.0

    def test_fairness(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        code = run(_args(workdir, out, "fairness", "--repr", "SGD",
                         "--groups", str(workdir / "groups.json"),
                         "--binarize", "categories:PayLevel:high"))
        assert code == 0
        section = _report(out)["sections"]["fairness"]["SGD"]
        assert "equal_opportunity" in section["report"]

    def test_certify_success_with_loose_delta(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        code = run(_args(workdir, out, "certify",
                         "--groups", str(workdir / "groups.json"),
                         "--binarize", "categories:PayLevel:high",
                         "--delta", "0.99"))
        assert code == 0
        outcome = _report(out)["sections"]["certification"]["outcome"]
        assert outcome["certified"] is True

    def test_certify_failure_exit_code(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        code = run(_args(workdir, out, "certify",
                         "--groups", str(workdir / "groups.json"),
                         "--binarize", "categories:PayLevel:high",
                         "--delta", "1e-9"))
        assert code == 3
        outcome = _report(out)["sections"]["certification"]["outcome"]
        assert outcome["certified"] is False
        assert len(outcome["trail"]) == 4

    def test_impute(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "impute", data="cv_missing.csv")) == 0
        section = _report(out)["sections"]["imputation"]
        assert section["n_filled"] > 0
        assert (tmp_path / "imputed.csv").exists()

    def test_augment_graph(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        code = run(_args(workdir, out, "augment",
                         "--binarize", "categories:PayLevel:high"))
        assert code == 0
        section = _report(out)["sections"]["augmentation"]
        assert section["method"] == "graph"
        assert section["n_rows"] >= 60
        assert (tmp_path / "augmented.csv").exists()

    def test_augment_smote(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        code = run(_args(workdir, out, "augment", "--augment-method", "smote"))
        assert code == 0
        assert _report(out)["sections"]["augmentation"]["method"] == "smote"

    def test_augment_group_requires_column(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        assert run(_args(workdir, out, "augment", "--augment-method", "group")) == 2
        code = run(_args(workdir, out, "augment", "--augment-method", "group",
                         "--group-column", "Gender"))
        assert code == 0

    def test_report_emits_csvs(self, workdir, tmp_path):
        out = tmp_path / "report.json"
        groups = str(workdir / "groups.json")
        binarize = "categories:PayLevel:high"
        for rep in ("original", "SGD"):
            assert run(_args(workdir, out, "complexity", "--repr", rep,
                             "--binarize", binarize)) == 0
            assert run(_args(workdir, out, "fairness", "--repr", rep,
                             "--groups", groups, "--binarize", binarize)) == 0
        assert run(_args(workdir, out, "report")) == 0
        complexity = (tmp_path / "complexity_by_representation.csv").read_text()
        fairness = (tmp_path / "fairness_by_representation.csv").read_text()
        assert complexity.splitlines()[0].startswith("representation,")
        assert len(complexity.splitlines()) == 3
        assert fairness.splitlines()[0] == (
            "representation,equal_opportunity,equal_misopportunity,weighted_f1")
        assert len(fairness.splitlines()) == 3


class TestExitCodes:
    def test_missing_data_flag_is_usage_error(self, tmp_path):
        assert run(["similarity", "--out", str(tmp_path / "r.json")]) == 1

    def test_missing_groups_flag_is_usage_error(self, workdir, tmp_path):
        code = run(_args(workdir, tmp_path / "r.json", "fairness",
                         "--binarize", "categories:PayLevel:high"))
        assert code == 1

    def test_unknown_subcommand(self, tmp_path):
        assert run(["frobnicate", "--out", str(tmp_path / "r.json")]) == 1

    def test_nonexistent_file(self, tmp_path):
        code = run(["similarity", "--data", str(tmp_path / "nope.csv"),
                    "--out", str(tmp_path / "r.json")])
        assert code == 2

    def test_malformed_data_file(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,x\n2\n")
        code = run(["similarity", "--data", str(bad),
                    "--out", str(tmp_path / "r.json")])
        assert code == 2

    def test_bad_binarize_rule(self, workdir, tmp_path):
        code = run(_args(workdir, tmp_path / "r.json", "classify",
                         "--binarize", "nope"))
        assert code == 2

    def test_report_path_in_new_directory(self, workdir, tmp_path):
        out = tmp_path / "deep" / "nested" / "report.json"
        assert run(_args(workdir, out, "similarity")) == 0
        assert out.exists()
