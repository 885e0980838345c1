"""End-to-end tests for the command-line interface and its exit codes."""

import json

import pytest

from dsfusion.cli import main

from conftest import IRIS_PATH, WBCD_PATH


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestWbcdCommand:
    def test_full_fusion_accuracy(self, capsys):
        code, out, _ = run_cli(
            capsys, "wbcd", "--data", str(WBCD_PATH), "--features", "ABCDEFGHI", "--seed", "42"
        )
        assert code == 0
        accuracy = float(out.split("accuracy: ")[1].split()[0])
        assert 0.965 <= accuracy <= 0.985

    def test_single_feature_accuracy(self, capsys):
        code, out, _ = run_cli(capsys, "wbcd", "--data", str(WBCD_PATH), "--features", "A")
        assert code == 0
        accuracy = float(out.split("accuracy: ")[1].split()[0])
        assert accuracy == pytest.approx(0.860, abs=0.02)

    def test_ablation_table(self, capsys):
        code, out, _ = run_cli(
            capsys, "wbcd", "--data", str(WBCD_PATH), "--ablate", "A,BCF"
        )
        assert code == 0
        lines = out.strip().splitlines()
        assert lines[0].startswith("A:")
        assert lines[1].startswith("BCF:")

    def test_missing_file_exits_3(self, capsys):
        code, _, err = run_cli(capsys, "wbcd", "--data", "missing.file")
        assert code == 3
        assert "error" in err

    def test_bad_feature_letter_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "wbcd", "--data", str(WBCD_PATH), "--features", "AZ")
        assert code == 2

    def test_json_format_parses(self, capsys, tmp_path):
        out_path = tmp_path / "report.json"
        code, out, _ = run_cli(
            capsys, "wbcd", "--data", str(WBCD_PATH), "--format", "json",
            "--out", str(out_path),
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["task"] == "wbcd"
        assert json.loads(out_path.read_text())["accuracy"] == payload["accuracy"]

    def test_deterministic_stdout(self, capsys):
        _, out1, _ = run_cli(capsys, "wbcd", "--data", str(WBCD_PATH), "--format", "json")
        _, out2, _ = run_cli(capsys, "wbcd", "--data", str(WBCD_PATH), "--format", "json")
        a, b = json.loads(out1), json.loads(out2)
        a.pop("runtime_seconds"), b.pop("runtime_seconds")
        assert a == b

    def test_dump_model_round_trips(self, capsys, tmp_path):
        from dsfusion import classifier_from_dict

        model_path = tmp_path / "model.json"
        code, _, _ = run_cli(
            capsys, "wbcd", "--data", str(WBCD_PATH), "--dump-model", str(model_path)
        )
        assert code == 0
        model = classifier_from_dict(json.loads(model_path.read_text()))
        assert model.n_features == 9


class TestIrisCommand:
    def test_ten_runs_mean(self, capsys):
        code, out, _ = run_cli(capsys, "iris", "--data", str(IRIS_PATH), "--runs", "10")
        assert code == 0
        mean = float(out.split("accuracy: ")[1].split("%")[0])
        assert 94.0 <= mean <= 97.0
        assert "recurrent misclassified ids:" in out

    def test_recurrent_ids_in_overlap_region(self, capsys):
        code, out, _ = run_cli(capsys, "iris", "--data", str(IRIS_PATH), "--runs", "10")
        assert code == 0
        ids_line = out.split("recurrent misclassified ids: ")[1].strip()
        ids = [int(tok) for tok in ids_line.split(", ") if tok != "none"]
        assert ids, "expected some recurrent errors"
        assert all(51 <= rid <= 150 for rid in ids)

    def test_zero_runs_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "iris", "--data", str(IRIS_PATH), "--runs", "0")
        assert code == 2

    def test_out_payload(self, capsys, tmp_path):
        out_path = tmp_path / "iris.json"
        code, _, _ = run_cli(
            capsys, "iris", "--data", str(IRIS_PATH), "--runs", "2", "--out", str(out_path)
        )
        assert code == 0
        payload = json.loads(out_path.read_text())
        assert payload["config"]["runs"] == 2
        assert len(payload["runs_detail"]) == 2


class TestEmailCommand:
    def test_generated_corpus_all_worms_detected(self, capsys):
        code, out, _ = run_cli(capsys, "email", "--generate", "--seed", "7")
        assert code == 0
        assert "worms detected: 42/42" in out
        assert "false positives: none" in out

    def test_three_signal_margins_printed(self, capsys):
        code, out, _ = run_cli(
            capsys, "email", "--generate", "--seed", "7", "--signals", "134"
        )
        assert code == 0
        assert "closest-margin worms:" in out
        assert "margin" in out

    def test_signal_five_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, "email", "--generate", "--signals", "5")
        assert code == 2

    def test_needs_data_or_generate(self, capsys):
        code, _, _ = run_cli(capsys, "email")
        assert code == 2

    def test_save_data_round_trip(self, capsys, tmp_path):
        saved = tmp_path / "corpus.csv"
        code, _, _ = run_cli(
            capsys, "email", "--generate", "--seed", "3", "--save-data", str(saved)
        )
        assert code == 0
        code2, out2, _ = run_cli(capsys, "email", "--data", str(saved), "--seed", "3")
        assert code2 == 0
        assert "worms detected: 42/42" in out2


class TestGenerateEmailCommand:
    def test_writes_csv(self, capsys, tmp_path):
        out = tmp_path / "email.csv"
        code, stdout, _ = run_cli(capsys, "generate-email", "--out", str(out), "--seed", "5")
        assert code == 0
        assert "132" in stdout
        header = out.read_text().splitlines()[0]
        assert header == "id,interval_seconds,spoofed,dangerous_attachment,benign_attachment,label"

    def test_same_seed_byte_identical(self, capsys, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        run_cli(capsys, "generate-email", "--out", str(a), "--seed", "9")
        run_cli(capsys, "generate-email", "--out", str(b), "--seed", "9")
        assert a.read_bytes() == b.read_bytes()


class TestCombineCommand:
    def test_witness_example(self, capsys):
        code, out, _ = run_cli(
            capsys, "combine", "--frame", "Jon,Mary,Mike",
            "--mass", "Jon:0.9,Mary:0.1", "--mass", "Mike:0.9,Mary:0.1",
        )
        assert code == 0
        assert "Mary:1" in out
        assert "0.99" in out

    def test_single_mass_echoed(self, capsys):
        code, out, _ = run_cli(
            capsys, "combine", "--frame", "a,b", "--mass", "a:0.6,b:0.4"
        )
        assert code == 0
        assert "a:0.6" in out
        assert "K (final step): 0" in out

    def test_union_subsets(self, capsys):
        code, out, _ = run_cli(
            capsys, "combine", "--frame", "a,b,c",
            "--mass", "a|b:0.5,c:0.3,a|b|c:0.2", "--format", "json",
        )
        assert code == 0
        payload = json.loads(out)
        assert payload["combined"]["a|b"] == pytest.approx(0.5)
        assert payload["intervals"]["c"]["bel"] == pytest.approx(0.3)

    def test_total_conflict_exits_4(self, capsys):
        code, _, err = run_cli(
            capsys, "combine", "--frame", "a,b",
            "--mass", "a:1", "--mass", "b:1",
        )
        assert code == 4
        assert "conflict" in err

    def test_unparseable_mass_exits_2(self, capsys):
        code, _, _ = run_cli(
            capsys, "combine", "--frame", "a,b", "--mass", "a=0.5,b=0.5"
        )
        assert code == 2

    def test_bad_sum_exits_2(self, capsys):
        code, _, _ = run_cli(
            capsys, "combine", "--frame", "a,b", "--mass", "a:0.5,b:0.4"
        )
        assert code == 2


class TestUsage:
    def test_unknown_subcommand_exits_2(self, capsys):
        assert run_cli(capsys, "frobnicate")[0] == 2

    def test_unknown_flag_exits_2(self, capsys):
        assert run_cli(capsys, "wbcd", "--data", str(WBCD_PATH), "--bogus")[0] == 2

    def test_help_lists_subcommands(self, capsys):
        code, out, err = run_cli(capsys, "--help")
        assert code == 0
        text = out + err
        for name in ("wbcd", "iris", "email", "combine", "generate-email"):
            assert name in text
