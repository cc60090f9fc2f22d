import json
from pathlib import Path

import pytest

from conftest import TOY_CORPUS
from infoqa.cli import EXIT_DATA, EXIT_OK, EXIT_REJECTED, EXIT_USAGE, cli_main

QA_TEXT = "Why it is light at morning?\tThe sun shines.\nWhere do men go?\tMen go to work\n"


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus.txt"
    corpus.write_text(TOY_CORPUS + "\n", encoding="utf-8")
    qa = root / "qa.tsv"
    qa.write_text(QA_TEXT, encoding="utf-8")
    return root


@pytest.fixture(scope="module")
def trained_dir(workspace):
    out = workspace / "bundle"
    code = cli_main(
        [
            "train",
            "--corpus", str(workspace / "corpus.txt"),
            "--qa", str(workspace / "qa.tsv"),
            "--out", str(out),
        ]
    )
    assert code == EXIT_OK
    return out


class TestTrain:
    def test_train_writes_bundle_and_report(self, trained_dir, capsys):
        assert (trained_dir / "manifest.json").is_file()

    def test_empty_corpus_is_data_error(self, workspace, capsys):
        empty = workspace / "empty.txt"
        empty.write_text("", encoding="utf-8")
        code = cli_main(
            ["train", "--corpus", str(empty), "--out", str(workspace / "nope")]
        )
        assert code == EXIT_DATA
        assert "error" in capsys.readouterr().err

    def test_missing_corpus_file_is_data_error(self, workspace):
        code = cli_main(
            ["train", "--corpus", str(workspace / "ghost.txt"), "--out", str(workspace / "x")]
        )
        assert code == EXIT_DATA


class TestUsage:
    def test_missing_required_flag(self, capsys):
        assert cli_main(["train"]) == EXIT_USAGE
        assert "usage error" in capsys.readouterr().err

    def test_unknown_command(self):
        assert cli_main(["frobnicate"]) == EXIT_USAGE

    def test_eval_needs_suite_or_generate(self, trained_dir, workspace):
        code = cli_main(
            ["eval", "--model", str(trained_dir), "--report", str(workspace / "r.txt")]
        )
        assert code == EXIT_USAGE


class TestAsk:
    def test_answer_printed(self, trained_dir, capsys):
        code = cli_main(["ask", "--model", str(trained_dir), "--question", "Where do men go?"])
        assert code == EXIT_OK
        assert capsys.readouterr().out.strip() == "Men go to work"

    def test_rejection_exit_code(self, trained_dir, capsys):
        code = cli_main(
            ["ask", "--model", str(trained_dir), "--question", "Is a hexagonal moon tasty?"]
        )
        assert code == EXIT_REJECTED
        assert "rejected" in capsys.readouterr().err

    def test_trace_output_is_json(self, trained_dir, capsys):
        code = cli_main(
            ["ask", "--model", str(trained_dir), "--question", "Where do men go?", "--trace"]
        )
        assert code == EXIT_OK
        trace = json.loads(capsys.readouterr().out)
        assert trace["final_answer"] == "Men go to work"

    def test_threshold_flag_gates(self, trained_dir):
        code = cli_main(
            [
                "ask", "--model", str(trained_dir),
                "--question", "Where do men go?", "--threshold", "1.01",
            ]
        )
        assert code == EXIT_REJECTED


class TestEval:
    def test_generate_writes_text_and_json(self, trained_dir, workspace, capsys):
        report = workspace / "report.txt"
        code = cli_main(
            [
                "eval", "--model", str(trained_dir),
                "--generate", "30", "--seed", "5", "--report", str(report),
            ]
        )
        assert code == EXIT_OK
        text = report.read_text()
        assert "Type II Error" in text
        data = json.loads(Path(str(report) + ".json").read_text())
        assert data["parallel"]["questions_asked"] == 30
        assert data["consecutive"] is None

    def test_suite_file_input(self, trained_dir, workspace):
        suite = workspace / "suite.tsv"
        suite.write_text(
            "content\tWhere do men go?\tmen go to work\t\n"
            "meaningless\tzblorq vex?\t\t\n",
            encoding="utf-8",
        )
        report = workspace / "suite_report.txt"
        code = cli_main(
            ["eval", "--model", str(trained_dir), "--suite", str(suite),
             "--report", str(report)]
        )
        assert code == EXIT_OK
        data = json.loads(Path(str(report) + ".json").read_text())
        assert data["parallel"]["correct_count"] == 1
        assert data["parallel"]["type2_rate"] == 0.0

    def test_compare_fills_both_columns(self, trained_dir, workspace):
        other = workspace / "bundle_consecutive"
        code = cli_main(
            [
                "train",
                "--corpus", str(workspace / "corpus.txt"),
                "--qa", str(workspace / "qa.tsv"),
                "--out", str(other), "--mode", "consecutive",
            ]
        )
        assert code == EXIT_OK
        report = workspace / "compare.txt"
        code = cli_main(
            [
                "eval", "--model", str(trained_dir), "--compare", str(other),
                "--generate", "30", "--seed", "5", "--report", str(report),
            ]
        )
        assert code == EXIT_OK
        data = json.loads(Path(str(report) + ".json").read_text())
        assert data["parallel"] is not None and data["consecutive"] is not None
