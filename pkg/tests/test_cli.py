import os

from alpl.cli import main
from alpl.config import parse_config
from alpl.experiment import read_records


def run_cli(*argv):
    return main(list(argv))


class TestGenDataValidate:
    def test_gen_then_validate(self, tmp_path, capsys):
        out = str(tmp_path / "blobs.csv")
        assert run_cli("gen-data", "--out", out, "--classes", "3",
                       "--features", "4", "--per-class", "20",
                       "--spread", "0.1", "--seed", "1") == 0
        assert os.path.exists(out)
        assert "wrote 60 samples" in capsys.readouterr().out
        assert run_cli("validate", "--path", out) == 0
        msg = capsys.readouterr().out
        assert "60 samples" in msg and "3 classes" in msg

    def test_validate_rejects_bad_file(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        assert run_cli("validate", "--path", str(bad)) == 1
        assert "error" in capsys.readouterr().err

    def test_validate_needs_arguments(self, capsys):
        assert run_cli("validate") == 2


class TestRun:
    def config_file(self, tmp_path, out_dir):
        path = tmp_path / "config.txt"
        path.write_text(
            "dataset = blobs\n"
            "blobs_classes = 3\n"
            "blobs_features = 4\n"
            "blobs_per_class = 40\n"
            "blobs_spread = 0.12\n"
            "generation = fps\n"
            "flip_prob = 0.4\n"
            "selector = random\n"
            "initial_size = 8\n"
            "query_size = 10\n"
            "rounds = 1\n"
            "val_size = 10\n"
            "epochs = 3\n"
            "batch_size = 16\n"
            "lr = 0.01\n"
            "hidden_dims = 8\n"
            "seeds = 1\n"
            "workers = 1\n"
            f"output_dir = {out_dir}\n"
        )
        return str(path)

    def test_run_and_summarize(self, tmp_path, capsys):
        out_dir = str(tmp_path / "out")
        cfg = self.config_file(tmp_path, out_dir)
        assert run_cli("run", "--config", cfg) == 0
        stdout = capsys.readouterr().out
        assert "records:" in stdout and "summary:" in stdout
        records_path = os.path.join(out_dir, "records.jsonl")
        assert len(read_records(records_path)) == 2
        summary2 = str(tmp_path / "again.csv")
        assert run_cli("summarize", "--records", records_path,
                       "--out", summary2) == 0
        assert open(summary2).read() == open(
            os.path.join(out_dir, "summary.csv")).read()

    def test_flag_overrides_file(self, tmp_path, capsys):
        out_dir = str(tmp_path / "out2")
        cfg = self.config_file(tmp_path, out_dir)
        assert run_cli("run", "--config", cfg, "--selector", "mmu",
                       "--rounds", "0", "--print-config") == 0
        printed = parse_config(capsys.readouterr().out)
        assert printed.selector == "mmu"
        assert printed.rounds == 0
        assert printed.epochs == 3  # file value survives

    def test_run_without_config_uses_flags(self, tmp_path, capsys):
        out_dir = str(tmp_path / "out3")
        assert run_cli(
            "run", "--blobs-per-class", "40", "--blobs-classes", "3",
            "--blobs-features", "4", "--initial-size", "8",
            "--query-size", "10", "--rounds", "0", "--val-size", "10",
            "--epochs", "3", "--batch-size", "16", "--lr", "0.01",
            "--hidden-dims", "8", "--seeds", "1", "--workers", "1",
            "--output-dir", out_dir) == 0
        assert os.path.exists(os.path.join(out_dir, "records.jsonl"))

    def test_bad_config_is_exit_one(self, tmp_path, capsys):
        cfg = tmp_path / "bad.txt"
        cfg.write_text("selector = nonsense\n")
        assert run_cli("run", "--config", str(cfg)) == 1
        assert "error" in capsys.readouterr().err
