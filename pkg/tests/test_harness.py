from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from motsocr.cli import main
from motsocr.dataset import default_fonts
from motsocr.harness import (
    ExperimentConfig,
    HarnessError,
    ResultsTable,
    emit_plot_data,
    generate_dataset,
    load_generated,
    preset_config,
    run_cell,
    run_matrix,
    summarize,
)
from motsocr.metrics import EvalReport
from motsocr.trainer import EpochLog, Hyperparams


def micro_config(tmp_path, n_words=8, epochs=1, **overrides) -> ExperimentConfig:
    corpus = tmp_path / "words.txt"
    words = ["le", "la", "il", "un", "on", "en", "au", "si", "ma", "ta"][:n_words]
    corpus.write_text("\n".join(words) + "\n", encoding="utf-8")
    cfg = dict(
        corpus_path=str(corpus),
        fonts=default_fonts(),
        seeds=(1, 2, 3, 4, 5),
        output_dir=str(tmp_path / "runs"),
        height=12,
        n_hidden=4,
        hyperparams=Hyperparams(max_epochs=epochs, seed=0),
    )
    cfg.update(overrides)
    return ExperimentConfig(**cfg)


def fake_logs(n_epochs=80):
    logs = []
    for e in range(1, n_epochs + 1):
        tr = EvalReport("d", 8, 2.0 / e, 0.5 / e, 0.8 / e, 1, 0, 2)
        te = EvalReport("d", 2, 3.0 / e, 0.6 / e, 0.9 / e, 0, 1, 1)
        logs.append(EpochLog(e, tr, te, wall_time=0.1))
    return logs


class TestConfig:
    def test_round_trip(self, tmp_path):
        cfg = micro_config(tmp_path)
        again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
        assert again == cfg
        assert again.config_hash() == cfg.config_hash()

    def test_six_fonts_required(self, tmp_path):
        with pytest.raises(HarnessError, match="six fonts"):
            micro_config(tmp_path, fonts=default_fonts()[:3])

    def test_five_distinct_seeds_required(self, tmp_path):
        with pytest.raises(HarnessError, match="five distinct"):
            micro_config(tmp_path, seeds=(1, 1, 2, 3, 4))

    def test_presets(self):
        paper = preset_config("paper")
        desk = preset_config("desk")
        assert paper.hyperparams.max_epochs == 80
        assert paper.n_hidden == 100
        assert desk.corpus_limit == 300
        assert desk.hyperparams.max_epochs == 40
        assert desk.hyperparams.learning_rate == pytest.approx(1e-4)
        with pytest.raises(HarnessError):
            preset_config("huge")


class TestGenerate:
    def test_word_mode_layout(self, tmp_path):
        cfg = micro_config(tmp_path)
        out = tmp_path / "ds"
        manifest = generate_dataset(cfg, out, mode="word")
        assert len(manifest["images"]) == 8 * 6
        assert len(manifest["splits"]) == 35
        first = manifest["images"][0]
        assert (out / first["path"]).is_file()
        _, samples, splits = load_generated(out)
        assert len(samples) == 48
        split = splits[("all", 1)]
        assert len(split.train) + len(split.test) == 48

    def test_page_mode_recovers_every_word(self, tmp_path):
        # gap_min 6 clears the mono faces' widest intra-word gaps at 14 pt
        cfg = micro_config(tmp_path, gap_min=6)
        out = tmp_path / "ds_pages"
        manifest = generate_dataset(cfg, out, mode="page")
        assert manifest["mode"] == "page"
        assert len(manifest["images"]) == 8 * 6
        # transcripts must line up with the generated word order
        _, samples, _ = load_generated(out)
        by_font = {}
        for s in samples:
            by_font.setdefault(s.font, []).append(s.transcript)
        words = Path(cfg.corpus_path).read_text(encoding="utf-8").split()
        for transcripts in by_font.values():
            assert transcripts == words

    def test_generated_images_load_back_identical(self, tmp_path):
        from motsocr.dataset import load_corpus, word_to_sample
        from motsocr.imaging import load_gray

        cfg = micro_config(tmp_path)
        out = tmp_path / "ds"
        manifest = generate_dataset(cfg, out, mode="word")
        corpus = load_corpus(cfg.corpus_path)
        img0 = manifest["images"][0]
        rendered = word_to_sample(
            img0["transcript"], img0["word_id"], cfg.fonts[0], cfg.height
        )
        assert (load_gray(out / img0["path"]).pixels == rendered.image.pixels).all()


class TestMatrix:
    def test_micro_matrix_tables_and_resume(self, tmp_path):
        cfg = micro_config(tmp_path)
        best, mean, results, failures = run_matrix(cfg)
        assert not failures
        assert len(results) == 35
        assert set(best.rows) == {"all", *(f.name for f in cfg.fonts)}
        assert len(best.rows) == 7 and len(mean.rows) == 7
        out = Path(cfg.output_dir)
        assert (out / "table_best.csv").is_file()
        assert (out / "matrix_summary.json").is_file()

        # resumability: only a deleted cell is retrained
        cell_dir = out / "cells" / "all__rep0"
        result_file = cell_dir / "result.json"
        other_file = out / "cells" / "Arial_14__rep1" / "result.json"
        before_other = other_file.stat().st_mtime_ns
        for p in sorted(cell_dir.iterdir()):
            p.unlink()
        run_matrix(cfg)
        assert result_file.is_file()
        assert other_file.stat().st_mtime_ns == before_other

    def test_cell_failure_is_contained(self, tmp_path):
        cfg = micro_config(tmp_path)
        bad = ExperimentConfig.from_dict(cfg.to_dict())
        object.__setattr__(bad, "corpus_path", str(tmp_path / "missing.txt"))
        _, _, results, failures = run_matrix(bad)
        assert len(failures) == 35 and not results

    def test_table_csv_format(self):
        table = ResultsTable({"all": (0.0000650, 0.0004444, 0.0000650, 0.0004444)})
        csv = table.to_csv()
        assert csv.splitlines()[0] == (
            "Test datasets,best_ctc_labelError,best_ctc_seqError,"
            "best_label_labelError,best_label_seqError"
        )
        assert csv.splitlines()[1] == "all,0.00650%,0.04444%,0.00650%,0.04444%"

    def test_summarize_best_is_min_over_reps(self, tmp_path):
        cfg = micro_config(tmp_path)
        results = {}
        for i, label in enumerate((0.3, 0.1, 0.2)):
            results[f"all__rep{i}"] = {
                "dataset": "all",
                "best_by_ctc": {
                    "value": label * 10,
                    "test_label_error": label,
                    "test_seq_error": label * 2,
                },
                "best_by_label": {
                    "value": label,
                    "test_label_error": label,
                    "test_seq_error": label * 2,
                },
            }
        best, mean = summarize(cfg, results)
        assert best.rows["all"][2] == pytest.approx(0.1)
        assert mean.rows["all"][2] == pytest.approx(0.2)


class TestPlotData:
    def test_shape_and_order(self):
        csv = emit_plot_data({"run1": fake_logs(80)})
        lines = csv.strip().split("\n")
        assert lines[0] == "run,epoch,metric,split,value"
        assert len(lines) == 1 + 80 * 3 * 2
        epochs = [int(l.split(",")[1]) for l in lines[1:]]
        assert epochs == sorted(epochs)

    def test_values_match_logs(self):
        logs = fake_logs(2)
        csv = emit_plot_data({"r": logs})
        row = next(
            l for l in csv.splitlines() if l.startswith("r,2,label_error,test")
        )
        assert float(row.split(",")[-1]) == logs[1].test.label_error


class TestCli:
    def _write_config(self, tmp_path, **overrides) -> str:
        cfg = micro_config(tmp_path, **overrides)
        path = tmp_path / "config.json"
        path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
        return str(path)

    def test_usage_error_exits_1(self, capsys):
        assert main(["train"]) == 1  # --dataset missing
        assert main([]) == 1

    def test_generate_and_train_and_evaluate_and_decode(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path)
        ds_dir = str(tmp_path / "ds")
        assert main(["generate", "--config", cfg_path, "--out", ds_dir]) == 0

        assert (
            main(["train", "--config", cfg_path, "--dataset", "Arial_14", "--seed-index", "0"])
            == 0
        )
        out = capsys.readouterr().out
        assert "best_by_label" in out
        ckpt = tmp_path / "runs" / "cells" / "Arial_14__rep0" / "best_label.ckpt"
        assert ckpt.is_file()

        assert (
            main(
                [
                    "evaluate",
                    "--config",
                    cfg_path,
                    "--checkpoint",
                    str(ckpt),
                    "--dataset",
                    "Arial_14",
                    "--seed-index",
                    "0",
                ]
            )
            == 0
        )
        out = capsys.readouterr().out
        assert "dataset_name" in out

        word_img = next((tmp_path / "ds" / "images").glob("Arial_14__*.pgm"))
        assert main(["decode", "--checkpoint", str(ckpt), str(word_img)]) == 0
        assert "\t" in capsys.readouterr().out

    def test_preprocess_on_generated_page(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path, gap_min=3)
        ds_dir = str(tmp_path / "dsp")
        assert main(["generate", "--config", cfg_path, "--out", ds_dir, "--mode", "page"]) == 0
        page = next((tmp_path / "dsp" / "pages").glob("*.png"))
        out_dir = str(tmp_path / "words")
        assert main(["preprocess", str(page), "--out", out_dir, "--gap-min", "3"]) == 0
        assert len(list(Path(out_dir).glob("*.pgm"))) == 8

    def test_matrix_and_report(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path)
        assert main(["matrix", "--config", cfg_path]) == 0
        out = capsys.readouterr().out
        assert "best_ctc_labelError" in out
        assert main(["report", "--config", cfg_path]) == 0
        assert "Test datasets" in capsys.readouterr().out

    def test_data_error_exits_2(self, tmp_path, capsys):
        cfg_path = self._write_config(tmp_path)
        cfg = json.loads(Path(cfg_path).read_text(encoding="utf-8"))
        cfg["corpus_path"] = str(tmp_path / "missing.txt")
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps(cfg), encoding="utf-8")
        assert main(["generate", "--config", str(bad)]) == 2

    def test_numeric_failure_exits_3(self, tmp_path, capsys):
        # an absurd learning rate overflows within the first epoch
        cfg = micro_config(tmp_path, hyperparams=Hyperparams(max_epochs=2, learning_rate=1e18))
        cfg_path = tmp_path / "hot.json"
        cfg_path.write_text(json.dumps(cfg.to_dict()), encoding="utf-8")
        assert (
            main(["train", "--config", str(cfg_path), "--dataset", "Arial_14", "--seed-index", "0"])
            == 3
        )
