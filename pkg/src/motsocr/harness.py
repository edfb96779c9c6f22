"""Experiment orchestration: dataset builds, the dataset x repetition
training matrix, result tables, and plot-data emission.

Every run writes a manifest carrying the full configuration and a config
hash, so any emitted number can be traced back and reproduced. Matrix
cells are resumable: a cell whose result file already exists is skipped.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

from .dataset import (
    Corpus,
    DatasetSplit,
    FontSpec,
    Sample,
    build_alphabet,
    build_experiment_datasets,
    bundled_corpus_path,
    dataset_names,
    default_fonts,
    load_corpus,
    render_samples,
    split_80_20,
    word_to_sample,
)
from .imaging import (
    binarize,
    compose_line,
    compose_page,
    normalize_height,
    otsu_threshold,
    save_gray,
    segment_lines,
    segment_words,
    tight_crop_unit_pad,
)
from .metrics import format_percent
from .trainer import (
    EpochLog,
    Hyperparams,
    checkpoint_save,
    epoch_logs_to_csv,
    fit,
)

MANIFEST_VERSION = "motsocr-manifest/1"

TABLE_COLUMNS = (
    "best_ctc_labelError",
    "best_ctc_seqError",
    "best_label_labelError",
    "best_label_seqError",
)


class HarnessError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    corpus_path: str
    fonts: tuple[FontSpec, ...]
    seeds: tuple[int, ...]
    output_dir: str
    height: int = 32
    epsilon: int = 0
    gap_min: int = 2
    n_hidden: int = 100
    hyperparams: Hyperparams = field(default_factory=Hyperparams)
    corpus_limit: int | None = None
    preset: str = "custom"

    def __post_init__(self):
        if len(self.fonts) != 6:
            raise HarnessError(f"exactly six fonts required, got {len(self.fonts)}")
        if len(self.seeds) != 5 or len(set(self.seeds)) != 5:
            raise HarnessError("five distinct repetition seeds required")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fonts"] = [asdict(f) for f in self.fonts]
        d["hyperparams"] = asdict(self.hyperparams)
        return d

    def config_hash(self) -> str:
        canon = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False)
        return hashlib.sha256(canon.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        d["fonts"] = tuple(FontSpec(**f) for f in d["fonts"])
        d["seeds"] = tuple(d["seeds"])
        if "hyperparams" in d:
            d["hyperparams"] = Hyperparams(**d["hyperparams"])
        return cls(**d)


DEFAULT_SEEDS = (101, 202, 303, 404, 505)


def preset_config(name: str, output_dir: str = "runs") -> ExperimentConfig:
    """Built-in experiment scales.

    paper: the full protocol (5,000 words, 80 epochs, N=100); CPU-days.
    desk:  reduced corpus and epochs (300 words, 40 epochs, N=64) sharing
           every code path; minutes-to-hours.
    """
    if name == "paper":
        return ExperimentConfig(
            corpus_path=str(bundled_corpus_path()),
            fonts=default_fonts(),
            seeds=DEFAULT_SEEDS,
            output_dir=output_dir,
            n_hidden=100,
            hyperparams=Hyperparams(max_epochs=80),
            preset="paper",
        )
    if name == "desk":
        return ExperimentConfig(
            corpus_path=str(bundled_corpus_path()),
            fonts=default_fonts(),
            seeds=DEFAULT_SEEDS,
            output_dir=output_dir,
            n_hidden=64,
            hyperparams=Hyperparams(max_epochs=40),
            corpus_limit=300,
            preset="desk",
        )
    raise HarnessError(f"unknown preset {name!r} (expected paper or desk)")


# ---------------------------------------------------------------------------
# Dataset generation on disk

def generate_dataset(cfg: ExperimentConfig, out_dir, mode: str = "word") -> dict:
    """Render the corpus in every font and write images plus a manifest.

    word mode renders each (word, font) pair directly; page mode lays the
    word images out on synthetic pages, runs them through line/word
    segmentation, and keeps the segmented crops (exercising the full
    preprocessing path). The manifest records the mode.
    """
    if mode not in ("word", "page"):
        raise HarnessError(f"unknown generation mode {mode!r}")
    out = Path(out_dir)
    (out / "images").mkdir(parents=True, exist_ok=True)
    corpus = load_corpus(cfg.corpus_path, cfg.corpus_limit)
    images = []
    by_font: dict[str, list[Sample]] = {}
    for font in cfg.fonts:
        if mode == "word":
            samples = [
                word_to_sample(w, wid, font, cfg.height)
                for wid, w in enumerate(corpus.words)
            ]
        else:
            samples = _samples_via_pages(corpus, font, cfg, out)
        by_font[font.name] = samples
        for s in samples:
            rel = f"images/{font.name}__{s.word_id:05d}.pgm"
            save_gray(s.image, out / rel)
            images.append(
                {
                    "path": rel,
                    "transcript": s.transcript,
                    "font": s.font,
                    "word_id": s.word_id,
                }
            )
    index = {(img["font"], img["word_id"]): i for i, img in enumerate(images)}
    splits = []
    for key, split in build_experiment_datasets(
        corpus, cfg.fonts, cfg.seeds, cfg.height, by_font=by_font
    ).items():
        name, seed = key
        splits.append(
            {
                "dataset": name,
                "seed": seed,
                "train": [index[(s.font, s.word_id)] for s in split.train],
                "test": [index[(s.font, s.word_id)] for s in split.test],
            }
        )
    manifest = {
        "version": MANIFEST_VERSION,
        "mode": mode,
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "n_words": len(corpus),
        "images": images,
        "splits": splits,
    }
    (out / "manifest.json").write_text(
        json.dumps(manifest, ensure_ascii=False, indent=1), encoding="utf-8"
    )
    return manifest


def _samples_via_pages(corpus: Corpus, font: FontSpec, cfg: ExperimentConfig, out: Path):
    """Compose pages from rendered word masks, segment them back, and build
    samples from the segmented crops. Segmentation output is reading order,
    so transcripts follow positionally."""
    word_masks = []
    for wid, w in enumerate(corpus.words):
        from .dataset import render_word

        gray = render_word(w, font)
        word_masks.append(tight_crop_unit_pad(binarize(gray, otsu_threshold(gray))))
    gap = max(cfg.gap_min + 4, 8)
    line_gap = 6
    words_per_line, lines_per_page = 5, 12
    pages = []
    per_page = words_per_line * lines_per_page
    for start in range(0, len(word_masks), per_page):
        chunk = word_masks[start : start + per_page]
        lines = [
            compose_line(chunk[i : i + words_per_line], gap)
            for i in range(0, len(chunk), words_per_line)
        ]
        pages.append(compose_page(lines, line_gap, margin=4))
    page_dir = out / "pages"
    page_dir.mkdir(parents=True, exist_ok=True)
    crops = []
    for pno, page in enumerate(pages):
        from .imaging import save_binary

        save_binary(page, page_dir / f"{font.name}__page{pno:03d}.png")
        for line in segment_lines(page, cfg.epsilon):
            crops.extend(segment_words(line, cfg.epsilon, cfg.gap_min))
    if len(crops) != len(corpus.words):
        raise HarnessError(
            f"page segmentation recovered {len(crops)} words, expected "
            f"{len(corpus.words)} ({font.name}; check epsilon/gap_min)"
        )
    return [
        Sample(
            image=normalize_height(tight_crop_unit_pad(word_img), cfg.height),
            transcript=corpus.words[wid],
            font=font.name,
            word_id=wid,
        )
        for wid, word_img in enumerate(crops)
    ]


def load_generated(dataset_dir):
    """Read a generated dataset directory back into splits."""
    from .imaging import load_gray

    root = Path(dataset_dir)
    manifest = json.loads((root / "manifest.json").read_text(encoding="utf-8"))
    if manifest.get("version") != MANIFEST_VERSION:
        raise HarnessError(f"unsupported manifest version in {dataset_dir}")
    samples = [
        Sample(
            image=load_gray(root / img["path"]),
            transcript=img["transcript"],
            font=img["font"],
            word_id=img["word_id"],
        )
        for img in manifest["images"]
    ]
    splits = {}
    for sp in manifest["splits"]:
        splits[(sp["dataset"], sp["seed"])] = DatasetSplit(
            dataset_name=sp["dataset"],
            seed=sp["seed"],
            train=tuple(samples[i] for i in sp["train"]),
            test=tuple(samples[i] for i in sp["test"]),
        )
    return manifest, samples, splits


# ---------------------------------------------------------------------------
# External-image preprocessing

def preprocess_image(path, out_dir, height: int, epsilon: int, gap_min: int) -> list[str]:
    """Segment a page image into height-normalized word images on disk."""
    from .imaging import load_gray

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    gray = load_gray(path)
    page = binarize(gray, otsu_threshold(gray))
    written = []
    for lno, line in enumerate(segment_lines(page, epsilon)):
        for wno, word in enumerate(segment_words(line, epsilon, gap_min)):
            img = normalize_height(tight_crop_unit_pad(word), height)
            rel = f"line{lno:03d}_word{wno:03d}.pgm"
            save_gray(img, out / rel)
            written.append(rel)
    return written


# ---------------------------------------------------------------------------
# The training matrix

@dataclass
class ResultsTable:
    """Rows keyed by dataset name, columns per the experiment table schema;
    values are fractions (rendered as percentages)."""

    rows: dict[str, tuple[float, float, float, float]]

    def to_csv(self) -> str:
        lines = ["Test datasets," + ",".join(TABLE_COLUMNS)]
        for name, vals in self.rows.items():
            lines.append(name + "," + ",".join(format_percent(v) for v in vals))
        return "\n".join(lines) + "\n"


def _cell_id(dataset: str, seed_index: int) -> str:
    return f"{dataset}__rep{seed_index}"


def run_cell(
    cfg: ExperimentConfig,
    dataset: str,
    seed_index: int,
    splits=None,
    progress=None,
) -> dict:
    """Train one (dataset, repetition) cell and write its artifacts.

    Returns the cell result dict (also saved as result.json). Completed
    cells (result.json present) are returned as-is without retraining.
    """
    cell_dir = Path(cfg.output_dir) / "cells" / _cell_id(dataset, seed_index)
    result_path = cell_dir / "result.json"
    if result_path.is_file():
        return json.loads(result_path.read_text(encoding="utf-8"))
    cell_dir.mkdir(parents=True, exist_ok=True)

    corpus = load_corpus(cfg.corpus_path, cfg.corpus_limit)
    alphabet = build_alphabet(corpus)
    seed = cfg.seeds[seed_index]
    if splits is None:
        if dataset == "all":
            fonts = cfg.fonts
        else:
            fonts = tuple(f for f in cfg.fonts if f.name == dataset)
            if not fonts:
                raise HarnessError(f"unknown dataset {dataset!r}")
        by_font = render_samples(corpus, fonts, cfg.height)
        pool = [s for f in fonts for s in by_font[f.name]]
        split = split_80_20(pool, seed, dataset)
    else:
        split = splits[(dataset, seed)]

    hp = replace(cfg.hyperparams, seed=seed)
    t0 = time.perf_counter()
    tracker, logs = fit(
        split,
        alphabet,
        hp,
        cfg.n_hidden,
        checkpoint_path=str(cell_dir / "last.ckpt"),
        progress=progress,
    )
    elapsed = time.perf_counter() - t0

    (cell_dir / "logs.csv").write_text(epoch_logs_to_csv(logs), encoding="utf-8")
    (cell_dir / "plot_data.csv").write_text(
        emit_plot_data({_cell_id(dataset, seed_index): logs}), encoding="utf-8"
    )
    for crit, best in (("ctc", tracker.best_by_ctc), ("label", tracker.best_by_label)):
        from .network import NetworkParams, param_count

        params = NetworkParams(
            split.train[0].image.height, cfg.n_hidden, alphabet.n_classes, best.theta.copy()
        )
        checkpoint_save(cell_dir / f"best_{crit}.ckpt", params, alphabet, seed=seed)
    result = {
        "cell": _cell_id(dataset, seed_index),
        "dataset": dataset,
        "seed": seed,
        "seed_index": seed_index,
        "config_hash": cfg.config_hash(),
        "epochs_run": len(logs),
        "wall_time": elapsed,
        "best_by_ctc": _best_to_dict(tracker.best_by_ctc),
        "best_by_label": _best_to_dict(tracker.best_by_label),
    }
    _write_json(result_path, result)
    _write_json(
        cell_dir / "manifest.json",
        {
            "version": MANIFEST_VERSION,
            "config": cfg.to_dict(),
            "config_hash": cfg.config_hash(),
            "dataset": dataset,
            "seed": seed,
            "kernel_backend": _backend_name(),
        },
    )
    return result


def _backend_name() -> str:
    from ._kernels import BACKEND

    return BACKEND


def _best_to_dict(best) -> dict:
    r = best.report
    return {
        "epoch": best.epoch,
        "value": best.value,
        "test_ctc_error": r.ctc_error,
        "test_label_error": r.label_error,
        "test_seq_error": r.seq_error,
        "test_insertions": r.insertions,
        "test_deletions": r.deletions,
        "test_substitutions": r.substitutions,
    }


def _write_json(path, obj) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=1)
    os.replace(tmp, path)


def _run_cell_job(cfg_dict: dict, dataset: str, seed_index: int) -> dict:
    cfg = ExperimentConfig.from_dict(cfg_dict)
    return run_cell(cfg, dataset, seed_index)


def run_matrix(cfg: ExperimentConfig, jobs: int = 1, progress=None):
    """All dataset x repetition cells, then best-of and mean-of tables.

    Cell failures are recorded and surfaced without stopping the rest of
    the matrix. Returns (best_table, mean_table, results, failures).
    """
    names = dataset_names(cfg.fonts)
    todo = [(d, i) for d in names for i in range(len(cfg.seeds))]
    results: dict[str, dict] = {}
    failures: dict[str, str] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futs = {
                pool.submit(_run_cell_job, cfg.to_dict(), d, i): (d, i) for d, i in todo
            }
            for fut, (d, i) in futs.items():
                try:
                    res = fut.result()
                    results[res["cell"]] = res
                except Exception as exc:  # noqa: BLE001 - cell isolation
                    failures[_cell_id(d, i)] = f"{type(exc).__name__}: {exc}"
    else:
        for d, i in todo:
            try:
                res = run_cell(cfg, d, i, progress=progress)
                results[res["cell"]] = res
            except Exception as exc:  # noqa: BLE001 - cell isolation
                failures[_cell_id(d, i)] = f"{type(exc).__name__}: {exc}"

    best_table, mean_table = summarize(cfg, results)
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "table_best.csv").write_text(best_table.to_csv(), encoding="utf-8")
    (out / "table_mean.csv").write_text(mean_table.to_csv(), encoding="utf-8")
    _write_json(
        out / "matrix_summary.json",
        {
            "config_hash": cfg.config_hash(),
            "config": cfg.to_dict(),
            "cells_completed": sorted(results),
            "failures": failures,
        },
    )
    return best_table, mean_table, results, failures


def summarize(cfg: ExperimentConfig, results: dict[str, dict]):
    """Aggregate per-dataset cell results into best-of and mean-of tables."""
    names = dataset_names(cfg.fonts)
    best_rows = {}
    mean_rows = {}
    for name in names:
        cells = [
            r
            for r in results.values()
            if r["dataset"] == name and "best_by_ctc" in r
        ]
        if not cells:
            continue
        best_ctc = min(cells, key=lambda r: r["best_by_ctc"]["value"])["best_by_ctc"]
        best_label = min(cells, key=lambda r: r["best_by_label"]["value"])["best_by_label"]
        best_rows[name] = (
            best_ctc["test_label_error"],
            best_ctc["test_seq_error"],
            best_label["test_label_error"],
            best_label["test_seq_error"],
        )
        n = len(cells)
        mean_rows[name] = (
            sum(r["best_by_ctc"]["test_label_error"] for r in cells) / n,
            sum(r["best_by_ctc"]["test_seq_error"] for r in cells) / n,
            sum(r["best_by_label"]["test_label_error"] for r in cells) / n,
            sum(r["best_by_label"]["test_seq_error"] for r in cells) / n,
        )
    return ResultsTable(best_rows), ResultsTable(mean_rows)


def emit_plot_data(runs: dict[str, list[EpochLog]]) -> str:
    """Long-format CSV (run, epoch, metric, split, value) for external
    plotting tools; epochs ascend within each run."""
    lines = ["run,epoch,metric,split,value"]
    for run_id, logs in runs.items():
        for log in logs:
            for split_name, report in (("train", log.train), ("test", log.test)):
                for metric in ("ctc_error", "label_error", "seq_error"):
                    value = getattr(report, metric)
                    lines.append(f"{run_id},{log.epoch},{metric},{split_name},{value!r}")
    return "\n".join(lines) + "\n"
