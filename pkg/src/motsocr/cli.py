"""Command-line interface.

Subcommands: generate, preprocess, train, evaluate, decode, matrix, report.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .ctc import CtcError, ZeroProbabilityError
from .dataset import DatasetError
from .harness import (
    ExperimentConfig,
    HarnessError,
    ResultsTable,
    emit_plot_data,
    generate_dataset,
    load_generated,
    preprocess_image,
    preset_config,
    run_cell,
    run_matrix,
    summarize,
)
from .imaging import ImagingError
from .metrics import MetricsError
from .network import NumericError
from .trainer import CheckpointError, TrainingError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERIC = 3

DATA_ERRORS = (
    DatasetError,
    ImagingError,
    CtcError,
    MetricsError,
    CheckpointError,
    HarnessError,
    FileNotFoundError,
    NotADirectoryError,
    json.JSONDecodeError,
)
NUMERIC_ERRORS = (NumericError, TrainingError, ZeroProbabilityError, FloatingPointError)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _load_config(args) -> ExperimentConfig:
    if args.config:
        cfg = ExperimentConfig.from_dict(
            json.loads(Path(args.config).read_text(encoding="utf-8"))
        )
    else:
        cfg = preset_config(args.preset, output_dir=args.out or "runs")
    overrides = {}
    if args.out:
        overrides["output_dir"] = args.out
    if getattr(args, "corpus", None):
        overrides["corpus_path"] = args.corpus
    if overrides:
        from dataclasses import replace

        cfg = replace(cfg, **overrides)
    return cfg


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="experiment config JSON (overrides --preset)")
    p.add_argument(
        "--preset", choices=("paper", "desk"), default="desk",
        help="built-in experiment scale (default: desk)",
    )
    p.add_argument("--corpus", help="word list path (one UTF-8 word per line)")
    p.add_argument("--out", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="motsocr", description=__doc__)
    parser.add_argument("--version", action="version", version=f"motsocr {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="render the corpus into a dataset directory")
    _add_config_flags(p)
    p.add_argument("--mode", choices=("word", "page"), default="word")

    p = sub.add_parser("preprocess", help="segment an external page image into word images")
    p.add_argument("image", help="input page (PGM or PNG)")
    p.add_argument("--out", required=True)
    p.add_argument("--height", type=int, default=32)
    p.add_argument("--epsilon", type=int, default=0)
    p.add_argument("--gap-min", type=int, default=2)

    p = sub.add_parser("train", help="train a single (dataset, repetition) cell")
    _add_config_flags(p)
    p.add_argument("--dataset", required=True, help='font name or "all"')
    p.add_argument("--seed-index", type=int, default=0, help="repetition index 0..4")

    p = sub.add_parser("evaluate", help="evaluate a checkpoint against a dataset split")
    _add_config_flags(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--seed-index", type=int, default=0)
    p.add_argument("--split", choices=("train", "test"), default="test")

    p = sub.add_parser("decode", help="read word images with a trained checkpoint")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("images", nargs="+", help="word images (PGM or PNG)")

    p = sub.add_parser("matrix", help="run the full dataset x repetition matrix")
    _add_config_flags(p)
    p.add_argument("--jobs", type=int, default=1, help="parallel cells")

    p = sub.add_parser("report", help="re-emit tables and plot data from matrix artifacts")
    _add_config_flags(p)
    return parser


def _cmd_generate(args) -> int:
    cfg = _load_config(args)
    out = args.out or str(Path(cfg.output_dir) / "dataset")
    manifest = generate_dataset(cfg, out, mode=args.mode)
    print(f"wrote {len(manifest['images'])} images and manifest to {out}")
    return EXIT_OK


def _cmd_preprocess(args) -> int:
    written = preprocess_image(args.image, args.out, args.height, args.epsilon, args.gap_min)
    print(f"wrote {len(written)} word images to {args.out}")
    return EXIT_OK


def _cmd_train(args) -> int:
    cfg = _load_config(args)

    def progress(log):
        print(
            f"epoch {log.epoch}: train ctc {log.train.ctc_error:.4f} "
            f"label {log.train.label_error:.4f} | test ctc {log.test.ctc_error:.4f} "
            f"label {log.test.label_error:.4f} seq {log.test.seq_error:.4f}",
            flush=True,
        )

    result = run_cell(cfg, args.dataset, args.seed_index, progress=progress)
    print(json.dumps(result, indent=1))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    from .dataset import build_alphabet, load_corpus, render_samples, split_80_20
    from .trainer import checkpoint_load, evaluate_model, _prepare

    cfg = _load_config(args)
    ckpt = checkpoint_load(args.checkpoint)
    corpus = load_corpus(cfg.corpus_path, cfg.corpus_limit)
    if args.dataset == "all":
        fonts = cfg.fonts
    else:
        fonts = tuple(f for f in cfg.fonts if f.name == args.dataset)
        if not fonts:
            raise HarnessError(f"unknown dataset {args.dataset!r}")
    by_font = render_samples(corpus, fonts, cfg.height)
    pool = [s for f in fonts for s in by_font[f.name]]
    split = split_80_20(pool, cfg.seeds[args.seed_index], args.dataset)
    samples = split.test if args.split == "test" else split.train
    seqs, codes = _prepare(samples, ckpt.alphabet)
    report = evaluate_model(ckpt.params, seqs, codes, args.dataset)
    print(report.CSV_HEADER)
    print(report.csv_row())
    return EXIT_OK


def _cmd_decode(args) -> int:
    from .ctc import best_path_decode
    from .imaging import load_gray
    from .network import FrameSequence, blstm_forward
    from .trainer import checkpoint_load

    ckpt = checkpoint_load(args.checkpoint)
    for path in args.images:
        img = load_gray(path)
        if img.height != ckpt.params.h_in:
            from .imaging import BinaryImage, normalize_height, otsu_threshold, binarize, tight_crop_unit_pad

            ink = binarize(img, otsu_threshold(img))
            img = normalize_height(tight_crop_unit_pad(ink), ckpt.params.h_in)
        state = blstm_forward(ckpt.params, FrameSequence.from_image(img))
        print(f"{path}\t{ckpt.alphabet.decode(best_path_decode(state.y))}")
    return EXIT_OK


def _cmd_matrix(args) -> int:
    cfg = _load_config(args)
    best, mean, results, failures = run_matrix(cfg, jobs=args.jobs)
    print("# best of repetitions")
    print(best.to_csv())
    print("# mean of repetitions")
    print(mean.to_csv())
    if failures:
        print(f"{len(failures)} cell(s) failed:", file=sys.stderr)
        for cell, err in sorted(failures.items()):
            print(f"  {cell}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_report(args) -> int:
    cfg = _load_config(args)
    cells_dir = Path(cfg.output_dir) / "cells"
    if not cells_dir.is_dir():
        raise HarnessError(f"no matrix artifacts under {cfg.output_dir}")
    results = {}
    for result_file in sorted(cells_dir.glob("*/result.json")):
        res = json.loads(result_file.read_text(encoding="utf-8"))
        results[res["cell"]] = res
    best, mean = summarize(cfg, results)
    out = Path(cfg.output_dir)
    (out / "table_best.csv").write_text(best.to_csv(), encoding="utf-8")
    (out / "table_mean.csv").write_text(mean.to_csv(), encoding="utf-8")
    print("# best of repetitions")
    print(best.to_csv())
    print("# mean of repetitions")
    print(mean.to_csv())
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "preprocess": _cmd_preprocess,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "decode": _cmd_decode,
    "matrix": _cmd_matrix,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args)
    except NUMERIC_ERRORS as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DATA_ERRORS as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
