"""Steepest-descent-with-momentum training loop over (network, ctc):
per-epoch evaluation, best-model tracking under the CTC and label error
criteria, fixed-epoch and early-stopping policies, and checkpointing.
"""
from __future__ import annotations

import base64
import json
import os
import time
from dataclasses import dataclass

import numpy as np

from . import ctc as ctc_mod
from .dataset import Alphabet, DatasetSplit
from .metrics import EvalReport, evaluate
from .network import (
    FrameSequence,
    NetworkParams,
    blstm_forward,
    init_params,
    network_backward,
)

CHECKPOINT_VERSION = "motsocr-checkpoint/1"


class TrainingError(RuntimeError):
    pass


class CheckpointError(RuntimeError):
    pass


@dataclass(frozen=True)
class Hyperparams:
    learning_rate: float = 1e-4
    momentum: float = 0.9
    max_epochs: int = 80
    stop_policy: str = "fixed"  # "fixed" | "early_stop"
    patience: int = 20
    seed: int = 0
    clip: float | None = None  # element-wise gradient clip, off by default

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if not 0 <= self.momentum < 1:
            raise ValueError("momentum must lie in [0, 1)")
        if self.max_epochs < 1 or self.patience < 1:
            raise ValueError("max_epochs and patience must be >= 1")
        if self.stop_policy not in ("fixed", "early_stop"):
            raise ValueError(f"unknown stop policy {self.stop_policy!r}")


@dataclass(frozen=True)
class EpochLog:
    epoch: int
    train: EvalReport
    test: EvalReport
    wall_time: float


@dataclass
class TrackedBest:
    epoch: int
    value: float
    theta: np.ndarray
    report: EvalReport


@dataclass
class BestModelTracker:
    """Minimum test-set CTC error and label error seen so far; ties keep
    the earlier epoch."""

    best_by_ctc: TrackedBest | None = None
    best_by_label: TrackedBest | None = None

    def update(self, epoch: int, params: NetworkParams, test_report: EvalReport) -> None:
        if self.best_by_ctc is None or test_report.ctc_error < self.best_by_ctc.value:
            self.best_by_ctc = TrackedBest(
                epoch, test_report.ctc_error, params.flat.copy(), test_report
            )
        if self.best_by_label is None or test_report.label_error < self.best_by_label.value:
            self.best_by_label = TrackedBest(
                epoch, test_report.label_error, params.flat.copy(), test_report
            )


class EarlyStopping:
    """Stop when the tracked value has not strictly improved for `patience`
    consecutive epochs."""

    def __init__(self, patience: int):
        self.patience = patience
        self.best = np.inf
        self.best_epoch = 0

    def update(self, epoch: int, value: float) -> bool:
        """Record this epoch's value; True means stop after this epoch."""
        if value < self.best:
            self.best = value
            self.best_epoch = epoch
        return epoch - self.best_epoch >= self.patience


def sgd_momentum_step(params, grads, velocity, hp: Hyperparams):
    """velocity' = momentum * velocity - lr * grads; params' = params + velocity'.

    Operates on flat float64 arrays; returns (params', velocity').
    """
    if params.shape != grads.shape or params.shape != velocity.shape:
        raise ValueError("params, grads and velocity shapes must match")
    if hp.clip is not None:
        grads = np.clip(grads, -hp.clip, hp.clip)
    velocity = hp.momentum * velocity - hp.learning_rate * grads
    new_params = params + velocity
    if not np.isfinite(new_params).all():
        bad = int(np.flatnonzero(~np.isfinite(new_params))[0])
        raise TrainingError(
            f"non-finite update at parameter index {bad} "
            f"(grad={grads.flat[bad]!r}, velocity={velocity.flat[bad]!r})"
        )
    return new_params, velocity


def _prepare(samples, alphabet: Alphabet):
    seqs = [FrameSequence.from_image(s.image) for s in samples]
    codes = [alphabet.encode(s.transcript) for s in samples]
    return seqs, codes


def evaluate_model(
    params: NetworkParams, seqs, codes, dataset_name: str = ""
) -> EvalReport:
    """Forward + decode + CTC loss per sample, aggregated in fixed order."""
    pairs = []
    losses = []
    for seq, code in zip(seqs, codes):
        state = blstm_forward(params, seq)
        losses.append(ctc_mod.ctc_loss_and_grad(state.y, code).loss)
        pairs.append((ctc_mod.best_path_decode(state.y), code))
    return evaluate(pairs, losses, dataset_name)


def fit(
    split: DatasetSplit,
    alphabet: Alphabet,
    hp: Hyperparams,
    n_hidden: int,
    checkpoint_path: str | None = None,
    resume_from: str | None = None,
    progress=None,
) -> tuple[BestModelTracker, list[EpochLog]]:
    """Train on split.train, evaluating both partitions every epoch.

    The per-epoch sample order comes from a PCG64 stream keyed on
    (hp.seed, epoch), so a resumed run replays the exact same orders as an
    uninterrupted one. When checkpoint_path is given, the full training
    state is saved there after every epoch (atomically).
    """
    train_seqs, train_codes = _prepare(split.train, alphabet)
    test_seqs, test_codes = _prepare(split.test, alphabet)
    h_in = split.train[0].image.height

    if resume_from is not None:
        ckpt = checkpoint_load(resume_from)
        params = ckpt.params
        if (params.h_in, params.n, params.k) != (h_in, n_hidden, alphabet.n_classes):
            raise CheckpointError("checkpoint dimensions do not match this run")
        velocity = ckpt.state["velocity"]
        start_epoch = ckpt.state["epoch"] + 1
        tracker = ckpt.state["tracker"]
        logs = ckpt.state["logs"]
        stopper = ckpt.state["stopper"]
    else:
        params = init_params(h_in, n_hidden, alphabet.n_classes, hp.seed)
        velocity = np.zeros_like(params.flat)
        start_epoch = 1
        tracker = BestModelTracker()
        logs = []
        stopper = EarlyStopping(hp.patience)

    for epoch in range(start_epoch, hp.max_epochs + 1):
        t0 = time.perf_counter()
        order = np.random.default_rng([hp.seed, epoch]).permutation(len(train_seqs))
        for idx in order:
            state = blstm_forward(params, train_seqs[idx])
            result = ctc_mod.ctc_loss_and_grad(state.y, train_codes[idx])
            grads = network_backward(params, state, result.grad_logits)
            new_flat, velocity = sgd_momentum_step(params.flat, grads.flat, velocity, hp)
            params.flat[:] = new_flat
        train_report = evaluate_model(params, train_seqs, train_codes, split.dataset_name)
        test_report = evaluate_model(params, test_seqs, test_codes, split.dataset_name)
        tracker.update(epoch, params, test_report)
        logs.append(
            EpochLog(epoch, train_report, test_report, time.perf_counter() - t0)
        )
        if progress is not None:
            progress(logs[-1])
        should_stop = stopper.update(epoch, test_report.label_error)
        if checkpoint_path is not None:
            checkpoint_save(
                checkpoint_path,
                params,
                alphabet,
                seed=hp.seed,
                state={
                    "epoch": epoch,
                    "velocity": velocity,
                    "tracker": tracker,
                    "logs": logs,
                    "stopper": stopper,
                },
            )
        if hp.stop_policy == "early_stop" and should_stop:
            break
    return tracker, logs


def select_best(trackers: list[BestModelTracker]):
    """Across repetitions: the minimum of each criterion's tracked best,
    plus the arithmetic mean of each criterion's best test metrics."""
    if not trackers:
        raise ValueError("no runs to select from")
    by_ctc = [t.best_by_ctc for t in trackers]
    by_label = [t.best_by_label for t in trackers]
    best = {
        "ctc": min(by_ctc, key=lambda b: b.value),
        "label": min(by_label, key=lambda b: b.value),
    }
    mean = {
        "ctc": _mean_report([b.report for b in by_ctc]),
        "label": _mean_report([b.report for b in by_label]),
    }
    return best, mean


def _mean_report(reports: list[EvalReport]) -> EvalReport:
    n = len(reports)
    return EvalReport(
        dataset_name=reports[0].dataset_name,
        n_sequences=reports[0].n_sequences,
        ctc_error=sum(r.ctc_error for r in reports) / n,
        label_error=sum(r.label_error for r in reports) / n,
        seq_error=sum(r.seq_error for r in reports) / n,
        insertions=sum(r.insertions for r in reports),
        deletions=sum(r.deletions for r in reports),
        substitutions=sum(r.substitutions for r in reports),
    )


# ---------------------------------------------------------------------------
# Checkpoint container: versioned JSON with base64 float64 arrays.

@dataclass
class Checkpoint:
    params: NetworkParams
    alphabet: Alphabet
    seed: int
    state: dict | None


def _encode_array(a: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(a, dtype="<f8").tobytes()).decode("ascii")


def _decode_array(s: str, n: int | None = None) -> np.ndarray:
    arr = np.frombuffer(base64.b64decode(s), dtype="<f8").astype(np.float64)
    if n is not None and arr.size != n:
        raise CheckpointError(f"array has {arr.size} values, expected {n}")
    return arr


def _report_to_dict(r: EvalReport) -> dict:
    return {
        "dataset_name": r.dataset_name,
        "n_sequences": r.n_sequences,
        "ctc_error": r.ctc_error,
        "label_error": r.label_error,
        "seq_error": r.seq_error,
        "insertions": r.insertions,
        "deletions": r.deletions,
        "substitutions": r.substitutions,
    }


def _report_from_dict(d: dict) -> EvalReport:
    return EvalReport(**d)


def checkpoint_save(
    path,
    params: NetworkParams,
    alphabet: Alphabet,
    seed: int,
    state: dict | None = None,
) -> None:
    """Atomic write (temp file + rename) of the versioned container."""
    doc = {
        "version": CHECKPOINT_VERSION,
        "dims": {"h_in": params.h_in, "n": params.n, "k": params.k},
        "alphabet": list(alphabet.chars),
        "seed": seed,
        "theta": _encode_array(params.flat),
    }
    if state is not None:
        tracker: BestModelTracker = state["tracker"]
        stopper: EarlyStopping = state["stopper"]
        doc["training_state"] = {
            "epoch": state["epoch"],
            "velocity": _encode_array(state["velocity"]),
            "tracker": {
                name: {
                    "epoch": b.epoch,
                    "value": b.value,
                    "theta": _encode_array(b.theta),
                    "report": _report_to_dict(b.report),
                }
                for name, b in (
                    ("ctc", tracker.best_by_ctc),
                    ("label", tracker.best_by_label),
                )
                if b is not None
            },
            "stopper": {
                "patience": stopper.patience,
                "best": None if np.isinf(stopper.best) else stopper.best,
                "best_epoch": stopper.best_epoch,
            },
            "logs": [
                {
                    "epoch": log.epoch,
                    "train": _report_to_dict(log.train),
                    "test": _report_to_dict(log.test),
                    "wall_time": log.wall_time,
                }
                for log in state["logs"]
            ],
        }
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)
    os.replace(tmp, path)


def checkpoint_load(path) -> Checkpoint:
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if not isinstance(doc, dict) or doc.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint {path} has version {doc.get('version')!r}, "
            f"expected {CHECKPOINT_VERSION!r}"
        )
    try:
        dims = doc["dims"]
        h_in, n, k = dims["h_in"], dims["n"], dims["k"]
        from .network import param_count

        flat = _decode_array(doc["theta"], param_count(h_in, n, k))
        params = NetworkParams(h_in, n, k, flat)
        alphabet = Alphabet(tuple(doc["alphabet"]))
        seed = doc["seed"]
        state = None
        if "training_state" in doc:
            ts = doc["training_state"]
            tracker = BestModelTracker()
            for name, best in ts["tracker"].items():
                tb = TrackedBest(
                    epoch=best["epoch"],
                    value=best["value"],
                    theta=_decode_array(best["theta"], param_count(h_in, n, k)),
                    report=_report_from_dict(best["report"]),
                )
                if name == "ctc":
                    tracker.best_by_ctc = tb
                else:
                    tracker.best_by_label = tb
            stopper = EarlyStopping(ts["stopper"]["patience"])
            stopper.best = np.inf if ts["stopper"]["best"] is None else ts["stopper"]["best"]
            stopper.best_epoch = ts["stopper"]["best_epoch"]
            state = {
                "epoch": ts["epoch"],
                "velocity": _decode_array(ts["velocity"], flat.size),
                "tracker": tracker,
                "stopper": stopper,
                "logs": [
                    EpochLog(
                        epoch=l["epoch"],
                        train=_report_from_dict(l["train"]),
                        test=_report_from_dict(l["test"]),
                        wall_time=l["wall_time"],
                    )
                    for l in ts["logs"]
                ],
            }
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"corrupt checkpoint {path}: {exc}") from exc
    return Checkpoint(params=params, alphabet=alphabet, seed=seed, state=state)


def epoch_logs_to_csv(logs: list[EpochLog]) -> str:
    """Bit-reproducible per-epoch metrics CSV (wall time deliberately
    excluded so identical runs serialize identically)."""
    header = (
        "epoch,"
        "train_ctc_error,train_label_error,train_seq_error,"
        "train_insertions,train_deletions,train_substitutions,"
        "test_ctc_error,test_label_error,test_seq_error,"
        "test_insertions,test_deletions,test_substitutions"
    )
    rows = [header]
    for log in logs:
        tr, te = log.train, log.test
        rows.append(
            f"{log.epoch},"
            f"{tr.ctc_error!r},{tr.label_error!r},{tr.seq_error!r},"
            f"{tr.insertions},{tr.deletions},{tr.substitutions},"
            f"{te.ctc_error!r},{te.label_error!r},{te.seq_error!r},"
            f"{te.insertions},{te.deletions},{te.substitutions}"
        )
    return "\n".join(rows) + "\n"
