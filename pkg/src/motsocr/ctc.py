"""Connectionist temporal classification: log-space forward/backward loss
and gradient over blank-augmented label lattices, plus best-path decoding.

Labels are integers 1..K-1; label 0 is the reserved blank. The loss sums
path probabilities over every frame-level path whose collapse (merge
adjacent repeats, then drop blanks) equals the target sequence.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import _kernels

BLANK = 0


class CtcError(ValueError):
    pass


class InfeasibleLabelError(CtcError):
    """The target cannot be emitted in the given number of frames."""


class ZeroProbabilityError(CtcError):
    """A feasible target has probability exactly zero under y (some required
    label holds no mass on any usable frame, e.g. after softmax collapse)."""


@dataclass(frozen=True)
class CtcResult:
    loss: float                 # -ln p(z|x), nats
    grad_logits: np.ndarray     # (T, K), d loss / d logit


def augment_labels(labels: Sequence[int]) -> np.ndarray:
    """blank, z1, blank, z2, ..., blank (length 2|z|+1)."""
    z = np.asarray(labels, dtype=np.int64)
    aug = np.zeros(2 * len(z) + 1, dtype=np.int64)
    aug[1::2] = z
    return aug


def _repeats(z: np.ndarray) -> int:
    return int(np.count_nonzero(z[1:] == z[:-1])) if len(z) > 1 else 0


def min_frames(labels: Sequence[int]) -> int:
    """Shortest frame count that can emit the sequence (repeats need a
    separating blank)."""
    z = np.asarray(labels, dtype=np.int64)
    return len(z) + _repeats(z)


def ctc_loss_and_grad(y: np.ndarray, labels: Sequence[int]) -> CtcResult:
    """Loss and logit gradient for per-frame probability rows y (T, K).

    The gradient is taken with respect to the logits behind the softmax
    that produced y (rows therefore sum to zero).
    """
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 2 or y.shape[0] < 1:
        raise CtcError("y must be (T >= 1, K)")
    T, K = y.shape
    if K < 2:
        raise CtcError("need at least blank plus one label class")
    z = np.asarray(labels, dtype=np.int64)
    if len(z) < 1:
        raise CtcError("empty target")
    if z.min() < 1 or z.max() >= K:
        raise CtcError(f"label out of range 1..{K - 1}")
    if T < min_frames(z):
        raise InfeasibleLabelError(
            f"infeasible label length: need >= {min_frames(z)} frames, got {T}"
        )

    aug = augment_labels(z)
    can_skip = np.zeros(len(aug), dtype=bool)
    can_skip[3::2] = aug[3::2] != aug[1:-2:2]

    with np.errstate(divide="ignore"):
        log_y = np.log(y)
    log_y_state = log_y[:, aug]
    log_alpha, log_beta, log_p = _kernels.ctc_alpha_beta(log_y_state, can_skip)
    if not np.isfinite(log_p):
        raise ZeroProbabilityError("target has zero probability under y")

    # Posterior mass per (frame, class) through the softmax identity:
    # d loss / d logit = y - gamma.
    gamma_state = np.exp(log_alpha + log_beta - log_p)
    gamma = np.zeros((T, K))
    np.add.at(gamma, (np.arange(T)[:, None], aug[None, :]), gamma_state)
    return CtcResult(loss=float(-log_p), grad_logits=y - gamma)


def ctc_loss_and_grad_from_logits(logits: np.ndarray, labels: Sequence[int]) -> CtcResult:
    """Same as ctc_loss_and_grad but starting from unnormalized logits."""
    logits = np.asarray(logits, dtype=np.float64)
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return ctc_loss_and_grad(e / e.sum(axis=1, keepdims=True), labels)


def collapse_path(pi: Sequence[int]) -> list[int]:
    """Merge adjacent duplicates, then remove blanks."""
    out: list[int] = []
    prev = None
    for label in pi:
        if label != prev:
            out.append(int(label))
        prev = label
    return [l for l in out if l != BLANK]


def best_path_decode(y: np.ndarray) -> list[int]:
    """Collapse of the per-frame argmax path; ties break toward the lowest
    label index (argmax takes the first maximum)."""
    y = np.asarray(y)
    if y.ndim != 2 or y.shape[0] < 1:
        raise CtcError("y must be (T >= 1, K)")
    return collapse_path(np.argmax(y, axis=1))
