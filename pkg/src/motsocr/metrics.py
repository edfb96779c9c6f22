"""Edit distance with operation counts, label error rate, sequence error,
and evaluation-report assembly."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence


class MetricsError(ValueError):
    pass


@dataclass(frozen=True)
class EditOps:
    distance: int
    insertions: int
    deletions: int
    substitutions: int


@dataclass(frozen=True)
class EvalReport:
    dataset_name: str
    n_sequences: int
    ctc_error: float     # mean -ln p per sequence, nats
    label_error: float   # mean ED / |target|, a fraction
    seq_error: float     # fraction of non-identical predictions
    insertions: int
    deletions: int
    substitutions: int

    CSV_HEADER = (
        "dataset_name,n_sequences,ctc_error,label_error,seq_error,"
        "insertions,deletions,substitutions"
    )

    def csv_row(self) -> str:
        return (
            f"{self.dataset_name},{self.n_sequences},{self.ctc_error!r},"
            f"{self.label_error!r},{self.seq_error!r},"
            f"{self.insertions},{self.deletions},{self.substitutions}"
        )


def edit_distance(p: Sequence, q: Sequence) -> EditOps:
    """Levenshtein distance from p to q with unit costs, plus the operation
    tally of one minimal edit script.

    The backtrace resolves cost ties in the fixed order substitution,
    deletion, insertion so the tallies are deterministic. Deletions remove
    elements of p; insertions add elements of q.
    """
    lp, lq = len(p), len(q)
    # dist[i][j] = distance between p[:i] and q[:j]
    dist = [[0] * (lq + 1) for _ in range(lp + 1)]
    for i in range(lp + 1):
        dist[i][0] = i
    for j in range(lq + 1):
        dist[0][j] = j
    for i in range(1, lp + 1):
        row = dist[i]
        prev = dist[i - 1]
        pc = p[i - 1]
        for j in range(1, lq + 1):
            cost = 0 if pc == q[j - 1] else 1
            row[j] = min(prev[j - 1] + cost, prev[j] + 1, row[j - 1] + 1)

    ins = dels = subs = 0
    i, j = lp, lq
    while i > 0 or j > 0:
        here = dist[i][j]
        if i > 0 and j > 0 and dist[i - 1][j - 1] + (0 if p[i - 1] == q[j - 1] else 1) == here:
            if p[i - 1] != q[j - 1]:
                subs += 1
            i -= 1
            j -= 1
        elif i > 0 and dist[i - 1][j] + 1 == here:
            dels += 1
            i -= 1
        else:
            ins += 1
            j -= 1
    return EditOps(distance=dist[lp][lq], insertions=ins, deletions=dels, substitutions=subs)


def evaluate(
    test: Sequence[tuple[Sequence, Sequence]],
    ctc_losses: Sequence[float],
    dataset_name: str = "",
) -> EvalReport:
    """Aggregate (prediction, target) pairs and per-sequence CTC losses.

    label_error is the mean of ED(prediction, target) / |target| over the
    set; seq_error the fraction of pairs that are not identical. Sums run
    in sample order so float results are reproducible.
    """
    if len(test) < 1:
        raise MetricsError("empty test set")
    if len(ctc_losses) != len(test):
        raise MetricsError("one CTC loss per sample required")
    ler_sum = 0.0
    loss_sum = 0.0
    wrong = 0
    ins = dels = subs = 0
    for (pred, target), loss in zip(test, ctc_losses):
        if len(target) == 0:
            raise MetricsError("zero-length target")
        ops = edit_distance(pred, target)
        ler_sum += ops.distance / len(target)
        loss_sum += float(loss)
        if ops.distance != 0:
            wrong += 1
        ins += ops.insertions
        dels += ops.deletions
        subs += ops.substitutions
    n = len(test)
    return EvalReport(
        dataset_name=dataset_name,
        n_sequences=n,
        ctc_error=loss_sum / n,
        label_error=ler_sum / n,
        seq_error=wrong / n,
        insertions=ins,
        deletions=dels,
        substitutions=subs,
    )


def format_percent(fraction: float) -> str:
    """Render a fraction the way the result tables do: 0.00650%."""
    return f"{fraction * 100.0:.5f}%"
