from __future__ import annotations

import itertools
from functools import lru_cache

import pytest

from motsocr.metrics import EditOps, MetricsError, edit_distance, evaluate, format_percent


def distance_oracle(p: str, q: str) -> int:
    """Recursive memoized Levenshtein, independent of the DP implementation."""

    @lru_cache(maxsize=None)
    def rec(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        sub = rec(i - 1, j - 1) + (0 if p[i - 1] == q[j - 1] else 1)
        return min(sub, rec(i - 1, j) + 1, rec(i, j - 1) + 1)

    return rec(len(p), len(q))


class TestEditDistance:
    def test_equal_sequences(self):
        assert edit_distance("chat", "chat") == EditOps(0, 0, 0, 0)

    def test_empty_to_abc_is_three_insertions(self):
        assert edit_distance("", "abc") == EditOps(3, 3, 0, 0)

    def test_abc_to_empty_is_three_deletions(self):
        assert edit_distance("abc", "") == EditOps(3, 0, 3, 0)

    def test_kitten_sitting(self):
        ops = edit_distance("kitten", "sitting")
        assert ops.distance == distance_oracle("kitten", "sitting") == 3

    def test_counts_always_sum_to_distance(self, rng):
        letters = "abc"
        for _ in range(300):
            p = "".join(rng.choice(list(letters), size=rng.integers(0, 8)))
            q = "".join(rng.choice(list(letters), size=rng.integers(0, 8)))
            ops = edit_distance(p, q)
            assert ops.distance == ops.insertions + ops.deletions + ops.substitutions
            assert ops.distance == distance_oracle(p, q)
            assert ops.distance <= max(len(p), len(q))
            assert (ops.distance == 0) == (p == q)

    def test_metric_axioms_on_random_triples(self, rng):
        letters = list("abc")
        for _ in range(300):
            p, q, r = (
                "".join(rng.choice(letters, size=rng.integers(0, 7))) for _ in range(3)
            )
            dpq = edit_distance(p, q).distance
            assert dpq == edit_distance(q, p).distance
            assert dpq <= edit_distance(p, r).distance + edit_distance(r, q).distance
            assert (dpq == 0) == (p == q)

    def test_works_on_label_lists(self):
        assert edit_distance([1, 2, 3], [1, 3]).distance == 1

    def test_deterministic_tie_tallies(self):
        # "ab" -> "ba" costs 2; the sub-first backtrace yields 2 substitutions
        assert edit_distance("ab", "ba") == EditOps(2, 0, 0, 2)


class TestEvaluate:
    def test_all_exact(self):
        rep = evaluate([("ab", "ab"), ("c", "c")], [0.5, 0.3])
        assert rep.label_error == 0.0 and rep.seq_error == 0.0
        assert rep.ctc_error == pytest.approx(0.4)

    def test_single_substitution_case(self):
        rep = evaluate([("ac", "ab")], [1.0])
        assert rep.label_error == 0.5
        assert rep.seq_error == 1.0
        assert rep.substitutions == 1 and rep.insertions == 0 and rep.deletions == 0

    def test_mixed_pair(self):
        rep = evaluate([("ab", "ab"), ("ac", "ab")], [1.0, 1.0])
        assert rep.label_error == 0.25
        assert rep.seq_error == 0.5

    def test_zero_length_target_rejected(self):
        with pytest.raises(MetricsError, match="zero-length target"):
            evaluate([("a", "")], [0.0])

    def test_empty_set_rejected(self):
        with pytest.raises(MetricsError):
            evaluate([], [])

    def test_error_coupling(self, rng):
        # seq_error == 0 iff label_error == 0
        pairs = [("ab", "ab"), ("cd", "cd")]
        rep = evaluate(pairs, [0.0, 0.0])
        assert rep.seq_error == 0.0 and rep.label_error == 0.0

    def test_tally_order_independence(self, rng):
        letters = list("ab")
        pairs = [
            (
                "".join(rng.choice(letters, size=rng.integers(0, 5))),
                "".join(rng.choice(letters, size=rng.integers(1, 5))),
            )
            for _ in range(20)
        ]
        losses = rng.random(20).tolist()
        fwd = evaluate(pairs, losses)
        rev = evaluate(pairs[::-1], losses[::-1])
        assert (fwd.insertions, fwd.deletions, fwd.substitutions) == (
            rev.insertions,
            rev.deletions,
            rev.substitutions,
        )


class TestFormatting:
    def test_five_decimal_percent(self):
        assert format_percent(0.0000650) == "0.00650%"
        assert format_percent(0.0004444) == "0.04444%"
        assert format_percent(0.0) == "0.00000%"


def test_exhaustive_small_alphabet_sample():
    # spot sample of the full exhaustive acceptance sweep
    universe = [""]
    for n in (1, 2, 3):
        universe += ["".join(t) for t in itertools.product("abc", repeat=n)]
    for p in universe:
        for q in universe:
            assert edit_distance(p, q).distance == distance_oracle(p, q)
