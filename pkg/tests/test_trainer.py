from __future__ import annotations

import numpy as np
import pytest

from motsocr.ctc import ctc_loss_and_grad
from motsocr.dataset import Corpus, build_alphabet, render_samples, split_80_20
from motsocr.metrics import EvalReport
from motsocr.network import FrameSequence, init_params
from motsocr.trainer import (
    BestModelTracker,
    CheckpointError,
    EarlyStopping,
    Hyperparams,
    TrainingError,
    checkpoint_load,
    checkpoint_save,
    epoch_logs_to_csv,
    evaluate_model,
    fit,
    select_best,
    sgd_momentum_step,
)


def report(label=0.1, ctc=1.0, seq=0.2, name="d") -> EvalReport:
    return EvalReport(name, 10, ctc, label, seq, 1, 2, 3)


@pytest.fixture(scope="module")
def micro_problem(fonts):
    """A tiny but real training problem: 8 words, one font, small net."""
    corpus = Corpus(("le", "la", "il", "un", "on", "en", "au", "si"))
    alphabet = build_alphabet(corpus)
    samples = render_samples(corpus, fonts[:1], height=12)[fonts[0].name]
    split = split_80_20(samples, seed=5, dataset_name="micro")
    return split, alphabet


class TestSgdStep:
    def test_zero_grad_zero_velocity_is_identity(self):
        hp = Hyperparams()
        p = np.array([1.0, -2.0])
        p2, v2 = sgd_momentum_step(p, np.zeros(2), np.zeros(2), hp)
        assert (p2 == p).all() and not v2.any()

    def test_zero_momentum_is_plain_descent(self):
        hp = Hyperparams(learning_rate=0.5, momentum=0.0)
        p2, _ = sgd_momentum_step(np.array([1.0]), np.array([2.0]), np.zeros(1), hp)
        assert p2[0] == pytest.approx(1.0 - 0.5 * 2.0)

    def test_two_steps_match_scalar_recurrence(self):
        # constant gradient g: v1 = -ag, v2 = -ag(1+b); p2 = p0 - ag(2 + b)
        a, b, g = 0.1, 0.9, 3.0
        hp = Hyperparams(learning_rate=a, momentum=b)
        p, v = np.array([0.0]), np.zeros(1)
        p, v = sgd_momentum_step(p, np.array([g]), v, hp)
        p, v = sgd_momentum_step(p, np.array([g]), v, hp)
        assert p[0] == pytest.approx(-a * g * (2 + b), abs=1e-15)

    def test_clip_bounds_update(self):
        hp = Hyperparams(learning_rate=1.0, momentum=0.0, clip=1.0)
        p2, _ = sgd_momentum_step(np.zeros(1), np.array([100.0]), np.zeros(1), hp)
        assert p2[0] == pytest.approx(-1.0)

    def test_non_finite_update_aborts_with_diagnostics(self):
        hp = Hyperparams(learning_rate=1.0, momentum=0.0)
        with pytest.raises(TrainingError, match="non-finite update"):
            sgd_momentum_step(np.zeros(2), np.array([np.nan, 0.0]), np.zeros(2), hp)


class TestEarlyStopping:
    def test_injected_sequence_stops_at_thirty(self):
        # label errors: strictly improving for 10 epochs, flat afterwards
        stopper = EarlyStopping(patience=20)
        stop_epoch = None
        for epoch in range(1, 81):
            value = 1.0 - 0.05 * epoch if epoch <= 10 else 0.5
            if stopper.update(epoch, value):
                stop_epoch = epoch
                break
        assert stop_epoch == 30

    def test_constant_improvement_never_stops(self):
        stopper = EarlyStopping(patience=20)
        assert not any(stopper.update(e, 1.0 / e) for e in range(1, 81))

    def test_stop_is_last_improvement_plus_patience(self):
        stopper = EarlyStopping(patience=3)
        values = [5.0, 4.0, 4.0, 4.0, 4.0]
        stops = [stopper.update(e, v) for e, v in enumerate(values, start=1)]
        assert stops == [False, False, False, False, True]


class TestTracker:
    def test_tracks_minima_independently(self):
        params = init_params(2, 2, 3, seed=0)
        tr = BestModelTracker()
        tr.update(1, params, report(label=0.5, ctc=2.0))
        tr.update(2, params, report(label=0.1, ctc=3.0))
        tr.update(3, params, report(label=0.4, ctc=1.0))
        assert tr.best_by_label.epoch == 2
        assert tr.best_by_ctc.epoch == 3

    def test_tie_keeps_earlier_epoch(self):
        params = init_params(2, 2, 3, seed=0)
        tr = BestModelTracker()
        tr.update(1, params, report(label=0.5))
        tr.update(2, params, report(label=0.5))
        assert tr.best_by_label.epoch == 1

    def test_tracked_theta_is_a_snapshot(self):
        params = init_params(2, 2, 3, seed=0)
        tr = BestModelTracker()
        tr.update(1, params, report())
        params.flat[:] = 99.0
        assert not (tr.best_by_label.theta == 99.0).all()


class TestSelectBest:
    def test_single_run_is_its_own_best_and_mean(self):
        params = init_params(2, 2, 3, seed=0)
        tr = BestModelTracker()
        tr.update(1, params, report(label=0.2, ctc=1.5, seq=0.3))
        best, mean = select_best([tr])
        assert best["label"].value == 0.2
        assert mean["label"].label_error == 0.2
        assert mean["ctc"].ctc_error == 1.5

    def test_mean_of_known_values(self):
        params = init_params(2, 2, 3, seed=0)
        trackers = []
        for v in (0.1, 0.2, 0.6):
            tr = BestModelTracker()
            tr.update(1, params, report(label=v, ctc=v * 10, seq=v / 2))
            trackers.append(tr)
        best, mean = select_best(trackers)
        assert best["label"].value == pytest.approx(0.1)
        assert mean["label"].label_error == pytest.approx(0.3)
        assert mean["label"].seq_error == pytest.approx(0.15)


class TestFit:
    def test_single_epoch_produces_one_log(self, micro_problem):
        split, alphabet = micro_problem
        hp = Hyperparams(max_epochs=1, seed=3)
        tracker, logs = fit(split, alphabet, hp, n_hidden=6)
        assert len(logs) == 1 and logs[0].epoch == 1
        assert tracker.best_by_ctc.epoch == 1
        assert tracker.best_by_label.epoch == 1

    def test_deterministic_epoch_logs(self, micro_problem):
        split, alphabet = micro_problem
        hp = Hyperparams(max_epochs=3, seed=3)
        _, logs_a = fit(split, alphabet, hp, n_hidden=6)
        _, logs_b = fit(split, alphabet, hp, n_hidden=6)
        assert epoch_logs_to_csv(logs_a) == epoch_logs_to_csv(logs_b)

    def test_tracker_values_non_increasing(self, micro_problem):
        split, alphabet = micro_problem
        hp = Hyperparams(max_epochs=4, seed=3)
        tracker, logs = fit(split, alphabet, hp, n_hidden=6)
        best_so_far = np.inf
        for log in logs:
            best_so_far = min(best_so_far, log.test.label_error)
        assert tracker.best_by_label.value == best_so_far

    def test_initial_loss_near_uniform_prediction(self, micro_problem):
        # untrained network: mean CTC loss within 2x of the uniform-y loss
        split, alphabet = micro_problem
        k = alphabet.n_classes
        params = init_params(split.train[0].image.height, 6, k, seed=3)
        seqs = [FrameSequence.from_image(s.image) for s in split.train]
        codes = [alphabet.encode(s.transcript) for s in split.train]
        rep = evaluate_model(params, seqs, codes)
        uniform = [
            ctc_loss_and_grad(np.full((len(seq), k), 1.0 / k), code).loss
            for seq, code in zip(seqs, codes)
        ]
        expected = sum(uniform) / len(uniform)
        assert expected / 2 <= rep.ctc_error <= expected * 2

    def test_resume_reproduces_uninterrupted_run(self, micro_problem, tmp_path):
        split, alphabet = micro_problem
        ckpt = tmp_path / "run.ckpt"
        hp_full = Hyperparams(max_epochs=4, seed=9)
        _, logs_full = fit(split, alphabet, hp_full, n_hidden=6)

        hp_half = Hyperparams(max_epochs=2, seed=9)
        fit(split, alphabet, hp_half, n_hidden=6, checkpoint_path=str(ckpt))
        tracker, logs_resumed = fit(
            split, alphabet, hp_full, n_hidden=6, resume_from=str(ckpt)
        )
        assert epoch_logs_to_csv(logs_resumed) == epoch_logs_to_csv(logs_full)

    def test_fixed_policy_runs_to_max_epochs(self, micro_problem):
        split, alphabet = micro_problem
        hp = Hyperparams(max_epochs=3, stop_policy="fixed", seed=1)
        _, logs = fit(split, alphabet, hp, n_hidden=6)
        assert [l.epoch for l in logs] == [1, 2, 3]


class TestCheckpoint:
    def test_round_trip_bit_identical(self, tmp_path):
        params = init_params(4, 3, 5, seed=42)
        alphabet = build_alphabet(Corpus(("ab", "cd")))
        path = tmp_path / "m.ckpt"
        checkpoint_save(path, params, alphabet, seed=42)
        loaded = checkpoint_load(path)
        assert (loaded.params.flat == params.flat).all()
        assert loaded.alphabet.chars == alphabet.chars
        assert loaded.seed == 42
        assert loaded.state is None

    def test_truncated_file_rejected(self, tmp_path):
        params = init_params(4, 3, 5, seed=42)
        alphabet = build_alphabet(Corpus(("ab",)))
        path = tmp_path / "m.ckpt"
        checkpoint_save(path, params, alphabet, seed=1)
        data = path.read_bytes()
        path.write_bytes(data[: len(data) // 2])
        with pytest.raises(CheckpointError):
            checkpoint_load(path)

    def test_version_mismatch_rejected(self, tmp_path):
        import json

        path = tmp_path / "m.ckpt"
        path.write_text(json.dumps({"version": "other/9"}), encoding="utf-8")
        with pytest.raises(CheckpointError, match="version"):
            checkpoint_load(path)

    def test_wrong_array_length_rejected(self, tmp_path):
        import json

        params = init_params(4, 3, 5, seed=42)
        alphabet = build_alphabet(Corpus(("ab",)))
        path = tmp_path / "m.ckpt"
        checkpoint_save(path, params, alphabet, seed=1)
        doc = json.loads(path.read_text(encoding="utf-8"))
        doc["dims"]["n"] = 4
        path.write_text(json.dumps(doc), encoding="utf-8")
        with pytest.raises(CheckpointError):
            checkpoint_load(path)


class TestHyperparams:
    def test_defaults_match_protocol(self):
        hp = Hyperparams()
        assert hp.learning_rate == pytest.approx(1e-4)
        assert hp.momentum == pytest.approx(0.9)
        assert hp.max_epochs == 80
        assert hp.patience == 20
        assert hp.clip is None

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"learning_rate": 0.0},
            {"momentum": 1.0},
            {"max_epochs": 0},
            {"stop_policy": "sometimes"},
        ],
    )
    def test_validation(self, kwargs):
        with pytest.raises(ValueError):
            Hyperparams(**kwargs)


def test_epoch_logs_csv_schema(micro_problem):
    split, alphabet = micro_problem
    hp = Hyperparams(max_epochs=2, seed=3)
    _, logs = fit(split, alphabet, hp, n_hidden=6)
    csv = epoch_logs_to_csv(logs)
    lines = csv.strip().split("\n")
    assert lines[0].startswith("epoch,train_ctc_error")
    assert "wall" not in lines[0]  # wall time would break bit-reproducibility
    assert len(lines) == 3
