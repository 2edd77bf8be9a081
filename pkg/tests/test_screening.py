import numpy as np
import pytest

from octscreen.screening import (
    DEFAULT_SWEEP_DELTAS,
    majority_decision,
    pr_sweep,
    pr_sweep_tsv,
    screen_volume,
    select_center_frames,
    uncertainty_scores,
)


class StubScorer:
    """Returns canned probabilities; delta-aware variants below."""

    def __init__(self, probs):
        self.probs = np.asarray(probs, dtype=np.float64)

    def positive_probs(self, frames, delta):
        return self.probs


class ThresholdScorer:
    """Scores frames by a hidden per-volume SE against the shifted criterion."""

    def __init__(self, se_by_key):
        self.se_by_key = se_by_key

    def positive_probs(self, frames, delta):
        se = self.se_by_key[frames.tobytes()]
        p = 0.95 if se <= -6.0 + 0.25 * delta else 0.05
        return np.full(len(frames), p)


class TestSelectCenterFrames:
    def test_eight_frames_k7(self):
        frames = list(range(8))
        assert select_center_frames(frames, 7) == [0, 1, 2, 3, 4, 5, 6]

    def test_whole_volume_when_k_equals_n(self):
        frames = list(range(9))
        assert select_center_frames(frames, 9) == frames

    def test_400_frames_k99(self):
        frames = list(range(400))
        sel = select_center_frames(frames, 99)
        assert sel[0] == 150 and sel[-1] == 248 and len(sel) == 99

    def test_k_too_large(self):
        with pytest.raises(ValueError, match="cannot select"):
            select_center_frames([1, 2, 3], 5)

    def test_even_k_rejected(self):
        with pytest.raises(ValueError, match="odd"):
            select_center_frames(list(range(8)), 4)


class TestUncertaintyScores:
    def test_confident_mean_gives_zero_posterior_score(self):
        u_post, _, _ = uncertainty_scores([1.0, 1.0, 1.0], [1.0])
        assert u_post == 0.0

    def test_unanimous_frames_zero_disagreement(self):
        _, u_dis, _ = uncertainty_scores([0.9, 0.8, 0.95], [0.9])
        assert u_dis == 0.0

    def test_zero_disagreement_iff_unanimous(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            probs = rng.uniform(0, 1, size=7)
            votes = probs > 0.5
            _, u_dis, _ = uncertainty_scores(probs, [0.5])
            unanimous = votes.all() or not votes.any()
            assert (u_dis == 0.0) == unanimous

    def test_balanced_sweep_maximal_variance(self):
        _, _, u_sweep = uncertainty_scores([0.5], [0.0, 1.0, 0.0, 1.0])
        assert u_sweep == 1.0

    def test_three_of_seven_disagree(self):
        probs = [0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1]
        _, u_dis, _ = uncertainty_scores(probs, [0.5])
        assert u_dis == pytest.approx(2 * 3 / 7)

    def test_posterior_symmetry_about_half(self):
        probs = np.array([0.2, 0.4, 0.7])
        a = uncertainty_scores(probs, [0.5])[0]
        b = uncertainty_scores(1.0 - probs, [0.5])[0]
        assert a == pytest.approx(b, abs=1e-12)

    def test_near_half_probs_maximal_posterior_uncertainty(self):
        eta = 1e-9
        u_post, _, _ = uncertainty_scores([0.5 + eta] * 5, [0.5])
        assert u_post == pytest.approx(1.0, abs=1e-8)

    def test_scores_in_unit_interval(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            fp = rng.uniform(0, 1, size=rng.integers(1, 9))
            sp = rng.uniform(0, 1, size=rng.integers(1, 9))
            for u in uncertainty_scores(fp, sp):
                assert 0.0 <= u <= 1.0

    def test_empty_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            uncertainty_scores([], [0.5])


class TestScreenVolume:
    def test_unanimous_positive(self):
        frames = np.zeros((5, 4, 4))
        rep = screen_volume(frames, 0.0, StubScorer([0.9] * 5), volume_id="v")
        assert rep.decision == 1
        assert rep.u_disagreement == 0.0
        assert rep.volume_id == "v"
        assert len(rep.sweep) == len(DEFAULT_SWEEP_DELTAS)

    def test_majority_rules(self):
        frames = np.zeros((7, 4, 4))
        rep = screen_volume(frames, 0.0, StubScorer([0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1]))
        assert rep.decision == 1
        rep = screen_volume(frames, 0.0, StubScorer([0.9, 0.9, 0.9, 0.1, 0.1, 0.1, 0.1]))
        assert rep.decision == 0

    def test_tie_is_positive(self):
        assert majority_decision(np.array([0.9, 0.1])) == 1

    def test_deterministic(self):
        frames = np.random.default_rng(1).uniform(size=(5, 4, 4))
        scorer = StubScorer(np.random.default_rng(2).uniform(size=5))
        a = screen_volume(frames, 0.5, scorer).to_dict()
        b = screen_volume(frames, 0.5, scorer).to_dict()
        assert a == b

    def test_delta_validated(self):
        with pytest.raises(ValueError, match=r"delta must be in \[-1,1\]"):
            screen_volume(np.zeros((3, 4, 4)), 2.0, StubScorer([0.5] * 3))


class TestPrSweep:
    def _volumes(self, ses, seed=0):
        rng = np.random.default_rng(seed)
        vols = {}
        scorer_map = {}
        for i, se in enumerate(ses):
            frames = rng.uniform(size=(5, 4, 4))
            vols[f"v{i:03d}"] = (frames, se)
            scorer_map[frames.tobytes()] = se
        return vols, ThresholdScorer(scorer_map)

    def test_perfect_model_noise_free(self):
        ses = [-9.0, -7.5, -6.5, -5.5, -4.0, -3.0]
        vols, scorer = self._volumes(ses)
        rows = pr_sweep(vols, scorer, [-1.0, -0.5, 0.0, 0.5, 1.0])
        for row in rows:
            assert row["precision"] == 1.0
            assert row["recall"] == 1.0
            assert row["accuracy"] == 1.0

    def test_label_counts_monotone_in_delta(self):
        ses = list(np.linspace(-8, -4, 17))
        vols, scorer = self._volumes(ses)
        rows = pr_sweep(vols, scorer, [-1.0, 0.0, 1.0])
        labels = [r["true_positive_labels"] for r in rows]
        assert labels == sorted(labels)
        assert len(rows) == 3

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError, match="empty"):
            pr_sweep({}, StubScorer([0.5]), [0.0])

    def test_tsv_shape(self):
        vols, scorer = self._volumes([-7.0, -5.0])
        text = pr_sweep_tsv(pr_sweep(vols, scorer, [0.0, 1.0]))
        lines = text.strip().split("\n")
        assert len(lines) == 3
        assert lines[0].split("\t")[0] == "delta"
        assert all(len(l.split("\t")) == len(lines[0].split("\t")) for l in lines)
