import numpy as np
import pytest

from dcnflow import (
    BOOLEAN,
    NATURAL,
    ConfusionTallies,
    DetectionConfig,
    FlowMatrix,
    ModelParams,
    ParameterError,
    ValidationError,
    WindowGrid,
    build_report,
    confusion,
    exceedance_counts,
    flagged_indices,
    ground_truth,
    rates_and_values,
    threshold_sweep,
    truth_indices,
    window_flows,
)

from helpers import example_dcn

SPLIT = WindowGrid((0.0, 2.5, 5.0))


def split_flows():
    return window_flows(example_dcn(), SPLIT, ModelParams(1.0, 0.0))


class TestDetectionConfig:
    def test_accepts_interior_values(self):
        DetectionConfig(threshold=0.9, rarity=1e-3)

    @pytest.mark.parametrize("lam", [0.0, 1.0, -0.1, 1.5])
    def test_threshold_must_be_interior(self, lam):
        with pytest.raises(ParameterError):
            DetectionConfig(threshold=lam, rarity=0.5)

    @pytest.mark.parametrize("mu", [0.0, 1.0, -0.1, 2.0])
    def test_rarity_must_be_interior(self, mu):
        with pytest.raises(ParameterError):
            DetectionConfig(threshold=0.5, rarity=mu)


class TestGroundTruth:
    def test_canonical_order_and_dedupe(self):
        truth = ground_truth([(2, 5, 3.0), (1, 4, 1.0), (2, 5, 3.0)])
        assert [tuple(c) for c in truth.contacts] == [(1, 4, 1.0), (2, 5, 3.0)]

    def test_containment_check(self):
        dcn = example_dcn()
        ground_truth([(1, 4, 1.0)], dcn)
        with pytest.raises(ValidationError):
            ground_truth([(1, 4, 1.5)], dcn)


class TestExceedanceCounts:
    def test_identity_flows_count_diagonal(self):
        flows = [FlowMatrix(1, np.eye(3)), FlowMatrix(2, np.eye(3))]
        counts = exceedance_counts(flows, 0.9)
        assert np.array_equal(counts, 2 * np.eye(3, dtype=np.int64))

    def test_split_example_counts(self):
        counts = exceedance_counts(split_flows(), 0.9)
        assert counts[0, 3] == 1  # 1 -> 4 only in the first window
        assert counts[2, 2] == 2  # idle vertex 3 stays put in both
        assert counts.sum() == 7

    def test_strict_comparison_at_one(self):
        counts = exceedance_counts(split_flows(), 1.0)
        assert counts.sum() == 0

    def test_empty_rejected(self):
        with pytest.raises(ValidationError):
            exceedance_counts([], 0.5)


class TestFlaggedIndices:
    def test_split_example_flags(self):
        flows = split_flows()
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        assert flagged_indices(flows, 1, config) == frozenset({1, 4})
        assert flagged_indices(flows, 2, config) == frozenset()

    def test_tight_rarity_suppresses(self):
        # the 1 -> 4 pair exceeds in half the windows; mu below that hides it
        flows = split_flows()
        config = DetectionConfig(threshold=0.9, rarity=0.4)
        assert flagged_indices(flows, 1, config) == frozenset()

    def test_precomputed_counts_agree(self):
        flows = split_flows()
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        counts = exceedance_counts(flows, config.threshold)
        assert flagged_indices(flows, 1, config, counts) == flagged_indices(flows, 1, config)

    def test_window_index_validated(self):
        flows = split_flows()
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        with pytest.raises(ValidationError):
            flagged_indices(flows, 0, config)
        with pytest.raises(ValidationError):
            flagged_indices(flows, 3, config)

    def test_rarity_growth_only_adds_flags(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            probs = rng.dirichlet(np.ones(4), size=(3, 4))
            flows = [FlowMatrix(m + 1, probs[m]) for m in range(3)]
            for m in (1, 2, 3):
                previous = frozenset()
                for mu in (0.2, 0.5, 0.8):
                    config = DetectionConfig(threshold=0.3, rarity=mu)
                    current = flagged_indices(flows, m, config)
                    assert previous <= current
                    previous = current


class TestTruthIndices:
    def test_windows_pick_up_their_contacts(self):
        truth = ground_truth([(1, 4, 1.0), (2, 5, 3.0)])
        assert truth_indices(truth, SPLIT, 1) == frozenset({1, 4})
        assert truth_indices(truth, SPLIT, 2) == frozenset({2, 5})

    def test_outside_grid_ignored(self):
        truth = ground_truth([(4, 3, 7.0)])
        assert truth_indices(truth, SPLIT, 1) == frozenset()
        assert truth_indices(truth, SPLIT, 2) == frozenset()


class TestConfusion:
    def hand_case(self):
        flagged = [frozenset({1, 4}), frozenset({2}), frozenset()] + [frozenset()] * 7
        truth = [frozenset({1, 4}), frozenset(), frozenset({3})] + [frozenset()] * 7
        return confusion(flagged, truth, n=5)

    def test_boolean_totals(self):
        bool_t, _ = self.hand_case()
        assert bool_t.totals() == {"tp": 1, "fp": 1, "fn": 1, "tn": 7}

    def test_natural_totals(self):
        _, nat_t = self.hand_case()
        assert nat_t.totals() == {"tp": 2, "fp": 1, "fn": 1, "tn": 46}

    def test_per_window_sums(self):
        bool_t, nat_t = self.hand_case()
        assert np.array_equal(bool_t.tp + bool_t.fp + bool_t.fn + bool_t.tn, np.ones(10, dtype=np.int64))
        assert np.array_equal(nat_t.tp + nat_t.fp + nat_t.fn + nat_t.tn, np.full(10, 5, dtype=np.int64))

    def test_partial_overlap_is_a_boolean_hit(self):
        bool_t, nat_t = confusion([frozenset({1, 2})], [frozenset({2, 3})], n=4)
        assert bool_t.totals() == {"tp": 1, "fp": 0, "fn": 0, "tn": 0}
        assert nat_t.totals() == {"tp": 1, "fp": 1, "fn": 1, "tn": 1}

    def test_length_mismatch(self):
        with pytest.raises(ValidationError):
            confusion([frozenset()], [frozenset(), frozenset()], n=3)


class TestRates:
    def tallies(self, tp, fp, fn, tn):
        return ConfusionTallies(
            form=NATURAL, n=100,
            tp=np.array([tp]), fp=np.array([fp]), fn=np.array([fn]), tn=np.array([tn]),
        )

    def test_hand_values(self):
        rates = rates_and_values(self.tallies(10, 2, 5, 83))
        assert rates["TPR"] == pytest.approx(10 / 15)
        assert rates["FPR"] == pytest.approx(2 / 85)
        assert rates["PPV"] == pytest.approx(10 / 12)
        assert rates["NPV"] == pytest.approx(83 / 88)

    def test_degenerate_denominators(self):
        rates = rates_and_values(self.tallies(0, 0, 0, 50))
        assert rates["TPR"] is None
        assert rates["FPR"] == 0.0
        assert rates["PPV"] is None
        assert rates["NPV"] == 1.0

    def test_perfect_detector(self):
        rates = rates_and_values(self.tallies(5, 0, 0, 95))
        assert rates == {"TPR": 1.0, "FPR": 0.0, "PPV": 1.0, "NPV": 1.0}


class TestThresholdSweep:
    def test_single_cell_produces_both_forms(self):
        truth = ground_truth([(1, 4, 1.0)])
        rows = threshold_sweep(split_flows(), truth, SPLIT, [0.9], [0.9])
        assert len(rows) == 2
        assert [r["form"] for r in rows] == [BOOLEAN, NATURAL]
        for row in rows:
            assert set(row) == {"lambda", "mu", "form", "TPR", "FPR", "PPV", "NPV"}
            assert row == {**row, "lambda": 0.9, "mu": 0.9, "TPR": 1.0, "FPR": 0.0,
                           "PPV": 1.0, "NPV": 1.0}

    def test_hand_checked_grid(self):
        truth = ground_truth([(1, 4, 1.0)])
        rows = threshold_sweep(split_flows(), truth, SPLIT, [0.5, 0.9], [0.25, 0.9])
        assert len(rows) == 8
        by_key = {(r["lambda"], r["mu"], r["form"]): r for r in rows}

        # tight rarity suppresses everything: pure misses
        missed = by_key[(0.9, 0.25, BOOLEAN)]
        assert (missed["TPR"], missed["FPR"], missed["PPV"]) == (0.0, 0.0, None)

        # loose rarity at the low threshold drags in spurious vertices
        noisy = by_key[(0.5, 0.9, BOOLEAN)]
        assert noisy["TPR"] == 1.0
        assert noisy["FPR"] == 1.0
        assert noisy["NPV"] is None
        nat = by_key[(0.5, 0.9, NATURAL)]
        assert nat["FPR"] == pytest.approx(5 / 8)
        assert nat["PPV"] == pytest.approx(2 / 7)


class TestReport:
    def test_scored_report(self):
        truth = ground_truth([(1, 4, 1.0)])
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        report = build_report(split_flows(), SPLIT, config, truth)
        assert report.flagged == [frozenset({1, 4}), frozenset()]
        blob = report.to_json()
        assert blob["config"] == {"lambda": 0.9, "mu": 0.9}
        assert blob["n"] == 5
        assert blob["num_windows"] == 2
        assert blob["windows"][0]["flagged"] == [1, 4]
        assert blob["windows"][0]["truth"] == [1, 4]
        assert blob["totals"][BOOLEAN] == {"tp": 1, "fp": 0, "fn": 0, "tn": 1}
        assert blob["metrics"][BOOLEAN]["TPR"] == 1.0

    def test_unscored_report(self):
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        report = build_report(split_flows(), SPLIT, config)
        blob = report.to_json()
        assert "totals" not in blob and "metrics" not in blob
        assert "truth" not in blob["windows"][0]

    def test_grid_length_checked(self):
        config = DetectionConfig(threshold=0.9, rarity=0.9)
        with pytest.raises(ValidationError):
            build_report(split_flows(), WindowGrid((0.0, 5.0)), config)
