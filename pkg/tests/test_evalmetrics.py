import json

import numpy as np
import pytest

from steelinspect.evalmetrics import (
    FIELD_REFERENCE_SCORES,
    ConfusionCounts,
    compare,
    confusion,
    json_report,
    scores,
)


class TestConfusion:
    def test_counts_partition_image(self):
        rng = np.random.default_rng(71)
        pred = rng.uniform(size=(20, 30)) < 0.3
        gt = rng.uniform(size=(20, 30)) < 0.2
        c = confusion(pred, gt)
        assert c.area == 600
        assert c.tp == (pred & gt).sum()
        assert c.fp == (pred & ~gt).sum()

    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            confusion(np.zeros((2, 2), bool), np.zeros((3, 3), bool))

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=-1, fp=0, fn=0, tn=0)


class TestScores:
    def test_perfect_prediction(self):
        assert scores(ConfusionCounts(tp=10, fp=0, fn=0, tn=90)) == (1.0, 1.0, 1.0)

    def test_half_precision_full_recall(self):
        pi, si, dsc = scores(ConfusionCounts(tp=10, fp=10, fn=0, tn=80))
        assert pi == pytest.approx(0.5)
        assert si == pytest.approx(1.0)
        assert dsc == pytest.approx(2 / 3)

    def test_empty_gt_empty_pred_is_vacuous_success(self):
        assert scores(ConfusionCounts(tp=0, fp=0, fn=0, tn=100)) == (1.0, 1.0, 1.0)

    def test_empty_gt_nonempty_pred_fails_precision(self):
        pi, si, dsc = scores(ConfusionCounts(tp=0, fp=5, fn=0, tn=95))
        assert pi == 0.0
        assert si == 1.0  # no ground-truth pixels to miss
        assert dsc == 0.0

    def test_nonempty_gt_empty_pred(self):
        pi, si, dsc = scores(ConfusionCounts(tp=0, fp=0, fn=5, tn=95))
        assert pi == 0.0
        assert si == 0.0
        assert dsc == 0.0

    def test_dice_is_harmonic_mean(self):
        rng = np.random.default_rng(72)
        for _ in range(50):
            tp, fp, fn = rng.integers(1, 500, 3)
            pi, si, dsc = scores(ConfusionCounts(int(tp), int(fp), int(fn), 10))
            assert dsc == pytest.approx(2 * pi * si / (pi + si), abs=1e-12)

    def test_swapping_fp_fn_swaps_pi_si(self):
        a = scores(ConfusionCounts(tp=30, fp=7, fn=13, tn=50))
        b = scores(ConfusionCounts(tp=30, fp=13, fn=7, tn=50))
        assert a[0] == pytest.approx(b[1])
        assert a[1] == pytest.approx(b[0])
        assert a[2] == pytest.approx(b[2])

    def test_constructed_masks_hit_target_scores(self):
        # 40 gt pixels, 30 found, 10 false alarms: PI = .75, SI = .75.
        pred = np.zeros((10, 10), bool)
        gt = np.zeros((10, 10), bool)
        gt.flat[:40] = True
        pred.flat[:30] = True
        pred.flat[40:50] = True
        pi, si, dsc = scores(confusion(pred, gt))
        assert pi == pytest.approx(0.75)
        assert si == pytest.approx(0.75)
        assert dsc == pytest.approx(0.75)


class TestReferenceScores:
    def test_reference_table_present(self):
        assert ("Proposed", "normal") in FIELD_REFERENCE_SCORES
        row = FIELD_REFERENCE_SCORES[("Proposed", "normal")]
        assert row["PI"] == pytest.approx(0.9360)
        assert row["SI"] == pytest.approx(0.6507)
        assert row["DSC"] == pytest.approx(0.7677)
        assert len(FIELD_REFERENCE_SCORES) == 6

    def test_reference_rows_internally_consistent(self):
        # DSC must equal the harmonic mean of PI and SI to table precision.
        for row in FIELD_REFERENCE_SCORES.values():
            hm = 2 * row["PI"] * row["SI"] / (row["PI"] + row["SI"])
            assert row["DSC"] == pytest.approx(hm, abs=5e-3)


class TestCompareAndReport:
    def test_table_layout(self):
        pred = np.zeros((4, 4), bool)
        gt = np.zeros((4, 4), bool)
        pred[0, 0] = gt[0, 0] = True
        reports, table = compare([("Proposed", "normal", pred, gt)])
        assert len(reports) == 1
        lines = table.splitlines()
        assert "Method" in lines[0] and "DSC" in lines[0]
        assert "Proposed" in lines[2]
        assert "1.0000" in lines[2]

    def test_json_round_trip(self):
        pred = np.zeros((4, 4), bool)
        gt = np.zeros((4, 4), bool)
        pred[1, 1] = gt[1, 1] = True
        gt[2, 2] = True
        reports, _ = compare([("m", "low", pred, gt)])
        data = json.loads(json_report(reports))
        assert data[0]["method"] == "m"
        assert data[0]["PI"] == pytest.approx(1.0)
        assert data[0]["SI"] == pytest.approx(0.5)
