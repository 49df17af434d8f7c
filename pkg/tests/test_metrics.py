"""Evaluation metrics.

Hand-computed anchors: pred = 2*gt with gt = [1, 10] gives abs_rel = 1,
sq_rel = 5.5, rmse_log = ln 2 and all delta accuracies 0 because the
threshold ratio 2 exceeds 1.25^3 = 1.953125.  Values are clamped to
[1e-3, 80] before comparison.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from egodepth.depth import to_relative
from egodepth.errors import DimensionMismatch, EmptySupport, InputEmpty
from egodepth.fields import DepthMap, RelativeDepthMap
from egodepth.flowio import write_pfm
from egodepth.metrics import (
    EvalReport,
    eigen_metrics,
    evaluate_directories,
    format_table,
    l1_relative,
    mean_report,
    ordinal_agreement,
)


def _dm(vals, valid=None):
    z = np.asarray(vals, dtype=np.float64)
    if z.ndim == 1:
        z = z[None, :]
    v = np.ones_like(z, bool) if valid is None else np.asarray(valid, bool).reshape(z.shape)
    return DepthMap(z=np.where(v, z, 0.0), valid=v)


def _rel(vals, valid=None):
    r = np.asarray(vals, dtype=np.float64)
    if r.ndim == 1:
        r = r[None, :]
    v = np.ones_like(r, bool) if valid is None else np.asarray(valid, bool).reshape(r.shape)
    return RelativeDepthMap(r=np.where(v, r, 0.0), valid=v)


# ── eigen_metrics ─────────────────────────────────────────────────────────


def test_identity_prediction():
    rng = np.random.default_rng(0)
    z = rng.uniform(1.0, 60.0, (8, 8))
    rep = eigen_metrics(_dm(z), _dm(z))
    assert rep.abs_rel == 0.0
    assert rep.sq_rel == 0.0
    assert rep.rmse == 0.0
    assert rep.rmse_log == 0.0
    assert rep.delta1 == rep.delta2 == rep.delta3 == 1.0
    assert rep.n_valid == 64


def test_double_prediction_hand_computed():
    rep = eigen_metrics(_dm([2.0, 20.0]), _dm([1.0, 10.0]))
    assert rep.abs_rel == pytest.approx(1.0)
    assert rep.sq_rel == pytest.approx(5.5)
    assert rep.rmse == pytest.approx(math.sqrt(50.5))
    assert rep.rmse_log == pytest.approx(math.log(2.0))
    assert rep.delta1 == 0.0
    assert rep.delta2 == 0.0
    assert rep.delta3 == 0.0  # ratio 2 > 1.25^3 = 1.953125


def test_twelve_vs_ten():
    rep = eigen_metrics(_dm([12.0]), _dm([10.0]))
    assert rep.abs_rel == pytest.approx(0.2)
    assert rep.delta1 == 1.0  # 1.2 < 1.25


def test_cap_applied_to_both_sides():
    rep = eigen_metrics(_dm([90.0]), _dm([100.0]), cap_m=80.0)
    assert rep.abs_rel == 0.0
    assert rep.rmse == 0.0


def test_floor_applied():
    rep = eigen_metrics(_dm([1e-9]), _dm([1e-3]))
    assert rep.abs_rel == 0.0


def test_metrics_use_shared_support_only():
    pred = _dm([1.0, 5.0, 3.0], valid=[True, True, False])
    gt = _dm([1.0, 7.0, 3.0], valid=[True, False, True])
    rep = eigen_metrics(pred, gt)
    assert rep.n_valid == 1
    assert rep.abs_rel == 0.0


def test_metrics_empty_support_raises():
    pred = _dm([1.0], valid=[True])
    gt = _dm([1.0], valid=[False])
    with pytest.raises(EmptySupport):
        eigen_metrics(pred, gt)


def test_metrics_shape_mismatch():
    with pytest.raises(DimensionMismatch):
        eigen_metrics(_dm([1.0]), _dm([1.0, 2.0]))


# ── ordinal agreement ─────────────────────────────────────────────────────


def _layered_gt(seed=0):
    rng = np.random.default_rng(seed)
    z = rng.choice([2.0, 5.0, 11.0, 23.0], size=(40, 60))
    return DepthMap(z=z, valid=np.ones_like(z, bool))


def test_ordinal_perfect_for_own_ranks():
    gt = _layered_gt()
    for margin in (0.01, 0.05, 0.3):
        assert ordinal_agreement(to_relative(gt), gt, margin=margin) == 1.0


def test_ordinal_zero_for_reversed_ranks():
    gt = _layered_gt(1)
    rel = to_relative(gt)
    reversed_rel = RelativeDepthMap(r=np.where(rel.valid, 1.0 + 1e-9 - rel.r, 0.0),
                                    valid=rel.valid.copy())
    assert ordinal_agreement(reversed_rel, gt) == 0.0


def test_ordinal_random_prediction_near_half():
    rng = np.random.default_rng(2)
    gt = _layered_gt(3)
    rel = to_relative(DepthMap(z=rng.uniform(1, 9, gt.shape), valid=gt.valid.copy()))
    agree = ordinal_agreement(rel, gt, n_pairs=10000, seed=0)
    assert abs(agree - 0.5) <= 0.02


def test_ordinal_margin_filters_near_ties():
    # constant ground truth: every pair is within the margin, vacuously 1.0
    gt = _dm(np.full((1, 50), 4.0))
    rng = np.random.default_rng(4)
    rel = _rel(rng.uniform(0.1, 1.0, (1, 50)))
    assert ordinal_agreement(rel, gt, margin=0.05) == 1.0


def test_ordinal_margin_zero_keeps_ties_scored():
    gt = _dm(np.full((1, 50), 4.0))
    rng = np.random.default_rng(5)
    rel = _rel(rng.uniform(0.1, 1.0, (1, 50)))
    # |ga - gb| = 0 is never > 0, still filtered even at margin 0
    assert ordinal_agreement(rel, gt, margin=0.0) == 1.0


def test_ordinal_deterministic_in_seed():
    gt = _layered_gt(6)
    rng = np.random.default_rng(7)
    rel = to_relative(DepthMap(z=rng.uniform(1, 9, gt.shape), valid=gt.valid.copy()))
    a = ordinal_agreement(rel, gt, seed=42)
    b = ordinal_agreement(rel, gt, seed=42)
    assert a == b


def test_ordinal_needs_two_shared_pixels():
    gt = _dm([1.0, 2.0], valid=[True, False])
    rel = _rel([0.5, 1.0], valid=[True, True])
    with pytest.raises(EmptySupport):
        ordinal_agreement(rel, gt)


# ── l1_relative ───────────────────────────────────────────────────────────


def test_l1_identical_is_zero():
    rel = _rel([0.2, 0.6, 1.0])
    assert l1_relative(rel, rel) == 0.0


def test_l1_constant_maps():
    a = _rel(np.full((1, 8), 1.0))
    b = _rel(np.full((1, 8), 0.5))
    assert l1_relative(a, b) == 0.5


def test_l1_hand_computed():
    a = _rel([0.25, 0.5, 0.75, 1.0])
    b = _rel([1.0, 0.75, 0.5, 0.25])
    # diffs are [0.75, 0.25, 0.25, 0.75], mean 0.5
    assert l1_relative(a, b) == pytest.approx(0.5)


def test_l1_no_overlap_raises():
    a = _rel([0.5, 0.5], valid=[True, False])
    b = _rel([0.5, 0.5], valid=[False, True])
    with pytest.raises(EmptySupport):
        l1_relative(a, b)


# ── aggregation and table ─────────────────────────────────────────────────


def test_mean_report_skips_nans_per_column():
    a = EvalReport(abs_rel=0.2, ordinal_agreement=1.0, n_valid=10)
    b = EvalReport(abs_rel=0.4, n_valid=5)  # ordinal stays NaN
    mean = mean_report([a, b])
    assert mean.abs_rel == pytest.approx(0.3)
    assert mean.ordinal_agreement == 1.0
    assert mean.n_valid == 15


def test_mean_report_empty_raises():
    with pytest.raises(EmptySupport):
        mean_report([])


def test_format_table_shape():
    rep = EvalReport(abs_rel=0.1, sq_rel=0.2, rmse=1.0, rmse_log=0.3,
                     delta1=0.9, delta2=0.95, delta3=0.99,
                     ordinal_agreement=0.97, l1_relative=0.05, n_valid=4)
    table = format_table([("mean", rep), ("frame_0000", rep)])
    lines = table.splitlines()
    assert len(lines) == 3
    assert lines[0].startswith("image")
    assert "0.9700" in lines[1]
    # all rows align to the same width
    assert len({len(line) for line in lines}) == 1


# ── directory evaluation ──────────────────────────────────────────────────


def test_evaluate_directories_identity(tmp_path):
    pred = tmp_path / "pred"
    gt = tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    rng = np.random.default_rng(8)
    for stem in ("a", "b"):
        z = rng.uniform(1.0, 40.0, (12, 16)).astype(np.float32)
        write_pfm(z, str(pred / f"{stem}.pfm"))
        write_pfm(z, str(gt / f"{stem}.pfm"))
    write_pfm(np.ones((4, 4), np.float32), str(pred / "orphan.pfm"))

    per_image, mean = evaluate_directories(str(pred), str(gt))
    assert [stem for stem, _ in per_image] == ["a", "b"]  # orphan skipped
    assert mean.abs_rel == 0.0
    assert mean.ordinal_agreement == 1.0
    assert mean.l1_relative == 0.0
    assert mean.delta1 == 1.0


def test_evaluate_directories_nan_pixels_excluded(tmp_path):
    pred = tmp_path / "pred"
    gt = tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    z = np.full((4, 4), 10.0, np.float32)
    zp = z.copy()
    zp[0, 0] = np.nan
    write_pfm(zp, str(pred / "a.pfm"))
    write_pfm(z, str(gt / "a.pfm"))
    per_image, _ = evaluate_directories(str(pred), str(gt))
    assert per_image[0][1].n_valid == 15


def test_evaluate_directories_no_match_raises(tmp_path):
    pred = tmp_path / "pred"
    gt = tmp_path / "gt"
    pred.mkdir()
    gt.mkdir()
    write_pfm(np.ones((2, 2), np.float32), str(pred / "x.pfm"))
    with pytest.raises(InputEmpty):
        evaluate_directories(str(pred), str(gt))
