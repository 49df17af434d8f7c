"""Depth evaluation: standard error metrics, ordinal agreement, and the
directory-level comparison behind `egodepth eval`."""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass

import numpy as np

from .depth import to_relative
from .errors import DimensionMismatch, EmptySupport, InputEmpty
from .fields import DepthMap, RelativeDepthMap
from .flowio import read_pfm

METRIC_COLUMNS = ("abs_rel", "sq_rel", "rmse", "rmse_log", "delta1", "delta2", "delta3")
METRIC_HEADERS = ("Abs Rel", "Sq Rel", "RMSE", "RMSE log", "d<1.25", "d<1.25^2", "d<1.25^3")


@dataclass
class EvalReport:
    abs_rel: float = math.nan
    sq_rel: float = math.nan
    rmse: float = math.nan
    rmse_log: float = math.nan
    delta1: float = math.nan
    delta2: float = math.nan
    delta3: float = math.nan
    ordinal_agreement: float = math.nan
    l1_relative: float = math.nan
    n_valid: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def eigen_metrics(
    pred: DepthMap, gt: DepthMap, cap_m: float = 80.0, min_m: float = 1e-3
) -> EvalReport:
    """Error metrics over the shared valid support, values clamped to
    [min_m, cap_m] before comparison."""
    if pred.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {pred.shape} vs {gt.shape}")
    support = pred.valid & gt.valid
    n = int(support.sum())
    if n == 0:
        raise EmptySupport("prediction and ground truth share no valid pixels")

    p = np.clip(pred.z[support], min_m, cap_m)
    g = np.clip(gt.z[support], min_m, cap_m)
    thresh = np.maximum(p / g, g / p)
    err = p - g
    return EvalReport(
        abs_rel=float(np.mean(np.abs(err) / g)),
        sq_rel=float(np.mean(err * err / g)),
        rmse=float(np.sqrt(np.mean(err * err))),
        rmse_log=float(np.sqrt(np.mean((np.log(p) - np.log(g)) ** 2))),
        delta1=float(np.mean(thresh < 1.25)),
        delta2=float(np.mean(thresh < 1.25**2)),
        delta3=float(np.mean(thresh < 1.25**3)),
        n_valid=n,
    )


def ordinal_agreement(
    pred_rel: RelativeDepthMap,
    gt: DepthMap,
    n_pairs: int = 50000,
    seed: int = 0,
    margin: float = 0.05,
) -> float:
    """Fraction of sampled pixel pairs ordered the same way as ground truth.

    Pairs are drawn with a seeded generator from the shared valid support;
    pairs whose ground-truth depths differ by no more than margin * g_b are
    discarded as indistinguishable.  With nothing left to compare the
    agreement is vacuously 1.
    """
    if pred_rel.shape != gt.shape:
        raise DimensionMismatch(f"shapes differ: {pred_rel.shape} vs {gt.shape}")
    support = np.flatnonzero(pred_rel.valid & gt.valid)
    if support.size < 2:
        raise EmptySupport("need at least two shared valid pixels")

    rng = np.random.default_rng(seed)
    pick = support[rng.integers(0, support.size, size=(int(n_pairs), 2))]
    ga = gt.z.ravel()[pick[:, 0]]
    gb = gt.z.ravel()[pick[:, 1]]
    keep = np.abs(ga - gb) > margin * gb
    if not keep.any():
        return 1.0
    ra = pred_rel.r.ravel()[pick[:, 0]]
    rb = pred_rel.r.ravel()[pick[:, 1]]
    agree = np.sign(ra - rb)[keep] == np.sign(ga - gb)[keep]
    return float(agree.mean())


def l1_relative(a: RelativeDepthMap, b: RelativeDepthMap) -> float:
    """Mean absolute difference of two relative maps on shared valid pixels."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    support = a.valid & b.valid
    if not support.any():
        raise EmptySupport("maps share no valid pixels")
    return float(np.mean(np.abs(a.r[support] - b.r[support])))


def mean_report(reports: list[EvalReport]) -> EvalReport:
    """Unweighted per-image mean, NaNs skipped per column."""
    if not reports:
        raise EmptySupport("no reports to average")
    out = EvalReport(n_valid=sum(r.n_valid for r in reports))
    for name in METRIC_COLUMNS + ("ordinal_agreement", "l1_relative"):
        vals = [getattr(r, name) for r in reports if not math.isnan(getattr(r, name))]
        if vals:
            setattr(out, name, float(np.mean(vals)))
    return out


def format_table(rows: list[tuple[str, EvalReport]]) -> str:
    """Aligned text table, one row per labeled report."""
    label_w = max([len(label) for label, _ in rows] + [len("image")])
    header = "image".ljust(label_w) + "".join(h.rjust(11) for h in METRIC_HEADERS)
    header += "ordinal".rjust(11) + "L1 rel".rjust(11)
    lines = [header]
    for label, rep in rows:
        cells = [getattr(rep, c) for c in METRIC_COLUMNS]
        cells += [rep.ordinal_agreement, rep.l1_relative]
        lines.append(label.ljust(label_w) + "".join(f"{c:11.4f}" for c in cells))
    return "\n".join(lines)


def _depth_from_pfm(path: str) -> DepthMap:
    values = read_pfm(path)
    return DepthMap(z=np.where(np.isfinite(values), values, 0.0),
                    valid=np.isfinite(values) & (values > 0))


def evaluate_directories(
    pred_dir: str,
    gt_dir: str,
    cap_m: float = 80.0,
    min_m: float = 1e-3,
    n_pairs: int = 50000,
    seed: int = 0,
    margin: float = 0.05,
) -> tuple[list[tuple[str, EvalReport]], EvalReport]:
    """Compare matching *.pfm stems between two directories.

    Each prediction is scored against ground truth with the depth metrics,
    plus rank-based ordinal agreement and L1 distance of the percentile
    maps, which ignore any scale difference between the two sides.
    """
    stems = sorted(
        os.path.splitext(name)[0]
        for name in os.listdir(pred_dir)
        if name.endswith(".pfm")
    )
    pairs = [
        (stem, os.path.join(pred_dir, stem + ".pfm"), os.path.join(gt_dir, stem + ".pfm"))
        for stem in stems
        if os.path.exists(os.path.join(gt_dir, stem + ".pfm"))
    ]
    if not pairs:
        raise InputEmpty(f"no matching .pfm stems between {pred_dir!r} and {gt_dir!r}")

    per_image: list[tuple[str, EvalReport]] = []
    for stem, pred_path, gt_path in pairs:
        pred = _depth_from_pfm(pred_path)
        gt = _depth_from_pfm(gt_path)
        report = eigen_metrics(pred, gt, cap_m=cap_m, min_m=min_m)
        pred_rel = to_relative(pred)
        gt_rel = to_relative(gt)
        report.ordinal_agreement = ordinal_agreement(
            pred_rel, gt, n_pairs=n_pairs, seed=seed, margin=margin
        )
        report.l1_relative = l1_relative(pred_rel, gt_rel)
        per_image.append((stem, report))
    return per_image, mean_report([rep for _, rep in per_image])
