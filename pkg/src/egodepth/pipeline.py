"""Batch label generation over a directory of frames.

Stages: enumerate consecutive frame pairs, measure per-pair median flow
magnitude, gate pairs on motion, then for each surviving pair estimate
egomotion, recover depth, and write the percentile maps.  Per-pair work is
pure, so results are byte-identical for any worker count, and a failing
pair is recorded without taking down the batch.
"""

from __future__ import annotations

import json
import logging
import os
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import cv2
import numpy as np

from .baseline_flow import FlowParams, estimate_flow
from .depth import recover_depth, to_relative
from .egomotion import EgomotionConfig, estimate_rotation
from .errors import (
    ConfigInvalid,
    EgodepthError,
    InputEmpty,
    InsufficientTranslation,
    IoFailure,
    NoValidPixels,
)
from .fields import MotionField
from .flowio import (
    STATUS_ACCEPTED,
    STATUS_ERROR,
    PairEntry,
    PairSelectConfig,
    read_flow_file,
    select_pairs,
    write_depth_outputs,
    write_pair_manifest,
)
from .geometry import Intrinsics

log = logging.getLogger(__name__)

IMAGE_EXTS = {".png", ".jpg", ".jpeg", ".bmp", ".ppm", ".pgm", ".tif", ".tiff"}
FLOW_SOURCES = ("external", "baseline")

STATUS_INSUFFICIENT = "insufficient_translation"
STATUS_NO_CONVERGENCE = "no_convergence"
SUMMARY_STATUSES = (
    "accepted",
    "too_slow",
    "too_fast",
    "duplicate",
    "insufficient_translation",
    "no_convergence",
    "error",
)

PRESETS: dict[str, dict] = {
    "citydriving": {"resize_width": 416, "resize_height": 224},
    "kitti": {"resize_width": 1212, "resize_height": 352},
    "cityscapes": {
        "resize_width": 992,
        "resize_height": 384,
        "bottom_crop_fraction": 0.2,
    },
}


@dataclass
class PipelineConfig:
    """Flat run configuration; the on-disk form is a JSON object with the
    same field names."""

    input_dir: str = ""
    output_dir: str = ""
    flow_source: str = "external"
    focal: float | None = None  # intrinsics override at input resolution
    cx: float | None = None
    cy: float | None = None
    resize_width: int | None = None
    resize_height: int | None = None
    bottom_crop_fraction: float = 0.0
    motion_lo_px: float = 1.0
    motion_hi_px: float = 30.0
    dedup_gap: int = 3
    foe_epsilon_px: float = 0.3
    mag_floor_px: float = 0.15
    min_support: float = 0.01
    inlier_angle_deg: float = 25.0
    omega_max: float = 0.05
    max_evals: int = 2000
    pyramid_levels: int = 5
    scale_per_level: float = 0.5
    iterations_per_level: int = 50
    smoothness_weight: float = 15.0
    workers: int = 1
    seed: int = 0

    @staticmethod
    def from_dict(doc: dict, preset: str | None = None) -> "PipelineConfig":
        merged: dict = {}
        preset = preset or doc.get("preset")
        if preset is not None:
            if preset not in PRESETS:
                raise ConfigInvalid(f"unknown preset {preset!r}")
            merged.update(PRESETS[preset])
        known = {f.name for f in fields(PipelineConfig)}
        for key, value in doc.items():
            if key == "preset":
                continue
            if key not in known:
                raise ConfigInvalid(f"unknown config key {key!r}")
            if value is not None:
                merged[key] = value
        cfg = PipelineConfig(**merged)
        cfg.validate()
        return cfg

    def validate(self) -> None:
        if not self.input_dir:
            raise ConfigInvalid("input_dir is required")
        if not os.path.isdir(self.input_dir):
            raise ConfigInvalid(f"input_dir {self.input_dir!r} is not a directory")
        if not self.output_dir:
            raise ConfigInvalid("output_dir is required")
        if self.flow_source not in FLOW_SOURCES:
            raise ConfigInvalid(f"flow_source must be one of {FLOW_SOURCES}")
        if not 0.0 <= self.bottom_crop_fraction < 1.0:
            raise ConfigInvalid("bottom_crop_fraction must be in [0, 1)")
        if (self.resize_width is None) != (self.resize_height is None):
            raise ConfigInvalid("resize_width and resize_height go together")
        if self.resize_width is not None and (self.resize_width < 8 or self.resize_height < 8):
            raise ConfigInvalid("resize target too small")
        if self.motion_lo_px < 0 or self.motion_hi_px < self.motion_lo_px:
            raise ConfigInvalid("need 0 <= motion_lo_px <= motion_hi_px")
        if self.dedup_gap < 3:
            raise ConfigInvalid("dedup_gap must be >= 3")
        if self.foe_epsilon_px <= 0:
            raise ConfigInvalid("foe_epsilon_px must be positive")
        if self.workers < 1:
            raise ConfigInvalid("workers must be >= 1")
        if self.focal is not None and self.focal <= 0:
            raise ConfigInvalid("focal must be positive")

    def egomotion_config(self) -> EgomotionConfig:
        return EgomotionConfig(
            mag_floor_px=self.mag_floor_px,
            min_support=self.min_support,
            inlier_angle_deg=self.inlier_angle_deg,
            omega_max=self.omega_max,
            max_evals=self.max_evals,
        )

    def flow_params(self) -> FlowParams:
        return FlowParams(
            pyramid_levels=self.pyramid_levels,
            scale_per_level=self.scale_per_level,
            iterations_per_level=self.iterations_per_level,
            smoothness_weight=self.smoothness_weight,
        )


@dataclass
class RunResult:
    counts: dict[str, int]
    entries: list[PairEntry]
    records: list[dict]
    n_frames: int
    output_dir: str
    pairs_manifest: str
    dataset_manifest: str
    summary_path: str


def cropped_rows(height: int, bottom_crop_fraction: float) -> int:
    """Rows kept when the bottom fraction is discarded (floored)."""
    return int(height * (1.0 - bottom_crop_fraction))


def list_frames(input_dir: str) -> list[str]:
    names = sorted(
        n for n in os.listdir(input_dir)
        if os.path.splitext(n)[1].lower() in IMAGE_EXTS
    )
    return [os.path.join(input_dir, n) for n in names]


def _load_gray(path: str) -> np.ndarray:
    img = cv2.imread(path, cv2.IMREAD_GRAYSCALE)
    if img is None:
        raise IoFailure(f"cannot decode image {path!r}")
    return img.astype(np.float64) / 255.0


class _PairWorker:
    """Per-pair processing bound to one resolved configuration."""

    def __init__(self, cfg: PipelineConfig, frames: list[str]):
        self.cfg = cfg
        self.frames = frames
        probe = _load_gray(frames[0])
        self.src_h, self.src_w = probe.shape
        self.keep_rows = cropped_rows(self.src_h, cfg.bottom_crop_fraction)
        if self.keep_rows < 8:
            raise ConfigInvalid("bottom crop leaves fewer than 8 rows")
        if cfg.resize_width is not None:
            self.out_w, self.out_h = cfg.resize_width, cfg.resize_height
        else:
            self.out_w, self.out_h = self.src_w, self.keep_rows
        if cfg.focal is not None:
            intr = Intrinsics(self.src_w, self.src_h, cfg.focal, cfg.cx, cfg.cy)
            intr = intr.cropped_bottom(self.keep_rows)
            self.intr = intr.resized(self.out_w, self.out_h)
        else:
            self.intr = Intrinsics(self.out_w, self.out_h, focal=float(self.out_w))
        self.depth_dir = os.path.join(cfg.output_dir, "depth")

    def _to_processed_image(self, img: np.ndarray) -> np.ndarray:
        img = img[: self.keep_rows]
        if img.shape != (self.out_h, self.out_w):
            img = cv2.resize(img, (self.out_w, self.out_h), interpolation=cv2.INTER_AREA)
        return img

    def flow_path_for(self, index: int) -> str:
        stem = os.path.splitext(os.path.basename(self.frames[index]))[0]
        return os.path.join(self.cfg.input_dir, stem + ".flo")

    def load_pair_flow(self, index: int) -> MotionField:
        """Pixel-unit flow for candidate (index, index+1) at the processed
        resolution, cropped before resizing."""
        if self.cfg.flow_source == "external":
            raw = read_flow_file(self.flow_path_for(index))
            if raw.shape != (self.src_h, self.src_w):
                raise IoFailure(
                    f"flow {raw.shape} does not match frames "
                    f"({self.src_h}, {self.src_w})"
                )
            u = raw.u[: self.keep_rows]
            v = raw.v[: self.keep_rows]
            valid = raw.valid[: self.keep_rows]
            if u.shape != (self.out_h, self.out_w):
                sx = self.out_w / u.shape[1]
                sy = self.out_h / u.shape[0]
                size = (self.out_w, self.out_h)
                u = cv2.resize(u, size, interpolation=cv2.INTER_LINEAR) * sx
                v = cv2.resize(v, size, interpolation=cv2.INTER_LINEAR) * sy
                valid = cv2.resize(valid.astype(np.float32), size, interpolation=cv2.INTER_LINEAR) > 0.999
            return MotionField(u, v, valid)
        a = self._to_processed_image(_load_gray(self.frames[index]))
        b = self._to_processed_image(_load_gray(self.frames[index + 1]))
        return estimate_flow(a, b, self.cfg.flow_params())

    def median_magnitude(self, index: int) -> float | None:
        try:
            flow = self.load_pair_flow(index)
        except EgodepthError as exc:
            log.warning("pair %d stats failed: %s", index, exc)
            return None
        mags = flow.magnitude()[flow.valid]
        if mags.size == 0:
            return None
        return float(np.median(mags))

    def process(self, index: int) -> tuple[str, dict | None]:
        """Full treatment of an accepted pair; returns (status, record)."""
        try:
            flow_px = self.load_pair_flow(index)
            flow = flow_px.scaled(1.0 / self.intr.focal)
            est = estimate_rotation(flow, self.intr, self.cfg.egomotion_config())
            if not est.converged:
                return STATUS_NO_CONVERGENCE, None
            depth = recover_depth(
                est.trans_field,
                est.t_dir,
                self.intr,
                mask=est.inlier,
                eps_px=self.cfg.foe_epsilon_px,
            )
            rel = to_relative(depth)
            stem = os.path.splitext(os.path.basename(self.frames[index]))[0]
            os.makedirs(self.depth_dir, exist_ok=True)
            pfm_path, _ = write_depth_outputs(rel, os.path.join(self.depth_dir, stem))
            record = {
                "image_path": self.frames[index],
                "relative_depth_path": pfm_path,
                "n_valid": rel.n_valid(),
                **est.to_record(),
            }
            return STATUS_ACCEPTED, record
        except (InsufficientTranslation, NoValidPixels) as exc:
            log.info("pair %d: %s", index, exc)
            return STATUS_INSUFFICIENT, None
        except EgodepthError as exc:
            log.warning("pair %d failed: %s", index, exc)
            return STATUS_ERROR, None


def run_pipeline(cfg: PipelineConfig) -> RunResult:
    cfg.validate()
    frames = list_frames(cfg.input_dir)
    if len(frames) < 2:
        raise InputEmpty(
            f"{cfg.input_dir!r} holds {len(frames)} frame(s); need at least 2"
        )
    os.makedirs(cfg.output_dir, exist_ok=True)
    worker = _PairWorker(cfg, frames)
    n_candidates = len(frames) - 1

    def parallel(fn, indices):
        if cfg.workers == 1:
            return [fn(i) for i in indices]
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(fn, indices))

    medians = parallel(worker.median_magnitude, range(n_candidates))
    entries = select_pairs(
        frames,
        medians,
        PairSelectConfig(lo=cfg.motion_lo_px, hi=cfg.motion_hi_px, gap=cfg.dedup_gap),
    )
    if cfg.flow_source == "external":
        for i, entry in enumerate(entries):
            entry.flow_path = worker.flow_path_for(i)

    accepted_idx = [i for i, e in enumerate(entries) if e.status == STATUS_ACCEPTED]
    outcomes = parallel(worker.process, accepted_idx)

    records: list[dict] = []
    for i, (status, record) in zip(accepted_idx, outcomes):
        entries[i].status = status
        if record is not None:
            records.append(record)

    counts = Counter(e.status for e in entries)
    for key in SUMMARY_STATUSES:
        counts.setdefault(key, 0)

    pairs_manifest = os.path.join(cfg.output_dir, "pairs.jsonl")
    write_pair_manifest(entries, pairs_manifest)
    dataset_manifest = make_dataset_manifest(records, os.path.join(cfg.output_dir, "dataset.jsonl"))
    summary_path = os.path.join(cfg.output_dir, "summary.json")
    summary = {"counts": dict(counts), "n_frames": len(frames), "n_candidates": n_candidates}
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)

    log.info("pipeline done: %s", dict(counts))
    return RunResult(
        counts=dict(counts),
        entries=entries,
        records=records,
        n_frames=len(frames),
        output_dir=cfg.output_dir,
        pairs_manifest=pairs_manifest,
        dataset_manifest=dataset_manifest,
        summary_path=summary_path,
    )


def make_dataset_manifest(records: list[dict], path: str) -> str:
    """Line-delimited JSON dataset manifest; an empty accepted set writes an
    empty file (callers report that as a distinct, non-success outcome)."""
    lines = [json.dumps(rec, sort_keys=True) for rec in records]
    blob = ("\n".join(lines) + ("\n" if lines else "")).encode()
    tmp = path + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(blob)
    os.replace(tmp, path)
    return path
