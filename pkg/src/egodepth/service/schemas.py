"""Request and response models for the HTTP endpoints."""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict


class PipelineConfigModel(BaseModel):
    """Mirror of the flat run configuration; every field optional so the
    same model serves as base config and as override set."""

    model_config = ConfigDict(extra="forbid")

    input_dir: str | None = None
    output_dir: str | None = None
    flow_source: str | None = None
    focal: float | None = None
    cx: float | None = None
    cy: float | None = None
    resize_width: int | None = None
    resize_height: int | None = None
    bottom_crop_fraction: float | None = None
    motion_lo_px: float | None = None
    motion_hi_px: float | None = None
    dedup_gap: int | None = None
    foe_epsilon_px: float | None = None
    mag_floor_px: float | None = None
    min_support: float | None = None
    inlier_angle_deg: float | None = None
    omega_max: float | None = None
    max_evals: int | None = None
    pyramid_levels: int | None = None
    scale_per_level: float | None = None
    iterations_per_level: int | None = None
    smoothness_weight: float | None = None
    workers: int | None = None
    seed: int | None = None
    preset: str | None = None


class RunRequest(BaseModel):
    config: PipelineConfigModel | None = None
    config_path: str | None = None
    preset: str | None = None
    overrides: PipelineConfigModel | None = None


class PairEntryModel(BaseModel):
    frame_a: str
    frame_b: str
    frame_gap: int
    flow_path: str | None
    status: str


class AcceptedRecord(BaseModel):
    image_path: str
    relative_depth_path: str
    n_valid: int
    omega: list[float]
    t_dir: list[float]
    objective: float
    n_inliers: int


class RunResponse(BaseModel):
    counts: dict[str, int]
    n_frames: int
    output_dir: str
    pairs_manifest: str
    dataset_manifest: str
    summary_path: str
    pairs: list[PairEntryModel]
    accepted: list[AcceptedRecord]


class EvalRequest(BaseModel):
    pred_dir: str
    gt_dir: str
    cap_m: float = 80.0
    min_m: float = 1e-3
    n_pairs: int = 50000
    seed: int = 0
    margin: float = 0.05


class MetricsModel(BaseModel):
    abs_rel: float
    sq_rel: float
    rmse: float
    rmse_log: float
    delta1: float
    delta2: float
    delta3: float
    ordinal_agreement: float
    l1_relative: float
    n_valid: int


class ImageEval(BaseModel):
    stem: str
    metrics: MetricsModel


class EvalResponse(BaseModel):
    per_image: list[ImageEval]
    mean: MetricsModel
    table: str
    n_images: int


class SynthRequest(BaseModel):
    scene: dict | None = None
    scene_path: str | None = None
    output_dir: str
    frames: int = 10
    seed: int = 0


class SynthResponse(BaseModel):
    frames: list[str]
    flow_files: list[str]
    gt_depth: str
    scene: str


class HealthResponse(BaseModel):
    status: str
    version: str
