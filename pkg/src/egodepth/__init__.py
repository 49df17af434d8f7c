"""Self-supervised relative-depth label generation from egomotion video."""

__version__ = "0.1.0"

from .baseline_flow import FlowParams, estimate_flow
from .depth import recover_depth, to_relative
from .egomotion import (
    EgomotionConfig,
    EgomotionEstimate,
    estimate_rotation,
    estimate_translation_direction,
    rotational_field,
)
from .fields import DepthMap, MotionField, RelativeDepthMap
from .flowio import (
    PairEntry,
    PairSelectConfig,
    read_flow_file,
    select_pairs,
    write_depth_outputs,
    write_flow_file,
)
from .geometry import Intrinsics
from .metrics import (
    EvalReport,
    eigen_metrics,
    evaluate_directories,
    l1_relative,
    ordinal_agreement,
)
from .pipeline import PipelineConfig, RunResult, make_dataset_manifest, run_pipeline
from .synth import (
    CameraMotion,
    FrontoWall,
    GroundPlane,
    SceneSpec,
    Slab,
    render_depth,
    render_motion_field,
    render_sequence,
)

__all__ = [
    "CameraMotion",
    "DepthMap",
    "EgomotionConfig",
    "EgomotionEstimate",
    "EvalReport",
    "FlowParams",
    "FrontoWall",
    "GroundPlane",
    "Intrinsics",
    "MotionField",
    "PairEntry",
    "PairSelectConfig",
    "PipelineConfig",
    "RelativeDepthMap",
    "RunResult",
    "SceneSpec",
    "Slab",
    "eigen_metrics",
    "estimate_flow",
    "estimate_rotation",
    "estimate_translation_direction",
    "evaluate_directories",
    "l1_relative",
    "make_dataset_manifest",
    "ordinal_agreement",
    "read_flow_file",
    "recover_depth",
    "render_depth",
    "render_motion_field",
    "render_sequence",
    "rotational_field",
    "run_pipeline",
    "select_pairs",
    "to_relative",
    "write_depth_outputs",
    "write_flow_file",
]
