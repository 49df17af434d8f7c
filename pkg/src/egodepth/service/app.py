"""FastAPI app exposing run, eval, and synth over HTTP.

Domain failures map to HTTP 400 with a machine-readable code in the detail
body ("config_invalid", "input_empty", "pipeline_error"); the CLI turns
those codes into its exit statuses.
"""

from __future__ import annotations

import json

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..errors import ConfigInvalid, EgodepthError, InputEmpty, IoFailure
from ..metrics import evaluate_directories, format_table
from ..pipeline import PipelineConfig, run_pipeline
from ..synth import SceneSpec, load_scene, render_sequence
from .schemas import (
    AcceptedRecord,
    EvalRequest,
    EvalResponse,
    HealthResponse,
    ImageEval,
    MetricsModel,
    PairEntryModel,
    RunRequest,
    RunResponse,
    SynthRequest,
    SynthResponse,
)

app = FastAPI(title="egodepth", version=__version__)


def _bad(code: str, exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail={"code": code, "message": str(exc)})


def _build_config(req: RunRequest) -> PipelineConfig:
    doc: dict = {}
    if req.config_path is not None:
        try:
            with open(req.config_path, "r", encoding="utf-8") as fh:
                doc.update(json.load(fh))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot load config {req.config_path!r}: {exc}") from exc
    if req.config is not None:
        doc.update({k: v for k, v in req.config.model_dump().items() if v is not None})
    if req.overrides is not None:
        doc.update({k: v for k, v in req.overrides.model_dump().items() if v is not None})
    return PipelineConfig.from_dict(doc, preset=req.preset)


@app.get("/healthz", response_model=HealthResponse)
def healthz() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.post("/run", response_model=RunResponse)
def run(req: RunRequest) -> RunResponse:
    try:
        cfg = _build_config(req)
        result = run_pipeline(cfg)
    except ConfigInvalid as exc:
        raise _bad("config_invalid", exc) from exc
    except InputEmpty as exc:
        raise _bad("input_empty", exc) from exc
    except EgodepthError as exc:
        raise _bad("pipeline_error", exc) from exc
    return RunResponse(
        counts=result.counts,
        n_frames=result.n_frames,
        output_dir=result.output_dir,
        pairs_manifest=result.pairs_manifest,
        dataset_manifest=result.dataset_manifest,
        summary_path=result.summary_path,
        pairs=[PairEntryModel(**e.__dict__) for e in result.entries],
        accepted=[AcceptedRecord(**rec) for rec in result.records],
    )


@app.post("/eval", response_model=EvalResponse)
def eval_dirs(req: EvalRequest) -> EvalResponse:
    try:
        per_image, mean = evaluate_directories(
            req.pred_dir,
            req.gt_dir,
            cap_m=req.cap_m,
            min_m=req.min_m,
            n_pairs=req.n_pairs,
            seed=req.seed,
            margin=req.margin,
        )
    except (InputEmpty, FileNotFoundError) as exc:
        raise _bad("input_empty", exc) from exc
    except EgodepthError as exc:
        raise _bad("pipeline_error", exc) from exc
    table = format_table([("mean", mean)] + per_image)
    return EvalResponse(
        per_image=[
            ImageEval(stem=stem, metrics=MetricsModel(**rep.to_dict()))
            for stem, rep in per_image
        ],
        mean=MetricsModel(**mean.to_dict()),
        table=table,
        n_images=len(per_image),
    )


@app.post("/synth", response_model=SynthResponse)
def synth(req: SynthRequest) -> SynthResponse:
    try:
        if req.scene is not None:
            scene = SceneSpec.from_dict(req.scene)
        elif req.scene_path is not None:
            scene = load_scene(req.scene_path)
        else:
            raise ConfigInvalid("provide scene or scene_path")
        written = render_sequence(scene, req.output_dir, n_frames=req.frames, seed=req.seed)
    except (ConfigInvalid, ValueError, KeyError, IoFailure) as exc:
        raise _bad("config_invalid", exc) from exc
    except EgodepthError as exc:
        raise _bad("pipeline_error", exc) from exc
    return SynthResponse(**written)
