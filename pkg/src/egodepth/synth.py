"""Synthetic scenes with exact depth and motion fields.

Scenes are a handful of parametric primitives plus one camera motion; the
renderer evaluates the instantaneous motion-field model in closed form, so
the output is an oracle for the inverse pipeline rather than an image-space
simulation.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import cv2
import numpy as np
from scipy.ndimage import gaussian_filter

from . import geometry
from .errors import IoFailure, UncoveredPixel
from .fields import DepthMap, MotionField
from .flowio import write_flow_file, write_pfm
from .geometry import Intrinsics


@dataclass(frozen=True)
class CameraMotion:
    """Unit translation direction, a speed that carries its magnitude, and
    angular velocity in radians per frame."""

    t_dir: tuple[float, float, float]
    speed: float
    omega: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        t = np.asarray(self.t_dir, dtype=np.float64)
        n = float(np.linalg.norm(t))
        if abs(n - 1.0) > 1e-9:
            raise ValueError(f"t_dir must be unit length, |t| = {n}")
        if self.speed < 0:
            raise ValueError("speed must be non-negative")
        object.__setattr__(self, "t_dir", tuple(float(c) for c in t))
        object.__setattr__(self, "omega", tuple(float(c) for c in self.omega))


@dataclass(frozen=True)
class FrontoWall:
    """Fronto-parallel plane at constant depth z0, covering the whole frame."""

    z0: float

    def __post_init__(self) -> None:
        if self.z0 <= 0:
            raise ValueError("wall depth must be positive")

    def depth_grid(self, intr: Intrinsics) -> np.ndarray:
        return np.full((intr.height, intr.width), float(self.z0))


@dataclass(frozen=True)
class GroundPlane:
    """Horizontal plane a camera height below the optical axis.

    Depth is height/y in normalized coordinates; rows at or above the
    horizon are not covered.  horizon_row defaults to the principal point.
    """

    height: float
    horizon_row: float | None = None

    def __post_init__(self) -> None:
        if self.height <= 0:
            raise ValueError("camera height must be positive")

    def depth_grid(self, intr: Intrinsics) -> np.ndarray:
        horizon = intr.cy if self.horizon_row is None else float(self.horizon_row)
        rows = np.arange(intr.height, dtype=np.float64)
        y = (rows - horizon) / intr.focal
        with np.errstate(divide="ignore"):
            col = np.where(y > 0, self.height / y, np.inf)
        return np.broadcast_to(col[:, None], (intr.height, intr.width)).copy()


@dataclass(frozen=True)
class Slab:
    """Fronto-parallel rectangle at constant depth, given in pixel bounds
    [row0, row1) x [col0, col1)."""

    z0: float
    row0: int
    row1: int
    col0: int
    col1: int

    def __post_init__(self) -> None:
        if self.z0 <= 0:
            raise ValueError("slab depth must be positive")
        if self.row1 <= self.row0 or self.col1 <= self.col0:
            raise ValueError("slab rectangle is empty")

    def depth_grid(self, intr: Intrinsics) -> np.ndarray:
        grid = np.full((intr.height, intr.width), np.inf)
        r0, r1 = max(0, self.row0), min(intr.height, self.row1)
        c0, c1 = max(0, self.col0), min(intr.width, self.col1)
        grid[r0:r1, c0:c1] = float(self.z0)
        return grid


Primitive = FrontoWall | GroundPlane | Slab


@dataclass(frozen=True)
class SceneSpec:
    intrinsics: Intrinsics
    motion: CameraMotion
    primitives: tuple[Primitive, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict:
        prims = []
        for p in self.primitives:
            if isinstance(p, FrontoWall):
                prims.append({"kind": "fronto_wall", "z0": p.z0})
            elif isinstance(p, GroundPlane):
                prims.append(
                    {"kind": "ground_plane", "height": p.height, "horizon_row": p.horizon_row}
                )
            else:
                prims.append(
                    {
                        "kind": "slab",
                        "z0": p.z0,
                        "row0": p.row0,
                        "row1": p.row1,
                        "col0": p.col0,
                        "col1": p.col1,
                    }
                )
        return {
            "width": self.intrinsics.width,
            "height": self.intrinsics.height,
            "focal": self.intrinsics.focal,
            "cx": self.intrinsics.cx,
            "cy": self.intrinsics.cy,
            "t_dir": list(self.motion.t_dir),
            "speed": self.motion.speed,
            "omega": list(self.motion.omega),
            "primitives": prims,
        }

    @staticmethod
    def from_dict(doc: dict) -> "SceneSpec":
        intr = Intrinsics(
            width=int(doc["width"]),
            height=int(doc["height"]),
            focal=float(doc["focal"]),
            cx=doc.get("cx"),
            cy=doc.get("cy"),
        )
        motion = CameraMotion(
            t_dir=tuple(doc["t_dir"]),
            speed=float(doc["speed"]),
            omega=tuple(doc.get("omega", (0.0, 0.0, 0.0))),
        )
        prims: list[Primitive] = []
        for p in doc.get("primitives", []):
            kind = p.get("kind")
            if kind == "fronto_wall":
                prims.append(FrontoWall(z0=float(p["z0"])))
            elif kind == "ground_plane":
                horizon = p.get("horizon_row")
                prims.append(
                    GroundPlane(
                        height=float(p["height"]),
                        horizon_row=None if horizon is None else float(horizon),
                    )
                )
            elif kind == "slab":
                prims.append(
                    Slab(
                        z0=float(p["z0"]),
                        row0=int(p["row0"]),
                        row1=int(p["row1"]),
                        col0=int(p["col0"]),
                        col1=int(p["col1"]),
                    )
                )
            else:
                raise ValueError(f"unknown primitive kind {kind!r}")
        return SceneSpec(intrinsics=intr, motion=motion, primitives=tuple(prims))


def load_scene(path: str) -> SceneSpec:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise IoFailure(f"cannot read scene file {path!r}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IoFailure(f"scene file {path!r} is not valid JSON: {exc}") from exc
    return SceneSpec.from_dict(doc)


def render_depth(scene: SceneSpec) -> DepthMap:
    """Per-pixel depth of the nearest covering primitive.

    Pixels no primitive covers come back invalid; a scene that covers
    nothing at all raises UncoveredPixel.
    """
    intr = scene.intrinsics
    best = np.full((intr.height, intr.width), np.inf)
    for prim in scene.primitives:
        best = np.minimum(best, prim.depth_grid(intr))
    valid = np.isfinite(best)
    if not valid.any():
        raise UncoveredPixel("no primitive covers any pixel")
    z = np.where(valid, best, 0.0)
    return DepthMap(z=z, valid=valid)


def render_motion_field(scene: SceneSpec) -> MotionField:
    """Exact instantaneous flow (normalized units) for the scene's motion.

    Translational and rotational parts superpose; uncovered pixels are
    invalid in the output.
    """
    depth = render_depth(scene)
    intr = scene.intrinsics
    x, y = intr.normalized_grid()
    ut, vt = geometry.translational_flow_arrays(
        np.asarray(scene.motion.t_dir), scene.motion.speed, depth.z, x, y
    )
    ur, vr = geometry.rotational_flow_arrays(np.asarray(scene.motion.omega), x, y)
    u = np.where(depth.valid, ut + ur, 0.0)
    v = np.where(depth.valid, vt + vr, 0.0)
    return MotionField(u, v, depth.valid.copy())


def render_sequence(
    scene: SceneSpec, out_dir: str, n_frames: int = 10, seed: int = 0
) -> dict:
    """Write an oracle sequence: frames, per-pair .flo files, ground truth.

    The scene is static and the motion model instantaneous, so every
    consecutive pair shares one flow field.  Frames are a smooth random
    texture advected by the flow; they make the directory listable and give
    image-based flow something plausible to chew on, but the .flo files are
    the authoritative flow.  Returns the written paths plus ground truth.
    """
    os.makedirs(out_dir, exist_ok=True)
    intr = scene.intrinsics
    flow = render_motion_field(scene)
    flow_px = flow.scaled(intr.focal)
    depth = render_depth(scene)

    rng = np.random.default_rng(seed)
    base = np.zeros((intr.height, intr.width))
    # octave mixture: coarse-to-fine flow needs trackable contrast at every
    # pyramid scale, and single-scale noise washes out after two halvings
    for sigma in (2.0, 8.0, 32.0):
        layer = rng.uniform(0.0, 1.0, size=base.shape)
        layer = gaussian_filter(layer, sigma, mode="wrap")
        base += sigma * (layer - float(layer.mean()))
    lo, hi = base.min(), base.max()
    base = (base - lo) / max(hi - lo, 1e-12)

    grid_x, grid_y = np.meshgrid(
        np.arange(intr.width, dtype=np.float32), np.arange(intr.height, dtype=np.float32)
    )
    frame_paths = []
    frame = base
    for k in range(n_frames):
        path = os.path.join(out_dir, f"frame_{k:04d}.png")
        cv2.imwrite(path, (frame * 255).astype(np.uint8))
        frame_paths.append(path)
        # backward-warp so frame k+1 moves by the rendered flow
        map_x = (grid_x - flow_px.u).astype(np.float32)
        map_y = (grid_y - flow_px.v).astype(np.float32)
        frame = cv2.remap(frame, map_x, map_y, cv2.INTER_LINEAR, borderMode=cv2.BORDER_WRAP)

    flow_paths = []
    for k in range(n_frames - 1):
        path = os.path.join(out_dir, f"frame_{k:04d}.flo")
        write_flow_file(flow_px, path)
        flow_paths.append(path)

    gt_path = os.path.join(out_dir, "gt_depth.pfm")
    write_pfm(np.where(depth.valid, depth.z, np.nan).astype(np.float32), gt_path)
    scene_path = os.path.join(out_dir, "scene.json")
    with open(scene_path, "w", encoding="utf-8") as fh:
        json.dump(scene.to_dict(), fh, indent=2)

    return {
        "frames": frame_paths,
        "flow_files": flow_paths,
        "gt_depth": gt_path,
        "scene": scene_path,
    }
