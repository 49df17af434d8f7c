"""Shared fixtures: the synthetic scene battery and small helpers.

The battery covers walls, ground planes and slabs under varied translation
directions and rotations with |omega| <= 0.05 rad.  Every scene is layered
(at least two distinct depths) because a single smooth surface under
near-forward motion leaves the rotation/translation split poorly
conditioned once noise enters; layered scenes are also what the label
pipeline is for.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.ndimage import gaussian_filter

from egodepth.fields import MotionField
from egodepth.geometry import Intrinsics
from egodepth.synth import CameraMotion, FrontoWall, GroundPlane, SceneSpec, Slab


def unit(*t: float) -> tuple[float, float, float]:
    arr = np.asarray(t, dtype=np.float64)
    return tuple(arr / np.linalg.norm(arr))


BATTERY_INTRINSICS = dict(width=160, height=96, focal=120.0)


def battery_scenes() -> list[tuple[str, SceneSpec]]:
    """14 scenes, each returning (name, spec); median flow 1.5 to 6 px."""
    out: list[tuple[str, SceneSpec]] = []

    def add(name, t, speed, omega, prims):
        intr = Intrinsics(**BATTERY_INTRINSICS)
        motion = CameraMotion(unit(*t), speed, omega)
        out.append((name, SceneSpec(intr, motion, tuple(prims))))

    add("fwd_layered", (0, 0, 1), 0.30, (0.004, -0.003, 0.002),
        [FrontoWall(16.0), Slab(3.0, 55, 96, 0, 70), Slab(5.0, 10, 50, 95, 160),
         Slab(9.0, 60, 90, 85, 150)])
    add("diag_layered", (0.35, -0.1, 0.93), 0.28, (-0.01, 0.02, -0.005),
        [FrontoWall(14.0), Slab(2.5, 57, 96, 0, 62), Slab(4.5, 12, 54, 90, 160),
         Slab(8.0, 60, 90, 84, 138)])
    add("lateral_ground", (1, 0, 0.15), 0.30, (0.0, 0.004, 0.01),
        [FrontoWall(12.0), GroundPlane(1.5), Slab(4.0, 10, 45, 20, 90)])
    add("backward_layered", (0.2, 0.1, -0.97), 0.22, (0.02, 0.01, -0.015),
        [FrontoWall(9.0), Slab(3.2, 50, 92, 8, 66), Slab(5.5, 8, 44, 92, 152)])
    add("up_forward", (0, -0.5, 0.87), 0.25, (0.005, 0.005, 0.0),
        [FrontoWall(11.0), Slab(3.0, 52, 96, 10, 75), Slab(6.0, 12, 48, 95, 155)])
    add("pure_lateral_x", (1, 0, 0), 0.18, (0.0, 0.0, 0.02),
        [FrontoWall(10.0), Slab(2.8, 50, 94, 6, 70), Slab(5.0, 8, 46, 88, 154)])
    add("ground_fwd", (0, 0, 1), 0.35, (0.01, 0.0, 0.0),
        [GroundPlane(1.5), FrontoWall(18.0), Slab(3.5, 20, 58, 30, 110)])
    add("yaw_fwd", (0.1, 0, 0.995), 0.30, (0.0, 0.045, 0.0),
        [FrontoWall(13.0), Slab(3.0, 54, 96, 0, 68), Slab(7.0, 10, 50, 92, 160)])
    add("roll_diag", (-0.3, 0.2, 0.93), 0.27, (0.0, 0.0, 0.04),
        [FrontoWall(15.0), Slab(2.6, 55, 96, 70, 140), Slab(6.0, 8, 46, 10, 80)])
    add("pitch_lateral", (0.8, 0, 0.6), 0.26, (0.03, 0.0, 0.0),
        [FrontoWall(12.0), GroundPlane(1.2), Slab(5.0, 12, 48, 60, 130)])
    add("allaxis_diag", (-0.4, -0.15, 0.9), 0.30, (0.02, -0.02, 0.02),
        [FrontoWall(14.0), Slab(2.5, 56, 96, 80, 150), Slab(4.5, 10, 50, 0, 66),
         Slab(8.0, 58, 92, 14, 70)])
    add("down_diag_ground", (0.2, 0.35, 0.91), 0.27, (-0.005, 0.01, 0.02),
        [GroundPlane(1.4), FrontoWall(16.0), Slab(3.0, 18, 56, 24, 104)])
    add("near_wall_backlat", (-0.85, 0.1, -0.52), 0.16, (0.01, 0.02, 0.005),
        [FrontoWall(6.0), Slab(2.2, 50, 92, 84, 150), Slab(3.8, 8, 44, 12, 76)])
    add("columns_fwd_up", (0.05, -0.3, 0.95), 0.28, (-0.02, 0.005, -0.01),
        [FrontoWall(12.0), Slab(2.4, 0, 96, 10, 40), Slab(4.2, 0, 96, 70, 100),
         Slab(7.0, 0, 96, 120, 150)])
    return out


@pytest.fixture(scope="session")
def battery() -> list[tuple[str, SceneSpec]]:
    return battery_scenes()


def add_flow_noise(flow: MotionField, sigma_px: float, focal: float,
                   rng: np.random.Generator) -> MotionField:
    s = sigma_px / focal
    return MotionField(
        flow.u + rng.normal(0.0, s, flow.u.shape),
        flow.v + rng.normal(0.0, s, flow.v.shape),
        flow.valid.copy(),
    )


def octave_texture(h: int, w: int, seed: int = 0) -> np.ndarray:
    """Random texture with contrast at several scales (wraps at the edges)."""
    rng = np.random.default_rng(seed)
    base = np.zeros((h, w))
    for sigma in (2.0, 8.0, 32.0):
        layer = rng.uniform(0.0, 1.0, size=base.shape)
        base += sigma * (gaussian_filter(layer, sigma, mode="wrap") - float(layer.mean()))
    return (base - base.min()) / (base.max() - base.min())


def angle_deg(a: np.ndarray, b: np.ndarray) -> float:
    """Unsigned angle between two directions, sign of b ignored."""
    d = abs(float(np.dot(unitv(a), unitv(b))))
    return float(np.degrees(np.arccos(min(d, 1.0))))


def unitv(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)
