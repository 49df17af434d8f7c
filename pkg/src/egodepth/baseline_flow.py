"""Dense optical flow via coarse-to-fine brightness constancy.

Per pyramid level the flow increment minimizes the classic quadratic energy
sum((Ix*du + Iy*dv + It)^2) + smoothness * (|grad u|^2 + |grad v|^2) around
the flow warped up from the coarser level.  The normal equations are solved
with plain conjugate gradients, so the whole estimator is deterministic:
same frames, same parameters, same bytes out.
"""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from .errors import DimensionMismatch, TooSmallForPyramid
from .fields import MotionField

_WARPS_PER_LEVEL = 2  # re-linearizations; the iteration budget is split across them
_MIN_COARSE_SIDE = 8
_MAX_STEP = 1.5  # px per warp; a linearization is only trusted near the current warp


@dataclass(frozen=True)
class FlowParams:
    pyramid_levels: int = 5
    scale_per_level: float = 0.5
    iterations_per_level: int = 50
    smoothness_weight: float = 15.0

    def __post_init__(self) -> None:
        if self.pyramid_levels < 1:
            raise ValueError("need at least one pyramid level")
        if not 0.25 <= self.scale_per_level <= 0.75:
            raise ValueError("scale_per_level outside [0.25, 0.75]")
        if self.iterations_per_level < 1:
            raise ValueError("need at least one iteration per level")
        if self.smoothness_weight <= 0:
            raise ValueError("smoothness_weight must be positive")


def estimate_flow(
    frame_a: np.ndarray, frame_b: np.ndarray, params: FlowParams = FlowParams()
) -> MotionField:
    """Flow from frame_a to frame_b in pixel units, all pixels valid.

    Frames are 2-D grayscale; integer dtypes are rescaled to [0, 1].
    """
    a = _as_gray(frame_a)
    b = _as_gray(frame_b)
    if a.shape != b.shape:
        raise DimensionMismatch(f"frame shapes differ: {a.shape} vs {b.shape}")

    min_side = min(a.shape)
    coarsest = min_side * params.scale_per_level ** (params.pyramid_levels - 1)
    if coarsest < _MIN_COARSE_SIDE:
        raise TooSmallForPyramid(
            f"min side {min_side} leaves {coarsest:.1f} px at the coarsest of "
            f"{params.pyramid_levels} levels (need >= {_MIN_COARSE_SIDE})"
        )

    shapes = [
        (
            max(_MIN_COARSE_SIDE, int(round(a.shape[0] * params.scale_per_level**k))),
            max(_MIN_COARSE_SIDE, int(round(a.shape[1] * params.scale_per_level**k))),
        )
        for k in range(params.pyramid_levels)
    ]

    u = v = None
    for level in range(params.pyramid_levels - 1, -1, -1):
        h, w = shapes[level]
        al = _resize(a, w, h)
        bl = _resize(b, w, h)
        if u is None:
            u = np.zeros((h, w))
            v = np.zeros((h, w))
        else:
            u = _resize(u, w, h) * (w / u.shape[1])
            v = _resize(v, w, h) * (h / v.shape[0])

        iters = max(1, params.iterations_per_level // _WARPS_PER_LEVEL)
        for _ in range(_WARPS_PER_LEVEL):
            du, dv = _increment(al, bl, u, v, params.smoothness_weight, iters)
            # aliased or low-texture levels can ask for wild steps; cap each
            # update at the range the linearization actually covers
            u = u + np.clip(du, -_MAX_STEP, _MAX_STEP)
            v = v + np.clip(dv, -_MAX_STEP, _MAX_STEP)

    return MotionField(u, v)


def _as_gray(img: np.ndarray) -> np.ndarray:
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise DimensionMismatch(f"expected 2-D grayscale, got shape {arr.shape}")
    if np.issubdtype(arr.dtype, np.integer):
        return arr.astype(np.float64) / float(np.iinfo(arr.dtype).max)
    return arr.astype(np.float64)


def _resize(img: np.ndarray, w: int, h: int) -> np.ndarray:
    if img.shape == (h, w):
        return img
    return cv2.resize(img, (w, h), interpolation=cv2.INTER_AREA if w <= img.shape[1] else cv2.INTER_LINEAR)


def _warp(img: np.ndarray, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    h, w = img.shape
    gx, gy = np.meshgrid(np.arange(w, dtype=np.float32), np.arange(h, dtype=np.float32))
    return cv2.remap(
        img,
        (gx + u).astype(np.float32),
        (gy + v).astype(np.float32),
        cv2.INTER_LINEAR,
        borderMode=cv2.BORDER_REPLICATE,
    )


def _graph_laplacian(f: np.ndarray) -> np.ndarray:
    out = np.zeros_like(f)
    out[1:, :] += f[1:, :] - f[:-1, :]
    out[:-1, :] += f[:-1, :] - f[1:, :]
    out[:, 1:] += f[:, 1:] - f[:, :-1]
    out[:, :-1] += f[:, :-1] - f[:, 1:]
    return out


def _increment(
    a: np.ndarray, b: np.ndarray, u: np.ndarray, v: np.ndarray, lam: float, iters: int
) -> tuple[np.ndarray, np.ndarray]:
    """One linearization step: solve for (du, dv) by conjugate gradients."""
    warped = _warp(b, u, v)
    mean = 0.5 * (a + warped)
    ix = np.gradient(mean, axis=1)
    iy = np.gradient(mean, axis=0)
    it = warped - a

    # normal equations of the quadratic energy around the current flow
    rhs_u = -ix * it - lam * _graph_laplacian(u)
    rhs_v = -iy * it - lam * _graph_laplacian(v)

    def matvec(pu: np.ndarray, pv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        data = ix * pu + iy * pv
        return ix * data + lam * _graph_laplacian(pu), iy * data + lam * _graph_laplacian(pv)

    # the smoothness term is blind to a constant shift, so that mode has a
    # near-zero eigenvalue and plain CG crawls on it; one global 2x2 solve
    # removes it before the iteration starts
    g = np.array(
        [
            [float((ix * ix).sum()), float((ix * iy).sum())],
            [float((ix * iy).sum()), float((iy * iy).sum())],
        ]
    )
    g0 = -np.array([float((ix * it).sum()), float((iy * it).sum())])
    try:
        d0 = np.linalg.solve(g + 1e-12 * np.eye(2), g0)
    except np.linalg.LinAlgError:
        d0 = np.zeros(2)
    du = np.full_like(u, d0[0])
    dv = np.full_like(v, d0[1])
    au, av = matvec(du, dv)
    ru, rv = rhs_u - au, rhs_v - av
    pu, pv = ru.copy(), rv.copy()
    rr = float((ru * ru).sum() + (rv * rv).sum())
    if rr == 0.0:
        return du, dv
    tol = rr * 1e-24
    for _ in range(iters):
        apu, apv = matvec(pu, pv)
        denom = float((pu * apu).sum() + (pv * apv).sum())
        if denom <= 0.0:
            break
        alpha = rr / denom
        du += alpha * pu
        dv += alpha * pv
        ru -= alpha * apu
        rv -= alpha * apv
        rr_next = float((ru * ru).sum() + (rv * rv).sum())
        if rr_next < tol:
            break
        beta = rr_next / rr
        pu = ru + beta * pu
        pv = rv + beta * pv
        rr = rr_next
    return du, dv
