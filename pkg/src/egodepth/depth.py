"""Depth from the translational flow component, and the percentile encoding.

Given a unit translation direction t = (U, V, W), the translational flow at
a pixel with normalized coordinates (x, y) is (x*W - U, y*W - V) / Z, so

    Z = sqrt(((x*W - U)^2 + (y*W - V)^2) / (u^2 + v^2))

up to the unknown speed scale.  The ratio blows up near the focus of
expansion where both numerator and flow vanish, so pixels whose flow
magnitude falls below an exclusion radius are marked invalid rather than
guessed at.
"""

from __future__ import annotations

import numpy as np

from . import geometry
from .errors import DegenerateDirection, DimensionMismatch, NoValidPixels
from .fields import DepthMap, MotionField, RelativeDepthMap
from .geometry import Intrinsics

FOE_EPSILON_PX = 0.3


def recover_depth(
    trans_field: MotionField,
    t_dir: np.ndarray,
    intr: Intrinsics,
    mask: np.ndarray | None = None,
    eps_px: float = FOE_EPSILON_PX,
) -> DepthMap:
    """Per-pixel depth up to scale from a rotation-free flow field.

    trans_field is in normalized units.  mask optionally restricts output
    to pixels the caller trusts (e.g. egomotion inliers).  Pixels with flow
    magnitude below eps_px / focal are excluded as too close to the focus
    of expansion.
    """
    t = np.asarray(t_dir, dtype=np.float64)
    norm = float(np.linalg.norm(t))
    if norm < 1e-12:
        raise DegenerateDirection("translation direction has zero norm")
    t = t / norm

    if trans_field.shape != (intr.height, intr.width):
        raise DimensionMismatch(
            f"flow shape {trans_field.shape} does not match intrinsics "
            f"({intr.height}, {intr.width})"
        )
    if mask is not None and mask.shape != trans_field.shape:
        raise DimensionMismatch("mask shape does not match the flow field")

    x, y = intr.normalized_grid()
    du, dv = geometry.radial_direction_arrays(t, x, y)
    num = du * du + dv * dv
    den = trans_field.u**2 + trans_field.v**2

    eps = eps_px / intr.focal
    valid = trans_field.valid & np.isfinite(den) & (den >= eps * eps)
    if mask is not None:
        valid = valid & mask

    z = np.zeros(trans_field.shape)
    z[valid] = np.sqrt(num[valid] / den[valid])
    valid = valid & (z > 0) & np.isfinite(z)
    z[~valid] = 0.0
    return DepthMap(z=z, valid=valid)


def to_relative(depth: DepthMap) -> RelativeDepthMap:
    """Depth percentiles over the valid pixels, ties sharing the max rank.

    r(p) = |{q valid : Z(q) <= Z(p)}| / n_valid, so values live in (0, 1]
    and survive any rescaling or monotone remapping of Z unchanged.
    """
    n = depth.n_valid()
    if n == 0:
        raise NoValidPixels("depth map has no valid pixels")
    zv = depth.z[depth.valid]
    order = np.sort(zv)
    ranks = np.searchsorted(order, zv, side="right")
    r = np.zeros(depth.shape)
    r[depth.valid] = ranks / n
    return RelativeDepthMap(r=r, valid=depth.valid.copy())
