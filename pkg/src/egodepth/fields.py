"""Dense per-pixel field types shared across the package.

Each type pairs float64 value planes with a boolean validity mask of the
same shape.  Values at invalid pixels are filler (zeros) and carry no
meaning; consumers must respect the mask.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch


def _as_plane(a: np.ndarray, dtype=np.float64) -> np.ndarray:
    out = np.asarray(a, dtype=dtype)
    if out.ndim != 2:
        raise DimensionMismatch(f"expected a 2-D array, got shape {out.shape}")
    return out


@dataclass
class MotionField:
    """Dense 2-D flow. Units (pixels vs normalized) are the caller's contract."""

    u: np.ndarray
    v: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.u = _as_plane(self.u)
        self.v = _as_plane(self.v)
        if self.valid is None:
            self.valid = np.ones(self.u.shape, dtype=bool)
        self.valid = _as_plane(self.valid, dtype=bool)
        if not (self.u.shape == self.v.shape == self.valid.shape):
            raise DimensionMismatch("u, v and valid must share one shape")

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.u.shape

    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)

    def scaled(self, k: float) -> "MotionField":
        """Same field with both components multiplied by k (unit changes)."""
        return MotionField(self.u * k, self.v * k, self.valid.copy())

    def copy(self) -> "MotionField":
        return MotionField(self.u.copy(), self.v.copy(), self.valid.copy())


@dataclass
class DepthMap:
    """Per-pixel scene depth, positive at valid pixels."""

    z: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        self.z = _as_plane(self.z)
        if self.valid is None:
            self.valid = np.isfinite(self.z) & (self.z > 0)
        self.valid = _as_plane(self.valid, dtype=bool)
        if self.z.shape != self.valid.shape:
            raise DimensionMismatch("z and valid must share one shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.z.shape

    def n_valid(self) -> int:
        return int(self.valid.sum())


@dataclass
class RelativeDepthMap:
    """Per-pixel depth percentile in (0, 1]; 0 is the filler at invalid pixels."""

    r: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        self.r = _as_plane(self.r)
        self.valid = _as_plane(self.valid, dtype=bool)
        if self.r.shape != self.valid.shape:
            raise DimensionMismatch("r and valid must share one shape")

    @property
    def shape(self) -> tuple[int, int]:
        return self.r.shape

    def n_valid(self) -> int:
        return int(self.valid.sum())
