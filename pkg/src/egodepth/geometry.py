"""Pinhole camera model and the instantaneous motion-field building blocks.

All angular math happens in normalized image coordinates: the origin sits at
the principal point, x grows to the right, y grows downward, and one unit
equals one focal length.  Both the synthetic renderer and the egomotion
solver import from here so the two sides agree bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Intrinsics:
    """Square-pixel pinhole camera.

    cx/cy default to the image center (width/2, height/2) when omitted.
    """

    width: int
    height: int
    focal: float
    cx: float | None = None
    cy: float | None = None

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ValueError("image dimensions must be positive")
        if self.focal <= 0:
            raise ValueError("focal length must be positive")
        if self.cx is None:
            object.__setattr__(self, "cx", self.width / 2.0)
        if self.cy is None:
            object.__setattr__(self, "cy", self.height / 2.0)

    def normalized_grid(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-pixel normalized coordinates, each of shape (height, width)."""
        x = (np.arange(self.width, dtype=np.float64) - self.cx) / self.focal
        y = (np.arange(self.height, dtype=np.float64) - self.cy) / self.focal
        return np.meshgrid(x, y)

    def resized(self, new_width: int, new_height: int) -> "Intrinsics":
        """Intrinsics after resampling the image to a new resolution.

        The focal length follows the horizontal ratio; principal point
        follows each axis.  Anisotropic resizes therefore keep x exact and
        approximate y, which matches how the presets treat real footage.
        """
        sx = new_width / self.width
        sy = new_height / self.height
        return Intrinsics(new_width, new_height, self.focal * sx, self.cx * sx, self.cy * sy)

    def cropped_bottom(self, new_height: int) -> "Intrinsics":
        """Intrinsics after dropping rows from the bottom (top row pinned)."""
        if not 0 < new_height <= self.height:
            raise ValueError("crop height out of range")
        return Intrinsics(self.width, new_height, self.focal, self.cx, self.cy)


def rotational_flow_arrays(
    omega: np.ndarray, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous flow of a pure camera rotation, in normalized units.

    omega is (wx, wy, wz) in radians per frame about the camera axes.  The
    field is linear in omega, which the solvers rely on.
    """
    wx, wy, wz = (float(c) for c in np.asarray(omega, dtype=np.float64))
    u = wx * x * y - wy * (1.0 + x * x) + wz * y
    v = wx * (1.0 + y * y) - wy * x * y - wz * x
    return u, v


def translational_flow_arrays(
    t: np.ndarray, speed: float, z: np.ndarray, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Instantaneous flow of a pure camera translation, in normalized units.

    t is a unit direction (U, V, W); depth z is per pixel and must be
    positive where it is used.
    """
    tu, tv, tw = (float(c) * float(speed) for c in np.asarray(t, dtype=np.float64))
    with np.errstate(divide="ignore", invalid="ignore"):
        u = (x * tw - tu) / z
        v = (y * tw - tv) / z
    return u, v


def radial_direction_arrays(
    t_dir: np.ndarray, x: np.ndarray, y: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Direction (not magnitude) of translational flow at each pixel.

    Equals (xW - U, yW - V); translational flow is this divided by positive
    depth, so the two are parallel with positive dot product.
    """
    tu, tv, tw = (float(c) for c in np.asarray(t_dir, dtype=np.float64))
    return x * tw - tu, y * tw - tv


def angle_between(au: np.ndarray, av: np.ndarray, bu: np.ndarray, bv: np.ndarray) -> np.ndarray:
    """Unsigned angle in [0, pi] between 2-D vector fields a and b.

    Zero-length inputs map to angle 0; callers weight those out.
    """
    cross = au * bv - av * bu
    dot = au * bu + av * bv
    return np.arctan2(np.abs(cross), dot)


def unit(vec: np.ndarray) -> np.ndarray:
    v = np.asarray(vec, dtype=np.float64)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return v / n


def tangent_basis(t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two unit vectors orthogonal to t (and to each other)."""
    t = unit(t)
    helper = np.zeros(3)
    helper[int(np.argmin(np.abs(t)))] = 1.0
    e1 = unit(np.cross(t, helper))
    e2 = np.cross(t, e1)
    return e1, e2


# Icosahedron vertex/face table; subdivided face centroids give a nearly
# uniform covering of the unit sphere.
_PHI = (1.0 + 5.0**0.5) / 2.0
_ICO_VERTS = np.array(
    [
        (-1, _PHI, 0), (1, _PHI, 0), (-1, -_PHI, 0), (1, -_PHI, 0),
        (0, -1, _PHI), (0, 1, _PHI), (0, -1, -_PHI), (0, 1, -_PHI),
        (_PHI, 0, -1), (_PHI, 0, 1), (-_PHI, 0, -1), (-_PHI, 0, 1),
    ],
    dtype=np.float64,
)
_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def sphere_directions(level: int) -> np.ndarray:
    """Unit directions from a subdivided icosahedron, shape (20 * 4**level, 3).

    Face centroids rather than vertices, so level 3 yields 1280 directions.
    Construction is fully deterministic.
    """
    verts = [v / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    midpoint_cache: dict[tuple[int, int], int] = {}

    def midpoint(i: int, j: int) -> int:
        key = (i, j) if i < j else (j, i)
        if key not in midpoint_cache:
            m = verts[i] + verts[j]
            verts.append(m / np.linalg.norm(m))
            midpoint_cache[key] = len(verts) - 1
        return midpoint_cache[key]

    for _ in range(level):
        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces

    varr = np.asarray(verts)
    centroids = varr[np.asarray(faces)].mean(axis=1)
    return centroids / np.linalg.norm(centroids, axis=1, keepdims=True)
