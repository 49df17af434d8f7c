"""File formats: Middlebury .flo flow, PFM depth, 16-bit PNG depth, and the
JSONL pair manifest with its motion-based pair selection rule.

.flo layout: float32 magic 202021.25, int32 width, int32 height, then
height*width interleaved float32 (u, v) pairs in row-major order, all
little-endian.  Components with magnitude above 1e9 mark a pixel invalid;
invalid or non-finite pixels are written back as the 1e10 sentinel.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import asdict, dataclass

import cv2
import numpy as np

from .errors import (
    BadMagic,
    DimensionOverflow,
    EmptyIndex,
    IoFailure,
    TruncatedFile,
)
from .fields import MotionField, RelativeDepthMap

FLO_MAGIC = 202021.25
FLO_INVALID_SENTINEL = 1e10
FLO_INVALID_THRESHOLD = 1e9
MAX_SIDE = 1 << 16


def read_flow_file(path: str, focal: float | None = None) -> MotionField:
    """Read a .flo file.

    Values are pixel units as stored; pass focal to get normalized units
    (both components divided by it) instead.
    """
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read flow file {path!r}: {exc}") from exc

    if len(raw) < 12:
        raise TruncatedFile(f"{path!r}: header needs 12 bytes, file has {len(raw)}")
    magic = np.frombuffer(raw, dtype="<f4", count=1, offset=0)[0]
    if not math.isclose(float(magic), FLO_MAGIC, rel_tol=0, abs_tol=1e-3):
        raise BadMagic(f"{path!r}: magic {magic!r} != {FLO_MAGIC}")
    width, height = (int(d) for d in np.frombuffer(raw, dtype="<i4", count=2, offset=4))
    if not (0 < width <= MAX_SIDE) or not (0 < height <= MAX_SIDE):
        raise DimensionOverflow(f"{path!r}: implausible dimensions {width}x{height}")

    count = width * height * 2
    payload = np.frombuffer(raw, dtype="<f4", offset=12)
    if payload.size < count:
        raise TruncatedFile(
            f"{path!r}: expected {count} flow scalars, found {payload.size}"
        )
    data = payload[:count].reshape(height, width, 2)
    u = data[:, :, 0].astype(np.float64)
    v = data[:, :, 1].astype(np.float64)
    valid = (
        np.isfinite(u)
        & np.isfinite(v)
        & (np.abs(u) <= FLO_INVALID_THRESHOLD)
        & (np.abs(v) <= FLO_INVALID_THRESHOLD)
    )
    if focal is not None:
        u /= focal
        v /= focal
    return MotionField(u, v, valid)


def write_flow_file(field: MotionField, path: str) -> None:
    """Write a .flo file (pixel units expected).

    Invalid or non-finite pixels become the 1e10 sentinel in both
    components.  Finite valid fields round-trip bit-exactly provided their
    values are float32-representable.
    """
    u32 = field.u.astype("<f4")
    v32 = field.v.astype("<f4")
    bad = ~(field.valid & np.isfinite(u32) & np.isfinite(v32))
    u32[bad] = FLO_INVALID_SENTINEL
    v32[bad] = FLO_INVALID_SENTINEL
    data = np.empty((field.height, field.width, 2), dtype="<f4")
    data[:, :, 0] = u32
    data[:, :, 1] = v32
    header = (
        np.asarray([FLO_MAGIC], dtype="<f4").tobytes()
        + np.asarray([field.width, field.height], dtype="<i4").tobytes()
    )
    _atomic_write_bytes(path, header + data.tobytes())


def write_pfm(values: np.ndarray, path: str) -> None:
    """Grayscale PFM, little-endian (scale -1.0), rows stored bottom-up."""
    arr = np.asarray(values, dtype="<f4")
    if arr.ndim != 2:
        raise IoFailure("PFM writer expects a 2-D array")
    header = f"Pf\n{arr.shape[1]} {arr.shape[0]}\n-1.0\n".encode("ascii")
    _atomic_write_bytes(path, header + np.flipud(arr).tobytes())


def read_pfm(path: str) -> np.ndarray:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise IoFailure(f"cannot read PFM {path!r}: {exc}") from exc
    tokens: list[bytes] = []
    pos = 0
    while len(tokens) < 4 and pos < len(raw):
        end = pos
        while end < len(raw) and not raw[end : end + 1].isspace():
            end += 1
        if end > pos:
            tokens.append(raw[pos:end])
        pos = end + 1
    if len(tokens) < 4:
        raise TruncatedFile(f"{path!r}: incomplete PFM header")
    if tokens[0] != b"Pf":
        raise BadMagic(f"{path!r}: not a grayscale PFM")
    width, height = int(tokens[1]), int(tokens[2])
    scale = float(tokens[3])
    dtype = "<f4" if scale < 0 else ">f4"
    data = np.frombuffer(raw, dtype=dtype, offset=pos)
    if data.size < width * height:
        raise TruncatedFile(f"{path!r}: PFM payload too short")
    plane = data[: width * height].reshape(height, width)
    return np.flipud(plane).astype(np.float64)


def write_depth_outputs(rel: RelativeDepthMap, base_path: str) -> tuple[str, str]:
    """Write <base>.pfm and <base>.png for a relative depth map.

    PFM stores r as float32 with NaN at invalid pixels.  PNG stores
    round(r * 65535) as 16-bit grayscale with 0 reserved for invalid; valid
    pixels are floored at 1 so the sentinel stays unambiguous.
    """
    pfm_path = base_path + ".pfm"
    png_path = base_path + ".png"

    plane = np.where(rel.valid, rel.r, np.nan).astype(np.float32)
    write_pfm(plane, pfm_path)

    # round half up, matching the decode error bound of 1/65535
    quant = np.floor(rel.r * 65535.0 + 0.5)
    quant = np.clip(quant, 1, 65535)
    png = np.where(rel.valid, quant, 0).astype(np.uint16)
    tmp = png_path + ".tmp.png"
    if not cv2.imwrite(tmp, png):
        raise IoFailure(f"cannot write PNG {png_path!r}")
    os.replace(tmp, png_path)
    return pfm_path, png_path


def read_depth_png(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Decode a 16-bit relative depth PNG to (r, valid)."""
    img = cv2.imread(path, cv2.IMREAD_UNCHANGED)
    if img is None:
        raise IoFailure(f"cannot read PNG {path!r}")
    if img.dtype != np.uint16 or img.ndim != 2:
        raise IoFailure(f"{path!r}: expected 16-bit grayscale")
    valid = img > 0
    return img.astype(np.float64) / 65535.0, valid


def _atomic_write_bytes(path: str, blob: bytes) -> None:
    tmp = path + ".tmp"
    try:
        with open(tmp, "wb") as fh:
            fh.write(blob)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoFailure(f"cannot write {path!r}: {exc}") from exc


# ---------------------------------------------------------------------------
# Pair manifest


STATUS_ACCEPTED = "accepted"
STATUS_TOO_SLOW = "too_slow"
STATUS_TOO_FAST = "too_fast"
STATUS_DUPLICATE = "duplicate"
STATUS_ERROR = "error"


@dataclass
class PairEntry:
    frame_a: str
    frame_b: str
    frame_gap: int
    flow_path: str | None
    status: str


@dataclass(frozen=True)
class PairSelectConfig:
    """Median-flow gate for candidate pairs.

    lo/hi are pixels of median flow magnitude; gap is the minimum index
    spacing between consecutive accepted frame_a values.  gap stays >= 3 so
    surviving depth maps come from frames at least 2 apart.
    """

    lo: float = 1.0
    hi: float = 30.0
    gap: int = 3

    def __post_init__(self) -> None:
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError("need 0 <= lo <= hi")
        if self.gap < 3:
            raise ValueError("dedup gap must be >= 3")


def select_pairs(
    frame_index: list[str],
    flow_stats_per_pair: list[float | None],
    cfg: PairSelectConfig = PairSelectConfig(),
) -> list[PairEntry]:
    """Label each consecutive candidate pair (i, i+1).

    A pair is accepted iff lo <= median flow magnitude <= hi; after an
    acceptance at index i the window up to i+gap yields 'duplicate' for
    in-range candidates.  Out-of-range candidates keep their too_slow or
    too_fast label even inside the window.  None/NaN stats mean the
    candidate could not be measured and yield 'error'.
    """
    if len(frame_index) < 2:
        raise EmptyIndex("need at least two frames to form a pair")
    n_candidates = len(frame_index) - 1
    if len(flow_stats_per_pair) != n_candidates:
        raise ValueError(
            f"expected {n_candidates} flow stats, got {len(flow_stats_per_pair)}"
        )

    entries: list[PairEntry] = []
    next_free = 0
    for i, median in enumerate(flow_stats_per_pair):
        if median is None or not math.isfinite(median):
            status = STATUS_ERROR
        elif median < cfg.lo:
            status = STATUS_TOO_SLOW
        elif median > cfg.hi:
            status = STATUS_TOO_FAST
        elif i < next_free:
            status = STATUS_DUPLICATE
        else:
            status = STATUS_ACCEPTED
            next_free = i + cfg.gap
        entries.append(
            PairEntry(
                frame_a=frame_index[i],
                frame_b=frame_index[i + 1],
                frame_gap=1,
                flow_path=None,
                status=status,
            )
        )
    return entries


def write_pair_manifest(entries: list[PairEntry], path: str) -> None:
    lines = [json.dumps(asdict(e), sort_keys=True) for e in entries]
    _atomic_write_bytes(path, ("\n".join(lines) + ("\n" if lines else "")).encode())


def read_pair_manifest(path: str) -> list[PairEntry]:
    entries = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if line:
                    entries.append(PairEntry(**json.loads(line)))
    except OSError as exc:
        raise IoFailure(f"cannot read manifest {path!r}: {exc}") from exc
    return entries
