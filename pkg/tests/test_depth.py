"""Depth recovery Z = |(x*W - U, y*W - V)| / |flow| and the percentile
encoding r(p) = #{Z(q) <= Z(p)} / n_valid with ties sharing the max rank.
"""

from __future__ import annotations

import numpy as np
import pytest

from egodepth.depth import recover_depth, to_relative
from egodepth.errors import DegenerateDirection, DimensionMismatch, NoValidPixels
from egodepth.fields import DepthMap, MotionField
from egodepth.geometry import Intrinsics, translational_flow_arrays
from egodepth.synth import CameraMotion, FrontoWall, GroundPlane, SceneSpec, render_depth, render_motion_field

INTR = Intrinsics(width=40, height=30, focal=25.0)
FORWARD = np.array([0.0, 0.0, 1.0])


def _translational(scene_depth: np.ndarray, t: np.ndarray, speed: float) -> MotionField:
    x, y = INTR.normalized_grid()
    u, v = translational_flow_arrays(t, speed, scene_depth, x, y)
    return MotionField(u, v)


def test_wall_depth_exact():
    field = _translational(np.full((30, 40), 10.0), FORWARD, 1.0)
    depth = recover_depth(field, FORWARD, INTR)
    assert depth.valid.sum() > 0
    assert np.abs(depth.z[depth.valid] - 10.0).max() <= 1e-9 * 10.0


def test_ground_plane_depth_exact():
    scene = SceneSpec(INTR, CameraMotion((0.0, 0.0, 1.0), 1.0), (GroundPlane(1.5),))
    gt = render_depth(scene)
    flow = render_motion_field(scene)
    depth = recover_depth(flow, FORWARD, INTR)
    ok = depth.valid
    assert ok.sum() > 100
    assert np.allclose(depth.z[ok], gt.z[ok], rtol=1e-12)


def test_foe_pixel_invalid_not_infinite():
    # forward motion: the focus of expansion sits at the principal point
    field = _translational(np.full((30, 40), 5.0), FORWARD, 1.0)
    depth = recover_depth(field, FORWARD, INTR)
    assert np.isfinite(depth.z).all()
    x, y = INTR.normalized_grid()
    at_center = np.hypot(x, y) * INTR.focal < 1.0
    assert not depth.valid[at_center & (field.magnitude() * INTR.focal < 0.3)].any()


def test_eps_radius_scales_exclusion():
    field = _translational(np.full((30, 40), 5.0), FORWARD, 1.0)
    tight = recover_depth(field, FORWARD, INTR, eps_px=0.3)
    loose = recover_depth(field, FORWARD, INTR, eps_px=3.0)
    assert loose.n_valid() < tight.n_valid()
    assert (loose.valid <= tight.valid).all()


def test_mask_restricts_output():
    field = _translational(np.full((30, 40), 5.0), FORWARD, 1.0)
    mask = np.zeros((30, 40), bool)
    mask[:, 20:] = True
    depth = recover_depth(field, FORWARD, INTR, mask=mask)
    assert not depth.valid[:, :20].any()


def test_direction_sign_does_not_change_depth():
    field = _translational(np.full((30, 40), 7.0), FORWARD, -1.0)
    depth = recover_depth(field, -FORWARD, INTR)
    assert np.allclose(depth.z[depth.valid], 7.0)


def test_unnormalized_direction_accepted():
    field = _translational(np.full((30, 40), 10.0), FORWARD, 1.0)
    a = recover_depth(field, FORWARD, INTR)
    b = recover_depth(field, FORWARD * 3.7, INTR)
    assert np.array_equal(a.z, b.z)
    assert np.array_equal(a.valid, b.valid)


def test_degenerate_direction_raises():
    field = _translational(np.full((30, 40), 10.0), FORWARD, 1.0)
    with pytest.raises(DegenerateDirection):
        recover_depth(field, np.zeros(3), INTR)


def test_shape_mismatch_raises():
    field = MotionField(np.zeros((4, 4)), np.zeros((4, 4)))
    with pytest.raises(DimensionMismatch):
        recover_depth(field, FORWARD, INTR)
    small = Intrinsics(width=4, height=4, focal=2.0)
    with pytest.raises(DimensionMismatch):
        recover_depth(field, FORWARD, small, mask=np.ones((3, 3), bool))


# ── to_relative ───────────────────────────────────────────────────────────


def _depth_row(vals, valid=None):
    z = np.asarray(vals, dtype=np.float64)[None, :]
    v = np.ones_like(z, bool) if valid is None else np.asarray(valid, bool)[None, :]
    return DepthMap(z=np.where(v, z, 0.0), valid=v)


def test_relative_simple_ranks():
    rel = to_relative(_depth_row([1.0, 2.0, 3.0, 4.0]))
    assert rel.r[0].tolist() == [0.25, 0.5, 0.75, 1.0]


def test_relative_constant_all_max_rank():
    rel = to_relative(_depth_row([2.0, 2.0, 2.0]))
    assert (rel.r == 1.0).all()


def test_relative_ties_share_max_rank():
    rel = to_relative(_depth_row([5.0, 5.0, 9.0]))
    assert rel.r[0].tolist() == [2.0 / 3.0, 2.0 / 3.0, 1.0]


def test_relative_ignores_invalid_pixels():
    rel = to_relative(_depth_row([1.0, 99.0, 2.0], valid=[True, False, True]))
    assert rel.r[0].tolist() == [0.5, 0.0, 1.0]
    assert rel.valid[0].tolist() == [True, False, True]


def test_relative_empty_raises():
    with pytest.raises(NoValidPixels):
        to_relative(DepthMap(z=np.zeros((2, 2)), valid=np.zeros((2, 2), bool)))


def test_relative_matches_bruteforce_fuzz():
    rng = np.random.default_rng(12)
    for _ in range(40):
        n = int(rng.integers(1, 30))
        vals = rng.choice([0.5, 1.0, 2.5, 4.0, 8.0], size=n)
        rel = to_relative(_depth_row(vals))
        brute = np.array([(vals <= v).sum() / n for v in vals])
        assert np.array_equal(rel.r[0], brute)


def test_relative_scale_invariance_fuzz():
    rng = np.random.default_rng(13)
    for _ in range(30):
        z = rng.uniform(0.5, 50.0, (8, 11))
        valid = rng.random((8, 11)) > 0.2
        if not valid.any():
            continue
        base = to_relative(DepthMap(z=z, valid=valid))
        for k in (0.1, 1.0, 7.0):
            scaled = to_relative(DepthMap(z=z * k, valid=valid))
            assert np.array_equal(base.r, scaled.r)


def test_relative_monotone_invariance_fuzz():
    rng = np.random.default_rng(14)
    transforms = (np.sqrt, np.log1p, lambda a: a**3, lambda a: 2.0 * a + 1.0)
    for _ in range(25):
        z = rng.uniform(0.5, 50.0, (6, 9))
        valid = rng.random((6, 9)) > 0.1
        base = to_relative(DepthMap(z=z, valid=valid))
        for f in transforms:
            mapped = to_relative(DepthMap(z=np.where(valid, f(z), 0.0), valid=valid))
            assert np.array_equal(base.r, mapped.r)


def test_relative_range_half_open():
    rng = np.random.default_rng(15)
    z = rng.uniform(1.0, 9.0, (5, 7))
    rel = to_relative(DepthMap(z=z, valid=np.ones((5, 7), bool)))
    rv = rel.r[rel.valid]
    assert rv.min() > 0.0
    assert rv.max() == 1.0


def test_relative_depth_of_recovery_is_scale_free():
    # fields that differ only by a positive factor give identical percentile
    # maps; lateral motion keeps the focus of expansion out of frame, so the
    # epsilon exclusion set is the same at every scale
    lateral = np.array([1.0, 0.0, 0.0])
    z = np.full((30, 40), 10.0)
    z[5:20, 10:30] = 4.0
    field = _translational(z, lateral, 2.0)
    base = to_relative(recover_depth(field, lateral, INTR))
    for k in (0.1, 7.0):
        rel = to_relative(recover_depth(field.scaled(k), lateral, INTR))
        assert np.array_equal(base.r, rel.r)
        assert np.array_equal(base.valid, rel.valid)


def test_foe_exclusion_tracks_field_scale():
    # with the focus of expansion in frame the epsilon threshold is absolute,
    # so a slower field loses more of the neighborhood around it
    z = np.full((30, 40), 5.0)
    fast = _translational(z, FORWARD, 1.0)
    slow = _translational(z, FORWARD, 0.05)
    assert recover_depth(slow, FORWARD, INTR).n_valid() < recover_depth(fast, FORWARD, INTR).n_valid()
