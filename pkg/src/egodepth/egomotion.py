"""Camera motion from a single dense flow field.

The model splits flow into a rotational part, which is depth-free and linear
in the angular velocity, and a translational part whose direction at each
pixel must point along (x*W - U, y*W - V) for translation (U, V, W).  Depth
only scales magnitudes, so the fit below compares directions: the objective
is a weighted mean of squared angles between the candidate radial field and
the rotation-compensated flow.

Minimization is nested in structure (best translation direction inside each
candidate rotation) and runs in three stages: a coarse scan over a 5^3
angular-velocity grid crossed with an icosahedral direction grid, a joint
simplex refinement of all five degrees of freedom, and a couple of trimmed
re-fits that drop pixels outside the inlier cone so independently moving
objects stop biasing the answer.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import geometry
from .errors import InsufficientTranslation
from .fields import MotionField
from .geometry import Intrinsics


@dataclass(frozen=True)
class EgomotionConfig:
    """Knobs for the direction fit and the rotation search.

    mag_floor_px is the flow magnitude (pixels) below which a pixel's vote
    is scaled down; min_support is the fraction of all pixels that must
    exceed it.  omega_max bounds each axis of the coarse rotation grid and
    max_evals caps any single simplex descent.
    """

    mag_floor_px: float = 0.15
    min_support: float = 0.01
    inlier_angle_deg: float = 25.0
    omega_max: float = 0.05
    max_evals: int = 2000
    refine_ftol: float = 1e-7
    degenerate_threshold: float = 0.5  # mean squared angle, rad^2
    robust_passes: int = 2
    # angular refinement stays inside these bounds around the manifold
    # fit: the angular objective rewards inflating rotation until it
    # swamps every angle, and on slow fields pixel noise flattens its
    # surface, so an unbounded simplex walks arbitrarily far from the
    # least-squares estimate, which is the one immune to both effects
    omega_trust: float = 0.003
    t_trust: float = 0.02  # radians of arc
    coarse_subsample: int = 1200
    # the true direction sits in a funnel whose objective grows like the
    # squared miss angle, while compromise fits bottom out near (5 deg)^2;
    # the scan grid must be fine enough for the funnel to outrank them
    coarse_sphere_level: int = 3
    fit_sphere_level: int = 3


@dataclass
class TranslationFit:
    t_dir: np.ndarray
    angular_residual: np.ndarray  # (H, W), NaN at invalid pixels
    objective: float


@dataclass
class EgomotionEstimate:
    omega: np.ndarray
    t_dir: np.ndarray
    trans_field: MotionField
    angular_residual: np.ndarray  # (H, W), NaN at invalid pixels
    inlier: np.ndarray  # (H, W) bool, False at invalid pixels
    objective_value: float
    converged: bool

    def to_record(self) -> dict:
        return {
            "omega": [float(c) for c in self.omega],
            "t_dir": [float(c) for c in self.t_dir],
            "objective": float(self.objective_value),
            "n_inliers": int(self.inlier.sum()),
        }


def rotational_field(omega: np.ndarray, intr: Intrinsics) -> MotionField:
    """Flow of a pure rotation, normalized units, every pixel valid."""
    x, y = intr.normalized_grid()
    u, v = geometry.rotational_flow_arrays(np.asarray(omega, dtype=np.float64), x, y)
    return MotionField(u, v)


@dataclass
class _PixelSet:
    """Valid-pixel samples flattened to 1-D, with the rotation basis cached."""

    x: np.ndarray
    y: np.ndarray
    fu: np.ndarray
    fv: np.ndarray
    rot_basis_u: np.ndarray = field(init=False)  # (3, n)
    rot_basis_v: np.ndarray = field(init=False)

    def __post_init__(self) -> None:
        # rotational flow is linear in omega: (u, v) = omega @ basis
        self.rot_basis_u = np.stack([self.x * self.y, -(1.0 + self.x * self.x), self.y])
        self.rot_basis_v = np.stack([1.0 + self.y * self.y, -self.x * self.y, -self.x])

    def subsample(self, n: int) -> "_PixelSet":
        if self.x.size <= n:
            return self
        idx = np.unique(np.round(np.linspace(0, self.x.size - 1, n)).astype(int))
        return _PixelSet(self.x[idx], self.y[idx], self.fu[idx], self.fv[idx])

    def rotation_removed(self, omega: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        om = np.asarray(omega, dtype=np.float64)
        return self.fu - om @ self.rot_basis_u, self.fv - om @ self.rot_basis_v


def _weights(tu: np.ndarray, tv: np.ndarray, mag_floor: float) -> np.ndarray:
    return np.minimum(np.hypot(tu, tv) / mag_floor, 1.0)


def _lts_mean(vals: np.ndarray, frac: float = 0.75) -> float:
    """Mean of the smallest frac of the values.

    A fixed-quantile trim keeps scores comparable across fits: every fit
    is charged for the same share of pixels, so ignoring part of the
    scene buys nothing, while a bounded fraction of contaminated pixels
    stays out of everyone's score.
    """
    if vals.size == 0:
        return math.pi**2
    k = max(1, int(frac * vals.size))
    return float(np.mean(np.partition(vals, k - 1)[:k]))


def _angles_to_direction(
    t: np.ndarray, x: np.ndarray, y: np.ndarray, tu: np.ndarray, tv: np.ndarray
) -> np.ndarray:
    du, dv = geometry.radial_direction_arrays(t, x, y)
    return geometry.angle_between(tu, tv, du, dv)


def _direction_objective(
    t: np.ndarray, px: _PixelSet, tu: np.ndarray, tv: np.ndarray, w: np.ndarray
) -> float:
    wsum = float(w.sum())
    if wsum <= 0.0:
        return math.pi**2
    ang = _angles_to_direction(t, px.x, px.y, tu, tv)
    return float((w * ang * ang).sum() / wsum)


def _grid_best_direction(
    dirs: np.ndarray, px: _PixelSet, tu: np.ndarray, tv: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, float]:
    """Pick the best direction over a fixed grid.

    Ranks with the cheaper 1 - cos(angle) score, which is monotone in the
    angle on [0, pi]; exact squared angles are reserved for refinement.
    """
    wsum = float(w.sum())
    if wsum <= 0.0:
        return dirs[0], math.pi**2
    fmag = np.hypot(tu, tv)
    # the dot product with the radial field is linear in (U, V, W)
    dot = dirs @ np.stack([-tu, -tv, tu * px.x + tv * px.y])
    du = px.x[None, :] * dirs[:, 2:3] - dirs[:, 0:1]
    dv = px.y[None, :] * dirs[:, 2:3] - dirs[:, 1:2]
    dmag = np.sqrt(du * du + dv * dv)
    denom = np.maximum(fmag[None, :] * dmag, 1e-300)
    cosang = np.clip(dot / denom, -1.0, 1.0)
    scores = ((1.0 - cosang) * w[None, :]).sum(axis=1)
    k = int(np.argmin(scores))
    return dirs[k].copy(), _direction_objective(dirs[k], px, tu, tv, w)


def _omega_for_direction(
    t: np.ndarray,
    px: _PixelSet,
    w: np.ndarray,
    omega_max: float,
    resid_floor: float = 0.0,
    trim_passes: int = 2,
) -> tuple[np.ndarray, float]:
    """Closed-form angular velocity that best explains the flow given t.

    With t fixed, flow minus rotation must be a per-pixel multiple of the
    radial direction d(p, t).  Projecting each pixel's residual
    perpendicular to d eliminates that free depth factor and leaves a
    weighted linear least-squares problem in omega, since the rotational
    field is linear in it.  Exact for noiseless consistent fields.  Each
    trim pass drops pixels whose squared residual exceeds nine times the
    median (plus resid_floor, which keeps exact fits from trimming on
    float dust), so a contaminated field cannot drag the solve.

    Returns the box-clipped omega and the weighted mean squared
    perpendicular residual over the kept pixels.  Unlike the angular
    objective, that residual is magnitude weighted and stays smooth in t
    near the focus of expansion, which makes it the screening score for
    candidate directions; the angular objective rises too steeply around
    its narrow funnel for a coarse grid to catch the true basin.
    """
    du, dv = geometry.radial_direction_arrays(t, px.x, px.y)
    dd = du * du + dv * dv
    ok = dd > 1e-30
    scale = np.where(ok, 1.0 / np.maximum(dd, 1e-300), 0.0)
    wts = w * ok

    def perp(au: np.ndarray, av: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        along = (au * du + av * dv) * scale
        return au - along * du, av - along * dv

    fu_p, fv_p = perp(px.fu, px.fv)
    basis = [perp(px.rot_basis_u[k], px.rot_basis_v[k]) for k in range(3)]
    m = np.empty((3, 3))
    b = np.empty(3)
    omega = np.zeros(3)
    rr = np.zeros_like(dd)
    for it in range(max(trim_passes, 0) + 1):
        for j in range(3):
            bju, bjv = basis[j]
            b[j] = float((wts * (bju * fu_p + bjv * fv_p)).sum())
            for k in range(j, 3):
                bku, bkv = basis[k]
                m[j, k] = m[k, j] = float((wts * (bju * bku + bjv * bkv)).sum())
        try:
            omega = np.linalg.solve(m + 1e-12 * np.eye(3), b)
        except np.linalg.LinAlgError:
            omega = np.zeros(3)
        omega = np.clip(omega, -omega_max, omega_max)
        ru = fu_p - omega[0] * basis[0][0] - omega[1] * basis[1][0] - omega[2] * basis[2][0]
        rv = fv_p - omega[0] * basis[0][1] - omega[1] * basis[1][1] - omega[2] * basis[2][1]
        rr = ru * ru + rv * rv
        if it < trim_passes:
            live = wts > 0.0
            if not live.any():
                break
            tau = 9.0 * float(np.median(rr[live])) + resid_floor
            wts = wts * (rr <= tau)
    # fixed-quantile score over the original support: the solve's own
    # trim must not pick what gets charged, or fitting a planar subset
    # exactly (the two-fold ambiguity of a single plane) would beat
    # explaining the whole scene
    residual = _lts_mean((w * ok) * rr)
    return omega, residual


def _refine_direction(
    t0: np.ndarray,
    px: _PixelSet,
    tu: np.ndarray,
    tv: np.ndarray,
    w: np.ndarray,
    max_evals: int,
    step: float = 0.05,
) -> tuple[np.ndarray, float, bool]:
    e1, e2 = geometry.tangent_basis(t0)

    def fun(p: np.ndarray) -> float:
        vec = t0 + p[0] * e1 + p[1] * e2
        return _direction_objective(vec / np.linalg.norm(vec), px, tu, tv, w)

    res = minimize(
        fun,
        np.zeros(2),
        method="Nelder-Mead",
        options=dict(
            maxfev=max_evals,
            fatol=1e-14,
            xatol=1e-9,
            initial_simplex=np.array([[0.0, 0.0], [step, 0.0], [0.0, step]]),
        ),
    )
    t = t0 + res.x[0] * e1 + res.x[1] * e2
    t /= np.linalg.norm(t)
    return t, float(res.fun), bool(res.success)


def _hemisphere_tiebreak(
    t: np.ndarray, obj: float, px: _PixelSet, tu: np.ndarray, tv: np.ndarray, w: np.ndarray
) -> tuple[np.ndarray, float]:
    """Prefer W >= 0 unless the mirrored direction is strictly better."""
    obj_neg = _direction_objective(-t, px, tu, tv, w)
    if obj_neg < obj - 1e-15:
        return -t, obj_neg
    if t[2] < 0 and obj_neg <= obj + 1e-15:
        return -t, obj_neg
    return t, obj


def _collect(flow: MotionField, intr: Intrinsics) -> tuple[_PixelSet, np.ndarray]:
    if flow.shape != (intr.height, intr.width):
        raise ValueError(f"flow shape {flow.shape} does not match intrinsics")
    x, y = intr.normalized_grid()
    valid = flow.valid & np.isfinite(flow.u) & np.isfinite(flow.v)
    return _PixelSet(x[valid], y[valid], flow.u[valid], flow.v[valid]), valid


def _check_support(flow: MotionField, px: _PixelSet, intr: Intrinsics, cfg: EgomotionConfig) -> float:
    mag_floor = cfg.mag_floor_px / intr.focal
    n_total = intr.width * intr.height
    n_fast = int((np.hypot(px.fu, px.fv) > mag_floor).sum())
    needed = max(1, math.ceil(cfg.min_support * n_total))
    if n_fast < needed:
        raise InsufficientTranslation(
            f"{n_fast} pixels above the magnitude floor, need {needed}"
        )
    return mag_floor


def estimate_translation_direction(
    trans_field: MotionField, intr: Intrinsics, cfg: EgomotionConfig = EgomotionConfig()
) -> TranslationFit:
    """Fit the translation direction to an already rotation-free field.

    Scans an icosahedral grid of unit directions, refines the winner on the
    tangent plane, and breaks the forward/backward tie toward W >= 0.
    """
    px, valid = _collect(trans_field, intr)
    mag_floor = _check_support(trans_field, px, intr, cfg)
    w = _weights(px.fu, px.fv, mag_floor)

    dirs = geometry.sphere_directions(cfg.fit_sphere_level)
    grid_px = px.subsample(20000)
    grid_w = _weights(grid_px.fu, grid_px.fv, mag_floor)
    t0, _ = _grid_best_direction(dirs, grid_px, grid_px.fu, grid_px.fv, grid_w)
    t, obj, _ = _refine_direction(t0, px, px.fu, px.fv, w, cfg.max_evals)
    t, obj = _hemisphere_tiebreak(t, obj, px, px.fu, px.fv, w)

    residual = np.full(trans_field.shape, np.nan)
    residual[valid] = _angles_to_direction(t, px.x, px.y, px.fu, px.fv)
    return TranslationFit(t_dir=t, angular_residual=residual, objective=obj)


def estimate_rotation(
    flow: MotionField, intr: Intrinsics, cfg: EgomotionConfig = EgomotionConfig()
) -> EgomotionEstimate:
    """Joint angular velocity and translation direction from one flow field.

    flow is in normalized units.  Returns the estimate with converged=False
    instead of raising when a refinement stage runs out of budget.
    """
    px_full, valid = _collect(flow, intr)
    mag_floor = _check_support(flow, px_full, intr, cfg)

    # stage 1: coarse scan over candidate directions on a pixel subsample.
    # For each direction the best-compensating angular velocity has a
    # closed form, so the scan walks the physically consistent manifold
    # of the joint space; a fixed omega lattice at feasible spacing
    # leaves rotation residue that can outscore the true basin on slow
    # radial fields.  Screening uses the least-squares residual, which
    # stays informative at grid resolution where the angular objective
    # already ranks compromise fits above a near miss of its funnel.
    px_sub = px_full.subsample(cfg.coarse_subsample)
    w_flow = _weights(px_sub.fu, px_sub.fv, mag_floor)
    resid_floor = 1e-4 * mag_floor * mag_floor
    dirs = geometry.sphere_directions(cfg.coarse_sphere_level)
    screened: list[tuple[float, np.ndarray, np.ndarray]] = []
    for t_cand in dirs:
        om, res = _omega_for_direction(
            t_cand, px_sub, w_flow, cfg.omega_max, resid_floor
        )
        screened.append((res, om, t_cand))
    screened.sort(key=lambda c: c[0])

    converged = True
    inlier_rad = math.radians(cfg.inlier_angle_deg)
    omega_cap = 1.2 * cfg.omega_max

    # effective trust bounds, tightened later once the fit residual gives
    # a noise estimate
    trust = {"omega": cfg.omega_trust, "t": cfg.t_trust}

    def joint_objective(p: np.ndarray, ctx: tuple) -> float:
        px, t_base, e1, e2, trim, omega_ref, t_ref = ctx
        vec = t_base + p[3] * e1 + p[4] * e2
        n = np.linalg.norm(vec)
        if n < 1e-12:
            return math.pi**2
        vec = vec / n
        tu, tv = px.rotation_removed(p[:3])
        wts = _weights(tu, tv, mag_floor)
        if trim is not None:
            wts = wts * trim
        obj = _direction_objective(vec, px, tu, tv, wts)
        # wall off the region outside the documented search box plus any
        # excursion far from the anchor; stiff enough that even the
        # steepest pull seen in practice leaks well under a milliradian
        excess = np.maximum(np.abs(p[:3]) - omega_cap, 0.0)
        penalty = float(excess @ excess)
        drift = np.maximum(np.abs(p[:3] - omega_ref) - trust["omega"], 0.0)
        penalty += float(drift @ drift)
        if t_ref is not None:
            arc = math.acos(min(max(float(vec @ t_ref), -1.0), 1.0))
            penalty += max(arc - trust["t"], 0.0) ** 2
        return obj + 1e6 * penalty

    def seed_trim(px: _PixelSet, omega: np.ndarray, t: np.ndarray) -> np.ndarray:
        tu, tv = px.rotation_removed(omega)
        ang = _angles_to_direction(t, px.x, px.y, tu, tv)
        keep = ang < inlier_rad
        if keep.sum() < max(3, int(0.05 * keep.size)):
            return np.ones(keep.size, dtype=bool)
        return keep

    def refine(
        px: _PixelSet,
        omega0: np.ndarray,
        t0: np.ndarray,
        trim: np.ndarray | None,
        omega_ref: np.ndarray,
        t_ref: np.ndarray | None,
        steps_omega: float,
        steps_t: float,
        maxfev: int,
    ) -> tuple[np.ndarray, np.ndarray, float, bool]:
        e1, e2 = geometry.tangent_basis(t0)
        p0 = np.concatenate([omega0, [0.0, 0.0]])
        simplex = [p0]
        deltas = [steps_omega] * 3 + [steps_t] * 2
        for i, d in enumerate(deltas):
            vertex = p0.copy()
            vertex[i] += d
            simplex.append(vertex)
        res = minimize(
            joint_objective,
            p0,
            args=((px, t0, e1, e2, trim, omega_ref, t_ref),),
            method="Nelder-Mead",
            options=dict(
                maxfev=maxfev,
                fatol=cfg.refine_ftol,
                xatol=1e-7,
                initial_simplex=np.array(simplex),
            ),
        )
        vec = t0 + res.x[3] * e1 + res.x[4] * e2
        return res.x[:3].copy(), vec / np.linalg.norm(vec), float(res.fun), bool(res.success)

    # stage 2: polish each leading seed on the least-squares manifold,
    # with omega conditioned out at every step, and keep the best score.
    # Vector errors average down over pixels even when per-pixel noise
    # has flattened the angular surface, so this fit stays accurate
    # exactly where the angular one loses its signal; it is also exact
    # on clean fields, and its fixed-quantile scores are comparable
    # across basins where noisy angular scores are not.
    def manifold_score(q: np.ndarray, ctx: tuple) -> float:
        t0, e1, e2 = ctx
        vec = t0 + q[0] * e1 + q[1] * e2
        n = np.linalg.norm(vec)
        if n < 1e-12:
            return math.pi**2
        return _omega_for_direction(
            vec / n, px_sub, w_flow, cfg.omega_max, resid_floor
        )[1]

    best_fit: tuple[float, np.ndarray] | None = None
    for _, om0, t0 in screened[:5]:
        e1_b, e2_b = geometry.tangent_basis(t0)
        fit = minimize(
            manifold_score,
            np.zeros(2),
            args=((t0, e1_b, e2_b),),
            method="Nelder-Mead",
            options=dict(
                maxfev=300,
                fatol=1e-14,
                xatol=1e-9,
                initial_simplex=np.array([[0.0, 0.0], [0.02, 0.0], [0.0, 0.02]]),
            ),
        )
        vec = t0 + fit.x[0] * e1_b + fit.x[1] * e2_b
        n = np.linalg.norm(vec)
        if n < 1e-12:
            continue
        t_i = vec / n
        # the manifold score is blind to the sign of t (the projector is
        # even in it), so orient each fit by the angular objective, which
        # separates the hemispheres by nearly pi at any real signal
        om_i, _ = _omega_for_direction(t_i, px_sub, w_flow, cfg.omega_max, resid_floor)
        tu, tv = px_sub.rotation_removed(om_i)
        wts = _weights(tu, tv, mag_floor)
        if _direction_objective(-t_i, px_sub, tu, tv, wts) < _direction_objective(
            t_i, px_sub, tu, tv, wts
        ):
            t_i = -t_i
        if best_fit is None or float(fit.fun) < best_fit[0]:
            best_fit = (float(fit.fun), t_i)
    t_m = best_fit[1]

    # stage 2c: repeat the manifold polish on the full pixel set.  The
    # fit is noise limited at this point, so the extra pixels buy back
    # the accuracy the screening subsample gave up.
    w_full = _weights(px_full.fu, px_full.fv, mag_floor)

    def manifold_score_full(q: np.ndarray, ctx: tuple) -> float:
        t0, e1, e2 = ctx
        vec = t0 + q[0] * e1 + q[1] * e2
        n = np.linalg.norm(vec)
        if n < 1e-12:
            return math.pi**2
        return _omega_for_direction(
            vec / n, px_full, w_full, cfg.omega_max, resid_floor
        )[1]

    e1_m, e2_m = geometry.tangent_basis(t_m)
    fit = minimize(
        manifold_score_full,
        np.zeros(2),
        args=((t_m, e1_m, e2_m),),
        method="Nelder-Mead",
        options=dict(
            maxfev=200,
            fatol=1e-14,
            xatol=1e-9,
            initial_simplex=np.array([[0.0, 0.0], [0.005, 0.0], [0.0, 0.005]]),
        ),
    )
    vec = t_m + fit.x[0] * e1_m + fit.x[1] * e2_m
    if np.linalg.norm(vec) > 1e-12:
        t_m = vec / np.linalg.norm(vec)
    g_min = max(float(fit.fun), 0.0)
    om_m, _ = _omega_for_direction(t_m, px_full, w_full, cfg.omega_max, resid_floor)

    # size the trust radii from the fit's own noise: roughly ten standard
    # errors of the least-squares estimate, so clean fields freeze the
    # anchor at the (already exact) manifold fit while noisy ones leave
    # the angular polish a statistically meaningful range
    tu_m, tv_m = px_full.rotation_removed(om_m)
    wsum = max(float(w_full.sum()), 1e-300)
    rms_mag = math.sqrt(
        float((w_full * (tu_m * tu_m + tv_m * tv_m)).sum()) / wsum
    )
    sigma_hat = math.sqrt(g_min)
    trust["t"] = float(
        np.clip(10.0 * sigma_hat / max(rms_mag, 1e-300) / math.sqrt(wsum), 1e-6, cfg.t_trust)
    )
    trust["omega"] = float(
        np.clip(10.0 * sigma_hat / math.sqrt(wsum), 1e-6, cfg.omega_trust)
    )

    # stage 3: full-resolution angular refinement, then re-trimmed fits
    # so the final estimate rests on the plain objective over pixels
    # consistent with it.  Every pass anchors to the manifold fit;
    # re-anchoring at intermediate fits would let the estimate creep
    # onto the swamped-rotation plateau one trust box per pass.
    omega, t = om_m, t_m
    trim = seed_trim(px_full, omega, t)
    omega, t, obj, ok1 = refine(
        px_full, omega, t, trim, om_m, t_m, 0.002, 0.008, cfg.max_evals
    )
    omega, t, obj, ok2 = refine(
        px_full, omega, t, trim, om_m, t_m, 0.0004, 0.0015, cfg.max_evals
    )
    converged &= ok1 and ok2

    for _ in range(cfg.robust_passes):
        tu, tv = px_full.rotation_removed(omega)
        ang = _angles_to_direction(t, px_full.x, px_full.y, tu, tv)
        # adaptive cut: exact inliers shed every outlier, noisy fields
        # fall back to the documented inlier cone
        tau = min(inlier_rad, max(3.0 * float(np.median(ang)), 1e-4))
        new_trim = ang < tau
        if new_trim.sum() < max(3, int(0.05 * trim.size)):
            break  # trimming would leave almost nothing; keep the plain fit
        trim = new_trim
        omega, t, obj, ok = refine(
            px_full, omega, t, trim, om_m, t_m, 0.0004, 0.0015, cfg.max_evals
        )
        converged &= ok

    tu, tv = px_full.rotation_removed(omega)
    wts = _weights(tu, tv, mag_floor) * trim
    t, obj = _hemisphere_tiebreak(t, obj, px_full, tu, tv, wts)

    med_mag = float(np.median(np.hypot(px_full.fu, px_full.fv))) if px_full.fu.size else 0.0
    if obj > cfg.degenerate_threshold and med_mag < 2.0 * mag_floor:
        raise InsufficientTranslation(
            f"objective {obj:.3f} with near-zero flow (median {med_mag:.2e})"
        )

    rot = rotational_field(omega, intr)
    trans_field = MotionField(flow.u - rot.u, flow.v - rot.v, flow.valid.copy())
    ang_full = _angles_to_direction(t, px_full.x, px_full.y, tu, tv)
    residual = np.full(flow.shape, np.nan)
    residual[valid] = ang_full
    inlier = np.zeros(flow.shape, dtype=bool)
    inlier[valid] = ang_full < inlier_rad

    return EgomotionEstimate(
        omega=omega,
        t_dir=t,
        trans_field=trans_field,
        angular_residual=residual,
        inlier=inlier,
        objective_value=obj,
        converged=converged,
    )
