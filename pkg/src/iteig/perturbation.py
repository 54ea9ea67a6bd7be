"""Continuity of spectral projections and eigenvalues in the contrast.

For contrasts m and p on the same grid and a fixed contour, the projector
difference obeys an explicit second-resolvent bound

    |P(p) - P(m)| <= |gamma| * q * Gamma(m)^2 / (1 - q * Gamma(m)),

with |gamma| = 2 pi radius the contour length, Gamma(m) the sup over the
contour of the resolvent norm, and q the perturbation size (for the
weighted eigenvalue pencil, q = ||p - m||_inf / delta^2 with
delta = min Re(1 + contrast):  the weight change enters through the inverse
weight on both sides).  The resolvent is measured as an operator from
L2 + L2 data into H2 + L2 states, where the H2 part uses the discrete
metric ||u||^2 + ||D2 u||^2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .contrast import Contrast
from .errors import ContourGrazesSpectrumError, InputError, PerturbationTooLargeError
from .grid import CollocationGrid
from .pencil import PencilBlocks, build_pencil
from .spectral import Contour, _node_factorizations, spectral_projector, eigs_in_contour

NORM_CONVENTION = "L2+L2 -> H2+L2"


@dataclass
class GammaEstimate:
    gamma_value: float
    contour: Contour
    norm_convention: str = NORM_CONVENTION


@dataclass
class ContinuityReport:
    """Measured projector shift against the explicit continuity bound.

    perturbation_size is the raw sup-norm contrast difference on the grid;
    the weighted route inflates it by 1/delta^2 inside the bound.
    max_principal_angle (radians, between the projector ranges) is a
    diagnostic with no tolerance attached.
    """

    perturbation_size: float
    measured_delta_P: float
    bound: float
    satisfied: bool | None
    rank_before: int
    rank_after: int
    gamma: float
    max_principal_angle: float


class _StateNorm:
    """Cholesky factors of the discrete input/output metrics."""

    def __init__(self, grid: CollocationGrid):
        w = grid.weights
        W = np.diag(w)
        G_u = W + grid.D2.T @ W @ grid.D2
        C = np.linalg.cholesky(G_u)  # lower, C C^T = G_u
        N = grid.n_nodes
        self.L_out = np.zeros((2 * N, 2 * N))
        self.L_out[:N, :N] = C.T
        self.L_out[N:, N:] = np.diag(np.sqrt(w))
        self.inv_sqrt_in = 1.0 / np.sqrt(np.concatenate([w, w]))

    def opnorm(self, T: np.ndarray) -> float:
        return float(np.linalg.norm(self.L_out @ (T * self.inv_sqrt_in[None, :]), 2))


def gamma_on_contour(
    pencil: PencilBlocks, contour: Contour, weighted: bool = True
) -> GammaEstimate:
    """Sup over quadrature nodes of the resolvent norm |||(A-lambda M)^{-1} M|||."""
    lus, Msel = _node_factorizations(
        pencil, contour, contour.n_quad, weighted, condition_cap=1e14
    )
    sn = _StateNorm(pencil.grid)
    worst = 0.0
    for lu in lus:
        T = sla.lu_solve(lu, Msel)
        worst = max(worst, sn.opnorm(T))
    return GammaEstimate(gamma_value=worst, contour=contour)


def _range_basis(P: np.ndarray, rank: int) -> np.ndarray:
    if rank == 0:
        return np.zeros((P.shape[0], 0))
    U, _, _ = np.linalg.svd(P)
    return U[:, :rank]


def projector_continuity(
    pencil_m: PencilBlocks,
    pencil_p: PencilBlocks,
    contour: Contour,
    weighted: bool = True,
    allow_large: bool = False,
) -> ContinuityReport:
    """Compare spectral projections of two contrasts on one grid.

    Raises PerturbationTooLargeError when the smallness condition
    q * Gamma < 1 fails, unless allow_large=True, in which case the
    measurement still runs and satisfied is None (bound not applicable).
    """
    if not np.array_equal(pencil_m.grid.nodes, pencil_p.grid.nodes):
        raise InputError("both pencils must share one grid")
    size = float(np.max(np.abs(pencil_p.contrast_on_grid - pencil_m.contrast_on_grid)))

    gam = gamma_on_contour(pencil_m, contour, weighted=weighted)
    q = size
    if weighted:
        delta = min(
            float(np.min((1.0 + pencil_m.contrast_on_grid).real)),
            float(np.min((1.0 + pencil_p.contrast_on_grid).real)),
        )
        if delta <= 0:
            raise InputError("weighted route needs Re(1 + contrast) > 0")
        q = size / delta**2

    small_ok = q * gam.gamma_value < 1.0
    if not small_ok and not allow_large:
        raise PerturbationTooLargeError(
            f"perturbation q={q:.3e} with Gamma={gam.gamma_value:.3e} violates "
            "q*Gamma < 1; the continuity bound does not apply"
        )

    proj_m = spectral_projector(pencil_m, contour, weighted=weighted)
    proj_p = spectral_projector(pencil_p, contour, weighted=weighted)
    sn = _StateNorm(pencil_m.grid)
    delta_P = sn.opnorm(proj_p.P - proj_m.P)

    length = 2.0 * np.pi * contour.radius
    if small_ok:
        bound = length * q * gam.gamma_value**2 / (1.0 - q * gam.gamma_value)
        satisfied: bool | None = bool(delta_P <= bound)
    else:
        bound = np.inf
        satisfied = None

    Bm = _range_basis(proj_m.P, proj_m.rank)
    Bp = _range_basis(proj_p.P, proj_p.rank)
    if Bm.shape[1] and Bp.shape[1]:
        angles = sla.subspace_angles(Bm, Bp)
        max_angle = float(angles.max()) if angles.size else 0.0
    else:
        max_angle = 0.0 if Bm.shape[1] == Bp.shape[1] else float(np.pi / 2)

    return ContinuityReport(
        perturbation_size=size,
        measured_delta_P=float(delta_P),
        bound=float(bound),
        satisfied=satisfied,
        rank_before=proj_m.rank,
        rank_after=proj_p.rank,
        gamma=gam.gamma_value,
        max_principal_angle=max_angle,
    )


@dataclass
class TrackStep:
    t: float
    eigenvalues: np.ndarray
    residuals: np.ndarray
    rank: int
    rank_changed: bool
    grazed: bool


@dataclass
class Trajectory:
    steps: list = field(default_factory=list)

    def rows(self) -> list:
        out = []
        for s in self.steps:
            if s.grazed:
                out.append([s.t, "", "", "", s.rank, "grazed"])
                continue
            if len(s.eigenvalues) == 0:
                out.append([s.t, "", "", "", s.rank, "empty"])
            for lam, r in zip(s.eigenvalues, s.residuals):
                out.append(
                    [
                        s.t,
                        float(lam.real),
                        float(lam.imag),
                        float(r),
                        s.rank,
                        "rank-change" if s.rank_changed else "",
                    ]
                )
        return out


def _match_order(prev: np.ndarray, vals: np.ndarray) -> np.ndarray:
    # greedy nearest-distance matching of new values to the previous step
    order = []
    used = set()
    for p in prev:
        best, best_d = -1, np.inf
        for j, v in enumerate(vals):
            if j in used:
                continue
            d = abs(v - p)
            if d < best_d:
                best, best_d = j, d
        if best >= 0:
            order.append(best)
            used.add(best)
    order.extend(j for j in range(len(vals)) if j not in used)
    return np.array(order, dtype=int)


def eigenvalue_tracking(
    contrast_family,
    steps: int,
    contour: Contour,
    grid: CollocationGrid,
    probe_rank: int = 8,
    seed: int = 0,
) -> Trajectory:
    """Follow eigenvalues inside a fixed contour along a contrast family.

    contrast_family maps t in [0, 1] to a Contrast.  Steps where the
    contour grazes the spectrum (an eigenvalue crossing the circle) are
    flagged and leave a gap in the trajectory; rank changes across steps
    are flagged as crossings.
    """
    if steps < 2:
        raise InputError("tracking needs at least 2 steps")
    traj = Trajectory()
    prev_vals: np.ndarray | None = None
    prev_rank: int | None = None
    for t in np.linspace(0.0, 1.0, steps):
        contrast = contrast_family(float(t))
        if not isinstance(contrast, Contrast):
            raise InputError("contrast_family must return Contrast instances")
        pencil = build_pencil(grid, contrast)
        try:
            res = eigs_in_contour(pencil, contour, probe_rank=probe_rank, seed=seed)
        except ContourGrazesSpectrumError:
            traj.steps.append(
                TrackStep(
                    t=float(t),
                    eigenvalues=np.zeros(0, dtype=complex),
                    residuals=np.zeros(0),
                    rank=-1,
                    rank_changed=False,
                    grazed=True,
                )
            )
            prev_vals = None
            prev_rank = None
            continue
        vals = res.eigenvalues
        resid = res.residuals
        if prev_vals is not None and len(prev_vals) and len(vals):
            order = _match_order(prev_vals, vals)
            vals = vals[order]
            resid = resid[order]
        rank = res.multiplicity_total
        traj.steps.append(
            TrackStep(
                t=float(t),
                eigenvalues=vals,
                residuals=resid,
                rank=rank,
                rank_changed=(prev_rank is not None and rank != prev_rank),
                grazed=False,
            )
        )
        prev_vals = vals
        prev_rank = rank
    return traj
