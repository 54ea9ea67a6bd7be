"""Contour-integral spectral projections and eigenvalue extraction.

For a circle C enclosing part of the spectrum of the pencil (A, M), the
spectral projection is the resolvent contour integral

    P = (1 / 2 pi i) oint_C (lambda M - A)^{-1} M  d lambda,

discretized with the midpoint-trapezoid rule on equispaced angles (spectral
accuracy for analytic integrands; conjugate-symmetric nodes keep P real for
real pencils).  Eigenvalues inside C are recovered from the first two probed
moments of the same integrand: probe columns V, moments A0 and A1, SVD
truncation of A0, then the small reduced eigenproblem.

Eigenvalues forced by the boundary conditions can be defective: an
eigenvalue of geometric multiplicity 2 can carry algebraic multiplicity 4,
which the reduction splits into a tight cluster of order sqrt(backward
error).  Clusters are therefore averaged (the mean cancels the leading
splitting error) and the representative eigenvector is re-converged by
inverse iteration at the cluster mean.  Spurious moment eigenvalues (rank
overestimation by the SVD cut) are dropped by a residual cap; genuine
eigenpairs here sit at residuals below 1e-10 while spurious ones stay above
1e-4, so the default cap of 1e-6 separates them by orders of magnitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from . import smalleig
from .errors import (
    ContourGrazesSpectrumError,
    InputError,
    ProbeRankSaturatedError,
    QuadratureNotConvergedError,
)
from .pencil import PencilBlocks, StatePair

DEFAULT_RANK_REL = 1e-8
DEFAULT_RANK_FLOOR = 1e-8
DEFAULT_RESIDUAL_CAP = 1e-6
DEFAULT_CLUSTER_TOL = 1e-4
DEFAULT_BOUNDARY_TOL = 1e-8
DEFAULT_CONDITION_CAP = 1e14
DEFAULT_MOMENT_FLOOR = 1e-9
DEFAULT_MOMENT_REL = 1e-6
# Grazing cannot be an absolute condition threshold: near a defective
# eigenvalue the resolvent grows like 1/dist^2 with a large non-normality
# constant, so healthy contours routinely show node conditions of 1e15 (a
# measured example: a node 0.8 away from a multiplicity-4 eigenvalue reads
# 2.6e15, while every benign node of the same contour reads ~1e11).  A node
# that actually lands on an eigenvalue is 11 orders above its siblings.
# Grazing is therefore flagged when one node is anomalously singular
# relative to the contour median, or catastrophically singular outright.
GRAZE_RATIO = 1e8
GRAZE_ABS = 1e18


@dataclass(frozen=True)
class Contour:
    """Circle in the complex shift plane with a quadrature order."""

    center: complex
    radius: float
    n_quad: int = 64

    def __post_init__(self):
        if self.radius <= 0:
            raise InputError("contour radius must be positive")
        if self.n_quad < 16 or self.n_quad % 2 != 0:
            raise InputError("n_quad must be an even integer >= 16")

    def nodes(self, n_quad: int | None = None) -> np.ndarray:
        nq = self.n_quad if n_quad is None else n_quad
        theta = 2.0 * np.pi * (np.arange(nq) + 0.5) / nq
        return self.center + self.radius * np.exp(1j * theta)

    def quad_weights(self, n_quad: int | None = None) -> np.ndarray:
        # absorbs d lambda / (2 pi i): w_j = r e^{i theta_j} / n_quad, so
        # P = sum_j w_j (lambda_j M - A)^{-1} M
        nq = self.n_quad if n_quad is None else n_quad
        theta = 2.0 * np.pi * (np.arange(nq) + 0.5) / nq
        return self.radius * np.exp(1j * theta) / nq

    def to_dict(self) -> dict:
        return {
            "center": [float(self.center.real), float(self.center.imag)],
            "radius": float(self.radius),
            "n_quad": int(self.n_quad),
        }


@dataclass
class SpectralProjection:
    """Discretized Riesz projection with its numerical rank."""

    P: np.ndarray = field(repr=False)
    rank: int
    singular_values: np.ndarray
    contour: Contour
    n_quad_used: int
    idempotency_residual: float
    norm: float


def _node_factorizations(
    pencil: PencilBlocks,
    contour: Contour,
    nq: int,
    weighted: bool,
    condition_cap: float,
):
    Msel = pencil.mass(weighted)
    out = []
    conds = []
    nodes = contour.nodes(nq)
    for lam in nodes:
        mat = lam * Msel - pencil.A
        anorm = float(np.linalg.norm(mat, 1))
        try:
            lu = sla.lu_factor(mat)
        except np.linalg.LinAlgError as exc:
            raise ContourGrazesSpectrumError(
                f"quadrature node {lam} is singular; move or resize the contour"
            ) from exc
        gecon = sla.get_lapack_funcs(("gecon",), (lu[0],))[0]
        rcond, info = gecon(lu[0], anorm, norm="1")
        if info != 0 or rcond == 0.0:
            raise ContourGrazesSpectrumError(
                f"quadrature node {lam} is numerically singular; move or "
                "resize the contour"
            )
        conds.append(1.0 / rcond)
        out.append(lu)
    conds = np.asarray(conds)
    worst = int(np.argmax(conds))
    anomaly = conds[worst] > GRAZE_RATIO * float(np.median(conds))
    if conds[worst] > GRAZE_ABS or (anomaly and conds[worst] > condition_cap):
        raise ContourGrazesSpectrumError(
            f"contour grazes the spectrum: condition {conds[worst]:.3e} at "
            f"quadrature node {nodes[worst]}; move or resize the contour"
        )
    return out, Msel


def _projector_once(pencil, contour, nq, weighted, condition_cap):
    lus, Msel = _node_factorizations(pencil, contour, nq, weighted, condition_cap)
    w = contour.quad_weights(nq)
    P = np.zeros_like(pencil.A)
    for wj, lu in zip(w, lus):
        P += wj * sla.lu_solve(lu, Msel)
    return P


def rank_from_singular_values(
    svals: np.ndarray,
    rel: float = DEFAULT_RANK_REL,
    floor: float = DEFAULT_RANK_FLOOR,
) -> int:
    if svals.size == 0 or svals[0] < floor:
        return 0
    return int(np.sum(svals > rel * svals[0]))


def spectral_projector(
    pencil: PencilBlocks,
    contour: Contour,
    weighted: bool = True,
    saturation_target: float = 1e-8,
    max_quad: int = 2048,
    rank_rel: float = DEFAULT_RANK_REL,
    rank_floor: float = DEFAULT_RANK_FLOOR,
    condition_cap: float = DEFAULT_CONDITION_CAP,
) -> SpectralProjection:
    """Quadrature projector, with the order doubled until it stabilizes.

    Doubling stops once the projector changes by less than saturation_target
    in spectral norm (relative to max(1, ||P||)).  Contours whose nodes come
    too close to an eigenvalue raise ContourGrazesSpectrumError.
    """
    nq = contour.n_quad
    P = _projector_once(pencil, contour, nq, weighted, condition_cap)
    while True:
        if 2 * nq > max_quad:
            raise QuadratureNotConvergedError(
                f"projector not stabilized at n_quad={nq}; an eigenvalue may "
                "be too close to the contour"
            )
        P2 = _projector_once(pencil, contour, 2 * nq, weighted, condition_cap)
        delta = np.linalg.norm(P2 - P, 2) / max(1.0, np.linalg.norm(P, 2))
        P = P2
        nq *= 2
        if delta <= saturation_target:
            break
    svals = sla.svdvals(P)
    pnorm = float(svals[0]) if svals.size else 0.0
    return SpectralProjection(
        P=P,
        rank=rank_from_singular_values(svals, rank_rel, rank_floor),
        singular_values=svals,
        contour=contour,
        n_quad_used=nq,
        idempotency_residual=float(np.linalg.norm(P @ P - P, 2)),
        norm=pnorm,
    )


def multiplicity(projection: SpectralProjection) -> int:
    """Total algebraic multiplicity enclosed by the contour."""
    return projection.rank


@dataclass
class EigenResult:
    """Eigenvalues inside one contour with refined eigenvectors.

    eigenvalues holds one entry per eigenvalue cluster (defective
    eigenvalues are reported once, with their cluster size in
    multiplicities).  multiplicity_total is the rank of the spectral
    projection over the same contour and counts algebraic multiplicity.
    boundary_flags marks eigenvalues within the boundary-ambiguity band of
    the contour circle.
    """

    eigenvalues: np.ndarray
    eigenvectors: list
    residuals: np.ndarray
    multiplicities: np.ndarray
    multiplicity_total: int
    boundary_flags: np.ndarray
    contour: Contour

    def to_dict(self) -> dict:
        return {
            "contour": self.contour.to_dict(),
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "residuals": [float(r) for r in self.residuals],
            "multiplicities": [int(m) for m in self.multiplicities],
            "multiplicity_total": int(self.multiplicity_total),
            "boundary_ambiguous": [bool(b) for b in self.boundary_flags],
        }


def pencil_residual(
    pencil: PencilBlocks, lam: complex, x: np.ndarray, weighted: bool = True
) -> float:
    Msel = pencil.mass(weighted)
    num = np.linalg.norm(pencil.A @ x - lam * (Msel @ x))
    den = np.linalg.norm(pencil.A @ x) + abs(lam) * np.linalg.norm(Msel @ x)
    return float(num / max(den, 1e-300))


def _refine_eigenpair(pencil, lam, x, weighted, steps=2):
    Msel = pencil.mass(weighted)
    try:
        lu = sla.lu_factor(pencil.A - lam * Msel)
    except np.linalg.LinAlgError:
        return x
    for _ in range(steps):
        y = sla.lu_solve(lu, Msel @ x)
        ny = np.linalg.norm(y)
        if not np.isfinite(ny) or ny == 0.0:
            return x
        x = y / ny
    return x


def _cluster_indices(vals: np.ndarray, tol: float) -> list[list[int]]:
    # union-find on relative proximity
    k = len(vals)
    parent = list(range(k))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(k):
        for j in range(i + 1, k):
            if abs(vals[i] - vals[j]) <= tol * max(1.0, abs(vals[i]), abs(vals[j])):
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj
    groups: dict[int, list[int]] = {}
    for i in range(k):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def eigs_in_contour(
    pencil: PencilBlocks,
    contour: Contour,
    probe_rank: int = 8,
    seed: int = 0,
    weighted: bool = True,
    residual_cap: float = DEFAULT_RESIDUAL_CAP,
    cluster_tol: float = DEFAULT_CLUSTER_TOL,
    rank_rel: float = DEFAULT_RANK_REL,
    boundary_tol: float = DEFAULT_BOUNDARY_TOL,
    condition_cap: float = DEFAULT_CONDITION_CAP,
    moment_floor: float = DEFAULT_MOMENT_FLOOR,
) -> EigenResult:
    """Moment-based extraction of all eigenvalues inside the contour.

    probe_rank must exceed the total multiplicity inside; if every probe
    singular value survives truncation the probe is saturated and the call
    fails rather than silently truncating the spectrum.  Moments are
    quadrature noise when the top singular value stays below moment_floor
    or below DEFAULT_MOMENT_REL times the largest per-node sample: rounding
    noise scales with the resolvent samples (an empty tile cancels to about
    1e-8 of the sample size, an enclosed eigenvalue leaves order one), so
    the empty test must be relative as well as absolute.
    """
    if probe_rank < 1:
        raise InputError("probe_rank must be positive")
    dim = pencil.dim
    nq = contour.n_quad
    lus, Msel = _node_factorizations(pencil, contour, nq, weighted, condition_cap)
    w = contour.quad_weights(nq)
    lams = contour.nodes(nq)

    rng = np.random.default_rng(seed)
    V = rng.standard_normal((dim, probe_rank)) + 1j * rng.standard_normal(
        (dim, probe_rank)
    )

    A0 = np.zeros((dim, probe_rank), dtype=complex)
    A1 = np.zeros((dim, probe_rank), dtype=complex)
    P = np.zeros((dim, dim), dtype=complex)
    node_scale = 0.0
    for wj, lamj, lu in zip(w, lams, lus):
        S = sla.lu_solve(lu, Msel)
        T = wj * (S @ V)
        node_scale = max(node_scale, np.linalg.norm(T))
        A0 += T
        A1 += lamj * T
        P += wj * S

    p_svals = sla.svdvals(P)
    mult_total = rank_from_singular_values(p_svals, rank_rel)

    U, s, Wh = np.linalg.svd(A0, full_matrices=False)
    if s.size == 0 or s[0] < max(moment_floor, DEFAULT_MOMENT_REL * node_scale):
        return EigenResult(
            eigenvalues=np.zeros(0, dtype=complex),
            eigenvectors=[],
            residuals=np.zeros(0),
            multiplicities=np.zeros(0, dtype=int),
            multiplicity_total=0,
            boundary_flags=np.zeros(0, dtype=bool),
            contour=contour,
        )
    k = int(np.sum(s > rank_rel * s[0]))
    if k == probe_rank:
        raise ProbeRankSaturatedError(
            f"all {probe_rank} probe singular values survive truncation; "
            "increase probe_rank"
        )
    Uk = U[:, :k]
    B = (Uk.conj().T @ A1) @ Wh[:k, :].conj().T @ np.diag(1.0 / s[:k])
    vals, Y = smalleig.eig(B)
    X = Uk @ Y

    keep = []
    for j, lam in enumerate(vals):
        dist = abs(lam - contour.center)
        ambiguous = abs(dist - contour.radius) <= boundary_tol * contour.radius
        if dist < contour.radius or ambiguous:
            keep.append((lam, X[:, j], ambiguous))
    if not keep:
        return EigenResult(
            eigenvalues=np.zeros(0, dtype=complex),
            eigenvectors=[],
            residuals=np.zeros(0),
            multiplicities=np.zeros(0, dtype=int),
            multiplicity_total=mult_total,
            boundary_flags=np.zeros(0, dtype=bool),
            contour=contour,
        )

    kept_vals = np.array([t[0] for t in keep])
    out_vals, out_vecs, out_res, out_mult, out_flag = [], [], [], [], []
    for idx in _cluster_indices(kept_vals, cluster_tol):
        mean = complex(np.mean(kept_vals[idx]))
        raw = [(pencil_residual(pencil, mean, keep[i][1], weighted), i) for i in idx]
        raw.sort(key=lambda t: t[0])
        x = keep[raw[0][1]][1]
        x = _refine_eigenpair(pencil, mean, x, weighted)
        res = pencil_residual(pencil, mean, x, weighted)
        if res > residual_cap:
            continue  # spurious moment eigenvalue
        out_vals.append(mean)
        out_vecs.append(StatePair.from_stack(x))
        out_res.append(res)
        out_mult.append(len(idx))
        out_flag.append(any(keep[i][2] for i in idx))

    order = np.lexsort(
        (np.array([z.imag for z in out_vals]), np.array([z.real for z in out_vals]))
    ) if out_vals else np.zeros(0, dtype=int)
    return EigenResult(
        eigenvalues=np.array([out_vals[i] for i in order], dtype=complex),
        eigenvectors=[out_vecs[i] for i in order],
        residuals=np.array([out_res[i] for i in order]),
        multiplicities=np.array([out_mult[i] for i in order], dtype=int),
        multiplicity_total=mult_total,
        boundary_flags=np.array([out_flag[i] for i in order], dtype=bool),
        contour=contour,
    )


def sweep_real_axis(
    pencil: PencilBlocks,
    lam_min: float,
    lam_max: float,
    radius: float = 16.0,
    step_factor: float = 1.6,
    n_quad: int = 64,
    probe_rank: int = 12,
    seed: int = 0,
    dedup_tol: float = 1e-6,
    **kwargs,
):
    """Tile a real interval with overlapping contours and merge the results.

    Returns (eigenvalues, residuals, multiplicities) sorted by real part,
    deduplicated across overlapping tiles at relative tolerance dedup_tol.

    Cluster sizes from a single tile undercount when the tile circle passes
    near an eigenvalue (the degraded quadrature splits the cluster and the
    ghost filter drops the strays).  A tile is therefore trusted only when
    its cluster sizes sum to its projector rank, and the merge prefers
    consistent tiles, then larger multiplicity, then smaller residual.  The
    tiling overlap (step 1.6 r against diameter 2 r) makes every point of
    the interval interior to some tile, so a degraded tile never carries an
    eigenvalue alone.
    """
    if lam_max <= lam_min:
        raise InputError("need lam_min < lam_max")
    centers = []
    c = lam_min
    while c < lam_max + radius:
        centers.append(c)
        c += step_factor * radius
    # entry: (lam, residual, mult, tile_consistent)
    found: list[tuple[complex, float, int, bool]] = []

    def better(a, b):
        # consistent tile first, then larger multiplicity, then residual
        return (not a[3], -a[2], a[1]) < (not b[3], -b[2], b[1])

    for c0 in centers:
        res = eigs_in_contour(
            pencil,
            Contour(complex(c0), radius, n_quad),
            probe_rank=probe_rank,
            seed=seed,
            **kwargs,
        )
        consistent = int(res.multiplicities.sum()) == res.multiplicity_total
        for lam, r, m in zip(res.eigenvalues, res.residuals, res.multiplicities):
            cand = (lam, r, int(m), consistent)
            dup = False
            for i, old in enumerate(found):
                if abs(lam - old[0]) <= dedup_tol * max(1.0, abs(lam), abs(old[0])):
                    dup = True
                    if better(cand, old):
                        found[i] = cand
                    break
            if not dup:
                found.append(cand)
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    vals = np.array([t[0] for t in found], dtype=complex)
    res = np.array([t[1] for t in found])
    mult = np.array([t[2] for t in found], dtype=int)
    return vals, res, mult
