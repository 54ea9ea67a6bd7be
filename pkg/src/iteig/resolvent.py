"""Resolvent of the pencil: factorization, block extraction, identities.

For invertible shifts the solve map (f, g) -> (u, v) decomposes into four
blocks

    u = R11 f + R12 g,      v = R21 f + R22 g,

where the data live at interior nodes and the states at all nodes.  The
upper-triangular-plus-compact structure shows up numerically: R21 maps onto
the two-dimensional slack of the v field (exact rank <= 2), R11 and R22
decay like 1/lambda in operator norm, R12 like 1/lambda^2.

The factorization identity relates the weighted and unweighted pencils at a
real shift lambda0:

    A - lambda0*M = (A - lambda0*Mid) @ (I - lambda0 * (A - lambda0*Mid)^{-1} Mdiff)

with Mdiff = M - Mid supported on the u rows.  It is verified here in
extended precision (x86 80-bit) because at lambda0 ~ 1e4 the double
precision evaluation floor of both sides already exceeds 1e-8.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .contrast import CutoffFunction
from .errors import NearSingularError
from .pencil import PencilBlocks, StatePair

DEFAULT_CONDITION_CAP = 1e14


@dataclass
class Factorization:
    """LU factorization of A - lambda*M with a condition estimate."""

    pencil: PencilBlocks
    lam: complex
    weighted: bool
    lu: tuple = field(repr=False)
    cond_estimate: float

    def solve_raw(self, b: np.ndarray) -> np.ndarray:
        return sla.lu_solve(self.lu, b)


def _rcond_from_lu(lu_piv, anorm: float) -> float:
    gecon = sla.get_lapack_funcs(("gecon",), (lu_piv[0],))[0]
    rcond, info = gecon(lu_piv[0], anorm, norm="1")
    if info != 0:
        return 0.0
    return float(rcond)


def factorize(
    pencil: PencilBlocks,
    lam: complex,
    weighted: bool = False,
    condition_cap: float | None = DEFAULT_CONDITION_CAP,
) -> Factorization:
    """LU-factor A - lambda*M (unweighted mass by default).

    Raises NearSingularError when the estimated condition number exceeds
    condition_cap, which almost always means lambda sits at (or numerically
    near) an eigenvalue of the pencil.  Pass condition_cap=None to skip the
    gate and only record the estimate.
    """
    mat = pencil.A - lam * pencil.mass(weighted)
    anorm = float(np.linalg.norm(mat, 1))
    try:
        lu = sla.lu_factor(mat.astype(complex))
    except np.linalg.LinAlgError as exc:
        raise NearSingularError(
            f"pencil factorization failed at lambda={lam}: {exc}", cond=np.inf
        ) from exc
    rcond = _rcond_from_lu(lu, anorm)
    cond = np.inf if rcond == 0.0 else 1.0 / rcond
    if condition_cap is not None and cond > condition_cap:
        raise NearSingularError(
            f"condition estimate {cond:.3e} exceeds cap at lambda={lam}; "
            "lambda is (or is numerically near) an eigenvalue of the pencil",
            cond=cond,
        )
    return Factorization(
        pencil=pencil, lam=lam, weighted=weighted, lu=lu, cond_estimate=cond
    )


def solve(fac: Factorization, f: np.ndarray, g: np.ndarray) -> StatePair:
    """Apply the resolvent to data (f, g) given at all nodes.

    Only the interior values of f and g enter (boundary rows are forced to
    zero, matching the square closure of the pencil).
    """
    b = fac.pencil.rhs(f, g)
    return StatePair.from_stack(fac.solve_raw(b))


@dataclass
class ResolventBlocks:
    """The four solve-map blocks at a fixed shift, plus cutoff variants.

    Columns are indexed by interior nodes (data side), rows by all nodes
    (state side).  phi_R21 and phi_R22 are the rows premultiplied by the
    boundary cutoff phi.
    """

    lam: complex
    R11: np.ndarray = field(repr=False)
    R12: np.ndarray = field(repr=False)
    R21: np.ndarray = field(repr=False)
    R22: np.ndarray = field(repr=False)
    phi_R21: np.ndarray = field(repr=False)
    phi_R22: np.ndarray = field(repr=False)


def extract_blocks(
    pencil: PencilBlocks,
    lam: complex,
    cutoff: CutoffFunction,
    weighted: bool = False,
) -> ResolventBlocks:
    """Assemble the four resolvent blocks column by column."""
    fac = factorize(pencil, lam, weighted=weighted)
    N = pencil.grid.n_nodes
    interior = pencil.grid.interior
    ni = interior.size

    B = np.zeros((pencil.dim, 2 * ni), dtype=complex)
    B[pencil.u_rows, np.arange(ni)] = 1.0
    B[pencil.v_rows, ni + np.arange(ni)] = 1.0
    X = fac.solve_raw(B)

    U = X[:N, :]
    V = X[N:, :]
    phi = cutoff(pencil.grid.nodes)
    return ResolventBlocks(
        lam=lam,
        R11=U[:, :ni],
        R12=U[:, ni:],
        R21=V[:, :ni],
        R22=V[:, ni:],
        phi_R21=phi[:, None] * V[:, :ni],
        phi_R22=phi[:, None] * V[:, ni:],
    )


def block_identity_residual(
    pencil: PencilBlocks, blocks: ResolventBlocks, weighted: bool = False
) -> float:
    """Max deviation of (A - lambda M) @ [blocks] from identity on data rows."""
    ni = pencil.grid.interior.size
    X = np.vstack(
        [
            np.hstack([blocks.R11, blocks.R12]),
            np.hstack([blocks.R21, blocks.R22]),
        ]
    )
    R = (pencil.A - blocks.lam * pencil.mass(weighted)) @ X
    expected = np.zeros_like(R)
    expected[pencil.u_rows, np.arange(ni)] = 1.0
    expected[pencil.v_rows, ni + np.arange(ni)] = 1.0
    return float(np.max(np.abs(R - expected)))


def weighted_opnorm(T: np.ndarray, w_out: np.ndarray, w_in: np.ndarray) -> float:
    """Operator norm between quadrature-weighted L2 spaces."""
    S = np.sqrt(w_out)[:, None] * T / np.sqrt(w_in)[None, :]
    return float(np.linalg.norm(S, 2))


def weighted_singular_values(
    T: np.ndarray, w_out: np.ndarray, w_in: np.ndarray
) -> np.ndarray:
    S = np.sqrt(w_out)[:, None] * T / np.sqrt(w_in)[None, :]
    return sla.svdvals(S)


def _solve_extended(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    # Gaussian elimination with partial pivoting in clongdouble.  LAPACK has
    # no extended-precision path, and this identity check needs the extra
    # bits; dims here are a few hundred at most.
    A = A.astype(np.clongdouble).copy()
    B = B.astype(np.clongdouble).copy()
    n = A.shape[0]
    for k in range(n):
        p = k + int(np.argmax(np.abs(A[k:, k])))
        if A[p, k] == 0:
            raise NearSingularError("singular matrix in extended precision solve")
        if p != k:
            A[[k, p]] = A[[p, k]]
            B[[k, p]] = B[[p, k]]
        mult = A[k + 1 :, k] / A[k, k]
        A[k + 1 :, k:] -= np.outer(mult, A[k, k:])
        B[k + 1 :] -= np.outer(mult, B[k])
    X = np.zeros_like(B)
    for k in range(n - 1, -1, -1):
        X[k] = (B[k] - A[k, k + 1 :] @ X[k + 1 :]) / A[k, k]
    return X


def verify_factorization_identity(pencil: PencilBlocks, lambda0: float) -> float:
    """Entrywise residual of the weighted/unweighted factorization identity.

    Both sides are assembled in extended precision; the return value is the
    maximum absolute entry of their difference.
    """
    Aw = pencil.A.astype(np.clongdouble)
    Mid = pencil.M_identity.astype(np.clongdouble)
    Mdiff = (pencil.M - pencil.M_identity).astype(np.clongdouble)
    lam0 = np.clongdouble(lambda0)

    Au = Aw - lam0 * Mid
    X = _solve_extended(Au, Mdiff)
    lhs = Au @ (np.eye(pencil.dim, dtype=np.clongdouble) - lam0 * X)
    rhs = Aw - lam0 * (Mid + Mdiff)
    return float(np.max(np.abs(lhs - rhs)))


def adjoint_duality_defect(pencil: PencilBlocks, lam: complex) -> float:
    """Diagnostic only: relative defect of the formal adjoint relation.

    The continuum adjoint of the unweighted pencil swaps the two fields and
    conjugates the contrast.  Collocation with one-sided boundary rows does
    not reproduce this as an exact matrix identity; the defect is reported
    so drift can be tracked, with no tolerance attached.
    """
    P = pencil.A - lam * pencil.M_identity
    swap = np.zeros((pencil.dim, pencil.dim))
    half = pencil.dim // 2
    swap[:half, half:] = np.eye(half)
    swap[half:, :half] = np.eye(half)
    Q = swap @ np.conj(P) @ swap
    return float(np.linalg.norm(P.conj().T - Q) / np.linalg.norm(P))
