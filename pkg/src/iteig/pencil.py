"""Square discretization of the block operator pencil.

The continuum problem couples two fields on [a, b]:

    (Delta - lambda) u + m v = f,   u with clamped values and slopes,
    (Delta - lambda) v       = g,   v with no boundary conditions,

with the weighted eigenvalue form replacing lambda by lambda * diag(1+m, 1).
u carries four boundary conditions and v none; the two missing conditions on
v are exactly what compensates the two extra ones on u, so the square
closure collocates each field equation at the n-1 interior nodes only and
adds the four boundary rows for u.  Total rows: (n-1) + 4 + (n-1) = 2n + 2,
matching the 2(n+1) unknowns (u and v values at all nodes).  v's endpoint
values are unconstrained degrees of freedom; that slack is what makes the
coupling block of the resolvent nonzero.

Unknown ordering: u at all nodes, then v at all nodes.
Row ordering: u equations (interior), 4 boundary rows, v equations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contrast import Contrast
from .grid import CollocationGrid


@dataclass
class StatePair:
    """A pair of fields (u, v) sampled at all grid nodes."""

    u: np.ndarray
    v: np.ndarray

    def stack(self) -> np.ndarray:
        return np.concatenate([self.u, self.v])

    @classmethod
    def from_stack(cls, x: np.ndarray) -> "StatePair":
        half = x.size // 2
        return cls(u=x[:half].copy(), v=x[half:].copy())


@dataclass
class PencilBlocks:
    """Dense matrices (A, M) of the pencil A - lambda*M plus index maps.

    M is the weighted mass (diag(1+m) against u equations, identity against
    v equations, zero on boundary rows); M_identity is the unweighted
    variant with ones in place of 1+m, used by the resolvent-side checks.
    """

    A: np.ndarray = field(repr=False)
    M: np.ndarray = field(repr=False)
    u_rows: np.ndarray
    bc_rows: np.ndarray
    v_rows: np.ndarray
    u_cols: np.ndarray
    v_cols: np.ndarray
    contrast_on_grid: np.ndarray = field(repr=False)
    grid: CollocationGrid = field(repr=False)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def M_identity(self) -> np.ndarray:
        Mid = np.zeros_like(self.M)
        interior = self.grid.interior
        Mid[self.u_rows, self.u_cols[interior]] = 1.0
        Mid[self.v_rows, self.v_cols[interior]] = 1.0
        return Mid

    def mass(self, weighted: bool) -> np.ndarray:
        return self.M if weighted else self.M_identity

    def rhs(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        """Right-hand side with (f, g) restricted to interior rows.

        f and g are full-node vectors; boundary rows are forced to zero.
        """
        b = np.zeros(self.dim, dtype=complex)
        interior = self.grid.interior
        b[self.u_rows] = np.asarray(f)[interior]
        b[self.v_rows] = np.asarray(g)[interior]
        return b

    def dump(self, path) -> None:
        np.savez(
            path,
            A=self.A,
            M=self.M,
            u_rows=self.u_rows,
            bc_rows=self.bc_rows,
            v_rows=self.v_rows,
            contrast_on_grid=self.contrast_on_grid,
            nodes=self.grid.nodes,
        )


def build_pencil(grid: CollocationGrid, contrast: Contrast) -> PencilBlocks:
    n = grid.n
    N = grid.n_nodes
    dim = 2 * n + 2
    m = np.asarray(contrast(grid.nodes), dtype=complex)

    u_cols = np.arange(N)
    v_cols = np.arange(N, 2 * N)
    u_rows = np.arange(0, n - 1)
    bc_rows = np.arange(n - 1, n + 3)
    v_rows = np.arange(n + 3, dim)
    interior = grid.interior

    A = np.zeros((dim, dim), dtype=complex)
    M = np.zeros((dim, dim), dtype=complex)

    # u equations at interior nodes: D2 u + m v
    A[np.ix_(u_rows, u_cols)] = grid.D2[interior, :]
    A[u_rows, v_cols[interior]] += m[interior]
    M[u_rows, u_cols[interior]] = 1.0 + m[interior]

    # boundary rows: u(a) = u(b) = u'(a) = u'(b) = 0
    A[bc_rows[0], u_cols[0]] = 1.0
    A[bc_rows[1], u_cols[N - 1]] = 1.0
    A[bc_rows[2], u_cols] = grid.D1[0, :]
    A[bc_rows[3], u_cols] = grid.D1[N - 1, :]

    # v equations at interior nodes: D2 v (maximal domain, no bc rows)
    A[np.ix_(v_rows, v_cols)] = grid.D2[interior, :]
    M[v_rows, v_cols[interior]] = 1.0

    return PencilBlocks(
        A=A,
        M=M,
        u_rows=u_rows,
        bc_rows=bc_rows,
        v_rows=v_rows,
        u_cols=u_cols,
        v_cols=v_cols,
        contrast_on_grid=m,
        grid=grid,
    )


def apply_pencil(pencil: PencilBlocks, lam: complex, state: StatePair):
    """Residual rows of (A - lambda M) applied to a state.

    Returns (residual_f, residual_g, bc_residual): the u-equation residual
    at interior nodes, the v-equation residual at interior nodes, and the
    four boundary-condition values of u.  The weighted mass is used, since
    that is the eigenvalue form; pass states built for that convention.
    """
    x = state.stack()
    r = pencil.A @ x - lam * (pencil.M @ x)
    return r[pencil.u_rows], r[pencil.v_rows], r[pencil.bc_rows]
