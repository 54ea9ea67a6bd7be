"""Resolvent factorization, block extraction, and the factorization identity."""

import numpy as np
import pytest
import scipy.linalg as sla

from iteig import Contrast, build_pencil
from iteig.errors import NearSingularError
from iteig.resolvent import (
    adjoint_duality_defect,
    block_identity_residual,
    extract_blocks,
    factorize,
    solve,
    verify_factorization_identity,
    weighted_opnorm,
    weighted_singular_values,
    _solve_extended,
)


def test_factorize_at_resolvent_point(pencil3_64):
    fac = factorize(pencil3_64, 100.0)
    assert fac.cond_estimate < 1e12
    assert np.isfinite(fac.cond_estimate)


def test_factorize_rejects_eigenvalue(pencil3_64):
    with pytest.raises(NearSingularError) as exc:
        factorize(pencil3_64, -np.pi**2, weighted=True)
    assert exc.value.cond > 1e14


def test_condition_cap_none_skips_gate(pencil3_64):
    fac = factorize(
        pencil3_64, -np.pi**2 + 1e-9, weighted=True, condition_cap=None
    )
    assert fac.cond_estimate > 1e14


def test_solve_matches_direct_solve(pencil3_64, grid64):
    rng = np.random.default_rng(3)
    f = rng.standard_normal(grid64.n_nodes)
    g = rng.standard_normal(grid64.n_nodes)
    fac = factorize(pencil3_64, 250.0)
    st = solve(fac, f, g)
    direct = np.linalg.solve(
        pencil3_64.A - 250.0 * pencil3_64.M_identity, pencil3_64.rhs(f, g)
    )
    np.testing.assert_allclose(st.stack(), direct, atol=1e-10)


def test_solution_satisfies_boundary_conditions(pencil3_64, grid64):
    rng = np.random.default_rng(5)
    f = rng.standard_normal(grid64.n_nodes)
    g = rng.standard_normal(grid64.n_nodes)
    st = solve(factorize(pencil3_64, 400.0), f, g)
    assert abs(st.u[0]) < 1e-10
    assert abs(st.u[-1]) < 1e-10
    assert abs((grid64.D1 @ st.u)[0]) < 1e-7
    assert abs((grid64.D1 @ st.u)[-1]) < 1e-7


class TestBlocks:
    def test_identity_residual(self, pencil3_64, cutoff):
        blocks = extract_blocks(pencil3_64, 1e3, cutoff)
        assert block_identity_residual(pencil3_64, blocks) < 1e-9

    def test_block_shapes(self, pencil3_64, grid64, cutoff):
        blocks = extract_blocks(pencil3_64, 1e3, cutoff)
        n_int = grid64.interior.size
        assert blocks.R11.shape == (grid64.n_nodes, n_int)
        assert blocks.phi_R21.shape == (grid64.n_nodes, n_int)

    def test_r21_has_rank_two(self, pencil3_64, grid64, cutoff):
        """The v-from-f map carries exactly the two slack directions."""
        blocks = extract_blocks(pencil3_64, 1e3, cutoff)
        s = weighted_singular_values(
            blocks.R21, grid64.weights, grid64.weights[grid64.interior]
        )
        assert s[1] / s[0] > 1e-8
        assert s[2] / s[0] < 1e-12

    def test_cutoff_kills_boundary_rows(self, pencil3_64, grid64, cutoff):
        blocks = extract_blocks(pencil3_64, 1e3, cutoff)
        phi = cutoff(grid64.nodes)
        edge = np.abs(phi) < 1e-14
        np.testing.assert_array_equal(blocks.phi_R21[edge, :], 0.0)


def test_weighted_opnorm_against_gram_eigenproblem(grid48):
    """Cross-check: sup ||Tx||_w / ||x||_w solves a generalized Gram problem."""
    rng = np.random.default_rng(11)
    T = rng.standard_normal((grid48.n_nodes, grid48.n_nodes))
    w = grid48.weights
    direct = weighted_opnorm(T, w, w)
    G = T.T @ np.diag(w) @ T
    evals = sla.eigh(G, np.diag(w), eigvals_only=True)
    assert direct == pytest.approx(np.sqrt(evals[-1]), rel=1e-10)


def test_weighted_singular_values_descending(grid48):
    rng = np.random.default_rng(12)
    T = rng.standard_normal((grid48.n_nodes, grid48.n_nodes))
    s = weighted_singular_values(T, grid48.weights, grid48.weights)
    assert np.all(np.diff(s) <= 0)
    assert s[0] == pytest.approx(
        weighted_opnorm(T, grid48.weights, grid48.weights)
    )


def test_extended_precision_solve():
    rng = np.random.default_rng(7)
    A = rng.standard_normal((30, 30)) + 1j * rng.standard_normal((30, 30))
    A += 10.0 * np.eye(30)
    B = rng.standard_normal((30, 4))
    X = _solve_extended(A.astype(np.clongdouble), B.astype(np.clongdouble))
    np.testing.assert_allclose(
        np.asarray(A @ X, dtype=complex), B, atol=1e-12
    )


class TestFactorizationIdentity:
    def test_constant_contrast(self, domain, grid_cache):
        pencil = build_pencil(grid_cache(24), Contrast.constant(1.0, domain))
        assert verify_factorization_identity(pencil, 1e3) < 1e-8

    def test_negative_contrast(self, domain, grid_cache):
        pencil = build_pencil(grid_cache(24), Contrast.constant(-0.5, domain))
        assert verify_factorization_identity(pencil, 1e4) < 1e-8

    def test_complex_piecewise_contrast(self, domain, grid_cache):
        contrast = Contrast(
            "piecewise", [[0.5], [0.5 + 0.25j, 1.5]], domain
        )
        pencil = build_pencil(grid_cache(24), contrast)
        assert verify_factorization_identity(pencil, 1e4) < 1e-8


def test_zero_contrast_raises_near_singular(domain, grid_cache):
    import warnings

    pencil = build_pencil(grid_cache(32), Contrast.constant(0.0, domain))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # scipy flags the zero pivot
        with pytest.raises(NearSingularError):
            factorize(pencil, 37.0)


def test_adjoint_duality_defect_finite(pencil3_64):
    d = adjoint_duality_defect(pencil3_64, 1e3)
    assert np.isfinite(d)
    assert d >= 0.0
