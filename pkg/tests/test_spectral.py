"""Contour projectors, moment extraction, and the real-axis sweep."""

import numpy as np
import pytest

from iteig import Contour, eigs_in_contour, spectral_projector
from iteig.errors import (
    ContourGrazesSpectrumError,
    InputError,
    ProbeRankSaturatedError,
)
from iteig.spectral import multiplicity, rank_from_singular_values, sweep_real_axis

PI2 = np.pi**2


class TestContour:
    def test_validation(self):
        with pytest.raises(InputError):
            Contour(0.0, -1.0)
        with pytest.raises(InputError):
            Contour(0.0, 1.0, n_quad=15)
        with pytest.raises(InputError):
            Contour(0.0, 1.0, n_quad=8)

    def test_nodes_on_circle(self):
        c = Contour(2.0 + 1.0j, 3.0, 32)
        z = c.nodes()
        np.testing.assert_allclose(np.abs(z - c.center), 3.0)
        assert z.size == 32

    def test_midpoint_nodes_conjugate_symmetric(self):
        # real center: node set closed under conjugation, so projectors of
        # real pencils stay real
        z = Contour(-5.0, 2.0, 16).nodes()
        dist = np.abs(z[:, None] - np.conj(z)[None, :]).min(axis=1)
        assert np.max(dist) < 1e-13

    def test_weights_sum_to_zero(self):
        # sum of r e^{i theta}/nq over equispaced angles vanishes: the
        # quadrature integrates the constant integrand to zero
        w = Contour(0.0, 1.5, 64).quad_weights()
        assert abs(np.sum(w)) < 1e-13


def test_rank_from_singular_values():
    s = np.array([1.0, 0.5, 1e-10, 1e-12])
    assert rank_from_singular_values(s) == 2
    assert rank_from_singular_values(np.array([1e-9])) == 0
    assert rank_from_singular_values(np.zeros(0)) == 0


class TestProjector:
    def test_idempotent_rank_four(self, pencil3_64):
        proj = spectral_projector(pencil3_64, Contour(-PI2, 1.0))
        assert proj.rank == 4
        assert multiplicity(proj) == 4
        rel = proj.idempotency_residual / max(proj.norm, 1.0)
        assert rel < 1e-6

    def test_rank_zero_in_resolvent_set(self, pencil3_64):
        proj = spectral_projector(pencil3_64, Contour(1e4, 1.0))
        assert proj.rank == 0
        assert proj.norm < 1e-8

    def test_grazing_contour_rejected(self, pencil3_64):
        # place a quadrature node exactly on the eigenvalue at -pi^2
        theta0 = 2.0 * np.pi * 0.5 / 64
        center = -PI2 - np.exp(1j * theta0)
        with pytest.raises(ContourGrazesSpectrumError):
            spectral_projector(pencil3_64, Contour(center, 1.0, 64))


class TestEigsInContour:
    def test_parity_eigenvalue(self, pencil3_64):
        res = eigs_in_contour(pencil3_64, Contour(-PI2, 1.0), probe_rank=8)
        assert res.eigenvalues.size == 1
        lam = res.eigenvalues[0]
        assert abs(lam + PI2) / PI2 < 1e-8
        assert res.multiplicities[0] == 4
        assert res.multiplicity_total == 4
        assert res.residuals[0] < 1e-8
        assert not res.boundary_flags[0]

    def test_eigenvector_satisfies_pencil(self, pencil3_64):
        res = eigs_in_contour(pencil3_64, Contour(-PI2, 1.0), probe_rank=8)
        vec = res.eigenvectors[0]
        x = vec.stack()
        lam = res.eigenvalues[0]
        r = pencil3_64.A @ x - lam * (pencil3_64.M @ x)
        assert np.linalg.norm(r) / np.linalg.norm(x) < 1e-6

    def test_empty_region(self, pencil3_64):
        res = eigs_in_contour(pencil3_64, Contour(1e4, 1.0), probe_rank=6)
        assert res.eigenvalues.size == 0
        assert res.multiplicity_total == 0

    def test_probe_saturation_detected(self, pencil3_64):
        # multiplicity 4 cannot fit in a rank-2 probe
        with pytest.raises(ProbeRankSaturatedError):
            eigs_in_contour(pencil3_64, Contour(-PI2, 1.0), probe_rank=2)

    def test_probe_rank_positive(self, pencil3_64):
        with pytest.raises(InputError):
            eigs_in_contour(pencil3_64, Contour(-PI2, 1.0), probe_rank=0)

    def test_boundary_band_flags_near_circle(self, pencil3_64):
        """A generous ambiguity band keeps and flags estimates near the
        circle, on either side of it."""
        res = eigs_in_contour(
            pencil3_64,
            Contour(-PI2 + 1.2, 1.0),  # eigenvalue outside, dist 1.2 r
            probe_rank=8,
            boundary_tol=0.35,
        )
        idx = [
            i for i, z in enumerate(res.eigenvalues) if abs(z + PI2) < 0.1
        ]
        assert idx and bool(res.boundary_flags[idx[0]])

        res_in = eigs_in_contour(
            pencil3_64,
            Contour(-PI2 - 0.9, 1.0),  # eigenvalue inside, dist 0.9 r
            probe_rank=8,
            boundary_tol=0.35,
        )
        idx = [
            i for i, z in enumerate(res_in.eigenvalues) if abs(z + PI2) < 0.1
        ]
        assert idx and bool(res_in.boundary_flags[idx[0]])

    def test_to_dict_serializable(self, pencil3_64):
        import json

        res = eigs_in_contour(pencil3_64, Contour(-PI2, 1.0), probe_rank=8)
        json.dumps(res.to_dict())


class TestSweep:
    def test_interval_validation(self, pencil3_64):
        with pytest.raises(InputError):
            sweep_real_axis(pencil3_64, 5.0, -5.0)

    def test_finds_first_two_parity_roots(self, pencil2_64):
        vals, res, mult = sweep_real_axis(
            pencil2_64, -50.0, -10.0, radius=8.0, probe_rank=12
        )
        near_real = vals[np.abs(vals.imag) < 1e-6]
        assert any(abs(v + 4 * PI2) / (4 * PI2) < 1e-8 for v in near_real)

    def test_empty_window(self, pencil3_64):
        vals, res, mult = sweep_real_axis(
            pencil3_64, 50.0, 120.0, radius=16.0, probe_rank=8
        )
        assert vals.size == 0

    def test_degraded_tile_does_not_override_multiplicity(
        self, domain, grid_cache
    ):
        """n = 48 splits the defective quadruple at -16 pi^2 badly in the
        tile whose circle passes near it; the consistent neighboring tile
        must win the merge."""
        from iteig import Contrast, build_pencil

        pencil = build_pencil(grid_cache(48), Contrast.constant(3.0, domain))
        vals, res, mult = sweep_real_axis(
            pencil, -225.0, -100.0, radius=16.0, probe_rank=12
        )
        match = [
            m
            for v, m in zip(vals, mult)
            if abs(v - (-16 * PI2)) / (16 * PI2) < 1e-6
        ]
        assert match == [4]
