"""Projector continuity bound and eigenvalue tracking along contrast families."""

import numpy as np
import pytest

from iteig import Contrast, build_pencil
from iteig.errors import InputError, PerturbationTooLargeError
from iteig.perturbation import (
    NORM_CONVENTION,
    eigenvalue_tracking,
    gamma_on_contour,
    projector_continuity,
)
from iteig.spectral import Contour

CONTOUR = Contour(-np.pi**2, 1.0, 64)


@pytest.fixture(scope="module")
def pencil_m(grid48, domain):
    return build_pencil(grid48, Contrast.constant(8.0, domain))


def test_norm_convention_is_documented():
    assert NORM_CONVENTION == "L2+L2 -> H2+L2"


def test_gamma_is_positive_and_labeled(pencil_m):
    gam = gamma_on_contour(pencil_m, CONTOUR)
    assert gam.gamma_value > 0
    assert gam.norm_convention == NORM_CONVENTION
    assert gam.contour is CONTOUR


def test_identical_contrasts_give_zero_shift(pencil_m):
    rep = projector_continuity(pencil_m, pencil_m, CONTOUR)
    assert rep.perturbation_size == 0.0
    assert rep.measured_delta_P == 0.0
    assert rep.bound == 0.0
    assert rep.satisfied is True
    assert rep.rank_before == rep.rank_after == 4
    assert rep.max_principal_angle < 1e-8


@pytest.mark.parametrize("eps", [1e-4, 1e-3])
def test_small_perturbation_within_bound(pencil_m, grid48, domain, eps):
    pencil_p = build_pencil(grid48, Contrast.constant(8.0 + eps, domain))
    rep = projector_continuity(pencil_m, pencil_p, CONTOUR)
    assert rep.perturbation_size == pytest.approx(eps, rel=1e-12)
    assert rep.satisfied is True
    assert rep.measured_delta_P <= rep.bound
    # the measured shift is far below the worst case but scales linearly
    assert rep.measured_delta_P == pytest.approx(5.21e-3 * eps / 1e-3, rel=0.01)
    assert rep.rank_before == 4
    assert rep.rank_after == 4
    assert rep.max_principal_angle < 1e-3


def test_gamma_matches_report(pencil_m, grid48, domain):
    pencil_p = build_pencil(grid48, Contrast.constant(8.0 + 1e-4, domain))
    rep = projector_continuity(pencil_m, pencil_p, CONTOUR)
    gam = gamma_on_contour(pencil_m, CONTOUR)
    assert rep.gamma == pytest.approx(gam.gamma_value, rel=1e-12)


def test_large_perturbation_rejected(pencil_m, grid48, domain):
    pencil_p = build_pencil(grid48, Contrast.constant(8.5, domain))
    with pytest.raises(PerturbationTooLargeError):
        projector_continuity(pencil_m, pencil_p, CONTOUR)


def test_large_perturbation_measured_without_bound(pencil_m, grid48, domain):
    pencil_p = build_pencil(grid48, Contrast.constant(8.5, domain))
    rep = projector_continuity(pencil_m, pencil_p, CONTOUR, allow_large=True)
    assert rep.satisfied is None
    assert rep.bound == np.inf
    assert rep.measured_delta_P > 0
    # the eigenvalue group leaves the contour under this large a change
    assert rep.rank_before == 4
    assert rep.rank_after == 1


def test_grid_mismatch_rejected(pencil_m, grid_cache, domain):
    other = build_pencil(grid_cache(32), Contrast.constant(8.0, domain))
    with pytest.raises(InputError):
        projector_continuity(pencil_m, other, CONTOUR)


class TestTracking:
    def test_family_tracks_rank_change(self, grid48, domain):
        fam = lambda t: Contrast.from_index(3.0 + 0.1 * t, domain)
        traj = eigenvalue_tracking(fam, 5, Contour(-9.5, 0.8, 64), grid48)
        assert len(traj.steps) == 5
        first, last = traj.steps[0], traj.steps[-1]
        assert not any(s.grazed for s in traj.steps)
        assert first.rank == 4
        assert first.eigenvalues[0].real == pytest.approx(-np.pi**2, rel=1e-6)
        # three of the four branches leave the contour immediately
        assert traj.steps[1].rank_changed
        assert last.rank == 1
        assert last.eigenvalues[0].real == pytest.approx(-9.17161937, rel=1e-6)
        assert np.all(np.abs(np.concatenate([s.eigenvalues.imag for s in traj.steps])) < 1e-6)

    def test_rows_have_uniform_width(self, grid48, domain):
        fam = lambda t: Contrast.from_index(3.0 + 0.1 * t, domain)
        traj = eigenvalue_tracking(fam, 3, Contour(-9.5, 0.8, 64), grid48)
        rows = traj.rows()
        assert rows and all(len(r) == 6 for r in rows)
        assert any(r[5] == "rank-change" for r in rows)

    def test_too_few_steps(self, grid48, domain):
        fam = lambda t: Contrast.from_index(3.0, domain)
        with pytest.raises(InputError):
            eigenvalue_tracking(fam, 1, CONTOUR, grid48)

    def test_family_must_return_contrast(self, grid48):
        with pytest.raises(InputError):
            eigenvalue_tracking(lambda t: 3.0, 3, CONTOUR, grid48)
