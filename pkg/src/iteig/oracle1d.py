"""Semi-analytic oracle: transmission wavenumbers for constant index on (0,1).

For a constant index n > 0, nontrivial pairs W = A cos(nkx) + B sin(nkx),
V = C cos(kx) + D sin(kx) with W = V and W' = V' at both endpoints exist
exactly when a 4x4 matching determinant vanishes.  The derivative rows are
scaled by 1/k (k != 0), which leaves the root set unchanged and keeps the
determinant O(1):

    [ 1,          0,          -1,       0       ]   value at 0
    [ 0,          n,           0,      -1       ]   slope at 0
    [ cos(nk),    sin(nk),    -cos(k), -sin(k)  ]   value at 1
    [-n sin(nk),  n cos(nk),   sin(k), -cos(k)  ]   slope at 1

The determinant is real for real n and real k.  Odd-order roots are
bracketed by sign changes; even-order roots (the parity-forced family
k = j pi for n = 3 has order four) appear as minima of det^2 and are
refined on the analytic derivative of one order below the root order,
computed in closed form: rows one and two are k-independent and the slope
row is the k-derivative of the value row, so derivatives of det reduce to
a binomial sum of 4x4 determinants.

The eigenvalue coordinate is lambda = -k^2.  Only the real k axis is
scanned by default; an argument-principle counter over rectangles is
provided for counting complex roots.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateContrastError, InputError

MIN_SCAN_POINTS = 256
_RESIDUAL_REL = 1e-12
_MAX_ROOT_ORDER = 4


@dataclass
class MatchingSystem:
    """The 4x4 matching matrix at one wavenumber."""

    n_index: float
    k: complex
    matrix: np.ndarray


@dataclass
class OracleRoot:
    k: float
    lam: float
    bracket: tuple
    det_residual: float


def _check_index(n_index: float) -> None:
    if not np.isreal(n_index) or n_index <= 0:
        raise InputError(f"index must be real positive, got {n_index}")
    if abs(n_index - 1.0) <= 1e-12:
        raise DegenerateContrastError(
            "index 1 means zero contrast: both fields satisfy the same "
            "equation and the matching determinant vanishes identically"
        )


def _value_row_derivative(n_index: float, k, order: int) -> np.ndarray:
    # d^j/dk^j of [cos(nk), sin(nk), -cos(k), -sin(k)]:
    # each entry advances phase by j*pi/2 and gains a factor c^j
    n = n_index
    j = order
    ph = j * np.pi / 2.0
    return np.array(
        [
            n**j * np.cos(n * k + ph),
            n**j * np.sin(n * k + ph),
            -np.cos(k + ph),
            -np.sin(k + ph),
        ]
    )


def build_matching_system(n_index: float, k) -> MatchingSystem:
    _check_index(n_index)
    if k == 0:
        raise InputError("wavenumber must be nonzero")
    n = n_index
    mat = np.array(
        [
            [1.0, 0.0, -1.0, 0.0],
            [0.0, n, 0.0, -1.0],
            _value_row_derivative(n, k, 0),
            _value_row_derivative(n, k, 1),  # slope row = d/dk of value row
        ]
    )
    return MatchingSystem(n_index=n_index, k=k, matrix=mat)


def matching_determinant(n_index: float, k):
    return np.linalg.det(build_matching_system(n_index, k).matrix)


def matching_determinant_derivative(n_index: float, k, order: int):
    """Closed-form d^order/dk^order of the matching determinant."""
    _check_index(n_index)
    if order == 0:
        return matching_determinant(n_index, k)
    n = n_index
    top = np.array([[1.0, 0.0, -1.0, 0.0], [0.0, n, 0.0, -1.0]])
    total = 0.0
    for j in range(order + 1):
        rows = np.vstack(
            [
                top,
                _value_row_derivative(n, k, j),
                _value_row_derivative(n, k, order - j + 1),
            ]
        )
        total = total + comb(order, j) * np.linalg.det(rows)
    return total


def _detect_root_order(n_index: float, k: float, scale: float) -> int:
    ders = [
        abs(matching_determinant_derivative(n_index, k, j))
        for j in range(1, _MAX_ROOT_ORDER + 1)
    ]
    top = max(max(ders), scale, 1e-300)
    for j, d in enumerate(ders, start=1):
        if d > 1e-3 * top:
            return j
    return _MAX_ROOT_ORDER


def _refine_even_root(n_index: float, k0: float, h: float) -> float | None:
    # polish an even-order root on the derivative one order below
    order = _detect_root_order(n_index, k0, 0.0)
    if order <= 1:
        return k0
    fun = lambda k: matching_determinant_derivative(n_index, k, order - 1)
    lo, hi = k0 - h, k0 + h
    flo, fhi = fun(lo), fun(hi)
    if flo * fhi > 0:
        return None
    return float(brentq(fun, lo, hi, xtol=1e-15, rtol=1e-15))


def _scan_once(n_index: float, k_min: float, k_max: float, scan_points: int):
    ks = np.linspace(k_min, k_max, scan_points)
    ds = np.array([matching_determinant(n_index, k) for k in ks])
    scale = float(np.max(np.abs(ds)))
    if scale == 0.0:
        raise DegenerateContrastError("determinant vanishes on the whole window")
    h = ks[1] - ks[0]

    cands: list[tuple[float, tuple]] = []
    # odd-order roots: sign changes
    for i in range(scan_points - 1):
        if ds[i] == 0.0:
            cands.append((float(ks[i]), (float(ks[i] - h), float(ks[i] + h))))
        elif ds[i] * ds[i + 1] < 0:
            r = brentq(
                lambda k: matching_determinant(n_index, k),
                ks[i],
                ks[i + 1],
                xtol=1e-15,
                rtol=1e-15,
            )
            cands.append((float(r), (float(ks[i]), float(ks[i + 1]))))
    # even-order roots: interior minima of det^2 that reach the noise floor
    d2 = ds**2
    for i in range(1, scan_points - 1):
        if d2[i] < d2[i - 1] and d2[i] < d2[i + 1]:
            res = minimize_scalar(
                lambda k: matching_determinant(n_index, k) ** 2,
                bracket=(ks[i - 1], ks[i], ks[i + 1]),
                options={"xtol": 1e-14},
                method="brent",
            )
            k0 = float(res.x)
            if abs(matching_determinant(n_index, k0)) > 1e-6 * scale:
                continue  # shallow minimum, not a root
            refined = _refine_even_root(n_index, k0, 2.0 * h)
            if refined is not None and k_min <= refined <= k_max:
                cands.append((refined, (float(ks[i - 1]), float(ks[i + 1]))))

    roots: list[OracleRoot] = []
    for k, bracket in sorted(cands):
        resid = abs(matching_determinant(n_index, k))
        if resid > _RESIDUAL_REL * scale:
            continue
        if roots and abs(k - roots[-1].k) <= 1e-10 * max(1.0, abs(k)):
            continue
        roots.append(
            OracleRoot(
                k=float(k), lam=-float(k) ** 2, bracket=bracket, det_residual=float(resid)
            )
        )
    return roots


def find_real_roots(
    n_index: float, k_min: float, k_max: float, scan_points: int = 2048
) -> list[OracleRoot]:
    """All real wavenumbers in [k_min, k_max] where the determinant vanishes.

    Runs the scan a second time at doubled resolution; disagreement between
    the two passes means the requested scan was too coarse (two roots in one
    cell), in which case a warning is issued and the finer result returned.
    """
    _check_index(n_index)
    if not 0.0 < k_min < k_max:
        raise InputError("need 0 < k_min < k_max")
    if scan_points < MIN_SCAN_POINTS:
        raise InputError(f"scan_points must be >= {MIN_SCAN_POINTS}")
    coarse = _scan_once(n_index, k_min, k_max, scan_points)
    fine = _scan_once(n_index, k_min, k_max, 2 * scan_points)
    if len(coarse) != len(fine) or any(
        abs(a.k - b.k) > 1e-9 * max(1.0, abs(a.k)) for a, b in zip(coarse, fine)
    ):
        warnings.warn(
            "root scan too coarse for the requested window; using the "
            "doubled-resolution result",
            stacklevel=2,
        )
    return fine


def to_pencil_coordinates(roots: list[OracleRoot]) -> list[float]:
    """Map wavenumbers to the pencil eigenvalue coordinate lambda = -k^2."""
    return [-(r.k**2) for r in roots]


def count_roots_in_rectangle(
    n_index: float,
    re_lo: float,
    re_hi: float,
    im_lo: float,
    im_hi: float,
    nodes_per_side: int = 400,
) -> int:
    """Argument-principle count of determinant roots inside a rectangle.

    Midpoint quadrature of det'/det along the boundary; raises when the
    determinant nearly vanishes on the boundary (root too close to it).
    """
    _check_index(n_index)
    corners = [
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
        complex(re_lo, im_lo),
    ]
    total = 0.0 + 0.0j
    min_abs = np.inf
    scale = 0.0
    for z0, z1 in zip(corners[:-1], corners[1:]):
        ts = (np.arange(nodes_per_side) + 0.5) / nodes_per_side
        zs = z0 + (z1 - z0) * ts
        dz = (z1 - z0) / nodes_per_side
        for z in zs:
            d = matching_determinant(n_index, z)
            dp = matching_determinant_derivative(n_index, z, 1)
            min_abs = min(min_abs, abs(d))
            scale = max(scale, abs(d))
            total += dp / d * dz
    if min_abs <= 1e-8 * scale:
        raise InputError(
            "a determinant root lies (nearly) on the rectangle boundary; "
            "move the rectangle"
        )
    count = total / (2j * np.pi)
    rounded = int(np.rint(count.real))
    if abs(count - rounded) > 0.2:
        raise InputError(
            f"winding number {count} too far from an integer; refine "
            "nodes_per_side or move the rectangle"
        )
    return rounded
