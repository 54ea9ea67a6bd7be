"""Dense eigensolver for small complex matrices.

The contour-integral eigenvalue extraction reduces the big pencil to a k x k
complex matrix with k bounded by the probe rank (small, <= 32 or so).  That
reduced problem is solved here directly: Householder reduction to Hessenberg
form, then a single-shift QR iteration with Wilkinson shifts and deflation.
No general-purpose eigensolver is called in the library path; tests compare
against one.

Right eigenvectors are recovered afterwards by shifted inverse iteration on
the original matrix, which is cheap at these sizes and accurate for the
isolated eigenvalues the reduction produces.  For tightly clustered
eigenvalues the returned vectors may nearly coincide; downstream refinement
works at the level of the full pencil and does not rely on them being a
clean basis.
"""

from __future__ import annotations

import numpy as np

from .errors import InputError, NumericalError

MAX_DIM = 64
_MAX_SWEEPS = 300


def _hessenberg(B: np.ndarray) -> np.ndarray:
    H = np.array(B, dtype=complex, copy=True)
    n = H.shape[0]
    for k in range(n - 2):
        x = H[k + 1 :, k]
        normx = np.linalg.norm(x)
        if normx == 0.0:
            continue
        alpha = -normx if x[0] == 0 else -(x[0] / abs(x[0])) * normx
        v = x.copy()
        v[0] -= alpha
        vnorm = np.linalg.norm(v)
        if vnorm == 0.0:
            continue
        v = v / vnorm
        H[k + 1 :, k:] -= 2.0 * np.outer(v, v.conj() @ H[k + 1 :, k:])
        H[:, k + 1 :] -= 2.0 * np.outer(H[:, k + 1 :] @ v, v.conj())
        H[k + 2 :, k] = 0.0
    return H


def _eig2(a, b, c, d):
    half = 0.5 * (a + d)
    disc = np.sqrt(0.25 * (a - d) ** 2 + b * c + 0j)
    return half + disc, half - disc


def _wilkinson(H: np.ndarray, hi: int) -> complex:
    mu1, mu2 = _eig2(H[hi - 1, hi - 1], H[hi - 1, hi], H[hi, hi - 1], H[hi, hi])
    d = H[hi, hi]
    return mu1 if abs(mu1 - d) <= abs(mu2 - d) else mu2


def _qr_step(H: np.ndarray, mu: complex, lo: int, hi: int) -> None:
    # explicit shifted QR sweep via Givens rotations on the active block
    for j in range(lo, hi + 1):
        H[j, j] -= mu
    rots = []
    for k in range(lo, hi):
        a, b = H[k, k], H[k + 1, k]
        r = np.hypot(abs(a), abs(b))
        if r == 0.0:
            c, s = 1.0 + 0j, 0.0 + 0j
        else:
            c, s = a / r, b / r
        G = np.array([[np.conj(c), np.conj(s)], [-s, c]])
        H[k : k + 2, k : hi + 1] = G @ H[k : k + 2, k : hi + 1]
        rots.append((c, s))
    for k in range(lo, hi):
        c, s = rots[k - lo]
        GH = np.array([[c, -np.conj(s)], [s, np.conj(c)]])
        top = min(k + 2, hi + 1)
        H[lo:top, k : k + 2] = H[lo:top, k : k + 2] @ GH
    for j in range(lo, hi + 1):
        H[j, j] += mu


def eigvals(B: np.ndarray) -> np.ndarray:
    """Eigenvalues of a small complex matrix (order of output unspecified)."""
    B = np.asarray(B, dtype=complex)
    n = B.shape[0]
    if B.shape != (n, n):
        raise InputError("matrix must be square")
    if n > MAX_DIM:
        raise InputError(f"small eigensolver capped at dim {MAX_DIM}, got {n}")
    if n == 0:
        return np.zeros(0, dtype=complex)
    if n == 1:
        return B[0, 0].reshape(1).copy()

    H = _hessenberg(B)
    eps = np.finfo(float).eps
    out = []
    hi = n - 1
    stall = 0
    sweeps = 0
    while hi >= 0:
        if hi == 0:
            out.append(H[0, 0])
            hi -= 1
            continue
        lo = hi
        while lo > 0 and abs(H[lo, lo - 1]) > eps * (
            abs(H[lo - 1, lo - 1]) + abs(H[lo, lo])
        ):
            lo -= 1
        if lo == hi:
            H[hi, hi - 1] = 0.0
            out.append(H[hi, hi])
            hi -= 1
            stall = 0
            continue
        if hi - lo == 1:
            l1, l2 = _eig2(H[lo, lo], H[lo, hi], H[hi, lo], H[hi, hi])
            out.extend([l1, l2])
            hi -= 2
            stall = 0
            continue
        mu = _wilkinson(H, hi)
        if stall > 0 and stall % 12 == 0:
            # exceptional shift to break symmetric stalls
            mu = H[hi, hi] + abs(H[hi, hi - 1])
        _qr_step(H, mu, lo, hi)
        stall += 1
        sweeps += 1
        if sweeps > _MAX_SWEEPS * n:
            raise NumericalError("QR iteration failed to converge")
    return np.array(out[::-1])


def eig(B: np.ndarray):
    """Eigenvalues and right eigenvectors (columns), inverse-iteration based."""
    B = np.asarray(B, dtype=complex)
    vals = eigvals(B)
    n = B.shape[0]
    vecs = np.zeros((n, n), dtype=complex)
    scale = max(np.linalg.norm(B, np.inf), 1.0)
    rng_free_start = np.cos(np.arange(1, n + 1))  # fixed, not axis-aligned
    for j, lam in enumerate(vals):
        shift = lam
        x = rng_free_start / np.linalg.norm(rng_free_start)
        for _ in range(3):
            try:
                y = np.linalg.solve(B - shift * np.eye(n), x)
            except np.linalg.LinAlgError:
                shift = lam + scale * 1e-13
                y = np.linalg.solve(B - shift * np.eye(n), x)
            ny = np.linalg.norm(y)
            if not np.isfinite(ny) or ny == 0.0:
                shift = lam + scale * 1e-13
                continue
            x = y / ny
        vecs[:, j] = x
    return vals, vecs
