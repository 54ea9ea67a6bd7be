"""Chebyshev spectral collocation on [a, b].

Nodes are Chebyshev-Gauss-Lobatto points mapped to the interval and stored
in ascending order.  D1 is the standard first-order differentiation matrix,
D2 = D1 @ D1.  Quadrature weights are Clenshaw-Curtis, so integration of
smooth integrands is spectrally accurate.

Discrete norms: the weighted L2 norm uses the quadrature weights; the
H2-type norm squared is ||u||^2 + ||D2 u||^2 (second derivative in place of
the full Sobolev seminorm, which is the natural quantity for states with
clamped values and slopes at both ends).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .contrast import Domain1D
from .errors import InputError


def _cheb(n: int):
    # Differentiation matrix on Chebyshev points cos(pi*j/n), j=0..n
    # (descending order, standard construction).
    if n == 0:
        return np.zeros((1, 1)), np.ones(1)
    x = np.cos(np.pi * np.arange(n + 1) / n)
    c = np.ones(n + 1)
    c[0] = 2.0
    c[n] = 2.0
    c *= (-1.0) ** np.arange(n + 1)
    X = np.tile(x, (n + 1, 1)).T
    dX = X - X.T
    D = np.outer(c, 1.0 / c) / (dX + np.eye(n + 1))
    D -= np.diag(D.sum(axis=1))
    return D, x

def _clencurt(n: int) -> np.ndarray:
    # Clenshaw-Curtis weights on the same descending Chebyshev points.
    if n == 0:
        return np.array([2.0])
    theta = np.pi * np.arange(n + 1) / n
    w = np.zeros(n + 1)
    v = np.ones(n - 1)
    if n % 2 == 0:
        w[0] = 1.0 / (n**2 - 1)
        w[n] = w[0]
        for k in range(1, n // 2):
            v -= 2.0 * np.cos(2.0 * k * theta[1:n]) / (4.0 * k**2 - 1)
        v -= np.cos(n * theta[1:n]) / (n**2 - 1)
    else:
        w[0] = 1.0 / n**2
        w[n] = w[0]
        for k in range(1, (n - 1) // 2 + 1):
            v -= 2.0 * np.cos(2.0 * k * theta[1:n]) / (4.0 * k**2 - 1)
    w[1:n] = 2.0 * v / n
    return w


@dataclass
class CollocationGrid:
    """Collocation data for one interval: nodes, D1, D2, weights."""

    domain: Domain1D
    n: int
    nodes: np.ndarray = field(repr=False)
    D1: np.ndarray = field(repr=False)
    D2: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def n_nodes(self) -> int:
        return self.n + 1

    @property
    def interior(self) -> np.ndarray:
        """Indices of the n-1 interior nodes."""
        return np.arange(1, self.n)

    def integrate(self, values: np.ndarray) -> complex:
        return complex(np.dot(self.weights, np.asarray(values)))

    def inner(self, f: np.ndarray, g: np.ndarray) -> complex:
        return complex(np.dot(self.weights, np.conj(f) * g))

    def norm(self, values: np.ndarray) -> float:
        v = np.asarray(values)
        return float(np.sqrt(np.real(np.dot(self.weights, np.abs(v) ** 2))))

    def h2_norm(self, values: np.ndarray) -> float:
        v = np.asarray(values)
        return float(np.sqrt(self.norm(v) ** 2 + self.norm(self.D2 @ v) ** 2))


def build_grid(domain: Domain1D, n: int) -> CollocationGrid:
    """Build the collocation grid of polynomial degree n (n+1 nodes).

    n must be at least 4 so that the state component with four boundary
    conditions retains interior degrees of freedom.
    """
    if n < 4:
        raise InputError(f"grid degree must be >= 4, got {n}")
    D, x = _cheb(n)
    a, b = domain.a, domain.b
    # flip to ascending nodes; chain rule for the affine map [-1,1] -> [a,b]
    nodes = (a + b) / 2.0 + (b - a) / 2.0 * x[::-1]
    D1 = D[::-1, ::-1] * (2.0 / (b - a))
    w = _clencurt(n)[::-1] * (b - a) / 2.0
    return CollocationGrid(
        domain=domain, n=n, nodes=nodes, D1=D1, D2=D1 @ D1, weights=w
    )
