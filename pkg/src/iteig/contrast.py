"""Contrast functions on an interval and the coercivity hypotheses.

The eigenvalue problem is posed for a contrast m supported on [a, b].  All
spectral machinery downstream assumes three hypotheses on m, checked here on
a sample grid:

  1. coercivity near the boundary: either some rotation e^{i theta} m has
     real part bounded below by m_star on a neighborhood N of the endpoints
     (theta strictly inside (-pi/2, pi/2)), or m is real and <= -m_star on N;
  2. boundedness: sup |m| < m_sup on all of [a, b];
  3. the weight 1 + m stays away from zero: Re(1 + m) >= delta > 0.

Hypothesis 1 only constrains m near the endpoints; sign changes in the
interior are allowed.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, InputError

_THETA_SAMPLES = 181
_THETA_MARGIN = 1e-3


@dataclass(frozen=True)
class Domain1D:
    """Interval [a, b] with the width of the boundary neighborhood N.

    N = [a, a + width] U [b - width, b].  Cutoffs built for this domain
    vanish near the endpoints and equal one outside N.
    """

    a: float
    b: float
    neighborhood_width: float

    def __post_init__(self):
        if not self.a < self.b:
            raise InputError(f"empty interval [{self.a}, {self.b}]")
        if not 0.0 < self.neighborhood_width < 0.5 * (self.b - self.a):
            raise InputError(
                "neighborhood width must lie in (0, (b-a)/2), got "
                f"{self.neighborhood_width}"
            )

    @property
    def length(self) -> float:
        return self.b - self.a


class Contrast:
    """Complex-valued contrast m(x) on a domain.

    kind:
      piecewise  - data = [breakpoints, values], len(values) = len(breaks)+1,
                   evaluated one-sided-continuously from the left at breaks
      polynomial - data = coefficients c0, c1, ... in ascending powers of x
      sampled    - data = [x_samples, values], linear interpolation

    Values may be real scalars or [re, im] pairs in JSON form.
    """

    def __init__(self, kind: str, data, domain: Domain1D):
        if kind not in ("piecewise", "polynomial", "sampled"):
            raise ConfigurationError(f"unknown contrast kind {kind!r}")
        self.kind = kind
        self.domain = domain
        if kind == "piecewise":
            breaks, values = data
            self._breaks = [float(x) for x in breaks]
            if sorted(self._breaks) != self._breaks:
                raise ConfigurationError("piecewise breakpoints must be sorted")
            self._values = np.asarray([_as_complex(v) for v in values])
            if len(self._values) != len(self._breaks) + 1:
                raise ConfigurationError(
                    "piecewise needs len(values) == len(breakpoints) + 1"
                )
        elif kind == "polynomial":
            self._coeffs = np.asarray([_as_complex(c) for c in data])
            if self._coeffs.size == 0:
                raise ConfigurationError("polynomial needs at least one coefficient")
        else:
            xs, values = data
            self._xs = np.asarray([float(x) for x in xs])
            if np.any(np.diff(self._xs) <= 0):
                raise ConfigurationError("sampled abscissae must be increasing")
            self._vals = np.asarray([_as_complex(v) for v in values])
            if self._vals.shape != self._xs.shape:
                raise ConfigurationError("sampled needs matching x/value lengths")

    @classmethod
    def constant(cls, value, domain: Domain1D) -> "Contrast":
        return cls("polynomial", [value], domain)

    @classmethod
    def from_index(cls, n_index: float, domain: Domain1D) -> "Contrast":
        """Constant contrast m = n^2 - 1 for a constant index of refraction."""
        return cls.constant(n_index**2 - 1.0, domain)

    @classmethod
    def from_json(cls, path) -> "Contrast":
        try:
            with open(path, encoding="utf-8") as fh:
                obj = json.load(fh)
        except OSError as exc:
            raise ConfigurationError(f"cannot read contrast file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"contrast file is not valid JSON: {exc}") from exc
        return cls.from_dict(obj)

    @classmethod
    def from_dict(cls, obj) -> "Contrast":
        try:
            a, b = obj["domain"]
            width = obj.get("neighborhood_width", 0.2 * (b - a))
            domain = Domain1D(a, b, width)
            return cls(obj["kind"], obj["data"], domain)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigurationError(f"malformed contrast spec: {exc}") from exc

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        scalar = x.ndim == 0
        x1 = np.atleast_1d(x)
        if self.kind == "polynomial":
            out = np.polyval(self._coeffs[::-1], x1).astype(complex)
        elif self.kind == "piecewise":
            idx = np.array([bisect.bisect_left(self._breaks, xi) for xi in x1])
            out = self._values[idx]
        else:
            out = np.interp(x1, self._xs, self._vals.real).astype(complex)
            if np.any(self._vals.imag):
                out = out + 1j * np.interp(x1, self._xs, self._vals.imag)
        return out[0] if scalar else out

    def is_identically_zero(self, n_samples: int = 257) -> bool:
        x = np.linspace(self.domain.a, self.domain.b, n_samples)
        return bool(np.max(np.abs(self(x))) == 0.0)


@dataclass(frozen=True)
class CoercivityParams:
    """Thresholds (m_star, m_sup, delta) for the three hypotheses."""

    m_star: float
    m_sup: float
    delta: float

    def __post_init__(self):
        if self.m_star <= 0 or self.m_sup <= 0 or self.delta <= 0:
            raise InputError("coercivity thresholds must be positive")


@dataclass
class CoercivityReport:
    """Outcome of the hypothesis check on a sample grid.

    branch is 'complex-rotation' or 'real-negative' when item 1 passes,
    else None.  violating_points collects sample points that break the
    first failing hypothesis, for diagnostics.
    """

    passes_item1: bool
    passes_item2: bool
    passes_item3: bool
    branch: str | None
    witness_theta: float | None
    violating_points: list = field(default_factory=list)

    @property
    def all_pass(self) -> bool:
        return self.passes_item1 and self.passes_item2 and self.passes_item3

    def to_dict(self) -> dict:
        return {
            "passes_item1": bool(self.passes_item1),
            "passes_item2": bool(self.passes_item2),
            "passes_item3": bool(self.passes_item3),
            "branch": self.branch,
            "witness_theta": None
            if self.witness_theta is None
            else float(self.witness_theta),
            "violating_points": [float(x) for x in self.violating_points],
            "all_pass": bool(self.all_pass),
        }


def _as_complex(v) -> complex:
    if isinstance(v, (list, tuple)):
        re, im = v
        return complex(re, im)
    return complex(v)


def _boundary_mask(domain: Domain1D, x: np.ndarray) -> np.ndarray:
    w = domain.neighborhood_width
    return (x <= domain.a + w) | (x >= domain.b - w)


def check_hypotheses(
    contrast: Contrast,
    params: CoercivityParams,
    grid_density: int = 512,
) -> CoercivityReport:
    """Test the three hypotheses on a uniform sample grid.

    The rotation search for item 1 scans theta over a symmetric grid of
    _THETA_SAMPLES points strictly inside (-pi/2, pi/2) and keeps the theta
    maximizing the worst-case Re(e^{i theta} m) over the boundary
    neighborhood.  The real-negative branch (real m <= -m_star on N) is
    tried when no rotation works.  Report is advisory: callers decide
    whether failure is fatal.
    """
    if grid_density < 2:
        raise InputError("grid_density must be at least 2")
    dom = contrast.domain
    x = np.linspace(dom.a, dom.b, grid_density)
    m = contrast(x)
    near = _boundary_mask(dom, x)
    m_near = m[near]
    x_near = x[near]

    thetas = np.linspace(
        -np.pi / 2 + _THETA_MARGIN, np.pi / 2 - _THETA_MARGIN, _THETA_SAMPLES
    )
    worst = np.array(
        [np.min(np.real(np.exp(1j * t) * m_near)) for t in thetas]
    )
    best = int(np.argmax(worst))
    passes_rot = worst[best] > params.m_star

    is_real = np.max(np.abs(m.imag)) <= 1e-14 * max(1.0, np.max(np.abs(m)))
    passes_neg = bool(is_real and np.all(m_near.real <= -params.m_star))

    if passes_rot:
        branch: str | None = "complex-rotation"
        witness: float | None = float(thetas[best])
    elif passes_neg:
        branch = "real-negative"
        witness = None
    else:
        branch = None
        witness = None
    passes_item1 = passes_rot or passes_neg

    violating: list[float] = []
    if not passes_item1:
        bad = np.real(np.exp(1j * thetas[best]) * m_near) <= params.m_star
        if is_real:
            bad &= ~(m_near.real <= -params.m_star)
        violating.extend(x_near[bad][:16])

    sup = np.max(np.abs(m))
    passes_item2 = bool(sup < params.m_sup)
    if not passes_item2 and not violating:
        violating.extend(x[np.abs(m) >= params.m_sup][:16])

    re_weight = np.real(1.0 + m)
    passes_item3 = bool(np.min(re_weight) >= params.delta)
    if not passes_item3 and not violating:
        violating.extend(x[re_weight < params.delta][:16])

    return CoercivityReport(
        passes_item1=passes_item1,
        passes_item2=passes_item2,
        passes_item3=passes_item3,
        branch=branch,
        witness_theta=witness,
        violating_points=violating,
    )


class CutoffFunction:
    """Smooth cutoff phi: zero near the endpoints, one away from them.

    phi = 0 within width/2 of either endpoint, phi = 1 on
    [a + width, b - width], with C-infinity ramps in between built from the
    exp(-1/t) bump.  0 <= phi <= 1 everywhere.
    """

    def __init__(self, domain: Domain1D):
        self.domain = domain
        self.width = domain.neighborhood_width

    @staticmethod
    def _smoothstep(t: np.ndarray) -> np.ndarray:
        # C-infinity monotone ramp from 0 at t<=0 to 1 at t>=1
        t = np.clip(t, 0.0, 1.0)
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            f = np.where(t > 0, np.exp(-1.0 / np.maximum(t, 1e-300)), 0.0)
            g = np.where(
                t < 1, np.exp(-1.0 / np.maximum(1.0 - t, 1e-300)), 0.0
            )
        return f / (f + g)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        a, b, w = self.domain.a, self.domain.b, self.width
        left = self._smoothstep((x - (a + 0.5 * w)) / (0.5 * w))
        right = self._smoothstep(((b - 0.5 * w) - x) / (0.5 * w))
        return left * right


def make_cutoff(domain: Domain1D) -> CutoffFunction:
    return CutoffFunction(domain)
