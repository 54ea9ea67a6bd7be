"""Exception taxonomy.

Configuration problems (bad input files, malformed options) are kept distinct
from numerical failures (singular factorizations, contours grazing the
spectrum) so the CLI can map them to different exit codes.
"""


class IteigError(Exception):
    """Base class for all package errors."""


class ConfigurationError(IteigError):
    """Malformed or missing configuration / input data."""


class InputError(IteigError):
    """A function argument violates a documented precondition."""


class DegenerateContrastError(InputError):
    """Contrast vanishes identically (no transmission mechanism)."""


class DegenerateStateError(InputError):
    """A state is degenerate for the requested diagnostic (e.g. zero mass)."""


class NumericalError(IteigError):
    """Base class for runtime numerical failures."""


class NearSingularError(NumericalError):
    """Factorization condition estimate exceeded the cap.

    Usually a signal that the shift sits at (or numerically near) an
    eigenvalue of the pencil.
    """

    def __init__(self, msg, cond=None):
        super().__init__(msg)
        self.cond = cond


class ContourGrazesSpectrumError(NumericalError):
    """A quadrature node on the contour is too close to an eigenvalue."""


class ProbeRankSaturatedError(NumericalError):
    """All probe singular values survived truncation; probe_rank too small."""


class QuadratureNotConvergedError(NumericalError):
    """Doubling the quadrature order did not stabilize the projector."""


class PerturbationTooLargeError(NumericalError):
    """Perturbation violates the smallness condition of the continuity bound."""
