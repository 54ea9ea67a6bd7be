"""Interior transmission eigenvalues in 1D.

Discretizes the coupled block pencil for a contrast on an interval with
Chebyshev collocation, locates eigenvalues with contour-integral spectral
projections, and numerically verifies the a priori estimates, resolvent
block structure, and perturbation continuity bounds that underpin the
discreteness of the spectrum.
"""

from .contrast import (
    CoercivityParams,
    CoercivityReport,
    Contrast,
    CutoffFunction,
    Domain1D,
    check_hypotheses,
    make_cutoff,
)
from .errors import (
    ConfigurationError,
    ContourGrazesSpectrumError,
    DegenerateContrastError,
    DegenerateStateError,
    InputError,
    IteigError,
    NearSingularError,
    NumericalError,
    PerturbationTooLargeError,
    ProbeRankSaturatedError,
    QuadratureNotConvergedError,
)
from .estimates import (
    BoundaryRatio,
    EstimateReport,
    compute_boundary_ratio,
    verify_concentration,
    verify_corollary,
    verify_identity_12,
    verify_resolvent_estimates,
)
from .grid import CollocationGrid, build_grid
from .oracle1d import (
    MatchingSystem,
    OracleRoot,
    find_real_roots,
    matching_determinant,
    to_pencil_coordinates,
)
from .pencil import PencilBlocks, StatePair, apply_pencil, build_pencil
from .perturbation import (
    ContinuityReport,
    GammaEstimate,
    eigenvalue_tracking,
    gamma_on_contour,
    projector_continuity,
)
from .resolvent import (
    Factorization,
    ResolventBlocks,
    extract_blocks,
    factorize,
    solve,
    verify_factorization_identity,
)
from .spectral import (
    Contour,
    EigenResult,
    SpectralProjection,
    eigs_in_contour,
    multiplicity,
    spectral_projector,
    sweep_real_axis,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryRatio",
    "CoercivityParams",
    "CoercivityReport",
    "CollocationGrid",
    "ConfigurationError",
    "ContinuityReport",
    "Contour",
    "ContourGrazesSpectrumError",
    "Contrast",
    "CutoffFunction",
    "DegenerateContrastError",
    "DegenerateStateError",
    "Domain1D",
    "EigenResult",
    "EstimateReport",
    "Factorization",
    "GammaEstimate",
    "InputError",
    "IteigError",
    "MatchingSystem",
    "NearSingularError",
    "NumericalError",
    "OracleRoot",
    "PencilBlocks",
    "PerturbationTooLargeError",
    "ProbeRankSaturatedError",
    "QuadratureNotConvergedError",
    "ResolventBlocks",
    "SpectralProjection",
    "StatePair",
    "apply_pencil",
    "build_grid",
    "build_pencil",
    "check_hypotheses",
    "compute_boundary_ratio",
    "eigenvalue_tracking",
    "eigs_in_contour",
    "extract_blocks",
    "factorize",
    "find_real_roots",
    "gamma_on_contour",
    "make_cutoff",
    "matching_determinant",
    "multiplicity",
    "projector_continuity",
    "solve",
    "spectral_projector",
    "sweep_real_axis",
    "to_pencil_coordinates",
    "verify_concentration",
    "verify_corollary",
    "verify_factorization_identity",
    "verify_identity_12",
    "verify_resolvent_estimates",
]
