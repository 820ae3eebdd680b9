"""Knot topology of non-Hermitian SVD factors of SSH-family Hamiltonians."""

from .effective import EffectiveModel, eff_bloch, linearization_error, realspace_chain
from .errors import (
    DegeneracyError,
    DegeneratePointError,
    DomainError,
    GaplessError,
    InvalidInputError,
    NhKnotError,
    NumericalError,
    PrecisionError,
    SingularityError,
    UnclassifiedTransitionError,
)
from .gauge import (
    CATALOG,
    FIGURE_GENERAL,
    GaugeChoice,
    a_map,
    apply_gauge,
    build_a,
    singular_values,
    svd_factors,
    v_matrix,
)
from .linalg2 import commutator_norm, eig2, herm_eig, unitary_error
from .models import BlochModel, bloch_h, d_vector, find_gap_closings, gap, preset
from .topology import (
    berry_phase,
    extract_braid,
    gauge_knot,
    hermitian_winding,
    nh_winding,
)
from .transitions import classify_transition, discontinuity, find_ep, scan_omega

__all__ = [
    "CATALOG",
    "FIGURE_GENERAL",
    "BlochModel",
    "DegeneracyError",
    "DegeneratePointError",
    "DomainError",
    "EffectiveModel",
    "GaplessError",
    "GaugeChoice",
    "InvalidInputError",
    "NhKnotError",
    "NumericalError",
    "PrecisionError",
    "SingularityError",
    "UnclassifiedTransitionError",
    "a_map",
    "apply_gauge",
    "berry_phase",
    "bloch_h",
    "build_a",
    "classify_transition",
    "commutator_norm",
    "d_vector",
    "discontinuity",
    "eff_bloch",
    "eig2",
    "extract_braid",
    "find_ep",
    "find_gap_closings",
    "gap",
    "gauge_knot",
    "herm_eig",
    "hermitian_winding",
    "linearization_error",
    "nh_winding",
    "preset",
    "realspace_chain",
    "scan_omega",
    "singular_values",
    "svd_factors",
    "unitary_error",
    "v_matrix",
]
