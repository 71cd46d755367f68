"""rowdil - Dilations and wandering subspaces on truncated kernel spaces.

Computes canonical dilations of pure commuting row contractions, wandering
subspaces of shift-invariant subspaces, and K-inner functions on the
Drury-Arveson space and its H(K_lambda) relatives, all on finite
truncations in an orthonormal monomial basis.

Example:
    >>> from rowdil import KernelSpec, TruncatedSpace, compressed_shift, canonical_dilation
    >>>
    >>> space = TruncatedSpace(KernelSpec.drury_arveson(2), max_degree=3)
    >>> T = compressed_shift(space)
    >>> Pi = canonical_dilation(T, n_cut=3)
    >>> Pi.isometry_defect() < 1e-10
    True
"""

from __future__ import annotations

import logging

__version__ = "0.1.0"

# Errors
from rowdil.errors import (
    RowdilError,
    ConfigError,
    DimensionMismatch,
    PreconditionError,
    NotPSD,
    NotCommuting,
    NotRowContraction,
    NotPure,
    NotMinimal,
    NotDilation,
    NotInvariant,
    RangeMismatch,
    MalformedRepresentation,
    NotPartialIsometry,
    NotQuasiHomogeneous,
    NotHomogeneous,
    ZeroPolynomial,
    PointOutsideBall,
)

# Linear algebra
from rowdil.numerics import (
    Tolerances,
    DEFAULT_TOLERANCES,
    PRESETS,
    get_preset,
    numerical_rank,
    orthonormal_range,
    null_space,
    psd_sqrt,
    operator_norm,
    principal_angle_gap,
    intersect_subspaces,
    lstsq_intertwiner,
    random_unitary,
    random_isometry,
)

# Spaces
from rowdil.kernel_spaces import (
    MultiIndex,
    KernelSpec,
    TruncatedSpace,
    monomial_norm_sq,
    kernel_eval,
    multiplication_matrix,
    point_evaluation_vector,
    evaluate,
)

# Row contractions
from rowdil.row_contractions import (
    OperatorTuple,
    DefectData,
    apply_PT,
    is_row_contraction,
    purity_residuals,
    is_pure,
    defect,
    compressed_shift,
    random_pure_tuple,
    random_spherical_unitary,
)

# Dilations
from rowdil.dilation import (
    DilationMap,
    canonical_dilation,
    minimality_rank,
    is_minimal,
    validate_dilation,
    match_minimal_dilations,
    factor_dilation,
)

# Invariant subspaces
from rowdil.invariant_subspaces import (
    Subspace,
    RepresentationMap,
    is_invariant,
    full_subspace,
    wandering_violation,
    wandering_subspace,
    generated_subspace,
    zero_based_subspace,
    representation_via_dilation,
    wandering_from_representation,
    compare_representations,
)

# Inner functions
from rowdil.inner_functions import (
    MatrixPolynomial,
    QuasiHomogeneityCertificate,
    hk_norm,
    is_K_inner,
    quasi_homogeneous_decompose,
    multiplier_block_norm,
    multiplier_matrix,
    multiplier_norm_truncated,
    NormEqualityReport,
    verify_norm_equality,
    beurling_wandering,
    non_closed_range_probe,
    BeurlingResult,
    multiplier_from_representation,
)

logging.getLogger(__name__).addHandler(logging.NullHandler())

__all__ = [
    # Version
    "__version__",
    # Errors
    "RowdilError",
    "ConfigError",
    "DimensionMismatch",
    "PreconditionError",
    "NotPSD",
    "NotCommuting",
    "NotRowContraction",
    "NotPure",
    "NotMinimal",
    "NotDilation",
    "NotInvariant",
    "RangeMismatch",
    "MalformedRepresentation",
    "NotPartialIsometry",
    "NotQuasiHomogeneous",
    "NotHomogeneous",
    "ZeroPolynomial",
    "PointOutsideBall",
    # Linear algebra
    "Tolerances",
    "DEFAULT_TOLERANCES",
    "PRESETS",
    "get_preset",
    "numerical_rank",
    "orthonormal_range",
    "null_space",
    "psd_sqrt",
    "operator_norm",
    "principal_angle_gap",
    "intersect_subspaces",
    "lstsq_intertwiner",
    "random_unitary",
    "random_isometry",
    # Spaces
    "MultiIndex",
    "KernelSpec",
    "TruncatedSpace",
    "monomial_norm_sq",
    "kernel_eval",
    "multiplication_matrix",
    "point_evaluation_vector",
    "evaluate",
    # Row contractions
    "OperatorTuple",
    "DefectData",
    "apply_PT",
    "is_row_contraction",
    "purity_residuals",
    "is_pure",
    "defect",
    "compressed_shift",
    "random_pure_tuple",
    "random_spherical_unitary",
    # Dilations
    "DilationMap",
    "canonical_dilation",
    "minimality_rank",
    "is_minimal",
    "validate_dilation",
    "match_minimal_dilations",
    "factor_dilation",
    # Invariant subspaces
    "Subspace",
    "RepresentationMap",
    "is_invariant",
    "full_subspace",
    "wandering_violation",
    "wandering_subspace",
    "generated_subspace",
    "zero_based_subspace",
    "representation_via_dilation",
    "wandering_from_representation",
    "compare_representations",
    # Inner functions
    "MatrixPolynomial",
    "QuasiHomogeneityCertificate",
    "hk_norm",
    "is_K_inner",
    "quasi_homogeneous_decompose",
    "multiplier_block_norm",
    "multiplier_matrix",
    "multiplier_norm_truncated",
    "NormEqualityReport",
    "verify_norm_equality",
    "beurling_wandering",
    "non_closed_range_probe",
    "BeurlingResult",
    "multiplier_from_representation",
]
