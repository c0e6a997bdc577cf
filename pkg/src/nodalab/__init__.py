"""Level-set functionals of Laplace eigenfunctions and harmonic polynomials.

Scalar fields with exact derivatives, solid spherical harmonics built by
rational Fischer projection, level-set meshing and Monte Carlo quadrature,
and a battery of identity / monotonicity checks with explicit error budgets.
"""

from .fields import (
    ConstantWeight,
    FieldError,
    FieldSample,
    GaussianWeight,
    GradientNormField,
    ScalarField,
    SparsePolynomial,
    TrigEigenfunction,
    WeightedField,
    field_from_json,
    field_to_json,
    make_box_eigenfunction,
    make_torus_eigenfunction,
)
from .harmonics import (
    HarmonicBasis,
    harmonic_dimension,
    harmonic_project,
    make_basis,
    random_solid_harmonic,
    sphere_decompose,
)
from .levelset import (
    Domain,
    LevelSetError,
    LevelSetMesh,
    MCEstimate,
    default_shell_width,
    extract,
    mc_mean,
    mesh_to_csv,
    mesh_to_off,
    radial_profile,
    thin_shell,
    weighted_area,
    weighted_area_error_bound,
)
from .analysis import (
    DensityEstimate,
    IdentityReport,
    MonotonicityReport,
    UnimodalityReport,
    corollary_unimodality,
    curvature_identity_check,
    divergence_identity_check,
    explore_general_monotonicity,
    flag_near_critical,
    levelset_derivative_check,
    monotonicity_check,
    prop51_check,
    robin_identity_check,
    spherical_monotonicity,
    unimodality_check,
    value_distribution_density,
)

__all__ = [
    "ConstantWeight",
    "DensityEstimate",
    "Domain",
    "FieldError",
    "FieldSample",
    "GaussianWeight",
    "GradientNormField",
    "HarmonicBasis",
    "IdentityReport",
    "LevelSetError",
    "LevelSetMesh",
    "MCEstimate",
    "MonotonicityReport",
    "ScalarField",
    "SparsePolynomial",
    "TrigEigenfunction",
    "UnimodalityReport",
    "WeightedField",
    "corollary_unimodality",
    "curvature_identity_check",
    "default_shell_width",
    "divergence_identity_check",
    "explore_general_monotonicity",
    "extract",
    "field_from_json",
    "field_to_json",
    "flag_near_critical",
    "harmonic_dimension",
    "harmonic_project",
    "levelset_derivative_check",
    "make_basis",
    "make_box_eigenfunction",
    "make_torus_eigenfunction",
    "mc_mean",
    "mesh_to_csv",
    "mesh_to_off",
    "monotonicity_check",
    "prop51_check",
    "radial_profile",
    "random_solid_harmonic",
    "robin_identity_check",
    "sphere_decompose",
    "spherical_monotonicity",
    "thin_shell",
    "unimodality_check",
    "value_distribution_density",
    "weighted_area",
    "weighted_area_error_bound",
]

__version__ = "0.1.0"
