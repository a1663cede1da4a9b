"""Natural diagonal lifted structures on cotangent bundles of space forms.

The package builds the almost product tensor P, the lifted metric G and the
fundamental 2-form Omega on T*M over constant-curvature bases, and verifies
their defining identities (P^2 = I, vanishing Nijenhuis tensor, metric
compatibility, closure of Omega) numerically with exact forward-mode
derivatives at sampled phase points.
"""

__version__ = "0.1.0"

from .coefficients import (
    ScalarFamily,
    StructureSpec,
    affine,
    almost_product_spec,
    complete_almost_product,
    compatible_metric_coeffs,
    constant,
    exponential,
    integrable_b_coeffs,
    integrable_spec,
    para_kahler_mu,
    polynomial,
    rational_family,
    rational_spec,
    with_metric,
)
from .errors import (
    ChartDomainError,
    ConfigError,
    ContractError,
    DegenerateCoefficient,
    RangeError,
)
from .lifted import (
    G_adapted,
    G_coordinate,
    LiftedStructure,
    Omega_adapted,
    Omega_coordinate,
    Omega_coordinate_at,
    P_adapted,
    P_coordinate,
    P_coordinate_function,
    StructureKind,
)
from .phase import (
    CotangentPoint,
    Frame,
    FrameBasis,
    FrameVector,
    adapted_basis,
    energy_density,
    make_point,
)
from .report import CheckReport, Witness
from .spaceform import (
    ChartModel,
    SpaceForm,
    check_space_form,
    christoffel_at,
    conformal_ball,
    curvature_at,
    flat_space,
    inverse_metric_at,
    metric_at,
    perturbed_conformal,
)
from .verify import (
    DEFAULT_TOLERANCES,
    PhaseSample,
    analytic_dOmega,
    check_almost_product,
    check_closure,
    check_closure_agreement,
    check_compatibility,
    check_integrability,
    check_metric_signature,
    check_para_kahler,
    exterior_derivative_2form,
    fd_oracle,
    nijenhuis_at,
    run_check,
    sample_points,
)
