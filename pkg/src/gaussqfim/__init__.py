"""Multiparameter quantum Fisher information for Gaussian states."""

from .channels import (
    CoherentProbe,
    Element,
    ExplicitProbe,
    GaussianUnitary,
    ModelSpec,
    MomentDerivatives,
    ThermalProbe,
    apply,
    coherent_squeeze_rotate_model,
    compose,
    displace,
    displacement_model,
    model_derivatives,
    model_moments,
    rotation,
    squeeze,
    thermal_squeeze_rotate_model,
)
from .estimation import (
    LogDerivativeCoeffs,
    QfimReport,
    bound_rld,
    bound_sld,
    full_report,
    gamma,
    most_informative,
    rld_coeffs,
    rld_qfim,
    saturation_matrix,
    sld_coeffs,
    sld_qfim,
)
from .exceptions import (
    GaussQfimError,
    InvalidArgumentError,
    NumericalConsistencyError,
    SingularCovarianceError,
    SingularQfimError,
    SpecError,
    UnsupportedDerivativeError,
)
from .matalg import kron, penrose_residuals, pinv, trace_abs, unvec, vec
from .phase_space import (
    GaussianState,
    SymplecticForm,
    ValidationReport,
    coherent_state,
    nbar_of_beta,
    omega,
    thermal_state,
    validate_state,
)

__version__ = "0.1.0"
