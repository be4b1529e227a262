"""Phase-field free-discontinuity energies and their homogenised limits.

Finite-difference evaluation and minimisation of Ambrosio-Tortorelli-type
functionals with spatially varying (periodic or stationary random)
coefficients: bulk and surface cell problems, scale sweeps estimating the
homogenised bulk and surface integrands, Monte-Carlo averaging with
stationarity and subadditivity diagnostics, and a fidelity-convergence
check against an exact 1D Mumford-Shah oracle.
"""

__version__ = "0.1.0"

from .cell_problems import (
    DEFAULT_LAMBDA_LADDER,
    CellResult,
    LadderRung,
    bulk_cell_value,
    constraint_residual,
    surface_cell_value,
)
from .energy import EnergyBreakdown, energy_gradient, evaluate_energy
from .errors import (
    ConfigurationError,
    InvalidInputError,
    SolverError,
    UnsupportedConfigurationError,
)
from .fidelity import (
    FidelityProblem,
    FidelityResult,
    at_fidelity_minimize,
    fidelity_data_preset,
    load_data_csv,
    ms1d_brute_force,
    ms1d_dp_oracle,
)
from .grid import (
    BoundaryMask,
    Grid,
    PhaseFieldState,
    apply_gradient,
    build_box_grid,
    build_cube_grid,
    jump_datum,
    rotation_matrix,
)
from .homogenize import (
    FieldSample,
    HomEstimate,
    McReport,
    RandomFieldSpec,
    StationarityReport,
    SubadditivityReport,
    cv_constant,
    extrapolate_limit,
    f_hom_estimate,
    g_hom_estimate,
    mc_estimate,
    sample_random_checkerboard,
    stationarity_check,
    subadditivity_check,
)
from .integrands import (
    BulkIntegrand,
    Checkerboard,
    Homogeneous,
    Laminate,
    PsiFunction,
    RandomCheckerboard,
    SurfaceIntegrand,
    integrand_from_json,
    integrand_to_json,
    validate_classes,
)
from .solvers import (
    SolveDiagnostics,
    SolveOptions,
    alternating_minimize,
    profile_1d_value,
)
