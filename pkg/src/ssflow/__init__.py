"""Complex dimensions, orbit counting and explicit formulas for self-similar flows."""

from importlib.metadata import PackageNotFoundError, version

from .diophantine import (
    ContinuedFraction,
    OstrowskiExpansion,
    QuadraticIrrational,
    SimultaneousApproximation,
    approximability_profile,
    expand_cf,
    orbit_of_approximation,
    ostrowski,
    parse_constant,
    simultaneous_approx,
)
from .dimensions import (
    ComplexDimension,
    DimensionWindow,
    PerturbationSeries,
    density_check,
    dimension_free_region,
    dimensions_window,
    lattice_dimensions,
    nonlattice_dimensions,
    perturbation_series,
    predict_dimension,
    refine_root,
)
from .errors import (
    AccuracyError,
    CapabilityError,
    DomainError,
    FlowError,
    NumericIntegrityError,
    OutOfCensusError,
    PreconditionError,
    ResourceError,
    SolverError,
    ValidationError,
)
from .explicit import (
    ExplicitExpansion,
    PeriodicProfile,
    error_scaling_report,
    lattice_psi,
    nonlattice_psi,
    psi_level2,
    tauberian_bracket,
)
from .flow import (
    DimensionPair,
    FlowSpec,
    LatticeStructure,
    cantor_flow,
    classify_lattice,
    fibonacci_flow,
    golden_flow,
    load_flow,
    named_flow,
    solve_dimension,
)
from .orbits import (
    OrbitCensus,
    OrbitRecord,
    enumerate_orbits,
    euler_sum,
    log_euler_product,
    pi_count,
    psi,
    psi_integral,
    theta,
)
from .zeta import ZetaEvaluation, eval_zeta, log_deriv_at_zero, zeta_zero_free

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.0.0"
