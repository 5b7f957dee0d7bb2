"""Exact k-polar slice sampling: kernels, couplings, and gap machinery.

The package is organized around one factorization: an unnormalized density
splits into a radial power ``||x||^(k-d)`` and a slice factor whose
super-level sets are explicit. Everything else follows from it:

* :mod:`polarslice.mathcore` - radial profiles (phi machinery) and sphere
  geometry;
* :mod:`polarslice.targets` - the tractable target families;
* :mod:`polarslice.kernels` - exact transitions and chain runners (compiled
  core with a pure-Python fallback, selected at import);
* :mod:`polarslice.coupling` - shared-randomness couplings, contraction
  ratios and sharpness probes;
* :mod:`polarslice.spectral` - level-set functions, class-membership checks,
  gap bounds, IAT and the empirical-gap heuristic;
* :mod:`polarslice.cli` - the reproducible experiment runner.
"""

from ._backend import backend_name
from .coupling import (
    ContractionEstimate,
    CoupledPair,
    contraction_ratio,
    coupled_samples,
    coupled_step,
    ray_pair,
    sharpness_probe,
    theoretical_contraction_rate,
)
from .errors import (
    ConfigError,
    DegeneratePairError,
    DegenerateSeriesError,
    DomainError,
    EmptySliceError,
    HypothesisError,
    NonFiniteError,
    NotAvailableError,
    NotInLambdaKError,
    OriginError,
    OutOfSupportError,
    PolarSliceError,
    RejectionBudgetError,
    SeriesTooShortError,
    UnsupportedFamilyError,
)
from .kernels import (
    ChainConfig,
    ChainRun,
    TransitionRecord,
    direction_update,
    draw_threshold,
    radial_update,
    run_chain,
    run_radial_chain,
    step,
    step_samples,
)
from .mathcore import (
    PhiSpec,
    ball_radius_from_uniform,
    custom_phi,
    exp_phi,
    linear_phi,
    phi_inverse,
    phi_inverse_extended,
    power_integral,
    power_phi,
    quadratic_phi,
    sample_unit_sphere,
    sphere_integral_mc,
    surface_area,
)
from .rng import RngStream
from .spectral import (
    GapBound,
    IATEstimate,
    LevelSetFn,
    construct_matching_dk,
    empirical_gap,
    gap_lower_bound,
    iat_estimate,
    lambda_k_boundary,
    lambda_k_check,
    level_set_closed_form,
    level_set_mc,
)
from .targets import (
    DkTarget,
    ParetoShellTarget,
    QuadraticChi,
    RotAsymTarget,
    RotInvTarget,
    StdTTarget,
    TargetFamily,
    log_density,
    log_factor0,
    log_factor1,
    quadratic_chi,
    radial_stationary_cdf,
    slice_boundary,
    stationary_point,
    stationary_radius,
)

__version__ = "0.1.0"
