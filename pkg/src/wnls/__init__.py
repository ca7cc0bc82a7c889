"""Pseudospectral 2D NLS with renormalized white-noise potential.

The package is organized bottom-up: spectral grid and field algebra,
seeded noise synthesis with mollification and Wick renormalization,
Littlewood-Paley Besov norms, a Strang split-step integrator in the gauge
frame, conserved-quantity diagnostics, and experiment drivers with
deterministic reports.  Serialization and the CLI sit on top.
"""

from .besov import BlockDecomposition, besov_norm, block_norms, lp_block_decompose, max_block_index
from .diagnostics import (
    DiagnosticSeries,
    compute_series,
    drift_refinement,
    drift_report,
    transformed_energy,
    transformed_mass,
)
from .errors import (
    BadMagic,
    BlowUp,
    ConfigError,
    DegenerateFit,
    GridMismatch,
    HeaderMismatch,
    NonPhysical,
    NonZeroMean,
    SmallDataViolation,
    SnapshotError,
    TruncatedPayload,
    UnresolvedMollifier,
    WnlsError,
)
from .experiments import (
    ExperimentReport,
    RateFit,
    Verdict,
    fit_log_rate,
    linear_fit,
    run_ceps_growth,
    run_convergence,
    run_mc_moments,
    run_mc_regularity,
    run_phase_check,
    scalar_moment_oracle,
)
from .io import (
    load_config_file,
    read_field_snapshot,
    read_series_csv,
    write_field_snapshot,
    write_report_json,
    write_series_csv,
    write_table_csv,
)
from .noise import (
    GAUSSIAN,
    RAISED_COSINE,
    GaugeWeights,
    MollifierSpec,
    NoiseRealization,
    RenormEnvironment,
    UnresolvedMollifierWarning,
    build_environment,
    gauge_weights,
    get_mollifier,
    mollify,
    renorm_constant,
    sample_white_noise,
    scale_noise,
    solve_poisson,
    wick_gradient_square,
)
from .solver import (
    SmallDataCheck,
    SolverConfig,
    Trajectory,
    check_small_data,
    gauge_to_u,
    gauge_to_v,
    integrate,
    strang_step,
    with_renormalization,
)
from .spectral import (
    TWO_PI,
    SpectralField,
    TorusGrid,
    VectorField,
    abs_square,
    constant_field,
    dealias,
    derivative,
    from_modes,
    gradient,
    inverse_laplacian,
    laplacian,
    lp_norm,
    pointwise_product,
    random_band_limited,
    sobolev_norm,
    to_physical,
    to_spectral,
    zero_field,
)

__version__ = "0.1.0"
