"""Directional quantile surfaces from arbitrary observers.

Build a projection cache once, then query directional quantiles, extract
and transfer surfaces, build joint confidence bands, and run seeded
Monte-Carlo studies against analytic oracles.
"""

from .errors import (
    CapabilityError,
    ConfigurationError,
    DomainError,
    EstimationError,
    NoAdmissibleBandError,
    NumericalError,
    ParseError,
    QsurfError,
)
from .geometry import (
    Band,
    DirectionGrid,
    HalfSpace,
    explicit_grid,
    halfspace_at,
    make_direction_grid,
)
from .inference import (
    BKResidualReport,
    ConfidenceBand,
    CovarianceMatrix,
    HEstimate,
    bahadur_kiefer_rate,
    bk_residual,
    build_covariance,
    confidence_band,
    default_bandwidth,
    empirical_process_at_quantile,
    estimate_h,
    estimate_h_grid,
    sample_gaussian_field,
)
from .models import (
    Gaussian,
    GaussianMixture,
    Model,
    ProjectedLaw,
    UniformDisk,
    UniformSpiral,
    intersection_prob,
    model_from_config,
    paper_mixture,
    rho_gamma,
    sample,
    true_directional_quantile,
    true_h,
)
from .quantiles import (
    DeltaRange,
    QuantileSurface,
    TukeyRegion2D,
    directional_quantile,
    hausdorff_distance,
    median_antipodal_gap,
    psi_hat,
    quantile_halfspace_mass,
    quantile_surface,
    surface_from_document,
    transfer_surface,
    tukey_region_2d,
)
from .samples import (
    Dataset,
    ProjectionCache,
    build_projection_cache,
    empirical_cdf,
    empirical_quantile,
    load_dataset,
    order_stat_index,
)
from .seeding import make_rng
from .verify import (
    StudyConfig,
    StudyReport,
    emit_report,
    lil_rate,
    run_bk_study,
    run_clt_study,
    run_consistency_study,
    run_coverage_study,
    run_lil_study,
    run_psi_study,
    run_study,
    strong_approx_rate,
    study_config_from_config,
)

__version__ = "0.1.0"
