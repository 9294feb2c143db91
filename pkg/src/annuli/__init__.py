"""Lattice points in thin annuli: counting, smoothing, and statistics."""

from .errors import (
    BudgetExceeded,
    DomainError,
    InconclusiveScan,
    RelationDetected,
)
from .lattice import (
    DEFAULT_LATTICE,
    AnnulusQuery,
    DualPoint,
    LatticePoint,
    LatticeSpec,
    count_annulus,
    count_disc,
    disc_error,
    dual_squared_norm,
    enumerate_norms,
    norm_gap,
    normalized_disc_error,
    sharp_statistic,
    squared_norm,
)
from .smoothing import (
    KernelSpec,
    SmoothingParams,
    default_kernel,
    smooth_disc_count,
    smooth_statistic,
    smooth_statistic_from_counts,
)
from .ensemble import (
    EnsembleConfig,
    MomentReport,
    gaussian_cdf,
    ks_distance_to_gaussian,
    mean_decay_check,
    moment_report,
    predicted_sigma_squared,
    report_from_values,
    sample_points,
    sharp_smooth_difference_moment,
    sharp_statistic_series,
    smooth_statistic_series,
    spectral_sigma_squared,
)
from .closepairs import (
    ClosePairQuery,
    QuadFormQ1,
    close_pair_scaling_study,
    count_close_pairs,
    count_shell_solutions,
    q1_evaluate,
)
from .diophantine import (
    DiophQuery,
    ExponentFit,
    linear_form_minimum,
    polynomial_minimum,
    primitive_dual_norms,
    sqrt_sum_gap,
)
from .geometry import (
    GeneralLattice,
    StretchMap,
    box_volume,
    count_box_points,
    stretch_determinant_check,
    successive_minima,
    successive_minima_vectors,
)

__version__ = "0.1.0"
