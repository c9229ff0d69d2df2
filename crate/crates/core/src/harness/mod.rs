//! Manufactured solutions, error norms and convergence studies.

mod cases;
mod errors;
mod study;

pub use cases::{
    gaussian_source_case, mms_slab_1d, mms_steady_2d, mms_transient_2d, DensityFn, GaussianSourceCase,
    ManufacturedCase, ScatteringVariant, SELF_CHECK_TOL,
};
pub use errors::{error_l2, error_l2_filtered, error_superconvergent_points, PointSet, Region};
pub use study::{
    run_convergence_study, ConvergenceTable, Margin, StudyConfig, StudyRow, TimeScheme, METRIC_DOWNWIND_EDGE,
    METRIC_INTERIOR_RADAU, METRIC_L2, METRIC_L2_FILTERED, METRIC_L2_INTERIOR,
};
