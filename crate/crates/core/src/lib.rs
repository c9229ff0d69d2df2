//! Upwind discontinuous Galerkin discrete-ordinates transport with SIAC
//! post-processing.

pub mod angular;
pub mod dg;
pub mod error;
pub mod harness;
pub mod mesh;
pub mod numerics;
pub mod siac;
pub mod solvers;

pub use angular::{angular_average, ordinates_slab, ordinates_sphere_cl, OrdinateKind, OrdinateSet, OrdinateSpec};
pub use dg::{
    apply_transport, eval_density, eval_field, project_l2, project_scalar, scattering_source, transport_sweep,
    upwind_flux, Coefficient, DgField, DgSpace, TransportProblem,
};
pub use error::{Error, Result};
pub use harness::{
    error_l2, error_superconvergent_points, gaussian_source_case, mms_slab_1d, mms_steady_2d, mms_transient_2d,
    run_convergence_study, ConvergenceTable, ManufacturedCase, StudyConfig, TimeScheme,
};
pub use siac::{build_kernel, filter_line_2d, filter_point_1d, kernel_fourier, SiacFilter, SiacKernel};
pub use mesh::{uniform_mesh, Boundary, Mesh, Side};
pub use solvers::{
    bdf_advance, dsa_correct, solve_steady, solve_transient, source_iteration, BdfOrder, BdfState, DtRule,
    IterationOptions, SolveReport,
};
