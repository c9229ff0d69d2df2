//! Upwind discontinuous Galerkin discretization of the discrete-ordinates system.

mod field;
mod operator;
mod problem;
mod sweep;

pub use field::{eval_density, eval_field, project_l2, project_l2_with, project_scalar, DgField, DgSpace};
pub(crate) use field::element_quadrature;
pub use operator::{apply_transport, scattering_source, upwind_flux, TANGENTIAL_TOL};
pub(crate) use operator::{source_loads, WeightedMass};
pub use problem::{Coefficient, PhaseFn, TransportProblem};
pub use sweep::{sweep_all, transport_sweep, SweepContext};
