//! Reference-element polynomial machinery.

mod basis;
pub mod dense;
mod legendre;
mod quadrature;

pub use basis::{basis_eval, TensorBasis};
pub use legendre::{
    legendre, legendre_derivative, legendre_with_derivative, radau, radau_roots, RadauSide,
};
pub use quadrature::{gauss_legendre, Quadrature};
