//! SIAC kernels, exact piecewise convolution, line filtering, and divided
//! differences.

mod divided;
mod filter;
mod kernel;

pub use divided::{divided_difference, divided_difference_grid, DividedDifference};
pub use filter::{filter_line_2d, filter_point_1d, LineDirection, SiacFilter, Stencil};
pub use kernel::{bspline_eval, build_kernel, kernel_fourier, SiacKernel};
