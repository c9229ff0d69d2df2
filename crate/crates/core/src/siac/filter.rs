use crate::dg::DgField;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::numerics::{gauss_legendre, TensorBasis};

use super::kernel::{bspline_eval, SiacKernel};

/// Convolution weights of one output point: for every cell offset relative
/// to the cell holding the point, one weight per basis function.
#[derive(Clone, Debug)]
pub struct Stencil {
    entries: Vec<([i64; 2], Vec<f64>)>,
}

impl Stencil {
    /// Builds the weights of `∫ K(τ) u(s̄ + τ v) dτ`, where `s̄` is the point
    /// in cell units relative to the lower corner of its cell and `v` the
    /// displacement per unit of kernel variable, also in cell units.
    fn build(kernel: &SiacKernel, basis: &TensorBasis, s_bar: [f64; 2], v: [f64; 2]) -> Stencil {
        let dim = basis.dim();
        let hw = kernel.reference_half_width();
        let mut breaks: Vec<f64> = kernel.breaks();
        for axis in 0..dim {
            if v[axis] == 0.0 {
                continue;
            }
            let a = s_bar[axis] - hw * v[axis].abs();
            let b = s_bar[axis] + hw * v[axis].abs();
            let mut m = a.ceil();
            while m <= b.floor() {
                breaks.push((m - s_bar[axis]) / v[axis]);
                m += 1.0;
            }
        }
        breaks.retain(|t| t.abs() <= hw);
        breaks.sort_by(f64::total_cmp);
        breaks.dedup_by(|a, b| (*a - *b).abs() < 1e-13);

        let n = kernel.order();
        let k = basis.degree();
        let points = if dim == 1 { (k + n).div_ceil(2) + 1 } else { (2 * k + n).div_ceil(2) + 1 };
        let quad = gauss_legendre(points);
        let nd = basis.len();
        let mut entries: Vec<([i64; 2], Vec<f64>)> = Vec::new();
        let mut vals = vec![0.0; nd];
        for seg in breaks.windows(2) {
            let (t0, t1) = (seg[0], seg[1]);
            if t1 - t0 < 1e-14 {
                continue;
            }
            let mid = 0.5 * (t0 + t1);
            let mut cell = [0i64; 2];
            for axis in 0..dim {
                cell[axis] = (s_bar[axis] + mid * v[axis]).floor() as i64;
            }
            let slot = match entries.iter().position(|(c, _)| *c == cell) {
                Some(p) => p,
                None => {
                    entries.push((cell, vec![0.0; nd]));
                    entries.len() - 1
                }
            };
            for (x, w) in quad.iter() {
                let t = t0 + 0.5 * (x + 1.0) * (t1 - t0);
                let kv = kernel
                    .coeffs()
                    .iter()
                    .zip(kernel.offsets())
                    .map(|(c, o)| c * bspline_eval(n, t - o))
                    .sum::<f64>();
                let mut xi = [0.0; 2];
                for axis in 0..dim {
                    xi[axis] = (2.0 * (s_bar[axis] + t * v[axis] - cell[axis] as f64) - 1.0).clamp(-1.0, 1.0);
                }
                basis.eval(&xi, &mut vals);
                let scale = 0.5 * (t1 - t0) * w * kv;
                for (acc, b) in entries[slot].1.iter_mut().zip(&vals) {
                    *acc += scale * b;
                }
            }
        }
        Stencil { entries }
    }

    /// Cell offsets touched by the stencil.
    pub fn offsets(&self) -> impl Iterator<Item = [i64; 2]> + '_ {
        self.entries.iter().map(|(c, _)| *c)
    }

    /// Applies the weights to component `c` of `field`, centred on `elem`.
    pub fn apply(&self, field: &DgField, c: usize, elem: usize) -> Result<f64> {
        let mesh = field.space().mesh();
        let base = mesh.cell_of(elem);
        let mut sum = 0.0;
        for (off, w) in &self.entries {
            let nb = shifted_cell(mesh, base, *off).ok_or_else(|| Error::FilterSupport {
                point: mesh.element_center(elem)[..mesh.dim()].to_vec(),
            })?;
            sum += field.element(c, nb).iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(sum)
    }

    /// Whether every touched cell exists (wrapping on periodic axes).
    pub fn fits(&self, mesh: &Mesh, elem: usize) -> bool {
        let base = mesh.cell_of(elem);
        self.entries.iter().all(|(off, _)| shifted_cell(mesh, base, *off).is_some())
    }
}

fn shifted_cell(mesh: &Mesh, base: [usize; 2], off: [i64; 2]) -> Option<usize> {
    let counts = mesh.counts();
    let mut c = [0usize; 2];
    for axis in 0..mesh.dim() {
        let n = counts[axis] as i64;
        let mut i = base[axis] as i64 + off[axis];
        if mesh.is_periodic(axis) {
            i = i.rem_euclid(n);
        } else if i < 0 || i >= n {
            return None;
        }
        c[axis] = i as usize;
    }
    Some(mesh.element_index(c))
}

/// Direction of a line filter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LineDirection {
    /// `θ = atan(Δy/Δx)`, the cell diagonal.
    Diagonal,
    Angle(f64),
}

/// Convolution geometry of a kernel on a mesh: 1D filter, or line filter
/// in 2D. Stencils depend only on the point's position inside its cell.
#[derive(Clone, Debug)]
pub struct SiacFilter {
    kernel: SiacKernel,
    basis: TensorBasis,
    /// Kernel-variable step in cell units.
    step: [f64; 2],
    /// Physical length of one unit of kernel variable (`H` in 1D, `h_t` on a line).
    line_scaling: f64,
    theta: f64,
}

impl SiacFilter {
    /// 1D filter, or the line filter along the cell diagonal in 2D, with the
    /// kernel scaled by `H = max(Δx, Δy)` (the uniform mesh size).
    pub fn new(field_basis: &TensorBasis, mesh: &Mesh) -> Result<Self> {
        let h = mesh.spacing();
        let scaling = if mesh.dim() == 1 { h[0] } else { h[0].max(h[1]) };
        let kernel = super::build_kernel(field_basis.degree().max(1), scaling)?;
        Self::with_kernel(kernel, field_basis, mesh, LineDirection::Diagonal)
    }

    pub fn with_kernel(kernel: SiacKernel, basis: &TensorBasis, mesh: &Mesh, dir: LineDirection) -> Result<Self> {
        let h = mesh.spacing();
        if basis.dim() != mesh.dim() {
            return Err(Error::invalid("basis and mesh dimensions differ"));
        }
        if mesh.dim() == 1 {
            return Ok(SiacFilter {
                step: [kernel.scaling() / h[0], 0.0],
                line_scaling: kernel.scaling(),
                theta: 0.0,
                kernel,
                basis: *basis,
            });
        }
        let theta = match dir {
            LineDirection::Diagonal => (h[1] / h[0]).atan(),
            LineDirection::Angle(t) => t,
        };
        let (c, s) = (theta.cos(), theta.sin());
        let h_t = kernel.scaling() / c.abs().max(s.abs());
        let cut = |v: f64| if v.abs() < 1e-14 { 0.0 } else { v };
        Ok(SiacFilter {
            step: [cut(h_t * c / h[0]), cut(h_t * s / h[1])],
            line_scaling: h_t,
            theta,
            kernel,
            basis: *basis,
        })
    }

    pub fn kernel(&self) -> &SiacKernel {
        &self.kernel
    }

    /// Line angle `θ` (0 in 1D).
    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Scaling along the line, `h_t` (equal to `H` in 1D).
    pub fn line_scaling(&self) -> f64 {
        self.line_scaling
    }

    /// Stencil of a point with reference coordinates `xi` in its cell.
    pub fn stencil(&self, xi: &[f64]) -> Stencil {
        let mut s_bar = [0.0; 2];
        for axis in 0..self.basis.dim() {
            s_bar[axis] = 0.5 * (xi[axis] + 1.0);
        }
        Stencil::build(&self.kernel, &self.basis, s_bar, self.step)
    }

    /// Filtered value of component `c` of `field` at the physical point `x`.
    pub fn filter_at(&self, field: &DgField, c: usize, x: &[f64]) -> Result<f64> {
        let mesh = field.space().mesh();
        let elem = mesh.locate(x)?;
        let xi = mesh.to_reference(elem, x)?;
        self.stencil(&xi).apply(field, c, elem).map_err(|_| Error::FilterSupport { point: x[..mesh.dim()].to_vec() })
    }

    /// Filters a batch of points that share reference coordinates `xi`, one
    /// per listed element.
    pub fn filter_cells(&self, field: &DgField, c: usize, xi: &[f64], elems: &[usize]) -> Result<Vec<f64>> {
        let st = self.stencil(xi);
        elems.iter().map(|&e| st.apply(field, c, e)).collect()
    }
}

/// 1D post-processed value `∫ K_H(x̄ - y) u_h(y) dy` of a single-component
/// field. Fails if the support leaves a non-periodic domain.
pub fn filter_point_1d(field: &DgField, kernel: &SiacKernel, x: f64) -> Result<f64> {
    let space = field.space();
    if space.dim() != 1 {
        return Err(Error::invalid("filter_point_1d needs a 1D field"));
    }
    SiacFilter::with_kernel(kernel.clone(), space.basis(), space.mesh(), LineDirection::Diagonal)?.filter_at(field, 0, &[x])
}

/// Line filter of a 2D single-component field through `point` at angle `θ`,
/// with `h_t = H / max(|cos θ|, |sin θ|)`.
pub fn filter_line_2d(field: &DgField, kernel: &SiacKernel, point: [f64; 2], theta: f64) -> Result<f64> {
    let space = field.space();
    if space.dim() != 2 {
        return Err(Error::invalid("filter_line_2d needs a 2D field"));
    }
    SiacFilter::with_kernel(kernel.clone(), space.basis(), space.mesh(), LineDirection::Angle(theta))?
        .filter_at(field, 0, &point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{project_scalar, DgSpace};
    use crate::mesh::{uniform_mesh, Boundary};
    use crate::siac::build_kernel;
    use std::f64::consts::PI;

    fn periodic_1d(n: usize, k: usize) -> std::sync::Arc<DgSpace> {
        DgSpace::new(uniform_mesh(&[0.0], &[1.0], &[n], &[[Boundary::Periodic; 2]]).unwrap(), k)
    }

    /// Brute-force convolution: composite Gauss between mesh breaks only.
    fn brute(field: &DgField, kernel: &SiacKernel, x: f64, cells: usize) -> f64 {
        let hw = kernel.half_width();
        let q = gauss_legendre(10);
        let h = 1.0 / cells as f64;
        let mut pts = vec![x - hw, x + hw];
        let mut m = ((x - hw) / h).ceil();
        while m * h < x + hw {
            pts.push(m * h);
            m += 1.0;
        }
        pts.sort_by(f64::total_cmp);
        let mut s = 0.0;
        for seg in pts.windows(2) {
            let pieces = 200;
            let w = (seg[1] - seg[0]) / pieces as f64;
            for p in 0..pieces {
                let a = seg[0] + p as f64 * w;
                s += q.integrate_on(a, a + w, |y| kernel.eval(x - y) * field.eval(0, &[y.rem_euclid(1.0)]).unwrap());
            }
        }
        s
    }

    #[test]
    fn constant_and_sine() {
        let s = periodic_1d(20, 1);
        let k = build_kernel(1, s.mesh().h()).unwrap();
        let c = project_scalar(&s, 3, |_| 2.5);
        for x in [0.0, 0.013, 0.5, 0.77] {
            assert!((filter_point_1d(&c, &k, x).unwrap() - 2.5).abs() < 1e-13);
        }
        let f = project_scalar(&s, 4, |x| (2.0 * PI * x[0]).sin());
        for m in 0..20 {
            let x = (m as f64 + 0.5) / 20.0;
            let exact = (2.0 * PI * x).sin();
            let raw = (f.eval(0, &[x]).unwrap() - exact).abs();
            let filt = (filter_point_1d(&f, &k, x).unwrap() - exact).abs();
            assert!(filt < raw.max(1e-12), "x={x} {filt} vs {raw}");
        }
    }

    #[test]
    fn matches_brute_force() {
        let s = periodic_1d(7, 2);
        let k = build_kernel(2, s.mesh().h()).unwrap();
        let f = project_scalar(&s, 5, |x| (2.0 * PI * x[0]).cos() + x[0] * x[0]);
        for x in [0.05, 0.4, 0.999] {
            let a = filter_point_1d(&f, &k, x).unwrap();
            let b = brute(&f, &k, x, 7);
            assert!((a - b).abs() < 1e-9, "{a} vs {b}");
        }
    }

    #[test]
    fn refuses_support_outside_domain() {
        let s = DgSpace::new(uniform_mesh(&[0.0], &[1.0], &[10], &[[Boundary::Vacuum; 2]]).unwrap(), 1);
        let k = build_kernel(1, 0.1).unwrap();
        let f = project_scalar(&s, 3, |_| 1.0);
        assert!(matches!(filter_point_1d(&f, &k, 0.05), Err(Error::FilterSupport { .. })));
        assert!((filter_point_1d(&f, &k, 0.5).unwrap() - 1.0).abs() < 1e-13);
    }

    #[test]
    fn line_filter_reproduces_linear() {
        let m = uniform_mesh(&[0.0, 0.0], &[1.0, 1.0], &[12, 12], &[[Boundary::Vacuum; 2]; 2]).unwrap();
        let s = DgSpace::new(m, 1);
        let k = build_kernel(1, 1.0 / 12.0).unwrap();
        let f = project_scalar(&s, 3, |x| x[0] + x[1]);
        for p in [[0.5, 0.5], [0.41, 0.58], [0.6, 0.45]] {
            let v = filter_line_2d(&f, &k, p, PI / 4.0).unwrap();
            assert!((v - p[0] - p[1]).abs() < 1e-11);
        }
        assert!(filter_line_2d(&f, &k, [0.05, 0.5], PI / 4.0).is_err());
    }
}
