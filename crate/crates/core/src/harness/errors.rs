use crate::angular::OrdinateSet;
use crate::dg::DgField;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::numerics::{gauss_legendre, radau_roots, RadauSide};
use crate::siac::SiacFilter;

/// Part of the domain an error norm integrates over.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Region {
    Full,
    /// Elements lying at least `margin` (physical units) inside every
    /// non-periodic boundary.
    Interior { margin: f64 },
}

impl Region {
    /// Indices of the elements inside the region.
    pub fn elements(&self, mesh: &Mesh) -> Vec<usize> {
        let all = 0..mesh.num_elements();
        match *self {
            Region::Full => all.collect(),
            Region::Interior { margin } => {
                let (lo, hi) = (mesh.lower(), mesh.upper());
                let slack = 1e-9 * mesh.h();
                all.filter(|&e| {
                    let (a, b) = mesh.element_bounds(e);
                    (0..mesh.dim()).all(|ax| {
                        mesh.is_periodic(ax) || (a[ax] >= lo[ax] + margin - slack && b[ax] <= hi[ax] - margin + slack)
                    })
                })
                .collect()
            }
        }
    }
}

/// Reference points and weights of the `(k+3)`-point tensor rule.
fn error_rule(mesh: &Mesh, degree: usize) -> Vec<([f64; 2], f64)> {
    let q = gauss_legendre(degree + 3);
    let pts: Vec<(f64, f64)> = q.iter().collect();
    if mesh.dim() == 1 {
        pts.iter().map(|&(x, w)| ([x, 0.0], w)).collect()
    } else {
        let mut out = Vec::with_capacity(pts.len() * pts.len());
        for &(y, wy) in &pts {
            for &(x, wx) in &pts {
                out.push(([x, y], wx * wy));
            }
        }
        out
    }
}

/// `‖u_h - u‖_{L2(region)}` for component `c` of `field`.
pub fn error_l2(field: &DgField, c: usize, exact: impl Fn(&[f64]) -> f64, region: Region) -> f64 {
    let space = field.space();
    let mesh = space.mesh();
    let dim = mesh.dim();
    let jac = mesh.element_volume() / (1 << dim) as f64;
    let rule = error_rule(mesh, space.degree());
    let mut sum = 0.0;
    for e in region.elements(mesh) {
        let coeffs = field.element(c, e);
        for (xi, w) in &rule {
            let x = mesh.from_reference(e, &xi[..dim]);
            let d = space.basis().combine(coeffs, &xi[..dim]) - exact(&x[..dim]);
            sum += w * jac * d * d;
        }
    }
    sum.sqrt()
}

/// Same norm with `u_h` replaced by its SIAC-filtered value, sampled at the
/// same quadrature points. Stencils are built once per reference point.
pub fn error_l2_filtered(
    field: &DgField,
    c: usize,
    filter: &SiacFilter,
    exact: impl Fn(&[f64]) -> f64,
    region: Region,
) -> Result<f64> {
    let space = field.space();
    let mesh = space.mesh();
    let dim = mesh.dim();
    let jac = mesh.element_volume() / (1 << dim) as f64;
    let elems = region.elements(mesh);
    let mut sum = 0.0;
    for (xi, w) in error_rule(mesh, space.degree()) {
        let values = filter.filter_cells(field, c, &xi[..dim], &elems)?;
        for (&e, v) in elems.iter().zip(values) {
            let x = mesh.from_reference(e, &xi[..dim]);
            let d = v - exact(&x[..dim]);
            sum += w * jac * d * d;
        }
    }
    Ok(sum.sqrt())
}

/// Sampling set of the 1D pointwise superconvergence estimates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointSet {
    /// The outflow edge of each element, taken from inside the element.
    DownwindEdge,
    /// The `k` interior roots of the Radau polynomial of degree `k+1` that
    /// vanishes at the outflow edge.
    InteriorRadau,
}

/// Largest `|ψ_h - ψ|` over elements and ordinates at the points of `set`,
/// for a 1D per-ordinate solution. Ordinates with `v = 0` are skipped.
pub fn error_superconvergent_points(
    psi: &DgField,
    ordinates: &OrdinateSet,
    exact: impl Fn(&[f64], &[f64; 3]) -> f64,
    set: PointSet,
) -> Result<f64> {
    let space = psi.space();
    let mesh = space.mesh();
    if mesh.dim() != 1 {
        return Err(Error::invalid("superconvergent-point errors are defined for 1D slabs"));
    }
    if psi.components() != ordinates.len() {
        return Err(Error::invalid("one field component per ordinate expected"));
    }
    let k = space.degree();
    let points_for = |side: RadauSide| -> Result<Vec<f64>> {
        Ok(match set {
            PointSet::DownwindEdge => vec![if side == RadauSide::Right { 1.0 } else { -1.0 }],
            PointSet::InteriorRadau => {
                let mut r = radau_roots(k + 1, side)?;
                r.retain(|x| x.abs() < 1.0);
                r
            }
        })
    };
    let right = points_for(RadauSide::Right)?;
    let left = points_for(RadauSide::Left)?;
    let mut worst = 0.0f64;
    for j in 0..ordinates.len() {
        let d = ordinates.direction(j);
        if d[0] == 0.0 {
            continue;
        }
        let pts = if d[0] > 0.0 { &right } else { &left };
        for e in 0..mesh.num_elements() {
            let coeffs = psi.element(j, e);
            for &xi in pts {
                let x = mesh.from_reference(e, &[xi]);
                let err = (space.basis().combine(coeffs, &[xi]) - exact(&x[..1], &d)).abs();
                worst = worst.max(err);
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::ordinates_slab;
    use crate::dg::{project_l2, project_scalar, DgSpace};
    use crate::mesh::{uniform_mesh, Boundary};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn unit(n: usize, k: usize) -> Arc<DgSpace> {
        DgSpace::new(uniform_mesh(&[0.0], &[1.0], &[n], &[[Boundary::Vacuum; 2]]).unwrap(), k)
    }

    #[test]
    fn exact_and_shifted() {
        let s = unit(5, 2);
        let f = project_scalar(&s, 5, |x| x[0] * x[0]);
        assert!(error_l2(&f, 0, |x| x[0] * x[0], Region::Full) < 1e-14);
        let e = error_l2(&f, 0, |x| x[0] * x[0] - 0.25, Region::Full);
        assert!((e - 0.25).abs() < 1e-13);
    }

    #[test]
    fn projection_order() {
        let errs: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&n| {
                let f = project_scalar(&unit(n, 1), 4, |x| (PI * x[0]).sin());
                error_l2(&f, 0, |x| (PI * x[0]).sin(), Region::Full)
            })
            .collect();
        for w in errs.windows(2) {
            assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.05);
        }
    }

    #[test]
    fn interior_region() {
        let mesh = uniform_mesh(&[0.0, 0.0], &[1.0, 1.0], &[10, 10], &[[Boundary::Vacuum; 2]; 2]).unwrap();
        assert_eq!(Region::Interior { margin: 0.2 }.elements(&mesh).len(), 36);
        let per = uniform_mesh(&[0.0], &[1.0], &[10], &[[Boundary::Periodic; 2]]).unwrap();
        assert_eq!(Region::Interior { margin: 0.2 }.elements(&per).len(), 10);
    }

    #[test]
    fn polynomial_points_vanish() {
        let s = unit(4, 2);
        let ords = ordinates_slab(4).unwrap();
        let exact = |x: &[f64], d: &[f64; 3]| 1.0 + d[0] * x[0] - x[0] * x[0];
        let psi = project_l2(|x, d| exact(x, d), &s, &ords);
        for set in [PointSet::DownwindEdge, PointSet::InteriorRadau] {
            assert!(error_superconvergent_points(&psi, &ords, exact, set).unwrap() < 1e-13);
        }
    }

    #[test]
    fn filtered_matches_direct_for_smooth_field() {
        let s = DgSpace::new(uniform_mesh(&[0.0], &[1.0], &[20], &[[Boundary::Periodic; 2]]).unwrap(), 1);
        let u = |x: &[f64]| (2.0 * PI * x[0]).sin();
        let f = project_scalar(&s, 4, u);
        let filt = SiacFilter::new(s.basis(), s.mesh()).unwrap();
        let raw = error_l2(&f, 0, u, Region::Full);
        let post = error_l2_filtered(&f, 0, &filt, u, Region::Full).unwrap();
        assert!(post < raw / 10.0, "{post} vs {raw}");
    }
}
