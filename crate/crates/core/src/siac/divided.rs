use crate::dg::DgField;
use crate::error::{Error, Result};

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central divided difference `∂_{h,axis}^λ` of one component of a DG field,
/// `Σ_i (-1)^i C(λ,i) u(x + (λ/2 - i) h e_axis) / h^λ`, as a point sampler.
#[derive(Clone, Debug)]
pub struct DividedDifference<'a> {
    field: &'a DgField,
    component: usize,
    axis: usize,
    order: usize,
    h: f64,
}

/// Divided difference of order `order` along `axis` with the mesh spacing.
pub fn divided_difference(field: &DgField, component: usize, axis: usize, order: usize) -> Result<DividedDifference<'_>> {
    let mesh = field.space().mesh();
    if axis >= mesh.dim() {
        return Err(Error::invalid(format!("axis {axis} out of range for a {}D mesh", mesh.dim())));
    }
    if component >= field.components() {
        return Err(Error::invalid(format!("component {component} out of range")));
    }
    Ok(DividedDifference { field, component, axis, order, h: mesh.spacing()[axis] })
}

impl DividedDifference<'_> {
    /// Value at `x`; sample points wrap on periodic axes and must otherwise
    /// stay inside the domain.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let mesh = self.field.space().mesh();
        let (lo, hi) = (mesh.lower()[self.axis], mesh.upper()[self.axis]);
        let mut sum = 0.0;
        let mut p = x[..mesh.dim()].to_vec();
        for i in 0..=self.order {
            let mut y = x[self.axis] + (self.order as f64 / 2.0 - i as f64) * self.h;
            if mesh.is_periodic(self.axis) {
                y = lo + (y - lo).rem_euclid(hi - lo);
            }
            p[self.axis] = y;
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binomial(self.order, i) * self.field.eval(self.component, &p)?;
        }
        Ok(sum / self.h.powi(self.order as i32))
    }
}

/// Divided differences of grid values `values[i] = u(x_i)` on a uniform grid:
/// entry `i` approximates the derivative at the centre of `x_i..x_{i+λ}`.
pub fn divided_difference_grid(xs: &[f64], values: &[f64], order: usize) -> Result<Vec<f64>> {
    if xs.len() != values.len() {
        return Err(Error::invalid("grid and value lengths differ"));
    }
    if xs.len() < 2 {
        return Err(Error::invalid("need at least two grid points"));
    }
    let h = xs[1] - xs[0];
    if !(h > 0.0) {
        return Err(Error::invalid("grid must be increasing"));
    }
    if xs.windows(2).any(|w| ((w[1] - w[0]) - h).abs() > 1e-12 * h.max(1.0)) {
        return Err(Error::invalid("divided differences need a uniform grid"));
    }
    if order >= xs.len() {
        return Err(Error::invalid(format!("order {order} needs more than {} points", xs.len())));
    }
    Ok((0..xs.len() - order)
        .map(|s| {
            (0..=order)
                .map(|i| {
                    let sign = if (order - i) % 2 == 0 { 1.0 } else { -1.0 };
                    sign * binomial(order, i) * values[s + i]
                })
                .sum::<f64>()
                / h.powi(order as i32)
        })
        .collect())
}
