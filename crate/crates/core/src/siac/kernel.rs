use crate::error::{Error, Result};
use crate::numerics::dense::solve_full_pivot;

/// Central B-spline of order `n` (support `[-n/2, n/2]`), by Cox–de Boor on
/// the knots `-n/2 + i`.
pub fn bspline_eval(n: usize, x: f64) -> f64 {
    assert!(n >= 1, "B-spline order must be >= 1");
    let half = n as f64 / 2.0;
    if x < -half || x >= half {
        return 0.0;
    }
    let t = |i: usize| -half + i as f64;
    let mut b: Vec<f64> = (0..n).map(|i| if t(i) <= x && x < t(i + 1) { 1.0 } else { 0.0 }).collect();
    for p in 2..=n {
        let d = (p - 1) as f64;
        for i in 0..=n - p {
            b[i] = (x - t(i)) / d * b[i] + (t(i + p) - x) / d * b[i + 1];
        }
    }
    b[0]
}

/// `E[S^j]` for `S` the sum of `n` independent uniforms on `[-1/2, 1/2]`,
/// i.e. the monomial moments of the order-`n` central B-spline.
fn bspline_moments(n: usize, max_degree: usize) -> Vec<f64> {
    let uniform: Vec<f64> = (0..=max_degree)
        .map(|j| if j % 2 == 1 { 0.0 } else { 0.5f64.powi(j as i32) / (j as f64 + 1.0) })
        .collect();
    let mut m = uniform.clone();
    for _ in 1..n {
        m = (0..=max_degree)
            .map(|j| (0..=j).map(|i| binomial(j, i) * m[i] * uniform[j - i]).sum())
            .collect();
    }
    m
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Symmetric SIAC kernel: `2k+1` translates of the order-`(k+1)` central
/// B-spline at integer offsets `-k..=k`, scaled by `H`.
#[derive(Clone, Debug, PartialEq)]
pub struct SiacKernel {
    degree: usize,
    order: usize,
    coeffs: Vec<f64>,
    offsets: Vec<f64>,
    scaling: f64,
}

/// Kernel for DG degree `k >= 1` with scaling `H > 0`, coefficients from the
/// moment conditions `∫ x^m K = δ_{m0}`, `m = 0..2k`.
pub fn build_kernel(k: usize, scaling: f64) -> Result<SiacKernel> {
    if k == 0 || k > 7 {
        return Err(Error::invalid(format!("kernel degree must be in 1..=7, got {k}")));
    }
    if !(scaling > 0.0) || !scaling.is_finite() {
        return Err(Error::invalid(format!("kernel scaling must be positive, got {scaling}")));
    }
    let order = k + 1;
    let r = 2 * k;
    let offsets: Vec<f64> = (0..=r).map(|g| g as f64 - k as f64).collect();
    let mom = bspline_moments(order, r);
    // row m, column γ: ∫ x^m B(x - o_γ) dx
    let mut a = vec![0.0; (r + 1) * (r + 1)];
    for m in 0..=r {
        for (g, &o) in offsets.iter().enumerate() {
            a[m * (r + 1) + g] = (0..=m).map(|j| binomial(m, j) * o.powi((m - j) as i32) * mom[j]).sum();
        }
    }
    let mut b = vec![0.0; r + 1];
    b[0] = 1.0;
    let coeffs = solve_full_pivot(r + 1, a, b).ok_or(Error::SingularMatrix { what: "kernel moment" })?;
    Ok(SiacKernel { degree: k, order, coeffs, offsets, scaling })
}

impl SiacKernel {
    pub fn degree(&self) -> usize {
        self.degree
    }

    /// B-spline order `n`.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn offsets(&self) -> &[f64] {
        &self.offsets
    }

    pub fn scaling(&self) -> f64 {
        self.scaling
    }

    pub fn with_scaling(&self, scaling: f64) -> Result<SiacKernel> {
        build_kernel(self.degree, scaling)
    }

    /// Knots of every translate in reference units, one row per translate.
    pub fn knot_matrix(&self) -> Vec<Vec<f64>> {
        let half = self.order as f64 / 2.0;
        self.offsets
            .iter()
            .map(|o| (0..=self.order).map(|i| o - half + i as f64).collect())
            .collect()
    }

    /// Sorted distinct knots in reference units.
    pub fn breaks(&self) -> Vec<f64> {
        let mut b: Vec<f64> = self.knot_matrix().into_iter().flatten().collect();
        b.sort_by(f64::total_cmp);
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        b
    }

    /// Half-width of the support in reference units.
    pub fn reference_half_width(&self) -> f64 {
        self.offsets.last().copied().unwrap_or(0.0) + self.order as f64 / 2.0
    }

    /// Half-width of the support in physical units.
    pub fn half_width(&self) -> f64 {
        self.reference_half_width() * self.scaling
    }

    /// Unscaled kernel `K(x)`.
    pub fn eval_reference(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .map(|(c, o)| c * bspline_eval(self.order, x - o))
            .sum()
    }

    /// Scaled kernel `K_H(x) = K(x/H)/H`.
    pub fn eval(&self, x: f64) -> f64 {
        self.eval_reference(x / self.scaling) / self.scaling
    }

    /// Exact `∫ x^m K(x) dx` of the unscaled kernel.
    pub fn moment(&self, m: usize) -> f64 {
        let mom = bspline_moments(self.order, m);
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .map(|(c, o)| c * (0..=m).map(|j| binomial(m, j) * o.powi((m - j) as i32) * mom[j]).sum::<f64>())
            .sum()
    }
}

/// Fourier symbol `sinc(ξ/2)^n Σ_γ c_γ cos(o_γ ξ)` of the unscaled kernel.
pub fn kernel_fourier(kernel: &SiacKernel, xi: f64) -> f64 {
    let h = xi / 2.0;
    let sinc = if h.abs() < 1e-8 { 1.0 - h * h / 6.0 } else { h.sin() / h };
    let cos_sum: f64 = kernel.coeffs.iter().zip(&kernel.offsets).map(|(c, o)| c * (o * xi).cos()).sum();
    sinc.powi(kernel.order as i32) * cos_sum
}
