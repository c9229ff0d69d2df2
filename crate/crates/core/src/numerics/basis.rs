use super::legendre::legendre_with_derivative;

/// Tensor-product Legendre basis of `Q_k` on `[-1, 1]^d`, `d` in `{1, 2}`.
///
/// Basis index `a = a_x + (k+1) a_y`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TensorBasis {
    degree: usize,
    dim: usize,
}

impl TensorBasis {
    pub fn new(degree: usize, dim: usize) -> Self {
        assert!(dim == 1 || dim == 2, "only 1D and 2D bases are supported");
        TensorBasis { degree, dim }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes_per_axis(&self) -> usize {
        self.degree + 1
    }

    pub fn len(&self) -> usize {
        self.modes_per_axis().pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Per-axis Legendre degrees of basis function `a`.
    pub fn mode(&self, a: usize) -> [usize; 2] {
        let m = self.modes_per_axis();
        if self.dim == 1 {
            [a, 0]
        } else {
            [a % m, a / m]
        }
    }

    /// `∫_{[-1,1]^d} φ_a²`.
    pub fn reference_norm_sq(&self, a: usize) -> f64 {
        let mode = self.mode(a);
        (0..self.dim)
            .map(|ax| 2.0 / (2.0 * mode[ax] as f64 + 1.0))
            .product()
    }

    pub fn eval(&self, xi: &[f64], values: &mut [f64]) {
        let m = self.modes_per_axis();
        let mut l = [[0.0; 8]; 2];
        for ax in 0..self.dim {
            for n in 0..m {
                l[ax][n] = legendre_with_derivative(n, xi[ax]).0;
            }
        }
        if self.dim == 1 {
            values[..m].copy_from_slice(&l[0][..m]);
        } else {
            for b in 0..m {
                for a in 0..m {
                    values[a + m * b] = l[0][a] * l[1][b];
                }
            }
        }
    }

    /// Values and reference gradients; `grads[a * d + axis]`.
    pub fn eval_with_gradients(&self, xi: &[f64], values: &mut [f64], grads: &mut [f64]) {
        let m = self.modes_per_axis();
        let mut l = [[0.0; 8]; 2];
        let mut dl = [[0.0; 8]; 2];
        for ax in 0..self.dim {
            for n in 0..m {
                let (v, d) = legendre_with_derivative(n, xi[ax]);
                l[ax][n] = v;
                dl[ax][n] = d;
            }
        }
        if self.dim == 1 {
            for a in 0..m {
                values[a] = l[0][a];
                grads[a] = dl[0][a];
            }
        } else {
            for b in 0..m {
                for a in 0..m {
                    let idx = a + m * b;
                    values[idx] = l[0][a] * l[1][b];
                    grads[2 * idx] = dl[0][a] * l[1][b];
                    grads[2 * idx + 1] = l[0][a] * dl[1][b];
                }
            }
        }
    }

    /// Evaluate `Σ_a c_a φ_a(ξ)`.
    pub fn combine(&self, coeffs: &[f64], xi: &[f64]) -> f64 {
        let m = self.modes_per_axis();
        let mut l = [[0.0; 8]; 2];
        for ax in 0..self.dim {
            for n in 0..m {
                l[ax][n] = legendre_with_derivative(n, xi[ax]).0;
            }
        }
        if self.dim == 1 {
            coeffs.iter().zip(&l[0][..m]).map(|(c, v)| c * v).sum()
        } else {
            let mut s = 0.0;
            for b in 0..m {
                let mut row = 0.0;
                for a in 0..m {
                    row += coeffs[a + m * b] * l[0][a];
                }
                s += row * l[1][b];
            }
            s
        }
    }
}

/// Basis values and reference gradients at `xi`.
pub fn basis_eval(basis: &TensorBasis, xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; basis.len()];
    let mut g = vec![0.0; basis.len() * basis.dim()];
    basis.eval_with_gradients(xi, &mut v, &mut g);
    (v, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gauss_legendre;

    #[test]
    fn small_examples() {
        let (v, g) = basis_eval(&TensorBasis::new(0, 1), &[0.37]);
        assert_eq!(v, vec![1.0]);
        assert_eq!(g, vec![0.0]);
        let (v, _) = basis_eval(&TensorBasis::new(1, 1), &[1.0]);
        assert_eq!(v, vec![1.0, 1.0]);
        let (v, g) = basis_eval(&TensorBasis::new(1, 2), &[1.0, 1.0]);
        assert_eq!(v, vec![1.0; 4]);
        assert_eq!(g.len(), 8);
    }

    #[test]
    fn mass_matrix_is_diagonal() {
        for k in 0..=3 {
            let basis = TensorBasis::new(k, 2);
            let q = gauss_legendre(k + 2);
            let n = basis.len();
            let mut mass = vec![0.0; n * n];
            let mut v = vec![0.0; n];
            for (x, wx) in q.iter() {
                for (y, wy) in q.iter() {
                    basis.eval(&[x, y], &mut v);
                    for a in 0..n {
                        for b in 0..n {
                            mass[a * n + b] += wx * wy * v[a] * v[b];
                        }
                    }
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let expect = if a == b { basis.reference_norm_sq(a) } else { 0.0 };
                    assert!((mass[a * n + b] - expect).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn orthogonality_up_to_twelve() {
        for n in 0..=12 {
            for m in 0..=12 {
                let q = gauss_legendre(n + m + 1);
                let got = q.integrate(|x| {
                    legendre_with_derivative(n, x).0 * legendre_with_derivative(m, x).0
                });
                let expect = if n == m { 2.0 / (2.0 * n as f64 + 1.0) } else { 0.0 };
                assert!((got - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn combine_matches_eval() {
        let basis = TensorBasis::new(2, 2);
        let coeffs: Vec<f64> = (0..9).map(|i| 0.3 * i as f64 - 1.0).collect();
        let xi = [0.21, -0.64];
        let mut v = vec![0.0; 9];
        basis.eval(&xi, &mut v);
        let direct: f64 = v.iter().zip(&coeffs).map(|(a, b)| a * b).sum();
        assert!((basis.combine(&coeffs, &xi) - direct).abs() < 1e-14);
    }
}
