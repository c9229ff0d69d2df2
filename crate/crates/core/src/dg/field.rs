use std::sync::Arc;

use crate::angular::OrdinateSet;
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::numerics::{gauss_legendre, TensorBasis};

/// A mesh paired with the modal `Q_k` basis used on every element.
#[derive(Clone, Debug)]
pub struct DgSpace {
    mesh: Mesh,
    basis: TensorBasis,
}

impl DgSpace {
    pub fn new(mesh: Mesh, degree: usize) -> Arc<Self> {
        let basis = TensorBasis::new(degree, mesh.dim());
        Arc::new(DgSpace { mesh, basis })
    }

    pub fn mesh(&self) -> &Mesh {
        &self.mesh
    }

    pub fn basis(&self) -> &TensorBasis {
        &self.basis
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim()
    }

    pub fn dofs_per_element(&self) -> usize {
        self.basis.len()
    }

    pub fn num_elements(&self) -> usize {
        self.mesh.num_elements()
    }

    /// Diagonal of the physical mass matrix, identical on every element.
    pub fn mass_diagonal(&self) -> Vec<f64> {
        let jac = self.mesh.element_volume() / 2f64.powi(self.dim() as i32);
        (0..self.basis.len()).map(|a| jac * self.basis.reference_norm_sq(a)).collect()
    }
}

/// Per-component modal coefficients over a [`DgSpace`].
///
/// Layout: `coeffs[(component * n_elem + elem) * n_dof + a]`. A transport
/// unknown has one component per ordinate; a density field has one.
#[derive(Clone, Debug)]
pub struct DgField {
    space: Arc<DgSpace>,
    components: usize,
    coeffs: Vec<f64>,
}

impl DgField {
    pub fn zeros(space: Arc<DgSpace>, components: usize) -> Self {
        let len = components * space.num_elements() * space.dofs_per_element();
        DgField { space, components, coeffs: vec![0.0; len] }
    }

    pub fn from_coeffs(space: Arc<DgSpace>, components: usize, coeffs: Vec<f64>) -> Result<Self> {
        let expect = components * space.num_elements() * space.dofs_per_element();
        if coeffs.len() != expect {
            return Err(Error::invalid(format!(
                "coefficient count {} does not match {components} x {} x {}",
                coeffs.len(),
                space.num_elements(),
                space.dofs_per_element()
            )));
        }
        Ok(DgField { space, components, coeffs })
    }

    pub fn space(&self) -> &Arc<DgSpace> {
        &self.space
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    fn component_len(&self) -> usize {
        self.space.num_elements() * self.space.dofs_per_element()
    }

    pub fn component(&self, c: usize) -> &[f64] {
        let n = self.component_len();
        &self.coeffs[c * n..(c + 1) * n]
    }

    pub fn component_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.component_len();
        &mut self.coeffs[c * n..(c + 1) * n]
    }

    pub fn element(&self, c: usize, elem: usize) -> &[f64] {
        let nd = self.space.dofs_per_element();
        let start = (c * self.space.num_elements() + elem) * nd;
        &self.coeffs[start..start + nd]
    }

    /// Point value of component `c`; interface points take the upper element.
    pub fn eval(&self, c: usize, x: &[f64]) -> Result<f64> {
        self.eval_trace(c, x, [false, false])
    }

    /// One-sided value: `from_lower[axis]` selects the limit from the lower
    /// element when `x` sits on an interface normal to that axis.
    pub fn eval_trace(&self, c: usize, x: &[f64], from_lower: [bool; 2]) -> Result<f64> {
        let mesh = self.space.mesh();
        let elem = mesh.locate_with(x, from_lower)?;
        let xi = mesh.to_reference(elem, x)?;
        Ok(self.space.basis().combine(self.element(c, elem), &xi))
    }

    /// `L2` norm of component `c` over the domain.
    pub fn l2_norm(&self, c: usize) -> f64 {
        let mass = self.space.mass_diagonal();
        let nd = mass.len();
        self.component(c)
            .chunks(nd)
            .map(|blk| blk.iter().zip(&mass).map(|(v, m)| v * v * m).sum::<f64>())
            .sum::<f64>()
            .sqrt()
    }

    /// Discrete angular average of a per-ordinate field, coefficient-wise.
    pub fn density(&self, ordinates: &OrdinateSet) -> Result<DgField> {
        if ordinates.len() != self.components {
            return Err(Error::invalid(format!(
                "field has {} components, ordinate set has {}",
                self.components,
                ordinates.len()
            )));
        }
        let n = self.component_len();
        let mut out = vec![0.0; n];
        for j in 0..self.components {
            let w = ordinates.average_weight(j);
            for (o, v) in out.iter_mut().zip(self.component(j)) {
                *o += w * v;
            }
        }
        DgField::from_coeffs(self.space.clone(), 1, out)
    }
}

/// Value of ordinate `j` of `field` at `x`.
pub fn eval_field(field: &DgField, j: usize, x: &[f64]) -> Result<f64> {
    field.eval(j, x)
}

/// Discrete angular average of `field` at `x`.
pub fn eval_density(field: &DgField, ordinates: &OrdinateSet, x: &[f64]) -> Result<f64> {
    let values: Vec<f64> = (0..field.components())
        .map(|j| field.eval(j, x))
        .collect::<Result<_>>()?;
    crate::angular::angular_average(ordinates, &values)
}

/// Tensor Gauss points of one element in physical coordinates, with weights
/// that include the Jacobian.
pub(crate) fn element_quadrature(mesh: &Mesh, elem: usize, points: usize) -> Vec<([f64; 2], [f64; 2], f64)> {
    let q = gauss_legendre(points);
    let jac = mesh.element_volume() / 2f64.powi(mesh.dim() as i32);
    let mut out = Vec::with_capacity(points.pow(mesh.dim() as u32));
    if mesh.dim() == 1 {
        for (x, w) in q.iter() {
            let xi = [x, 0.0];
            out.push((xi, mesh.from_reference(elem, &xi), w * jac));
        }
    } else {
        for (y, wy) in q.iter() {
            for (x, wx) in q.iter() {
                let xi = [x, y];
                out.push((xi, mesh.from_reference(elem, &xi), wx * wy * jac));
            }
        }
    }
    out
}

/// `L2` projection of a scalar function onto `Q_k`, with `points` Gauss
/// points per axis.
pub fn project_scalar(space: &Arc<DgSpace>, points: usize, f: impl Fn(&[f64]) -> f64) -> DgField {
    let mut field = DgField::zeros(space.clone(), 1);
    let nd = space.dofs_per_element();
    let mass = space.mass_diagonal();
    let basis = *space.basis();
    let mut vals = vec![0.0; nd];
    for elem in 0..space.num_elements() {
        let mut acc = vec![0.0; nd];
        for (xi, x, w) in element_quadrature(space.mesh(), elem, points) {
            let fx = f(&x);
            basis.eval(&xi, &mut vals);
            for a in 0..nd {
                acc[a] += w * fx * vals[a];
            }
        }
        let blk = &mut field.coeffs[elem * nd..(elem + 1) * nd];
        for a in 0..nd {
            blk[a] = acc[a] / mass[a];
        }
    }
    field
}

/// `L2` projection of `f(x, Ω_j)` for every ordinate, `k+2` Gauss points per axis.
pub fn project_l2(
    f: impl Fn(&[f64], &[f64; 3]) -> f64,
    space: &Arc<DgSpace>,
    ordinates: &OrdinateSet,
) -> DgField {
    project_l2_with(f, space, ordinates, space.degree() + 2)
}

pub fn project_l2_with(
    f: impl Fn(&[f64], &[f64; 3]) -> f64,
    space: &Arc<DgSpace>,
    ordinates: &OrdinateSet,
    points: usize,
) -> DgField {
    let n_ord = ordinates.len();
    let mut field = DgField::zeros(space.clone(), n_ord);
    let nd = space.dofs_per_element();
    let ne = space.num_elements();
    let mass = space.mass_diagonal();
    let basis = *space.basis();
    let mut vals = vec![0.0; nd];
    for elem in 0..ne {
        let quad = element_quadrature(space.mesh(), elem, points);
        let tables: Vec<Vec<f64>> = quad
            .iter()
            .map(|(xi, _, _)| {
                basis.eval(xi, &mut vals);
                vals.clone()
            })
            .collect();
        for j in 0..n_ord {
            let dir = ordinates.direction(j);
            let mut acc = vec![0.0; nd];
            for ((_, x, w), phi) in quad.iter().zip(&tables) {
                let fx = f(x, &dir);
                for a in 0..nd {
                    acc[a] += w * fx * phi[a];
                }
            }
            let start = (j * ne + elem) * nd;
            for a in 0..nd {
                field.coeffs[start + a] = acc[a] / mass[a];
            }
        }
    }
    field
}
