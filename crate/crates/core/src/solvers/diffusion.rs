//! Continuous bilinear diffusion operator used as the DSA correction.

use crate::dg::{element_quadrature, Coefficient, DgField, DgSpace, TransportProblem};
use crate::error::{Error, Result};
use crate::mesh::{Mesh, Side};

const RELATIVE_RESIDUAL: f64 = 1e-12;

/// Treatment of non-periodic boundaries in the diffusion solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DiffusionBoundary {
    /// `D ∂_n δ + δ/2 = 0`, the Marshak condition (an extrapolated-endpoint
    /// Dirichlet condition in Robin form).
    Marshak,
    /// `δ = 0` on the mesh boundary.
    Dirichlet,
}

/// `-∇·(D ∇δ) + a δ = f` discretized with continuous `Q_1` elements on the
/// vertices of a uniform mesh; periodic axes identify the end vertices.
#[derive(Clone, Debug)]
pub struct DiffusionOperator {
    mesh: Mesh,
    nodes: [usize; 2],
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
    diag: Vec<f64>,
    fixed: Vec<bool>,
    singular: bool,
}

/// Vertex indices of the corners of `elem`, ordered like the shape functions.
fn corners(mesh: &Mesh, nodes: [usize; 2], elem: usize) -> Vec<usize> {
    let c = mesh.cell_of(elem);
    let wrap = |axis: usize, i: usize| if mesh.is_periodic(axis) { i % nodes[axis] } else { i };
    if mesh.dim() == 1 {
        vec![wrap(0, c[0]), wrap(0, c[0] + 1)]
    } else {
        let mut out = Vec::with_capacity(4);
        for dy in 0..2 {
            for dx in 0..2 {
                out.push(wrap(0, c[0] + dx) + nodes[0] * wrap(1, c[1] + dy));
            }
        }
        out
    }
}

/// Shape values and reference gradients of the `2^d` bilinear functions.
fn shapes(dim: usize, xi: &[f64; 2]) -> (Vec<f64>, Vec<[f64; 2]>) {
    let lin = |s: usize, t: f64| if s == 0 { 0.5 * (1.0 - t) } else { 0.5 * (1.0 + t) };
    let dlin = |s: usize| if s == 0 { -0.5 } else { 0.5 };
    if dim == 1 {
        (vec![lin(0, xi[0]), lin(1, xi[0])], vec![[dlin(0), 0.0], [dlin(1), 0.0]])
    } else {
        let mut v = Vec::with_capacity(4);
        let mut g = Vec::with_capacity(4);
        for sy in 0..2 {
            for sx in 0..2 {
                v.push(lin(sx, xi[0]) * lin(sy, xi[1]));
                g.push([dlin(sx) * lin(sy, xi[1]), lin(sx, xi[0]) * dlin(sy)]);
            }
        }
        (v, g)
    }
}

impl DiffusionOperator {
    pub fn new(
        mesh: &Mesh,
        diffusion: &Coefficient,
        absorption: &Coefficient,
        boundary: DiffusionBoundary,
        points: usize,
    ) -> Result<Self> {
        let dim = mesh.dim();
        let counts = mesh.counts();
        let mut nodes = [1usize; 2];
        for a in 0..dim {
            nodes[a] = if mesh.is_periodic(a) { counts[a] } else { counts[a] + 1 };
        }
        let n_nodes = nodes[0] * nodes[1];
        let h = mesh.spacing();
        let mut rows: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); n_nodes];
        let points = points.max(2);
        for elem in 0..mesh.num_elements() {
            let idx = corners(mesh, nodes, elem);
            for (xi, x, w) in element_quadrature(mesh, elem, points) {
                let d = diffusion.eval(&x[..dim]);
                let a = absorption.eval(&x[..dim]);
                if !(d > 0.0) || a < 0.0 {
                    return Err(Error::invalid(format!("diffusion data D = {d}, a = {a} at {:?}", &x[..dim])));
                }
                let (v, g) = shapes(dim, &xi);
                for p in 0..idx.len() {
                    for q in 0..idx.len() {
                        let mut grad = 0.0;
                        for ax in 0..dim {
                            grad += g[p][ax] * g[q][ax] * 4.0 / (h[ax] * h[ax]);
                        }
                        *rows[idx[p]].entry(idx[q]).or_insert(0.0) += w * (d * grad + a * v[p] * v[q]);
                    }
                }
            }
        }
        let mut fixed = vec![false; n_nodes];
        let mut has_boundary = false;
        for axis in 0..dim {
            if mesh.is_periodic(axis) {
                continue;
            }
            has_boundary = true;
            for side in [Side::Lower, Side::Upper] {
                let plane = if side == Side::Lower { 0 } else { nodes[axis] - 1 };
                let other = 1 - axis;
                let n_other = if dim == 1 { 1 } else { nodes[other] };
                let node_at = |t: usize| {
                    let mut c = [0usize; 2];
                    c[axis] = plane;
                    c[other] = t;
                    c[0] + nodes[0] * c[1]
                };
                match boundary {
                    DiffusionBoundary::Dirichlet => {
                        for t in 0..n_other {
                            fixed[node_at(t)] = true;
                        }
                    }
                    DiffusionBoundary::Marshak if dim == 1 => {
                        *rows[node_at(0)].entry(node_at(0)).or_insert(0.0) += 0.5;
                    }
                    DiffusionBoundary::Marshak => {
                        // edge mass of the 1D linear trace, segment by segment
                        let ht = h[other];
                        let segs = if mesh.is_periodic(other) { n_other } else { n_other - 1 };
                        for s in 0..segs {
                            let p = node_at(s);
                            let q = node_at((s + 1) % n_other);
                            *rows[p].entry(p).or_insert(0.0) += 0.5 * ht / 3.0;
                            *rows[q].entry(q).or_insert(0.0) += 0.5 * ht / 3.0;
                            *rows[p].entry(q).or_insert(0.0) += 0.5 * ht / 6.0;
                            *rows[q].entry(p).or_insert(0.0) += 0.5 * ht / 6.0;
                        }
                    }
                }
            }
        }
        let mut row_ptr = vec![0];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        let mut diag = vec![0.0; n_nodes];
        for (i, row) in rows.into_iter().enumerate() {
            if fixed[i] {
                cols.push(i);
                vals.push(1.0);
                diag[i] = 1.0;
            } else {
                for (j, v) in row {
                    if fixed[j] {
                        continue;
                    }
                    if j == i {
                        diag[i] = v;
                    }
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        let singular = !has_boundary && absorption.as_constant() == Some(0.0);
        Ok(DiffusionOperator { mesh: mesh.clone(), nodes, row_ptr, cols, vals, diag, fixed, singular })
    }

    pub fn num_nodes(&self) -> usize {
        self.diag.len()
    }

    /// Physical coordinates of vertex `i` (periodic ends report the lower copy).
    pub fn node_position(&self, i: usize) -> [f64; 2] {
        let lo = self.mesh.lower();
        let h = self.mesh.spacing();
        [lo[0] + h[0] * (i % self.nodes[0]) as f64, lo[1] + h[1] * (i / self.nodes[0]) as f64]
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = (self.row_ptr[i]..self.row_ptr[i + 1]).map(|p| self.vals[p] * x[self.cols[p]]).sum();
        }
    }

    /// Load vector `∫ f φ_i` of a callable.
    pub fn load(&self, points: usize, f: impl Fn(&[f64]) -> f64) -> Vec<f64> {
        let dim = self.mesh.dim();
        let mut b = vec![0.0; self.num_nodes()];
        for elem in 0..self.mesh.num_elements() {
            let idx = corners(&self.mesh, self.nodes, elem);
            for (xi, x, w) in element_quadrature(&self.mesh, elem, points) {
                let fx = w * f(&x[..dim]);
                let (v, _) = shapes(dim, &xi);
                for (p, &i) in idx.iter().enumerate() {
                    b[i] += fx * v[p];
                }
            }
        }
        b
    }

    /// Jacobi-preconditioned conjugate gradients to a relative residual of
    /// `1e-12`.
    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        let n = self.num_nodes();
        let mut b: Vec<f64> = rhs.to_vec();
        for (i, f) in self.fixed.iter().enumerate() {
            if *f {
                b[i] = 0.0;
            }
        }
        if self.singular {
            let mean = b.iter().sum::<f64>() / n as f64;
            b.iter_mut().for_each(|v| *v -= mean);
        }
        let bnorm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut x = vec![0.0; n];
        if bnorm == 0.0 {
            return Ok(x);
        }
        let mut r = b.clone();
        let mut z: Vec<f64> = r.iter().zip(&self.diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut ap = vec![0.0; n];
        let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let max_iter = 20 * n + 200;
        let mut res = 1.0;
        for it in 0..max_iter {
            self.apply(&p, &mut ap);
            let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
            if pap <= 0.0 {
                return Err(Error::DiffusionSolve { iterations: it, residual: res });
            }
            let alpha = rz / pap;
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            res = r.iter().map(|v| v * v).sum::<f64>().sqrt() / bnorm;
            if res < RELATIVE_RESIDUAL {
                if self.singular {
                    let mean = x.iter().sum::<f64>() / n as f64;
                    x.iter_mut().for_each(|v| *v -= mean);
                }
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] / self.diag[i];
            }
            let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::DiffusionSolve { iterations: max_iter, residual: res })
    }

    /// Point value of a nodal field.
    pub fn eval(&self, nodal: &[f64], x: &[f64]) -> Result<f64> {
        let elem = self.mesh.locate(x)?;
        let xi = self.mesh.to_reference(elem, x)?;
        let (v, _) = shapes(self.mesh.dim(), &xi);
        Ok(corners(&self.mesh, self.nodes, elem).iter().zip(&v).map(|(&i, s)| nodal[i] * s).sum())
    }
}

/// Restriction/prolongation tables between a DG space and the vertex grid.
#[derive(Clone, Debug)]
pub(crate) struct Dsa {
    op: DiffusionOperator,
    space: std::sync::Arc<DgSpace>,
    /// Per element and quadrature point: (weight · σ_s, DG basis values, shape values).
    tables: Vec<Vec<(f64, Vec<f64>, Vec<f64>)>>,
    /// Modal coefficients of each bilinear shape function on the reference element.
    shape_modes: Vec<Vec<f64>>,
}

impl Dsa {
    pub fn new(problem: &TransportProblem) -> Result<Self> {
        let space = problem.space.clone();
        let mesh = space.mesh();
        let dim = mesh.dim();
        let sigma_s = problem.sigma_s.clone();
        let sigma_a = problem.sigma_a.clone();
        let diffusion = {
            let (s, a) = (sigma_s.clone(), sigma_a.clone());
            match (s.as_constant(), a.as_constant()) {
                (Some(s), Some(a)) => Coefficient::Constant(1.0 / (3.0 * (s + a))),
                _ => Coefficient::field(move |x| 1.0 / (3.0 * (s.eval(x) + a.eval(x)))),
            }
        };
        let points = problem.quadrature_points.max(space.degree() + 2);
        let op = DiffusionOperator::new(mesh, &diffusion, &sigma_a, DiffusionBoundary::Marshak, points)?;
        let basis = space.basis();
        let nd = basis.len();
        let mut vals = vec![0.0; nd];
        let tables = (0..mesh.num_elements())
            .map(|elem| {
                element_quadrature(mesh, elem, points)
                    .into_iter()
                    .map(|(xi, x, w)| {
                        basis.eval(&xi, &mut vals);
                        (w * sigma_s.eval(&x[..dim]), vals.clone(), shapes(dim, &xi).0)
                    })
                    .collect()
            })
            .collect();
        // bilinear shapes are degree <= 1 per axis, so two points suffice
        let ref_quad = {
            let q = crate::numerics::gauss_legendre(2);
            let mut pts = Vec::new();
            if dim == 1 {
                for (x, w) in q.iter() {
                    pts.push(([x, 0.0], w));
                }
            } else {
                for (y, wy) in q.iter() {
                    for (x, wx) in q.iter() {
                        pts.push(([x, y], wx * wy));
                    }
                }
            }
            pts
        };
        let n_shapes = 1 << dim;
        let shape_modes = (0..n_shapes)
            .map(|s| {
                let mut modes = vec![0.0; nd];
                for (xi, w) in &ref_quad {
                    basis.eval(xi, &mut vals);
                    let sv = shapes(dim, xi).0[s];
                    for a in 0..nd {
                        modes[a] += w * sv * vals[a] / basis.reference_norm_sq(a);
                    }
                }
                modes
            })
            .collect();
        Ok(Dsa { op, space, tables, shape_modes })
    }

    /// Correction `δ` (as a DG density) for the density update `r`.
    pub fn correct(&self, r: &DgField) -> Result<DgField> {
        let mesh = self.space.mesh();
        let nd = self.space.dofs_per_element();
        let mut b = vec![0.0; self.op.num_nodes()];
        for elem in 0..mesh.num_elements() {
            let idx = corners(mesh, self.op.nodes, elem);
            let coeffs = r.element(0, elem);
            for (ws, phi, sh) in &self.tables[elem] {
                let rv: f64 = coeffs.iter().zip(phi).map(|(c, p)| c * p).sum();
                for (p, &i) in idx.iter().enumerate() {
                    b[i] += ws * rv * sh[p];
                }
            }
        }
        let delta = self.op.solve(&b)?;
        let mut out = DgField::zeros(self.space.clone(), 1);
        for elem in 0..mesh.num_elements() {
            let idx = corners(mesh, self.op.nodes, elem);
            let dst = &mut out.coeffs_mut()[elem * nd..(elem + 1) * nd];
            for (p, &i) in idx.iter().enumerate() {
                for a in 0..nd {
                    dst[a] += delta[i] * self.shape_modes[p][a];
                }
            }
        }
        Ok(out)
    }
}

/// DSA correction for a density update `r`: the diffusion solve with source
/// `σ_s r`, prolonged into the DG density space.
pub fn dsa_correct(update: &DgField, problem: &TransportProblem) -> Result<DgField> {
    if update.components() != 1 {
        return Err(Error::invalid("DSA expects a single-component density update"));
    }
    Dsa::new(problem)?.correct(update)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{uniform_mesh, Boundary};
    use std::f64::consts::PI;

    #[test]
    fn dirichlet_two_point_problem() {
        // -D u'' + a u = sin(pi x) on [0,1], u(0)=u(1)=0
        let (d, a) = (0.3, 2.0);
        let exact = |x: f64| (PI * x).sin() / (d * PI * PI + a);
        let mut errs = Vec::new();
        for n in [16, 32, 64] {
            let mesh = uniform_mesh(&[0.0], &[1.0], &[n], &[[Boundary::Vacuum; 2]]).unwrap();
            let op = DiffusionOperator::new(
                &mesh,
                &Coefficient::Constant(d),
                &Coefficient::Constant(a),
                DiffusionBoundary::Dirichlet,
                3,
            )
            .unwrap();
            let u = op.solve(&op.load(4, |x| (PI * x[0]).sin())).unwrap();
            let e = (0..op.num_nodes())
                .map(|i| (u[i] - exact(op.node_position(i)[0])).abs())
                .fold(0.0, f64::max);
            errs.push(e);
        }
        assert!(errs[2] < 1e-3);
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.8, "{errs:?}");
    }

    #[test]
    fn periodic_two_dimensional() {
        // -Δu = cos(2πx) on the unit torus, u = cos(2πx)/(4π²)
        let mesh = uniform_mesh(&[0.0, 0.0], &[1.0, 1.0], &[32, 8], &[[Boundary::Periodic; 2]; 2]).unwrap();
        let op = DiffusionOperator::new(
            &mesh,
            &Coefficient::Constant(1.0),
            &Coefficient::Constant(0.0),
            DiffusionBoundary::Marshak,
            3,
        )
        .unwrap();
        let u = op.solve(&op.load(4, |x| (2.0 * PI * x[0]).cos())).unwrap();
        let v = op.eval(&u, &[0.0, 0.4]).unwrap();
        assert!((v - 1.0 / (4.0 * PI * PI)).abs() < 2e-3 / (4.0 * PI * PI) * 10.0);
    }
}
