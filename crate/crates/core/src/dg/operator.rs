//! Element-local DG operators, the upwind flux, and the weak-form residual.

use crate::error::{Error, Result};
use crate::mesh::{Boundary, Mesh, Side};
use crate::numerics::{gauss_legendre, legendre_with_derivative, TensorBasis};

use super::field::{element_quadrature, DgField, DgSpace};
use super::problem::{Coefficient, TransportProblem};

/// Normal flux `{Ωψ}·n + |Ω·n|/2 [ψ]·n` for traces `inner` (the side `n`
/// points away from) and `outer`; equals `Ω·n` times the upwind trace.
pub fn upwind_flux(inner: f64, outer: f64, omega_n: f64) -> f64 {
    0.5 * omega_n * (inner + outer) + 0.5 * omega_n.abs() * (inner - outer)
}

/// `|Ω·n|` below this is treated as tangential.
pub const TANGENTIAL_TOL: f64 = 1e-14;

/// Physical element matrices of a uniform mesh (identical on every element).
///
/// All matrices are row-major `[test * n + trial]`.
#[derive(Clone, Debug)]
pub(crate) struct ElementOperators {
    pub n: usize,
    pub dim: usize,
    pub mass: Vec<f64>,
    /// `-∫ ψ ∂_axis τ` per unit velocity component.
    pub stream: [Vec<f64>; 2],
    /// `∫_face ψ τ` with both traces from the element itself, `[axis][side]`.
    pub face_own: [[Vec<f64>; 2]; 2],
    /// `∫_face ψ_nb τ`, `ψ_nb` the neighbor across `side`, `[axis][side]`.
    pub face_nb: [[Vec<f64>; 2]; 2],
}

impl ElementOperators {
    pub fn new(space: &DgSpace) -> Self {
        let basis = space.basis();
        let mesh = space.mesh();
        let dim = mesh.dim();
        let m = basis.modes_per_axis();
        let n = basis.len();
        let h = mesh.spacing();

        let q = gauss_legendre(m + 1);
        let mut s1 = vec![0.0; m * m];
        for (x, w) in q.iter() {
            for a in 0..m {
                let da = legendre_with_derivative(a, x).1;
                for b in 0..m {
                    s1[a * m + b] += w * da * legendre_with_derivative(b, x).0;
                }
            }
        }
        let m1: Vec<f64> = (0..m).map(|a| 2.0 / (2.0 * a as f64 + 1.0)).collect();
        let end = |side: Side, a: usize| match side {
            Side::Upper => 1.0,
            Side::Lower => {
                if a % 2 == 0 {
                    1.0
                } else {
                    -1.0
                }
            }
        };
        let jac: f64 = (0..dim).map(|a| h[a] / 2.0).product();
        let mass = space.mass_diagonal();

        let mut stream = [vec![0.0; n * n], vec![0.0; n * n]];
        let mut face_own = [[vec![0.0; n * n], vec![0.0; n * n]], [vec![0.0; n * n], vec![0.0; n * n]]];
        let mut face_nb = face_own.clone();
        for axis in 0..dim {
            let other = 1 - axis;
            let stream_scale = jac * 2.0 / h[axis];
            let face_scale = if dim == 1 { 1.0 } else { h[other] / 2.0 };
            for a in 0..n {
                let ma = basis.mode(a);
                for b in 0..n {
                    let mb = basis.mode(b);
                    let tangential = if dim == 1 {
                        1.0
                    } else if ma[other] == mb[other] {
                        m1[ma[other]]
                    } else {
                        0.0
                    };
                    if tangential == 0.0 {
                        continue;
                    }
                    stream[axis][a * n + b] = -stream_scale * s1[ma[axis] * m + mb[axis]] * tangential;
                    for side in [Side::Lower, Side::Upper] {
                        let s = side.index();
                        face_own[axis][s][a * n + b] =
                            face_scale * end(side, ma[axis]) * end(side, mb[axis]) * tangential;
                        face_nb[axis][s][a * n + b] =
                            face_scale * end(side, ma[axis]) * end(side.opposite(), mb[axis]) * tangential;
                    }
                }
            }
        }
        ElementOperators { n, dim, mass, stream, face_own, face_nb }
    }
}

/// Mass matrix weighted by a coefficient: uniform diagonal or one dense block
/// per element.
#[derive(Clone, Debug)]
pub(crate) enum WeightedMass {
    Uniform(f64),
    PerElement(Vec<f64>),
}

impl WeightedMass {
    pub fn build(space: &DgSpace, coef: &Coefficient, points: usize) -> Self {
        if let Some(c) = coef.as_constant() {
            return WeightedMass::Uniform(c);
        }
        let n = space.dofs_per_element();
        let basis = space.basis();
        let mut data = vec![0.0; space.num_elements() * n * n];
        let mut v = vec![0.0; n];
        for elem in 0..space.num_elements() {
            let blk = &mut data[elem * n * n..(elem + 1) * n * n];
            for (xi, x, w) in element_quadrature(space.mesh(), elem, points) {
                let c = coef.eval(&x) * w;
                basis.eval(&xi, &mut v);
                for a in 0..n {
                    for b in 0..n {
                        blk[a * n + b] += c * v[a] * v[b];
                    }
                }
            }
        }
        WeightedMass::PerElement(data)
    }

    /// Adds the element block to `mat` (row-major `n x n`).
    pub fn add_block(&self, elem: usize, mass: &[f64], mat: &mut [f64]) {
        let n = mass.len();
        match self {
            WeightedMass::Uniform(c) => {
                for a in 0..n {
                    mat[a * n + a] += c * mass[a];
                }
            }
            WeightedMass::PerElement(d) => {
                for (m, v) in mat.iter_mut().zip(&d[elem * n * n..(elem + 1) * n * n]) {
                    *m += v;
                }
            }
        }
    }

    /// `out += M_elem · x`.
    pub fn apply_add(&self, elem: usize, mass: &[f64], x: &[f64], out: &mut [f64]) {
        let n = mass.len();
        match self {
            WeightedMass::Uniform(c) => {
                for a in 0..n {
                    out[a] += c * mass[a] * x[a];
                }
            }
            WeightedMass::PerElement(d) => {
                let blk = &d[elem * n * n..(elem + 1) * n * n];
                for a in 0..n {
                    out[a] += blk[a * n..(a + 1) * n].iter().zip(x).map(|(m, v)| m * v).sum::<f64>();
                }
            }
        }
    }
}

/// Face quadrature of `elem` on (`axis`, `side`): own reference point,
/// physical point, weight including the face Jacobian.
pub(crate) fn face_quadrature(
    mesh: &Mesh,
    elem: usize,
    axis: usize,
    side: Side,
    points: usize,
) -> Vec<([f64; 2], [f64; 2], f64)> {
    let mut xi = [0.0; 2];
    xi[axis] = side.sign();
    if mesh.dim() == 1 {
        return vec![(xi, mesh.from_reference(elem, &xi), 1.0)];
    }
    let other = 1 - axis;
    let scale = mesh.spacing()[other] / 2.0;
    gauss_legendre(points)
        .iter()
        .map(|(t, w)| {
            let mut r = xi;
            r[other] = t;
            (r, mesh.from_reference(elem, &r), w * scale)
        })
        .collect()
}

/// `∫_face g(x, Ω) τ ds` on a boundary face, for every test function.
pub(crate) fn inflow_load(
    problem: &TransportProblem,
    elem: usize,
    axis: usize,
    side: Side,
    dir: &[f64; 3],
    out: &mut [f64],
) {
    out.iter_mut().for_each(|v| *v = 0.0);
    let mesh = problem.space.mesh();
    if mesh.boundary(axis, side) != Boundary::Inflow {
        return;
    }
    let Some(g) = &problem.inflow else { return };
    let basis = problem.space.basis();
    let mut v = vec![0.0; basis.len()];
    for (xi, x, w) in face_quadrature(mesh, elem, axis, side, problem.space.degree() + 2) {
        let gx = g(&x[..mesh.dim()], dir, problem.time);
        basis.eval(&xi, &mut v);
        for a in 0..out.len() {
            out[a] += w * gx * v[a];
        }
    }
}

/// Per-ordinate source loads `∫ q(x, Ω_j, t) τ` for all ordinates,
/// laid out like a [`DgField`] with one component per ordinate.
pub(crate) fn source_loads(problem: &TransportProblem) -> Vec<f64> {
    let space = &problem.space;
    let n = space.dofs_per_element();
    let ne = space.num_elements();
    let n_ord = problem.ordinates.len();
    let mut out = vec![0.0; n_ord * ne * n];
    let Some(q) = &problem.source else { return out };
    let basis = space.basis();
    let dim = space.dim();
    let mut v = vec![0.0; n];
    for elem in 0..ne {
        let quad = element_quadrature(space.mesh(), elem, problem.quadrature_points);
        let tables: Vec<Vec<f64>> = quad
            .iter()
            .map(|(xi, _, _)| {
                basis.eval(xi, &mut v);
                v.clone()
            })
            .collect();
        for j in 0..n_ord {
            let dir = problem.ordinates.direction(j);
            let blk = &mut out[(j * ne + elem) * n..(j * ne + elem + 1) * n];
            for ((_, x, w), phi) in quad.iter().zip(&tables) {
                let s = w * q(&x[..dim], &dir, problem.time);
                for a in 0..n {
                    blk[a] += s * phi[a];
                }
            }
        }
    }
    out
}

/// Projected scattering source `Π(σ_s ψ̄_h)` of a per-ordinate field: one
/// component, shared by every ordinate.
pub fn scattering_source(field: &DgField, problem: &TransportProblem) -> Result<DgField> {
    let density = field.density(&problem.ordinates)?;
    let space = &problem.space;
    let weighted = WeightedMass::build(space, &problem.sigma_s, problem.quadrature_points);
    let mass = space.mass_diagonal();
    let n = mass.len();
    let mut out = DgField::zeros(space.clone(), 1);
    let mut load = vec![0.0; n];
    for elem in 0..space.num_elements() {
        load.iter_mut().for_each(|v| *v = 0.0);
        weighted.apply_add(elem, &mass, density.element(0, elem), &mut load);
        let dst = &mut out.coeffs_mut()[elem * n..(elem + 1) * n];
        for a in 0..n {
            dst[a] = load[a] / mass[a];
        }
    }
    Ok(out)
}

/// Weak-form residual of streaming plus removal for ordinate `j`:
/// `-(ψ, Ω·∇τ) + <F̂(ψ), τ>_{∂K} + (σ_t ψ, τ)` for every test function, with
/// inflow boundary data entering through the flux. Scattering is excluded.
///
/// Evaluated pointwise by quadrature with both traces fed to [`upwind_flux`].
pub fn apply_transport(field: &DgField, problem: &TransportProblem, j: usize) -> Result<Vec<f64>> {
    let space = &problem.space;
    if !std::sync::Arc::ptr_eq(field.space(), space) && field.space().num_elements() != space.num_elements() {
        return Err(Error::invalid("field and problem use different spaces"));
    }
    let comp = if field.components() == 1 { 0 } else { j };
    let mesh = space.mesh();
    let basis: &TensorBasis = space.basis();
    let dim = mesh.dim();
    let n = basis.len();
    let ne = mesh.num_elements();
    let dir = problem.ordinates.direction(j);
    let u = problem.velocity(j);
    let h = mesh.spacing();
    let k = space.degree();
    let mut out = vec![0.0; ne * n];
    let mut v = vec![0.0; n];
    let mut g = vec![0.0; n * dim];
    let mut vn = vec![0.0; n];
    for elem in 0..ne {
        let coeffs = field.element(comp, elem);
        let res = &mut out[elem * n..(elem + 1) * n];
        for (xi, _, w) in element_quadrature(mesh, elem, k + 2) {
            basis.eval_with_gradients(&xi, &mut v, &mut g);
            let psi: f64 = coeffs.iter().zip(&v).map(|(c, b)| c * b).sum();
            for a in 0..n {
                let mut adv = 0.0;
                for ax in 0..dim {
                    adv += u[ax] * g[a * dim + ax] * 2.0 / h[ax];
                }
                res[a] -= w * psi * adv;
            }
        }
        for (xi, x, w) in element_quadrature(mesh, elem, problem.quadrature_points) {
            basis.eval(&xi, &mut v);
            let psi: f64 = coeffs.iter().zip(&v).map(|(c, b)| c * b).sum();
            let st = problem.sigma_t(&x[..dim]);
            for a in 0..n {
                res[a] += w * st * psi * v[a];
            }
        }
        for axis in 0..dim {
            for side in [Side::Lower, Side::Upper] {
                let omega_n = u[axis] * side.sign();
                let neighbor = mesh.neighbor(elem, axis, side);
                for (xi, x, w) in face_quadrature(mesh, elem, axis, side, k + 2) {
                    basis.eval(&xi, &mut v);
                    let inner: f64 = coeffs.iter().zip(&v).map(|(c, b)| c * b).sum();
                    let outer = match neighbor {
                        Some(nb) => {
                            let mut xn = xi;
                            xn[axis] = -xi[axis];
                            basis.eval(&xn, &mut vn);
                            field.element(comp, nb).iter().zip(&vn).map(|(c, b)| c * b).sum()
                        }
                        None => match (mesh.boundary(axis, side), &problem.inflow) {
                            (Boundary::Inflow, Some(gf)) => gf(&x[..dim], &dir, problem.time),
                            _ => 0.0,
                        },
                    };
                    let flux = upwind_flux(inner, outer, omega_n);
                    for a in 0..n {
                        res[a] += w * flux * v[a];
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::{ordinates_slab, ordinates_sphere_cl};
    use crate::dg::field::project_l2;
    use crate::mesh::uniform_mesh;
    use std::sync::Arc;

    #[test]
    fn flux_examples() {
        assert!((upwind_flux(2.0, 5.0, 0.5) - 1.0).abs() < 1e-15);
        assert!((upwind_flux(2.0, 5.0, -0.5) + 2.5).abs() < 1e-15);
        assert!((upwind_flux(3.0, 3.0, 0.7) - 2.1).abs() < 1e-15);
    }

    #[test]
    fn constant_field_periodic_residual_vanishes() {
        let m = uniform_mesh(&[0.0, 0.0], &[1.0, 1.0], &[3, 4], &[[Boundary::Periodic; 2]; 2]).unwrap();
        let space = DgSpace::new(m, 2);
        let ords = Arc::new(ordinates_sphere_cl(4, 2).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone());
        let f = project_l2(|_, _| 1.7, &space, &ords);
        for j in 0..ords.len() {
            let r = apply_transport(&f, &p, j).unwrap();
            assert!(r.iter().all(|v| v.abs() < 1e-13));
        }
    }

    #[test]
    fn galerkin_exact_for_polynomials() {
        let m = uniform_mesh(&[0.0, -1.0], &[2.0, 1.0], &[3, 2], &[[Boundary::Inflow; 2]; 2]).unwrap();
        let space = DgSpace::new(m, 1);
        let ords = Arc::new(ordinates_sphere_cl(4, 2).unwrap());
        let exact = |x: &[f64]| 1.0 + x[0] - 2.0 * x[1] + 0.5 * x[0] * x[1];
        let p = TransportProblem::new(space.clone(), ords.clone())
            .with_sigma_a(Coefficient::Constant(0.7))
            .with_inflow(move |x, _, _| exact(x))
            .with_source(move |x, d, _| {
                d[0] * (1.0 + 0.5 * x[1]) + d[1] * (-2.0 + 0.5 * x[0]) + 0.7 * exact(x)
            });
        let psi = project_l2(|x, _| exact(x), &space, &ords);
        let loads = source_loads(&p);
        let len = space.num_elements() * space.dofs_per_element();
        for j in 0..ords.len() {
            let r = apply_transport(&psi, &p, j).unwrap();
            for (a, b) in r.iter().zip(&loads[j * len..(j + 1) * len]) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn element_operators_match_pointwise_residual() {
        // sweep-side reference matrices against the quadrature residual
        let m = uniform_mesh(&[0.0], &[1.0], &[1], &[[Boundary::Vacuum; 2]]).unwrap();
        let space = DgSpace::new(m, 2);
        let ops = ElementOperators::new(&space);
        let ords = Arc::new(ordinates_slab(2).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone());
        let j = 1; // v > 0: outflow through the upper face
        let u = p.velocity(j)[0];
        let n = ops.n;
        for b in 0..n {
            let mut c = vec![0.0; 2 * n];
            c[n + b] = 1.0;
            c[b] = 1.0;
            let f = DgField::from_coeffs(space.clone(), 2, c).unwrap();
            let r = apply_transport(&f, &p, j).unwrap();
            for a in 0..n {
                let expect = u * ops.stream[0][a * n + b] + u * ops.face_own[0][1][a * n + b];
                assert!((r[a] - expect).abs() < 1e-13);
            }
        }
    }
}
