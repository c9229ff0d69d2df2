//! Directed per-ordinate transport sweeps.

use crate::error::{Error, Result};
use crate::mesh::Side;
use crate::numerics::dense::Lu;

use super::field::DgField;
use super::operator::{inflow_load, source_loads, ElementOperators, WeightedMass};
use super::problem::TransportProblem;

const MAX_PERIODIC_PASSES: usize = 2000;

/// Element operators and factorizations reused across sweeps of one problem.
pub struct SweepContext {
    problem: TransportProblem,
    ops: ElementOperators,
    sigma_t: WeightedMass,
    /// One factorization per ordinate when `σ_t` is uniform.
    cached: Vec<Option<Lu>>,
    periodic: bool,
}

impl SweepContext {
    pub fn new(problem: &TransportProblem) -> Result<Self> {
        problem.validate()?;
        let space = &problem.space;
        let ops = ElementOperators::new(space);
        let sigma_t = WeightedMass::build(space, &problem.sigma_s, problem.quadrature_points);
        let sigma_t = match (sigma_t, WeightedMass::build(space, &problem.sigma_a, problem.quadrature_points)) {
            (WeightedMass::Uniform(s), WeightedMass::Uniform(a)) => WeightedMass::Uniform(s + a),
            (s, a) => WeightedMass::PerElement(sum_blocks(&s, &a, space.num_elements(), &ops.mass)),
        };
        let mesh = space.mesh();
        let periodic = (0..mesh.dim()).any(|a| mesh.is_periodic(a));
        let mut ctx = SweepContext { problem: problem.clone(), ops, sigma_t, cached: Vec::new(), periodic };
        if matches!(ctx.sigma_t, WeightedMass::Uniform(_)) {
            ctx.cached = (0..problem.ordinates.len())
                .map(|j| Lu::factor(ctx.ops.n, ctx.local_matrix(j, 0)))
                .collect();
        }
        Ok(ctx)
    }

    pub fn problem(&self) -> &TransportProblem {
        &self.problem
    }

    pub(crate) fn mass(&self) -> &[f64] {
        &self.ops.mass
    }

    /// Streaming + outflow + removal matrix of ordinate `j` on `elem`.
    fn local_matrix(&self, j: usize, elem: usize) -> Vec<f64> {
        let n = self.ops.n;
        let u = self.problem.velocity(j);
        let mut a = vec![0.0; n * n];
        for axis in 0..self.ops.dim {
            if u[axis] == 0.0 {
                continue;
            }
            let out_side = if u[axis] > 0.0 { Side::Upper } else { Side::Lower };
            let un = u[axis] * out_side.sign();
            let st = &self.ops.stream[axis];
            let fo = &self.ops.face_own[axis][out_side.index()];
            for i in 0..n * n {
                a[i] += u[axis] * st[i] + un * fo[i];
            }
        }
        self.sigma_t.add_block(elem, &self.ops.mass, &mut a);
        a
    }

    fn factor(&self, j: usize, elem: usize) -> Result<std::borrow::Cow<'_, Lu>> {
        if let Some(slot) = self.cached.get(j) {
            return slot
                .as_ref()
                .map(std::borrow::Cow::Borrowed)
                .ok_or(Error::SingularMatrix { what: "sweep element" });
        }
        Lu::factor(self.ops.n, self.local_matrix(j, elem))
            .map(std::borrow::Cow::Owned)
            .ok_or(Error::SingularMatrix { what: "sweep element" })
    }

    /// Sweeps ordinate `j` given the per-element volume loads `∫ s τ` (layout
    /// `[elem * n + a]`). `psi` holds the result; on periodic meshes its input
    /// value seeds the wrap-around inflow.
    pub fn sweep(&self, j: usize, load: &[f64], psi: &mut [f64]) -> Result<()> {
        if !self.periodic {
            return self.pass(j, load, psi);
        }
        let mut prev = psi.to_vec();
        for _ in 0..MAX_PERIODIC_PASSES {
            self.pass(j, load, psi)?;
            let (mut diff, mut norm) = (0.0f64, 0.0f64);
            for (a, b) in psi.iter().zip(&prev) {
                diff = diff.max((a - b).abs());
                norm = norm.max(a.abs());
            }
            if diff <= 1e-15 * norm.max(1e-300) || diff == 0.0 {
                return Ok(());
            }
            prev.copy_from_slice(psi);
        }
        Err(Error::PeriodicSweep { passes: MAX_PERIODIC_PASSES })
    }

    fn pass(&self, j: usize, load: &[f64], psi: &mut [f64]) -> Result<()> {
        let mesh = self.problem.space.mesh();
        let n = self.ops.n;
        let dim = self.ops.dim;
        let u = self.problem.velocity(j);
        let dir = self.problem.ordinates.direction(j);
        let counts = mesh.counts();
        let mut rhs = vec![0.0; n];
        let mut bload = vec![0.0; n];
        let ny = if dim == 1 { 1 } else { counts[1] };
        for iy in 0..ny {
            let cy = if dim == 2 && u[1] < 0.0 { ny - 1 - iy } else { iy };
            for ix in 0..counts[0] {
                let cx = if u[0] < 0.0 { counts[0] - 1 - ix } else { ix };
                let elem = mesh.element_index([cx, cy]);
                rhs.copy_from_slice(&load[elem * n..(elem + 1) * n]);
                for axis in 0..dim {
                    if u[axis] == 0.0 {
                        continue;
                    }
                    let in_side = if u[axis] > 0.0 { Side::Lower } else { Side::Upper };
                    let un = u[axis] * in_side.sign();
                    match mesh.neighbor(elem, axis, in_side) {
                        Some(nb) => {
                            let fnb = &self.ops.face_nb[axis][in_side.index()];
                            let src = &psi[nb * n..(nb + 1) * n];
                            for a in 0..n {
                                let s: f64 = fnb[a * n..(a + 1) * n].iter().zip(src).map(|(m, v)| m * v).sum();
                                rhs[a] -= un * s;
                            }
                        }
                        None => {
                            inflow_load(&self.problem, elem, axis, in_side, &dir, &mut bload);
                            for a in 0..n {
                                rhs[a] -= un * bload[a];
                            }
                        }
                    }
                }
                self.factor(j, elem)?.solve_in_place(&mut rhs);
                psi[elem * n..(elem + 1) * n].copy_from_slice(&rhs);
            }
        }
        Ok(())
    }
}

fn sum_blocks(a: &WeightedMass, b: &WeightedMass, ne: usize, mass: &[f64]) -> Vec<f64> {
    let n = mass.len();
    let mut out = vec![0.0; ne * n * n];
    for elem in 0..ne {
        let blk = &mut out[elem * n * n..(elem + 1) * n * n];
        a.add_block(elem, mass, blk);
        b.add_block(elem, mass, blk);
    }
    out
}

/// Solves the per-ordinate steady operator of ordinate `j` with volume
/// source `source` (one component, modal coefficients) and the problem's
/// inflow data. The problem's own volume source is not used.
pub fn transport_sweep(problem: &TransportProblem, j: usize, source: &DgField) -> Result<DgField> {
    if source.components() != 1 || source.space().num_elements() != problem.space.num_elements() {
        return Err(Error::invalid("sweep source must be a single-component field on the problem space"));
    }
    let ctx = SweepContext::new(problem)?;
    let mass = ctx.mass().to_vec();
    let n = mass.len();
    let load: Vec<f64> = source.coeffs().iter().enumerate().map(|(i, c)| c * mass[i % n]).collect();
    let mut out = DgField::zeros(problem.space.clone(), 1);
    ctx.sweep(j, &load, out.coeffs_mut())?;
    Ok(out)
}

/// Sweeps every ordinate with the problem's own volume source only (no
/// scattering); one component per ordinate.
pub fn sweep_all(problem: &TransportProblem) -> Result<DgField> {
    let ctx = SweepContext::new(problem)?;
    let loads = source_loads(problem);
    let mut out = DgField::zeros(problem.space.clone(), problem.ordinates.len());
    let len = problem.space.num_elements() * problem.space.dofs_per_element();
    for j in 0..problem.ordinates.len() {
        ctx.sweep(j, &loads[j * len..(j + 1) * len], out.component_mut(j))?;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::ordinates_slab;
    use crate::dg::field::{project_l2, project_scalar, DgSpace};
    use crate::dg::Coefficient;
    use crate::mesh::{uniform_mesh, Boundary};
    use std::sync::Arc;

    #[test]
    fn pure_advection_constant_inflow() {
        let m = uniform_mesh(&[0.0], &[1.0], &[5], &[[Boundary::Inflow; 2]]).unwrap();
        let space = DgSpace::new(m, 2);
        let ords = Arc::new(ordinates_slab(4).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone()).with_inflow(|_, _, _| 1.0);
        let zero = DgField::zeros(space.clone(), 1);
        for j in 0..4 {
            let psi = transport_sweep(&p, j, &zero).unwrap();
            for x in [0.0, 0.13, 0.5, 0.99, 1.0] {
                assert!((psi.eval(0, &[x]).unwrap() - 1.0).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn finite_volume_stencil_for_k0() {
        // one cell, k=0: v (ψ - g) + σ h ψ = h s
        let m = uniform_mesh(&[0.0], &[0.5], &[1], &[[Boundary::Inflow; 2]]).unwrap();
        let space = DgSpace::new(m, 0);
        let ords = Arc::new(ordinates_slab(2).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone())
            .with_sigma_a(Coefficient::Constant(3.0))
            .with_inflow(|_, _, _| 2.0);
        let s = project_scalar(&space, 2, |_| 1.5);
        let v = ords.direction(1)[0];
        let psi = transport_sweep(&p, 1, &s).unwrap();
        let expect = (v * 2.0 + 0.5 * 1.5) / (v + 3.0 * 0.5);
        assert!((psi.coeffs()[0] - expect).abs() < 1e-14);
    }

    #[test]
    fn linear_solution_is_exact() {
        let m = uniform_mesh(&[0.0], &[1.0], &[4], &[[Boundary::Inflow; 2]]).unwrap();
        let space = DgSpace::new(m, 1);
        let ords = Arc::new(ordinates_slab(2).unwrap());
        let exact = |x: &[f64], d: &[f64; 3]| 1.0 + (2.0 + d[0]) * x[0];
        let p = TransportProblem::new(space.clone(), ords.clone())
            .with_sigma_a(Coefficient::Constant(0.5))
            .with_inflow(move |x, d, _| exact(x, d))
            .with_source(move |x, d, _| d[0] * (2.0 + d[0]) + 0.5 * exact(x, d));
        let psi = sweep_all(&p).unwrap();
        let proj = project_l2(exact, &space, &ords);
        for (a, b) in psi.coeffs().iter().zip(proj.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn periodic_sweep_settles() {
        let m = uniform_mesh(&[0.0], &[1.0], &[8], &[[Boundary::Periodic; 2]]).unwrap();
        let space = DgSpace::new(m, 1);
        let ords = Arc::new(ordinates_slab(2).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone())
            .with_sigma_a(Coefficient::Constant(1.0))
            .with_source(|_, _, _| 2.0);
        let psi = sweep_all(&p).unwrap();
        for j in 0..2 {
            assert!((psi.eval(j, &[0.37]).unwrap() - 2.0).abs() < 1e-12);
        }
    }
}
