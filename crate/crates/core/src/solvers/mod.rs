//! Source iteration with optional diffusion synthetic acceleration, the
//! steady driver, and BDF time stepping.

mod bdf;
mod diffusion;

use std::time::Instant;

use rayon::prelude::*;

use crate::dg::{source_loads, DgField, SweepContext, TransportProblem, WeightedMass};
use crate::error::{Error, Result};

pub use bdf::{bdf_advance, solve_transient, BdfOrder, BdfState, DtRule, StartupData, TransientSolution};
pub use diffusion::{dsa_correct, DiffusionBoundary, DiffusionOperator};
pub(crate) use diffusion::Dsa;

/// Outcome of one source-iteration solve.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `L2` norm of the last density update.
    pub final_update: f64,
    /// Update norm after every iteration.
    pub history: Vec<f64>,
    /// Seconds.
    pub wall_time: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IterationOptions {
    pub tol: f64,
    pub max_iterations: usize,
    pub dsa: bool,
}

impl Default for IterationOptions {
    fn default() -> Self {
        IterationOptions { tol: 1e-10, max_iterations: 10_000, dsa: true }
    }
}

impl IterationOptions {
    /// Default options with the stopping tolerance for polynomial degree `k`.
    pub fn for_degree(k: usize) -> Self {
        IterationOptions { tol: default_tolerance(k), ..Default::default() }
    }
}

/// `1e-10` for `k <= 2`, `1e-11` above.
pub fn default_tolerance(k: usize) -> f64 {
    if k <= 2 {
        1e-10
    } else {
        1e-11
    }
}

/// Source iteration on a prepared sweep context.
///
/// `loads` are the fixed per-ordinate volume loads (one component per
/// ordinate, layout of a [`DgField`]); scattering is added each iteration
/// from the current density.
pub(crate) fn iterate(
    ctx: &SweepContext,
    loads: &[f64],
    initial: Option<&DgField>,
    options: &IterationOptions,
) -> Result<(DgField, SolveReport)> {
    let start = Instant::now();
    let problem = ctx.problem();
    if !(options.tol > 0.0) {
        return Err(Error::invalid(format!("tolerance must be positive, got {}", options.tol)));
    }
    let space = &problem.space;
    let n_ord = problem.ordinates.len();
    let len = space.num_elements() * space.dofs_per_element();
    let n = space.dofs_per_element();
    let mass = ctx.mass().to_vec();
    let scattering = problem.has_scattering();
    let sigma_s = WeightedMass::build(space, &problem.sigma_s, problem.quadrature_points);
    let dsa = if options.dsa && scattering { Some(Dsa::new(problem)?) } else { None };

    let mut phi = match initial {
        Some(f) if f.components() == 1 && f.coeffs().len() == len => f.clone(),
        Some(_) => return Err(Error::invalid("initial density must be a single-component field on the problem space")),
        None => DgField::zeros(space.clone(), 1),
    };
    let mut psi = DgField::zeros(space.clone(), n_ord);
    let mut report = SolveReport::default();
    let mut iso = vec![0.0; len];
    loop {
        iso.iter_mut().for_each(|v| *v = 0.0);
        if scattering {
            for elem in 0..space.num_elements() {
                sigma_s.apply_add(elem, &mass, phi.element(0, elem), &mut iso[elem * n..(elem + 1) * n]);
            }
        }
        psi.coeffs_mut()
            .par_chunks_mut(len)
            .enumerate()
            .try_for_each(|(j, out)| {
                let load: Vec<f64> = loads[j * len..(j + 1) * len].iter().zip(&iso).map(|(a, b)| a + b).collect();
                ctx.sweep(j, &load, out)
            })?;
        let half = psi.density(&problem.ordinates)?;
        let mut next = half.clone();
        if let Some(dsa) = &dsa {
            let mut r = half.clone();
            for (a, b) in r.coeffs_mut().iter_mut().zip(phi.coeffs()) {
                *a -= b;
            }
            let delta = dsa.correct(&r)?;
            for (a, b) in next.coeffs_mut().iter_mut().zip(delta.coeffs()) {
                *a += b;
            }
        }
        let mut diff = next.clone();
        for (a, b) in diff.coeffs_mut().iter_mut().zip(phi.coeffs()) {
            *a -= b;
        }
        let update = diff.l2_norm(0);
        report.iterations += 1;
        report.history.push(update);
        report.final_update = update;
        phi = next;
        if !scattering || update < options.tol {
            break;
        }
        if report.iterations >= options.max_iterations {
            report.wall_time = start.elapsed().as_secs_f64();
            return Err(Error::NotConverged { report: Box::new(report) });
        }
    }
    report.wall_time = start.elapsed().as_secs_f64();
    Ok((psi, report))
}

/// Lagged-scattering fixed-point iteration for `problem`, starting from the
/// density `initial` (zero if `None`). Returns the per-ordinate solution.
pub fn source_iteration(
    problem: &TransportProblem,
    initial: Option<&DgField>,
    options: &IterationOptions,
) -> Result<(DgField, SolveReport)> {
    let ctx = SweepContext::new(problem)?;
    let loads = source_loads(problem);
    iterate(&ctx, &loads, initial, options)
}

/// Steady solve with the given options (DSA on by default).
pub fn solve_steady(problem: &TransportProblem, options: &IterationOptions) -> Result<(DgField, SolveReport)> {
    source_iteration(problem, None, options)
}
