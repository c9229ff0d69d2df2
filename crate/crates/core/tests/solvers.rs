use std::sync::Arc;

use dgsiac_core::harness::{
    error_l2, mms_slab_1d, mms_transient_2d, run_convergence_study, StudyConfig, TimeScheme, METRIC_L2,
};
use dgsiac_core::{
    bdf_advance, dsa_correct, ordinates_slab, project_l2, project_scalar, solve_steady, uniform_mesh, BdfOrder, BdfState,
    Boundary, Coefficient, DgField, DgSpace, DtRule, Error, IterationOptions, TransportProblem,
};

fn slab_problem(length: f64, cells: usize, sigma_t: f64, sigma_s: f64) -> TransportProblem {
    let space = DgSpace::new(uniform_mesh(&[0.0], &[length], &[cells], &[[Boundary::Vacuum; 2]]).unwrap(), 1);
    let ords = Arc::new(ordinates_slab(8).unwrap());
    TransportProblem::new(space, ords)
        .with_sigma_s(Coefficient::Constant(sigma_s))
        .with_sigma_a(Coefficient::Constant(sigma_t - sigma_s))
        .with_source(|_, _, _| 1.0)
}

fn late_ratio(history: &[f64], skip: usize) -> f64 {
    let tail = &history[skip..];
    (tail[tail.len() - 1] / tail[0]).powf(1.0 / (tail.len() - 1) as f64)
}

#[test]
fn iteration_error_reduction_factors() {
    let p = slab_problem(40.0, 200, 1.0, 0.99);
    let capped = IterationOptions { tol: 1e-14, dsa: false, max_iterations: 80 };
    let plain = match solve_steady(&p, &capped) {
        Err(Error::NotConverged { report }) => report.history,
        other => panic!("plain SI should still be iterating: {:?}", other.map(|r| r.1)),
    };
    let rho = late_ratio(&plain, 40);
    assert!((0.9..1.0).contains(&rho), "plain SI factor {rho}");

    let (_, rep) = solve_steady(&p, &IterationOptions { tol: 1e-12, dsa: true, max_iterations: 200 }).unwrap();
    let n = rep.history.len().min(8);
    let rho_dsa = late_ratio(&rep.history[..n], 1);
    assert!(rho_dsa < 0.25, "DSA factor {rho_dsa}");
}

#[test]
fn huge_time_step_recovers_steady_solution() {
    let case = mms_slab_1d();
    let space = DgSpace::new(case.mesh(12).unwrap(), 1);
    let ords = Arc::new(ordinates_slab(8).unwrap());
    let steady = case.problem(space.clone(), ords.clone(), 0.0);
    let opts = IterationOptions { tol: 1e-13, ..Default::default() };
    let (reference, _) = solve_steady(&steady, &opts).unwrap();
    let dt = 1e12;
    let state = BdfState::new(vec![DgField::zeros(space, ords.len())], 0.0, dt, BdfOrder::One).unwrap();
    let (next, _) = bdf_advance(&state, &steady.at_time(dt), &opts).unwrap();
    let diff = next.current().coeffs().iter().zip(reference.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-8, "{diff}");
}

#[test]
fn stationary_solution_is_a_fixed_point_of_bdf() {
    let case = mms_slab_1d();
    let space = DgSpace::new(case.mesh(10).unwrap(), 2);
    let ords = Arc::new(ordinates_slab(8).unwrap());
    let p = case.problem(space, ords, 0.0);
    let opts = IterationOptions { tol: 1e-13, ..Default::default() };
    let (steady, _) = solve_steady(&p, &opts).unwrap();
    let state = BdfState::new(vec![steady.clone(), steady.clone()], 0.1, 0.05, BdfOrder::Two).unwrap();
    let (next, _) = bdf_advance(&state, &p.at_time(0.15), &opts).unwrap();
    let diff = next.current().coeffs().iter().zip(steady.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(diff < 1e-11, "{diff}");
}

#[test]
fn solves_are_independent_of_thread_count() {
    let p = slab_problem(5.0, 40, 1.0, 0.9);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| solve_steady(&p, &IterationOptions::default()).unwrap())
    };
    let (a, ra) = run(1);
    let (b, rb) = run(4);
    assert_eq!(ra.iterations, rb.iterations);
    assert_eq!(ra.history, rb.history);
    assert!(a.coeffs().iter().zip(b.coeffs()).all(|(x, y)| x.to_bits() == y.to_bits()));
}

#[test]
fn pure_absorber_matches_exponential_attenuation() {
    let sigma = 2.0;
    let exact = move |x: &[f64], d: &[f64; 3]| {
        let depth = if d[0] > 0.0 { x[0] } else { 1.0 - x[0] };
        (-sigma * depth / d[0].abs()).exp()
    };
    let mut errs = Vec::new();
    for n in [8, 16, 32] {
        let space = DgSpace::new(uniform_mesh(&[0.0], &[1.0], &[n], &[[Boundary::Inflow; 2]]).unwrap(), 1);
        let ords = Arc::new(ordinates_slab(4).unwrap());
        let p = TransportProblem::new(space.clone(), ords.clone())
            .with_sigma_a(Coefficient::Constant(sigma))
            .with_inflow(|_, _, _| 1.0);
        let (psi, rep) = solve_steady(&p, &IterationOptions::default()).unwrap();
        assert_eq!(rep.iterations, 1);
        let mut e = 0.0f64;
        for j in 0..ords.len() {
            let d = ords.direction(j);
            e = e.max(error_l2(&psi, j, |x| exact(x, &d), dgsiac_core::harness::Region::Full));
        }
        errs.push(e);
    }
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!(order > 1.8, "{errs:?}");
    }
}

#[test]
fn dsa_correction_vanishes_without_scattering_or_residual() {
    let p = slab_problem(1.0, 10, 1.0, 0.5);
    let zero = DgField::zeros(p.space.clone(), 1);
    assert!(dsa_correct(&zero, &p).unwrap().coeffs().iter().all(|v| *v == 0.0));
    let r = project_scalar(&p.space, 4, |x| (3.0 * x[0]).sin());
    let absorber = p.clone().with_sigma_s(Coefficient::Constant(0.0));
    assert!(dsa_correct(&r, &absorber).unwrap().coeffs().iter().all(|v| *v == 0.0));
    assert!(dsa_correct(&r, &p).unwrap().l2_norm(0) > 0.0);
}

#[test]
fn steady_scattering_solution_orders() {
    let case = mms_slab_1d();
    let cfg = StudyConfig::new(case, 1, vec![8, 16, 32], TimeScheme::Steady);
    let t = run_convergence_study(&cfg).unwrap();
    assert!(t.orders(METRIC_L2).iter().flatten().all(|o| (o - 2.0).abs() < 0.2));
}

#[test]
fn transient_bdf2_is_second_order() {
    let scheme = TimeScheme::Bdf { order: BdfOrder::Two, rule: DtRule::Linear(1.0), t_end: 0.5 };
    let mut cfg = StudyConfig::new(mms_transient_2d(), 1, vec![8, 16, 32], scheme);
    cfg.ordinates = Some(dgsiac_core::OrdinateSpec::ChebyshevLegendre { azimuthal: 4, polar: 2 });
    let t = run_convergence_study(&cfg).unwrap();
    let o = t.final_order(METRIC_L2).unwrap();
    assert!((o - 2.0).abs() < 0.3, "{o}");
}

#[test]
fn transient_from_initial_data_bootstraps() {
    let case = mms_slab_1d();
    let space = DgSpace::new(case.mesh(8).unwrap(), 1);
    let ords = Arc::new(ordinates_slab(4).unwrap());
    // steady manufactured solution: any start-up route must stay on it
    let problem_at = |t: f64| case.problem(space.clone(), ords.clone(), t);
    let sol = dgsiac_core::solve_transient(
        &problem_at,
        &dgsiac_core::solvers::StartupData::Initial(case.solution.clone()),
        0.3,
        DtRule::Linear(1.0),
        BdfOrder::Three,
        &IterationOptions { tol: 1e-13, ..Default::default() },
    )
    .unwrap();
    let (steady, _) = solve_steady(&problem_at(0.0), &IterationOptions { tol: 1e-13, ..Default::default() }).unwrap();
    let proj = project_l2(|x, d| (case.solution)(x, d, 0.0), &space, &ords);
    let drift = sol.field.coeffs().iter().zip(steady.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let gap = proj.coeffs().iter().zip(steady.coeffs()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    // starting from the projection, the march relaxes toward the discrete steady state
    assert!(drift < gap, "{drift} vs {gap}");
    assert!(sol.steps >= 3);
}
