use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use anyhow::{Context, Result};
use dgsiac_core::harness::{
    error_l2, gaussian_source_case, mms_slab_1d, mms_steady_2d, mms_transient_2d, run_convergence_study,
    ConvergenceTable, ManufacturedCase, Margin, Region, ScatteringVariant, StudyConfig, TimeScheme,
};
use dgsiac_core::solvers::StartupData;
use dgsiac_core::{
    build_kernel, kernel_fourier, solve_steady, solve_transient, DgSpace, IterationOptions, SolveReport,
};

use crate::config::{comment, ConfigError, ProblemKind, RunConfig, Variant};
use crate::dump::{filter_dump, write_field};

/// A study finished but some meshes ran out of source iterations.
#[derive(Debug)]
pub struct StudyNotConverged(pub Vec<usize>);

impl std::fmt::Display for StudyNotConverged {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "source iteration did not converge on meshes {:?}", self.0)
    }
}

impl std::error::Error for StudyNotConverged {}

fn options(cfg: &RunConfig) -> IterationOptions {
    IterationOptions {
        tol: cfg.tol.expect("resolved"),
        max_iterations: cfg.max_iterations.expect("resolved"),
        dsa: cfg.dsa.expect("resolved"),
    }
}

fn manufactured(cfg: &RunConfig) -> Option<ManufacturedCase> {
    let mut case = match cfg.problem {
        ProblemKind::Steady1d => mms_slab_1d(),
        ProblemKind::Steady2d => mms_steady_2d(match cfg.variant {
            Some(Variant::Variable) => ScatteringVariant::Variable,
            _ => ScatteringVariant::Constant,
        }),
        ProblemKind::Transient2d => mms_transient_2d(),
        ProblemKind::Gaussian2d => return None,
    };
    if cfg.source_scale != 1.0 {
        let (s, src) = (cfg.source_scale, case.source.clone());
        case.source = Arc::new(move |x, d, t| s * src(x, d, t));
    }
    Some(case)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

/// Solves every configured mesh, dumping the density (and its filtered
/// version when enabled) plus a per-mesh solver report. Returns the text
/// printed to stdout.
pub fn solve(cfg: &RunConfig) -> Result<String> {
    ensure_dir(&cfg.output)?;
    let ords = Arc::new(cfg.ordinate_spec().build()?);
    let opts = options(cfg);
    let mut summary = String::new();
    let mut report_csv = comment(&toml::to_string(cfg)?);
    report_csv.push_str("cells,iterations,final_update,wall_seconds\n");
    for &n in &cfg.cells {
        let (density, time, reports, l2) = match manufactured(cfg) {
            Some(case) => {
                let space = DgSpace::new(case.mesh(n)?, cfg.degree);
                let (psi, time, reports) = if cfg.problem.is_transient() {
                    let problem_at = |t: f64| case.problem(space.clone(), ords.clone(), t);
                    let t_end = cfg.t_end.expect("resolved");
                    let sol = solve_transient(
                        &problem_at,
                        &StartupData::Exact(case.solution.clone()),
                        t_end,
                        cfg.dt().expect("resolved"),
                        cfg.bdf().expect("resolved"),
                        &opts,
                    )
                    .with_context(|| format!("mesh {n}"))?;
                    (sol.field, t_end, sol.reports)
                } else {
                    let p = case.problem(space.clone(), ords.clone(), 0.0);
                    let (psi, rep) = solve_steady(&p, &opts).with_context(|| format!("mesh {n}"))?;
                    (psi, 0.0, vec![rep])
                };
                let rho = psi.density(&ords)?;
                let l2 = (cfg.source_scale == 1.0)
                    .then(|| error_l2(&rho, 0, |x| (case.density)(x, time), Region::Full));
                (rho, time, reports, l2)
            }
            None => {
                let mut g = gaussian_source_case();
                g.uniform_scattering = cfg.uniform_scattering;
                let space = DgSpace::new(g.mesh(n)?, cfg.degree);
                let s = cfg.source_scale;
                let p = g.problem(space, ords.clone()).with_source(move |x, _, _| {
                    s * dgsiac_core::harness::GaussianSourceCase::source(x)
                });
                let (psi, rep) = solve_steady(&p, &opts).with_context(|| format!("mesh {n}"))?;
                (psi.density(&ords)?, 0.0, vec![rep], None)
            }
        };
        let its: usize = reports.iter().map(|r| r.iterations).sum();
        let last = reports.last().cloned().unwrap_or_else(SolveReport::default);
        let wall: f64 = if cfg.record_timings { reports.iter().map(|r| r.wall_time).sum() } else { 0.0 };
        let _ = writeln!(report_csv, "{n},{its},{:e},{wall:.6}", last.final_update);
        write_field(&cfg.output.join(format!("density_{n}.txt")), &density, "density", time, cfg)?;
        let _ = write!(summary, "cells {n}: {its} source iterations");
        if let Some(e) = l2 {
            let _ = write!(summary, ", density L2 error {e:.6e}");
        }
        if cfg.filter {
            let filtered = filter_dump(
                &cfg.output.join(format!("density_{n}.txt")),
                &cfg.output.join(format!("filtered_{n}.txt")),
            )?;
            let _ = write!(summary, ", {filtered} filtered points");
        }
        summary.push('\n');
    }
    std::fs::write(cfg.output.join("report.csv"), report_csv).context("writing report.csv")?;
    Ok(summary)
}


/// Runs the convergence study and writes `study.csv`. Returns the text
/// printed to stdout.
pub fn study(cfg: &RunConfig) -> Result<String> {
    let case = manufactured(cfg).ok_or_else(|| {
        anyhow::anyhow!(ConfigError("problem: studies need a manufactured solution; gaussian-2d has none".into()))
    })?;
    if cfg.source_scale != 1.0 {
        return Err(anyhow::anyhow!(ConfigError("source_scale: studies need the manufactured source (1.0)".into())));
    }
    let scheme = if cfg.problem.is_transient() {
        TimeScheme::Bdf {
            order: cfg.bdf().expect("resolved"),
            rule: cfg.dt().expect("resolved"),
            t_end: cfg.t_end.expect("resolved"),
        }
    } else {
        TimeScheme::Steady
    };
    let mut sc = StudyConfig::new(case, cfg.degree, cfg.cells.clone(), scheme);
    sc.filter = cfg.filter;
    sc.ordinates = Some(cfg.ordinate_spec());
    sc.options = options(cfg);
    if let Some(m) = cfg.margin_cells {
        sc.margin = Margin::Cells(m);
    }
    let mut table = run_convergence_study(&sc)?;
    if !cfg.record_timings {
        for r in &mut table.rows {
            r.solve_seconds = 0.0;
            r.filter_seconds = 0.0;
        }
    }
    ensure_dir(&cfg.output)?;
    let mut text = cfg.header()?;
    let notes = study_notes(cfg);
    text.push_str(&comment(&notes));
    text.push_str(&table.to_csv());
    std::fs::write(cfg.output.join("study.csv"), &text).context("writing study.csv")?;
    let out = summarize(&table, &notes);
    let stalled: Vec<usize> = table.rows.iter().filter(|r| r.not_converged).map(|r| r.cells).collect();
    if !stalled.is_empty() {
        print!("{out}");
        return Err(StudyNotConverged(stalled).into());
    }
    Ok(out)
}

fn study_notes(cfg: &RunConfig) -> String {
    let k = cfg.degree;
    let mut s = String::new();
    if cfg.filter {
        let _ = writeln!(s, "note: reference post-filter order is 2k+2 = {}", 2 * k + 2);
        if k >= 2 {
            let _ = writeln!(s, "note: a higher estimate 2(k+2) = {} is also quoted for k >= 2", 2 * (k + 2));
        }
    }
    s
}

fn summarize(table: &ConvergenceTable, notes: &str) -> String {
    let mut s = String::new();
    for m in &table.metrics {
        let orders: Vec<String> = table
            .orders(m)
            .iter()
            .map(|o| o.map(|v| format!("{v:.2}")).unwrap_or_else(|| "-".into()))
            .collect();
        let errs: Vec<String> =
            table.rows.iter().map(|r| r.error(m).map(|e| format!("{e:.3e}")).unwrap_or_else(|| "failed".into())).collect();
        let _ = writeln!(s, "{m}: errors [{}] orders [{}]", errs.join(", "), orders.join(", "));
    }
    for r in &table.rows {
        if let Some(f) = &r.failure {
            let _ = writeln!(s, "mesh {} failed: {f}", r.cells);
        }
    }
    s.push_str(notes);
    s
}

/// Coefficients, support and Fourier samples of the degree-`k` kernel.
pub fn kernel_info(k: usize, scaling: f64, samples: usize) -> Result<String> {
    let kern = build_kernel(k, scaling).map_err(|e| anyhow::anyhow!(ConfigError(e.to_string())))?;
    let mut s = String::new();
    let _ = writeln!(s, "degree = {}", kern.degree());
    let _ = writeln!(s, "bspline_order = {}", kern.order());
    let _ = writeln!(s, "scaling = {}", kern.scaling());
    let list = |v: &[f64]| v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(", ");
    let _ = writeln!(s, "offsets = [{}]", list(kern.offsets()));
    let _ = writeln!(s, "coefficients = [{}]", list(kern.coeffs()));
    let hw = kern.half_width();
    let _ = writeln!(s, "support = [{}, {}]", -hw, hw);
    let _ = writeln!(s, "# xi  fourier(xi)");
    for i in 0..samples {
        let xi = if samples > 1 { std::f64::consts::PI * i as f64 / (samples - 1) as f64 } else { 0.0 };
        let _ = writeln!(s, "{xi:.6} {:.12e}", kernel_fourier(&kern, xi));
    }
    Ok(s)
}
