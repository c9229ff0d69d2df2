use std::fmt::Write as _;
use std::sync::Arc;
use std::time::Instant;

use crate::angular::{OrdinateSet, OrdinateSpec};
use crate::dg::{project_l2, project_scalar, DgField, DgSpace};
use crate::error::{Error, Result};
use crate::siac::SiacFilter;
use crate::solvers::{solve_steady, solve_transient, BdfOrder, DtRule, IterationOptions, StartupData};

use super::cases::ManufacturedCase;
use super::errors::{error_l2, error_l2_filtered, error_superconvergent_points, PointSet, Region};

pub const METRIC_L2: &str = "l2";
pub const METRIC_L2_INTERIOR: &str = "l2_interior";
pub const METRIC_L2_FILTERED: &str = "l2_filtered";
pub const METRIC_DOWNWIND_EDGE: &str = "downwind_edge";
pub const METRIC_INTERIOR_RADAU: &str = "interior_radau";

/// How each mesh's discrete solution is produced.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TimeScheme {
    /// `L2` projection of the exact solution at `t = 0`; no solver.
    Projection,
    Steady,
    Bdf { order: BdfOrder, rule: DtRule, t_end: f64 },
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub case: ManufacturedCase,
    pub degree: usize,
    /// Cells per axis; successive entries should double.
    pub meshes: Vec<usize>,
    pub filter: bool,
    pub scheme: TimeScheme,
    /// Defaults to the case's ordinate set.
    pub ordinates: Option<OrdinateSpec>,
    pub options: IterationOptions,
    pub margin: Margin,
}

/// Width of the boundary layer excluded by the interior metrics. The
/// excluded layer is the same physical region on every mesh of a study.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Margin {
    /// Kernel half-width `⌈(3k+1)/2⌉` in cells of the coarsest mesh.
    KernelHalfWidth,
    /// Cells of the coarsest mesh.
    Cells(usize),
    /// Physical width.
    Physical(f64),
}

impl StudyConfig {
    pub fn new(case: ManufacturedCase, degree: usize, meshes: Vec<usize>, scheme: TimeScheme) -> Self {
        StudyConfig {
            case,
            degree,
            meshes,
            filter: false,
            scheme,
            ordinates: None,
            options: IterationOptions::for_degree(degree),
            margin: Margin::KernelHalfWidth,
        }
    }

    /// Physical interior margin.
    pub fn margin_width(&self) -> f64 {
        let width = (0..self.case.dim()).map(|a| self.case.upper[a] - self.case.lower[a]).fold(0.0, f64::max);
        let coarsest = self.meshes.iter().copied().min().unwrap_or(1).max(1) as f64;
        match self.margin {
            Margin::KernelHalfWidth => (3 * self.degree + 1).div_ceil(2) as f64 * width / coarsest,
            Margin::Cells(c) => c as f64 * width / coarsest,
            Margin::Physical(m) => m,
        }
    }

    fn metrics(&self) -> Vec<&'static str> {
        let mut m = vec![METRIC_L2];
        if self.filter {
            m.extend([METRIC_L2_INTERIOR, METRIC_L2_FILTERED]);
        }
        if self.case.dim() == 1 && self.scheme == TimeScheme::Steady {
            m.extend([METRIC_DOWNWIND_EDGE, METRIC_INTERIOR_RADAU]);
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub h: f64,
    pub cells: usize,
    /// `(metric, error)` in table metric order; missing when the row failed.
    pub errors: Vec<(String, f64)>,
    pub solve_seconds: f64,
    pub filter_seconds: f64,
    pub iterations: usize,
    pub failure: Option<String>,
    /// The failure was a source iteration that ran out of iterations.
    pub not_converged: bool,
}

impl StudyRow {
    pub fn error(&self, metric: &str) -> Option<f64> {
        self.errors.iter().find(|(m, _)| m == metric).map(|(_, e)| *e)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConvergenceTable {
    pub name: String,
    pub metrics: Vec<String>,
    pub rows: Vec<StudyRow>,
}

impl ConvergenceTable {
    /// `log2(e_i / e_{i+1})` for each row; `None` for the first row, failed
    /// rows, and steps that are not a halving of `h`.
    pub fn orders(&self, metric: &str) -> Vec<Option<f64>> {
        let mut out = vec![None; self.rows.len()];
        for i in 1..self.rows.len() {
            let (a, b) = (&self.rows[i - 1], &self.rows[i]);
            if (a.h / b.h - 2.0).abs() > 1e-9 {
                continue;
            }
            if let (Some(ea), Some(eb)) = (a.error(metric), b.error(metric)) {
                if ea > 0.0 && eb > 0.0 {
                    out[i] = Some((ea / eb).log2());
                }
            }
        }
        out
    }

    /// Order on the finest successive pair.
    pub fn final_order(&self, metric: &str) -> Option<f64> {
        self.orders(metric).last().copied().flatten()
    }

    pub fn row(&self, cells: usize) -> Option<&StudyRow> {
        self.rows.iter().find(|r| r.cells == cells)
    }

    /// CSV with columns `h,cells,metric,error,order,solve_seconds,filter_seconds`,
    /// one line per row and metric. Failed rows carry `NaN` errors.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("h,cells,metric,error,order,solve_seconds,filter_seconds\n");
        for m in &self.metrics {
            let orders = self.orders(m);
            for (row, ord) in self.rows.iter().zip(orders) {
                let err = row.error(m).unwrap_or(f64::NAN);
                let ord = ord.map(|o| format!("{o:.4}")).unwrap_or_default();
                let _ = writeln!(
                    s,
                    "{:.6e},{},{},{:.6e},{},{:.6},{:.6}",
                    row.h, row.cells, m, err, ord, row.solve_seconds, row.filter_seconds
                );
            }
        }
        s
    }
}

struct Measured {
    errors: Vec<(String, f64)>,
    solve_seconds: f64,
    filter_seconds: f64,
    iterations: usize,
}

/// Runs the study mesh by mesh. A failing mesh is recorded in its row and
/// the study moves on. Fails only on an invalid configuration or when the
/// manufactured case does not satisfy its own equation.
pub fn run_convergence_study(config: &StudyConfig) -> Result<ConvergenceTable> {
    if config.meshes.is_empty() {
        return Err(Error::invalid("study needs at least one mesh"));
    }
    if config.degree == 0 && config.filter {
        return Err(Error::invalid("filtering needs degree >= 1"));
    }
    if config.case.transient != matches!(config.scheme, TimeScheme::Bdf { .. })
        && config.scheme != TimeScheme::Projection
    {
        return Err(Error::invalid(format!("time scheme {:?} does not fit case {}", config.scheme, config.case.name)));
    }
    config.case.self_check(0x5eed)?;
    let spec = config.ordinates.unwrap_or(config.case.default_ordinates);
    let ordinates = Arc::new(spec.build()?);
    if ordinates.kind() != config.case.kind {
        return Err(Error::invalid("ordinate set does not match the case dimension"));
    }
    let metrics = config.metrics();
    let mut rows = Vec::with_capacity(config.meshes.len());
    for &n in &config.meshes {
        let mesh = config.case.mesh(n)?;
        let h = mesh.h();
        let row = match measure(config, &metrics, n, &ordinates) {
            Ok(m) => StudyRow {
                h,
                cells: n,
                errors: m.errors,
                solve_seconds: m.solve_seconds,
                filter_seconds: m.filter_seconds,
                iterations: m.iterations,
                failure: None,
                not_converged: false,
            },
            Err(e) => StudyRow {
                h,
                cells: n,
                errors: Vec::new(),
                solve_seconds: 0.0,
                filter_seconds: 0.0,
                iterations: 0,
                not_converged: matches!(e, Error::NotConverged { .. }),
                failure: Some(e.to_string()),
            },
        };
        rows.push(row);
    }
    Ok(ConvergenceTable {
        name: config.case.name.to_string(),
        metrics: metrics.iter().map(|m| m.to_string()).collect(),
        rows,
    })
}

fn measure(config: &StudyConfig, metrics: &[&str], n: usize, ordinates: &Arc<OrdinateSet>) -> Result<Measured> {
    let case = &config.case;
    let space = DgSpace::new(case.mesh(n)?, config.degree);
    let start = Instant::now();
    let (psi, density, t, iterations): (Option<DgField>, DgField, f64, usize) = match config.scheme {
        TimeScheme::Projection => {
            let f = case.density.clone();
            let rho = project_scalar(&space, config.degree + 3, move |x| f(x, 0.0));
            (None, rho, 0.0, 0)
        }
        TimeScheme::Steady => {
            let p = case.problem(space.clone(), ordinates.clone(), 0.0);
            let (psi, rep) = solve_steady(&p, &config.options)?;
            let rho = psi.density(ordinates)?;
            (Some(psi), rho, 0.0, rep.iterations)
        }
        TimeScheme::Bdf { order, rule, t_end } => {
            let problem_at = |t: f64| case.problem(space.clone(), ordinates.clone(), t);
            let sol = solve_transient(&problem_at, &StartupData::Exact(case.solution.clone()), t_end, rule, order, &config.options)?;
            let rho = sol.field.density(ordinates)?;
            let its = sol.reports.iter().map(|r| r.iterations).sum();
            (Some(sol.field), rho, t_end, its)
        }
    };
    let solve_seconds = start.elapsed().as_secs_f64();

    let exact_density = |x: &[f64]| (case.density)(x, t);
    let interior = Region::Interior { margin: config.margin_width() };
    let mut errors = Vec::with_capacity(metrics.len());
    let mut filter_seconds = 0.0;
    for &m in metrics {
        let e = match m {
            METRIC_L2 => error_l2(&density, 0, exact_density, Region::Full),
            METRIC_L2_INTERIOR => error_l2(&density, 0, exact_density, interior),
            METRIC_L2_FILTERED => {
                let fstart = Instant::now();
                let filter = SiacFilter::new(space.basis(), space.mesh())?;
                let e = error_l2_filtered(&density, 0, &filter, exact_density, interior)?;
                filter_seconds = fstart.elapsed().as_secs_f64();
                e
            }
            METRIC_DOWNWIND_EDGE | METRIC_INTERIOR_RADAU => {
                let psi = match &psi {
                    Some(p) => p.clone(),
                    None => project_l2(|x, d| (case.solution)(x, d, 0.0), &space, ordinates),
                };
                let set = if m == METRIC_DOWNWIND_EDGE { PointSet::DownwindEdge } else { PointSet::InteriorRadau };
                error_superconvergent_points(&psi, ordinates, |x, d| (case.solution)(x, d, t), set)?
            }
            other => return Err(Error::invalid(format!("unknown metric {other}"))),
        };
        errors.push((m.to_string(), e));
    }
    Ok(Measured { errors, solve_seconds, filter_seconds, iterations })
}
