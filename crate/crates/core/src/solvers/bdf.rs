use std::fmt;
use std::str::FromStr;

use crate::dg::{project_l2, source_loads, DgField, PhaseFn, SweepContext, TransportProblem};
use crate::error::{Error, Result};

use super::{iterate, IterationOptions, SolveReport};

/// Backward differentiation formula of order 1, 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BdfOrder {
    One,
    Two,
    Three,
}

impl BdfOrder {
    pub fn steps(self) -> usize {
        match self {
            BdfOrder::One => 1,
            BdfOrder::Two => 2,
            BdfOrder::Three => 3,
        }
    }

    /// Coefficient of the new level, per `Δt`.
    pub fn gamma0(self) -> f64 {
        match self {
            BdfOrder::One => 1.0,
            BdfOrder::Two => 1.5,
            BdfOrder::Three => 11.0 / 6.0,
        }
    }

    /// Weights of the previous levels, newest first, per `Δt`.
    pub fn history_weights(self) -> &'static [f64] {
        match self {
            BdfOrder::One => &[1.0],
            BdfOrder::Two => &[2.0, -0.5],
            BdfOrder::Three => &[3.0, -1.5, 1.0 / 3.0],
        }
    }
}

impl TryFrom<usize> for BdfOrder {
    type Error = Error;

    fn try_from(s: usize) -> Result<Self> {
        match s {
            1 => Ok(BdfOrder::One),
            2 => Ok(BdfOrder::Two),
            3 => Ok(BdfOrder::Three),
            _ => Err(Error::invalid(format!("BDF order must be 1, 2 or 3, got {s}"))),
        }
    }
}

/// Time-step size as a function of the mesh size `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtRule {
    /// `Δt = c h`
    Linear(f64),
    /// `Δt = c h^{5/3}`
    FiveThirds(f64),
}

impl DtRule {
    pub fn dt(self, h: f64) -> f64 {
        match self {
            DtRule::Linear(c) => c * h,
            DtRule::FiveThirds(c) => c * h.powf(5.0 / 3.0),
        }
    }
}

impl FromStr for DtRule {
    type Err = Error;

    /// Accepts `h`, `0.5*h`, `4h^5/3`, `4*h^(5/3)`.
    fn from_str(s: &str) -> Result<Self> {
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::invalid(format!("unrecognized time-step rule {s:?}; expected c*h or c*h^5/3"));
        let (coef, five_thirds) = if let Some(p) = t.strip_suffix("h^5/3").or_else(|| t.strip_suffix("h^(5/3)")) {
            (p, true)
        } else if let Some(p) = t.strip_suffix('h') {
            (p, false)
        } else {
            return Err(bad());
        };
        let coef = coef.strip_suffix('*').unwrap_or(coef);
        let c = if coef.is_empty() { 1.0 } else { coef.parse::<f64>().map_err(|_| bad())? };
        if !(c > 0.0) {
            return Err(bad());
        }
        Ok(if five_thirds { DtRule::FiveThirds(c) } else { DtRule::Linear(c) })
    }
}

impl fmt::Display for DtRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DtRule::Linear(c) => write!(f, "{c}*h"),
            DtRule::FiveThirds(c) => write!(f, "{c}*h^5/3"),
        }
    }
}

/// Previous solution levels of a BDF integration.
#[derive(Clone, Debug)]
pub struct BdfState {
    history: Vec<DgField>,
    time: f64,
    dt: f64,
    order: BdfOrder,
}

impl BdfState {
    /// `history` is newest first; its newest level sits at `time`.
    pub fn new(history: Vec<DgField>, time: f64, dt: f64, order: BdfOrder) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(Error::invalid(format!("time step must be positive, got {dt}")));
        }
        if history.len() != order.steps() {
            return Err(Error::invalid(format!(
                "BDF{} needs {} history levels, got {}",
                order.steps(),
                order.steps(),
                history.len()
            )));
        }
        Ok(BdfState { history, time, dt, order })
    }

    pub fn current(&self) -> &DgField {
        &self.history[0]
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn order(&self) -> BdfOrder {
        self.order
    }
}

/// One implicit BDF step. `problem` must be evaluated at `state.time() + dt`.
pub fn bdf_advance(
    state: &BdfState,
    problem: &TransportProblem,
    options: &IterationOptions,
) -> Result<(BdfState, SolveReport)> {
    let t_new = state.time + state.dt;
    if (problem.time - t_new).abs() > 1e-12 * t_new.abs().max(1.0) {
        return Err(Error::invalid(format!(
            "problem is evaluated at t = {}, step targets t = {t_new}",
            problem.time
        )));
    }
    let dt = state.dt;
    let order = state.order;
    let shifted = problem.clone().with_sigma_a(problem.sigma_a.plus(order.gamma0() / dt));
    let ctx = SweepContext::new(&shifted)?;
    let mut loads = source_loads(problem);
    let mass = ctx.mass().to_vec();
    let n = mass.len();
    for (w, level) in order.history_weights().iter().zip(&state.history) {
        if level.components() != problem.ordinates.len() {
            return Err(Error::invalid("history level does not match the ordinate count"));
        }
        for (i, (l, c)) in loads.iter_mut().zip(level.coeffs()).enumerate() {
            *l += w / dt * mass[i % n] * c;
        }
    }
    let guess = state.history[0].density(&problem.ordinates)?;
    let (psi, report) = iterate(&ctx, &loads, Some(&guess), options)?;
    let mut history = Vec::with_capacity(order.steps());
    history.push(psi);
    history.extend(state.history.iter().take(order.steps() - 1).cloned());
    Ok((BdfState { history, time: t_new, dt, order }, report))
}

/// How the first BDF levels are produced.
#[derive(Clone)]
pub enum StartupData {
    /// Exact solution `ψ(x, Ω, t)`; startup levels are its projections.
    Exact(PhaseFn),
    /// Initial data `ψ(x, Ω, 0)` (time argument ignored); later startup levels
    /// come from BDF1 with `Δt/16` substeps.
    Initial(PhaseFn),
}

#[derive(Clone, Debug)]
pub struct TransientSolution {
    pub field: DgField,
    pub reports: Vec<SolveReport>,
    pub dt: f64,
    pub steps: usize,
}

const BOOTSTRAP_SUBSTEPS: usize = 16;

/// Marches from `t = 0` to `t_end`. `Δt` comes from `rule` applied to the
/// mesh size and is shortened so a whole number of steps lands on
/// `t_end`.
pub fn solve_transient(
    problem_at: &dyn Fn(f64) -> TransportProblem,
    startup: &StartupData,
    t_end: f64,
    rule: DtRule,
    order: BdfOrder,
    options: &IterationOptions,
) -> Result<TransientSolution> {
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::invalid(format!("end time must be finite and >= 0, got {t_end}")));
    }
    let p0 = problem_at(0.0);
    let space = p0.space.clone();
    let ords = p0.ordinates.clone();
    let project_at = |f: &PhaseFn, t: f64| project_l2(|x, d| f(&x[..space.dim()], d, t), &space, &ords);
    let initial = match startup {
        StartupData::Exact(f) | StartupData::Initial(f) => project_at(f, 0.0),
    };
    if t_end == 0.0 {
        return Ok(TransientSolution { field: initial, reports: Vec::new(), dt: 0.0, steps: 0 });
    }
    let dt0 = rule.dt(space.mesh().h());
    if !(dt0 > 0.0) {
        return Err(Error::invalid(format!("time-step rule gives dt = {dt0}")));
    }
    let steps = ((t_end / dt0) - 1e-9).ceil().max(1.0) as usize;
    let dt = t_end / steps as f64;
    let s = order.steps();
    let mut reports = Vec::new();

    // levels[i] is the solution at t = i dt, for i < s
    let mut levels = vec![initial];
    for i in 1..s.min(steps + 1) {
        let next = match startup {
            StartupData::Exact(f) => project_at(f, i as f64 * dt),
            StartupData::Initial(_) => {
                let sub = dt / BOOTSTRAP_SUBSTEPS as f64;
                let t0 = (i - 1) as f64 * dt;
                let mut st = BdfState::new(vec![levels[i - 1].clone()], t0, sub, BdfOrder::One)?;
                for m in 1..=BOOTSTRAP_SUBSTEPS {
                    let (next, rep) = bdf_advance(&st, &problem_at(t0 + m as f64 * sub), options)?;
                    reports.push(rep);
                    st = next;
                    // keep the step time exact
                    st.time = t0 + m as f64 * sub;
                }
                st.history.swap_remove(0)
            }
        };
        levels.push(next);
    }
    if steps < s {
        let field = levels.swap_remove(steps);
        return Ok(TransientSolution { field, reports, dt, steps });
    }
    levels.reverse();
    let mut state = BdfState::new(levels, (s - 1) as f64 * dt, dt, order)?;
    for step in s..=steps {
        let (next, rep) = bdf_advance(&state, &problem_at(step as f64 * dt), options)?;
        reports.push(rep);
        state = next;
        state.time = step as f64 * dt;
    }
    Ok(TransientSolution { field: state.history.swap_remove(0), reports, dt, steps })
}
