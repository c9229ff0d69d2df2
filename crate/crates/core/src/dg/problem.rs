use std::fmt;
use std::sync::Arc;

use crate::angular::OrdinateSet;
use crate::error::{Error, Result};

use super::field::{element_quadrature, DgSpace};

/// Spatially varying cross section.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    Field(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl Coefficient {
    pub fn field(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Field(Arc::new(f))
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Coefficient::Constant(c) => *c,
            Coefficient::Field(f) => f(x),
        }
    }

    pub fn as_constant(&self) -> Option<f64> {
        match self {
            Coefficient::Constant(c) => Some(*c),
            Coefficient::Field(_) => None,
        }
    }

    pub(crate) fn plus(&self, shift: f64) -> Coefficient {
        match self {
            Coefficient::Constant(c) => Coefficient::Constant(c + shift),
            Coefficient::Field(f) => {
                let f = f.clone();
                Coefficient::Field(Arc::new(move |x| f(x) + shift))
            }
        }
    }
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Field(_) => write!(f, "Field(..)"),
        }
    }
}

/// `q(x, Ω, t)`; also used for inflow traces.
pub type PhaseFn = Arc<dyn Fn(&[f64], &[f64; 3], f64) -> f64 + Send + Sync>;

/// One steady (or frozen-in-time) discrete-ordinates transport problem.
#[derive(Clone)]
pub struct TransportProblem {
    pub space: Arc<DgSpace>,
    pub ordinates: Arc<OrdinateSet>,
    pub sigma_s: Coefficient,
    pub sigma_a: Coefficient,
    /// Isotropic or per-ordinate volume source, evaluated at `time`.
    pub source: Option<PhaseFn>,
    /// Incoming trace on `Boundary::Inflow` faces, evaluated at `time`.
    pub inflow: Option<PhaseFn>,
    pub time: f64,
    /// Gauss points per axis for variable coefficients and sources.
    pub quadrature_points: usize,
}

impl fmt::Debug for TransportProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TransportProblem")
            .field("elements", &self.space.num_elements())
            .field("degree", &self.space.degree())
            .field("ordinates", &self.ordinates.len())
            .field("sigma_s", &self.sigma_s)
            .field("sigma_a", &self.sigma_a)
            .field("time", &self.time)
            .finish()
    }
}

impl TransportProblem {
    pub fn new(space: Arc<DgSpace>, ordinates: Arc<OrdinateSet>) -> Self {
        let quadrature_points = space.degree() + 2;
        TransportProblem {
            space,
            ordinates,
            sigma_s: Coefficient::Constant(0.0),
            sigma_a: Coefficient::Constant(0.0),
            source: None,
            inflow: None,
            time: 0.0,
            quadrature_points,
        }
    }

    pub fn with_sigma_s(mut self, c: Coefficient) -> Self {
        self.sigma_s = c;
        self
    }

    pub fn with_sigma_a(mut self, c: Coefficient) -> Self {
        self.sigma_a = c;
        self
    }

    pub fn with_source(mut self, f: impl Fn(&[f64], &[f64; 3], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.source = Some(Arc::new(f));
        self
    }

    pub fn with_inflow(mut self, f: impl Fn(&[f64], &[f64; 3], f64) -> f64 + Send + Sync + 'static) -> Self {
        self.inflow = Some(Arc::new(f));
        self
    }

    pub fn at_time(&self, t: f64) -> Self {
        let mut p = self.clone();
        p.time = t;
        p
    }

    pub fn sigma_t(&self, x: &[f64]) -> f64 {
        self.sigma_s.eval(x) + self.sigma_a.eval(x)
    }

    /// Streaming velocity of ordinate `j` in the mesh dimensions; components
    /// below the tangential tolerance are zeroed.
    pub fn velocity(&self, j: usize) -> [f64; 2] {
        let d = self.ordinates.direction(j);
        let cut = |v: f64| if v.abs() < super::operator::TANGENTIAL_TOL { 0.0 } else { v };
        if self.space.dim() == 1 {
            [cut(d[0]), 0.0]
        } else {
            [cut(d[0]), cut(d[1])]
        }
    }

    pub fn has_scattering(&self) -> bool {
        match &self.sigma_s {
            Coefficient::Constant(c) => *c != 0.0,
            Coefficient::Field(_) => self.coefficient_samples(|x| self.sigma_s.eval(x)).any(|v| v != 0.0),
        }
    }

    fn coefficient_samples<'a>(&'a self, f: impl Fn(&[f64]) -> f64 + 'a) -> impl Iterator<Item = f64> + 'a {
        let mesh = self.space.mesh();
        let dim = mesh.dim();
        (0..mesh.num_elements()).flat_map(move |e| {
            element_quadrature(mesh, e, self.quadrature_points)
                .into_iter()
                .map(|(_, x, _)| x)
                .collect::<Vec<_>>()
        })
        .map(move |x| f(&x[..dim]))
    }

    /// Checks `σ_s, σ_a >= 0` at every quadrature point.
    pub fn validate(&self) -> Result<()> {
        for (name, c) in [("sigma_s", &self.sigma_s), ("sigma_a", &self.sigma_a)] {
            match c {
                Coefficient::Constant(v) if *v < 0.0 || !v.is_finite() => {
                    return Err(Error::invalid(format!("{name} = {v} must be finite and >= 0")))
                }
                Coefficient::Constant(_) => {}
                Coefficient::Field(_) => {
                    if let Some(v) = self.coefficient_samples(|x| c.eval(x)).find(|v| *v < 0.0 || !v.is_finite()) {
                        return Err(Error::invalid(format!("{name} takes the value {v} at a quadrature point")));
                    }
                }
            }
        }
        if self.quadrature_points == 0 {
            return Err(Error::invalid("quadrature_points must be >= 1"));
        }
        Ok(())
    }
}
