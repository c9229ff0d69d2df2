use std::f64::consts::PI;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::angular::{OrdinateKind, OrdinateSet, OrdinateSpec};
use crate::dg::{Coefficient, DgSpace, PhaseFn, TransportProblem};
use crate::error::{Error, Result};
use crate::mesh::{uniform_mesh, Boundary, Mesh};

/// Angular-average of the exact solution, `ψ̄(x, t)`.
pub type DensityFn = Arc<dyn Fn(&[f64], f64) -> f64 + Send + Sync>;

/// Residual bound of [`ManufacturedCase::self_check`].
pub const SELF_CHECK_TOL: f64 = 1e-10;

/// Exact solution with the matching source, cross sections and domain.
#[derive(Clone)]
pub struct ManufacturedCase {
    pub name: &'static str,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub boundary: Boundary,
    pub sigma_s: Coefficient,
    pub sigma_a: Coefficient,
    /// `ψ(x, Ω, t)`.
    pub solution: PhaseFn,
    pub density: DensityFn,
    pub source: PhaseFn,
    pub transient: bool,
    pub kind: OrdinateKind,
    pub default_ordinates: OrdinateSpec,
}

impl std::fmt::Debug for ManufacturedCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ManufacturedCase").field("name", &self.name).field("transient", &self.transient).finish()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScatteringVariant {
    /// `σ_s = 1`
    Constant,
    /// `σ_s = 2 + sin(16πx) sin(16πy)`
    Variable,
}

fn sin_product(x: &[f64]) -> f64 {
    (PI * x[0]).sin() * (PI * x[1]).sin()
}

/// `Ω · ∇[sin(πx) sin(πy)]`
fn sin_product_streaming(x: &[f64], d: &[f64; 3]) -> f64 {
    PI * (d[0] * (PI * x[0]).cos() * (PI * x[1]).sin() + d[1] * (PI * x[0]).sin() * (PI * x[1]).cos())
}

/// Isotropic steady solution `sin(πx) sin(πy)` on `[-1, 1]²`, vacuum
/// boundaries, `σ_a = 0`.
pub fn mms_steady_2d(variant: ScatteringVariant) -> ManufacturedCase {
    let sigma_s = match variant {
        ScatteringVariant::Constant => Coefficient::Constant(1.0),
        ScatteringVariant::Variable => {
            Coefficient::field(|x| 2.0 + (16.0 * PI * x[0]).sin() * (16.0 * PI * x[1]).sin())
        }
    };
    ManufacturedCase {
        name: match variant {
            ScatteringVariant::Constant => "steady-2d-constant",
            ScatteringVariant::Variable => "steady-2d-variable",
        },
        lower: vec![-1.0, -1.0],
        upper: vec![1.0, 1.0],
        boundary: Boundary::Vacuum,
        sigma_s,
        sigma_a: Coefficient::Constant(0.0),
        solution: Arc::new(|x, _, _| sin_product(x)),
        density: Arc::new(|x, _| sin_product(x)),
        source: Arc::new(|x, d, _| sin_product_streaming(x, d)),
        transient: false,
        kind: OrdinateKind::Sphere,
        default_ordinates: OrdinateSpec::ChebyshevLegendre { azimuthal: 8, polar: 4 },
    }
}

/// `e^{-t} sin(πx) sin(πy)` on `[-1, 1]²`, `σ_s = 1`, `σ_a = 0`.
pub fn mms_transient_2d() -> ManufacturedCase {
    ManufacturedCase {
        name: "transient-2d",
        lower: vec![-1.0, -1.0],
        upper: vec![1.0, 1.0],
        boundary: Boundary::Vacuum,
        sigma_s: Coefficient::Constant(1.0),
        sigma_a: Coefficient::Constant(0.0),
        solution: Arc::new(|x, _, t| (-t).exp() * sin_product(x)),
        density: Arc::new(|x, t| (-t).exp() * sin_product(x)),
        source: Arc::new(|x, d, t| (-t).exp() * (sin_product_streaming(x, d) - sin_product(x))),
        transient: true,
        kind: OrdinateKind::Sphere,
        default_ordinates: OrdinateSpec::ChebyshevLegendre { azimuthal: 8, polar: 4 },
    }
}

/// Slab solution `(1 + v/2) sin(πx)` on `[0, 1]`, `σ_t = 2`, `σ_s = 1`.
pub fn mms_slab_1d() -> ManufacturedCase {
    let (sigma_t, sigma_s) = (2.0, 1.0);
    ManufacturedCase {
        name: "steady-1d",
        lower: vec![0.0],
        upper: vec![1.0],
        boundary: Boundary::Vacuum,
        sigma_s: Coefficient::Constant(sigma_s),
        sigma_a: Coefficient::Constant(sigma_t - sigma_s),
        solution: Arc::new(|x, d, _| (1.0 + 0.5 * d[0]) * (PI * x[0]).sin()),
        density: Arc::new(|x, _| (PI * x[0]).sin()),
        source: Arc::new(move |x, d, _| {
            let v = d[0];
            v * (1.0 + 0.5 * v) * PI * (PI * x[0]).cos() + sigma_t * (1.0 + 0.5 * v) * (PI * x[0]).sin()
                - sigma_s * (PI * x[0]).sin()
        }),
        transient: false,
        kind: OrdinateKind::Slab,
        default_ordinates: OrdinateSpec::GaussLegendre(8),
    }
}

impl ManufacturedCase {
    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Uniform mesh with `n` cells per axis.
    pub fn mesh(&self, n: usize) -> Result<Mesh> {
        let counts = vec![n; self.dim()];
        let bc = vec![[self.boundary; 2]; self.dim()];
        uniform_mesh(&self.lower, &self.upper, &counts, &bc)
    }

    /// The discrete problem at time `t`.
    pub fn problem(&self, space: Arc<DgSpace>, ordinates: Arc<OrdinateSet>, t: f64) -> TransportProblem {
        let src = self.source.clone();
        let mut p = TransportProblem::new(space, ordinates)
            .with_sigma_s(self.sigma_s.clone())
            .with_sigma_a(self.sigma_a.clone())
            .with_source(move |x, d, t| src(x, d, t))
            .at_time(t);
        if matches!(self.sigma_s, Coefficient::Field(_)) || matches!(self.sigma_a, Coefficient::Field(_)) {
            // resolve the oscillatory cross section inside each cell
            p.quadrature_points = p.space.degree() + 4;
        }
        p
    }

    /// Plugs the exact solution into `∂_t ψ + Ω·∇ψ + σ_t ψ - σ_s ψ̄ = q` at
    /// 200 random phase-space points with sixth-order difference derivatives;
    /// returns the largest residual, or an error above `1e-10`.
    pub fn self_check(&self, seed: u64) -> Result<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dim = self.dim();
        let step = 1e-3;
        let d6 = |f: &dyn Fn(f64) -> f64, z: f64| {
            let c = [(1.0, 45.0), (2.0, -9.0), (3.0, 1.0)];
            c.iter().map(|(m, w)| w * (f(z + m * step) - f(z - m * step))).sum::<f64>() / (60.0 * step)
        };
        let mut worst = 0.0f64;
        for _ in 0..200 {
            let x: Vec<f64> = (0..dim).map(|a| rng.gen_range(self.lower[a]..self.upper[a])).collect();
            let dir = match self.kind {
                OrdinateKind::Slab => [rng.gen_range(-1.0..1.0), 0.0, 0.0],
                OrdinateKind::Sphere => {
                    let mu: f64 = rng.gen_range(-1.0..1.0);
                    let phi: f64 = rng.gen_range(0.0..2.0 * PI);
                    let s = (1.0 - mu * mu).sqrt();
                    [s * phi.cos(), s * phi.sin(), mu]
                }
            };
            let t = if self.transient { rng.gen_range(0.0..1.0) } else { 0.0 };
            let psi = |y: &[f64], t: f64| (self.solution)(y, &dir, t);
            let mut lhs = 0.0;
            if self.transient {
                lhs += d6(&|s| psi(&x, s), t);
            }
            for a in 0..dim {
                let partial = d6(
                    &|s| {
                        let mut y = x.clone();
                        y[a] = s;
                        psi(&y, t)
                    },
                    x[a],
                );
                lhs += dir[a] * partial;
            }
            let ss = self.sigma_s.eval(&x);
            let st = ss + self.sigma_a.eval(&x);
            lhs += st * psi(&x, t) - ss * (self.density)(&x, t);
            let r = (lhs - (self.source)(&x, &dir, t)).abs();
            worst = worst.max(r);
        }
        if worst > SELF_CHECK_TOL {
            return Err(Error::invalid(format!("{}: manufactured residual {worst:.3e}", self.name)));
        }
        Ok(worst)
    }
}

/// Multiscale scattering problem with a Gaussian source on `[-1, 1]²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GaussianSourceCase {
    /// Replaces the radial profile by this constant when set.
    pub uniform_scattering: Option<f64>,
}

/// `G = (10/π) exp(-100 r²)`, `σ_s = 99 r⁴ (2 - r⁴)² + 1` for `r <= 1` and
/// `100` outside, `σ_a = 0`, vacuum boundaries.
pub fn gaussian_source_case() -> GaussianSourceCase {
    GaussianSourceCase { uniform_scattering: None }
}

impl GaussianSourceCase {
    pub fn source(x: &[f64]) -> f64 {
        10.0 / PI * (-100.0 * (x[0] * x[0] + x[1] * x[1])).exp()
    }

    pub fn radial_scattering(x: &[f64]) -> f64 {
        let r2 = x[0] * x[0] + x[1] * x[1];
        if r2 <= 1.0 {
            let r4 = r2 * r2;
            99.0 * r4 * (2.0 - r4).powi(2) + 1.0
        } else {
            100.0
        }
    }

    pub fn sigma_s(&self) -> Coefficient {
        match self.uniform_scattering {
            Some(c) => Coefficient::Constant(c),
            None => Coefficient::field(Self::radial_scattering),
        }
    }

    pub fn mesh(&self, n: usize) -> Result<Mesh> {
        uniform_mesh(&[-1.0, -1.0], &[1.0, 1.0], &[n, n], &[[Boundary::Vacuum; 2]; 2])
    }

    pub fn problem(&self, space: Arc<DgSpace>, ordinates: Arc<OrdinateSet>) -> TransportProblem {
        TransportProblem::new(space, ordinates)
            .with_sigma_s(self.sigma_s())
            .with_source(|x, _, _| Self::source(x))
    }
}
