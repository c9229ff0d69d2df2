//! Discrete-ordinates sets and the discrete angular average.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrdinateKind {
    /// Direction cosines on `[-1, 1]`, measure 2.
    Slab,
    /// Unit vectors on the sphere, measure `4π`.
    Sphere,
}

/// Directions `Ω_j` with positive weights summing to the angular measure.
#[derive(Clone, Debug)]
pub struct OrdinateSet {
    kind: OrdinateKind,
    directions: Vec<[f64; 3]>,
    weights: Vec<f64>,
    measure: f64,
    spec: OrdinateSpec,
}

/// Named ordinate sets: `gl:N` for the slab, `cl:P,Q` for the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrdinateSpec {
    GaussLegendre(usize),
    ChebyshevLegendre { azimuthal: usize, polar: usize },
}

impl FromStr for OrdinateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("unrecognized ordinate set {s:?}; expected gl:N or cl:P,Q"));
        let (head, tail) = s.trim().split_once(':').ok_or_else(bad)?;
        match head.trim().to_ascii_lowercase().as_str() {
            "gl" => Ok(OrdinateSpec::GaussLegendre(tail.trim().parse().map_err(|_| bad())?)),
            "cl" => {
                let (p, q) = tail.split_once(',').ok_or_else(bad)?;
                Ok(OrdinateSpec::ChebyshevLegendre {
                    azimuthal: p.trim().parse().map_err(|_| bad())?,
                    polar: q.trim().parse().map_err(|_| bad())?,
                })
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for OrdinateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OrdinateSpec::GaussLegendre(n) => write!(f, "gl:{n}"),
            OrdinateSpec::ChebyshevLegendre { azimuthal, polar } => write!(f, "cl:{azimuthal},{polar}"),
        }
    }
}

impl OrdinateSpec {
    pub fn build(self) -> Result<OrdinateSet> {
        match self {
            OrdinateSpec::GaussLegendre(n) => ordinates_slab(n),
            OrdinateSpec::ChebyshevLegendre { azimuthal, polar } => {
                ordinates_sphere_cl(azimuthal, polar)
            }
        }
    }
}

/// Gauss–Legendre cosines on `[-1, 1]`.
pub fn ordinates_slab(n: usize) -> Result<OrdinateSet> {
    if n < 2 {
        return Err(Error::invalid(format!("slab ordinate count must be >= 2, got {n}")));
    }
    let q = gauss_legendre(n);
    Ok(OrdinateSet {
        kind: OrdinateKind::Slab,
        directions: q.nodes.iter().map(|&v| [v, 0.0, 0.0]).collect(),
        weights: q.weights,
        measure: 2.0,
        spec: OrdinateSpec::GaussLegendre(n),
    })
}

/// Chebyshev (equispaced azimuth) times Gauss–Legendre (polar cosine) product rule.
///
/// Azimuths sit at `φ_i = (2i+1)π / n_azimuth`, so the set is symmetric under
/// `Ω_x -> -Ω_x` and `Ω_y -> -Ω_y`.
pub fn ordinates_sphere_cl(n_azimuth: usize, n_polar: usize) -> Result<OrdinateSet> {
    if n_azimuth < 4 || n_polar < 2 {
        return Err(Error::invalid(format!(
            "CL set needs n_azimuth >= 4 and n_polar >= 2, got ({n_azimuth}, {n_polar})"
        )));
    }
    let q = gauss_legendre(n_polar);
    let dphi = 2.0 * PI / n_azimuth as f64;
    let mut directions = Vec::with_capacity(n_azimuth * n_polar);
    let mut weights = Vec::with_capacity(n_azimuth * n_polar);
    for (mu, w) in q.iter() {
        let s = (1.0 - mu * mu).sqrt();
        for i in 0..n_azimuth {
            let phi = (i as f64 + 0.5) * dphi;
            directions.push([s * phi.cos(), s * phi.sin(), mu]);
            weights.push(w * dphi);
        }
    }
    Ok(OrdinateSet {
        kind: OrdinateKind::Sphere,
        directions,
        weights,
        measure: 4.0 * PI,
        spec: OrdinateSpec::ChebyshevLegendre { azimuthal: n_azimuth, polar: n_polar },
    })
}

impl OrdinateSet {
    pub fn kind(&self) -> OrdinateKind {
        self.kind
    }

    pub fn spec(&self) -> OrdinateSpec {
        self.spec
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.measure
    }

    pub fn direction(&self, j: usize) -> [f64; 3] {
        self.directions[j]
    }

    pub fn directions(&self) -> &[[f64; 3]] {
        &self.directions
    }

    pub fn weight(&self, j: usize) -> f64 {
        self.weights[j]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `ω_j / m(S)`: the coefficient of ordinate `j` in the discrete average.
    pub fn average_weight(&self, j: usize) -> f64 {
        self.weights[j] / self.measure
    }

    /// `(1/m(S)) Σ_j ω_j f(Ω_j)`.
    pub fn average_of(&self, f: impl Fn(&[f64; 3]) -> f64) -> f64 {
        self.directions
            .iter()
            .zip(&self.weights)
            .map(|(d, w)| w * f(d))
            .sum::<f64>()
            / self.measure
    }
}

/// Discrete angular average of one value per ordinate.
pub fn angular_average(set: &OrdinateSet, values: &[f64]) -> Result<f64> {
    if values.len() != set.len() {
        return Err(Error::invalid(format!(
            "angular_average: {} values for {} ordinates",
            values.len(),
            set.len()
        )));
    }
    Ok(values.iter().zip(&set.weights).map(|(v, w)| v * w).sum::<f64>() / set.measure)
}
