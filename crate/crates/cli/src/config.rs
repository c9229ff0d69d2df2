use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context, Result};
use dgsiac_core::solvers::default_tolerance;
use dgsiac_core::{BdfOrder, DtRule, OrdinateKind, OrdinateSpec};
use serde::{Deserialize, Serialize};

/// Marks errors that stem from the configuration rather than the numerics.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProblemKind {
    #[serde(rename = "steady-1d")]
    Steady1d,
    #[serde(rename = "steady-2d")]
    Steady2d,
    #[serde(rename = "transient-2d")]
    Transient2d,
    #[serde(rename = "gaussian-2d")]
    Gaussian2d,
}

impl ProblemKind {
    pub fn is_transient(self) -> bool {
        self == ProblemKind::Transient2d
    }

    pub fn dim(self) -> usize {
        if self == ProblemKind::Steady1d {
            1
        } else {
            2
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    Constant,
    Variable,
}

/// Run configuration. After [`RunConfig::resolve`] every applicable option
/// is filled in, so serializing it echoes the full configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    /// Cells per axis, one entry per mesh.
    pub cells: Vec<usize>,
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// `gl:N` or `cl:P,Q`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinates: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dsa: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bdf_order: Option<usize>,
    /// `c*h` or `c*h^5/3`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_rule: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default)]
    pub filter: bool,
    /// Interior margin of the filtered metrics, in cells of the coarsest mesh.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub margin_cells: Option<usize>,
    /// Constant scattering for the Gaussian-source problem.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform_scattering: Option<f64>,
    /// Multiplies the problem's source term.
    #[serde(default = "default_scale")]
    pub source_scale: f64,
    /// Write measured wall times; zeros otherwise, so repeated runs give
    /// identical tables.
    #[serde(default = "default_true")]
    pub record_timings: bool,
    #[serde(default = "default_output")]
    pub output: PathBuf,
}

fn default_degree() -> usize {
    1
}

fn default_scale() -> f64 {
    1.0
}

fn default_true() -> bool {
    true
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

/// Reads `path` (if given), applies `key=value` overrides and resolves the
/// result.
pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<RunConfig> {
    let mut table: toml::Table = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .with_context(|| format!("reading config {}", p.display()))
                .map_err(|e| config_err(format!("{e:#}")))?;
            text.parse().map_err(|e| config_err(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    for o in overrides {
        let (key, value) =
            o.split_once('=').ok_or_else(|| config_err(format!("override {o:?} is not of the form key=value")))?;
        let key = key.trim();
        let value = value.trim();
        // bare words such as `steady-2d` or `cl:8,4` are taken as strings
        let parsed: toml::Value = format!("v = {value}")
            .parse::<toml::Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(value.to_string()));
        table.insert(key.to_string(), parsed);
    }
    let raw: RunConfig = table.try_into().map_err(|e: toml::de::Error| config_err(e.message().to_string()))?;
    raw.resolve()
}

impl RunConfig {
    /// Validates and fills defaults. Messages name the offending field.
    pub fn resolve(mut self) -> Result<RunConfig> {
        if self.cells.is_empty() || self.cells.contains(&0) {
            return Err(config_err("cells: need at least one mesh with a positive cell count"));
        }
        if !(1..=3).contains(&self.degree) {
            return Err(config_err(format!("degree: must be 1, 2 or 3, got {}", self.degree)));
        }
        match self.problem {
            ProblemKind::Steady2d => {
                self.variant.get_or_insert(Variant::Constant);
            }
            _ if self.variant.is_some() => {
                return Err(config_err("variant: only applies to problem = \"steady-2d\""));
            }
            _ => {}
        }
        if self.problem != ProblemKind::Gaussian2d && self.uniform_scattering.is_some() {
            return Err(config_err("uniform_scattering: only applies to problem = \"gaussian-2d\""));
        }
        if let Some(s) = self.uniform_scattering {
            if !(s >= 0.0) {
                return Err(config_err("uniform_scattering: must be non-negative"));
            }
        }
        if self.problem.is_transient() {
            let order = *self.bdf_order.get_or_insert(3);
            BdfOrder::try_from(order).map_err(|e| config_err(format!("bdf_order: {e}")))?;
            let rule = self.dt_rule.get_or_insert_with(|| "1*h".into()).clone();
            let rule: DtRule = rule.parse().map_err(|e| config_err(format!("dt_rule: {e}")))?;
            self.dt_rule = Some(rule.to_string());
            let t_end = *self.t_end.get_or_insert(0.5);
            if !(t_end >= 0.0) || !t_end.is_finite() {
                return Err(config_err("t_end: must be finite and non-negative"));
            }
        } else {
            for (name, set) in [
                ("bdf_order", self.bdf_order.is_some()),
                ("dt_rule", self.dt_rule.is_some()),
                ("t_end", self.t_end.is_some()),
            ] {
                if set {
                    return Err(config_err(format!("{name}: time stepping does not apply to a steady problem")));
                }
            }
        }
        let default_ords = match self.problem {
            ProblemKind::Steady1d => "gl:8",
            ProblemKind::Gaussian2d => "cl:20,10",
            _ => "cl:8,4",
        };
        let spec: OrdinateSpec = self
            .ordinates
            .as_deref()
            .unwrap_or(default_ords)
            .parse()
            .map_err(|e| config_err(format!("ordinates: {e}")))?;
        let want = if self.problem.dim() == 1 { OrdinateKind::Slab } else { OrdinateKind::Sphere };
        let set = spec.build().map_err(|e| config_err(format!("ordinates: {e}")))?;
        if set.kind() != want {
            return Err(config_err(format!("ordinates: {spec} does not fit a {}D problem", self.problem.dim())));
        }
        self.ordinates = Some(spec.to_string());
        let tol = *self.tol.get_or_insert(default_tolerance(self.degree));
        if !(tol > 0.0) {
            return Err(config_err("tol: must be positive"));
        }
        if *self.max_iterations.get_or_insert(10_000) == 0 {
            return Err(config_err("max_iterations: must be positive"));
        }
        self.dsa.get_or_insert(true);
        if !self.source_scale.is_finite() {
            return Err(config_err("source_scale: must be finite"));
        }
        if self.margin_cells.is_some() && !self.filter {
            return Err(config_err("margin_cells: only applies with filter = true"));
        }
        Ok(self)
    }

    pub fn ordinate_spec(&self) -> OrdinateSpec {
        self.ordinates.as_deref().unwrap_or("gl:8").parse().expect("resolved ordinates")
    }

    pub fn dt(&self) -> Option<DtRule> {
        self.dt_rule.as_deref().map(|r| r.parse().expect("resolved rule"))
    }

    pub fn bdf(&self) -> Option<BdfOrder> {
        self.bdf_order.map(|o| BdfOrder::try_from(o).expect("resolved order"))
    }

    /// The resolved configuration as `# `-prefixed TOML lines.
    pub fn header(&self) -> Result<String> {
        let text = toml::to_string(self).context("serializing config")?;
        Ok(comment(&text))
    }
}

pub fn comment(text: &str) -> String {
    text.lines().map(|l| format!("# {l}\n")).collect()
}
