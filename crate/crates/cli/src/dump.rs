use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use dgsiac_core::numerics::gauss_legendre;
use dgsiac_core::{uniform_mesh, Boundary, DgField, DgSpace, SiacFilter};
use serde::{Deserialize, Serialize};

use crate::config::{comment, RunConfig};

/// Geometry needed to rebuild a dumped field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldInfo {
    pub quantity: String,
    pub time: f64,
    pub degree: usize,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub cells: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct DumpHeader {
    field: FieldInfo,
    config: RunConfig,
}

const TITLE: &str = "# dgsiac field dump";

/// Reference lattice: `(k+1)` Gauss points per axis, `x` fastest.
fn lattice(dim: usize, k: usize) -> Vec<([f64; 2], f64)> {
    let q: Vec<(f64, f64)> = gauss_legendre(k + 1).iter().collect();
    if dim == 1 {
        return q.iter().map(|&(x, w)| ([x, 0.0], w)).collect();
    }
    let mut out = Vec::with_capacity(q.len() * q.len());
    for &(y, wy) in &q {
        for &(x, wx) in &q {
            out.push(([x, y], wx * wy));
        }
    }
    out
}

fn write_rows(out: &mut String, dim: usize, x: &[f64], v: f64) {
    let _ = if dim == 1 { writeln!(out, "{} {}", x[0], v) } else { writeln!(out, "{} {} {}", x[0], x[1], v) };
}

fn header_text(info: &FieldInfo, config: &RunConfig) -> Result<String> {
    let h = DumpHeader { field: info.clone(), config: config.clone() };
    let body = toml::to_string(&h).context("serializing dump header")?;
    let rows = if info.lower.len() == 1 { "x value" } else { "x y value" };
    Ok(format!("{TITLE}: rows are {rows}\n{}", comment(&body)))
}

/// Writes a single-component field at the Gauss lattice of every element.
pub fn write_field(path: &Path, field: &DgField, quantity: &str, time: f64, config: &RunConfig) -> Result<()> {
    let space = field.space();
    let mesh = space.mesh();
    let dim = mesh.dim();
    let info = FieldInfo {
        quantity: quantity.into(),
        time,
        degree: space.degree(),
        lower: mesh.lower()[..dim].to_vec(),
        upper: mesh.upper()[..dim].to_vec(),
        cells: mesh.counts()[..dim].to_vec(),
    };
    let mut out = header_text(&info, config)?;
    let pts = lattice(dim, space.degree());
    for e in 0..mesh.num_elements() {
        for (xi, _) in &pts {
            let x = mesh.from_reference(e, &xi[..dim]);
            write_rows(&mut out, dim, &x, space.basis().combine(field.element(0, e), &xi[..dim]));
        }
    }
    std::fs::write(path, out).with_context(|| format!("writing {}", path.display()))
}

/// A field dump read back into modal form.
pub struct LoadedField {
    pub field: DgField,
    pub info: FieldInfo,
    pub config: RunConfig,
}

pub fn read_field(path: &Path) -> Result<LoadedField> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut header = String::new();
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.starts_with(TITLE) {
            continue;
        }
        if let Some(h) = line.strip_prefix('#') {
            header.push_str(h.strip_prefix(' ').unwrap_or(h));
            header.push('\n');
        } else if !line.trim().is_empty() {
            let vals: Vec<f64> = line
                .split_whitespace()
                .map(str::parse)
                .collect::<std::result::Result<_, _>>()
                .with_context(|| format!("{}:{}: bad number", path.display(), i + 1))?;
            rows.push(vals);
        }
    }
    let h: DumpHeader = toml::from_str(&header).with_context(|| format!("{}: bad header", path.display()))?;
    let info = h.field;
    let dim = info.lower.len();
    ensure!(dim == 1 || dim == 2, "dump header has dimension {dim}");
    ensure!(info.upper.len() == dim && info.cells.len() == dim, "inconsistent dump geometry");
    let mesh = uniform_mesh(&info.lower, &info.upper, &info.cells, &vec![[Boundary::Vacuum; 2]; dim])?;
    let space = DgSpace::new(mesh, info.degree);
    let pts = lattice(dim, info.degree);
    let n_elem = space.num_elements();
    ensure!(
        rows.len() == n_elem * pts.len(),
        "{}: expected {} rows, found {}",
        path.display(),
        n_elem * pts.len(),
        rows.len()
    );
    let basis = *space.basis();
    let nd = basis.len();
    let mut coeffs = vec![0.0; n_elem * nd];
    let mut phi = vec![0.0; nd];
    let scale = info.upper.iter().zip(&info.lower).map(|(u, l)| (u - l).abs()).fold(1.0, f64::max);
    for e in 0..n_elem {
        for (q, (xi, w)) in pts.iter().enumerate() {
            let row = &rows[e * pts.len() + q];
            ensure!(row.len() == dim + 1, "{}: row {} has {} columns", path.display(), e * pts.len() + q, row.len());
            let x = space.mesh().from_reference(e, &xi[..dim]);
            if (0..dim).any(|a| (row[a] - x[a]).abs() > 1e-9 * scale) {
                bail!("{}: sample point {:?} is not on the expected lattice", path.display(), &row[..dim]);
            }
            basis.eval(&xi[..dim], &mut phi);
            for a in 0..nd {
                coeffs[e * nd + a] += w * row[dim] * phi[a] / basis.reference_norm_sq(a);
            }
        }
    }
    let field = DgField::from_coeffs(space, 1, coeffs)?;
    Ok(LoadedField { field, info, config: h.config })
}

/// SIAC-filters a dumped field at every lattice point whose kernel support
/// stays inside the domain and writes the result in the same row format.
/// Returns the number of points written.
pub fn filter_dump(input: &Path, output: &Path) -> Result<usize> {
    let loaded = read_field(input)?;
    let field = &loaded.field;
    let space = field.space();
    let mesh = space.mesh();
    let dim = mesh.dim();
    let filter = SiacFilter::new(space.basis(), mesh)?;
    let mut info = loaded.info.clone();
    info.quantity = format!("filtered {}", info.quantity);
    let mut out = header_text(&info, &loaded.config)?;
    let pts = lattice(dim, space.degree());
    let stencils: Vec<_> = pts.iter().map(|(xi, _)| filter.stencil(&xi[..dim])).collect();
    let mut written = 0;
    for e in 0..mesh.num_elements() {
        for ((xi, _), st) in pts.iter().zip(&stencils) {
            if !st.fits(mesh, e) {
                continue;
            }
            let x = mesh.from_reference(e, &xi[..dim]);
            write_rows(&mut out, dim, &x, st.apply(field, 0, e)?);
            written += 1;
        }
    }
    std::fs::write(output, out).with_context(|| format!("writing {}", output.display()))?;
    Ok(written)
}
