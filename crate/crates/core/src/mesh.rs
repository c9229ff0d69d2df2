//! Uniform axis-aligned tensor meshes in one and two dimensions.

use crate::error::{Error, Result};

/// Boundary condition attached to one side of one axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Boundary {
    /// Zero incoming intensity.
    Vacuum,
    /// Identified with the opposite side.
    Periodic,
    /// Incoming intensity taken from the problem's inflow data.
    Inflow,
}

/// Lower (`-e_axis` outward normal) or upper (`+e_axis`) side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    Lower,
    Upper,
}

impl Side {
    pub fn sign(self) -> f64 {
        match self {
            Side::Lower => -1.0,
            Side::Upper => 1.0,
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Lower => Side::Upper,
            Side::Upper => Side::Lower,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Side::Lower => 0,
            Side::Upper => 1,
        }
    }
}

/// A face normal to `axis` at coordinate `position`.
///
/// `lower` is the element on the `-e_axis` side, `upper` the element on the
/// `+e_axis` side; the normal points from `lower` into `upper`. Boundary faces
/// have exactly one of the two and carry the boundary tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Face {
    pub axis: usize,
    pub position: f64,
    pub lower: Option<usize>,
    pub upper: Option<usize>,
    pub boundary: Option<Boundary>,
    pub normal: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.lower.is_none() || self.upper.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct Mesh {
    dim: usize,
    lower: [f64; 2],
    upper: [f64; 2],
    counts: [usize; 2],
    spacing: [f64; 2],
    bc: [[Boundary; 2]; 2],
    faces: Vec<Face>,
}

impl Mesh {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> [f64; 2] {
        self.lower
    }

    pub fn upper(&self) -> [f64; 2] {
        self.upper
    }

    pub fn counts(&self) -> [usize; 2] {
        self.counts
    }

    pub fn spacing(&self) -> [f64; 2] {
        self.spacing
    }

    /// Smallest cell extent over the axes.
    pub fn h(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing[a]).fold(f64::INFINITY, f64::min)
    }

    pub fn boundary(&self, axis: usize, side: Side) -> Boundary {
        self.bc[axis][side.index()]
    }

    pub fn is_periodic(&self, axis: usize) -> bool {
        self.bc[axis][0] == Boundary::Periodic
    }

    pub fn num_elements(&self) -> usize {
        self.counts[0] * if self.dim == 2 { self.counts[1] } else { 1 }
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn element_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.spacing[a]).product()
    }

    pub fn domain_volume(&self) -> f64 {
        (0..self.dim).map(|a| self.upper[a] - self.lower[a]).product()
    }

    /// Element index from per-axis cell indices (x fastest).
    pub fn element_index(&self, cell: [usize; 2]) -> usize {
        cell[0] + self.counts[0] * cell[1]
    }

    pub fn cell_of(&self, elem: usize) -> [usize; 2] {
        [elem % self.counts[0], elem / self.counts[0]]
    }

    pub fn element_bounds(&self, elem: usize) -> ([f64; 2], [f64; 2]) {
        let c = self.cell_of(elem);
        let mut lo = [0.0; 2];
        let mut hi = [0.0; 2];
        for a in 0..self.dim {
            lo[a] = self.lower[a] + self.spacing[a] * c[a] as f64;
            hi[a] = lo[a] + self.spacing[a];
        }
        (lo, hi)
    }

    pub fn element_center(&self, elem: usize) -> [f64; 2] {
        let (lo, hi) = self.element_bounds(elem);
        [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])]
    }

    /// Neighbor across `side` of `axis`, wrapping on periodic axes.
    pub fn neighbor(&self, elem: usize, axis: usize, side: Side) -> Option<usize> {
        let mut c = self.cell_of(elem);
        let n = self.counts[axis];
        match side {
            Side::Lower if c[axis] == 0 => {
                if self.is_periodic(axis) {
                    c[axis] = n - 1;
                } else {
                    return None;
                }
            }
            Side::Lower => c[axis] -= 1,
            Side::Upper if c[axis] + 1 == n => {
                if self.is_periodic(axis) {
                    c[axis] = 0;
                } else {
                    return None;
                }
            }
            Side::Upper => c[axis] += 1,
        }
        Some(self.element_index(c))
    }

    /// Affine map of a physical point into `[-1, 1]^d` of `elem`.
    pub fn to_reference(&self, elem: usize, x: &[f64]) -> Result<[f64; 2]> {
        let (lo, hi) = self.element_bounds(elem);
        let mut xi = [0.0; 2];
        for a in 0..self.dim {
            let tol = 1e-12 * self.spacing[a];
            if x[a] < lo[a] - tol || x[a] > hi[a] + tol {
                return Err(Error::OutsideDomain { point: x[..self.dim].to_vec(), what: "element" });
            }
            xi[a] = (2.0 * (x[a] - lo[a]) / self.spacing[a] - 1.0).clamp(-1.0, 1.0);
        }
        Ok(xi)
    }

    pub fn from_reference(&self, elem: usize, xi: &[f64]) -> [f64; 2] {
        let (lo, _) = self.element_bounds(elem);
        let mut x = [0.0; 2];
        for a in 0..self.dim {
            x[a] = lo[a] + 0.5 * (xi[a] + 1.0) * self.spacing[a];
        }
        x
    }

    /// Element containing `x`. Points on an interior interface go to the upper
    /// element unless `prefer_lower` is set for that axis.
    pub fn locate_with(&self, x: &[f64], prefer_lower: [bool; 2]) -> Result<usize> {
        let mut c = [0usize; 2];
        for a in 0..self.dim {
            let tol = 1e-12 * self.spacing[a];
            if x[a] < self.lower[a] - tol || x[a] > self.upper[a] + tol {
                return Err(Error::OutsideDomain { point: x[..self.dim].to_vec(), what: "domain" });
            }
            let s = (x[a] - self.lower[a]) / self.spacing[a];
            let mut i = s.floor();
            if prefer_lower[a] && (s - s.round()).abs() < 1e-12 && s.round() >= 1.0 {
                i = s.round() - 1.0;
            }
            c[a] = (i.max(0.0) as usize).min(self.counts[a] - 1);
        }
        Ok(self.element_index(c))
    }

    pub fn locate(&self, x: &[f64]) -> Result<usize> {
        self.locate_with(x, [false, false])
    }
}

/// Build a uniform tensor mesh.
///
/// `bc[axis] = [lower side, upper side]`; periodic must be set on both sides.
pub fn uniform_mesh(
    lower: &[f64],
    upper: &[f64],
    counts: &[usize],
    bc: &[[Boundary; 2]],
) -> Result<Mesh> {
    let dim = counts.len();
    if !(1..=2).contains(&dim) || lower.len() != dim || upper.len() != dim || bc.len() != dim {
        return Err(Error::invalid("mesh bounds, counts and boundary tags must all have length 1 or 2"));
    }
    let mut lo = [0.0; 2];
    let mut hi = [1.0; 2];
    let mut n = [1usize; 2];
    let mut spacing = [1.0; 2];
    let mut tags = [[Boundary::Vacuum; 2]; 2];
    for a in 0..dim {
        if counts[a] == 0 {
            return Err(Error::invalid(format!("axis {a}: element count must be >= 1")));
        }
        if !(upper[a] > lower[a]) || !lower[a].is_finite() || !upper[a].is_finite() {
            return Err(Error::invalid(format!(
                "axis {a}: degenerate bounds [{}, {}]",
                lower[a], upper[a]
            )));
        }
        if (bc[a][0] == Boundary::Periodic) != (bc[a][1] == Boundary::Periodic) {
            return Err(Error::invalid(format!("axis {a}: periodic must be set on both sides")));
        }
        lo[a] = lower[a];
        hi[a] = upper[a];
        n[a] = counts[a];
        spacing[a] = (upper[a] - lower[a]) / counts[a] as f64;
        tags[a] = bc[a];
    }
    let mut mesh = Mesh { dim, lower: lo, upper: hi, counts: n, spacing, bc: tags, faces: Vec::new() };
    mesh.faces = enumerate_faces(&mesh);
    Ok(mesh)
}

fn enumerate_faces(mesh: &Mesh) -> Vec<Face> {
    let mut faces = Vec::new();
    for axis in 0..mesh.dim {
        let other = 1 - axis;
        let n_along = mesh.counts[axis];
        let n_across = if mesh.dim == 2 { mesh.counts[other] } else { 1 };
        let periodic = mesh.is_periodic(axis);
        let mut normal = [0.0; 2];
        normal[axis] = 1.0;
        for t in 0..n_across {
            let cell = |i: usize| {
                let mut c = [0usize; 2];
                c[axis] = i;
                c[other] = t;
                mesh.element_index(c)
            };
            let planes = if periodic { n_along } else { n_along + 1 };
            for p in 0..planes {
                let position = mesh.lower[axis] + mesh.spacing[axis] * p as f64;
                let (lower, upper, boundary) = if periodic {
                    let lower = if p == 0 { cell(n_along - 1) } else { cell(p - 1) };
                    (Some(lower), Some(cell(p)), None)
                } else if p == 0 {
                    (None, Some(cell(0)), Some(mesh.bc[axis][0]))
                } else if p == n_along {
                    (Some(cell(n_along - 1)), None, Some(mesh.bc[axis][1]))
                } else {
                    (Some(cell(p - 1)), Some(cell(p)), None)
                };
                faces.push(Face { axis, position, lower, upper, boundary, normal });
            }
        }
    }
    faces
}
