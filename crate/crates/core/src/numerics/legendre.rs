//! Legendre and Radau polynomials on the reference interval `[-1, 1]`.

use crate::error::{Error, Result};

/// Value of the Legendre polynomial `L_n` at `x`, by the three-term recurrence.
pub fn legendre(n: usize, x: f64) -> f64 {
    debug_assert!(
        (-1.0 - 1e-12..=1.0 + 1e-12).contains(&x),
        "legendre evaluated outside [-1, 1]: {x}"
    );
    let (mut prev, mut cur) = (1.0, x);
    if n == 0 {
        return prev;
    }
    for m in 1..n {
        let m = m as f64;
        let next = ((2.0 * m + 1.0) * x * cur - m * prev) / (m + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `(L_n(x), L_n'(x))`.
///
/// The derivative uses `L'_{m+1} = L'_{m-1} + (2m+1) L_m`, which stays regular at
/// the endpoints.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p_next = ((2.0 * mf + 1.0) * x * p - mf * p_prev) / (mf + 1.0);
        let d_next = d_prev + (2.0 * mf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

pub fn legendre_derivative(n: usize, x: f64) -> f64 {
    legendre_with_derivative(n, x).1
}

/// Which endpoint of `[-1, 1]` is a root of the Radau polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RadauSide {
    /// `R^+_k = L_k + L_{k-1}`, vanishing at `-1`.
    Left,
    /// `R^-_k = L_k - L_{k-1}`, vanishing at `+1`.
    Right,
}

pub fn radau(k: usize, side: RadauSide, x: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    match side {
        RadauSide::Left => legendre(k, x) + legendre(k - 1, x),
        RadauSide::Right => legendre(k, x) - legendre(k - 1, x),
    }
}

const RADAU_GRID: usize = 1000;

/// The `k` roots of the left or right Radau polynomial, sorted ascending.
///
/// Interior roots are bracketed on a uniform grid and refined by bisection to
/// `1e-14`; the endpoint root is inserted exactly.
pub fn radau_roots(k: usize, side: RadauSide) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(Error::invalid("radau_roots needs k >= 1"));
    }
    let f = |x: f64| radau(k, side, x);
    let mut roots = Vec::with_capacity(k);
    if side == RadauSide::Left {
        roots.push(-1.0);
    }
    let step = 2.0 / RADAU_GRID as f64;
    // skip the grid endpoints: they carry the exact root or a non-root
    let mut a = -1.0 + step;
    let mut fa = f(a);
    for i in 2..RADAU_GRID {
        let b = -1.0 + step * i as f64;
        let fb = f(b);
        if fa == 0.0 {
            roots.push(a);
        } else if fa * fb < 0.0 {
            roots.push(bisect(&f, a, b, fa)?);
        }
        a = b;
        fa = fb;
    }
    if side == RadauSide::Right {
        roots.push(1.0);
    }
    if roots.len() != k {
        return Err(Error::RootFinding(format!(
            "found {} of {} Radau roots for k = {k}",
            roots.len(),
            k
        )));
    }
    Ok(roots)
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, mut fa: f64) -> Result<f64> {
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-14 {
            return Ok(m);
        }
        let fm = f(m);
        if fm == 0.0 {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
        } else {
            a = m;
            fa = fm;
        }
    }
    Err(Error::RootFinding(format!("bisection on [{a}, {b}] did not shrink")))
}
