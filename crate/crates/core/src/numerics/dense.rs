//! Small dense solvers for element-local systems and moment systems.

/// LU factorization with partial pivoting of a row-major `n x n` matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl Lu {
    /// Returns `None` when a pivot underflows `tiny * max|a_ij|`.
    pub fn factor(n: usize, mut a: Vec<f64>) -> Option<Lu> {
        debug_assert_eq!(a.len(), n * n);
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale == 0.0 {
            return None;
        }
        let tiny = 1e-14 * scale;
        let mut piv: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let (p, pmax) = (col..n)
                .map(|r| (r, a[r * n + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pmax <= tiny {
                return None;
            }
            if p != col {
                for c in 0..n {
                    a.swap(p * n + c, col * n + c);
                }
                piv.swap(p, col);
            }
            let d = a[col * n + col];
            for r in col + 1..n {
                let f = a[r * n + col] / d;
                a[r * n + col] = f;
                if f != 0.0 {
                    for c in col + 1..n {
                        a[r * n + c] -= f * a[col * n + c];
                    }
                }
            }
        }
        Some(Lu { n, lu: a, piv })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve in place: `b` holds the right-hand side on entry.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.n;
        let mut tmp = [0.0f64; 64];
        let mut heap = Vec::new();
        let y: &mut [f64] = if n <= 64 {
            &mut tmp[..n]
        } else {
            heap.resize(n, 0.0);
            &mut heap
        };
        for i in 0..n {
            y[i] = b[self.piv[i]];
        }
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        b[..n].copy_from_slice(y);
    }
}

/// Gaussian elimination with full pivoting; `None` if the matrix is singular.
pub fn solve_full_pivot(n: usize, mut a: Vec<f64>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let mut col_perm: Vec<usize> = (0..n).collect();
    let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return None;
    }
    for k in 0..n {
        let mut best = (k, k, -1.0);
        for r in k..n {
            for c in k..n {
                let v = a[r * n + c].abs();
                if v > best.2 {
                    best = (r, c, v);
                }
            }
        }
        if best.2 <= 1e-15 * scale {
            return None;
        }
        let (pr, pc) = (best.0, best.1);
        if pr != k {
            for c in 0..n {
                a.swap(pr * n + c, k * n + c);
            }
            b.swap(pr, k);
        }
        if pc != k {
            for r in 0..n {
                a.swap(r * n + pc, r * n + k);
            }
            col_perm.swap(pc, k);
        }
        let d = a[k * n + k];
        for r in k + 1..n {
            let f = a[r * n + k] / d;
            if f != 0.0 {
                for c in k..n {
                    a[r * n + c] -= f * a[k * n + c];
                }
                b[r] -= f * b[k];
            }
        }
    }
    let mut y = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in i + 1..n {
            s -= a[i * n + j] * y[j];
        }
        y[i] = s / a[i * n + i];
    }
    let mut x = vec![0.0; n];
    for (k, &c) in col_perm.iter().enumerate() {
        x[c] = y[k];
    }
    Some(x)
}
