//! Banded LU with partial pivoting for the per-mode vertical systems.
//!
//! Storage follows the usual band layout with `kl` extra super-diagonals for
//! pivot fill. Row interchanges only touch the active columns, so the
//! multipliers of step `k` stay where they were computed and the solve
//! replays swaps and eliminations in step order.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("zero pivot in column {column}")]
pub struct SingularMatrix {
    pub column: usize,
}

/// Square band matrix under assembly.
#[derive(Debug, Clone)]
pub struct BandMatrix {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let width = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            width,
            data: vec![Complex64::new(0.0, 0.0); n * width],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn slot(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.ku + self.kl, "({i}, {j}) outside band");
        i * self.width + (j + self.kl - i)
    }

    /// Adds `v` to entry `(i, j)`.
    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        assert!(j + self.kl >= i && j <= i + self.ku, "({i}, {j}) outside declared band");
        let s = self.slot(i, j);
        self.data[s] += v;
    }

    pub fn add_re(&mut self, i: usize, j: usize, v: f64) {
        self.add(i, j, Complex64::new(v, 0.0));
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if j + self.kl < i || j > i + self.ku + self.kl {
            return Complex64::new(0.0, 0.0);
        }
        self.data[self.slot(i, j)]
    }

    /// `y = A x`.
    pub fn mul(&self, x: &[Complex64], y: &mut [Complex64]) {
        for i in 0..self.n {
            let lo = i.saturating_sub(self.kl);
            let hi = (i + self.ku).min(self.n - 1);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in lo..=hi {
                acc += self.data[self.slot(i, j)] * x[j];
            }
            y[i] = acc;
        }
    }

    /// Factorises in place.
    pub fn factor(mut self) -> Result<BandLu, SingularMatrix> {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let mut pivots = vec![0usize; n];
        let mut scale = 0.0f64;
        for v in &self.data {
            scale = scale.max(v.norm());
        }
        let tiny = scale * 1e-300_f64.max(f64::EPSILON * 1e-6);
        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let mut p = k;
            let mut best = self.data[self.slot(k, k)].norm();
            for i in k + 1..=last_row {
                let v = self.data[self.slot(i, k)].norm();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best <= tiny || best == 0.0 {
                return Err(SingularMatrix { column: k });
            }
            pivots[k] = p;
            let last_col = (k + kl + ku).min(n - 1);
            if p != k {
                for j in k..=last_col {
                    let a = self.slot(k, j);
                    let b = self.slot(p, j);
                    self.data.swap(a, b);
                }
            }
            let pivot = self.data[self.slot(k, k)];
            for i in k + 1..=last_row {
                let sik = self.slot(i, k);
                let l = self.data[sik] / pivot;
                self.data[sik] = l;
                if l == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..=last_col {
                    let skj = self.slot(k, j);
                    let sij = self.slot(i, j);
                    let u = self.data[skj];
                    self.data[sij] -= l * u;
                }
            }
        }
        Ok(BandLu { band: self, pivots })
    }
}

/// Factorised band matrix.
#[derive(Debug, Clone)]
pub struct BandLu {
    band: BandMatrix,
    pivots: Vec<usize>,
}

impl BandLu {
    pub fn dim(&self) -> usize {
        self.band.n
    }

    pub fn solve_in_place(&self, b: &mut [Complex64]) {
        let a = &self.band;
        let (n, kl, ku) = (a.n, a.kl, a.ku);
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                b.swap(k, p);
            }
            let bk = b[k];
            for i in k + 1..=(k + kl).min(n - 1) {
                b[i] -= a.data[a.slot(i, k)] * bk;
            }
        }
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..=(k + kl + ku).min(n - 1) {
                acc -= a.data[a.slot(k, j)] * b[j];
            }
            b[k] = acc / a.data[a.slot(k, k)];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_solve(mut a: Vec<Vec<Complex64>>, mut b: Vec<Complex64>) -> Vec<Complex64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].norm().partial_cmp(&a[j][k].norm()).unwrap()).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let l = a[i][k] / a[k][k];
                for j in k..n {
                    let u = a[k][j];
                    a[i][j] -= l * u;
                }
                let bk = b[k];
                b[i] -= l * bk;
            }
        }
        let mut x = vec![Complex64::new(0.0, 0.0); n];
        for k in (0..n).rev() {
            let mut acc = b[k];
            for j in k + 1..n {
                acc -= a[k][j] * x[j];
            }
            x[k] = acc / a[k][k];
        }
        x
    }

    #[test]
    fn band_lu_matches_dense_elimination_with_zero_diagonal() {
        let (n, kl, ku) = (13, 3, 2);
        let mut m = BandMatrix::new(n, kl, ku);
        let mut dense = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in i.saturating_sub(kl)..=(i + ku).min(n - 1) {
                // zero diagonal on every third row forces pivoting
                let v = if i == j && i % 3 == 0 {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(((i * 7 + j * 3) % 11) as f64 - 5.0, ((i + 2 * j) % 5) as f64 - 2.0)
                };
                m.add(i, j, v);
                dense[i][j] = v;
            }
        }
        let b: Vec<Complex64> = (0..n).map(|i| Complex64::new(i as f64, 1.0 - i as f64)).collect();
        let expect = dense_solve(dense, b.clone());
        let lu = m.clone().factor().unwrap();
        let mut x = b.clone();
        lu.solve_in_place(&mut x);
        for (a, e) in x.iter().zip(&expect) {
            assert!((a - e).norm() < 1e-10 * (1.0 + e.norm()));
        }
        let mut r = vec![Complex64::new(0.0, 0.0); n];
        m.mul(&x, &mut r);
        for (ri, bi) in r.iter().zip(&b) {
            assert!((ri - bi).norm() < 1e-10);
        }
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut m = BandMatrix::new(3, 1, 1);
        m.add_re(0, 0, 1.0);
        m.add_re(1, 0, 1.0);
        m.add_re(2, 2, 1.0);
        assert_eq!(m.factor().unwrap_err(), SingularMatrix { column: 1 });
    }
}
