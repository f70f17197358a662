//! Symmetric tridiagonal matrices with an `LLᵀ` factorization.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiagonal {
    /// Main diagonal, length `m`.
    pub diag: Vec<f64>,
    /// Sub/super-diagonal, length `m − 1` (`off[i]` couples `i` and `i + 1`).
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn zeros(m: usize) -> Self {
        Self {
            diag: vec![0.0; m],
            off: vec![0.0; m.saturating_sub(1)],
        }
    }

    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        match i.abs_diff(j) {
            0 => self.diag[i],
            1 => self.off[i.min(j)],
            _ => 0.0,
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let m = self.dim();
        (0..m)
            .map(|i| (0..m).map(|j| self.get(i, j)).collect())
            .collect()
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let m = self.dim();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < m {
                    s += self.off[i] * x[i + 1];
                }
                s
            })
            .collect()
    }

    pub fn cholesky(&self) -> Result<TridiagonalCholesky> {
        let m = self.dim();
        let mut diag = Vec::with_capacity(m);
        let mut sub = Vec::with_capacity(m.saturating_sub(1));
        for i in 0..m {
            let mut pivot = self.diag[i];
            if i > 0 {
                let l: f64 = sub[i - 1];
                pivot -= l * l;
            }
            if !(pivot > 0.0) || !pivot.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: i });
            }
            let l_ii = pivot.sqrt();
            diag.push(l_ii);
            if i + 1 < m {
                sub.push(self.off[i] / l_ii);
            }
        }
        Ok(TridiagonalCholesky { diag, sub })
    }
}

/// Lower bidiagonal factor `L` with `A = LLᵀ`.
#[derive(Debug, Clone)]
pub struct TridiagonalCholesky {
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagonalCholesky {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.diag.len();
        let mut y = vec![0.0; m];
        for i in 0..m {
            let mut s = rhs[i];
            if i > 0 {
                s -= self.sub[i - 1] * y[i - 1];
            }
            y[i] = s / self.diag[i];
        }
        for i in (0..m).rev() {
            let mut s = y[i];
            if i + 1 < m {
                s -= self.sub[i] * y[i + 1];
            }
            y[i] = s / self.diag[i];
        }
        y
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_spd_system() {
        let a = SymTridiagonal {
            diag: vec![4.0, 5.0, 6.0, 3.0],
            off: vec![1.0, -2.0, 0.5],
        };
        let x = vec![1.0, -2.0, 0.25, 3.0];
        let b = a.mul_vec(&x);
        let got = a.cholesky().unwrap().solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_indefinite() {
        let a = SymTridiagonal {
            diag: vec![1.0, 1.0],
            off: vec![2.0],
        };
        assert_eq!(
            a.cholesky().unwrap_err(),
            Error::NotPositiveDefinite { pivot: 1 }
        );
        assert!(SymTridiagonal::zeros(0)
            .cholesky()
            .unwrap()
            .solve(&[])
            .is_empty());
    }
}
