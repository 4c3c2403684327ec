use num_complex::Complex64;

use crate::error::{Error, Result};

/// LU factorization with partial pivoting, `P A = L U`, complex arithmetic.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    // Packed L (unit diagonal, below) and U (on and above), row-major.
    lu: Vec<Complex64>,
    perm: Vec<usize>,
    swaps: usize,
    singular: bool,
}

impl Lu {
    pub fn factor(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Dimension("LU needs a square matrix".into()));
        }
        let mut lu: Vec<Complex64> = rows.concat();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut swaps = 0;
        let mut singular = false;
        for k in 0..n {
            let (p, pmax) =
                (k..n)
                    .map(|i| (i, lu[i * n + k].norm()))
                    .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if pmax == 0.0 {
                singular = true;
                continue;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
                swaps += 1;
            }
            let pivot = lu[k * n + k];
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in k + 1..n {
                    let u = lu[k * n + j];
                    lu[i * n + j] -= f * u;
                }
            }
        }
        Ok(Self {
            n,
            lu,
            perm,
            swaps,
            singular,
        })
    }

    pub fn factor_real(rows: &[Vec<f64>]) -> Result<Self> {
        let c: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        Self::factor(&c)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// `(ln|det|, det/|det|)`; `ln|det| = -inf` for an exactly singular factor.
    pub fn log_det(&self) -> (f64, Complex64) {
        if self.singular {
            return (f64::NEG_INFINITY, Complex64::new(0.0, 0.0));
        }
        let mut log_abs = 0.0;
        let mut phase = if self.swaps.is_multiple_of(2) {
            Complex64::new(1.0, 0.0)
        } else {
            Complex64::new(-1.0, 0.0)
        };
        for k in 0..self.n {
            let d = self.lu[k * self.n + k];
            let r = d.norm();
            log_abs += r.ln();
            phase *= d / r;
        }
        (log_abs, phase)
    }

    pub fn det(&self) -> Complex64 {
        let (l, p) = self.log_det();
        if l == f64::NEG_INFINITY {
            return Complex64::new(0.0, 0.0);
        }
        p * l.exp()
    }

    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if self.singular {
            return Err(Error::SingularInput);
        }
        let n = self.n;
        let mut x: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        Ok(x)
    }

    /// Column `j` of the inverse.
    pub fn inverse_column(&self, j: usize) -> Result<Vec<Complex64>> {
        let mut e = vec![Complex64::new(0.0, 0.0); self.n];
        e[j] = Complex64::new(1.0, 0.0);
        self.solve(&e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn det_of_small_matrices() {
        let lu = Lu::factor_real(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        assert!((lu.det() - c(-2.0, 0.0)).norm() < 1e-14);
        let lu = Lu::factor(&[vec![c(0.0, 1.0), c(1.0, 0.0)], vec![c(2.0, 0.0), c(0.0, 3.0)]]).unwrap();
        // i*3i - 2 = -5
        assert!((lu.det() - c(-5.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn singular_detected() {
        let lu = Lu::factor_real(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(lu.is_singular());
        assert_eq!(lu.log_det().0, f64::NEG_INFINITY);
        assert!(lu.solve(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn solve_round_trip() {
        let a = vec![
            vec![c(4.0, 1.0), c(1.0, 0.0), c(0.0, -2.0)],
            vec![c(1.0, 0.0), c(3.0, 0.0), c(1.0, 1.0)],
            vec![c(0.0, 0.5), c(2.0, 0.0), c(5.0, 0.0)],
        ];
        let lu = Lu::factor(&a).unwrap();
        let b = vec![c(1.0, 2.0), c(-1.0, 0.0), c(0.5, 0.5)];
        let x = lu.solve(&b).unwrap();
        for i in 0..3 {
            let r: Complex64 = (0..3).map(|j| a[i][j] * x[j]).sum();
            assert!((r - b[i]).norm() < 1e-13);
        }
    }
}
