use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues of a real symmetric matrix by cyclic Jacobi, ascending.
pub fn symmetric_eigenvalues(mut a: Vec<Vec<f64>>) -> Result<Vec<f64>> {
    let n = a.len();
    let fnorm: f64 = a.iter().flatten().map(|v| v * v).sum::<f64>().sqrt();
    // Rotations below rounding level cycle forever between degenerate pairs.
    let floor = f64::EPSILON * fnorm;
    for _ in 0..100 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p][q];
                if apq.abs() <= floor || apq.abs() <= f64::EPSILON * (a[p][p] * a[q][q]).abs().sqrt() {
                    continue;
                }
                rotated = true;
                let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
        if !rotated {
            let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
            ev.sort_by(f64::total_cmp);
            return Ok(ev);
        }
    }
    Err(Error::NoConvergence {
        routine: "symmetric_eigenvalues",
        iterations: 100,
    })
}

/// Eigenvalues of a Hermitian matrix `A + iB`, ascending.
///
/// Uses the real symmetric embedding `[[A, -B], [B, A]]`, whose spectrum is
/// that of the Hermitian matrix with every eigenvalue doubled.
pub fn hermitian_eigenvalues(h: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    let n = h.len();
    let mut big = vec![vec![0.0; 2 * n]; 2 * n];
    for i in 0..n {
        for j in 0..n {
            let z = h[i][j];
            big[i][j] = z.re;
            big[i + n][j + n] = z.re;
            big[i][j + n] = -z.im;
            big[i + n][j] = z.im;
        }
    }
    let ev = symmetric_eigenvalues(big)?;
    Ok(ev.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}
