//! Nonsymmetric eigenvalues: balancing, Householder reduction to upper
//! Hessenberg form, then shifted QR with deflation (Francis double shift for
//! real input, Wilkinson single shift for complex input).

use num_complex::Complex64;

use super::lu::Lu;
use crate::error::{Error, Result};

const RADIX: f64 = 2.0;

/// Row-major square real matrix as nested vectors.
type Real = Vec<Vec<f64>>;
type Cplx = Vec<Vec<Complex64>>;

/// Diagonal similarity scaling to equalize row and column norms.
pub fn balance(a: &mut Real) {
    let n = a.len();
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut r = 0.0;
            let mut c = 0.0;
            for j in 0..n {
                if j != i {
                    c += a[j][i].abs();
                    r += a[i][j].abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for v in a[i].iter_mut() {
                    *v *= g;
                }
                for row in a.iter_mut() {
                    row[i] *= f;
                }
            }
        }
    }
}

/// Orthogonal (Householder) similarity reduction to upper Hessenberg form.
pub fn hessenberg(h: &mut Real) {
    let n = h.len();
    if n < 3 {
        return;
    }
    let mut ort = vec![0.0; n];
    let high = n - 1;
    for m in 1..high {
        let scale: f64 = (m..=high).map(|i| h[i][m - 1].abs()).sum();
        if scale == 0.0 {
            continue;
        }
        let mut hh = 0.0;
        for i in (m..=high).rev() {
            ort[i] = h[i][m - 1] / scale;
            hh += ort[i] * ort[i];
        }
        let mut g = hh.sqrt();
        if ort[m] > 0.0 {
            g = -g;
        }
        hh -= ort[m] * g;
        ort[m] -= g;
        for j in m..n {
            let f: f64 = (m..=high).map(|i| ort[i] * h[i][j]).sum::<f64>() / hh;
            for i in m..=high {
                h[i][j] -= f * ort[i];
            }
        }
        for row in h.iter_mut() {
            let f: f64 = (m..=high).map(|j| ort[j] * row[j]).sum::<f64>() / hh;
            for j in m..=high {
                row[j] -= f * ort[j];
            }
        }
        h[m][m - 1] = scale * g;
        for row in h.iter_mut().skip(m + 1) {
            row[m - 1] = 0.0;
        }
    }
}

/// Eigenvalues of a real upper Hessenberg matrix by Francis double-shift QR.
///
/// `limit` caps the QR sweeps spent on any single eigenvalue (or pair).
pub fn hessenberg_qr_real(h: Real, limit: usize) -> Result<Vec<Complex64>> {
    let n = h.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    // One-based working copy keeps the index arithmetic close to the
    // classical formulation.
    let mut a = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..n {
        for j in 0..n {
            a[i + 1][j + 1] = h[i][j];
        }
    }
    let mut wr = vec![0.0; n + 1];
    let mut wi = vec![0.0; n + 1];
    let mut anorm = 0.0;
    for i in 1..=n {
        for j in i.saturating_sub(1).max(1)..=n {
            anorm += a[i][j].abs();
        }
    }
    let mut nn = n;
    let mut t = 0.0;
    while nn >= 1 {
        let mut its = 0usize;
        loop {
            let mut l = nn;
            while l >= 2 {
                let mut s = a[l - 1][l - 1].abs() + a[l][l].abs();
                if s == 0.0 {
                    s = anorm;
                }
                if a[l][l - 1].abs() <= f64::EPSILON * s {
                    a[l][l - 1] = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = a[nn][nn];
            if l == nn {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                nn -= 1;
                break;
            }
            let mut y = a[nn - 1][nn - 1];
            let mut w = a[nn][nn - 1] * a[nn - 1][nn];
            if l == nn - 1 {
                let p = 0.5 * (y - x);
                let q = p * p + w;
                let mut z = q.abs().sqrt();
                x += t;
                if q >= 0.0 {
                    z = p + z.copysign(p);
                    wr[nn - 1] = x + z;
                    wr[nn] = x + z;
                    if z != 0.0 {
                        wr[nn] = x - w / z;
                    }
                    wi[nn - 1] = 0.0;
                    wi[nn] = 0.0;
                } else {
                    wr[nn - 1] = x + p;
                    wr[nn] = x + p;
                    wi[nn - 1] = -z;
                    wi[nn] = z;
                }
                nn -= 2;
                break;
            }
            if its >= limit {
                return Err(Error::NoConvergence {
                    routine: "hessenberg_qr_real",
                    iterations: its,
                });
            }
            if its > 0 && its.is_multiple_of(10) {
                // Exceptional shift.
                t += x;
                for i in 1..=nn {
                    a[i][i] -= x;
                }
                let s = a[nn][nn - 1].abs() + a[nn - 1][nn - 2].abs();
                x = 0.75 * s;
                y = x;
                w = -0.4375 * s * s;
            }
            its += 1;
            let mut m = nn - 2;
            let (mut p, mut q, mut r);
            loop {
                let z = a[m][m];
                let rr = x - z;
                let ss = y - z;
                p = (rr * ss - w) / a[m + 1][m] + a[m][m + 1];
                q = a[m + 1][m + 1] - z - rr - ss;
                r = a[m + 2][m + 1];
                let s = p.abs() + q.abs() + r.abs();
                p /= s;
                q /= s;
                r /= s;
                if m == l {
                    break;
                }
                let u = a[m][m - 1].abs() * (q.abs() + r.abs());
                let v = p.abs() * (a[m - 1][m - 1].abs() + z.abs() + a[m + 1][m + 1].abs());
                if u <= f64::EPSILON * v {
                    break;
                }
                m -= 1;
            }
            for i in m + 2..=nn {
                a[i][i - 2] = 0.0;
                if i != m + 2 {
                    a[i][i - 3] = 0.0;
                }
            }
            let mut k = m;
            while k < nn {
                if k != m {
                    p = a[k][k - 1];
                    q = a[k + 1][k - 1];
                    r = 0.0;
                    if k != nn - 1 {
                        r = a[k + 2][k - 1];
                    }
                    x = p.abs() + q.abs() + r.abs();
                    if x != 0.0 {
                        p /= x;
                        q /= x;
                        r /= x;
                    }
                }
                let s = (p * p + q * q + r * r).sqrt().copysign(p);
                if s != 0.0 {
                    if k == m {
                        if l != m {
                            a[k][k - 1] = -a[k][k - 1];
                        }
                    } else {
                        a[k][k - 1] = -s * x;
                    }
                    p += s;
                    x = p / s;
                    y = q / s;
                    let z = r / s;
                    q /= p;
                    r /= p;
                    for j in k..=nn {
                        let mut pp = a[k][j] + q * a[k + 1][j];
                        if k != nn - 1 {
                            pp += r * a[k + 2][j];
                            a[k + 2][j] -= pp * z;
                        }
                        a[k + 1][j] -= pp * y;
                        a[k][j] -= pp * x;
                    }
                    let mmin = nn.min(k + 3);
                    for i in l..=mmin {
                        let mut pp = x * a[i][k] + y * a[i][k + 1];
                        if k != nn - 1 {
                            pp += z * a[i][k + 2];
                            a[i][k + 2] -= pp * r;
                        }
                        a[i][k + 1] -= pp * q;
                        a[i][k] -= pp;
                    }
                }
                k += 1;
            }
            if l >= nn - 1 {
                break;
            }
        }
    }
    Ok((1..=n).map(|i| Complex64::new(wr[i], wi[i])).collect())
}

/// Eigenvalues of a real square matrix.
pub fn eigenvalues_real(mut a: Real) -> Result<Vec<Complex64>> {
    let n = a.len();
    balance(&mut a);
    hessenberg(&mut a);
    hessenberg_qr_real(a, 50 * n.max(1))
}

/// Householder reduction of a complex matrix to upper Hessenberg form.
pub fn hessenberg_complex(a: &mut Cplx) {
    let n = a.len();
    for k in 0..n.saturating_sub(2) {
        let norm: f64 = (k + 1..n).map(|i| a[i][k].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = a[k + 1][k];
        let phase = if x0.norm() == 0.0 {
            Complex64::new(1.0, 0.0)
        } else {
            x0 / x0.norm()
        };
        let alpha = -phase * norm;
        let mut v: Vec<Complex64> = (k + 1..n).map(|i| a[i][k]).collect();
        v[0] -= alpha;
        let vnorm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // A <- (I - 2 v v*) A
        for j in 0..n {
            let s: Complex64 = v
                .iter()
                .enumerate()
                .map(|(idx, vi)| vi.conj() * a[k + 1 + idx][j])
                .sum();
            for (idx, vi) in v.iter().enumerate() {
                a[k + 1 + idx][j] -= *vi * s * 2.0;
            }
        }
        // A <- A (I - 2 v v*)
        for row in a.iter_mut() {
            let s: Complex64 = v.iter().enumerate().map(|(idx, vi)| row[k + 1 + idx] * vi).sum();
            for (idx, vi) in v.iter().enumerate() {
                row[k + 1 + idx] -= s * vi.conj() * 2.0;
            }
        }
        for row in a.iter_mut().skip(k + 2) {
            row[k] = Complex64::new(0.0, 0.0);
        }
    }
}

fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if an == 0.0 {
        return (0.0, b.conj() / bn);
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Eigenvalues of a complex upper Hessenberg matrix by single-shift QR.
pub fn hessenberg_qr_complex(mut h: Cplx, limit: usize) -> Result<Vec<Complex64>> {
    let n = h.len();
    let mut eig = vec![Complex64::new(0.0, 0.0); n];
    if n == 0 {
        return Ok(eig);
    }
    let mut hi = n - 1;
    let mut its = 0usize;
    loop {
        if hi == 0 {
            eig[0] = h[0][0];
            break;
        }
        let mut l = hi;
        while l > 0 {
            let s = h[l - 1][l - 1].norm() + h[l][l].norm();
            if h[l][l - 1].norm() <= f64::EPSILON * s || h[l][l - 1].norm() < f64::MIN_POSITIVE {
                h[l][l - 1] = Complex64::new(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            eig[hi] = h[hi][hi];
            hi -= 1;
            its = 0;
            continue;
        }
        if its >= limit {
            return Err(Error::NoConvergence {
                routine: "hessenberg_qr_complex",
                iterations: its,
            });
        }
        its += 1;
        let mu = if its.is_multiple_of(10) {
            h[hi][hi] + Complex64::new(h[hi][hi - 1].norm() * 0.75, 0.0)
        } else {
            let a = h[hi - 1][hi - 1];
            let b = h[hi - 1][hi];
            let c = h[hi][hi - 1];
            let d = h[hi][hi];
            let tr = a + d;
            let det = a * d - b * c;
            let disc = (tr * tr - det * 4.0).sqrt();
            let e1 = (tr + disc) * 0.5;
            let e2 = (tr - disc) * 0.5;
            if (e1 - d).norm() < (e2 - d).norm() {
                e1
            } else {
                e2
            }
        };
        for i in l..=hi {
            h[i][i] -= mu;
        }
        let mut rots = Vec::with_capacity(hi - l);
        for k in l..hi {
            let (c, s) = givens(h[k][k], h[k + 1][k]);
            for j in k..=hi {
                let x = h[k][j];
                let y = h[k + 1][j];
                h[k][j] = x * c + s * y;
                h[k + 1][j] = -s.conj() * x + y * c;
            }
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.into_iter().enumerate() {
            let k = l + idx;
            for row in h.iter_mut().take((k + 2).min(hi) + 1).skip(l) {
                let x = row[k];
                let y = row[k + 1];
                row[k] = x * c + s.conj() * y;
                row[k + 1] = -s * x + y * c;
            }
        }
        for i in l..=hi {
            h[i][i] += mu;
        }
    }
    Ok(eig)
}

pub fn eigenvalues_complex(mut a: Cplx) -> Result<Vec<Complex64>> {
    let n = a.len();
    hessenberg_complex(&mut a);
    hessenberg_qr_complex(a, 50 * n.max(1))
}

/// Unit eigenvector for an (approximate) eigenvalue by inverse iteration.
pub fn inverse_iteration(a: &Cplx, lambda: Complex64) -> Result<Vec<Complex64>> {
    let n = a.len();
    let scale = a.iter().flatten().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut shift = lambda;
    let mut lu = None;
    for attempt in 0..4 {
        let mut shifted = a.clone();
        for (i, row) in shifted.iter_mut().enumerate() {
            row[i] -= shift;
        }
        let f = Lu::factor(&shifted)?;
        if !f.is_singular() {
            lu = Some(f);
            break;
        }
        shift = lambda + Complex64::new(scale * 1e-14 * 10f64.powi(attempt), 0.0);
    }
    let lu = lu.ok_or(Error::SingularInput)?;
    let mut v: Vec<Complex64> = (0..n)
        .map(|i| Complex64::new(1.0 + (i as f64 * 0.618).fract(), 0.0))
        .collect();
    for _ in 0..3 {
        v = lu.solve(&v)?;
        let norm: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::SingularInput);
        }
        for z in v.iter_mut() {
            *z /= norm;
        }
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        v
    }

    #[test]
    fn rotation_matrix() {
        let e = sorted(eigenvalues_real(vec![vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let mut a: Real = (0..6)
            .map(|i| (0..6).map(|j| ((i * 7 + j * 3) % 11) as f64 - 5.0).collect())
            .collect();
        let tr: f64 = (0..6).map(|i| a[i][i]).sum();
        hessenberg(&mut a);
        let tr2: f64 = (0..6).map(|i| a[i][i]).sum();
        assert!((tr - tr2).abs() < 1e-12);
        for i in 2..6 {
            for j in 0..i - 1 {
                assert_eq!(a[i][j], 0.0);
            }
        }
    }

    #[test]
    fn complex_triangular() {
        let c = |re, im| Complex64::new(re, im);
        let a = vec![
            vec![c(1.0, 1.0), c(2.0, 0.0), c(0.0, 3.0)],
            vec![c(0.0, 0.0), c(-2.0, 0.5), c(1.0, 1.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(4.0, 0.0)],
        ];
        let e = sorted(eigenvalues_complex(a).unwrap());
        let want = sorted(vec![c(1.0, 1.0), c(-2.0, 0.5), c(4.0, 0.0)]);
        for (x, y) in e.iter().zip(&want) {
            assert!((x - y).norm() < 1e-12, "{x} vs {y}");
        }
    }

    #[test]
    fn complex_matches_real_path() {
        let a: Real = (0..7)
            .map(|i| {
                (0..7)
                    .map(|j| (((i + 1) * (j + 2) * 37) % 19) as f64 / 7.0 - 1.2)
                    .collect()
            })
            .collect();
        let ac: Cplx = a
            .iter()
            .map(|r| r.iter().map(|&v| Complex64::new(v, 0.0)).collect())
            .collect();
        let er = sorted(eigenvalues_real(a).unwrap());
        let ec = sorted(eigenvalues_complex(ac).unwrap());
        for (x, y) in er.iter().zip(&ec) {
            assert!((x - y).norm() < 1e-9, "{x} vs {y}");
        }
    }
}
