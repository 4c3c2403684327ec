#![allow(dead_code)]

use birkhoff_spectra::{hit_and_run_chain, ChainConfig, DoublyStochasticMatrix, RngStream};

pub fn sample_ds(n: usize, seed: u64) -> DoublyStochasticMatrix {
    let mut rng = RngStream::new(seed);
    hit_and_run_chain(&ChainConfig::new(n), 1, &mut rng)
        .unwrap()
        .samples
        .remove(0)
}

pub fn sample_many(n: usize, count: usize, seed: u64) -> Vec<DoublyStochasticMatrix> {
    let mut rng = RngStream::new(seed);
    hit_and_run_chain(&ChainConfig::new(n), count, &mut rng)
        .unwrap()
        .samples
}

use birkhoff_spectra::linalg::Lu;
use birkhoff_spectra::spectral::{eigenvalues, matching_distance, singular_values};
use birkhoff_spectra::DenseMatrix;
use num_complex::Complex64;

pub fn random_dense(n: usize, rng: &mut RngStream) -> DenseMatrix {
    DenseMatrix::from_fn(n, n, |_, _| 2.0 * rng.uniform() - 1.0)
}

/// Worst errors of one instance of the eigen/SVD oracle suite.
#[derive(Debug, Clone, Copy, Default)]
pub struct OracleErrors {
    pub trace: f64,
    pub det: f64,
    pub similarity: f64,
    pub companion: f64,
}

impl OracleErrors {
    pub fn worst(self, other: Self) -> Self {
        Self {
            trace: self.trace.max(other.trace),
            det: self.det.max(other.det),
            similarity: self.similarity.max(other.similarity),
            companion: self.companion.max(other.companion),
        }
    }
}

fn real_rows(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Companion matrix of the monic polynomial with the given coefficients
/// `c_0 + c_1 z + ... + c_{d-1} z^{d-1} + z^d`.
pub fn companion(coeffs: &[f64]) -> DenseMatrix {
    let d = coeffs.len();
    DenseMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -coeffs[d - 1 - j]
        } else if i == j + 1 {
            1.0
        } else {
            0.0
        }
    })
}

fn monic_from_roots(roots: &[f64]) -> Vec<f64> {
    // Ascending coefficients, leading 1 dropped at the end.
    let mut p = vec![1.0];
    for &r in roots {
        let mut q = vec![0.0; p.len() + 1];
        for (k, &a) in p.iter().enumerate() {
            q[k + 1] += a;
            q[k] -= r * a;
        }
        p = q;
    }
    p.pop();
    p
}

/// Companion roots: `z^d - c` with known roots `c^(1/d) w^k`, and a
/// degree <= 6 polynomial with separated real roots.
fn companion_error(d: usize, rng: &mut RngStream) -> f64 {
    let c = 0.5 + 1.5 * rng.uniform();
    let mut coeffs = vec![0.0; d];
    coeffs[0] = -c;
    let got = eigenvalues(&companion(&coeffs)).unwrap().values;
    let r = c.powf(1.0 / d as f64);
    let want: Vec<Complex64> = (0..d)
        .map(|k| Complex64::from_polar(r, 2.0 * std::f64::consts::PI * k as f64 / d as f64))
        .collect();
    let e1 = matching_distance(&got, &want).unwrap();

    let k = 1 + d % 6;
    let roots: Vec<f64> = (0..k).map(|i| -1.5 + 0.6 * i as f64 + 0.1 * rng.uniform()).collect();
    let got = eigenvalues(&companion(&monic_from_roots(&roots))).unwrap().values;
    let want: Vec<Complex64> = roots.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    e1.max(matching_distance(&got, &want).unwrap())
}

pub fn oracle_instance(n: usize, rng: &mut RngStream) -> OracleErrors {
    let m = random_dense(n, rng);
    let spec = eigenvalues(&m).unwrap();
    let trace = (spec.sum() - Complex64::new(m.trace(), 0.0)).norm() / m.frobenius_norm().max(1.0);

    let lu = Lu::factor_real(&real_rows(&m)).unwrap();
    let (log_det, _) = lu.log_det();
    let log_sigma: f64 = singular_values(&m).values().iter().map(|s| s.ln()).sum();
    let det = ((log_sigma - log_det).exp() - 1.0).abs();

    // P = I + E / (4 sqrt n) keeps P well conditioned.
    let e = random_dense(n, rng).scale(0.25 / (n as f64).sqrt());
    let p = DenseMatrix::identity(n).add(&e).unwrap();
    let mp = m.matmul(&p).unwrap();
    let p_lu = Lu::factor_real(&real_rows(&p)).unwrap();
    let mut sim = DenseMatrix::zeros(n, n);
    for j in 0..n {
        let col: Vec<Complex64> = (0..n).map(|i| Complex64::new(mp[(i, j)], 0.0)).collect();
        for (i, v) in p_lu.solve(&col).unwrap().into_iter().enumerate() {
            sim[(i, j)] = v.re;
        }
    }
    let similarity = matching_distance(&spec.values, &eigenvalues(&sim).unwrap().values).unwrap();

    OracleErrors {
        trace,
        det,
        similarity,
        companion: companion_error(n, rng),
    }
}
