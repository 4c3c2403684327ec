//! Spectra of dense matrices and the statistics that compare them with
//! their limiting laws.

use std::f64::consts::PI;
use std::fmt::Write as _;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{eig, svd};
use crate::matrix::{ComplexMatrix, DenseMatrix};
use crate::stats::ks_one_sample;

/// Eigenvalue multiset; order carries no meaning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn sum(&self) -> Complex64 {
        self.values.iter().sum()
    }

    /// Pool several spectra into one multiset.
    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a ComplexSpectrum>) -> Self {
        Self {
            values: parts.into_iter().flat_map(|s| s.values.iter().copied()).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("re,im\n");
        for z in &self.values {
            let _ = writeln!(out, "{:e},{:e}", z.re, z.im);
        }
        out
    }
}

/// Singular values, sorted descending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularSpectrum {
    values: Vec<f64>,
}

impl SingularSpectrum {
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if let Some(v) = values.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "singular value {v} must be finite and >= 0"
            )));
        }
        values.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Smallest singular value; 0 for an empty spectrum.
    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// The `k`-th largest value, 1-based.
    pub fn nth(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i).copied())
    }

    pub fn squares(&self) -> Vec<f64> {
        self.values.iter().map(|s| s * s).collect()
    }

    pub fn pooled<'a>(parts: impl IntoIterator<Item = &'a SingularSpectrum>) -> Self {
        let values = parts.into_iter().flat_map(|s| s.values.iter().copied()).collect();
        Self::new(values).expect("pooled spectra are valid")
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sigma\n");
        for s in &self.values {
            let _ = writeln!(out, "{s:e}");
        }
        out
    }
}

/// Cut-off parameters for truncated log-sums, `eps = delta = n^{-c}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationConfig {
    pub epsilon: f64,
    pub delta: f64,
    pub c_exponent: f64,
}

impl TruncationConfig {
    pub const DEFAULT_EXPONENT: f64 = 0.25;

    pub fn for_n(n: usize) -> Self {
        Self::with_exponent(n, Self::DEFAULT_EXPONENT)
    }

    pub fn with_exponent(n: usize, c: f64) -> Self {
        let e = (n.max(1) as f64).powf(-c);
        Self {
            epsilon: e,
            delta: e,
            c_exponent: c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0) || !(self.delta > 0.0) {
            return Err(Error::InvalidInput("epsilon and delta must be positive".into()));
        }
        Ok(())
    }
}

/// One-dimensional KS distances between an eigenvalue sample and the
/// uniform law on the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceReport {
    pub radial_ks: f64,
    pub angular_ks: f64,
    pub marginal_ks: f64,
    pub sample_size: usize,
}

impl DistanceReport {
    pub fn max(&self) -> f64 {
        self.radial_ks.max(self.angular_ks).max(self.marginal_ks)
    }
}

/// `log |det|` with an explicit singular flag instead of an error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogAbsDet {
    pub value: f64,
    pub is_singular: bool,
}

impl LogAbsDet {
    fn from_singular_values(sv: &[f64]) -> Self {
        if sv.contains(&0.0) {
            return Self {
                value: f64::NEG_INFINITY,
                is_singular: true,
            };
        }
        Self {
            value: sv.iter().map(|s| s.ln()).sum(),
            is_singular: false,
        }
    }
}

fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

fn check_square(rows: usize, cols: usize) -> Result<()> {
    if rows != cols {
        return Err(Error::Dimension(format!("expected a square matrix, got {rows}x{cols}")));
    }
    Ok(())
}

/// All eigenvalues of a real square matrix, with multiplicity.
pub fn eigenvalues(m: &DenseMatrix) -> Result<ComplexSpectrum> {
    check_square(m.rows(), m.cols())?;
    Ok(ComplexSpectrum::new(eig::eigenvalues_real(rows_of(m))?))
}

/// All eigenvalues of a complex square matrix, with multiplicity.
pub fn eigenvalues_complex(m: &ComplexMatrix) -> Result<ComplexSpectrum> {
    check_square(m.rows(), m.cols())?;
    if m.is_real() {
        return eigenvalues(m.re());
    }
    Ok(ComplexSpectrum::new(eig::eigenvalues_complex(m.to_rows())?))
}

/// `||M v - lambda v|| / ||M||_F` for the eigenvector recovered by inverse
/// iteration.
pub fn eigen_residual(m: &ComplexMatrix, lambda: Complex64) -> Result<f64> {
    check_square(m.rows(), m.cols())?;
    let rows = m.to_rows();
    let v = eig::inverse_iteration(&rows, lambda)?;
    let mut r2 = 0.0;
    for (row, vi) in rows.iter().zip(&v) {
        let mv: Complex64 = row.iter().zip(&v).map(|(a, b)| a * b).sum();
        r2 += (mv - lambda * vi).norm_sqr();
    }
    let norm = m.frobenius_norm();
    Ok(if norm == 0.0 { r2.sqrt() } else { r2.sqrt() / norm })
}

/// Singular values of a real matrix of any shape.
pub fn singular_values(m: &DenseMatrix) -> SingularSpectrum {
    let (r, c) = (m.rows(), m.cols());
    let cols: Vec<Vec<f64>> = if r >= c {
        (0..c).map(|j| (0..r).map(|i| m[(i, j)]).collect()).collect()
    } else {
        rows_of(m)
    };
    SingularSpectrum {
        values: svd::singular_values_real(cols),
    }
}

/// Singular values of a complex matrix of any shape.
pub fn singular_values_complex(m: &ComplexMatrix) -> SingularSpectrum {
    if m.is_real() {
        return singular_values(m.re());
    }
    let (r, c) = (m.rows(), m.cols());
    let cols: Vec<Vec<Complex64>> = if r >= c {
        (0..c).map(|j| (0..r).map(|i| m.get(i, j)).collect()).collect()
    } else {
        m.to_rows()
    };
    SingularSpectrum {
        values: svd::singular_values_complex(cols),
    }
}

/// `sum ln sigma_i`; `-inf` with `is_singular` set when some `sigma_i` is 0.
pub fn log_abs_det(m: &DenseMatrix) -> Result<LogAbsDet> {
    check_square(m.rows(), m.cols())?;
    Ok(LogAbsDet::from_singular_values(singular_values(m).values()))
}

pub fn log_abs_det_complex(m: &ComplexMatrix) -> Result<LogAbsDet> {
    check_square(m.rows(), m.cols())?;
    Ok(LogAbsDet::from_singular_values(singular_values_complex(m).values()))
}

/// `int log|w - z| dmu(w)` for `mu` uniform on the unit disk.
pub fn circular_potential(z: Complex64) -> f64 {
    let r2 = z.norm_sqr();
    if r2 <= 1.0 {
        0.5 * (r2 - 1.0)
    } else {
        0.5 * r2.ln()
    }
}

/// CDF of the real part of a uniform point on the unit disk.
pub fn disk_marginal_cdf(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        0.5 + (x * (1.0 - x * x).sqrt() + x.asin()) / PI
    }
}

pub fn esd_circular_distance(spec: &ComplexSpectrum) -> Result<DistanceReport> {
    if spec.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let radii: Vec<f64> = spec.values.iter().map(|z| z.norm()).collect();
    let angles: Vec<f64> = spec.values.iter().map(|z| z.arg()).collect();
    let reals: Vec<f64> = spec.values.iter().map(|z| z.re).collect();
    Ok(DistanceReport {
        radial_ks: ks_one_sample(&radii, |r| (r * r).min(1.0)),
        angular_ks: ks_one_sample(&angles, |t| ((t + PI) / (2.0 * PI)).clamp(0.0, 1.0)),
        marginal_ks: ks_one_sample(&reals, disk_marginal_cdf),
        sample_size: spec.len(),
    })
}

/// Density of the quarter-circle law on `[0, 2]`.
pub fn quarter_circle_density(x: f64) -> f64 {
    if (0.0..=2.0).contains(&x) {
        (4.0 - x * x).sqrt() / PI
    } else {
        0.0
    }
}

pub fn quarter_circle_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 2.0 {
        1.0
    } else {
        (x * (4.0 - x * x).sqrt() / 2.0 + 2.0 * (x / 2.0).asin()) / PI
    }
}

pub fn quarter_circle_distance(sv: &SingularSpectrum) -> Result<f64> {
    if sv.is_empty() {
        return Err(Error::InvalidInput("empty singular spectrum".into()));
    }
    Ok(ks_one_sample(sv.values(), quarter_circle_cdf))
}

/// `(1/n) sum_{sigma_i^2 >= eps} ln sigma_i` with `n` the number of values.
pub fn truncated_log_sum(sv: &SingularSpectrum, cfg: &TruncationConfig) -> Result<f64> {
    cfg.validate()?;
    if sv.is_empty() {
        return Err(Error::InvalidInput("empty singular spectrum".into()));
    }
    let s: f64 = sv
        .values()
        .iter()
        .filter(|&&s| s * s >= cfg.epsilon)
        .map(|s| s.ln())
        .sum();
    Ok(s / sv.len() as f64)
}

/// Number of values in the closed interval `[lo, hi]`.
pub fn count_eigs_in_interval(values: &[f64], lo: f64, hi: f64) -> Result<usize> {
    if !(lo <= hi) {
        return Err(Error::InvalidInput(format!("empty interval [{lo}, {hi}]")));
    }
    Ok(values.iter().filter(|&&v| v >= lo && v <= hi).count())
}

/// `(1/n) sum 1 / (lambda_j - z)`.
pub fn stieltjes_transform(values: &[f64], z: Complex64) -> Result<Complex64> {
    if values.is_empty() {
        return Err(Error::InvalidInput("empty spectrum".into()));
    }
    let mut s = Complex64::new(0.0, 0.0);
    for &l in values {
        let d = Complex64::new(l, 0.0) - z;
        let dist = d.norm();
        if dist < 1e-14 {
            return Err(Error::PoleTooClose { distance: dist });
        }
        s += d.inv();
    }
    Ok(s / values.len() as f64)
}

/// Largest distance in a greedy nearest-neighbour pairing of two multisets
/// of equal size. Exact whenever the true pairing is well separated.
pub fn matching_distance(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "spectra of sizes {} and {}",
            a.len(),
            b.len()
        )));
    }
    let mut used = vec![false; b.len()];
    let mut worst: f64 = 0.0;
    for za in a {
        let (k, d) = b
            .iter()
            .enumerate()
            .filter(|(k, _)| !used[*k])
            .map(|(k, zb)| (k, (za - zb).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("sizes match");
        used[k] = true;
        worst = worst.max(d);
    }
    Ok(worst)
}
