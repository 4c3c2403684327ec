//! Deterministic algebra on doubly stochastic matrices.
//!
//! An `n x n` doubly stochastic matrix is determined by its bottom-right
//! `(n-1) x (n-1)` corner: the first row and column are forced by the unit
//! row and column sums. [`phi_project`] takes the corner, [`gamma_extend`]
//! rebuilds the full matrix, and [`membership_sn`] tests whether a corner
//! extends to a matrix with entries in range.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{ComplexMatrix, DenseMatrix};

pub const DEFAULT_TOL: f64 = 1e-9;

/// Nonnegative square matrix with unit row and column sums (within `tol`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DoublyStochasticMatrix {
    n: usize,
    m: DenseMatrix,
    tol: f64,
}

impl DoublyStochasticMatrix {
    pub fn new(m: DenseMatrix) -> Result<Self> {
        Self::with_tol(m, DEFAULT_TOL)
    }

    pub fn with_tol(m: DenseMatrix, tol: f64) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "doubly stochastic matrix must be square, got {}x{}",
                m.rows(),
                m.cols()
            )));
        }
        if !(tol >= 0.0) {
            return Err(Error::InvalidInput(format!("tolerance {tol} must be >= 0")));
        }
        let n = m.rows();
        if n == 0 {
            return Err(Error::Dimension("empty matrix".into()));
        }
        if let Some((idx, v)) = m.entries().iter().enumerate().find(|(_, v)| **v < -tol) {
            return Err(Error::Constraint(format!(
                "entry ({}, {}) = {v} is negative",
                idx / n,
                idx % n
            )));
        }
        for (i, s) in m.row_sums().iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return Err(Error::Constraint(format!("row {i} sums to {s}")));
            }
        }
        for (j, s) in m.col_sums().iter().enumerate() {
            if (s - 1.0).abs() > tol {
                return Err(Error::Constraint(format!("column {j} sums to {s}")));
            }
        }
        Ok(Self { n, m, tol })
    }

    /// The all-`1/n` matrix `J_n`, which is also `E[X]` for uniform `X`.
    pub fn uniform_center(n: usize) -> Self {
        Self {
            n,
            m: DenseMatrix::filled(n, n, 1.0 / n as f64),
            tol: DEFAULT_TOL,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            m: DenseMatrix::identity(n),
            tol: DEFAULT_TOL,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.m
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.m[(i, j)]
    }
}

/// Bottom-right `(n-1) x (n-1)` corner of an `n x n` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CornerBlock {
    n: usize,
    block: DenseMatrix,
}

impl CornerBlock {
    pub fn new(block: DenseMatrix) -> Result<Self> {
        if !block.is_square() {
            return Err(Error::Dimension(format!(
                "corner block must be square, got {}x{}",
                block.rows(),
                block.cols()
            )));
        }
        Ok(Self {
            n: block.rows() + 1,
            block,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn block(&self) -> &DenseMatrix {
        &self.block
    }
}

/// `(x_ij - x_i1)` for `2 <= i, j <= n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReducedMatrix {
    n: usize,
    m: DenseMatrix,
}

impl ReducedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.m
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.m
    }
}

/// `scale * X` with the first row replaced by `sqrt(n)` and `z0` subtracted
/// from the lower diagonal; its determinant is `sqrt(n) det(scale * Xbar - z0 I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedMatrix {
    n: usize,
    z0: Complex64,
    m: ComplexMatrix,
}

impl AugmentedMatrix {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z0(&self) -> Complex64 {
        self.z0
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.m
    }
}

/// Full matrix from a corner block, without range checks.
pub fn gamma_extend_raw(block: &CornerBlock) -> DenseMatrix {
    let n = block.n;
    let b = &block.block;
    let mut out = DenseMatrix::zeros(n, n);
    let mut total = 0.0;
    for i in 1..n {
        let mut row = 0.0;
        for j in 1..n {
            let v = b[(i - 1, j - 1)];
            out[(i, j)] = v;
            row += v;
        }
        out[(i, 0)] = 1.0 - row;
    }
    for j in 1..n {
        let col: f64 = (1..n).map(|i| b[(i - 1, j - 1)]).sum();
        let v = 1.0 - col;
        out[(0, j)] = v;
        total += v;
    }
    out[(0, 0)] = 1.0 - total;
    out
}

/// Extend a corner block to the unique matrix with unit row and column sums,
/// rejecting it when any resulting entry leaves `[-tol, 1 + tol]`.
pub fn gamma_extend(block: &CornerBlock) -> Result<DoublyStochasticMatrix> {
    gamma_extend_with_tol(block, DEFAULT_TOL)
}

pub fn gamma_extend_with_tol(block: &CornerBlock, tol: f64) -> Result<DoublyStochasticMatrix> {
    let full = gamma_extend_raw(block);
    let n = block.n;
    for i in 0..n {
        for j in 0..n {
            let v = full[(i, j)];
            if v < -tol || v > 1.0 + tol {
                return Err(Error::Constraint(format!(
                    "extended entry ({i}, {j}) = {v} outside [0, 1]"
                )));
            }
        }
    }
    DoublyStochasticMatrix::with_tol(full, tol)
}

pub fn phi_project(x: &DoublyStochasticMatrix) -> CornerBlock {
    let n = x.n;
    CornerBlock {
        n,
        block: DenseMatrix::from_fn(n - 1, n - 1, |i, j| x.m[(i + 1, j + 1)]),
    }
}

/// Largest allowed entry for the bounded model, `10 ln n / n`, capped at 1.
pub fn bounded_entry_limit(n: usize) -> f64 {
    (10.0 * (n as f64).ln() / n as f64).min(1.0)
}

/// Whether every entry of the extension lies in `[-tol, entry_bound + tol]`.
/// `entry_bound` is clamped to 1; pass [`bounded_entry_limit`] for the
/// bounded-entry variant.
pub fn membership_sn(block: &CornerBlock, entry_bound: f64, tol: f64) -> bool {
    let bound = entry_bound.min(1.0);
    gamma_extend_raw(block)
        .entries()
        .iter()
        .all(|&v| v >= -tol && v <= bound + tol)
}

pub fn reduce_bar(x: &DoublyStochasticMatrix) -> ReducedMatrix {
    let n = x.n;
    ReducedMatrix {
        n,
        m: DenseMatrix::from_fn(n - 1, n - 1, |i, j| x.m[(i + 1, j + 1)] - x.m[(i + 1, 0)]),
    }
}

/// `sqrt(n) (X - J_n)`.
pub fn center_and_scale(x: &DoublyStochasticMatrix) -> DenseMatrix {
    let n = x.n as f64;
    let s = n.sqrt();
    let c = 1.0 / n;
    DenseMatrix::from_fn(x.n, x.n, |i, j| s * (x.m[(i, j)] - c))
}

/// Build the `n x n` matrix whose first row is all `sqrt(n)`, with
/// `scale * x_i1` below it in the first column and `scale * x_ij - z0 [i == j]`
/// elsewhere. Use `scale = sqrt(n)` for the doubly stochastic model.
pub fn augment_minus_f(x: &DoublyStochasticMatrix, z0: Complex64, scale: f64) -> Result<AugmentedMatrix> {
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidInput(format!("scale {scale} must be positive")));
    }
    if !z0.re.is_finite() || !z0.im.is_finite() {
        return Err(Error::InvalidInput("z0 must be finite".into()));
    }
    let n = x.n;
    let root_n = (n as f64).sqrt();
    let m = ComplexMatrix::from_fn(n, n, |i, j| {
        if i == 0 {
            Complex64::new(root_n, 0.0)
        } else if i == j {
            Complex64::new(scale * x.m[(i, j)], 0.0) - z0
        } else {
            Complex64::new(scale * x.m[(i, j)], 0.0)
        }
    });
    Ok(AugmentedMatrix { n, z0, m })
}

/// `sqrt(n) Xbar - z0 I`, the `(n-1) x (n-1)` matrix whose determinant and
/// least singular value the circular-law argument controls.
pub fn shifted_bar(x: &DoublyStochasticMatrix, z0: Complex64) -> ComplexMatrix {
    let n = x.n;
    let s = (n as f64).sqrt();
    ComplexMatrix::from_fn(n - 1, n - 1, |i, j| {
        let v = Complex64::new(s * (x.m[(i + 1, j + 1)] - x.m[(i + 1, 0)]), 0.0);
        if i == j {
            v - z0
        } else {
            v
        }
    })
}

/// `sum_{2 <= i, j <= n} (x_ij - x_i1)^2`.
pub fn hs_norm_sq_bar(x: &DoublyStochasticMatrix) -> f64 {
    let n = x.n;
    let mut total = 0.0;
    for i in 1..n {
        let base = x.m[(i, 0)];
        for j in 1..n {
            let d = x.m[(i, j)] - base;
            total += d * d;
        }
    }
    total
}

/// Asymptotic log-volume of the set of valid corner blocks,
/// `-(n-1) ln n - (n - 1/2) ln(2 pi) - (n-1)^2 ln n + 1/3 + n^2`,
/// with the vanishing correction term dropped. Only meaningful as `n` grows.
pub fn log_volume_sn(n: usize) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n = {n} must be >= 2")));
    }
    let nf = n as f64;
    let ln_n = nf.ln();
    let ln_2pi = (2.0 * std::f64::consts::PI).ln();
    Ok(-(nf - 1.0) * ln_n - (nf - 0.5) * ln_2pi - (nf - 1.0).powi(2) * ln_n + 1.0 / 3.0 + nf * nf)
}
