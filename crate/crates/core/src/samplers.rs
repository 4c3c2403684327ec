//! Random generation on the simplex and the Birkhoff polytope.
//!
//! [`hit_and_run_chain`] is the workhorse sampler for uniform doubly
//! stochastic matrices. [`rejection_sample_ds`] is exact but only practical
//! for `n <= 4`; it exists to cross-check the chain. [`sinkhorn_project`]
//! produces doubly stochastic matrices that are *not* uniformly distributed.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::birkhoff::{gamma_extend_raw, CornerBlock, DoublyStochasticMatrix, DEFAULT_TOL};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::RngStream;

/// Uniform point on the probability simplex in `R^n`.
pub fn sample_simplex(n: usize, rng: &mut RngStream) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidInput("simplex dimension must be >= 1".into()));
    }
    let mut x: Vec<f64> = (0..n).map(|_| rng.exponential()).collect();
    let total: f64 = x.iter().sum();
    for v in &mut x {
        *v /= total;
    }
    Ok(x)
}

/// Exponential law truncated to `[0, 10 ln n]`, density `e^{-x} / (1 - n^{-10})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedExponentialSpec {
    pub n: usize,
    pub cutoff: f64,
    pub normalizer: f64,
}

impl TruncatedExponentialSpec {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidInput(format!("truncation needs n >= 2, got {n}")));
        }
        let nf = n as f64;
        Ok(Self {
            n,
            cutoff: 10.0 * nf.ln(),
            normalizer: 1.0 - nf.powi(-10),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        if (0.0..=self.cutoff).contains(&x) {
            (-x).exp() / self.normalizer
        } else {
            0.0
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else if x >= self.cutoff {
            1.0
        } else {
            -(-x).exp_m1() / self.normalizer
        }
    }

    /// Inverse-CDF draw.
    pub fn sample(&self, rng: &mut RngStream) -> f64 {
        let u = rng.uniform();
        (-(-u * self.normalizer).ln_1p()).min(self.cutoff)
    }

    pub fn mean(&self) -> f64 {
        let l = self.cutoff;
        (1.0 - (-l).exp() * (1.0 + l)) / self.normalizer
    }

    pub fn second_moment(&self) -> f64 {
        let l = self.cutoff;
        (2.0 - (-l).exp() * (l * l + 2.0 * l + 2.0)) / self.normalizer
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.second_moment() - m * m
    }
}

/// `n x n` matrix of i.i.d. `Exp(1)` entries, or truncated entries when
/// `spec` is given.
pub fn sample_exponential_matrix(
    n: usize,
    spec: Option<&TruncatedExponentialSpec>,
    rng: &mut RngStream,
) -> DenseMatrix {
    match spec {
        None => DenseMatrix::from_fn(n, n, |_, _| rng.exponential()),
        Some(s) => DenseMatrix::from_fn(n, n, |_, _| s.sample(rng)),
    }
}

/// One draw of the transference rejection sampler: `Y` i.i.d. `Exp(1)`,
/// accepted iff the corner of `Y / n` lies in `S_n` and every first-row and
/// first-column entry of `Y / n` dominates the forced extension.
pub fn rejection_attempt(n: usize, rng: &mut RngStream) -> Option<DoublyStochasticMatrix> {
    let y = sample_exponential_matrix(n, None, rng).scale(1.0 / n as f64);
    let block = CornerBlock::new(DenseMatrix::from_fn(n - 1, n - 1, |i, j| y[(i + 1, j + 1)])).ok()?;
    let g = gamma_extend_raw(&block);
    if g.entries().iter().any(|&v| !(0.0..=1.0).contains(&v)) {
        return None;
    }
    for k in 0..n {
        if y[(0, k)] < g[(0, k)] || y[(k, 0)] < g[(k, 0)] {
            return None;
        }
    }
    DoublyStochasticMatrix::new(g).ok()
}

/// Exactly uniform doubly stochastic matrix, or `None` after `max_tries`
/// rejected draws. Acceptance decays like `n^{-O(n)}`.
pub fn rejection_sample_ds(n: usize, max_tries: usize, rng: &mut RngStream) -> Result<Option<DoublyStochasticMatrix>> {
    if n < 2 {
        return Err(Error::InvalidInput(format!("n = {n} must be >= 2")));
    }
    for _ in 0..max_tries {
        if let Some(x) = rejection_attempt(n, rng) {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// Proposal directions for [`hit_and_run_chain`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `e_ij - e_il - e_kj + e_kl` for uniformly chosen rows `i != k` and
    /// columns `j != l`. Constant cost per step.
    #[default]
    Swap,
    /// Isotropic Gaussian direction in the corner coordinates. Cost `O(n^2)`
    /// per step and chords shrink like `1/n^2`, so mixing is slow for large `n`.
    Isotropic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainConfig {
    pub n: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub chord_tol: f64,
    #[serde(default)]
    pub direction: Direction,
}

impl ChainConfig {
    pub fn new(n: usize) -> Self {
        let d = n.saturating_sub(1).pow(2);
        Self {
            n,
            burn_in: 20 * d,
            thin: (2 * d).max(1),
            chord_tol: 1e-12,
            direction: Direction::Swap,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidInput(format!("chain needs n >= 2, got {}", self.n)));
        }
        if self.thin == 0 {
            return Err(Error::InvalidInput("thin must be >= 1".into()));
        }
        if !(self.chord_tol >= 0.0) {
            return Err(Error::InvalidInput("chord_tol must be >= 0".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ChainDiagnostics {
    pub steps: u64,
    pub degenerate_chords: u64,
    pub mean_chord_length: f64,
}

#[derive(Debug, Clone)]
pub struct ChainOutput {
    pub samples: Vec<DoublyStochasticMatrix>,
    pub diagnostics: ChainDiagnostics,
}

const PARALLEL_TOL: f64 = 1e-14;
const MAX_CONSECUTIVE_DEGENERATE: u64 = 10_000;

struct Walker {
    n: usize,
    x: Vec<f64>,
    chord_tol: f64,
    direction: Direction,
    diag: ChainDiagnostics,
    chord_sum: f64,
    dir: Vec<f64>,
}

impl Walker {
    fn step(&mut self, rng: &mut RngStream) -> Result<()> {
        let mut misses = 0;
        loop {
            let moved = match self.direction {
                Direction::Swap => self.swap_step(rng),
                Direction::Isotropic => self.isotropic_step(rng),
            };
            if moved {
                self.diag.steps += 1;
                return Ok(());
            }
            self.diag.degenerate_chords += 1;
            misses += 1;
            if misses >= MAX_CONSECUTIVE_DEGENERATE {
                return Err(Error::NoConvergence {
                    routine: "hit_and_run_chain",
                    iterations: misses as usize,
                });
            }
        }
    }

    fn swap_step(&mut self, rng: &mut RngStream) -> bool {
        let n = self.n;
        let i = rng.below(n);
        let k = (i + 1 + rng.below(n - 1)) % n;
        let j = rng.below(n);
        let l = (j + 1 + rng.below(n - 1)) % n;
        let (ij, il, kj, kl) = (i * n + j, i * n + l, k * n + j, k * n + l);
        let x = &mut self.x;
        let lo = -x[ij].min(x[kl]);
        let hi = x[il].min(x[kj]);
        let len = hi - lo;
        if len < self.chord_tol {
            return false;
        }
        self.chord_sum += len;
        let t = (lo + rng.uniform() * len).clamp(lo, hi);
        x[ij] += t;
        x[kl] += t;
        x[il] -= t;
        x[kj] -= t;
        true
    }

    fn isotropic_step(&mut self, rng: &mut RngStream) -> bool {
        let n = self.n;
        let d = &mut self.dir;
        d.iter_mut().for_each(|v| *v = 0.0);
        let mut total = 0.0;
        for i in 1..n {
            for j in 1..n {
                let g: f64 = rng.sample(StandardNormal);
                d[i * n + j] = g;
                d[i * n] -= g;
                d[j] -= g;
                total += g;
            }
        }
        d[0] = total;
        let mut lo = f64::NEG_INFINITY;
        let mut hi = f64::INFINITY;
        for (xv, dv) in self.x.iter().zip(d.iter()) {
            if dv.abs() < PARALLEL_TOL {
                continue;
            }
            let (a, b) = (-xv / dv, (1.0 - xv) / dv);
            let (a, b) = if *dv > 0.0 { (a, b) } else { (b, a) };
            lo = lo.max(a);
            hi = hi.min(b);
        }
        let len = hi - lo;
        if !(len >= self.chord_tol) || !len.is_finite() {
            return false;
        }
        self.chord_sum += len;
        let t = (lo + rng.uniform() * len).clamp(lo, hi);
        for (xv, dv) in self.x.iter_mut().zip(d.iter()) {
            *xv = (*xv + t * dv).clamp(0.0, 1.0);
        }
        true
    }

    fn snapshot(&self) -> Result<DoublyStochasticMatrix> {
        DoublyStochasticMatrix::new(DenseMatrix::from_vec(self.n, self.n, self.x.clone())?)
    }
}

/// Hit-and-run on the Birkhoff polytope started at `J_n`.
///
/// Returns `count` states taken after `burn_in` steps and then every `thin`
/// steps. The stationary law is uniform for either [`Direction`].
pub fn hit_and_run_chain(cfg: &ChainConfig, count: usize, rng: &mut RngStream) -> Result<ChainOutput> {
    cfg.validate()?;
    let n = cfg.n;
    let mut w = Walker {
        n,
        x: vec![1.0 / n as f64; n * n],
        chord_tol: cfg.chord_tol,
        direction: cfg.direction,
        diag: ChainDiagnostics::default(),
        chord_sum: 0.0,
        dir: vec![0.0; n * n],
    };
    for _ in 0..cfg.burn_in {
        w.step(rng)?;
    }
    let mut samples = Vec::with_capacity(count);
    for s in 0..count {
        if s > 0 {
            for _ in 0..cfg.thin {
                w.step(rng)?;
            }
        }
        samples.push(w.snapshot()?);
    }
    let mut diagnostics = w.diag;
    if diagnostics.steps > 0 {
        diagnostics.mean_chord_length = w.chord_sum / diagnostics.steps as f64;
    }
    Ok(ChainOutput { samples, diagnostics })
}

fn sum_deviation(m: &DenseMatrix) -> f64 {
    m.row_sums()
        .into_iter()
        .chain(m.col_sums())
        .map(|s| (s - 1.0).abs())
        .fold(0.0, f64::max)
}

/// Alternating row/column normalization of a positive matrix. Returns the
/// scaled matrix and the number of sweeps performed.
pub fn sinkhorn_scale(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<(DenseMatrix, usize)> {
    if !m.is_square() || m.rows() == 0 {
        return Err(Error::Dimension(format!(
            "sinkhorn needs a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if m.entries().iter().any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidInput("sinkhorn needs strictly positive entries".into()));
    }
    let n = m.rows();
    let mut a = m.clone();
    for iter in 0..=max_iter {
        if sum_deviation(&a) < tol {
            return Ok((a, iter));
        }
        if iter == max_iter {
            break;
        }
        for (i, s) in a.row_sums().into_iter().enumerate() {
            for j in 0..n {
                a[(i, j)] /= s;
            }
        }
        for (j, s) in a.col_sums().into_iter().enumerate() {
            for i in 0..n {
                a[(i, j)] /= s;
            }
        }
    }
    Err(Error::NoConvergence {
        routine: "sinkhorn_project",
        iterations: max_iter,
    })
}

/// Scale a positive matrix to be doubly stochastic. The output is an
/// approximation utility and is not uniformly distributed on the polytope.
pub fn sinkhorn_project(m: &DenseMatrix, tol: f64, max_iter: usize) -> Result<DoublyStochasticMatrix> {
    let (a, _) = sinkhorn_scale(m, tol, max_iter)?;
    DoublyStochasticMatrix::with_tol(a, tol.max(DEFAULT_TOL))
}

/// Draw `(x_2, ..., x_n)` with `x_i ~ U[0, 1 - s_i]` conditioned on
/// `s_1 <= sum x_i <= 1`, where `s_1 = (n - 2) - sum s_i` and `s` holds
/// `s_2, ..., s_n`. Returns `None` after `max_tries` rejections.
pub fn sample_constrained_row(s: &[f64], rng: &mut RngStream, max_tries: usize) -> Result<Option<Vec<f64>>> {
    let s1 = constrained_row_lower(s)?;
    let mut x = vec![0.0; s.len()];
    for _ in 0..max_tries {
        let mut total = 0.0;
        for (xi, si) in x.iter_mut().zip(s) {
            *xi = rng.uniform() * (1.0 - si);
            total += *xi;
        }
        if total >= s1 && total <= 1.0 {
            return Ok(Some(x));
        }
    }
    Ok(None)
}

/// `s_1 = (n - 2) - sum_{i >= 2} s_i`, validated to lie in `[0, 1]`.
pub fn constrained_row_lower(s: &[f64]) -> Result<f64> {
    if s.is_empty() {
        return Err(Error::InvalidInput("need at least one column sum".into()));
    }
    if let Some(v) = s.iter().find(|&&v| !(v <= 1.0 - DEFAULT_TOL) || v < 0.0) {
        return Err(Error::InvalidInput(format!("column sum {v} must lie in [0, 1)")));
    }
    let n = s.len() + 1;
    let s1 = (n as f64 - 2.0) - s.iter().sum::<f64>();
    if !(-DEFAULT_TOL..=1.0 + DEFAULT_TOL).contains(&s1) {
        return Err(Error::InvalidInput(format!("implied s_1 = {s1} outside [0, 1]")));
    }
    Ok(s1.max(0.0))
}
